//! Discrete paths in configuration space: a uniform time grid with one
//! configuration per node. These are the unknowns of the direct
//! minimization and the carrier for test paths and assembled arcs.

use crate::error::Error;
use crate::planar::Vec2;
use crate::shape_geometry::Configuration;
use crate::Result;

/// A path over `[0, T]` sampled at `n + 1` uniformly spaced nodes.
#[derive(Clone, Debug)]
pub struct DiscretePath {
    time_span: f64,
    nodes: Vec<Configuration>,
}

impl DiscretePath {
    pub fn new(time_span: f64, nodes: Vec<Configuration>) -> Result<Self> {
        if !(time_span > 0.0) {
            return Err(Error::InvalidInput("path time span must be positive".into()));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("path needs at least two nodes".into()));
        }
        Ok(DiscretePath { time_span, nodes })
    }

    pub fn time_span(&self) -> f64 {
        self.time_span
    }

    pub fn nodes(&self) -> &[Configuration] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &Configuration {
        &self.nodes[k]
    }

    pub fn n_segments(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Time step h = T/n.
    pub fn step(&self) -> f64 {
        self.time_span / self.n_segments() as f64
    }

    /// Distance of node 0 from the collinear boundary manifold
    /// {(z, -z, 0)}, relative to the node size.
    pub fn e3_residual(&self) -> f64 {
        let c = &self.nodes[0];
        let scale = c.size().max(1e-300);
        (c.body(2).norm() + (c.body(0) + c.body(1)).norm()) / scale
    }

    /// |r12 - r13| at the last node, relative to its size: distance from
    /// the isosceles boundary manifold with body 1 at the apex.
    pub fn m1_residual(&self) -> f64 {
        let c = self.nodes.last().unwrap();
        let scale = c.size().max(1e-300);
        (c.separation(0, 1) - c.separation(0, 2)).abs() / scale
    }

    /// Smallest pairwise separation over all nodes.
    pub fn min_separation(&self) -> f64 {
        self.nodes
            .iter()
            .map(|c| c.min_separation())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest per-step angular momentum |omega(x_k, dx_k/h)|.
    pub fn max_step_angular_momentum(&self) -> f64 {
        let h = self.step();
        let mut worst = 0.0f64;
        for k in 0..self.n_segments() {
            let delta = self.nodes[k + 1] - self.nodes[k];
            let w = crate::shape_geometry::mass_omega(&self.nodes[k], &delta).abs() / h;
            worst = worst.max(w);
        }
        worst
    }

    /// Doubles the node count, interpolating midpoints with a fourth-order
    /// stencil. Endpoint nodes are kept, so the boundary manifolds are
    /// preserved exactly.
    pub fn refined(&self) -> DiscretePath {
        let n = self.n_segments();
        let old = &self.nodes;
        let mut nodes = Vec::with_capacity(2 * n + 1);
        for k in 0..n {
            nodes.push(old[k]);
            let mid = if k == 0 {
                interp_edge(&old[0], &old[1], &old[2], &old[3.min(n)])
            } else if k == n - 1 {
                interp_edge(&old[n], &old[n - 1], &old[n - 2], &old[n.saturating_sub(3)])
            } else {
                interp_mid(&old[k - 1], &old[k], &old[k + 1], &old[k + 2])
            };
            nodes.push(mid);
        }
        nodes.push(old[n]);
        DiscretePath {
            time_span: self.time_span,
            nodes,
        }
    }

    /// Serializes to the JSON path format: `{"T": ..., "nodes": [[x1re, x1im,
    /// x2re, x2im, x3re, x3im], ...]}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(self.nodes.len() * 160);
        out.push_str("{\n  \"T\": ");
        out.push_str(&format!("{:.16e}", self.time_span));
        out.push_str(",\n  \"nodes\": [\n");
        for (k, c) in self.nodes.iter().enumerate() {
            out.push_str("    [");
            for (i, b) in c.bodies().iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("{:.16e}, {:.16e}", b.x, b.y));
            }
            out.push(']');
            if k + 1 < self.nodes.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct PathFile {
            #[serde(rename = "T")]
            t: f64,
            nodes: Vec<[f64; 6]>,
        }
        let file: PathFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("path JSON: {e}")))?;
        let nodes = file
            .nodes
            .iter()
            .map(|row| {
                Configuration::new([
                    Vec2::new(row[0], row[1]),
                    Vec2::new(row[2], row[3]),
                    Vec2::new(row[4], row[5]),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        DiscretePath::new(file.t, nodes)
    }
}

fn interp_mid(
    a: &Configuration,
    b: &Configuration,
    c: &Configuration,
    d: &Configuration,
) -> Configuration {
    // Cubic midpoint between b and c.
    (*b + *c) * (9.0 / 16.0) - (*a + *d) * (1.0 / 16.0)
}

fn interp_edge(
    a: &Configuration,
    b: &Configuration,
    c: &Configuration,
    d: &Configuration,
) -> Configuration {
    // Cubic through a..d evaluated halfway between a and b.
    *a * (5.0 / 16.0) + *b * (15.0 / 16.0) - *c * (5.0 / 16.0) + *d * (1.0 / 16.0)
}
