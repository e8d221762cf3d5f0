//! Assembly of the full periodic orbit from the minimizing twelfth-arc.
//!
//! The arc runs from a collinear configuration (body 3 at the midpoint) to
//! an isosceles configuration (body 1 at the apex) in time T. Reflecting
//! through the isosceles meridians and half-twisting through the collinear
//! points produces twelve congruent copies that close into a loop of
//! period 12T; the single choreography curve is read off the assembled
//! loop piecewise. The spherical area rule connects enclosed area on the
//! shape sphere to inertial rotation and is used to check that the
//! collinear line does not rotate over a third of the period.

use crate::error::Error;
use crate::path::DiscretePath;
use crate::planar::Vec2;
use crate::shape_geometry::{
    max_body_distance, shape_of, Configuration, ShapeVector,
};
use crate::util::angle_mod_pi;
use crate::Result;

/// The symmetry operations used by the assembly, stated in the frame where
/// the relevant isosceles axis is the x-axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryOp {
    /// Swap the two non-apex bodies and reflect across the x-axis.
    ReflectMeridian(usize),
    /// Swap the two non-middle bodies and rotate the plane by half a turn.
    HalfTwist(usize),
    /// Relabel bodies: new body `i` takes the position of body `perm[i]`.
    Permute([usize; 3]),
    /// (x, y) -> (x, -y) on every body.
    PlaneReflect,
    /// (x, y) -> (-x, -y) on every body.
    PlaneHalfTurn,
    /// Identity on configurations (meaningful only for paths).
    TimeReverse,
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn swap_bodies(c: &Configuration, i: usize, j: usize) -> Configuration {
    let mut perm = [0usize, 1, 2];
    perm.swap(i, j);
    c.permuted(perm)
}

/// Applies a symmetry operation to a configuration. All operations
/// preserve the zero sum, the moment of inertia and the potential.
pub fn apply_symmetry(op: &SymmetryOp, c: &Configuration) -> Configuration {
    match *op {
        SymmetryOp::ReflectMeridian(i) => {
            let (a, b) = others(i);
            swap_bodies(c, a, b).map(|v| v.conj())
        }
        SymmetryOp::HalfTwist(i) => {
            let (a, b) = others(i);
            swap_bodies(c, a, b).map(|v| -v)
        }
        SymmetryOp::Permute(perm) => c.permuted(perm),
        SymmetryOp::PlaneReflect => c.map(|v| v.conj()),
        SymmetryOp::PlaneHalfTurn => c.map(|v| -v),
        SymmetryOp::TimeReverse => *c,
    }
}

/// The assembled periodic loop: uniform samples of the choreography curve
/// `q` and of the full three-body loop `x` over one period.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub tbar: f64,
    pub q: Vec<Vec2>,
    pub x: Vec<Configuration>,
}

impl Orbit {
    pub fn samples(&self) -> usize {
        self.q.len()
    }

    pub fn sample_step(&self) -> f64 {
        self.tbar / self.samples() as f64
    }

    pub fn q_at(&self, i: isize) -> Vec2 {
        let m = self.samples() as isize;
        self.q[(i.rem_euclid(m)) as usize]
    }

    pub fn x_at(&self, i: isize) -> &Configuration {
        let m = self.samples() as isize;
        &self.x[(i.rem_euclid(m)) as usize]
    }

    /// Nearest sample index for time `t`; errors when `t` is not close to
    /// a sample (the assembly keeps junction times exactly on the grid).
    pub fn index_at_time(&self, t: f64) -> Result<usize> {
        let h = self.sample_step();
        let i = (t / h).round();
        if (t - i * h).abs() > 1e-9 * self.tbar.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "time {t:.12e} does not sit on the sample grid (step {h:.3e})"
            )));
        }
        Ok((i as isize).rem_euclid(self.samples() as isize) as usize)
    }

    /// Applies the similarity x -> s·x, t -> s^{3/2}·t, an exact symmetry
    /// of the equations of motion.
    pub fn rescaled(&self, s: f64) -> Orbit {
        Orbit {
            tbar: self.tbar * s.powf(1.5),
            q: self.q.iter().map(|&v| v * s).collect(),
            x: self.x.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    pub fn rotated(&self, angle: f64) -> Orbit {
        Orbit {
            tbar: self.tbar,
            q: self.q.iter().map(|v| v.rotated(angle)).collect(),
            x: self.x.iter().map(|c| c.rotated(angle)).collect(),
        }
    }

    /// Resamples to `m` uniform samples with cubic interpolation.
    pub fn resampled(&self, m: usize) -> Orbit {
        let old = self.samples();
        let interp_q = |t: f64| -> Vec2 {
            let s = t / self.sample_step();
            let k = s.floor() as isize;
            let f = s - k as f64;
            cubic(
                self.q_at(k - 1),
                self.q_at(k),
                self.q_at(k + 1),
                self.q_at(k + 2),
                f,
            )
        };
        let interp_x = |t: f64| -> Configuration {
            let s = t / self.sample_step();
            let k = s.floor() as isize;
            let f = s - k as f64;
            let mut bodies = [Vec2::ZERO; 3];
            for (i, b) in bodies.iter_mut().enumerate() {
                *b = cubic(
                    self.x_at(k - 1).body(i),
                    self.x_at(k).body(i),
                    self.x_at(k + 1).body(i),
                    self.x_at(k + 2).body(i),
                    f,
                );
            }
            Configuration::recentered(bodies[0], bodies[1], bodies[2])
        };
        let _ = old;
        let q = (0..m)
            .map(|i| interp_q(i as f64 * self.tbar / m as f64))
            .collect();
        let x = (0..m)
            .map(|i| interp_x(i as f64 * self.tbar / m as f64))
            .collect();
        Orbit {
            tbar: self.tbar,
            q,
            x,
        }
    }

    /// Orbit JSON: `{"Tbar": ..., "q": [[re, im], ...], "x": [[6 floats], ...]}`.
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(self.samples() * 200);
        out.push_str("{\n  \"Tbar\": ");
        out.push_str(&format!("{:.16e}", self.tbar));
        out.push_str(",\n  \"q\": [\n");
        for (i, v) in self.q.iter().enumerate() {
            out.push_str(&format!("    [{:.16e}, {:.16e}]", v.x, v.y));
            out.push_str(if i + 1 < self.q.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ],\n  \"x\": [\n");
        for (i, c) in self.x.iter().enumerate() {
            out.push_str("    [");
            for (j, b) in c.bodies().iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&format!("{:.16e}, {:.16e}", b.x, b.y));
            }
            out.push(']');
            out.push_str(if i + 1 < self.x.len() { ",\n" } else { "\n" });
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Orbit> {
        #[derive(serde::Deserialize)]
        struct OrbitFile {
            #[serde(rename = "Tbar")]
            tbar: f64,
            q: Vec<[f64; 2]>,
            x: Vec<[f64; 6]>,
        }
        let file: OrbitFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("orbit JSON: {e}")))?;
        if file.q.len() != file.x.len() || file.q.is_empty() {
            return Err(Error::InvalidInput(
                "orbit JSON needs equally many q and x samples".into(),
            ));
        }
        let x = file
            .x
            .iter()
            .map(|row| {
                Configuration::new([
                    Vec2::new(row[0], row[1]),
                    Vec2::new(row[2], row[3]),
                    Vec2::new(row[4], row[5]),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Orbit {
            tbar: file.tbar,
            q: file.q.iter().map(|r| Vec2::new(r[0], r[1])).collect(),
            x,
        })
    }
}

fn cubic(a: Vec2, b: Vec2, c: Vec2, d: Vec2, f: f64) -> Vec2 {
    // Catmull-Rom between b and c.
    let f2 = f * f;
    let f3 = f2 * f;
    a * (-0.5 * f + f2 - 0.5 * f3)
        + b * (1.0 - 2.5 * f2 + 1.5 * f3)
        + c * (0.5 * f + 2.0 * f2 - 1.5 * f3)
        + d * (-0.5 * f2 + 0.5 * f3)
}

/// A planar isometry together with a relabelling of the bodies; the
/// internal form of the junction continuation maps.
#[derive(Clone, Copy, Debug)]
struct JunctionMap {
    perm: [usize; 3],
    /// Reflection across the line at `angle`, or a half turn when `None`.
    reflect_axis: Option<f64>,
}

impl JunctionMap {
    fn apply(&self, c: &Configuration) -> Configuration {
        let p = c.permuted(self.perm);
        match self.reflect_axis {
            Some(angle) => p.map(|v| v.reflected_line(angle)),
            None => p.map(|v| -v),
        }
    }
}

/// Classifies a junction configuration as isosceles (returning the apex
/// body and axis angle) or collinear (returning the middle body).
fn junction_map(c: &Configuration, odd: bool) -> Result<JunctionMap> {
    let scale = c.size();
    if odd {
        // Isosceles: apex i has the two equal sides.
        let gaps = [
            (c.separation(0, 1) - c.separation(0, 2)).abs(),
            (c.separation(1, 0) - c.separation(1, 2)).abs(),
            (c.separation(2, 0) - c.separation(2, 1)).abs(),
        ];
        let apex = (0..3).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).unwrap();
        if gaps[apex] > 1e-5 * scale {
            return Err(Error::InvalidInput(format!(
                "junction is not isosceles (gap {:.3e})",
                gaps[apex]
            )));
        }
        let (a, b) = others(apex);
        let mut perm = [0usize, 1, 2];
        perm.swap(a, b);
        Ok(JunctionMap {
            perm,
            reflect_axis: Some(c.body(apex).angle()),
        })
    } else {
        // Collinear with the middle body at the origin.
        let mid = (0..3)
            .min_by(|&a, &b| c.body(a).norm().total_cmp(&c.body(b).norm()))
            .unwrap();
        if c.body(mid).norm() > 1e-5 * scale {
            return Err(Error::InvalidInput(format!(
                "junction is not collinear-centered (|x_mid| = {:.3e})",
                c.body(mid).norm()
            )));
        }
        let (a, b) = others(mid);
        let mut perm = [0usize, 1, 2];
        perm.swap(a, b);
        Ok(JunctionMap {
            perm,
            reflect_axis: None,
        })
    }
}

/// Diagnostics of an assembly, available through [`build_orbit_detailed`].
#[derive(Clone, Copy, Debug)]
pub struct BuildDiagnostics {
    /// Largest velocity jump across the twelve junctions, measured with
    /// second-order one-sided stencils.
    pub max_junction_mismatch: f64,
    /// Distance between the final and initial configurations.
    pub closure_defect: f64,
    /// How far the quarter-period isosceles axis is from the x-axis
    /// (radians, modulo pi); zero for the exact orbit in this frame.
    pub quarter_axis_tilt: f64,
}

/// Assembles the twelve congruent copies of the arc into one period.
pub fn build_orbit(arc: &DiscretePath) -> Result<Orbit> {
    build_orbit_detailed(arc).map(|(orbit, _)| orbit)
}

pub fn build_orbit_detailed(arc: &DiscretePath) -> Result<(Orbit, BuildDiagnostics)> {
    let n = arc.n_segments();
    if n < 8 {
        return Err(Error::InvalidInput("arc too coarse to assemble".into()));
    }
    if arc.e3_residual() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "arc does not start on the collinear manifold (residual {:.3e})",
            arc.e3_residual()
        )));
    }
    if arc.m1_residual() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "arc does not end on the isosceles manifold (residual {:.3e})",
            arc.m1_residual()
        )));
    }

    // Align the isosceles axis at time T with the x-axis.
    let tilt = arc.node(n).body(0).angle();
    let mut nodes: Vec<Configuration> = arc.nodes().iter().map(|c| c.rotated(-tilt)).collect();
    nodes.reserve(12 * n + 1);

    for m in 1..12usize {
        let j = m * n;
        let map = junction_map(&nodes[j], m % 2 == 1)?;
        for k in 1..=n {
            let img = map.apply(&nodes[j - k]);
            nodes.push(img);
        }
    }

    // Diagnostics: junction smoothness, closure, quarter-axis tilt.
    let h = arc.step();
    let speed_scale = nodes
        .windows(2)
        .map(|w| max_body_distance(&w[1], &w[0]) / h)
        .fold(0.0f64, f64::max);
    let mut max_mismatch = 0.0f64;
    let total = 12 * n;
    for m in 0..12usize {
        let j = m * n;
        let at = |i: isize| -> &Configuration { &nodes[(i.rem_euclid(total as isize)) as usize] };
        let ji = j as isize;
        // Second-order one-sided velocity estimates from both sides.
        let right = (*at(ji + 1) * 4.0 - *at(ji + 2) - *at(ji) * 3.0) * (1.0 / (2.0 * h));
        let left = (*at(ji) * 3.0 - *at(ji - 1) * 4.0 + *at(ji - 2)) * (1.0 / (2.0 * h));
        let mismatch = max_body_distance(&right, &left);
        max_mismatch = max_mismatch.max(mismatch);
    }
    if max_mismatch > 0.05 * speed_scale {
        return Err(Error::InvalidInput(format!(
            "junction velocity mismatch {:.3e} (speed scale {:.3e}): arc endpoints are not \
             stationary on their manifolds",
            max_mismatch, speed_scale
        )));
    }
    let closure = max_body_distance(&nodes[total], &nodes[0]);
    let quarter = &nodes[3 * n];
    let quarter_tilt = {
        let gaps = [
            (quarter.separation(0, 1) - quarter.separation(0, 2)).abs(),
            (quarter.separation(1, 0) - quarter.separation(1, 2)).abs(),
            (quarter.separation(2, 0) - quarter.separation(2, 1)).abs(),
        ];
        let apex = (0..3).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).unwrap();
        let a = angle_mod_pi(quarter.body(apex).angle());
        a.min(std::f64::consts::PI - a)
    };

    // A third-period shift must permute the bodies cyclically; relabel the
    // two interchangeable outer bodies if the cycle runs the other way, so
    // the assembled loop matches the canonical form
    // x(t) = (q(t + 2T/3), q(t + T/3), q(t)).
    let follows = |nodes: &[Configuration], body: usize| -> usize {
        let probe = n / 2;
        (0..3)
            .min_by(|&a, &b| {
                let da = (nodes[4 * n + probe].body(body) - nodes[probe].body(a)).norm();
                let db = (nodes[4 * n + probe].body(body) - nodes[probe].body(b)).norm();
                da.total_cmp(&db)
            })
            .unwrap()
    };
    if follows(&nodes, 2) == 0 {
        for c in nodes.iter_mut() {
            *c = c.permuted([1, 0, 2]);
        }
    }
    if follows(&nodes, 2) != 1 {
        return Err(Error::InvalidInput(
            "assembled loop is not a third-period choreography".into(),
        ));
    }

    // The choreography curve is body 3's track.
    let q: Vec<Vec2> = nodes[..total].iter().map(|c| c.body(2)).collect();
    nodes.truncate(total);

    Ok((
        Orbit {
            tbar: 12.0 * arc.time_span(),
            q,
            x: nodes,
        },
        BuildDiagnostics {
            max_junction_mismatch: max_mismatch,
            closure_defect: closure,
            quarter_axis_tilt: quarter_tilt,
        },
    ))
}

// ---------------------------------------------------------------------------
// Spherical area rule
// ---------------------------------------------------------------------------

/// Signed area enclosed by a closed loop of unit shape vectors, measured
/// on the shape sphere of radius 1/2 (total area pi), via signed triangle
/// excesses fanned from the north pole. Positive for loops traversed
/// counterclockwise around the north pole; defined modulo pi.
pub fn spherical_area(loop_points: &[ShapeVector]) -> f64 {
    let north = [0.0, 0.0, 1.0];
    let mut total = 0.0;
    let m = loop_points.len();
    for i in 0..m {
        let a = loop_points[i].as_array();
        let b = loop_points[(i + 1) % m].as_array();
        if dist_sq(&a, &b) < 1e-30 {
            continue; // degenerate edge
        }
        total += signed_triangle_solid_angle(&north, &a, &b);
    }
    0.25 * total
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

/// Van Oosterom-Strackee signed solid angle of the spherical triangle
/// (a, b, c) on the unit sphere.
fn signed_triangle_solid_angle(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let triple = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0]);
    let ab = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let bc = b[0] * c[0] + b[1] * c[1] + b[2] * c[2];
    let ca = c[0] * a[0] + c[1] * a[1] + c[2] * a[2];
    2.0 * triple.atan2(1.0 + ab + bc + ca)
}

/// The shape curve of `orbit` between two sample times, closed up along
/// the equator (shortest way); both endpoints must be collinear shapes.
pub fn closed_shape_loop(orbit: &Orbit, t0: f64, t1: f64) -> Result<Vec<ShapeVector>> {
    let i0 = orbit.index_at_time(t0)?;
    let i1 = orbit.index_at_time(t1)?;
    let m = orbit.samples();
    let count = (i1 + m - i0) % m;
    let mut pts = Vec::with_capacity(count + 130);
    for k in 0..=count {
        let u = shape_of(&orbit.x[(i0 + k) % m]).normalized()?;
        pts.push(u);
    }
    // Walk back along the equator from the end shape to the start shape.
    let start = pts[0];
    let end = pts[count];
    let th0 = start.u2.atan2(start.u1);
    let th1 = end.u2.atan2(end.u1);
    let mut dth = th0 - th1;
    while dth > std::f64::consts::PI {
        dth -= 2.0 * std::f64::consts::PI;
    }
    while dth < -std::f64::consts::PI {
        dth += 2.0 * std::f64::consts::PI;
    }
    let steps = 128;
    for s in 1..steps {
        let th = th1 + dth * s as f64 / steps as f64;
        pts.push(ShapeVector::new(th.cos(), th.sin(), 0.0));
    }
    Ok(pts)
}

/// Angle (mod pi, in [0, pi)) between the collinear lines of the orbit at
/// two sample times. Errors unless both configurations are collinear.
pub fn euler_line_angle(orbit: &Orbit, t0: f64, t1: f64) -> Result<f64> {
    let dir = |t: f64| -> Result<f64> {
        let c = &orbit.x[orbit.index_at_time(t)?];
        if !c.is_collinear(1e-4) {
            return Err(Error::InvalidInput(format!(
                "configuration at t = {t:.6} is not collinear"
            )));
        }
        let far = (0..3)
            .max_by(|&a, &b| c.body(a).norm().total_cmp(&c.body(b).norm()))
            .unwrap();
        Ok(c.body(far).angle())
    };
    Ok(angle_mod_pi(dir(t1)? - dir(t0)?))
}

/// The orbit's shape-sphere curve in (theta, phi) coordinates, with theta
/// unwrapped over the full double cover (one period advances it by 4 pi).
pub fn shape_curve(orbit: &Orbit) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(orbit.samples());
    let mut offset = 0.0;
    let mut prev = f64::NAN;
    for c in &orbit.x {
        let s = crate::shape_geometry::SphericalShape::from_shape_vector(&shape_of(c))?;
        let mut theta = s.theta;
        if !prev.is_nan() {
            while theta + offset < prev - std::f64::consts::PI {
                offset += 2.0 * std::f64::consts::PI;
            }
            while theta + offset > prev + std::f64::consts::PI {
                offset -= 2.0 * std::f64::consts::PI;
            }
        }
        theta += offset;
        prev = theta;
        out.push((theta, s.phi));
    }
    Ok(out)
}

/// Area-rule prediction for [`euler_line_angle`]: twice the signed area of
/// the closed-up shape loop, reduced modulo pi. The sign matches the
/// line-angle convention of [`euler_line_angle`] (counterclockwise
/// positive in the inertial plane).
pub fn euler_line_angle_prediction(orbit: &Orbit, t0: f64, t1: f64) -> Result<f64> {
    let loop_pts = closed_shape_loop(orbit, t0, t1)?;
    Ok(angle_mod_pi(-2.0 * spherical_area(&loop_pts)))
}
