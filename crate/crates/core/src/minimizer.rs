//! Direct minimization of the discretized action over paths that start on
//! the collinear manifold {(z, -z, 0)} and end on the isosceles manifold
//! {r12 = r13}, both endpoints free to slide inside their manifolds.
//!
//! The discretization is forward-difference kinetic energy plus trapezoid
//! potential, so stationary points satisfy a consistent second-order
//! discretization of the equations of motion. Unknowns are Jacobi
//! coordinates per interior node, a single planar vector for node 0 and a
//! three-parameter chart (z1, w) with z2 = w·J·z1/|z1| for the last node,
//! which keeps both boundary manifolds satisfied exactly at every iterate.
//!
//! The optimizer is limited-memory quasi-Newton (two-loop recursion) with a
//! tridiagonal inverse-kinetic preconditioner and a backtracking line
//! search, falling back to preconditioned conjugate gradients when the line
//! search breaks down.

use crate::error::Error;
use crate::path::DiscretePath;
use crate::planar::Vec2;
use crate::shape_geometry::{jacobi_inverse, jacobi_map, Configuration, JacobiCoords};
use crate::util::{map_indexed, pairwise_sum};
use crate::Result;

use std::collections::VecDeque;

/// Tuning knobs for [`minimize_with`].
#[derive(Clone, Copy, Debug)]
pub struct MinimizeOptions {
    /// Convergence threshold on the max-norm of the parameter gradient.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Number of curvature pairs kept by the quasi-Newton update.
    pub memory: usize,
    /// Hard floor on pairwise separations; breaching it aborts the run.
    pub separation_floor: f64,
    /// Enables the inverse-kinetic tridiagonal preconditioner.
    pub precondition: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            grad_tol: 1e-9,
            max_iter: 50_000,
            memory: 16,
            separation_floor: 1e-6,
            precondition: true,
        }
    }
}

/// Outcome of a minimization run.
#[derive(Clone, Debug)]
pub struct MinimizeReport {
    pub path: DiscretePath,
    pub action: f64,
    pub gradient_norm: f64,
    pub min_separation: f64,
    pub max_angular_momentum: f64,
    pub iterations: usize,
}

/// Discrete action: sum over segments of |dx|²/(2h) plus the trapezoid
/// rule for the potential.
pub fn discrete_action(path: &DiscretePath) -> Result<f64> {
    let n = path.n_segments();
    let h = path.step();
    let mut terms = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        let delta = *path.node(k + 1) - *path.node(k);
        terms.push(delta.moment_of_inertia() / (2.0 * h));
    }
    for k in 0..=n {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        terms.push(h * w * path.node(k).potential()?);
    }
    Ok(pairwise_sum(&terms))
}

/// Action with independently settable masses:
/// `sum_k h [ (1/2) sum_i m_i |dx_i/h|² + sum_{i<j} m_i m_j / r_ij ]`
/// with the same quadrature as [`discrete_action`]. Collisions only count
/// where the corresponding mass product is nonzero.
pub fn three_mass_action(masses: [f64; 3], path: &DiscretePath) -> Result<f64> {
    let n = path.n_segments();
    let h = path.step();
    let mut terms = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        let a = path.node(k);
        let b = path.node(k + 1);
        let mut kin = 0.0;
        for i in 0..3 {
            kin += masses[i] * (b.body(i) - a.body(i)).norm_sq();
        }
        terms.push(kin / (2.0 * h));
    }
    for k in 0..=n {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let c = path.node(k);
        let mut u = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mm = masses[i] * masses[j];
            if mm != 0.0 {
                let r = c.separation(i, j);
                if r == 0.0 {
                    return Err(Error::Collision(i + 1, j + 1));
                }
                u += mm / r;
            }
        }
        terms.push(h * w * u);
    }
    Ok(pairwise_sum(&terms))
}

/// Gradient of the potential with respect to positions; equals the
/// accelerations of unit masses and preserves the zero sum.
fn potential_gradient(c: &Configuration) -> Result<Configuration> {
    let mut g = [Vec2::ZERO; 3];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let d = c.body(j) - c.body(i);
        let r2 = d.norm_sq();
        if r2 == 0.0 {
            return Err(Error::Collision(i + 1, j + 1));
        }
        let f = d * (1.0 / (r2 * r2.sqrt()));
        g[i] += f;
        g[j] -= f;
    }
    Configuration::new(g)
}

/// Exact gradient of [`discrete_action`] with respect to every node, as
/// configuration-shaped covectors (zero-sum by construction).
pub fn action_gradient(path: &DiscretePath) -> Result<Vec<Configuration>> {
    let n = path.n_segments();
    let h = path.step();
    let grads_u = map_indexed(n + 1, |k| potential_gradient(path.node(k)));
    let mut out = Vec::with_capacity(n + 1);
    for (k, gu) in grads_u.into_iter().enumerate() {
        let gu = gu?;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let mut g = gu * (h * w);
        if k > 0 {
            g = g + (*path.node(k) - *path.node(k - 1)) * (1.0 / h);
        }
        if k < n {
            g = g + (*path.node(k) - *path.node(k + 1)) * (1.0 / h);
        }
        out.push(g);
    }
    Ok(out)
}

/// Midpoint energies (1/2)|dx/h|² - (U_k + U_{k+1})/2, one per segment;
/// nearly constant along a converged minimizer.
pub fn midpoint_energies(path: &DiscretePath) -> Result<Vec<f64>> {
    let n = path.n_segments();
    let h = path.step();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let delta = *path.node(k + 1) - *path.node(k);
        let kin = 0.5 * delta.moment_of_inertia() / (h * h);
        let pot = 0.5 * (path.node(k).potential()? + path.node(k + 1).potential()?);
        out.push(kin - pot);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parameter space
// ---------------------------------------------------------------------------

struct ParamSpace {
    n: usize,
    h: f64,
    time_span: f64,
    separation_floor: f64,
}

impl ParamSpace {
    fn dim(&self) -> usize {
        4 * self.n + 1
    }

    fn params_from_path(&self, path: &DiscretePath) -> Vec<f64> {
        let n = self.n;
        let mut p = Vec::with_capacity(self.dim());
        let z = path.node(0).body(0);
        p.push(z.x);
        p.push(z.y);
        for k in 1..n {
            let j = jacobi_map(path.node(k));
            p.extend_from_slice(&[j.z1.x, j.z1.y, j.z2.x, j.z2.y]);
        }
        let j = jacobi_map(path.node(n));
        let rho = j.z1.norm();
        let e = j.z1.perp() * (1.0 / rho);
        p.push(j.z1.x);
        p.push(j.z1.y);
        p.push(j.z2.dot(e));
        p
    }

    fn nodes_from_params(&self, p: &[f64]) -> Result<Vec<Configuration>> {
        let n = self.n;
        let mut nodes = Vec::with_capacity(n + 1);
        let z = Vec2::new(p[0], p[1]);
        nodes.push(Configuration::new([z, -z, Vec2::ZERO])?);
        for k in 1..n {
            let b = 2 + 4 * (k - 1);
            nodes.push(jacobi_inverse(&JacobiCoords {
                z1: Vec2::new(p[b], p[b + 1]),
                z2: Vec2::new(p[b + 2], p[b + 3]),
            }));
        }
        let d = self.dim();
        let z1 = Vec2::new(p[d - 3], p[d - 2]);
        let rho = z1.norm();
        if rho < 1e-12 {
            return Err(Error::Singular(
                "isosceles endpoint chart degenerates: |z1| ~ 0".into(),
            ));
        }
        let z2 = z1.perp() * (p[d - 1] / rho);
        nodes.push(jacobi_inverse(&JacobiCoords { z1, z2 }));
        Ok(nodes)
    }

    fn path_from_params(&self, p: &[f64]) -> Result<DiscretePath> {
        DiscretePath::new(self.time_span, self.nodes_from_params(p)?)
    }

    /// Action value; errors if any node breaches the separation floor.
    fn objective(&self, p: &[f64]) -> Result<f64> {
        let nodes = self.nodes_from_params(p)?;
        let mut min_sep = f64::INFINITY;
        for c in &nodes {
            min_sep = min_sep.min(c.min_separation());
        }
        if min_sep < self.separation_floor {
            return Err(Error::SeparationFloor(min_sep));
        }
        let path = DiscretePath::new(self.time_span, nodes)?;
        discrete_action(&path)
    }

    /// Action and parameter-space gradient.
    fn objective_with_gradient(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let nodes = self.nodes_from_params(p)?;
        let mut min_sep = f64::INFINITY;
        for c in &nodes {
            min_sep = min_sep.min(c.min_separation());
        }
        if min_sep < self.separation_floor {
            return Err(Error::SeparationFloor(min_sep));
        }
        let path = DiscretePath::new(self.time_span, nodes)?;
        let value = discrete_action(&path)?;
        let node_grads = action_gradient(&path)?;

        let n = self.n;
        let d = self.dim();
        let mut g = vec![0.0; d];
        let g0 = &node_grads[0];
        let gz = g0.body(0) - g0.body(1);
        g[0] = gz.x;
        g[1] = gz.y;
        for k in 1..n {
            let j = jacobi_map(&node_grads[k]);
            let b = 2 + 4 * (k - 1);
            g[b] = j.z1.x;
            g[b + 1] = j.z1.y;
            g[b + 2] = j.z2.x;
            g[b + 3] = j.z2.y;
        }
        let jg = jacobi_map(&node_grads[n]);
        let z1 = Vec2::new(p[d - 3], p[d - 2]);
        let w = p[d - 1];
        let rho = z1.norm();
        let u_hat = z1 * (1.0 / rho);
        let e = u_hat.perp();
        // z2 = w J z1/|z1|; chain rule through the unit vector.
        let jgz2 = jg.z2.perp(); // J^T g = -J g, folded into the sign below
        let proj = jgz2 - u_hat * jgz2.dot(u_hat);
        let gz1 = jg.z1 - proj * (w / rho);
        g[d - 3] = gz1.x;
        g[d - 2] = gz1.y;
        g[d - 1] = jg.z2.dot(e);
        Ok((value, g))
    }
}

// ---------------------------------------------------------------------------
// Preconditioner: inverse of the tridiagonal kinetic operator
// ---------------------------------------------------------------------------

/// Chains of parameter indices that sit at consecutive time nodes; each
/// chain is preconditioned by (second difference)/h + h·identity.
struct Preconditioner {
    chains: Vec<Vec<usize>>,
    h: f64,
}

impl Preconditioner {
    fn new(space: &ParamSpace) -> Preconditioner {
        let n = space.n;
        let d = space.dim();
        let mut ch: [Vec<usize>; 4] = [vec![], vec![], vec![], vec![]];
        ch[0].push(0);
        ch[1].push(1);
        for k in 1..n {
            let b = 2 + 4 * (k - 1);
            for c in 0..4 {
                ch[c].push(b + c);
            }
        }
        ch[0].push(d - 3);
        ch[1].push(d - 2);
        ch[2].push(d - 1);
        Preconditioner {
            chains: ch.into_iter().collect(),
            h: space.h,
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for chain in &self.chains {
            let m = chain.len();
            if m == 0 {
                continue;
            }
            let inv_h = 1.0 / self.h;
            let off = -inv_h;
            let diag = |i: usize| -> f64 {
                let neighbors = if m == 1 {
                    0.0
                } else if i == 0 || i == m - 1 {
                    1.0
                } else {
                    2.0
                };
                neighbors * inv_h + self.h
            };
            // Thomas solve of the SPD tridiagonal system.
            let mut cp = vec![0.0; m];
            let mut dp = vec![0.0; m];
            let mut denom = diag(0);
            cp[0] = off / denom;
            dp[0] = v[chain[0]] / denom;
            for i in 1..m {
                denom = diag(i) - off * cp[i - 1];
                cp[i] = off / denom;
                dp[i] = (v[chain[i]] - off * dp[i - 1]) / denom;
            }
            out[chain[m - 1]] = dp[m - 1];
            for i in (0..m - 1).rev() {
                out[chain[i]] = dp[i] - cp[i] * out[chain[i + 1]];
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Quasi-Newton driver
// ---------------------------------------------------------------------------

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct TwoLoop {
    memory: usize,
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    rho: VecDeque<f64>,
}

impl TwoLoop {
    fn new(memory: usize) -> Self {
        TwoLoop {
            memory,
            s: VecDeque::new(),
            y: VecDeque::new(),
            rho: VecDeque::new(),
        }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.rho.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        let ss = dot(&s, &s).sqrt();
        let yy = dot(&y, &y).sqrt();
        if sy <= 1e-12 * ss * yy {
            return; // curvature too weak or negative; skip the pair
        }
        if self.s.len() == self.memory {
            self.s.pop_front();
            self.y.pop_front();
            self.rho.pop_front();
        }
        self.rho.push_back(1.0 / sy);
        self.s.push_back(s);
        self.y.push_back(y);
    }

    /// Applies the implicit inverse Hessian to `g` using `h0` as the base.
    fn apply<H: Fn(&[f64]) -> Vec<f64>>(&self, g: &[f64], h0: H) -> Vec<f64> {
        let m = self.s.len();
        let mut q = g.to_vec();
        let mut alphas = vec![0.0; m];
        for i in (0..m).rev() {
            let a = self.rho[i] * dot(&self.s[i], &q);
            alphas[i] = a;
            for (qj, yj) in q.iter_mut().zip(&self.y[i]) {
                *qj -= a * yj;
            }
        }
        let mut r = h0(&q);
        if m > 0 {
            let y_last = &self.y[m - 1];
            let hy = h0(y_last);
            let denom = dot(y_last, &hy);
            if denom > 0.0 {
                let gamma = 1.0 / (self.rho[m - 1] * denom);
                for rj in r.iter_mut() {
                    *rj *= gamma;
                }
            }
        }
        for i in 0..m {
            let beta = self.rho[i] * dot(&self.y[i], &r);
            let corr = alphas[i] - beta;
            for (rj, sj) in r.iter_mut().zip(&self.s[i]) {
                *rj += corr * sj;
            }
        }
        r
    }
}

/// Backtracking Armijo search. Returns the accepted step and value, or
/// `None` when no acceptable step exists down to the step floor.
fn line_search(
    space: &ParamSpace,
    p: &[f64],
    f0: f64,
    g: &[f64],
    dir: &[f64],
    trial: &mut Vec<f64>,
) -> Option<(f64, f64)> {
    let slope = dot(g, dir);
    if !(slope < 0.0) {
        return None;
    }
    let mut alpha = 1.0f64;
    for _ in 0..60 {
        trial.clear();
        trial.extend(p.iter().zip(dir).map(|(pi, di)| pi + alpha * di));
        if let Ok(f) = space.objective(trial) {
            if f <= f0 + 1e-4 * alpha * slope {
                return Some((alpha, f));
            }
        }
        alpha *= 0.5;
        if alpha < 1e-18 {
            break;
        }
    }
    None
}

/// Minimizes the discrete action starting from `initial` with default
/// options except for the given tolerance and iteration cap.
pub fn minimize(initial: &DiscretePath, tol: f64, max_iter: usize) -> Result<MinimizeReport> {
    minimize_with(
        initial,
        &MinimizeOptions {
            grad_tol: tol,
            max_iter,
            ..MinimizeOptions::default()
        },
    )
}

pub fn minimize_with(initial: &DiscretePath, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    if initial.e3_residual() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "seed path does not start on the collinear manifold (residual {:.3e})",
            initial.e3_residual()
        )));
    }
    if initial.m1_residual() > 1e-8 {
        return Err(Error::InvalidInput(format!(
            "seed path does not end on the isosceles manifold (residual {:.3e})",
            initial.m1_residual()
        )));
    }
    let space = ParamSpace {
        n: initial.n_segments(),
        h: initial.step(),
        time_span: initial.time_span(),
        separation_floor: opts.separation_floor,
    };
    let precond = Preconditioner::new(&space);
    let apply_h0 = |v: &[f64]| -> Vec<f64> {
        if opts.precondition {
            precond.apply(v)
        } else {
            v.to_vec()
        }
    };

    let mut p = space.params_from_path(initial);
    let (mut f, mut g) = space.objective_with_gradient(&p)?;
    let mut lbfgs = TwoLoop::new(opts.memory);
    let mut trial = Vec::with_capacity(p.len());
    let mut cg_mode = false;
    let mut cg_dir: Vec<f64> = Vec::new();
    let mut cg_prev_g: Vec<f64> = Vec::new();
    let mut iterations = 0;
    let debug = std::env::var_os("EIGHT_MINIMIZE_DEBUG").is_some();

    // Phase one: descend on the action until either the gradient target is
    // met or decreases sink below what f64 can certify.
    while inf_norm(&g) > opts.grad_tol && iterations < opts.max_iter {
        iterations += 1;
        let dir = if cg_mode {
            // Polak-Ribiere+ with preconditioning and automatic restart.
            let pg = apply_h0(&g);
            let d = if cg_dir.is_empty() {
                pg.iter().map(|x| -x).collect::<Vec<f64>>()
            } else {
                let gpg: f64 = dot(&g, &pg);
                let diff: Vec<f64> = g.iter().zip(&cg_prev_g).map(|(a, b)| a - b).collect();
                let beta =
                    (dot(&pg, &diff) / dot(&cg_prev_g, &apply_h0(&cg_prev_g)).max(1e-300)).max(0.0);
                let cand: Vec<f64> = pg
                    .iter()
                    .zip(&cg_dir)
                    .map(|(pgi, di)| -pgi + beta * di)
                    .collect();
                if dot(&g, &cand) < -1e-12 * gpg.abs() {
                    cand
                } else {
                    pg.iter().map(|x| -x).collect()
                }
            };
            cg_prev_g = g.clone();
            d
        } else {
            let hg = lbfgs.apply(&g, &apply_h0);
            let mut d: Vec<f64> = hg.iter().map(|x| -x).collect();
            if !(dot(&g, &d) < 0.0) {
                lbfgs.clear();
                d = apply_h0(&g).iter().map(|x| -x).collect();
            }
            d
        };

        match line_search(&space, &p, f, &g, &dir, &mut trial) {
            // Steps this small only certify rounding jitter, not descent;
            // hand over to the gradient polish.
            Some((alpha, _)) if alpha < 1e-10 => break,
            Some((alpha, f_new)) => {
                let (_, g_new) = space.objective_with_gradient(&trial)?;
                if cg_mode {
                    cg_dir = dir;
                } else {
                    let s: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
                    let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
                    lbfgs.push(s, y);
                }
                if debug && iterations % 200 == 0 {
                    eprintln!(
                        "descent {iterations}: f = {f_new:.14}, |g| = {:.3e}, alpha = {alpha:.3e}",
                        inf_norm(&g_new)
                    );
                }
                p = std::mem::take(&mut trial);
                trial = Vec::with_capacity(p.len());
                f = f_new;
                g = g_new;
            }
            None if !cg_mode => {
                // Curvature breakdown: drop to conjugate gradients.
                lbfgs.clear();
                cg_mode = true;
                cg_dir.clear();
            }
            None => break, // polish below decides whether this is fatal
        }
    }

    // Phase two: near the minimum the action is flat to f64 rounding, so
    // switch to Newton-CG on the stationarity system: solve H d = -g with
    // preconditioned conjugate gradients, applying the Hessian matrix-free
    // through central differences of the analytic gradient.
    let mut g_norm = inf_norm(&g);
    let p_scale = 1.0 + inf_norm(&p);
    let hessian_vec = |at: &[f64], v: &[f64]| -> Result<Vec<f64>> {
        let eps = 1e-5 * p_scale / inf_norm(v).max(1e-300);
        let plus: Vec<f64> = at.iter().zip(v).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = at.iter().zip(v).map(|(a, b)| a - eps * b).collect();
        let (_, gp) = space.objective_with_gradient(&plus)?;
        let (_, gm) = space.objective_with_gradient(&minus)?;
        Ok(gp
            .iter()
            .zip(&gm)
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect())
    };
    let mut stuck = false;
    while g_norm > opts.grad_tol && iterations < opts.max_iter && !stuck {
        iterations += 1;
        // PCG on H d = -g, truncated at modest relative residual.
        let dim = p.len();
        let mut d = vec![0.0; dim];
        let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut z = apply_h0(&r);
        let mut cg_p = z.clone();
        let mut rz = dot(&r, &z);
        let r0 = dot(&r, &r).sqrt();
        for _ in 0..400 {
            if dot(&r, &r).sqrt() < 1e-3 * r0 {
                break;
            }
            let hp = hessian_vec(&p, &cg_p)?;
            let php = dot(&cg_p, &hp);
            if php <= 0.0 {
                break; // negative curvature: keep the current iterate
            }
            let alpha = rz / php;
            for i in 0..dim {
                d[i] += alpha * cg_p[i];
                r[i] -= alpha * hp[i];
            }
            z = apply_h0(&r);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..dim {
                cg_p[i] = z[i] + beta * cg_p[i];
            }
        }
        // Accept the largest damping that reduces the gradient norm.
        let mut alpha = 1.0f64;
        let mut accepted = false;
        for _ in 0..30 {
            trial.clear();
            trial.extend(p.iter().zip(&d).map(|(pi, di)| pi + alpha * di));
            if let Ok((f_new, g_new)) = space.objective_with_gradient(&trial) {
                let n_new = inf_norm(&g_new);
                if n_new < 0.9 * g_norm {
                    p = std::mem::take(&mut trial);
                    trial = Vec::with_capacity(p.len());
                    f = f_new;
                    g = g_new;
                    g_norm = n_new;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if debug {
            eprintln!("newton-cg {iterations}: f = {f:.14}, |g| = {g_norm:.3e}, alpha = {alpha:.1e}");
        }
        stuck = !accepted;
    }

    if g_norm > opts.grad_tol && iterations < opts.max_iter {
        return Err(Error::LineSearch {
            iteration: iterations,
            detail: format!(
                "gradient floor reached at |g| = {g_norm:.3e} (target {:.3e})",
                opts.grad_tol
            ),
        });
    }

    let path = space.path_from_params(&p)?;
    Ok(MinimizeReport {
        action: f,
        gradient_norm: g_norm,
        min_separation: path.min_separation(),
        max_angular_momentum: path.max_step_angular_momentum(),
        iterations,
        path,
    })
}
