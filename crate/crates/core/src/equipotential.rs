//! The equipotential curve through the collinear central configurations on
//! the shape sphere, solved as phi(theta), and its arc length in the
//! reduced metric by trapezoid refinement.
//!
//! In spherical shape coordinates the curve is the zero set of
//!
//! ```text
//! F(theta, phi) = sum_k (1 + cos(phi) cos(theta + 2k pi/3))^(-1/2) - 5/sqrt(2)
//! ```
//!
//! which is even in phi, even in theta, and 2pi/3-periodic in theta. One
//! twelfth of the curve is the graph of phi(theta) over [0, pi/3]; its
//! length in the radius-1/2 sphere metric is
//! `l0 = (1/2) ∫ sqrt(cos² phi + phi'²) dtheta`.
//!
//! Away from theta = 0 the roots come from a guarded Newton iteration. The
//! endpoint is a saddle of F where the function value drowns in rounding
//! (three O(1) terms cancel to O(theta²)), so for small theta the curve is
//! continued instead by integrating the slope field -F_theta/F_phi outward
//! from the saddle, whose partials stay well conditioned; the saddle slope
//! itself comes from the second-order expansion of F.

use crate::error::Error;
use crate::path::DiscretePath;
use crate::shape_geometry::{
    hopf_section, jacobi_inverse, mass_dot, mass_omega, ShapeVector, EULER_SCALED_POTENTIAL,
};
use crate::util::{map_indexed, pairwise_sum};
use crate::Result;

use std::f64::consts::FRAC_PI_3;

/// One solved point of the curve: phi(theta) and its derivative.
#[derive(Clone, Copy, Debug)]
pub struct EquipotentialSample {
    pub theta: f64,
    pub phi: f64,
    pub phi_prime: f64,
}

/// Converged arc length with the resolution used and an error estimate.
#[derive(Clone, Copy, Debug)]
pub struct LengthResult {
    pub ell0: f64,
    pub samples: usize,
    pub estimated_error: f64,
}

const NEWTON_MAX_ITER: usize = 50;
const CAUCHY_GAP: f64 = 1e-12;
const MAX_POINTS: usize = 1 << 20;
/// Below this theta the root solve switches to the slope-field
/// continuation from the saddle.
const SADDLE_SWITCH: f64 = 0.01;

/// (cos, sin) of theta + 2k pi/3 via the addition formula with exact
/// constants, so the theta- and phi-reflection symmetries of F hold
/// bitwise.
fn cosines(theta: f64) -> [(f64, f64); 3] {
    const H: f64 = 0.8660254037844386; // sqrt(3)/2
    let (s, c) = theta.sin_cos();
    [
        (c, s),
        (-0.5 * c - H * s, -0.5 * s + H * c),
        (-0.5 * c + H * s, -0.5 * s - H * c),
    ]
}

/// F(theta, phi); errors where a term of the sum is singular (the
/// collision points on the equator).
pub fn implicit_f(theta: f64, phi: f64) -> Result<f64> {
    let cp = phi.cos();
    let mut terms = [0.0; 3];
    for (k, (c, _)) in cosines(theta).into_iter().enumerate() {
        let g = 1.0 + cp * c;
        if g <= 0.0 {
            return Err(Error::Singular(format!(
                "equipotential equation singular at theta = {theta:.6}, phi = {phi:.6}"
            )));
        }
        terms[k] = 1.0 / g.sqrt();
    }
    // Sum the shifted pair first so the theta-reflection symmetry, which
    // swaps them, holds bitwise.
    Ok(terms[0] + (terms[1] + terms[2]) - EULER_SCALED_POTENTIAL)
}

/// Partial derivatives (F_theta, F_phi).
pub fn implicit_f_partials(theta: f64, phi: f64) -> Result<(f64, f64)> {
    let (sp, cp) = phi.sin_cos();
    let mut ft = [0.0; 3];
    let mut fp = [0.0; 3];
    for (k, (c, s)) in cosines(theta).into_iter().enumerate() {
        let g = 1.0 + cp * c;
        if g <= 0.0 {
            return Err(Error::Singular(format!(
                "equipotential equation singular at theta = {theta:.6}, phi = {phi:.6}"
            )));
        }
        let g32 = g.powf(-1.5);
        ft[k] = 0.5 * cp * s * g32;
        fp[k] = 0.5 * sp * c * g32;
    }
    Ok((ft[0] + (ft[1] + ft[2]), fp[0] + (fp[1] + fp[2])))
}

/// Newton iteration for the root of F(theta, ·), run to its rounding
/// floor (quadratic contraction until the steps stop shrinking).
fn newton_phi(theta: f64, seed: f64) -> Result<f64> {
    let top = std::f64::consts::FRAC_PI_2 - 1e-12;
    let mut phi = seed.clamp(1e-12, top);
    let mut prev_step = f64::INFINITY;
    for _ in 0..NEWTON_MAX_ITER {
        let f = implicit_f(theta, phi)?;
        let (_, fp) = implicit_f_partials(theta, phi)?;
        if fp == 0.0 {
            break;
        }
        let step = f / fp;
        phi = (phi - step).clamp(1e-14, top);
        let s = step.abs();
        if s < 1e-15 * phi.max(1e-3) || s >= 0.25 * prev_step {
            // At the floor; accept only if the residual is genuinely small.
            if implicit_f(theta, phi)?.abs() < 1e-10 {
                return Ok(phi);
            }
            break;
        }
        prev_step = s;
    }
    Err(Error::NonConvergence {
        what: "Newton iteration for phi(theta)",
        iterations: NEWTON_MAX_ITER,
        last: phi,
    })
}

/// Seed-free solve: bisection down to 1e-3 then Newton polish.
fn bracketed_phi(theta: f64) -> Result<f64> {
    let mut lo = 1e-3;
    let mut hi = std::f64::consts::FRAC_PI_2 - 1e-9;
    let flo = implicit_f(theta, lo)?;
    let fhi = implicit_f(theta, hi)?;
    if flo <= 0.0 || fhi >= 0.0 {
        return Err(Error::Singular(format!(
            "no bracketed root for phi at theta = {theta:.6}"
        )));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if implicit_f(theta, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    newton_phi(theta, 0.5 * (lo + hi))
}

fn sample_at(theta: f64, phi: f64) -> Result<EquipotentialSample> {
    let (ft, fp) = implicit_f_partials(theta, phi)?;
    Ok(EquipotentialSample {
        theta,
        phi,
        phi_prime: -ft / fp,
    })
}

/// The curve endpoint at the collinear configuration: theta = 0, phi = 0.
///
/// Both first partials of F vanish there, so the crossing slope comes from
/// the second-order expansion: phi'(0) = sqrt(-F_theta_theta / F_phi_phi).
pub fn solve_phi_at_euler() -> EquipotentialSample {
    let mut ftt = 0.0;
    let mut fpp = 0.0;
    for (c, s) in cosines(0.0) {
        let g: f64 = 1.0 + c;
        let g32 = g.powf(-1.5);
        let g52 = g.powf(-2.5);
        ftt += 0.75 * g52 * s * s + 0.5 * g32 * c;
        fpp += 0.5 * g32 * c;
    }
    EquipotentialSample {
        theta: 0.0,
        phi: 0.0,
        phi_prime: (-ftt / fpp).sqrt(),
    }
}

/// Continues the curve out of the saddle along dphi/dtheta =
/// -F_theta/F_phi, sampling at the given ascending thetas (all below
/// [`SADDLE_SWITCH`]). The saddle is repelling in this direction, so local
/// errors are damped as theta grows.
fn solve_by_ode(thetas: &[f64]) -> Result<Vec<EquipotentialSample>> {
    let slope = solve_phi_at_euler().phi_prime;
    let eps = (0.5 * thetas[0]).min(1e-6);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = match implicit_f_partials(t, y[0]) {
            Ok((ft, fp)) if fp != 0.0 => -ft / fp,
            _ => f64::NAN,
        };
    };
    let (samples, _) = crate::ode::integrate_samples(&rhs, &[slope * eps], eps, thetas, 1e-13)?;
    thetas
        .iter()
        .zip(samples)
        .map(|(&theta, y)| sample_at(theta, y[0]))
        .collect()
}

/// Solves at every theta of an ascending grid in (0, pi/3]: slope-field
/// continuation below [`SADDLE_SWITCH`], elsewhere Newton seeded from a
/// sequential continuation envelope (each node is then independent, so
/// this part parallelizes).
fn solve_many(thetas: &[f64]) -> Result<Vec<EquipotentialSample>> {
    let split = thetas.partition_point(|&t| t < SADDLE_SWITCH);
    let mut out = Vec::with_capacity(thetas.len());
    if split > 0 {
        out.extend(solve_by_ode(&thetas[..split])?);
    }
    let rest = &thetas[split..];
    if rest.is_empty() {
        return Ok(out);
    }
    // Coarse envelope, marched downward from pi/3 with Newton reseeding.
    let m = 512usize;
    let lo = rest[0];
    let hi = FRAC_PI_3;
    let mut env = vec![0.0f64; m + 1];
    let mut seed = bracketed_phi(hi)?;
    env[m] = seed;
    for i in (0..m).rev() {
        let th = lo + (hi - lo) * i as f64 / m as f64;
        seed = newton_phi(th, seed).or_else(|_| bracketed_phi(th))?;
        env[i] = seed;
    }
    let solved = map_indexed(rest.len(), |i| {
        let th = rest[i];
        let s = ((th - lo) / (hi - lo) * m as f64).clamp(0.0, m as f64);
        let j = (s.floor() as usize).min(m - 1);
        let guess = env[j] + (env[j + 1] - env[j]) * (s - j as f64);
        newton_phi(th, guess)
            .or_else(|_| bracketed_phi(th))
            .and_then(|phi| sample_at(th, phi))
    });
    for s in solved {
        out.push(s?);
    }
    Ok(out)
}

/// Solves F(theta, ·) = 0 for phi in (0, pi/2), for theta in (0, pi/3].
///
/// phi' comes from implicit differentiation. The endpoint theta = 0 is
/// handled by [`solve_phi_at_euler`].
pub fn solve_phi(theta: f64) -> Result<EquipotentialSample> {
    if !(theta > 0.0 && theta <= FRAC_PI_3 + 1e-15) {
        return Err(Error::InvalidInput(format!(
            "solve_phi needs theta in (0, pi/3], got {theta:.6}"
        )));
    }
    if theta < SADDLE_SWITCH {
        return Ok(solve_by_ode(&[theta])?.pop().unwrap());
    }
    let phi = bracketed_phi(theta)?;
    sample_at(theta, phi)
}

/// Solved grid over [0, pi/3]: `n + 1` samples including both endpoints.
pub fn solve_grid(n: usize) -> Result<Vec<EquipotentialSample>> {
    let h = FRAC_PI_3 / n as f64;
    let thetas: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let solved = solve_many(&thetas)?;
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(solve_phi_at_euler());
    grid.extend(solved);
    Ok(grid)
}

fn refine_grid(grid: &[EquipotentialSample]) -> Result<Vec<EquipotentialSample>> {
    let n = grid.len() - 1;
    let h = FRAC_PI_3 / (2 * n) as f64;
    let thetas: Vec<f64> = (0..n).map(|i| (2 * i + 1) as f64 * h).collect();
    let mids = solve_many(&thetas)?;
    let mut out = Vec::with_capacity(2 * n + 1);
    for (i, mid) in mids.into_iter().enumerate() {
        out.push(grid[i]);
        out.push(mid);
    }
    out.push(grid[n]);
    Ok(out)
}

fn integrand(s: &EquipotentialSample) -> f64 {
    let c = s.phi.cos();
    (c * c + s.phi_prime * s.phi_prime).sqrt()
}

/// Half the trapezoid value of ∫ sqrt(cos² phi + phi'²) over [0, pi/3].
fn half_arc_trapezoid(grid: &[EquipotentialSample]) -> f64 {
    let n = grid.len() - 1;
    let h = FRAC_PI_3 / n as f64;
    let values: Vec<f64> = grid.iter().map(integrand).collect();
    let interior = pairwise_sum(&values[1..n]);
    0.5 * h * (0.5 * (values[0] + values[n]) + interior)
}

/// Arc length of the curve's twelfth over [0, pi/3] in the radius-1/2
/// metric, refined by grid doubling until the trapezoid values are Cauchy
/// within 1e-12, then sharpened by one Richardson step (the same
/// difference provides the error estimate).
pub fn euler_length(n_base: usize, max_refinements: usize) -> Result<LengthResult> {
    if n_base < 8 {
        return Err(Error::InvalidInput("euler_length needs n_base >= 8".into()));
    }
    let mut grid = solve_grid(n_base)?;
    let mut value = half_arc_trapezoid(&grid);
    for _ in 0..max_refinements {
        if 2 * (grid.len() - 1) + 1 > MAX_POINTS {
            break;
        }
        grid = refine_grid(&grid)?;
        let next = half_arc_trapezoid(&grid);
        let gap = (next - value).abs();
        if gap < CAUCHY_GAP {
            return Ok(LengthResult {
                ell0: next + (next - value) / 3.0,
                samples: grid.len(),
                estimated_error: gap / 3.0,
            });
        }
        value = next;
    }
    Err(Error::NonConvergence {
        what: "equipotential length refinement",
        iterations: max_refinements,
        last: value,
    })
}

/// CSV dump of a solved grid: columns `theta,phi,phi_prime`.
pub fn samples_csv(grid: &[EquipotentialSample]) -> String {
    let mut out = String::from("theta,phi,phi_prime\n");
    for s in grid {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e}\n",
            s.theta, s.phi, s.phi_prime
        ));
    }
    out
}

/// The equipotential test path: `n + 1` configurations of constant size
/// sqrt(I0) whose shapes traverse the curve's twelfth from the third
/// collinear configuration to the first isosceles meridian at constant
/// reduced speed, lifted to the plane with zero angular momentum step by
/// step.
pub fn reduced_test_path(i0: f64, time_span: f64, n: usize) -> Result<DiscretePath> {
    if !(i0 > 0.0) || !(time_span > 0.0) {
        return Err(Error::InvalidInput(
            "reduced_test_path needs positive size and time span".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidInput("reduced_test_path needs n >= 2".into()));
    }

    // Dense parameter grid and cumulative arc length (unit-size metric).
    let fine = (16 * n).next_power_of_two().max(16_384);
    let grid = solve_grid(fine)?;
    let h = FRAC_PI_3 / fine as f64;
    let mut cum = Vec::with_capacity(fine + 1);
    cum.push(0.0);
    let mut acc = 0.0;
    for i in 0..fine {
        acc += 0.25 * h * (integrand(&grid[i]) + integrand(&grid[i + 1]));
        cum.push(acc);
    }
    let total = acc;

    // Invert s(theta) at the n+1 equally spaced length targets.
    let mut locals = Vec::with_capacity(n + 1);
    locals.push(grid[0]);
    for k in 1..n {
        let target = total * k as f64 / n as f64;
        let j = cum.partition_point(|&s| s < target).min(fine) - 1;
        let ds = cum[j + 1] - cum[j];
        let mut theta = grid[j].theta + h * (target - cum[j]) / ds;
        // One Newton polish on the local trapezoid model of s(theta).
        let sample = solve_phi(theta)?;
        let s_here =
            cum[j] + 0.25 * (theta - grid[j].theta) * (integrand(&grid[j]) + integrand(&sample));
        theta -= (s_here - target) / (0.5 * integrand(&sample));
        theta = theta.clamp(0.25 * h, FRAC_PI_3 - 0.25 * h);
        locals.push(solve_phi(theta)?);
    }
    locals.push(grid[fine]);

    // Shapes along the arc: theta_shape = 2pi/3 + theta, phi >= 0.
    let shapes: Vec<ShapeVector> = locals
        .iter()
        .map(|s| {
            let theta = 2.0 * FRAC_PI_3 + s.theta;
            let (sp, cp) = s.phi.sin_cos();
            ShapeVector::new(i0 * cp * theta.cos(), i0 * cp * theta.sin(), i0 * sp)
        })
        .collect();

    // Horizontal lift: per-step rotations cancel the angular momentum.
    let mut nodes = Vec::with_capacity(n + 1);
    let first = jacobi_inverse(&hopf_section(&shapes[0])?);
    nodes.push(first);
    for shape in &shapes[1..] {
        let raw = jacobi_inverse(&hopf_section(shape)?);
        let prev = nodes.last().unwrap();
        let angle = -mass_omega(prev, &raw).atan2(mass_dot(prev, &raw));
        nodes.push(raw.rotated(angle));
    }
    DiscretePath::new(time_span, nodes)
}
