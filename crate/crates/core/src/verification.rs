//! Quantitative checks against a minimizer path or an integrated orbit:
//! mean-value estimates, the Sundman margin, lobe star-shapedness, the
//! velocity pattern at collinear passages, choreography and Klein-symmetry
//! residuals, and cross-validation of the two construction routes.

use crate::error::Error;
use crate::integrator::Trajectory;
use crate::minimizer::midpoint_energies;
use crate::orbit_builder::Orbit;
use crate::path::DiscretePath;
use crate::planar::Vec2;
use crate::shape_geometry::{shape_of, Configuration, State};
use crate::util::map_indexed;
use crate::Result;

use std::f64::consts::PI;

/// One named check with its measured value and bound.
#[derive(Clone, Debug)]
pub struct CheckEntry {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
}

impl CheckEntry {
    fn upper(name: impl Into<String>, measured: f64, bound: f64) -> CheckEntry {
        CheckEntry {
            name: name.into(),
            measured,
            bound,
            passed: measured < bound,
        }
    }

    fn lower(name: impl Into<String>, measured: f64, bound: f64) -> CheckEntry {
        CheckEntry {
            name: name.into(),
            measured,
            bound,
            passed: measured > bound,
        }
    }
}

impl std::fmt::Display for CheckEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, bound {:.6e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound
        )
    }
}

/// Collection of check entries with an aggregate verdict.
#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn extend(&mut self, entries: Vec<CheckEntry>) {
        self.entries.extend(entries);
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"checks\": [\n");
        for (i, e) in self.entries.iter().enumerate() {
            out.push_str(&format!(
                "    {{\"name\": {:?}, \"measured\": {:.16e}, \"bound\": {:.16e}, \"passed\": {}}}",
                e.name, e.measured, e.bound, e.passed
            ));
            out.push_str(if i + 1 < self.entries.len() { ",\n" } else { "\n" });
        }
        out.push_str(&format!("  ],\n  \"aggregate_pass\": {}\n}}\n", self.passed()));
        out
    }
}

// ---------------------------------------------------------------------------
// Uniform samples of the choreography curve
// ---------------------------------------------------------------------------

/// Uniform per-period samples of the choreography curve together with the
/// underlying configurations, built either from an assembled orbit or from
/// an integrated trajectory.
#[derive(Clone, Debug)]
pub struct ChoreographySamples {
    pub tbar: f64,
    pub q: Vec<Vec2>,
    pub qdot: Vec<Vec2>,
    pub configs: Vec<Configuration>,
    /// For sample i: (config index, body index) such that q\[i\] is that
    /// body of that configuration.
    anchor: Vec<(usize, usize)>,
}

impl ChoreographySamples {
    pub fn samples(&self) -> usize {
        self.q.len()
    }

    fn at(&self, i: isize) -> Vec2 {
        let m = self.samples() as isize;
        self.q[i.rem_euclid(m) as usize]
    }

    fn ldot(&self, i: usize) -> f64 {
        self.q[i].wedge(self.qdot[i])
    }

    /// From a trajectory spanning exactly one period: the curve is body 3.
    pub fn from_trajectory(traj: &Trajectory) -> ChoreographySamples {
        let m = traj.states().len() - 1; // drop the duplicated endpoint
        let q = (0..m).map(|i| traj.states()[i].q.body(2)).collect();
        let qdot = (0..m).map(|i| traj.states()[i].v.body(2)).collect();
        let configs = (0..m).map(|i| traj.states()[i].q).collect();
        ChoreographySamples {
            tbar: traj.span(),
            q,
            qdot,
            configs,
            anchor: (0..m).map(|i| (i, 2)).collect(),
        }
    }

    /// From an assembled orbit: the curve is body 3's (smooth, periodic)
    /// track, differentiated with five-point periodic stencils.
    pub fn from_orbit(orbit: &Orbit) -> Result<ChoreographySamples> {
        let m = orbit.samples();
        if m % 3 != 0 {
            return Err(Error::InvalidInput(
                "orbit sample count must be divisible by 3".into(),
            ));
        }
        let h = orbit.sample_step();
        let mut qdot = Vec::with_capacity(m);
        for i in 0..m as isize {
            let track = |j: isize| orbit.x_at(i + j).body(2);
            // Five-point first derivative at the center.
            let d = (track(-2) - track(2)) * (1.0 / (12.0 * h))
                + (track(1) - track(-1)) * (8.0 / (12.0 * h));
            qdot.push(d);
        }
        Ok(ChoreographySamples {
            tbar: orbit.tbar,
            q: orbit.q.clone(),
            qdot,
            configs: orbit.x.clone(),
            anchor: (0..m).map(|i| (i, 2)).collect(),
        })
    }

    /// From raw state samples spanning one period (e.g. parsed CSV).
    pub fn from_states(tbar: f64, states: &[State]) -> ChoreographySamples {
        let m = states.len();
        ChoreographySamples {
            tbar,
            q: states.iter().map(|s| s.q.body(2)).collect(),
            qdot: states.iter().map(|s| s.v.body(2)).collect(),
            configs: states.iter().map(|s| s.q).collect(),
            anchor: (0..m).map(|i| (i, 2)).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Mean values and the estimate suite
// ---------------------------------------------------------------------------

/// Trapezoid means over a window of a trajectory, resampled uniformly.
#[derive(Clone, Copy, Debug)]
pub struct MeanValues {
    pub u: f64,
    pub k: f64,
    pub i: f64,
    pub abs_j: f64,
    /// Energy of the initial state.
    pub energy: f64,
}

pub fn mean_values(traj: &Trajectory, t0: f64, t1: f64, m: usize) -> Result<MeanValues> {
    if t0 < traj.times()[0] - 1e-12 || t1 > traj.times()[0] + traj.span() + 1e-12 || t1 <= t0 {
        return Err(Error::InvalidInput("mean window outside trajectory span".into()));
    }
    let h = (t1 - t0) / m as f64;
    let mut su = 0.0;
    let mut sk = 0.0;
    let mut si = 0.0;
    let mut sj = 0.0;
    for idx in 0..=m {
        let w = if idx == 0 || idx == m { 0.5 } else { 1.0 };
        let s = traj.state_at(t0 + idx as f64 * h);
        su += w * s.q.potential()?;
        sk += w * s.kinetic();
        si += w * s.q.moment_of_inertia();
        sj += w * s.dilation_rate().abs();
    }
    let norm = 1.0 / m as f64;
    Ok(MeanValues {
        u: su * norm,
        k: sk * norm,
        i: si * norm,
        abs_j: sj * norm,
        energy: traj.start().energy()?,
    })
}

/// Reference constants of the estimate suite for a twelfth-period `t`:
/// the optimal test size I0, U0 = K0 = l0² I0 / t², H0 = -U0/2 and
/// J0 = sqrt(I0 K0).
#[derive(Clone, Copy, Debug)]
pub struct EstimateConstants {
    pub i0: f64,
    pub u0: f64,
    pub h0: f64,
    pub j0: f64,
}

pub fn estimate_constants(ell0: f64, t: f64) -> EstimateConstants {
    let (i0, _) = crate::action_bounds::optimal_test_action(ell0, t);
    let u0 = ell0 * ell0 * i0 / (t * t);
    EstimateConstants {
        i0,
        u0,
        h0: -0.5 * u0,
        j0: (i0 * u0).sqrt(),
    }
}

/// The mean-value estimates over one twelfth of a full-period trajectory:
/// equality of the kinetic and potential means, the virial link to the
/// energy, and the strict upper bounds on the means.
pub fn estimate_checks(traj: &Trajectory, ell0: f64) -> Result<Vec<CheckEntry>> {
    let t = traj.span() / 12.0;
    let c = estimate_constants(ell0, t);
    let mv = mean_values(traj, 0.0, t, 4096)?;
    let full = mean_values(traj, 0.0, traj.span(), 4096)?;
    let h = mv.energy;

    let mut entries = vec![
        CheckEntry::upper("<K> = <U> (relative)", (mv.k - mv.u).abs() / mv.u, 1e-6),
        CheckEntry::upper(
            "<K> = -2H (relative)",
            (mv.k + 2.0 * h).abs() / mv.k,
            1e-6,
        ),
        CheckEntry::upper("<U> < U0", mv.u, c.u0),
        CheckEntry::lower("H > H0", h, c.h0),
        CheckEntry::upper(
            "<I> < (36 l0^2/pi^2) I0",
            mv.i,
            36.0 * ell0 * ell0 / (PI * PI) * c.i0,
        ),
        CheckEntry::upper("<|J|> < (6 l0/pi) J0", mv.abs_j, 6.0 * ell0 / PI * c.j0),
    ];
    // Action identity A = -3HT < a = -3 H0 T.
    let action = (0.5 * mv.k + mv.u) * t;
    entries.push(CheckEntry::upper(
        "A = -3HT (relative)",
        (action + 3.0 * h * t).abs() / action,
        1e-6,
    ));
    entries.push(CheckEntry::upper("A < a", action, -3.0 * c.h0 * t));
    // Mean-zero loops obey <K> > (2 pi / Tbar)^2 <I> over the full period.
    let tbar = traj.span();
    entries.push(CheckEntry::lower(
        "<K> > (2pi/Tbar)^2 <I> (full period)",
        full.k,
        (2.0 * PI / tbar).powi(2) * full.i,
    ));
    // J vanishes at the window boundaries.
    let j0 = traj.start().dilation_rate().abs();
    let j1 = traj.state_at(t).dilation_rate().abs();
    entries.push(CheckEntry::upper("|J(0)| and |J(T)|", j0.max(j1), 1e-5 * c.j0));
    Ok(entries)
}

/// Discrete counterpart of [`estimate_checks`] for a minimizer arc.
pub fn estimate_checks_path(path: &DiscretePath, ell0: f64) -> Result<Vec<CheckEntry>> {
    let t = path.time_span();
    let n = path.n_segments();
    let h = path.step();
    let c = estimate_constants(ell0, t);

    let mut su = 0.0;
    let mut si = 0.0;
    for k in 0..=n {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        su += w * path.node(k).potential()?;
        si += w * path.node(k).moment_of_inertia();
    }
    let mean_u = su / n as f64;
    let mean_i = si / n as f64;
    let mut sk = 0.0;
    let mut sj = 0.0;
    for k in 0..n {
        let delta = *path.node(k + 1) - *path.node(k);
        sk += delta.moment_of_inertia() / (h * h);
        let mid = (*path.node(k) + *path.node(k + 1)) * 0.5;
        sj += crate::shape_geometry::mass_dot(&mid, &delta).abs() / h;
    }
    let mean_k = sk / n as f64;
    let mean_j = sj / n as f64;
    let energies = midpoint_energies(path)?;
    let energy = energies.iter().sum::<f64>() / energies.len() as f64;

    // Second-order boundary dilation rates.
    let v0 = (*path.node(1) - *path.node(0)) * (1.0 / h)
        - crate::integrator::accelerations(path.node(0))? * (0.5 * h);
    let vn = (*path.node(n) - *path.node(n - 1)) * (1.0 / h)
        + crate::integrator::accelerations(path.node(n))? * (0.5 * h);
    let j_start = crate::shape_geometry::mass_dot(path.node(0), &v0).abs();
    let j_end = crate::shape_geometry::mass_dot(path.node(n), &vn).abs();

    let rel_tol = 50.0 * h * h; // quadrature order of the discretization
    Ok(vec![
        CheckEntry::upper(
            "<K> = <U> (relative, discrete)",
            (mean_k - mean_u).abs() / mean_u,
            rel_tol,
        ),
        CheckEntry::upper(
            "<K> = -2H (relative, discrete)",
            (mean_k + 2.0 * energy).abs() / mean_k,
            rel_tol,
        ),
        CheckEntry::upper("<U> < U0", mean_u, c.u0),
        CheckEntry::lower("H > H0", energy, c.h0),
        CheckEntry::upper(
            "<I> < (36 l0^2/pi^2) I0",
            mean_i,
            36.0 * ell0 * ell0 / (PI * PI) * c.i0,
        ),
        CheckEntry::upper("<|J|> < (6 l0/pi) J0", mean_j, 6.0 * ell0 / PI * c.j0),
        CheckEntry::upper("|J(0)| and |J(T)|", j_start.max(j_end), 1e-4 * c.j0),
    ])
}

/// Worst margin of I·K - J² >= 0 over the trajectory samples.
pub fn sundman_margin(traj: &Trajectory) -> f64 {
    traj.states()
        .iter()
        .map(|s| {
            s.q.moment_of_inertia() * s.kinetic() - s.dilation_rate() * s.dilation_rate()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Residual of the velocity pattern at a collinear passage: the outer
/// bodies share a velocity equal to minus half the middle body's.
pub fn euler_velocity_constraint(s: &State) -> Result<f64> {
    if !s.q.is_collinear(1e-6) {
        return Err(Error::InvalidInput(
            "state is not at a collinear configuration".into(),
        ));
    }
    let mid = (0..3)
        .min_by(|&a, &b| s.q.body(a).norm().total_cmp(&s.q.body(b).norm()))
        .unwrap();
    let (a, b) = match mid {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    Ok((s.v.body(a) - s.v.body(b)).norm() + (s.v.body(a) + s.v.body(mid) * 0.5).norm())
}

// ---------------------------------------------------------------------------
// Star-shape checks
// ---------------------------------------------------------------------------

/// Checks that each lobe is starshaped: the curve's angular momentum
/// q ∧ q' keeps one sign per half period, vanishes only at the origin
/// passages, decreases then increases over the first quarter, the polar
/// angle is monotone, and the analytic derivative of q ∧ q' matches
/// finite differences.
pub fn starshape_checks(samples: &ChoreographySamples) -> Vec<CheckEntry> {
    let m = samples.samples();
    let h = samples.tbar / m as f64;
    let q_scale = samples.q.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let origin_eps = 1e-4 * q_scale;

    // Origin passages: clusters of samples with |q| below the threshold.
    let near: Vec<bool> = samples.q.iter().map(|v| v.norm() < origin_eps).collect();
    let mut clusters = 0;
    for i in 0..m {
        if near[i] && !near[(i + m - 1) % m] {
            clusters += 1;
        }
    }

    let l: Vec<f64> = (0..m).map(|i| samples.ldot(i)).collect();
    let half = m / 2;
    // Sign on the open half-periods, away from origin passages.
    let mut worst_neg = f64::NEG_INFINITY; // should stay < 0 on (0, T/2)
    let mut worst_pos = f64::INFINITY; // should stay > 0 on (T/2, T)
    for i in 1..half {
        if !near[i] {
            worst_neg = worst_neg.max(l[i]);
        }
    }
    for i in half + 1..m {
        if !near[i] {
            worst_pos = worst_pos.min(l[i]);
        }
    }

    // Monotonicity of q ∧ q' on (0, T/6) and (T/6, T/4).
    let sixth = m / 6;
    let quarter = m / 4;
    let slack = 1e-9 * l.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut max_up = f64::NEG_INFINITY;
    for i in 0..sixth {
        max_up = max_up.max(l[i + 1] - l[i]);
    }
    let mut min_down = f64::INFINITY;
    for i in sixth..quarter {
        min_down = min_down.min(l[i + 1] - l[i]);
    }

    // Polar angle strictly monotone on (0, T/2), away from the origin.
    let mut prev_angle = f64::NAN;
    let mut max_dtheta = f64::NEG_INFINITY;
    for i in 1..half {
        if near[i] {
            continue;
        }
        let a = samples.q[i].angle();
        if !prev_angle.is_nan() {
            let mut d = a - prev_angle;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            max_dtheta = max_dtheta.max(d);
        }
        prev_angle = a;
    }

    // Derivative identity dL/dt = (1/r13^3 - 1/r23^3)(q ∧ x_first).
    let analytic: Vec<f64> = (0..m)
        .map(|i| {
            let (ci, body) = samples.anchor[i];
            let c = &samples.configs[ci];
            let (oa, ob) = match body {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let ra = c.separation(body, oa);
            let rb = c.separation(body, ob);
            (1.0 / (ra * ra * ra) - 1.0 / (rb * rb * rb)) * c.body(body).wedge(c.body(oa))
        })
        .collect();
    let scale = analytic.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let mut worst_identity = 0.0f64;
    for i in 0..m {
        let im = |k: isize| l[((i as isize + k).rem_euclid(m as isize)) as usize];
        let fd = (im(-2) - 8.0 * im(-1) + 8.0 * im(1) - im(2)) / (12.0 * h);
        worst_identity = worst_identity.max((fd - analytic[i]).abs() / scale);
    }

    vec![
        CheckEntry {
            name: "origin passages per period".into(),
            measured: clusters as f64,
            bound: 2.0,
            passed: clusters == 2,
        },
        CheckEntry::upper("q ∧ q' < 0 on (0, T/2)", worst_neg, 0.0),
        CheckEntry::lower("q ∧ q' > 0 on (T/2, T)", worst_pos, 0.0),
        CheckEntry::upper("q ∧ q' decreasing on (0, T/6)", max_up, slack),
        CheckEntry::lower("q ∧ q' increasing on (T/6, T/4)", min_down, -slack),
        CheckEntry::upper("polar angle decreasing on (0, T/2)", max_dtheta, 0.0),
        CheckEntry::upper("d(q ∧ q')/dt identity (relative)", worst_identity, 1e-4),
    ]
}

// ---------------------------------------------------------------------------
// Choreography and Klein-symmetry residuals
// ---------------------------------------------------------------------------

/// Max residual of x(t) = (q(t + 2T/3), q(t + T/3), q(t)) over the samples.
pub fn choreography_residual(samples: &ChoreographySamples) -> Result<f64> {
    let m = samples.samples();
    if m % 3 != 0 {
        return Err(Error::InvalidInput("sample count must be divisible by 3".into()));
    }
    let third = (m / 3) as isize;
    let mut worst = 0.0f64;
    for i in 0..m {
        let c = &samples.configs[i];
        let ii = i as isize;
        let r = (c.body(0) - samples.at(ii + 2 * third))
            .norm()
            .max((c.body(1) - samples.at(ii + third)).norm())
            .max((c.body(2) - samples.at(ii)).norm());
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Max residuals of the Klein equivariances
/// q(t + T/2) = (-qx, qy)(t) and q(T/2 - t) = (qx, -qy)(t).
pub fn klein_residuals(samples: &ChoreographySamples) -> Result<(f64, f64)> {
    let m = samples.samples();
    if m % 2 != 0 {
        return Err(Error::InvalidInput("sample count must be even".into()));
    }
    let half = (m / 2) as isize;
    let mut sigma = 0.0f64;
    let mut tau = 0.0f64;
    for i in 0..m as isize {
        let q = samples.at(i);
        let s = samples.at(i + half) - Vec2::new(-q.x, q.y);
        let t = samples.at(half - i) - Vec2::new(q.x, -q.y);
        sigma = sigma.max(s.norm());
        tau = tau.max(t.norm());
    }
    Ok((sigma, tau))
}

/// Max residual of q(t) + q(t + T/3) + q(t + 2T/3) = 0.
pub fn zero_sum_q_residual(samples: &ChoreographySamples) -> Result<f64> {
    let m = samples.samples();
    if m % 3 != 0 {
        return Err(Error::InvalidInput("sample count must be divisible by 3".into()));
    }
    let third = (m / 3) as isize;
    let mut worst = 0.0f64;
    for i in 0..m as isize {
        let s = samples.at(i) + samples.at(i + third) + samples.at(i + 2 * third);
        worst = worst.max(s.norm());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Cross-validation of the two construction routes
// ---------------------------------------------------------------------------

/// Squared distance from a point to the segment [a, b].
fn point_segment_dist_sq(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    let t = if len_sq == 0.0 {
        0.0
    } else {
        ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0)
    };
    (p - (a + ab * t)).norm_sq()
}

/// Hausdorff distance between two closed curves given as sample loops;
/// each sup ranges over one loop's samples against the other's closed
/// polyline, so unequal sampling densities do not inflate the result.
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    let directed = |from: &[Vec2], to: &[Vec2]| -> f64 {
        let m = to.len();
        let sup = map_indexed(from.len(), |i| {
            let p = from[i];
            (0..m)
                .map(|j| point_segment_dist_sq(p, to[j], to[(j + 1) % m]))
                .fold(f64::INFINITY, f64::min)
        });
        sup.into_iter().fold(0.0f64, f64::max).sqrt()
    };
    directed(a, b).max(directed(b, a))
}

fn rotated_set(points: &[Vec2], angle: f64) -> Vec<Vec2> {
    points.iter().map(|p| p.rotated(angle)).collect()
}

/// Rotates `a` to best match `b` (golden-section search around `hint`,
/// also trying the half-turn) and returns (angle, Hausdorff distance).
pub fn fit_rotation(a: &[Vec2], b: &[Vec2], hint: f64) -> (f64, f64) {
    let stride_a = (a.len() / 512).max(1);
    let stride_b = (b.len() / 512).max(1);
    let coarse_a: Vec<Vec2> = a.iter().step_by(stride_a).copied().collect();
    let coarse_b: Vec<Vec2> = b.iter().step_by(stride_b).copied().collect();
    let cost = |angle: f64| hausdorff_distance(&rotated_set(&coarse_a, angle), &coarse_b);

    let golden = |mut lo: f64, mut hi: f64| -> f64 {
        let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (cost(c), cost(d));
        for _ in 0..40 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = cost(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = cost(d);
            }
        }
        0.5 * (lo + hi)
    };

    let mut best = (f64::INFINITY, 0.0);
    for offset in [0.0, PI] {
        let center = hint + offset;
        let angle = golden(center - 0.2, center + 0.2);
        let full = hausdorff_distance(&rotated_set(a, angle), b);
        if full < best.0 {
            best = (full, angle);
        }
    }
    (best.1, best.0)
}

/// Compares an assembled orbit against an integrated trajectory covering
/// one period: rescales the orbit to the trajectory's period (an exact
/// symmetry), fits one rotation, and returns the Hausdorff distance of the
/// two choreography curves.
pub fn cross_validate(orbit: &Orbit, traj: &Trajectory) -> Result<f64> {
    let lambda = (traj.span() / orbit.tbar).powf(2.0 / 3.0);
    let scaled = orbit.rescaled(lambda);
    let a: Vec<Vec2> = scaled.q.clone();
    let m = traj.states().len() - 1;
    let b: Vec<Vec2> = (0..m).map(|i| traj.states()[i].q.body(2)).collect();

    // Hint: align the collinear lines at the initial samples.
    let hint = traj.states()[0].q.body(0).angle() - scaled.x[0].body(0).angle();
    let (_, dist) = fit_rotation(&a, &b, hint);
    Ok(dist)
}

// ---------------------------------------------------------------------------
// Aggregate reports
// ---------------------------------------------------------------------------

/// Full verification of an integrated full-period trajectory.
pub fn verify_trajectory(traj: &Trajectory, ell0: f64) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let s0 = traj.start();
    let h0 = s0.energy()?;
    let c0 = s0.angular_momentum();
    let mut h_drift = 0.0f64;
    let mut c_drift = 0.0f64;
    for s in traj.states() {
        h_drift = h_drift.max((s.energy()? - h0).abs());
        c_drift = c_drift.max((s.angular_momentum() - c0).abs());
    }
    report.entries.push(CheckEntry::upper("energy drift", h_drift, 1e-9));
    report
        .entries
        .push(CheckEntry::upper("angular momentum drift", c_drift, 1e-9));
    report.entries.push(CheckEntry::upper(
        "periodicity defect",
        crate::integrator::state_distance(traj.start(), traj.end()),
        1e-5,
    ));
    report.entries.push(CheckEntry::lower(
        "Sundman margin I K - J^2",
        sundman_margin(traj),
        -1e-9,
    ));
    report.extend(estimate_checks(traj, ell0)?);

    let samples = ChoreographySamples::from_trajectory(traj);
    if samples.samples() % 12 == 0 {
        report.entries.push(CheckEntry::upper(
            "choreography residual",
            choreography_residual(&samples)?,
            1e-4,
        ));
        let (sigma, tau) = klein_residuals(&samples)?;
        report
            .entries
            .push(CheckEntry::upper("Klein residual (half-turn)", sigma, 1e-4));
        report
            .entries
            .push(CheckEntry::upper("Klein residual (reversal)", tau, 1e-4));
        report.entries.push(CheckEntry::upper(
            "q zero-sum residual",
            zero_sum_q_residual(&samples)?,
            1e-4,
        ));
    }
    report.extend(starshape_checks(&samples));

    // Velocity pattern at the first interior collinear passage (t = 2T).
    let t_euler = find_collinear_time(traj, traj.span() / 6.0)?;
    let resid = euler_velocity_constraint(&traj.state_at(t_euler))?;
    report
        .entries
        .push(CheckEntry::upper("collinear velocity pattern", resid, 1e-6));
    Ok(report)
}

/// Locates a collinear passage near `t_hint` by bisecting the sign change
/// of the oriented-area coordinate u3 along the trajectory.
pub fn find_collinear_time(traj: &Trajectory, t_hint: f64) -> Result<f64> {
    let u3 = |t: f64| shape_of(&traj.state_at(t).q).u3;
    let span = traj.span();
    let mut window = span / 24.0;
    for _ in 0..6 {
        let (mut lo, mut hi) = ((t_hint - window).max(0.0), (t_hint + window).min(span));
        let (flo, fhi) = (u3(lo), u3(hi));
        if flo == 0.0 {
            return Ok(lo);
        }
        if flo * fhi < 0.0 {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if u3(lo) * u3(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        window *= 0.5;
    }
    Err(Error::InvalidInput(format!(
        "no collinear passage near t = {t_hint:.6}"
    )))
}

/// Full verification of an assembled orbit.
pub fn verify_orbit(orbit: &Orbit) -> Result<VerificationReport> {
    let mut report = VerificationReport::default();
    let samples = ChoreographySamples::from_orbit(orbit)?;
    report.entries.push(CheckEntry::upper(
        "choreography residual",
        choreography_residual(&samples)?,
        1e-5,
    ));
    let (sigma, tau) = klein_residuals(&samples)?;
    report
        .entries
        .push(CheckEntry::upper("Klein residual (half-turn)", sigma, 1e-5));
    report
        .entries
        .push(CheckEntry::upper("Klein residual (reversal)", tau, 1e-5));
    report.entries.push(CheckEntry::upper(
        "q zero-sum residual",
        zero_sum_q_residual(&samples)?,
        1e-12,
    ));
    report.extend(starshape_checks(&samples));

    // Area rule: no rotation of the collinear line over a third-period.
    let third = orbit.tbar / 3.0;
    let angle = crate::orbit_builder::euler_line_angle(orbit, 0.0, third)?;
    report.entries.push(CheckEntry::upper(
        "collinear line rotation over T/3 (mod pi)",
        angle.min(PI - angle),
        1e-4,
    ));
    let predicted = crate::orbit_builder::euler_line_angle_prediction(orbit, 0.0, third)?;
    report.entries.push(CheckEntry::upper(
        "area-rule prediction over T/3 (mod pi)",
        predicted.min(PI - predicted),
        1e-3,
    ));
    // Half-third comparison: measured angle against the area rule.
    let sixth = orbit.tbar / 6.0;
    let measured = crate::orbit_builder::euler_line_angle(orbit, 0.0, sixth)?;
    let predicted = crate::orbit_builder::euler_line_angle_prediction(orbit, 0.0, sixth)?;
    report.entries.push(CheckEntry::upper(
        "area rule vs measured rotation over T/6",
        crate::util::angle_dist_mod_pi(measured - predicted),
        1e-3,
    ));

    // Zero angular momentum of the assembled loop.
    let m = samples.samples();
    let h = orbit.sample_step();
    let mut worst = 0.0f64;
    for i in 0..m as isize {
        let v = (*orbit.x_at(i + 1) - *orbit.x_at(i - 1)) * (0.5 / h);
        worst = worst.max(crate::shape_geometry::mass_omega(orbit.x_at(i), &v).abs());
    }
    report
        .entries
        .push(CheckEntry::upper("orbit angular momentum", worst, 1e-6));
    Ok(report)
}
