//! High-accuracy integration of the planar three-body equations with unit
//! masses and unit gravitational constant, dense sampled output, period
//! refinement, and monodromy (variational) propagation for linear
//! stability.

use crate::error::Error;
use crate::ode::{integrate_samples, OdeStats};
use crate::planar::Vec2;
use crate::shape_geometry::{Configuration, State};
use crate::Result;

use nalgebra::{Complex, DMatrix};

/// Published period of the figure-eight orbit for the initial condition
/// of [`simo_initial_state`] (size normalization I(0) = 2).
pub const SIMO_PERIOD: f64 = 6.32591398;

/// Accelerations of unit masses: xdd_i = sum_{j != i} (x_j - x_i)/r_ij^3.
pub fn accelerations(c: &Configuration) -> Result<Configuration> {
    let mut acc = [Vec2::ZERO; 3];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let d = c.body(j) - c.body(i);
        let r2 = d.norm_sq();
        if r2 == 0.0 {
            return Err(Error::Collision(i + 1, j + 1));
        }
        let f = d * (1.0 / (r2 * r2.sqrt()));
        acc[i] += f;
        acc[j] -= f;
    }
    Configuration::new(acc)
}

fn state_to_array(s: &State) -> [f64; 12] {
    let mut y = [0.0; 12];
    for i in 0..3 {
        y[2 * i] = s.q.body(i).x;
        y[2 * i + 1] = s.q.body(i).y;
        y[6 + 2 * i] = s.v.body(i).x;
        y[6 + 2 * i + 1] = s.v.body(i).y;
    }
    y
}

fn array_to_state(y: &[f64]) -> State {
    let body = |k: usize| Vec2::new(y[2 * k], y[2 * k + 1]);
    let vel = |k: usize| Vec2::new(y[6 + 2 * k], y[6 + 2 * k + 1]);
    State::new(
        Configuration::recentered(body(0), body(1), body(2)),
        Configuration::recentered(vel(0), vel(1), vel(2)),
    )
}

/// Raw accelerations without the collision check; singular inputs produce
/// non-finite values that the adaptive controller rejects.
fn accel_raw(y: &[f64], out: &mut [f64]) {
    out[..6].fill(0.0);
    for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let dx = y[2 * j] - y[2 * i];
        let dy = y[2 * j + 1] - y[2 * i + 1];
        let r2 = dx * dx + dy * dy;
        let inv_r3 = 1.0 / (r2 * r2.sqrt());
        out[2 * i] += dx * inv_r3;
        out[2 * i + 1] += dy * inv_r3;
        out[2 * j] -= dx * inv_r3;
        out[2 * j + 1] -= dy * inv_r3;
    }
}

fn rhs12(_t: f64, y: &[f64], dy: &mut [f64]) {
    dy[..6].copy_from_slice(&y[6..12]);
    let mut acc = [0.0; 6];
    accel_raw(y, &mut acc);
    dy[6..12].copy_from_slice(&acc);
}

/// Dense output of one integration: uniform samples with states and
/// accelerations, interpolable between samples with quintic Hermite.
#[derive(Clone, Debug)]
pub struct Trajectory {
    t: Vec<f64>,
    states: Vec<State>,
    accels: Vec<Configuration>,
    pub stats: OdeStats,
    pub tol: f64,
}

impl Trajectory {
    /// Wraps externally produced uniform samples (e.g. a parsed CSV dump)
    /// so the verification checks can run on them.
    pub fn from_samples(t: Vec<f64>, states: Vec<State>) -> Result<Trajectory> {
        if t.len() != states.len() || t.len() < 3 {
            return Err(Error::InvalidInput(
                "trajectory needs at least three matching samples".into(),
            ));
        }
        let h = t[1] - t[0];
        for w in t.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0) {
                return Err(Error::InvalidInput("trajectory samples must be uniform".into()));
            }
        }
        let accels = states
            .iter()
            .map(|s| accelerations(&s.q))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trajectory {
            t,
            states,
            accels,
            stats: OdeStats::default(),
            tol: f64::NAN,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn accelerations_at_samples(&self) -> &[Configuration] {
        &self.accels
    }

    pub fn span(&self) -> f64 {
        *self.t.last().unwrap() - self.t[0]
    }

    pub fn start(&self) -> &State {
        &self.states[0]
    }

    pub fn end(&self) -> &State {
        self.states.last().unwrap()
    }

    /// State at an arbitrary time inside the span: quintic Hermite for
    /// positions (value, velocity, acceleration at both sample ends),
    /// cubic Hermite for velocities.
    pub fn state_at(&self, t: f64) -> State {
        let n = self.t.len() - 1;
        let h = self.span() / n as f64;
        let s = ((t - self.t[0]) / h).clamp(0.0, n as f64 - 1e-12);
        let k = (s.floor() as usize).min(n - 1);
        let f = s - k as f64;
        let (s0, s1) = (&self.states[k], &self.states[k + 1]);
        let (a0, a1) = (&self.accels[k], &self.accels[k + 1]);

        let mut q = [Vec2::ZERO; 3];
        let mut v = [Vec2::ZERO; 3];
        for i in 0..3 {
            q[i] = quintic_hermite(
                s0.q.body(i),
                s0.v.body(i),
                a0.body(i),
                s1.q.body(i),
                s1.v.body(i),
                a1.body(i),
                f,
                h,
            );
            v[i] = cubic_hermite(s0.v.body(i), a0.body(i), s1.v.body(i), a1.body(i), f, h);
        }
        State::new(
            Configuration::recentered(q[0], q[1], q[2]),
            Configuration::recentered(v[0], v[1], v[2]),
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn quintic_hermite(
    p0: Vec2,
    v0: Vec2,
    a0: Vec2,
    p1: Vec2,
    v1: Vec2,
    a1: Vec2,
    s: f64,
    h: f64,
) -> Vec2 {
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h00 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h10 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h20 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h01 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let h11 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h21 = 0.5 * (s3 - 2.0 * s4 + s5);
    p0 * h00 + v0 * (h * h10) + a0 * (h * h * h20) + p1 * h01 + v1 * (h * h11) + a1 * (h * h * h21)
}

fn cubic_hermite(v0: Vec2, a0: Vec2, v1: Vec2, a1: Vec2, s: f64, h: f64) -> Vec2 {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 1.0 - 3.0 * s2 + 2.0 * s3;
    let h10 = s - 2.0 * s2 + s3;
    let h01 = 3.0 * s2 - 2.0 * s3;
    let h11 = -s2 + s3;
    v0 * h00 + a0 * (h * h10) + v1 * h01 + a1 * (h * h11)
}

/// Integrates the three-body equations from `s0` to `t_end`, sampling the
/// state at `n_samples + 1` uniform times (including both endpoints).
pub fn integrate(s0: &State, t_end: f64, tol: f64, n_samples: usize) -> Result<Trajectory> {
    if !(t_end > 0.0) || n_samples < 2 {
        return Err(Error::InvalidInput(
            "integrate needs t_end > 0 and at least two samples".into(),
        ));
    }
    if s0.q.min_separation() == 0.0 {
        return Err(Error::InvalidInput(
            "initial state has coincident bodies".into(),
        ));
    }
    let times: Vec<f64> = (0..=n_samples)
        .map(|i| t_end * i as f64 / n_samples as f64)
        .collect();
    let y0 = state_to_array(s0);
    let (raw, stats) = integrate_samples(&rhs12, &y0, 0.0, &times, tol)?;
    let states: Vec<State> = raw.iter().map(|y| array_to_state(y)).collect();
    let accels = states
        .iter()
        .map(|s| accelerations(&s.q))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        t: times,
        states,
        accels,
        stats,
        tol,
    })
}

/// The published high-precision initial condition of the figure-eight
/// choreography: collinear with body 3 at the origin, I(0) = 2.
pub fn simo_initial_state() -> State {
    let x1 = Vec2::new(0.97000436, -0.24308753);
    let v3 = Vec2::new(-0.93240737, -0.86473146);
    let q = Configuration::new([x1, -x1, Vec2::ZERO]).unwrap();
    let v = Configuration::new([v3 * -0.5, v3 * -0.5, v3]).unwrap();
    State::new(q, v)
}

/// Max-norm of the difference between two states over all 12 phase
/// coordinates.
pub fn state_distance(a: &State, b: &State) -> f64 {
    let (ya, yb) = (state_to_array(a), state_to_array(b));
    ya.iter()
        .zip(&yb)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

/// Refines a period guess by minimizing the periodicity defect
/// |state(T) - state(0)| over T near `t_guess`; returns the refined period
/// and the residual defect.
pub fn refine_period(s0: &State, t_guess: f64) -> Result<(f64, f64)> {
    let half_window = 1e-3;
    let traj = integrate(s0, t_guess + 1.2 * half_window, 1e-12, 8192)?;
    let defect = |t: f64| state_distance(&traj.state_at(t), s0);

    // Golden-section minimization on the bracket.
    let (mut lo, mut hi) = (t_guess - half_window, t_guess + half_window);
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (defect(c), defect(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = defect(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = defect(d);
        }
    }
    let t_refined = 0.5 * (lo + hi);
    if (t_refined - (t_guess - half_window)).abs() < 1e-6
        || (t_refined - (t_guess + half_window)).abs() < 1e-6
    {
        return Err(Error::NonConvergence {
            what: "period refinement (minimum at bracket edge)",
            iterations: 80,
            last: t_refined,
        });
    }
    Ok((t_refined, defect(t_refined)))
}

/// Time-`period` linearization of the flow around a (near-)periodic state,
/// obtained by integrating the variational equations alongside the orbit
/// with the twelve tangent columns seeded by the identity.
#[derive(Clone, Debug)]
pub struct MonodromyResult {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
}

impl MonodromyResult {
    pub fn determinant(&self) -> f64 {
        self.matrix.clone().lu().determinant()
    }
}

pub fn monodromy(s0: &State, period: f64, tol: f64) -> Result<MonodromyResult> {
    let dim = 12 + 144;
    let mut y0 = vec![0.0; dim];
    y0[..12].copy_from_slice(&state_to_array(s0));
    for c in 0..12 {
        y0[12 + 13 * c] = 1.0; // identity seed, column-major
    }

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        rhs12(0.0, &y[..12], &mut dy[..12]);
        // Pairwise Hessian action on each tangent column.
        let pos = &y[..6];
        let mut pair = [[0.0f64; 4]; 3]; // (dx, dy, r2, inv_r5) per pair
        for (p, (i, j)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
            let dx = pos[2 * j] - pos[2 * i];
            let dyy = pos[2 * j + 1] - pos[2 * i + 1];
            let r2 = dx * dx + dyy * dyy;
            pair[p] = [dx, dyy, r2, 1.0 / (r2 * r2 * r2.sqrt())];
        }
        for c in 0..12 {
            let base = 12 + 12 * c;
            let (dq, rest) = y[base..base + 12].split_at(6);
            let dv = rest;
            let out = &mut dy[base..base + 12];
            out[..6].copy_from_slice(dv);
            out[6..].fill(0.0);
            for (p, (i, j)) in [(0usize, 1usize), (0, 2), (1, 2)].iter().enumerate() {
                let [dx, dyy, r2, inv_r5] = pair[p];
                let ddx = dq[2 * j] - dq[2 * i];
                let ddy = dq[2 * j + 1] - dq[2 * i + 1];
                let dot = dx * ddx + dyy * ddy;
                // d(acc) = dd/r^3 - 3 d (d·dd)/r^5
                let ax = (ddx * r2 - 3.0 * dx * dot) * inv_r5;
                let ay = (ddy * r2 - 3.0 * dyy * dot) * inv_r5;
                out[6 + 2 * i] += ax;
                out[6 + 2 * i + 1] += ay;
                out[6 + 2 * j] -= ax;
                out[6 + 2 * j + 1] -= ay;
            }
        }
    };

    let (samples, _) = integrate_samples(&rhs, &y0, 0.0, &[period], tol)?;
    let yf = &samples[0];
    let mut matrix = DMatrix::zeros(12, 12);
    for c in 0..12 {
        for r in 0..12 {
            matrix[(r, c)] = yf[12 + 12 * c + r];
        }
    }
    let eigenvalues = matrix.complex_eigenvalues().iter().copied().collect();
    Ok(MonodromyResult {
        matrix,
        eigenvalues,
    })
}
