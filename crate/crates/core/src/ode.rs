//! Generic adaptive Runge-Kutta driver: the classic 13-stage embedded
//! 7(8) Fehlberg pair with local extrapolation (the eighth-order solution
//! propagates). Sample times are hit exactly by clamping the step, which
//! keeps interpolation out of the accuracy budget.

use crate::error::Error;
use crate::Result;

/// Step counters of one integration run.
#[derive(Clone, Copy, Debug, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
}

const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 0.25, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.0,
        0.0,
        0.0,
        -53.0 / 6.0,
        704.0 / 45.0,
        -107.0 / 9.0,
        67.0 / 90.0,
        3.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

/// Eighth-order weights (stage 0 and 10 drop out, 11 and 12 enter).
const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// Difference between the eighth- and seventh-order solutions.
const ERR_W: f64 = 41.0 / 840.0;

struct Stepper<'a, F> {
    rhs: &'a F,
    k: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

impl<'a, F: Fn(f64, &[f64], &mut [f64])> Stepper<'a, F> {
    fn new(rhs: &'a F, dim: usize) -> Self {
        Stepper {
            rhs,
            k: vec![vec![0.0; dim]; STAGES],
            scratch: vec![0.0; dim],
        }
    }

    /// One trial step; fills `out` and returns the scaled error norm.
    fn step(&mut self, t: f64, y: &[f64], h: f64, tol: f64, out: &mut [f64]) -> f64 {
        let dim = y.len();
        for s in 0..STAGES {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in self.k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                self.scratch[i] = y[i] + h * acc;
            }
            let (head, tail) = self.k.split_at_mut(s);
            let _ = head;
            (self.rhs)(t + C[s] * h, &self.scratch, &mut tail[0]);
        }
        let mut err_norm = 0.0f64;
        for i in 0..dim {
            let mut acc = 0.0;
            for s in 0..STAGES {
                let b = B8[s];
                if b != 0.0 {
                    acc += b * self.k[s][i];
                }
            }
            out[i] = y[i] + h * acc;
            let e =
                h * ERR_W * (self.k[11][i] + self.k[12][i] - self.k[0][i] - self.k[10][i]);
            let scale = tol + tol * y[i].abs().max(out[i].abs());
            err_norm = err_norm.max((e / scale).abs());
        }
        err_norm
    }
}

/// Integrates `y' = rhs(t, y)` from `t0`, recording the state at each of
/// the strictly increasing `sample_times` (hit exactly). The first sample
/// time may equal `t0`.
pub fn integrate_samples<F>(
    rhs: &F,
    y0: &[f64],
    t0: f64,
    sample_times: &[f64],
    tol: f64,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let span = sample_times.last().copied().unwrap_or(t0) - t0;
    if span < 0.0 {
        return Err(Error::InvalidInput("sample times must not precede t0".into()));
    }
    let dim = y0.len();
    let mut stepper = Stepper::new(rhs, dim);
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut h = (span / 100.0).max(1e-6);
    let mut out = vec![0.0; dim];
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut stats = OdeStats::default();

    for &ts in sample_times {
        if ts < t - 1e-12 {
            return Err(Error::InvalidInput("sample times must be increasing".into()));
        }
        while t < ts {
            let remaining = ts - t;
            let lands = remaining <= h;
            let trial = if lands { remaining } else { h };
            let err = stepper.step(t, &y, trial, tol, &mut out);
            if err.is_finite() && err <= 1.0 {
                t = if lands { ts } else { t + trial };
                std::mem::swap(&mut y, &mut out);
                stats.steps += 1;
                if !lands {
                    let grow = if err > 0.0 {
                        0.9 * err.powf(-1.0 / 8.0)
                    } else {
                        5.0
                    };
                    h = trial * grow.clamp(0.2, 5.0);
                }
            } else {
                stats.rejected += 1;
                let shrink = if err.is_finite() {
                    (0.9 * err.powf(-1.0 / 8.0)).clamp(0.1, 0.7)
                } else {
                    0.1
                };
                h = trial * shrink;
                if h < 1e-14 * span.max(t.abs()).max(1e-12) {
                    return Err(Error::StepUnderflow(t));
                }
            }
            if stats.steps + stats.rejected > 50_000_000 {
                return Err(Error::NonConvergence {
                    what: "adaptive integration",
                    iterations: stats.steps,
                    last: t,
                });
            }
        }
        samples.push(y.clone());
    }
    Ok((samples, stats))
}

/// Fixed-step integration (no error control); used to measure the
/// convergence order of the pair against closed-form solutions.
pub fn integrate_fixed_step<F>(rhs: &F, y0: &[f64], t0: f64, t_end: f64, n_steps: usize) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let mut stepper = Stepper::new(rhs, dim);
    let mut y = y0.to_vec();
    let mut out = vec![0.0; dim];
    let h = (t_end - t0) / n_steps as f64;
    for s in 0..n_steps {
        let t = t0 + s as f64 * h;
        stepper.step(t, &y, h, 1.0, &mut out);
        std::mem::swap(&mut y, &mut out);
    }
    y
}
