//! Small numeric helpers shared across modules.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
///
/// Runs on the rayon pool when the `parallel` feature is enabled and falls
/// back to a sequential loop otherwise; the output is identical either way.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Cascade (pairwise) summation with a fixed association order.
///
/// Rounding grows like eps·log n instead of eps·n, and the result does not
/// depend on thread count because the splits are positional.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Reduce an angle to the half-open interval [0, pi).
pub fn angle_mod_pi(angle: f64) -> f64 {
    let mut a = angle % std::f64::consts::PI;
    if a < 0.0 {
        a += std::f64::consts::PI;
    }
    a
}

/// Distance of `angle` from 0 modulo pi, in [0, pi/2].
pub fn angle_dist_mod_pi(angle: f64) -> f64 {
    let a = angle_mod_pi(angle);
    a.min(std::f64::consts::PI - a)
}
