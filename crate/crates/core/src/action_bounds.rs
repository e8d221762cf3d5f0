//! Closed-form action values: the infimum of the action over collision
//! paths, its triple-collision counterpart, and the action of the
//! constant-size equipotential test paths, whose minimum over the size
//! parameter gates the collision-free minimization.

use crate::shape_geometry::EULER_SCALED_POTENTIAL;
use std::f64::consts::{PI, SQRT_2};

/// Default time span of the quarter problem: one twelfth of 2*pi.
pub const DEFAULT_PERIOD: f64 = PI / 6.0;

/// Scaled potential of the two-body problem with unit masses.
pub const PAIR_SCALED_POTENTIAL: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Infimum of the action over paths with a (double or triple) collision in
/// time `t`: the action of half a collision-ejection two-body orbit.
pub fn collision_bound_a2(t: f64) -> f64 {
    assert!(t > 0.0, "collision_bound_a2 needs t > 0");
    0.5 * 3.0
        * (2.0 * PI * PI).cbrt()
        * (0.5 * PAIR_SCALED_POTENTIAL).powf(2.0 / 3.0)
        * (2.0 * t).cbrt()
}

/// Action of the equilateral homothetic collision solution: the same
/// formula as [`collision_bound_a2`] with the equilateral scaled potential.
pub fn triple_collision_bound_a3(t: f64) -> f64 {
    (3.0 * SQRT_2).powf(2.0 / 3.0) * collision_bound_a2(t)
}

/// Action of the constant-size test path at moment of inertia `i0`:
/// `A(I0) = (1/2)(l0 sqrt(I0)/T)² T + (5/sqrt(2)) T / sqrt(I0)`.
pub fn test_action(i0: f64, ell0: f64, t: f64) -> f64 {
    assert!(i0 > 0.0 && t > 0.0, "test_action needs i0 > 0 and t > 0");
    let speed = ell0 * i0.sqrt() / t;
    0.5 * speed * speed * t + EULER_SCALED_POTENTIAL / i0.sqrt() * t
}

/// Minimizer of [`test_action`] over the size: returns `(I0*, a)` with
/// `I0* = (5/(sqrt(2) l0²))^(2/3) T^(4/3)` and
/// `a = (3/2)(5/sqrt(2))^(2/3) l0^(2/3) T^(1/3)`.
pub fn optimal_test_action(ell0: f64, t: f64) -> (f64, f64) {
    assert!(ell0 > 0.0 && t > 0.0, "optimal_test_action needs positive arguments");
    let i0 = (EULER_SCALED_POTENTIAL / (ell0 * ell0)).powf(2.0 / 3.0) * t.powf(4.0 / 3.0);
    let a = 1.5 * EULER_SCALED_POTENTIAL.powf(2.0 / 3.0) * ell0.powf(2.0 / 3.0) * t.cbrt();
    (i0, a)
}

/// The gate report: collision bounds, optimal test action and whether the
/// test path beats every collision path.
#[derive(Clone, Copy, Debug)]
pub struct BoundsReport {
    pub t: f64,
    pub ell0: f64,
    pub a2: f64,
    pub a3: f64,
    pub i0_star: f64,
    pub a: f64,
    pub gate_passed: bool,
}

pub fn bounds_report(ell0: f64, t: f64) -> BoundsReport {
    let a2 = collision_bound_a2(t);
    let a3 = triple_collision_bound_a3(t);
    let (i0_star, a) = optimal_test_action(ell0, t);
    BoundsReport {
        t,
        ell0,
        a2,
        a3,
        i0_star,
        a,
        gate_passed: a < a2,
    }
}
