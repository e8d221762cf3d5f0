//! A-posteriori structure of the converged arc and the assembled orbit:
//! confinement to one quarter of the shape sphere, energy constancy, the
//! latitude sign pattern of the twelve segments, the half-period return,
//! and the zero time-average.

use std::sync::OnceLock;

use eight_core::action_bounds::{optimal_test_action, DEFAULT_PERIOD};
use eight_core::equipotential::{euler_length, reduced_test_path};
use eight_core::integrator::accelerations;
use eight_core::minimizer::{action_gradient, midpoint_energies, minimize, MinimizeReport};
use eight_core::orbit_builder::{build_orbit, euler_line_angle, Orbit};
use eight_core::path::DiscretePath;
use eight_core::planar::Vec2;
use eight_core::shape_geometry::{mass_dot, shape_of, Configuration};
use eight_core::util::angle_dist_mod_pi;

fn fixture() -> &'static (MinimizeReport, Orbit) {
    static FIX: OnceLock<(MinimizeReport, Orbit)> = OnceLock::new();
    FIX.get_or_init(|| {
        let ell0 = euler_length(64, 14).unwrap().ell0;
        let (i0, _) = optimal_test_action(ell0, DEFAULT_PERIOD);
        let seed = reduced_test_path(i0, DEFAULT_PERIOD, 256).unwrap();
        let report = minimize(&seed, 1e-9, 50_000).unwrap();
        let orbit = build_orbit(&report.path).unwrap();
        (report, orbit)
    })
}

#[test]
fn arc_interior_stays_inside_one_quarter() {
    let (report, _) = fixture();
    let path = &report.path;
    let n = path.n_segments();
    // Latitude strictly positive except at the collinear start.
    for k in 1..=n {
        let u = shape_of(path.node(k));
        assert!(u.u3 > 0.0, "node {k}: u3 = {:e}", u.u3);
    }
    // The isosceles meridian is reached only at the far end.
    for k in 0..n {
        let c = path.node(k);
        let gap = (c.separation(0, 1) - c.separation(0, 2)).abs();
        assert!(gap > 1e-6 * c.size(), "node {k} recrosses the meridian");
    }
}

#[test]
fn arc_energy_is_constant_to_quadrature_order() {
    let (report, _) = fixture();
    let energies = midpoint_energies(&report.path).unwrap();
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let worst = energies
        .iter()
        .map(|e| (e - mean).abs())
        .fold(0.0f64, f64::max);
    let h = report.path.step();
    assert!(
        worst / mean.abs() < 5.0 * h * h,
        "relative energy variation {:e} vs 5 h^2 = {:e}",
        worst / mean.abs(),
        5.0 * h * h
    );
}

#[test]
fn constant_equilateral_path_gradient_is_the_force_imbalance() {
    // On a frozen equilateral path the kinetic terms drop out; the
    // interior gradient is the weighted potential gradient, whose pure
    // dilation component does not vanish.
    let rho = 1.0 / 3.0f64.sqrt();
    let bodies: Vec<Vec2> = (0..3)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            Vec2::new(rho * ang.cos(), rho * ang.sin())
        })
        .collect();
    let c = Configuration::recentered(bodies[0], bodies[1], bodies[2]);
    let path = DiscretePath::new(1.0, vec![c; 9]).unwrap();
    let grads = action_gradient(&path).unwrap();
    let h = path.step();
    let force = accelerations(&c).unwrap();
    for k in 1..8 {
        let expected = force * h;
        let diff = (0..3)
            .map(|i| (grads[k].body(i) - expected.body(i)).norm())
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-14);
    }
    // Dilation component h * <grad U, x> = -h U < 0 for the gravitational
    // potential (homogeneity of degree -1).
    let dilation = mass_dot(&grads[4], &c);
    assert!(dilation < -1e-3);
    let u = c.potential().unwrap();
    assert!((dilation + h * u).abs() < 1e-12);
}

#[test]
fn orbit_latitude_signs_alternate_in_pairs() {
    let (_, orbit) = fixture();
    let m = orbit.samples();
    let seg = m / 12;
    let mut signs = Vec::new();
    for s in 0..12 {
        let mid = shape_of(orbit.x_at((s * seg + seg / 2) as isize));
        signs.push(mid.u3 > 0.0);
    }
    let expected = [
        true, true, false, false, true, true, false, false, true, true, false, false,
    ];
    assert_eq!(signs, expected, "latitude sign pattern per segment");
}

#[test]
fn orbit_half_period_return_and_zero_average() {
    let (_, orbit) = fixture();
    let m = orbit.samples() as isize;
    let half = m / 2;
    // x(t + Tbar/2) is the y-axis reflection of x(t), body by body.
    let mut worst = 0.0f64;
    for i in 0..m {
        let a = orbit.x_at(i + half);
        let b = orbit.x_at(i);
        for body in 0..3 {
            let expect = Vec2::new(-b.body(body).x, b.body(body).y);
            worst = worst.max((a.body(body) - expect).norm());
        }
    }
    assert!(worst < 1e-10, "half-period return residual {worst:e}");

    // Zero time-average of every body over the period.
    for body in 0..3 {
        let mut sum = Vec2::ZERO;
        for c in &orbit.x {
            sum += c.body(body);
        }
        assert!((sum * (1.0 / m as f64)).norm() < 1e-12);
    }

    // The curve passes through the origin at t = 0.
    assert!(orbit.q[0].norm() < 1e-14);

    // Full-period collinear-line rotation vanishes mod pi.
    let angle = euler_line_angle(&orbit, 0.0, orbit.tbar).unwrap();
    assert!(angle_dist_mod_pi(angle) < 1e-12);
}
