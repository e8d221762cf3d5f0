//! Independent numerical oracles: closed forms are checked against direct
//! quadrature of explicit parametrizations, lengths against brute-force
//! chord sums, derivatives against finite differences.

use eight_core::action_bounds::{collision_bound_a2, optimal_test_action, DEFAULT_PERIOD};
use eight_core::equipotential::{euler_length, reduced_test_path, solve_grid};
use eight_core::minimizer::{discrete_action, three_mass_action};
use eight_core::path::DiscretePath;
use eight_core::planar::Vec2;
use eight_core::shape_geometry::{
    jacobi_map, reduced_kinetic, shape_of, shape_to_sides, Configuration, SphericalShape,
};

use std::f64::consts::PI;

/// Action of the half collision-ejection two-body orbit over [0, T]: two
/// unit masses from collision to rest, center of mass fixed. Composite
/// midpoint quadrature in the eccentric anomaly of the explicit rectilinear
/// Kepler parametrization; independent of the closed-form bound.
fn kepler_ejection_action(t_total: f64, m: usize) -> f64 {
    let a = (2.0 * t_total * t_total / (PI * PI)).cbrt();
    let scale = (a * a * a / 2.0).sqrt(); // dt/dE
    let mut sum = 0.0;
    for k in 0..m {
        let e = PI * (k as f64 + 0.5) / m as f64;
        let (se, ce) = e.sin_cos();
        let r = a * (1.0 - ce);
        let rdot = (2.0 / a).sqrt() * se / (1.0 - ce);
        let lagrangian = 0.25 * rdot * rdot + 1.0 / r;
        sum += lagrangian * scale * (1.0 - ce);
    }
    sum * PI / m as f64
}

#[test]
fn collision_bound_matches_kepler_quadrature() {
    for t in [DEFAULT_PERIOD, 1.0, 2.3] {
        let oracle = kepler_ejection_action(t, 40_000);
        let formula = collision_bound_a2(t);
        assert!(
            (oracle - formula).abs() < 1e-8,
            "T = {t}: oracle {oracle:.12} vs formula {formula:.12}"
        );
    }
}

/// Eccentric anomaly at mean anomaly `m_anom` on the ejection orbit.
fn solve_kepler_e(m_anom: f64) -> f64 {
    let mut lo = 0.0f64;
    let mut hi = PI;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid - mid.sin() < m_anom {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bodies 2 and 3 on the time-reversed ejection arc (rest at t = 0,
/// near-collision at the last node), body 1 fixed at distance `3 d` from
/// the pair, all with zero total center of mass.
fn pair_with_spectator(t_total: f64, n: usize, d: f64) -> DiscretePath {
    let a = (2.0 * t_total * t_total / (PI * PI)).cbrt();
    let scale = (a * a * a / 2.0).sqrt();
    let span = t_total * (1.0 - 1.0 / n as f64);
    let nodes = (0..=n)
        .map(|k| {
            let tau = t_total - span * k as f64 / n as f64;
            let e = solve_kepler_e(tau / scale);
            let r = a * (1.0 - e.cos());
            let p = Vec2::new(d, 0.0);
            Configuration::new([
                Vec2::new(-2.0 * d, 0.0),
                p + Vec2::new(0.5 * r, 0.0),
                p - Vec2::new(0.5 * r, 0.0),
            ])
            .unwrap()
        })
        .collect();
    DiscretePath::new(span, nodes).unwrap()
}

#[test]
fn action_approaches_the_collision_bound_as_the_spectator_recedes() {
    let t_total = DEFAULT_PERIOD;
    let n = 4096;

    // Oracle for the same truncated window, in eccentric anomaly.
    let span = t_total * (1.0 - 1.0 / n as f64);
    let a = (2.0 * t_total * t_total / (PI * PI)).cbrt();
    let scale = (a * a * a / 2.0).sqrt();
    let e_cut = solve_kepler_e((t_total - span) / scale);
    let m = 40_000;
    let mut window_oracle = 0.0;
    for k in 0..m {
        let e = e_cut + (PI - e_cut) * (k as f64 + 0.5) / m as f64;
        let (se, ce) = e.sin_cos();
        let r = a * (1.0 - ce);
        let rdot = (2.0 / a).sqrt() * se / (1.0 - ce);
        window_oracle += (0.25 * rdot * rdot + 1.0 / r) * scale * (1.0 - ce);
    }
    window_oracle *= (PI - e_cut) / m as f64;

    // The uniform-in-time trapezoid loses accuracy against the
    // near-collision singularity; the structural agreement is what counts.
    let pair = three_mass_action([0.0, 1.0, 1.0], &pair_with_spectator(t_total, n, 10.0)).unwrap();
    assert!(
        (pair - window_oracle).abs() < 5e-3,
        "pair action {pair:.8} vs oracle {window_oracle:.8}"
    );
    // The pair action does not depend on the spectator's distance (up to
    // the absolute-position rounding that large offsets cost).
    let pair_far =
        three_mass_action([0.0, 1.0, 1.0], &pair_with_spectator(t_total, n, 1000.0)).unwrap();
    assert!((pair - pair_far).abs() < 1e-6);

    // Full-mass actions decrease toward the pair value as 2T'/(3d).
    let full: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&d| three_mass_action([1.0, 1.0, 1.0], &pair_with_spectator(t_total, n, d)).unwrap())
        .collect();
    assert!(full[0] > full[1] && full[1] > full[2] && full[2] > pair);
    for (d, f) in [10.0, 100.0, 1000.0].iter().zip(&full) {
        let coeff = (f - pair) * d;
        assert!(
            (coeff - 2.0 * span / 3.0).abs() < 0.005 * span,
            "d = {d}: scaled excess {coeff:.6} vs {:.6}",
            2.0 * span / 3.0
        );
    }
}

#[test]
fn full_equipotential_length_by_chord_tracing() {
    // Trace all twelve congruent arcs over theta in [0, 4 pi) on the unit
    // shape sphere with alternating latitude signs, sum geodesic segment
    // lengths in the radius-1/2 metric, and Richardson-extrapolate.
    let ell0 = euler_length(64, 14).unwrap().ell0;
    let trace = |k: usize| -> f64 {
        // Six lobes of width 2 pi/3 with alternating latitude sign; within
        // a lobe the latitude rises over the first half and mirrors back.
        let grid = solve_grid(k).unwrap();
        let mut pts: Vec<[f64; 3]> = Vec::with_capacity(12 * k);
        for lobe in 0..6usize {
            let sign = if lobe % 2 == 0 { 1.0 } else { -1.0 };
            let base = lobe as f64 * 2.0 * PI / 3.0;
            for j in 0..2 * k {
                let theta = base + j as f64 * PI / (3.0 * k as f64);
                let phi = sign * grid[if j <= k { j } else { 2 * k - j }].phi;
                let (sp, cp) = phi.sin_cos();
                pts.push([cp * theta.cos(), cp * theta.sin(), sp]);
            }
        }
        let mut len = 0.0;
        for i in 0..pts.len() {
            let a = pts[i];
            let b = pts[(i + 1) % pts.len()];
            let chord =
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            // Geodesic distance on the radius-1/2 sphere.
            len += (0.5 * chord).asin();
        }
        len
    };
    let l1 = trace(4096);
    let l2 = trace(8192);
    let extrapolated = (4.0 * l2 - l1) / 3.0;
    assert!(
        (extrapolated / 12.0 - ell0).abs() < 1e-10,
        "curve length / 12 = {:.14} vs ell0 = {:.14}",
        extrapolated / 12.0,
        ell0
    );
}

#[test]
fn test_path_action_matches_the_closed_form_minimum() {
    let ell0 = euler_length(64, 14).unwrap().ell0;
    let (i0, a) = optimal_test_action(ell0, DEFAULT_PERIOD);
    let path = reduced_test_path(i0, DEFAULT_PERIOD, 4096).unwrap();
    let action = discrete_action(&path).unwrap();
    assert!(
        (action - a).abs() < 1e-4,
        "test path action {action:.10} vs closed form {a:.10}"
    );
    // Endpoints: collinear start, isosceles end.
    assert!(path.e3_residual() < 1e-12);
    assert!(path.m1_residual() < 1e-12);
}

#[test]
fn discrete_action_second_order_on_a_smooth_path() {
    // Sample a fixed smooth (non-physical) path at several resolutions and
    // fit the convergence order of the quadrature.
    let eval = |n: usize| -> f64 {
        let nodes = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                Configuration::recentered(
                    Vec2::new((1.1 * t).cos(), (0.6 * t).sin()),
                    Vec2::new(-1.0 + 0.2 * t, 0.8 * (1.0 - t * t)),
                    Vec2::new(0.3 * t * t, -0.7 + 0.4 * t),
                )
            })
            .collect();
        discrete_action(&DiscretePath::new(1.0, nodes).unwrap()).unwrap()
    };
    let (a1, a2, a3) = (eval(200), eval(400), eval(800));
    let order = ((a1 - a2) / (a2 - a3)).log2();
    assert!(order > 1.9, "observed order {order}");
}

#[test]
fn reduced_metric_matches_spherical_form() {
    // K_red equals rdot^2 + (r^2/4)(cos^2(phi) thetadot^2 + phidot^2) under
    // the shape-coordinate pushforward, probed by central differences.
    let mut seed = 77u64;
    let mut next = || {
        seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut tested = 0;
    while tested < 20 {
        let c = Configuration::recentered(
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
        );
        let c = c.scaled(1.0 / c.size()); // I = 1
        let v = Configuration::recentered(
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
        );
        let sph = SphericalShape::from_shape_vector(&shape_of(&c)).unwrap();
        if sph.phi.abs() > 1.2 {
            continue; // longitude rate is ill-conditioned near the poles
        }
        tested += 1;

        let eps = 1e-5;
        let plus = SphericalShape::from_shape_vector(&shape_of(&(c + v * eps))).unwrap();
        let minus = SphericalShape::from_shape_vector(&shape_of(&(c + v * (-eps)))).unwrap();
        let rdot = (plus.r - minus.r) / (2.0 * eps);
        let mut dtheta = plus.theta - minus.theta;
        while dtheta > PI {
            dtheta -= 2.0 * PI;
        }
        while dtheta < -PI {
            dtheta += 2.0 * PI;
        }
        let thetadot = dtheta / (2.0 * eps);
        let phidot = (plus.phi - minus.phi) / (2.0 * eps);

        let form = rdot * rdot
            + sph.r * sph.r / 4.0
                * (sph.phi.cos().powi(2) * thetadot * thetadot + phidot * phidot);
        let direct = reduced_kinetic(&c, &v).unwrap();
        assert!(
            (form - direct).abs() < 1e-8,
            "pushforward {form:.12} vs direct {direct:.12}"
        );
    }
}

#[test]
fn side_lengths_match_direct_separations() {
    let mut seed = 5u64;
    let mut next = || {
        seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for _ in 0..50 {
        let c = Configuration::recentered(
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
        );
        if c.min_separation() < 0.05 {
            continue;
        }
        let c = c.scaled(1.0 / c.size());
        let u = shape_of(&c).normalized().unwrap();
        let (r23, r31, r12) = shape_to_sides(&u).unwrap();
        assert!((r23 - c.separation(1, 2)).abs() < 1e-10);
        assert!((r31 - c.separation(2, 0)).abs() < 1e-10);
        assert!((r12 - c.separation(0, 1)).abs() < 1e-10);
    }
}

#[test]
fn latitude_tracks_signed_triangle_area() {
    // u3 is proportional to the signed area: check sign agreement and the
    // collinear zero set.
    let mut seed = 13u64;
    let mut next = || {
        seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    for _ in 0..50 {
        let c = Configuration::recentered(
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
            Vec2::new(next(), next()),
        );
        let signed_area = 0.5 * (c.body(1) - c.body(0)).wedge(c.body(2) - c.body(0));
        let u3 = shape_of(&c).u3;
        assert!(u3 * signed_area >= 0.0);
        if signed_area.abs() > 1e-6 {
            assert!(u3.abs() > 0.0);
        }
    }
    // Collinear configurations sit exactly on the equator.
    let col = Configuration::new([
        Vec2::new(1.0, 0.5),
        Vec2::new(-0.4, -0.2),
        Vec2::new(-0.6, -0.3),
    ])
    .unwrap();
    assert!(shape_of(&col).u3.abs() < 1e-15);
    assert!(col.is_collinear(1e-10));

    // The proportionality constant at unit size: u3 = 2 * sqrt(3) * area
    // in Jacobi terms reduces to u3 = 2 z1 ^ z2; verify against one case.
    let c = Configuration::recentered(
        Vec2::new(0.7, 0.1),
        Vec2::new(-0.3, 0.6),
        Vec2::new(-0.2, -0.4),
    );
    let j = jacobi_map(&c);
    assert!((shape_of(&c).u3 - 2.0 * j.z1.wedge(j.z2)).abs() < 1e-14);
}
