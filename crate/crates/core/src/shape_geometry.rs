//! Configuration space of the planar equal-mass three-body problem, Jacobi
//! coordinates, the Hopf map onto shape space, and the reduced metric.
//!
//! Positions live in the zero-center-of-mass subspace. The Hermitian mass
//! product splits into the mass scalar product [`mass_dot`] and the mass
//! symplectic form [`mass_omega`]; together they carry everything needed for
//! the moment of inertia, the kinetic invariants and the angular momentum.

use crate::error::Error;
use crate::planar::Vec2;
use crate::Result;

/// Absolute tolerance on the center-of-mass constraint.
pub const ZERO_SUM_TOL: f64 = 1e-12;

/// |u3| threshold (at unit size) below which a shape counts as collinear.
pub const COLLINEAR_TOL: f64 = 1e-10;

/// Scaled potential sqrt(I)·U at the collinear (Euler) central configurations.
pub const EULER_SCALED_POTENTIAL: f64 = 5.0 / std::f64::consts::SQRT_2;

/// Scaled potential sqrt(I)·U at the equilateral (Lagrange) configurations.
pub const LAGRANGE_SCALED_POTENTIAL: f64 = 3.0;

/// Three planar position vectors summing to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Configuration {
    bodies: [Vec2; 3],
}

impl Configuration {
    /// Builds a configuration, enforcing the zero-sum constraint.
    pub fn new(bodies: [Vec2; 3]) -> Result<Self> {
        let sum = bodies[0] + bodies[1] + bodies[2];
        let residual = sum.x.abs().max(sum.y.abs());
        if residual > ZERO_SUM_TOL {
            return Err(Error::ZeroSum(residual));
        }
        Ok(Configuration { bodies })
    }

    /// Builds a configuration from three positions, translating the center
    /// of mass to the origin.
    pub fn recentered(x1: Vec2, x2: Vec2, x3: Vec2) -> Self {
        let cm = (x1 + x2 + x3) * (1.0 / 3.0);
        Configuration {
            bodies: [x1 - cm, x2 - cm, x3 - cm],
        }
    }

    pub fn zero() -> Self {
        Configuration {
            bodies: [Vec2::ZERO; 3],
        }
    }

    pub fn body(&self, i: usize) -> Vec2 {
        self.bodies[i]
    }

    pub fn bodies(&self) -> &[Vec2; 3] {
        &self.bodies
    }

    /// Moment of inertia I with respect to the center of mass.
    pub fn moment_of_inertia(&self) -> f64 {
        self.bodies.iter().map(|b| b.norm_sq()).sum()
    }

    /// Size sqrt(I) of the configuration.
    pub fn size(&self) -> f64 {
        self.moment_of_inertia().sqrt()
    }

    /// Distance between bodies `i` and `j`.
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        (self.bodies[i] - self.bodies[j]).norm()
    }

    pub fn min_separation(&self) -> f64 {
        self.separation(0, 1)
            .min(self.separation(0, 2))
            .min(self.separation(1, 2))
    }

    /// Force function U = 1/r12 + 1/r13 + 1/r23.
    pub fn potential(&self) -> Result<f64> {
        let mut u = 0.0;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let r = self.separation(i, j);
            if r == 0.0 {
                return Err(Error::Collision(i + 1, j + 1));
            }
            u += 1.0 / r;
        }
        Ok(u)
    }

    /// Whether the three bodies are collinear, using the |u3| < eps·I test.
    pub fn is_collinear(&self, eps: f64) -> bool {
        let i = self.moment_of_inertia();
        if i == 0.0 {
            return true;
        }
        shape_of(self).u3.abs() < eps * i
    }

    /// Applies `f` to every body. The caller must preserve the zero sum.
    pub(crate) fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Configuration {
        Configuration {
            bodies: [f(self.bodies[0]), f(self.bodies[1]), f(self.bodies[2])],
        }
    }

    pub fn rotated(&self, angle: f64) -> Configuration {
        self.map(|b| b.rotated(angle))
    }

    pub fn scaled(&self, factor: f64) -> Configuration {
        self.map(|b| b * factor)
    }

    pub(crate) fn permuted(&self, perm: [usize; 3]) -> Configuration {
        Configuration {
            bodies: [
                self.bodies[perm[0]],
                self.bodies[perm[1]],
                self.bodies[perm[2]],
            ],
        }
    }
}

impl std::ops::Add for Configuration {
    type Output = Configuration;
    fn add(self, rhs: Configuration) -> Configuration {
        Configuration {
            bodies: [
                self.bodies[0] + rhs.bodies[0],
                self.bodies[1] + rhs.bodies[1],
                self.bodies[2] + rhs.bodies[2],
            ],
        }
    }
}

impl std::ops::Sub for Configuration {
    type Output = Configuration;
    fn sub(self, rhs: Configuration) -> Configuration {
        Configuration {
            bodies: [
                self.bodies[0] - rhs.bodies[0],
                self.bodies[1] - rhs.bodies[1],
                self.bodies[2] - rhs.bodies[2],
            ],
        }
    }
}

impl std::ops::Mul<f64> for Configuration {
    type Output = Configuration;
    fn mul(self, rhs: f64) -> Configuration {
        self.scaled(rhs)
    }
}

/// Mass scalar product of two configurations (real part of the Hermitian one).
pub fn mass_dot(a: &Configuration, b: &Configuration) -> f64 {
    (0..3).map(|i| a.body(i).dot(b.body(i))).sum()
}

/// Mass symplectic form of two configurations (imaginary part of the
/// Hermitian one); `mass_omega(x, v)` is the total angular momentum.
pub fn mass_omega(a: &Configuration, b: &Configuration) -> f64 {
    (0..3).map(|i| a.body(i).wedge(b.body(i))).sum()
}

/// Largest per-body distance between two configurations.
pub fn max_body_distance(a: &Configuration, b: &Configuration) -> f64 {
    (0..3)
        .map(|i| (a.body(i) - b.body(i)).norm())
        .fold(0.0, f64::max)
}

/// A phase-space point: a configuration and its velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State {
    pub q: Configuration,
    pub v: Configuration,
}

impl State {
    pub fn new(q: Configuration, v: Configuration) -> State {
        State { q, v }
    }

    /// K = |v|², twice the kinetic energy.
    pub fn kinetic(&self) -> f64 {
        self.v.moment_of_inertia()
    }

    /// J = x·v, half the time derivative of the moment of inertia.
    pub fn dilation_rate(&self) -> f64 {
        mass_dot(&self.q, &self.v)
    }

    /// Total angular momentum omega(x, v).
    pub fn angular_momentum(&self) -> f64 {
        mass_omega(&self.q, &self.v)
    }

    /// Total energy H = K/2 - U.
    pub fn energy(&self) -> Result<f64> {
        Ok(0.5 * self.kinetic() - self.q.potential()?)
    }

    /// Lagrangian L = K/2 + U.
    pub fn lagrangian(&self) -> Result<f64> {
        Ok(0.5 * self.kinetic() + self.q.potential()?)
    }
}

/// Jacobi coordinates: the image of a configuration under the linear
/// isometry onto a pair of planar vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiCoords {
    pub z1: Vec2,
    pub z2: Vec2,
}

impl JacobiCoords {
    /// |z1|² + |z2|², equal to the moment of inertia of any preimage.
    pub fn norm_sq(&self) -> f64 {
        self.z1.norm_sq() + self.z2.norm_sq()
    }
}

/// z1 = (x3 - x2)/sqrt(2), z2 = sqrt(2/3)·(x1 - (x2 + x3)/2).
pub fn jacobi_map(c: &Configuration) -> JacobiCoords {
    let [x1, x2, x3] = *c.bodies();
    JacobiCoords {
        z1: (x3 - x2) * std::f64::consts::FRAC_1_SQRT_2,
        z2: (x1 - (x2 + x3) * 0.5) * (2.0f64 / 3.0).sqrt(),
    }
}

/// Inverse of [`jacobi_map`]; the result satisfies the zero-sum constraint
/// exactly by construction.
pub fn jacobi_inverse(j: &JacobiCoords) -> Configuration {
    let x1 = j.z2 * (2.0f64 / 3.0).sqrt();
    // x2 + x3 = -x1 and x3 - x2 = sqrt(2)·z1.
    let d = j.z1 * std::f64::consts::SQRT_2;
    let x2 = (-x1 - d) * 0.5;
    let x3 = (-x1 + d) * 0.5;
    Configuration {
        bodies: [x1, x2, x3],
    }
}

/// A point of shape space (the quotient of configurations by rotations).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeVector {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl ShapeVector {
    pub const fn new(u1: f64, u2: f64, u3: f64) -> Self {
        ShapeVector { u1, u2, u3 }
    }

    /// Euclidean norm; equals the moment of inertia of any preimage.
    pub fn norm(&self) -> f64 {
        (self.u1 * self.u1 + self.u2 * self.u2 + self.u3 * self.u3).sqrt()
    }

    pub fn normalized(&self) -> Result<ShapeVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::TripleCollision);
        }
        Ok(ShapeVector::new(self.u1 / n, self.u2 / n, self.u3 / n))
    }

    pub fn dot(&self, other: &ShapeVector) -> f64 {
        self.u1 * other.u1 + self.u2 * other.u2 + self.u3 * other.u3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.u1, self.u2, self.u3]
    }
}

/// Hopf map (u1, u2 + i·u3) = (|z1|² - |z2|², 2·conj(z1)·z2).
pub fn hopf_map(j: &JacobiCoords) -> ShapeVector {
    ShapeVector {
        u1: j.z1.norm_sq() - j.z2.norm_sq(),
        u2: 2.0 * j.z1.dot(j.z2),
        u3: 2.0 * j.z1.wedge(j.z2),
    }
}

/// Shape of a configuration: the Hopf map composed with Jacobi coordinates.
pub fn shape_of(c: &Configuration) -> ShapeVector {
    hopf_map(&jacobi_map(c))
}

/// A local section of the Hopf map: a Jacobi pair whose shape is `u`.
///
/// Valid away from u = (-|u|, 0, 0), where the chosen gauge (real z1)
/// degenerates.
pub fn hopf_section(u: &ShapeVector) -> Result<JacobiCoords> {
    let n = u.norm();
    if n == 0.0 {
        return Ok(JacobiCoords {
            z1: Vec2::ZERO,
            z2: Vec2::ZERO,
        });
    }
    let z1_sq = 0.5 * (n + u.u1);
    if z1_sq <= 0.0 {
        return Err(Error::Singular(
            "Hopf section degenerates at the first collision point".into(),
        ));
    }
    let z1 = Vec2::new(z1_sq.sqrt(), 0.0);
    let z2 = Vec2::new(u.u2, u.u3) * (0.5 / z1.x);
    Ok(JacobiCoords { z1, z2 })
}

/// Spherical coordinates (r, theta, phi) on shape space with r = sqrt(I).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalShape {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalShape {
    pub fn to_shape_vector(&self) -> ShapeVector {
        let r2 = self.r * self.r;
        ShapeVector {
            u1: r2 * self.phi.cos() * self.theta.cos(),
            u2: r2 * self.phi.cos() * self.theta.sin(),
            u3: r2 * self.phi.sin(),
        }
    }

    pub fn from_shape_vector(u: &ShapeVector) -> Result<SphericalShape> {
        let n = u.norm();
        if n == 0.0 {
            return Err(Error::TripleCollision);
        }
        let mut theta = u.u2.atan2(u.u1);
        if theta < 0.0 {
            theta += 2.0 * std::f64::consts::PI;
        }
        Ok(SphericalShape {
            r: n.sqrt(),
            theta,
            phi: (u.u3 / n).asin(),
        })
    }
}

/// Collision points on the unit shape sphere.
pub const COLLISION_POINTS: [ShapeVector; 3] = [
    ShapeVector::new(-1.0, 0.0, 0.0),
    ShapeVector::new(0.5, 0.8660254037844386, 0.0),
    ShapeVector::new(0.5, -0.8660254037844386, 0.0),
];

/// Collinear (Euler) central configurations on the unit shape sphere;
/// body i sits at the midpoint of the other two.
pub const EULER_POINTS: [ShapeVector; 3] = [
    ShapeVector::new(1.0, 0.0, 0.0),
    ShapeVector::new(-0.5, -0.8660254037844386, 0.0),
    ShapeVector::new(-0.5, 0.8660254037844386, 0.0),
];

/// Equilateral (Lagrange) configurations: the poles of the shape sphere.
pub const LAGRANGE_PLUS: ShapeVector = ShapeVector::new(0.0, 0.0, 1.0);
pub const LAGRANGE_MINUS: ShapeVector = ShapeVector::new(0.0, 0.0, -1.0);

/// The eight named points of the shape sphere.
pub fn named_points() -> [(&'static str, ShapeVector); 8] {
    [
        ("C1", COLLISION_POINTS[0]),
        ("C2", COLLISION_POINTS[1]),
        ("C3", COLLISION_POINTS[2]),
        ("E1", EULER_POINTS[0]),
        ("E2", EULER_POINTS[1]),
        ("E3", EULER_POINTS[2]),
        ("L+", LAGRANGE_PLUS),
        ("L-", LAGRANGE_MINUS),
    ]
}

/// Side lengths (r23, r31, r12) of the unit-size triangle with shape `u`.
///
/// Requires |u| = 1 within 1e-9; callers normalize explicitly so that bad
/// data is not silently rescaled.
pub fn shape_to_sides(u: &ShapeVector) -> Result<(f64, f64, f64)> {
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "shape_to_sides needs a unit shape vector, |u| = {:.12}",
            u.norm()
        )));
    }
    let r23 = (1.0 - COLLISION_POINTS[0].dot(u)).max(0.0).sqrt();
    let r31 = (1.0 - COLLISION_POINTS[1].dot(u)).max(0.0).sqrt();
    let r12 = (1.0 - COLLISION_POINTS[2].dot(u)).max(0.0).sqrt();
    Ok((r23, r31, r12))
}

/// Reduced kinetic energy K_red(x, v) = |v|² - omega(x, v)²/|x|²,
/// the deformation part of K in the Saari decomposition.
pub fn reduced_kinetic(c: &Configuration, v: &Configuration) -> Result<f64> {
    let i = c.moment_of_inertia();
    if i == 0.0 {
        return Err(Error::TripleCollision);
    }
    let omega = mass_omega(c, v);
    Ok(v.moment_of_inertia() - omega * omega / i)
}
