//! Numerical reconstruction and verification of the figure-eight orbit of
//! the planar three-body problem with equal masses.
//!
//! The crate covers the whole chain of the construction:
//!
//! * [`shape_geometry`] — the planar configuration space, Jacobi coordinates,
//!   the Hopf map onto shape space and the reduced (orbit) metric;
//! * [`equipotential`] — the equipotential curve through the collinear
//!   central configurations on the shape sphere and its arc length;
//! * [`action_bounds`] — closed-form collision action bounds and the
//!   test-path action that gates the direct minimization;
//! * [`minimizer`] — direct minimization of the discretized action over
//!   paths joining the collinear and isosceles boundary manifolds;
//! * [`orbit_builder`] — assembly of the full periodic loop from the
//!   minimizing arc by symmetry, and the spherical area rule;
//! * [`integrator`] — adaptive high-order integration of the equations of
//!   motion, period refinement and monodromy eigenvalues;
//! * [`verification`] — the battery of quantitative checks run against a
//!   minimizer path or an integrated trajectory.
//!
//! With the default `parallel` feature the grid solves, gradient assembly
//! and sample sweeps are data-parallel via rayon; reductions use fixed
//! orders so results are identical with the feature disabled.

pub mod action_bounds;
pub mod equipotential;
pub mod error;
pub mod integrator;
pub mod minimizer;
pub mod ode;
pub mod orbit_builder;
pub mod path;
pub mod planar;
pub mod shape_geometry;
pub mod util;
pub mod verification;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
