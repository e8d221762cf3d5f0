use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two bodies coincide; the potential and accelerations are singular.
    #[error("collision: bodies {0} and {1} coincide")]
    Collision(usize, usize),

    /// Zero-size configuration; shape quantities are undefined.
    #[error("triple collision: configuration has zero size")]
    TripleCollision,

    /// Center-of-mass (or momentum) constraint violated.
    #[error("zero-sum constraint violated: residual {0:.3e}")]
    ZeroSum(f64),

    /// Evaluation at a singular point of an implicit equation.
    #[error("singular input: {0}")]
    Singular(String),

    /// An iteration failed to converge.
    #[error("{what}: no convergence after {iterations} iterations (last value {last:.12e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    /// Backtracking line search could not find a decreasing step.
    #[error("line search failed at iteration {iteration}: {detail}")]
    LineSearch { iteration: usize, detail: String },

    /// A descent iterate approached collision closer than the hard floor.
    #[error("minimum pairwise separation {0:.3e} fell below the hard floor")]
    SeparationFloor(f64),

    /// Malformed argument, file, or configuration value.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive step size underflowed (close approach or too tight a tolerance).
    #[error("step size underflow at t = {0:.12e}")]
    StepUnderflow(f64),
}
