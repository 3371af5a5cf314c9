use thiserror::Error;

use crate::lottery::LotteryViolation;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian at ({i},{j}): deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian {
        i: usize,
        j: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver did not converge within {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("solver reached the iteration limit ({iterations}); gap {gap:.3e}, primal residual {primal_res:.3e}, dual residual {dual_res:.3e}")]
    IterationLimit {
        iterations: usize,
        gap: f64,
        primal_res: f64,
        dual_res: f64,
    },

    #[error("solver numerical failure: {reason} (gap {gap:.3e}, primal residual {primal_res:.3e}, dual residual {dual_res:.3e})")]
    SolverNumericalFailure {
        reason: String,
        gap: f64,
        primal_res: f64,
        dual_res: f64,
    },

    #[error("the zero gamble carries no information and is never desirable")]
    ZeroGamble,

    #[error("value {value} outside of range {range}")]
    Range { value: f64, range: &'static str },

    #[error("column {column} of the table is not a probability mass function (sum {sum}, min {min})")]
    NotColumnStochastic { column: usize, sum: f64, min: f64 },

    #[error("the assessments are incoherent: no trace-one positive matrix is compatible with them")]
    Incoherent,

    #[error("conditioning event has zero upper probability (upper probability {upper:.3e})")]
    UndefinedConditional { upper: f64 },

    #[error("state is outside the credal set of the assessments (min expected payoff {min_payoff:.3e})")]
    StateNotInDual { min_payoff: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("invalid QH-lottery: {0}")]
    InvalidLottery(#[from] LotteryViolation),
}

pub type Result<T> = std::result::Result<T, Error>;
