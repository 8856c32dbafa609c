use thiserror::Error;

/// Errors surfaced by library operations.
///
/// Guess-profile rejection and LP infeasibility are *not* errors; they are
/// ordinary outcomes carried in result types.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element} out of range for ground set of size {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("{what} requires n <= {cap}, got n = {n}")]
    GroundTooLarge {
        what: &'static str,
        n: usize,
        cap: usize,
    },

    #[error("ground set must be nonempty")]
    EmptyGroundSet,

    #[error("epsilon must lie in (0, 1), got {value}")]
    InvalidEpsilon { value: f64 },

    #[error("weight {value} for element {element} outside [0, 1]")]
    InvalidWeight { element: usize, value: f64 },

    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },

    #[error(
        "function is not monotone: marginal of element {element} on its complement is {value}"
    )]
    NotMonotone { element: usize, value: f64 },

    #[error(
        "zero-valued element {element} has positive marginal {value}; function is not submodular"
    )]
    ZeroSingletonPositiveMarginal { element: usize, value: f64 },

    #[error("fractional point coordinate {value} at element {element} outside [0, 1]")]
    InvalidCoordinate { element: usize, value: f64 },

    #[error("partial derivative undefined at saturated coordinate {element}")]
    SaturatedCoordinate { element: usize },

    #[error("estimator drew a non-finite sample")]
    NonFiniteDraw,

    #[error("estimator parameter {name} = {value} outside (0, 1)")]
    InvalidEstimatorParam { name: &'static str, value: f64 },

    #[error("large-element bound is unbounded at curvature 1")]
    CurvatureSaturated,

    #[error(
        "guess enumeration needs {needed} profiles, over the budget of {budget}; \
         use known-optimum or heuristic mode instead"
    )]
    EnumerationBudget { needed: u128, budget: u64 },

    #[error("candidate optimum violates the knapsack constraint: weight {weight}")]
    InfeasibleOptimum { weight: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
