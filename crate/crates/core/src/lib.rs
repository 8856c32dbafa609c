//! Curvature-aware maximization of monotone submodular functions under a
//! knapsack constraint.
//!
//! The pipeline splits the input into a submodular part and a linear part,
//! runs a guessing continuous-greedy ascent over a copied ground set, and
//! rounds the fractional output into a feasible set whose expected value
//! beats the curvature-dependent floor. Exact brute-force oracles, classical
//! greedy baselines, and a budget-allocation application round out the
//! library, and everything is verifiable end-to-end at small instance sizes.
//!
//! All numeric code is generic over the scalar type via [`Real`]; the
//! aliases at the crate root fix `f64`, which is what the CLI uses.

pub mod budget;
pub mod decompose;
pub mod driver;
pub mod error;
pub mod greedy;
pub mod grid;
pub mod io;
pub mod lp;
pub mod multilinear;
pub mod oracle;
mod real;
pub mod rng;
pub mod rounding;
pub mod set;
pub mod testgen;
pub mod verify;

pub use error::{Error, Result};
pub use real::Real;
pub use rng::RngStream;
pub use set::ElemSet;

/// Default scalar type.
pub type Value = f64;
/// Set-function oracle over the default scalar.
pub type Oracle = oracle::ValueOracle<Value>;
/// Weight function over the default scalar.
pub type Weights = oracle::WeightFn<Value>;
/// Problem instance over the default scalar.
pub type Problem = oracle::Instance<Value>;
/// Fractional point over the default scalar.
pub type Point = multilinear::FractionalPoint<Value>;
/// Split into submodular and linear parts over the default scalar.
pub type Split = decompose::Decomposition<Value>;
