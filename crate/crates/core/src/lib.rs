//! Numerical laboratory for Müntz spaces `span{x^λ₀, x^λ₁, …}` and
//! Remez-type inequalities on compact sets of positive measure.

pub mod cli;
pub mod error;
pub mod exponents;
mod linalg;
pub mod lp;
pub mod minimax;
pub mod muntzeval;
pub mod products;
pub mod remezlab;
pub mod sets;
pub mod targets;

pub use error::{Error, Result};
pub use exponents::{Density, ExponentSequence, SequenceKind};
pub use minimax::{best_uniform_approx, chebyshev_t, growth_functional, EquioscillationResult, GrowthProblem, GrowthResult, SolverOptions};
pub use muntzeval::{power_eval, MuntzPolynomial};
pub use sets::{fat_cantor, Grid, IntervalUnion, SetDescriptor};
