//! Numerical laboratory for asymptotic limits of power-bounded operators on
//! finite-dimensional spaces, similarity tests, weighted shifts and the
//! construction of contractions with a prescribed asymptotic limit.

pub mod asymptotics;
pub mod constructor;
pub mod matrix;
pub mod params;
pub mod random;
pub mod shifts;
pub mod similarity;

pub use matrix::{ComplexMatrix, MatrixError, C64};
pub use params::Params;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
