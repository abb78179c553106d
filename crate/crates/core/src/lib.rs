//! Truncated Laguerre orthogonal polynomials: weight x^α e^{−x} on (0, z).

pub mod error;
pub mod identities;
pub mod moments;
pub mod numerics;
pub mod polyeval;
pub mod real;
pub mod series;
pub mod zeros;
pub mod recurrence;

pub use error::{Error, Result};
pub use numerics::{make_context, PrecisionContext};
pub use real::Real;
