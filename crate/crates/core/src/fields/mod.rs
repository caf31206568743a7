//! Scalar fields: the reals and fixed-precision p-adics.

pub mod padic;
pub mod scalar;

pub use padic::{PAdic, DEFAULT_PRECISION};
pub use scalar::{Field, LocalField, LocalScalar, Wide};
