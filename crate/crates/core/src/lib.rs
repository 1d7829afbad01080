//! Traces of singular moduli on Fricke groups of prime level.
//!
//! Exact q-series and Jacobi-form arithmetic, binary quadratic forms,
//! Hauptmodul evaluation at CM points, and numeric verification of the
//! trace and product identities linking them.

pub mod arith;
pub mod error;
pub mod halfint;
pub mod hauptmodul;
pub mod jacobi;
pub mod linalg;
pub mod numeric;
pub mod qseries;
pub mod quadforms;
pub mod traces;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use qseries::ExactSeries;

/// Exact rational numbers (reduced, positive denominator).
pub type Rational = BigRational;
