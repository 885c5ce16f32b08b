//! Exact standard bases in the homogenized Weyl algebra `D_{n+p}<z>`, the
//! V-restricted Gröbner fan for two t-variables, and the reduction
//! procedures that compare the multi-indexed V-filtration of
//! `M = D_{n+p}/I` with its intersection filtration.
//!
//! Everything is exact over ℚ. A brute-force linear-algebra [`oracle`]
//! certifies ideal and filtration membership independently of division.

pub mod error;
pub mod weyl;
pub mod order;
pub mod syntax;
pub mod division;
pub mod basis;
pub mod poly;
pub(crate) mod linalg;
pub mod oracle;
pub mod malgrange;
pub mod fan;
pub mod vfilt;

pub use error::{Error, Result};

/// Exact rational coefficients.
pub type Rat = num_rational::BigRational;
