//! Exact-arithmetic toolkit for the Schrodinger Lie algebra in (n+1)-dimensional
//! space-time: structure constants with a matrix oracle, PBW normal ordering in
//! the enveloping algebra, the Weyl-algebra realization, truncated weight
//! modules (Verma, tensor, dense), twisted localization, and a classifier for
//! irreducible Harish-Chandra modules.

pub mod error;
pub mod lie;
pub mod linalg;
pub mod localization;
pub mod modules;
pub mod pbw;
pub mod scalar;
pub mod weyl;

pub use error::Error;
