//! Numerical verification of finite spectral triples.

pub mod algebra;
pub mod error;
pub mod fiber;
pub mod json;
pub mod linalg;
pub mod spectral;
pub mod standard_model;

pub use error::{Error, Result};
pub use linalg::{c64, ComplexMatrix, Tolerance};
