//! Callable and putable bond pricing under spectral short-rate models.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod coeffs;
pub mod error;
pub mod models;
pub mod oracle;
pub mod pricer;
pub mod quad;
pub mod series;
pub mod subordinators;
pub mod specfun;

pub use error::{Error, Result};
pub use models::{DiffusionModel, ModelKind};
