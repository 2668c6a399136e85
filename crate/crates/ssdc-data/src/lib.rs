//! Losses, datasets, and problem builders for the stagewise DC toolkit.
//!
//! This crate turns raw data plus a loss/regularizer choice into the
//! `g + r − h` problem shapes the core crate optimizes: regularized ERM with
//! difference-of-convex penalties, smooth non-convex ERM split through the
//! add-and-subtract quadratic device, and unbiased positive-unlabeled risk.

use thiserror::Error;

pub mod builders;
pub mod dataset;
pub mod losses;

pub use crate::builders::{
    build_erm_dc, build_erm_nonconvex, build_erm_plain, build_pu_problem, loss_smoothness_bound,
};
pub use crate::dataset::{gen_synthetic, read_libsvm, Dataset, ScaleMode, SyntheticSpec, Task};
pub use crate::losses::{LossKind, LossSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] ssdc::SsdcError),
}

impl DataError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        DataError::Invalid(msg.into())
    }

    pub fn parse(line: usize, detail: impl Into<String>) -> Self {
        DataError::Parse { line, detail: detail.into() }
    }
}
