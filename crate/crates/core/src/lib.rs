//! Enhanced logistic regression: a logistic model augmented with threshold
//! effects found by shallow Gini trees and screened by likelihood-ratio tests.
//!
//! The pipeline is `load -> impute -> split -> detect -> screen -> fit -> evaluate`;
//! see [`cli::run_pipeline`] for the end-to-end driver.

pub mod cart;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod json;
pub mod logit;
pub mod metrics;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
