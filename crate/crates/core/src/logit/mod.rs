//! Logistic regression for threshold-augmented designs.

mod design;
mod fit;

pub use design::{build_design, build_design_with, DesignMatrix, INTERCEPT};
pub use fit::{
    classify, dependent_column, fit, fit_with, log_likelihood, normal_two_sided_p, predict_proba, predict_with, score,
    sigmoid, FitDiagnostics, FitOptions, FitResult,
};
