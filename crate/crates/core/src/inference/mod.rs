//! Spearman screening, regression models and the polarization metric.

mod correlation;
mod polarization;
mod regression;

pub use correlation::{average_ranks, spearman, spearman_matrix, CorrelationMatrix};
pub use polarization::{polarization, polarization_scores, standardize_logcounts, PolarizationScore};
pub use regression::{
    fit_linear, fit_logistic, likelihood_ratio_test, Design, RegressionKind, RegressionResult, Term, INTERCEPT,
    SEPARATION_BOUND,
};
