//! Design-based estimation and inference for the AUC of weighted logistic
//! models fitted to complex survey samples.
//!
//! The pipeline: load a [`frame::SurveyFrame`] (stratified, clustered,
//! weighted units), fit a pseudo-likelihood logistic model, estimate the
//! weighted AUC, and attach replicate-weight variances (stratified
//! jackknife or bootstrap), confidence intervals, and comparison tests.
//! A simulation module generates finite populations and Monte Carlo
//! operating characteristics for all of the above.
//!
//! Numeric kernels (`auc`, `normal`, `logit`, `linalg`, `num`) are generic
//! over the scalar via [`num::Real`]; the survey pipeline is instantiated
//! at [`Scalar`].

pub mod auc;
pub mod error;
pub mod frame;
pub mod inference;
pub mod linalg;
pub mod logit;
pub mod normal;
pub mod num;
pub mod replicate;
pub mod rng;
pub mod sim;

/// Scalar type of the survey pipeline: frames, replicate weights, and
/// reports all store 64-bit floats.
pub type Scalar = f64;

pub use auc::{population_auc, weighted_auc, AucInput};
pub use error::{Error, ErrorCategory, Result};
pub use frame::{
    load_survey_csv, validate_for_replication, CsvSchema, DesignSummary, SurveyFrame, UnitRecord,
};
pub use inference::{
    ci_normal, ci_percentile, estimate_auc, test_independent, test_paired, variance_boot,
    variance_jkn, AucEstimate, CiKind, ConfidenceInterval, TestResult,
};
pub use logit::{fit_pseudo_likelihood, predict, FitOptions, FittedModel};
pub use normal::{std_normal_quantile, std_normal_sf};
pub use replicate::{
    jkn_weights, rb_weights, rbn_weights, replicate_weights, trb_weights, Method,
    ReplicateWeightSet, ResampleRng,
};
