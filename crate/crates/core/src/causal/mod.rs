//! Causal transforms of staged trees, treatment-effect estimators, the
//! bootstrap and classical baselines.

mod ate;
mod baselines;
mod bootstrap;
mod frame;
mod logistic;
mod positivity;
mod transform;

pub use ate::{
    ate_ps_stratified, ate_ps_stratified_with, ate_randomized, ate_randomized_with, cate, merge_violating_stages,
    AteEstimate, ConfidenceInterval, Diagnostic, PositivityPolicy, StratumEffect,
};
pub use baselines::{
    baseline_aipw, baseline_aipw_with, baseline_full_stratification, baseline_ipw, baseline_outcome_regression,
    OutcomeModel, PropensityModel, EPSILON,
};
pub use bootstrap::{
    bootstrap_ate, estimate_pipeline, quantile, replicate_seed, BootstrapConfig, Estimator, MAX_FAILED_FRACTION,
};
pub use frame::{default_level, CausalFrame};
pub use logistic::{fit_logistic, sigmoid, LogisticFit};
pub use positivity::{positivity_report, ContextPositivity, PositivityReport, PositivityStatus, StagePositivity};
pub use transform::{ps_stratify, randomize_treatment, randomize_treatment_with, RANDOMIZED_STAGE};
