//! Staged event trees over ordered categorical variables, with structure
//! learning, exact interventional inference and treatment effect
//! estimators built on tree transformations.
//!
//! A typical session reads a CSV, learns a staging, fits it and asks for
//! an effect:
//!
//! ```
//! use stagedcausal::{ate_ps_stratified, fit_mle, learn_hclust, CausalFrame, Dataset, EventTree, Variable};
//!
//! let vars = vec![Variable::binary("Z"), Variable::binary("R"), Variable::binary("Y")];
//! let rows = vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 1], vec![0, 1, 0], vec![1, 0, 1]];
//! let data = Dataset::new(vars.clone(), rows).unwrap();
//! let tree = EventTree::new(vars).unwrap();
//! let staging = learn_hclust(&tree, &data).unwrap().staging;
//! let model = fit_mle(&tree, &staging, &data, 0.0).unwrap();
//! let frame = CausalFrame::from_names(&tree, "R", "Y").unwrap();
//! let est = ate_ps_stratified(&model, &data, &frame).unwrap();
//! assert!(est.ate.abs() <= 1.0);
//! ```
//!
//! The runnable programs under `examples/` walk through each capability.

pub mod causal;
pub mod cli;
pub mod error;
pub mod inference;
pub mod io;
pub mod learning;
pub mod model;
pub mod simulation;

pub use causal::{
    ate_ps_stratified, ate_randomized, baseline_aipw, baseline_full_stratification, baseline_ipw,
    baseline_outcome_regression, bootstrap_ate, cate, positivity_report, ps_stratify, randomize_treatment,
    AteEstimate, BootstrapConfig, CausalFrame, Estimator, PositivityPolicy,
};
pub use error::{Error, Result};
pub use inference::{conditional, intervene, joint_prob, marginal, sample, InterventionSpec};
pub use learning::{bic, learn_bhc, learn_hclust, Learner, ScoredStaging};
pub use model::{fit_mle, Dataset, EventTree, StagedTreeModel, Staging, Variable};
