use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::causal::ate::{
    ate_ps_stratified_with, ate_randomized_with, AteEstimate, ConfidenceInterval, Diagnostic, PositivityPolicy,
};
use crate::causal::frame::CausalFrame;
use crate::error::{Error, Result};
use crate::learning::Learner;
use crate::model::{fit_mle, Dataset, EventTree, StagedTreeModel};

/// Largest tolerated fraction of failed replicates.
pub const MAX_FAILED_FRACTION: f64 = 0.2;

/// Which transformed tree the effect is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Randomized,
    PsStratified,
}

impl Estimator {
    pub fn estimate(
        self,
        model: &StagedTreeModel,
        data: &Dataset,
        frame: &CausalFrame,
        policy: PositivityPolicy,
    ) -> Result<AteEstimate> {
        match self {
            Estimator::Randomized => ate_randomized_with(model, frame, policy),
            Estimator::PsStratified => ate_ps_stratified_with(model, data, frame, policy),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Randomized => "randomized",
            Estimator::PsStratified => "ps-stratified",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "randomized" => Ok(Estimator::Randomized),
            "ps-stratified" | "ps_stratified" | "ps" => Ok(Estimator::PsStratified),
            _ => Err(Error::InvalidArgument(format!(
                "unknown estimator {s:?} (expected randomized or ps-stratified)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub learner: Learner,
    pub estimator: Estimator,
    pub replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
    pub alpha: f64,
    pub policy: PositivityPolicy,
    /// Drop contexts unobserved in each resample before learning.
    pub prune: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            learner: Learner::Hclust,
            estimator: Estimator::PsStratified,
            replicates: 200,
            seed: 0,
            ci_level: 0.95,
            alpha: 0.0,
            policy: PositivityPolicy::Exclude,
            prune: true,
        }
    }
}

/// Learn stages, fit and estimate on one dataset.
pub fn estimate_pipeline(data: &Dataset, frame: &CausalFrame, config: &BootstrapConfig) -> Result<AteEstimate> {
    let mut tree = EventTree::new(data.variables().to_vec())?;
    if config.prune {
        tree = tree.prune_unobserved(data)?;
    }
    let staging = config.learner.learn(&tree, data)?.staging;
    let model = fit_mle(&tree, &staging, data, config.alpha)?;
    config.estimator.estimate(&model, data, frame, config.policy)
}

/// Seed of replicate `index`, by a splitmix64 step on the base seed.
pub fn replicate_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample quantile with linear interpolation between order statistics
/// (the usual "type 7" definition). `sorted` must be ascending.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Nonparametric bootstrap of the whole learn-fit-estimate pipeline.
/// Reports the mean of the replicate estimates and a percentile interval.
pub fn bootstrap_ate(data: &Dataset, frame: &CausalFrame, config: &BootstrapConfig) -> Result<AteEstimate> {
    if config.replicates < 2 {
        return Err(Error::InvalidArgument("at least 2 bootstrap replicates are needed".into()));
    }
    if !(config.ci_level > 0.0 && config.ci_level < 1.0) {
        return Err(Error::InvalidArgument(format!("CI level {} not in (0, 1)", config.ci_level)));
    }
    frame.check_variables(data.variables())?;
    if data.is_empty() {
        return Err(Error::Data("cannot bootstrap an empty dataset".into()));
    }
    let n = data.n_rows();
    let results: Vec<Result<f64>> = (0..config.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(config.seed, b));
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let sample = data.select_rows(&idx);
            estimate_pipeline(&sample, frame, config).map(|e| e.ate)
        })
        .collect();

    let mut values = Vec::with_capacity(results.len());
    let mut failed = 0;
    let mut first = None;
    for r in results {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                failed += 1;
                first.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let total = config.replicates;
    if failed as f64 > MAX_FAILED_FRACTION * total as f64 || values.is_empty() {
        return Err(Error::Bootstrap {
            failed,
            total,
            first: first.unwrap_or_default(),
        });
    }
    let mut diagnostics = Vec::new();
    if failed > 0 {
        diagnostics.push(Diagnostic::FailedReplicates {
            failed,
            total,
            first: first.unwrap(),
        });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - config.ci_level) / 2.0;
    Ok(AteEstimate {
        ate: mean,
        per_stratum: Vec::new(),
        ci: Some(ConfidenceInterval {
            lower: quantile(&sorted, tail),
            upper: quantile(&sorted, 1.0 - tail),
            level: config.ci_level,
            n_bootstrap: values.len(),
        }),
        diagnostics,
        replicates: values,
    })
}
