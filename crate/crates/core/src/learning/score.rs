use crate::error::{Error, Result};
use crate::model::{ContextCounts, Dataset, EventTree, Staging};

/// A staging together with its fit on a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredStaging {
    pub staging: Staging,
    pub log_likelihood: f64,
    /// Sum over stages of `arity - 1`.
    pub n_free_params: usize,
    pub n: usize,
    /// `log_likelihood - n_free_params / 2 * ln(n)`, larger is better.
    pub bic: f64,
}

impl ScoredStaging {
    pub(crate) fn new(staging: Staging, log_likelihood: f64, n_free_params: usize, n: usize) -> Self {
        let bic = log_likelihood - 0.5 * n_free_params as f64 * (n as f64).ln();
        ScoredStaging {
            staging,
            log_likelihood,
            n_free_params,
            n,
            bic,
        }
    }
}

/// `sum_k n_k ln(n_k / n)` with `0 ln 0 = 0`.
pub(crate) fn multinomial_ll(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let ln_n = (n as f64).ln();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * ((c as f64).ln() - ln_n))
        .sum()
}

pub(crate) fn score_counts(tree: &EventTree, staging: &Staging, counts: &ContextCounts) -> ScoredStaging {
    let mut ll = 0.0;
    let mut d = 0;
    for i in 0..tree.p() {
        for stage in counts.stage_counts(tree, staging, i) {
            ll += multinomial_ll(&stage);
        }
        d += staging.n_stages(i) * (tree.arity(i) - 1);
    }
    ScoredStaging::new(staging.clone(), ll, d, counts.n())
}

/// Maximized multinomial log-likelihood of the data under a staging.
pub fn log_likelihood(tree: &EventTree, staging: &Staging, data: &Dataset) -> Result<f64> {
    staging.check(tree)?;
    let counts = ContextCounts::collect(tree, data)?;
    Ok(score_counts(tree, staging, &counts).log_likelihood)
}

pub fn bic(tree: &EventTree, staging: &Staging, data: &Dataset) -> Result<ScoredStaging> {
    if data.is_empty() {
        return Err(Error::Data("BIC needs at least one row".into()));
    }
    staging.check(tree)?;
    let counts = ContextCounts::collect(tree, data)?;
    Ok(score_counts(tree, staging, &counts))
}

pub(crate) fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Total variation distance `0.5 * sum |p_k - q_k|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidArgument(format!(
            "vectors have lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    for v in [p, q] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 || v.iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidArgument(format!("not a probability vector: {v:?}")));
        }
    }
    Ok(tv(p, q))
}
