use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::staging::{StageKey, Staging};
use crate::model::tree::EventTree;
use crate::model::Dataset;

/// Tolerance used when validating externally supplied probability vectors.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Level counts observed at each context.
///
/// Contexts without rows are absent from the maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextCounts {
    per_var: Vec<BTreeMap<usize, Vec<u64>>>,
    n: usize,
}

impl ContextCounts {
    pub fn collect(tree: &EventTree, data: &Dataset) -> Result<Self> {
        tree.check_dataset(data)?;
        let mut per_var: Vec<BTreeMap<usize, Vec<u64>>> = vec![BTreeMap::new(); tree.p()];
        for (r, row) in data.rows().enumerate() {
            let mut ctx = 0;
            for (i, &code) in row.iter().enumerate() {
                if !tree.contains(i, ctx) {
                    return Err(Error::Data(format!(
                        "row {} reaches pruned context {}",
                        r,
                        tree.describe_context(&tree.context(i, ctx))
                    )));
                }
                per_var[i]
                    .entry(ctx)
                    .or_insert_with(|| vec![0; tree.arity(i)])[code] += 1;
                ctx = tree.child_index(i, ctx, code);
            }
        }
        Ok(ContextCounts {
            per_var,
            n: data.n_rows(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, variable: usize, ctx: usize) -> Option<&[u64]> {
        self.per_var[variable].get(&ctx).map(Vec::as_slice)
    }

    pub fn variable(&self, variable: usize) -> &BTreeMap<usize, Vec<u64>> {
        &self.per_var[variable]
    }

    /// Counts pooled over the contexts of each stage of `variable`.
    pub fn stage_counts(&self, tree: &EventTree, staging: &Staging, variable: usize) -> Vec<Vec<u64>> {
        let arity = tree.arity(variable);
        let mut out = vec![vec![0; arity]; staging.n_stages(variable)];
        for (&ctx, counts) in &self.per_var[variable] {
            if let Some(s) = staging.stage_index(variable, ctx) {
                for (acc, &c) in out[s].iter_mut().zip(counts) {
                    *acc += c;
                }
            }
        }
        out
    }
}

/// Provenance of a fitted model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitMetadata {
    pub n: usize,
    pub alpha: f64,
    /// Pooled level counts per variable and stage, when fitted from data.
    pub stage_counts: Option<Vec<Vec<Vec<u64>>>>,
    /// Stages that had no data under `alpha = 0`; their vector is uniform.
    pub undefined: Vec<Vec<bool>>,
}

/// An event tree, its staging and one probability vector per stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedTreeModel {
    tree: EventTree,
    staging: Staging,
    params: Vec<Vec<Vec<f64>>>,
    meta: FitMetadata,
}

impl StagedTreeModel {
    /// Builds a model from explicit per-stage probability vectors,
    /// `params[variable][stage]`.
    pub fn new(tree: EventTree, staging: Staging, params: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if staging.p() != tree.p() {
            return Err(Error::Model("staging and tree differ in variable count".into()));
        }
        let undefined = (0..tree.p()).map(|i| vec![false; staging.n_stages(i)]).collect();
        Self::with_meta(
            tree,
            staging,
            params,
            FitMetadata {
                undefined,
                ..FitMetadata::default()
            },
        )
    }

    pub fn with_meta(
        tree: EventTree,
        staging: Staging,
        params: Vec<Vec<Vec<f64>>>,
        meta: FitMetadata,
    ) -> Result<Self> {
        if staging.p() != tree.p() {
            return Err(Error::Model("staging and tree differ in variable count".into()));
        }
        staging.check(&tree)?;
        if params.len() != tree.p() || meta.undefined.len() != tree.p() {
            return Err(Error::Model("parameter table does not cover every variable".into()));
        }
        for i in 0..tree.p() {
            let name = &tree.variable(i).name;
            if params[i].len() != staging.n_stages(i) || meta.undefined[i].len() != staging.n_stages(i) {
                return Err(Error::Model(format!(
                    "variable {:?}: {} parameter vectors for {} stages",
                    name,
                    params[i].len(),
                    staging.n_stages(i)
                )));
            }
            for (s, theta) in params[i].iter().enumerate() {
                let label = staging.stage_label(i, s);
                if theta.len() != tree.arity(i) {
                    return Err(Error::Model(format!(
                        "variable {:?} stage {:?}: vector length {} != arity {}",
                        name,
                        label,
                        theta.len(),
                        tree.arity(i)
                    )));
                }
                if theta.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                    return Err(Error::Model(format!(
                        "variable {:?} stage {:?}: probabilities outside [0, 1]",
                        name, label
                    )));
                }
                let sum: f64 = theta.iter().sum();
                if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return Err(Error::Model(format!(
                        "variable {:?} stage {:?}: probabilities sum to {}",
                        name, label, sum
                    )));
                }
            }
        }
        Ok(StagedTreeModel {
            tree,
            staging,
            params,
            meta,
        })
    }

    /// Maximum likelihood fit with additive smoothing `alpha`, pooling
    /// counts within each stage.
    pub fn fit(tree: &EventTree, staging: &Staging, data: &Dataset, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("smoothing must be >= 0, got {alpha}")));
        }
        staging.check(tree)?;
        let counts = ContextCounts::collect(tree, data)?;
        Self::fit_counts(tree, staging, &counts, alpha)
    }

    pub fn fit_counts(
        tree: &EventTree,
        staging: &Staging,
        counts: &ContextCounts,
        alpha: f64,
    ) -> Result<Self> {
        let mut params = Vec::with_capacity(tree.p());
        let mut undefined = Vec::with_capacity(tree.p());
        let mut stage_counts = Vec::with_capacity(tree.p());
        for i in 0..tree.p() {
            let pooled = counts.stage_counts(tree, staging, i);
            let (theta, undef): (Vec<_>, Vec<_>) =
                pooled.iter().map(|c| estimate_vector(c, alpha)).unzip();
            params.push(theta);
            undefined.push(undef);
            stage_counts.push(pooled);
        }
        Ok(StagedTreeModel {
            tree: tree.clone(),
            staging: staging.clone(),
            params,
            meta: FitMetadata {
                n: counts.n(),
                alpha,
                stage_counts: Some(stage_counts),
                undefined,
            },
        })
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn staging(&self) -> &Staging {
        &self.staging
    }

    pub fn meta(&self) -> &FitMetadata {
        &self.meta
    }

    pub fn p(&self) -> usize {
        self.tree.p()
    }

    /// Probability vector of a stage.
    pub fn parameters(&self, variable: usize, stage: usize) -> &[f64] {
        &self.params[variable][stage]
    }

    pub fn all_parameters(&self) -> &[Vec<Vec<f64>>] {
        &self.params
    }

    /// Probability vector at a context, `None` when the context is pruned.
    #[inline]
    pub fn context_parameters(&self, variable: usize, ctx: usize) -> Option<&[f64]> {
        self.staging
            .stage_index(variable, ctx)
            .map(|s| self.params[variable][s].as_slice())
    }

    pub fn is_undefined(&self, variable: usize, stage: usize) -> bool {
        self.meta.undefined[variable][stage]
    }

    pub fn context_is_undefined(&self, variable: usize, ctx: usize) -> bool {
        self.staging
            .stage_index(variable, ctx)
            .is_some_and(|s| self.meta.undefined[variable][s])
    }

    pub fn undefined_stages(&self) -> Vec<StageKey> {
        let mut out = Vec::new();
        for (i, flags) in self.meta.undefined.iter().enumerate() {
            for (s, &u) in flags.iter().enumerate() {
                if u {
                    out.push(StageKey {
                        variable: i,
                        label: self.staging.stage_label(i, s).to_string(),
                    });
                }
            }
        }
        out
    }

    pub fn has_undefined(&self) -> bool {
        self.meta.undefined.iter().flatten().any(|&u| u)
    }

    /// Copy with the stages and parameters of one variable replaced.
    pub(crate) fn replace_variable(
        &self,
        variable: usize,
        staging: Staging,
        params: Vec<Vec<f64>>,
        undefined: Vec<bool>,
    ) -> Result<Self> {
        let mut all = self.params.clone();
        all[variable] = params;
        let mut meta = self.meta.clone();
        meta.undefined[variable] = undefined;
        if let Some(sc) = meta.stage_counts.as_mut() {
            // counts no longer describe the replaced variable
            sc[variable] = vec![vec![0; self.tree.arity(variable)]; staging.n_stages(variable)];
        }
        StagedTreeModel::with_meta(self.tree.clone(), staging, all, meta)
    }

    pub(crate) fn set_stage_counts(&mut self, variable: usize, counts: Vec<Vec<u64>>) {
        if let Some(sc) = self.meta.stage_counts.as_mut() {
            sc[variable] = counts;
        }
    }
}

/// `(n_k + alpha) / (n + alpha * arity)`; uniform and flagged when there is
/// nothing to estimate from.
pub(crate) fn estimate_vector(counts: &[u64], alpha: f64) -> (Vec<f64>, bool) {
    let total: u64 = counts.iter().sum();
    let k = counts.len() as f64;
    if total == 0 && alpha == 0.0 {
        return (vec![1.0 / k; counts.len()], true);
    }
    let denom = total as f64 + alpha * k;
    (
        counts.iter().map(|&c| (c as f64 + alpha) / denom).collect(),
        false,
    )
}

/// Fits stage probabilities by (smoothed) maximum likelihood.
pub fn fit_mle(tree: &EventTree, staging: &Staging, data: &Dataset, alpha: f64) -> Result<StagedTreeModel> {
    StagedTreeModel::fit(tree, staging, data, alpha)
}
