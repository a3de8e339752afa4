//! Random data-generating staged trees, exact true effects and the
//! estimator-comparison experiment.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::causal::{
    ate_randomized, baseline_aipw, baseline_ipw, baseline_outcome_regression, replicate_seed, CausalFrame,
};
use crate::error::{Error, Result};
use crate::inference::sample;
use crate::learning::{learn_bhc, learn_hclust};
use crate::model::{fit_mle, Dataset, EventTree, StagedTreeModel, Staging, Variable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Generator {
    Sevt,
    Dag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParamDist {
    Exp,
    Unif,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SimEstimator {
    Bhc,
    Hclust,
    Full,
    Oracle,
    QModel,
    Ipw,
    Aipw,
}

macro_rules! named_enum {
    ($t:ty, $what:literal, $($v:path => $s:literal),+) => {
        impl $t {
            pub fn name(self) -> &'static str {
                match self { $($v => $s),+ }
            }
        }
        impl std::str::FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    _ => Err(Error::InvalidArgument(format!(concat!("unknown ", $what, " {:?}"), s))),
                }
            }
        }
    };
}

named_enum!(Generator, "generator", Generator::Sevt => "sevt", Generator::Dag => "dag");
named_enum!(ParamDist, "parameter distribution", ParamDist::Exp => "exp", ParamDist::Unif => "unif");
named_enum!(SimEstimator, "estimator",
    SimEstimator::Bhc => "bhc",
    SimEstimator::Hclust => "hclust",
    SimEstimator::Full => "full",
    SimEstimator::Oracle => "oracle",
    SimEstimator::QModel => "q.model",
    SimEstimator::Ipw => "ipw",
    SimEstimator::Aipw => "aipw");

impl SimEstimator {
    pub const ALL: [SimEstimator; 7] = [
        SimEstimator::Bhc,
        SimEstimator::Hclust,
        SimEstimator::Full,
        SimEstimator::Oracle,
        SimEstimator::QModel,
        SimEstimator::Ipw,
        SimEstimator::Aipw,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total number of binary variables, covariates plus treatment and outcome.
    pub p: usize,
    pub generators: Vec<Generator>,
    pub join_probs: Vec<f64>,
    pub dists: Vec<ParamDist>,
    pub sample_sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub estimators: Vec<SimEstimator>,
    pub edge_prob: f64,
    /// When false every runtime is reported as 0 so output is reproducible
    /// byte for byte.
    pub record_runtime: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            p: 8,
            generators: vec![Generator::Sevt],
            join_probs: vec![0.0, 0.5, 0.8],
            dists: vec![ParamDist::Exp, ParamDist::Unif],
            sample_sizes: vec![100, 500, 1000, 10000],
            repetitions: 20,
            seed: 0,
            estimators: SimEstimator::ALL.to_vec(),
            edge_prob: 0.3,
            record_runtime: true,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.p < 3 {
            return bad("simulation needs at least 3 variables");
        }
        if self.repetitions == 0 {
            return bad("at least one repetition is needed");
        }
        if self.join_probs.iter().any(|x| !(0.0..=1.0).contains(x)) || !(0.0..=1.0).contains(&self.edge_prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.sample_sizes.contains(&0) {
            return bad("sample sizes must be positive");
        }
        if self.generators.is_empty() || self.join_probs.is_empty() || self.dists.is_empty() || self.sample_sizes.is_empty() || self.estimators.is_empty() {
            return bad("every grid dimension needs at least one value");
        }
        Ok(())
    }
}

/// `Z1..Z{p-2}, R, Y` for `p >= 3`, else `X1..Xp`; all binary.
pub fn simulation_variables(p: usize) -> Vec<Variable> {
    if p < 3 {
        return (1..=p).map(|i| Variable::binary(format!("X{i}"))).collect();
    }
    let mut v: Vec<Variable> = (1..=p - 2).map(|i| Variable::binary(format!("Z{i}"))).collect();
    v.push(Variable::binary("R"));
    v.push(Variable::binary("Y"));
    v
}

fn draw_vector(rng: &mut ChaCha8Rng, arity: usize, dist: ParamDist) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..arity)
            .map(|_| match dist {
                ParamDist::Exp => Exp1.sample(rng),
                ParamDist::Unif => rng.random::<f64>(),
            })
            .collect();
        let s: f64 = raw.iter().sum();
        if s > 0.0 {
            return raw.into_iter().map(|x| x / s).collect();
        }
    }
}

/// Each item in order opens a new group, or with probability `join` joins
/// a uniformly chosen existing one.
fn random_joins(rng: &mut ChaCha8Rng, items: usize, join: f64) -> Vec<usize> {
    let mut groups = Vec::with_capacity(items);
    let mut n_groups = 0;
    for _ in 0..items {
        if n_groups > 0 && rng.random::<f64>() < join {
            groups.push(rng.random_range(0..n_groups));
        } else {
            groups.push(n_groups);
            n_groups += 1;
        }
    }
    groups
}

fn with_random_parameters(tree: EventTree, staging: Staging, dist: ParamDist, rng: &mut ChaCha8Rng) -> Result<StagedTreeModel> {
    let params = (0..tree.p())
        .map(|i| (0..staging.n_stages(i)).map(|_| draw_vector(rng, tree.arity(i), dist)).collect())
        .collect();
    StagedTreeModel::new(tree, staging, params)
}

/// Random staged tree over `p` binary variables: contexts are visited in
/// order and join an existing stage of their variable with probability
/// `join`.
pub fn random_staged_tree(p: usize, join: f64, dist: ParamDist, seed: u64) -> Result<StagedTreeModel> {
    if p == 0 {
        return Err(Error::InvalidArgument("need at least one variable".into()));
    }
    let tree = EventTree::new(simulation_variables(p))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<Vec<usize>> = (0..p)
        .map(|i| random_joins(&mut rng, tree.n_contexts(i), join))
        .collect();
    let staging = Staging::from_groups(&tree, &groups)?;
    with_random_parameters(tree, staging, dist, &mut rng)
}

/// A model generated from a random DAG, with the sampled parent sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DagModel {
    pub model: StagedTreeModel,
    pub parents: Vec<Vec<usize>>,
}

/// Random DAG over the variable order (each forward edge present with
/// `edge_prob`); contexts of a variable share a stage iff they agree on
/// its parents. Stages are then joined at random with probability `join`
/// as in [`random_staged_tree`].
pub fn random_dag_with_parents(p: usize, edge_prob: f64, join: f64, dist: ParamDist, seed: u64) -> Result<DagModel> {
    if p == 0 {
        return Err(Error::InvalidArgument("need at least one variable".into()));
    }
    let tree = EventTree::new(simulation_variables(p))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let parents: Vec<Vec<usize>> = (0..p)
        .map(|i| (0..i).filter(|_| rng.random::<f64>() < edge_prob).collect())
        .collect();
    let mut groups = Vec::with_capacity(p);
    for (i, pa) in parents.iter().enumerate() {
        let mut key_group: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let dag_groups: Vec<usize> = tree
            .contexts(i)
            .map(|c| {
                let key: Vec<usize> = pa.iter().map(|&j| c.prefix[j]).collect();
                let next = key_group.len();
                *key_group.entry(key).or_insert(next)
            })
            .collect();
        let joined = random_joins(&mut rng, key_group.len(), join);
        groups.push(dag_groups.into_iter().map(|g| joined[g]).collect());
    }
    let staging = Staging::from_groups(&tree, &groups)?;
    let model = with_random_parameters(tree, staging, dist, &mut rng)?;
    Ok(DagModel { model, parents })
}

pub fn random_dag_model(p: usize, edge_prob: f64, dist: ParamDist, seed: u64) -> Result<StagedTreeModel> {
    random_dag_with_parents(p, edge_prob, 0.0, dist, seed).map(|d| d.model)
}

/// Frame with the last two variables as treatment and outcome, level 1
/// treated and positive.
pub fn simulation_frame(tree: &EventTree) -> Result<CausalFrame> {
    if tree.p() < 2 {
        return Err(Error::InvalidArgument("need treatment and outcome variables".into()));
    }
    CausalFrame::new(tree, tree.p() - 2, tree.p() - 1)
}

/// Exact ATE of a generating model by randomizing its treatment.
pub fn true_ate(model: &StagedTreeModel, frame: &CausalFrame) -> Result<f64> {
    ate_randomized(model, frame).map(|e| e.ate)
}

/// One estimator run on one simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub generator: Generator,
    pub pi: f64,
    pub dist: ParamDist,
    pub n: usize,
    pub rep: usize,
    pub estimator: SimEstimator,
    pub abs_error: Option<f64>,
    pub runtime_ms: f64,
    pub estimate: Option<f64>,
    pub true_ate: f64,
    /// `ok` or the error message.
    pub status: String,
}

/// Median absolute error of one estimator in one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub generator: Generator,
    pub pi: f64,
    pub dist: ParamDist,
    pub n: usize,
    pub estimator: SimEstimator,
    pub median_abs_error: Option<f64>,
    pub n_ok: usize,
    pub n_failed: usize,
}

pub fn estimate_simulated(
    estimator: SimEstimator,
    truth: &StagedTreeModel,
    data: &Dataset,
    frame: &CausalFrame,
) -> Result<f64> {
    let tree = truth.tree();
    let staged = |staging: &Staging| -> Result<f64> {
        let m = fit_mle(tree, staging, data, 0.0)?;
        ate_randomized(&m, frame).map(|e| e.ate)
    };
    match estimator {
        SimEstimator::Bhc => staged(&learn_bhc(tree, data)?.staging),
        SimEstimator::Hclust => staged(&learn_hclust(tree, data)?.staging),
        SimEstimator::Full => staged(&Staging::saturated(tree)),
        SimEstimator::Oracle => staged(truth.staging()),
        SimEstimator::QModel => baseline_outcome_regression(data, frame).map(|e| e.ate),
        SimEstimator::Ipw => baseline_ipw(data, frame).map(|e| e.ate),
        SimEstimator::Aipw => baseline_aipw(data, frame).map(|e| e.ate),
    }
}

/// Runs every (generator, join probability, distribution, repetition)
/// cell, sampling every size from the cell's generating model and applying
/// every estimator. Failures are recorded, never fatal. Records come out in
/// grid order whatever the thread count.
pub fn run_experiment(config: &SimConfig) -> Result<Vec<SimRecord>> {
    config.validate()?;
    let mut cells = Vec::new();
    for &g in &config.generators {
        for &pi in &config.join_probs {
            for &dist in &config.dists {
                for rep in 0..config.repetitions {
                    cells.push((g, pi, dist, rep));
                }
            }
        }
    }
    let per_cell: Vec<Result<Vec<SimRecord>>> = cells
        .par_iter()
        .enumerate()
        .map(|(k, &(generator, pi, dist, rep))| {
            let model_seed = replicate_seed(config.seed, k);
            let truth = match generator {
                Generator::Sevt => random_staged_tree(config.p, pi, dist, model_seed)?,
                Generator::Dag => random_dag_with_parents(config.p, config.edge_prob, pi, dist, model_seed)?.model,
            };
            let frame = simulation_frame(truth.tree())?;
            let true_ate = true_ate(&truth, &frame)?;
            let mut out = Vec::new();
            for (j, &n) in config.sample_sizes.iter().enumerate() {
                let data = sample(&truth, n, replicate_seed(model_seed, j))?;
                for &estimator in &config.estimators {
                    let start = Instant::now();
                    let result = estimate_simulated(estimator, &truth, &data, &frame);
                    let runtime_ms = if config.record_runtime {
                        start.elapsed().as_secs_f64() * 1e3
                    } else {
                        0.0
                    };
                    let (estimate, status) = match result {
                        Ok(v) => (Some(v), "ok".to_string()),
                        Err(e) => (None, e.to_string()),
                    };
                    out.push(SimRecord {
                        generator,
                        pi,
                        dist,
                        n,
                        rep,
                        estimator,
                        abs_error: estimate.map(|v| (v - true_ate).abs()),
                        runtime_ms,
                        estimate,
                        true_ate,
                        status,
                    });
                }
            }
            Ok(out)
        })
        .collect();
    let mut records = Vec::new();
    for r in per_cell {
        records.extend(r?);
    }
    Ok(records)
}

/// Median of a nonempty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Median absolute error per (generator, pi, dist, n, estimator), in
/// first-appearance order.
pub fn summarize(records: &[SimRecord]) -> Vec<SummaryRecord> {
    let mut order: Vec<(Generator, u64, ParamDist, usize, SimEstimator)> = Vec::new();
    let mut groups: BTreeMap<(Generator, u64, ParamDist, usize, SimEstimator), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let key = (r.generator, r.pi.to_bits(), r.dist, r.n, r.estimator);
        let entry = groups.entry(key).or_insert_with(|| {
            order.push(key);
            (Vec::new(), 0)
        });
        match r.abs_error {
            Some(e) => entry.0.push(e),
            None => entry.1 += 1,
        }
    }
    order
        .into_iter()
        .map(|key| {
            let (errs, failed) = &groups[&key];
            SummaryRecord {
                generator: key.0,
                pi: f64::from_bits(key.1),
                dist: key.2,
                n: key.3,
                estimator: key.4,
                median_abs_error: median(errs),
                n_ok: errs.len(),
                n_failed: *failed,
            }
        })
        .collect()
}
