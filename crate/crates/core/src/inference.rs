//! Exact queries on staged tree models by enumeration of root-to-node
//! paths, structural interventions and forward sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, StagedTreeModel, Staging, Variable};

/// Largest number of cells any exact enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

/// Assignment of fixed values to a set of intervened variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterventionSpec {
    values: BTreeMap<usize, usize>,
}

impl InterventionSpec {
    pub fn new(assignments: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (var, level) in assignments {
            if values.insert(var, level).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "variable {var} is intervened on twice"
                )));
            }
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("intervention has no targets".into()));
        }
        Ok(InterventionSpec { values })
    }

    pub fn single(variable: usize, level: usize) -> Self {
        InterventionSpec {
            values: BTreeMap::from([(variable, level)]),
        }
    }

    pub fn targets(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.values.iter().map(|(&v, &l)| (v, l))
    }

    pub fn value(&self, variable: usize) -> Option<usize> {
        self.values.get(&variable).copied()
    }
}

/// Dense probability table over the product space of a scope of variables.
/// Cells are ordered lexicographically with the first scope variable most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    scope: Vec<usize>,
    variables: Vec<Variable>,
    probs: Vec<f64>,
}

impl DistributionTable {
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn index(&self, codes: &[usize]) -> usize {
        codes
            .iter()
            .zip(&self.variables)
            .fold(0, |acc, (&c, v)| acc * v.arity() + c)
    }

    pub fn get(&self, codes: &[usize]) -> f64 {
        self.probs[self.index(codes)]
    }

    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(mut k, &p)| {
            let mut codes = vec![0; self.variables.len()];
            for j in (0..self.variables.len()).rev() {
                let a = self.variables[j].arity();
                codes[j] = k % a;
                k /= a;
            }
            (codes, p)
        })
    }
}

fn check_enumeration(cells: u128) -> Result<()> {
    if cells > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            cells,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Calls `f(prefix, index, probability)` for every retained prefix of length
/// `depth` reached with positive probability. `index` is the context index
/// of variable `depth` (or the leaf index when `depth == p`).
pub(crate) fn for_each_prefix<F>(model: &StagedTreeModel, depth: usize, mut f: F) -> Result<()>
where
    F: FnMut(&[usize], usize, f64),
{
    let tree = model.tree();
    let cells = if depth < tree.p() {
        tree.n_contexts(depth) as u128
    } else {
        tree.n_leaves() as u128
    };
    check_enumeration(cells)?;
    let mut prefix = Vec::with_capacity(depth);
    walk(model, 0, 0, 1.0, depth, &mut prefix, &mut f);
    Ok(())
}

fn walk<F>(
    model: &StagedTreeModel,
    var: usize,
    ctx: usize,
    prob: f64,
    depth: usize,
    prefix: &mut Vec<usize>,
    f: &mut F,
) where
    F: FnMut(&[usize], usize, f64),
{
    if var == depth {
        f(prefix, ctx, prob);
        return;
    }
    let tree = model.tree();
    let Some(theta) = model.context_parameters(var, ctx) else {
        return;
    };
    for (level, &t) in theta.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let child = tree.child_index(var, ctx, level);
        if var + 1 < tree.p() && !tree.contains(var + 1, child) {
            continue;
        }
        prefix.push(level);
        walk(model, var + 1, child, prob * t, depth, prefix, f);
        prefix.pop();
    }
}

fn check_codes(model: &StagedTreeModel, vars: &[usize], codes: &[usize]) -> Result<()> {
    let tree = model.tree();
    for (&v, &c) in vars.iter().zip(codes) {
        if v >= tree.p() {
            return Err(Error::InvalidArgument(format!("variable index {v} out of range")));
        }
        if c >= tree.arity(v) {
            return Err(Error::InvalidArgument(format!(
                "level code {} invalid for variable {:?}",
                c,
                tree.variable(v).name
            )));
        }
    }
    Ok(())
}

/// Probability of reaching the context `prefix` (product of the parameters
/// along the path); 0 when the path leaves the retained tree.
pub fn prefix_probability(model: &StagedTreeModel, prefix: &[usize]) -> Result<f64> {
    let tree = model.tree();
    if prefix.len() > tree.p() {
        return Err(Error::InvalidArgument("prefix longer than the variable list".into()));
    }
    let vars: Vec<usize> = (0..prefix.len()).collect();
    check_codes(model, &vars, prefix)?;
    let mut ctx = 0;
    let mut prob = 1.0;
    for (i, &code) in prefix.iter().enumerate() {
        match model.context_parameters(i, ctx) {
            Some(theta) => prob *= theta[code],
            None => return Ok(0.0),
        }
        ctx = tree.child_index(i, ctx, code);
    }
    Ok(prob)
}

/// Probability of a full outcome: the product of the stage parameters along
/// its root-to-leaf path. Paths through pruned contexts have probability 0.
pub fn joint_prob(model: &StagedTreeModel, x: &[usize]) -> Result<f64> {
    if x.len() != model.p() {
        return Err(Error::InvalidArgument(format!(
            "outcome has {} values, model has {} variables",
            x.len(),
            model.p()
        )));
    }
    prefix_probability(model, x)
}

/// Exact marginal distribution over `scope` by path enumeration.
pub fn marginal(model: &StagedTreeModel, scope: &[usize]) -> Result<DistributionTable> {
    let tree = model.tree();
    if scope.is_empty() {
        return Err(Error::InvalidArgument("marginal scope is empty".into()));
    }
    let mut seen = vec![false; tree.p()];
    for &v in scope {
        if v >= tree.p() || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidArgument(format!(
                "invalid or repeated scope variable {v}"
            )));
        }
    }
    let variables: Vec<Variable> = scope.iter().map(|&v| tree.variable(v).clone()).collect();
    let size: u128 = variables.iter().map(|v| v.arity() as u128).product();
    check_enumeration(size)?;
    let mut table = DistributionTable {
        scope: scope.to_vec(),
        variables,
        probs: vec![0.0; size as usize],
    };
    let depth = scope.iter().max().unwrap() + 1;
    let mut codes = vec![0; scope.len()];
    for_each_prefix(model, depth, |prefix, _, p| {
        for (c, &v) in codes.iter_mut().zip(scope) {
            *c = prefix[v];
        }
        let k = table.index(&codes);
        table.probs[k] += p;
    })?;
    Ok(table)
}

fn describe_event(model: &StagedTreeModel, given: &[(usize, usize)]) -> String {
    let parts: Vec<String> = given
        .iter()
        .map(|&(v, c)| {
            let var = model.tree().variable(v);
            format!("{}={}", var.name, var.levels[c])
        })
        .collect();
    parts.join(", ")
}

/// Distribution of `target` given a partial assignment of other variables.
///
/// When `given` fixes exactly the variables preceding `target`, the stage
/// parameter vector of that context is returned unchanged.
pub fn conditional(
    model: &StagedTreeModel,
    target: usize,
    given: &[(usize, usize)],
) -> Result<DistributionTable> {
    let tree = model.tree();
    if target >= tree.p() {
        return Err(Error::InvalidArgument(format!("target variable {target} out of range")));
    }
    let (gv, gc): (Vec<usize>, Vec<usize>) = given.iter().copied().unzip();
    check_codes(model, &gv, &gc)?;
    let mut assigned: BTreeMap<usize, usize> = BTreeMap::new();
    for &(v, c) in given {
        if v == target || assigned.insert(v, c).is_some() {
            return Err(Error::InvalidArgument(format!(
                "variable {v} repeated or equal to the target"
            )));
        }
    }
    let variables = vec![tree.variable(target).clone()];

    if assigned.len() == target && assigned.keys().copied().eq(0..target) {
        let prefix: Vec<usize> = assigned.values().copied().collect();
        let ctx = tree.context_index(target, &prefix)?;
        let reach = prefix_probability(model, &prefix)?;
        match model.context_parameters(target, ctx) {
            Some(theta) if reach > 0.0 => {
                return Ok(DistributionTable {
                    scope: vec![target],
                    variables,
                    probs: theta.to_vec(),
                })
            }
            _ => return Err(Error::ZeroProbability(describe_event(model, given))),
        }
    }

    let depth = assigned.keys().copied().chain([target]).max().unwrap() + 1;
    let mut num = vec![0.0; tree.arity(target)];
    for_each_prefix(model, depth, |prefix, _, p| {
        if assigned.iter().all(|(&v, &c)| prefix[v] == c) {
            num[prefix[target]] += p;
        }
    })?;
    let denom: f64 = num.iter().sum();
    if denom <= 0.0 {
        return Err(Error::ZeroProbability(describe_event(model, given)));
    }
    Ok(DistributionTable {
        scope: vec![target],
        variables,
        probs: num.iter().map(|x| x / denom).collect(),
    })
}

/// Interventional model for `do(X_I = z_I)`.
///
/// Each intervened variable gets a single stage holding a point mass at its
/// assigned value; every other stage is kept. The joint of the result is the
/// truncated factorization of the original model.
pub fn intervene(model: &StagedTreeModel, spec: &InterventionSpec) -> Result<StagedTreeModel> {
    let tree = model.tree();
    let (vars, codes): (Vec<usize>, Vec<usize>) = spec.targets().unzip();
    check_codes(model, &vars, &codes)?;
    if !has_support(model, spec) {
        return Err(Error::EmptySupport(describe_event(
            model,
            &spec.targets().collect::<Vec<_>>(),
        )));
    }
    let mut out = model.clone();
    for (var, level) in spec.targets() {
        let label = format!("do({})", tree.variable(var).levels[level]);
        let labels = tree.context_indices(var).map(|c| (c, label.clone())).collect();
        let staging: Staging = out.staging().with_variable_labels(tree, var, labels)?;
        let mut point = vec![0.0; tree.arity(var)];
        point[level] = 1.0;
        out = out.replace_variable(var, staging, vec![point], vec![false])?;
    }
    Ok(out)
}

/// Whether some retained root-to-leaf path agrees with the intervention.
fn has_support(model: &StagedTreeModel, spec: &InterventionSpec) -> bool {
    fn dfs(model: &StagedTreeModel, spec: &InterventionSpec, var: usize, ctx: usize) -> bool {
        let tree = model.tree();
        if var == tree.p() {
            return true;
        }
        if !tree.contains(var, ctx) {
            return false;
        }
        match spec.value(var) {
            Some(level) => dfs(model, spec, var + 1, tree.child_index(var, ctx, level)),
            None => (0..tree.arity(var)).any(|l| dfs(model, spec, var + 1, tree.child_index(var, ctx, l))),
        }
    }
    dfs(model, spec, 0, 0)
}

/// Draws `n` i.i.d. rows by sequential categorical draws along the tree.
/// Fails on models with undefined (no-data) stages.
pub fn sample(model: &StagedTreeModel, n: usize, seed: u64) -> Result<Dataset> {
    sample_with(model, n, seed, false)
}

/// Like [`sample`], optionally drawing from the uniform placeholder vectors
/// of undefined stages.
pub fn sample_with(model: &StagedTreeModel, n: usize, seed: u64, allow_undefined: bool) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if model.has_undefined() && !allow_undefined {
        let stages: Vec<String> = model
            .undefined_stages()
            .iter()
            .map(|k| format!("{}:{}", model.tree().variable(k.variable).name, k.label))
            .collect();
        return Err(Error::UndefinedStage(format!(
            "cannot sample from undefined stages {}",
            stages.join(", ")
        )));
    }
    let tree = model.tree();
    let p = tree.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut codes = Vec::with_capacity(n * p);
    for _ in 0..n {
        let mut ctx = 0;
        for i in 0..p {
            let theta = model.context_parameters(i, ctx).ok_or_else(|| {
                Error::Model(format!(
                    "sampled into pruned context {}",
                    tree.describe_context(&tree.context(i, ctx))
                ))
            })?;
            let level = draw_categorical(theta, rng.random::<f64>());
            codes.push(level);
            ctx = tree.child_index(i, ctx, level);
        }
    }
    Dataset::from_codes(tree.variables().to_vec(), codes)
}

fn draw_categorical(theta: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &t) in theta.iter().enumerate() {
        if t > 0.0 {
            acc += t;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}
