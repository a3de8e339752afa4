use serde::Serialize;

use crate::causal::frame::CausalFrame;
use crate::causal::transform::{ps_stratify, randomize_treatment};
use crate::error::{Error, Result};
use crate::inference::{for_each_prefix, prefix_probability};
use crate::learning::tv;
use crate::model::{estimate_vector, ContextCounts, Dataset, StagedTreeModel};

/// What to do with a stratum that lacks treated or untreated units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityPolicy {
    /// Drop the stratum and renormalize the remaining weights.
    #[default]
    Exclude,
    /// Use probability 0.5 for the missing arm.
    ImputeUniform,
    /// Merge the treatment stage into the observed stage with the closest
    /// treatment probabilities (stratified estimator only).
    MergeNearest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumEffect {
    pub stratum: String,
    /// Normalized weight among included strata, 0 when excluded.
    pub weight: f64,
    /// Probability or row fraction of the stratum before renormalization.
    pub mass: f64,
    pub effect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_treated: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_untreated: Option<u64>,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub n_bootstrap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diagnostic {
    /// Treated or untreated rows are missing in a stratum.
    PositivityViolation {
        stratum: String,
        n_treated: u64,
        n_untreated: u64,
    },
    /// A treatment arm leads into a context absent from the tree.
    MissingArm { stratum: String, arm: String },
    /// A stage without data was needed.
    UndefinedStage { stratum: String, stage: String },
    /// The model gives the arm probability 0 but its outcome stage is
    /// shared with observed contexts, so the effect is still defined.
    ZeroTreatmentProbability { stratum: String, arm: String },
    ExcludedStratum { stratum: String, mass: f64 },
    ImputedStratum { stratum: String },
    MergedStratum { from: String, into: String },
    UnobservedStratum { stratum: String },
    ClippedPropensities { count: usize, epsilon: f64 },
    Separation { model: String },
    DegenerateOutcome,
    FailedReplicates { failed: usize, total: usize, first: String },
}

/// A treatment-effect estimate with per-stratum effects and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AteEstimate {
    pub ate: f64,
    pub per_stratum: Vec<StratumEffect>,
    pub ci: Option<ConfidenceInterval>,
    pub diagnostics: Vec<Diagnostic>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replicates: Vec<f64>,
}

impl AteEstimate {
    pub(crate) fn scalar(ate: f64, diagnostics: Vec<Diagnostic>) -> Self {
        AteEstimate {
            ate,
            per_stratum: Vec::new(),
            ci: None,
            diagnostics,
            replicates: Vec::new(),
        }
    }

    pub fn excluded_strata(&self) -> impl Iterator<Item = &StratumEffect> {
        self.per_stratum.iter().filter(|s| s.excluded)
    }

    pub fn has_positivity_flags(&self) -> bool {
        self.diagnostics.iter().any(|d| {
            matches!(
                d,
                Diagnostic::PositivityViolation { .. }
                    | Diagnostic::MissingArm { .. }
                    | Diagnostic::UndefinedStage { .. }
            )
        })
    }
}

/// Weighted combination of strata; errors when nothing is left.
pub(crate) fn combine(mut strata: Vec<StratumEffect>, diagnostics: Vec<Diagnostic>) -> Result<AteEstimate> {
    let total: f64 = strata.iter().filter(|s| !s.excluded).map(|s| s.mass).sum();
    if total <= 0.0 {
        return Err(Error::NoIdentifiableStrata(format!(
            "all {} strata lack one treatment arm",
            strata.len()
        )));
    }
    let mut ate = 0.0;
    for s in strata.iter_mut() {
        if s.excluded {
            s.weight = 0.0;
        } else {
            s.weight = s.mass / total;
            ate += s.weight * s.effect.expect("included strata have an effect");
        }
    }
    Ok(AteEstimate {
        ate: ate.clamp(-1.0, 1.0),
        per_stratum: strata,
        ci: None,
        diagnostics,
        replicates: Vec::new(),
    })
}

enum Arm {
    Value(f64),
    Missing,
    Undefined(String),
}

/// `P(Y = positive | do(R = level), z)` where `r_ctx` is the treatment
/// context of `z`; sums over any variables between treatment and outcome.
fn arm_value(model: &StagedTreeModel, frame: &CausalFrame, r_ctx: usize, level: usize) -> Arm {
    fn go(model: &StagedTreeModel, frame: &CausalFrame, var: usize, ctx: usize) -> Arm {
        let tree = model.tree();
        if !tree.contains(var, ctx) {
            return Arm::Missing;
        }
        let stage = model.staging().stage_index(var, ctx).unwrap();
        if model.is_undefined(var, stage) {
            return Arm::Undefined(format!(
                "{}:{}",
                tree.variable(var).name,
                model.staging().stage_label(var, stage)
            ));
        }
        let theta = model.parameters(var, stage);
        if var == frame.outcome {
            return Arm::Value(theta[frame.positive_level]);
        }
        let mut acc = 0.0;
        for (l, &t) in theta.iter().enumerate() {
            if t > 0.0 {
                match go(model, frame, var + 1, tree.child_index(var, ctx, l)) {
                    Arm::Value(v) => acc += t * v,
                    other => return other,
                }
            }
        }
        Arm::Value(acc)
    }
    let child = model.tree().child_index(frame.treatment, r_ctx, level);
    go(model, frame, frame.treatment + 1, child)
}

fn describe_prefix(model: &StagedTreeModel, prefix: &[usize]) -> String {
    if prefix.is_empty() {
        return "all".into();
    }
    let parts: Vec<String> = prefix
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let v = model.tree().variable(j);
            format!("{}={}", v.name, v.levels[c])
        })
        .collect();
    parts.join(",")
}

/// ATE on the randomized tree, standardizing over covariate contexts.
pub fn ate_randomized(model: &StagedTreeModel, frame: &CausalFrame) -> Result<AteEstimate> {
    ate_randomized_with(model, frame, PositivityPolicy::Exclude)
}

pub fn ate_randomized_with(
    model: &StagedTreeModel,
    frame: &CausalFrame,
    policy: PositivityPolicy,
) -> Result<AteEstimate> {
    if policy == PositivityPolicy::MergeNearest {
        return Err(Error::Unsupported(
            "stage merging applies to the stratified estimator only".into(),
        ));
    }
    let rand = randomize_treatment(model, frame)?;
    let tree = rand.tree();
    let (t, u) = (frame.treated_level, frame.untreated_level());
    let mut covariate_paths = Vec::new();
    for_each_prefix(&rand, frame.treatment, |prefix, r_ctx, p| {
        covariate_paths.push((prefix.to_vec(), r_ctx, p));
    })?;

    let mut strata = Vec::with_capacity(covariate_paths.len());
    let mut diagnostics = Vec::new();
    for (prefix, r_ctx, mass) in covariate_paths {
        let name = describe_prefix(&rand, &prefix);
        let mut undefined = None;
        let mut ctx = 0;
        for (j, &c) in prefix.iter().enumerate() {
            if rand.context_is_undefined(j, ctx) {
                let s = rand.staging().stage_index(j, ctx).unwrap();
                undefined = Some(format!("{}:{}", tree.variable(j).name, rand.staging().stage_label(j, s)));
                break;
            }
            ctx = tree.child_index(j, ctx, c);
        }
        let mut arms = [0.0; 2];
        let mut ok = true;
        for (k, level) in [t, u].into_iter().enumerate() {
            let arm_name = tree.variable(frame.treatment).levels[level].clone();
            let value = match undefined.clone() {
                Some(stage) => Arm::Undefined(stage),
                None => arm_value(&rand, frame, r_ctx, level),
            };
            let arm_ok = matches!(value, Arm::Value(_));
            match value {
                Arm::Value(v) => {
                    arms[k] = v;
                    if model.context_parameters(frame.treatment, r_ctx).is_some_and(|th| th[level] == 0.0) {
                        diagnostics.push(Diagnostic::ZeroTreatmentProbability {
                            stratum: name.clone(),
                            arm: arm_name,
                        });
                    }
                }
                Arm::Missing => {
                    diagnostics.push(Diagnostic::MissingArm {
                        stratum: name.clone(),
                        arm: arm_name,
                    });
                    ok = false;
                }
                Arm::Undefined(stage) => {
                    diagnostics.push(Diagnostic::UndefinedStage {
                        stratum: name.clone(),
                        stage,
                    });
                    ok = false;
                }
            }
            if !arm_ok && policy == PositivityPolicy::ImputeUniform {
                arms[k] = 0.5;
            }
        }
        let excluded = !ok && policy == PositivityPolicy::Exclude;
        if excluded {
            diagnostics.push(Diagnostic::ExcludedStratum {
                stratum: name.clone(),
                mass,
            });
        } else if !ok {
            diagnostics.push(Diagnostic::ImputedStratum { stratum: name.clone() });
        }
        strata.push(StratumEffect {
            stratum: name,
            weight: 0.0,
            mass,
            effect: (!excluded).then(|| arms[0] - arms[1]),
            n_treated: None,
            n_untreated: None,
            excluded,
        });
    }
    combine(strata, diagnostics)
}

/// Treated and untreated row counts per treatment stage.
fn stage_arm_counts(model: &StagedTreeModel, data: &Dataset, frame: &CausalFrame) -> Result<Vec<[u64; 2]>> {
    let counts = ContextCounts::collect(model.tree(), data)?;
    let per_stage = counts.stage_counts(model.tree(), model.staging(), frame.treatment);
    Ok(per_stage
        .into_iter()
        .map(|c| [c[frame.treated_level], c[frame.untreated_level()]])
        .collect())
}

/// Merges each treatment stage that lacks an arm into the stage with both
/// arms whose treatment probabilities are closest in total variation, then
/// refits the treatment parameters.
pub fn merge_violating_stages(
    model: &StagedTreeModel,
    data: &Dataset,
    frame: &CausalFrame,
) -> Result<(StagedTreeModel, Vec<Diagnostic>)> {
    let tree = model.tree();
    frame.check(tree)?;
    let r = frame.treatment;
    let arms = stage_arm_counts(model, data, frame)?;
    let staging = model.staging();
    let good: Vec<usize> = (0..arms.len()).filter(|&s| arms[s][0] > 0 && arms[s][1] > 0).collect();
    let bad: Vec<usize> = (0..arms.len())
        .filter(|&s| arms[s][0] + arms[s][1] > 0 && (arms[s][0] == 0 || arms[s][1] == 0))
        .collect();
    if bad.is_empty() {
        return Ok((model.clone(), Vec::new()));
    }
    if good.is_empty() {
        return Err(Error::NoIdentifiableStrata(
            "no treatment stage has both treated and untreated rows".into(),
        ));
    }
    let mut target: Vec<usize> = (0..arms.len()).collect();
    let mut diagnostics = Vec::new();
    for &b in &bad {
        let theta = model.parameters(r, b);
        let mut best = good[0];
        for &g in &good[1..] {
            if tv(theta, model.parameters(r, g)) < tv(theta, model.parameters(r, best)) {
                best = g;
            }
        }
        target[b] = best;
        diagnostics.push(Diagnostic::MergedStratum {
            from: staging.stage_label(r, b).to_string(),
            into: staging.stage_label(r, best).to_string(),
        });
    }
    let labels = staging
        .assignment(r)
        .map(|(c, s)| (c, staging.stage_label(r, target[s]).to_string()))
        .collect();
    let new_staging = staging.with_variable_labels(tree, r, labels)?;
    let counts = ContextCounts::collect(tree, data)?;
    let pooled = counts.stage_counts(tree, &new_staging, r);
    let (params, undefined): (Vec<_>, Vec<_>) =
        pooled.iter().map(|c| estimate_vector(c, model.meta().alpha)).unzip();
    let mut out = model.replace_variable(r, new_staging, params, undefined)?;
    out.set_stage_counts(r, pooled);
    Ok((out, diagnostics))
}

/// ATE as the row-weighted average over treatment stages of the effects in
/// the propensity-stratified tree.
pub fn ate_ps_stratified(model: &StagedTreeModel, data: &Dataset, frame: &CausalFrame) -> Result<AteEstimate> {
    ate_ps_stratified_with(model, data, frame, PositivityPolicy::Exclude)
}

pub fn ate_ps_stratified_with(
    model: &StagedTreeModel,
    data: &Dataset,
    frame: &CausalFrame,
    policy: PositivityPolicy,
) -> Result<AteEstimate> {
    frame.check(model.tree())?;
    if data.is_empty() {
        return Err(Error::Data("stratified estimate needs data".into()));
    }
    let mut diagnostics = Vec::new();
    let merged;
    let model = if policy == PositivityPolicy::MergeNearest {
        let (m, d) = merge_violating_stages(model, data, frame)?;
        diagnostics.extend(d);
        merged = m;
        &merged
    } else {
        model
    };
    let ps = ps_stratify(model, data, frame)?;
    let (r, y) = (frame.treatment, frame.outcome);
    let arms = stage_arm_counts(&ps, data, frame)?;
    let n = data.n_rows() as f64;
    let levels = &ps.tree().variable(r).levels;
    let mut strata = Vec::with_capacity(arms.len());
    for (s, [nt, nu]) in arms.into_iter().enumerate() {
        let label = ps.staging().stage_label(r, s).to_string();
        let mass = (nt + nu) as f64 / n;
        let outcome_prob = |level: usize, rows: u64| -> Option<f64> {
            if rows == 0 {
                return None;
            }
            let st = ps.staging().stage_by_label(y, &format!("{label}:{}", levels[level]))?;
            (!ps.is_undefined(y, st)).then(|| ps.parameters(y, st)[frame.positive_level])
        };
        let pt = outcome_prob(frame.treated_level, nt);
        let pu = outcome_prob(frame.untreated_level(), nu);
        let mut excluded = false;
        let effect = if nt + nu == 0 {
            diagnostics.push(Diagnostic::UnobservedStratum { stratum: label.clone() });
            excluded = true;
            None
        } else if let (Some(a), Some(b)) = (pt, pu) {
            Some(a - b)
        } else {
            diagnostics.push(Diagnostic::PositivityViolation {
                stratum: label.clone(),
                n_treated: nt,
                n_untreated: nu,
            });
            match policy {
                PositivityPolicy::ImputeUniform => {
                    diagnostics.push(Diagnostic::ImputedStratum { stratum: label.clone() });
                    Some(pt.unwrap_or(0.5) - pu.unwrap_or(0.5))
                }
                _ => {
                    diagnostics.push(Diagnostic::ExcludedStratum {
                        stratum: label.clone(),
                        mass,
                    });
                    excluded = true;
                    None
                }
            }
        };
        strata.push(StratumEffect {
            stratum: label,
            weight: 0.0,
            mass,
            effect,
            n_treated: Some(nt),
            n_untreated: Some(nu),
            excluded,
        });
    }
    combine(strata, diagnostics)
}

/// `P(Y = positive | do(R = treated), z) - P(Y = positive | do(R = untreated), z)`
/// for a full covariate assignment `z`.
pub fn cate(model: &StagedTreeModel, frame: &CausalFrame, z: &[usize]) -> Result<f64> {
    let tree = model.tree();
    frame.check(tree)?;
    if z.len() != frame.treatment {
        return Err(Error::InvalidArgument(format!(
            "covariate assignment has {} values, expected {}",
            z.len(),
            frame.treatment
        )));
    }
    let event = describe_prefix(model, z);
    if prefix_probability(model, z)? <= 0.0 {
        return Err(Error::ZeroProbability(event));
    }
    let r_ctx = tree.context_index(frame.treatment, z)?;
    let mut arms = [0.0; 2];
    for (k, level) in [frame.treated_level, frame.untreated_level()].into_iter().enumerate() {
        arms[k] = match arm_value(model, frame, r_ctx, level) {
            Arm::Value(v) => v,
            Arm::Missing => {
                return Err(Error::ZeroProbability(format!(
                    "{event},{}={}",
                    tree.variable(frame.treatment).name,
                    tree.variable(frame.treatment).levels[level]
                )))
            }
            Arm::Undefined(stage) => return Err(Error::UndefinedStage(stage)),
        };
    }
    Ok(arms[0] - arms[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fit_mle, EventTree, Staging, Variable};

    fn zry() -> Vec<Variable> {
        vec![Variable::binary("Z"), Variable::binary("R"), Variable::binary("Y")]
    }

    #[test]
    fn constant_effect_model() {
        let t = EventTree::new(zry()).unwrap();
        let params = vec![
            vec![vec![0.5, 0.5]],
            vec![vec![0.3, 0.7], vec![0.6, 0.4]],
            vec![vec![0.7, 0.3], vec![0.3, 0.7], vec![0.7, 0.3], vec![0.3, 0.7]],
        ];
        let m = StagedTreeModel::new(t.clone(), Staging::saturated(&t), params).unwrap();
        let f = CausalFrame::new(&t, 1, 2).unwrap();
        let est = ate_randomized(&m, &f).unwrap();
        assert!((est.ate - 0.4).abs() < 1e-12);
        assert_eq!(est.per_stratum.len(), 2);
        for z in 0..2 {
            assert!((cate(&m, &f, &[z]).unwrap() - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn outcome_stage_shared_across_arms_gives_zero() {
        let t = EventTree::new(zry()).unwrap();
        let labels = vec![
            [(0, "a")].into_iter().map(|(c, l)| (c, l.to_string())).collect(),
            [(0, "a"), (1, "b")].into_iter().map(|(c, l)| (c, l.to_string())).collect(),
            [(0, "u"), (1, "u"), (2, "v"), (3, "v")]
                .into_iter()
                .map(|(c, l)| (c, l.to_string()))
                .collect(),
        ];
        let s = Staging::from_labels(&t, labels).unwrap();
        let params = vec![
            vec![vec![0.2, 0.8]],
            vec![vec![0.3, 0.7], vec![0.9, 0.1]],
            vec![vec![0.25, 0.75], vec![0.6, 0.4]],
        ];
        let m = StagedTreeModel::new(t.clone(), s, params).unwrap();
        let f = CausalFrame::new(&t, 1, 2).unwrap();
        assert_eq!(ate_randomized(&m, &f).unwrap().ate, 0.0);
    }

    #[test]
    fn four_rows_full_effect() {
        let t = EventTree::new(zry()).unwrap();
        let d = Dataset::new(zry(), vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 1]]).unwrap();
        let m = fit_mle(&t, &Staging::saturated(&t), &d, 0.0).unwrap();
        let f = CausalFrame::new(&t, 1, 2).unwrap();
        assert_eq!(ate_randomized(&m, &f).unwrap().ate, 1.0);
        let ps = ate_ps_stratified(&m, &d, &f).unwrap();
        assert_eq!(ps.ate, 1.0);
    }

    #[test]
    fn single_treatment_stage_is_difference_of_means() {
        let t = EventTree::new(zry()).unwrap();
        let rows = vec![
            vec![0, 1, 1],
            vec![0, 1, 0],
            vec![1, 1, 1],
            vec![0, 0, 0],
            vec![1, 0, 1],
            vec![1, 0, 0],
            vec![1, 0, 0],
        ];
        let d = Dataset::new(zry(), rows).unwrap();
        let mut s = Staging::saturated(&t);
        s = s
            .with_variable_labels(&t, 1, [(0, "r".to_string()), (1, "r".to_string())].into())
            .unwrap();
        let m = fit_mle(&t, &s, &d, 0.0).unwrap();
        let f = CausalFrame::new(&t, 1, 2).unwrap();
        let est = ate_ps_stratified(&m, &d, &f).unwrap();
        assert!((est.ate - (2.0 / 3.0 - 1.0 / 4.0)).abs() < 1e-12);
        assert_eq!(est.per_stratum.len(), 1);
    }

    #[test]
    fn missing_arm_is_excluded_and_weights_renormalized() {
        let t = EventTree::new(zry()).unwrap();
        // Z=1 rows are all treated
        let rows = vec![vec![0, 0, 0], vec![0, 1, 1], vec![0, 1, 1], vec![1, 1, 0], vec![1, 1, 1]];
        let d = Dataset::new(zry(), rows).unwrap();
        let pruned = t.prune_unobserved(&d).unwrap();
        let m = fit_mle(&pruned, &Staging::saturated(&pruned), &d, 0.0).unwrap();
        let f = CausalFrame::new(&pruned, 1, 2).unwrap();
        let est = ate_randomized(&m, &f).unwrap();
        assert_eq!(est.ate, 1.0);
        assert!(est.has_positivity_flags());
        assert_eq!(est.excluded_strata().count(), 1);
        let ps = ate_ps_stratified(&m, &d, &f).unwrap();
        assert_eq!(ps.ate, 1.0);
        let w: f64 = ps.per_stratum.iter().map(|s| s.weight).sum();
        assert!((w - 1.0).abs() < 1e-12);
        let imputed = ate_ps_stratified_with(&m, &d, &f, PositivityPolicy::ImputeUniform).unwrap();
        assert!((imputed.ate - (0.6 * 1.0 + 0.4 * 0.0)).abs() < 1e-12);
        // Z=1's stage merges into Z=0's, the only one with both arms
        let merged = ate_ps_stratified_with(&m, &d, &f, PositivityPolicy::MergeNearest).unwrap();
        assert_eq!(merged.per_stratum.len(), 1);
        assert!((merged.ate - (3.0 / 4.0 - 0.0)).abs() < 1e-12);
        assert!(matches!(cate(&m, &f, &[1]), Err(Error::ZeroProbability(_))));
    }
}
