use std::collections::BTreeMap;

use crate::causal::frame::CausalFrame;
use crate::error::{Error, Result};
use crate::model::{estimate_vector, ContextCounts, Dataset, StagedTreeModel, PROBABILITY_TOLERANCE};

/// Label of the single treatment stage of a randomized tree.
pub const RANDOMIZED_STAGE: &str = "randomized";

/// Puts every treatment context in one stage with a fair coin.
pub fn randomize_treatment(model: &StagedTreeModel, frame: &CausalFrame) -> Result<StagedTreeModel> {
    randomize_treatment_with(model, frame, &[0.5, 0.5])
}

/// Puts every treatment context in one stage with the given assignment
/// distribution. Every other stage is kept.
pub fn randomize_treatment_with(
    model: &StagedTreeModel,
    frame: &CausalFrame,
    assignment: &[f64],
) -> Result<StagedTreeModel> {
    let tree = model.tree();
    frame.check(tree)?;
    let r = frame.treatment;
    let sum: f64 = assignment.iter().sum();
    if assignment.len() != tree.arity(r)
        || assignment.iter().any(|x| !(0.0..=1.0).contains(x))
        || (sum - 1.0).abs() > PROBABILITY_TOLERANCE
    {
        return Err(Error::InvalidArgument(format!(
            "invalid treatment assignment distribution {assignment:?}"
        )));
    }
    let labels = tree
        .context_indices(r)
        .map(|c| (c, RANDOMIZED_STAGE.to_string()))
        .collect();
    let staging = model.staging().with_variable_labels(tree, r, labels)?;
    model.replace_variable(r, staging, vec![assignment.to_vec()], vec![false])
}

/// Regenerates the outcome stages from the treatment stages: outcome
/// context `(z, r)` gets stage `<treatment stage of z>:<label of r>`.
/// Outcome parameters are refitted from `data` with the model's smoothing.
///
/// Requires the outcome to follow the treatment directly.
pub fn ps_stratify(model: &StagedTreeModel, data: &Dataset, frame: &CausalFrame) -> Result<StagedTreeModel> {
    let tree = model.tree();
    frame.check(tree)?;
    let (r, y) = (frame.treatment, frame.outcome);
    if y != r + 1 {
        return Err(Error::Unsupported(
            "propensity stratification needs the outcome directly after the treatment".into(),
        ));
    }
    let arity_r = tree.arity(r);
    let mut labels = BTreeMap::new();
    for ctx in tree.context_indices(y) {
        let parent = ctx / arity_r;
        let level = ctx % arity_r;
        let stage = model
            .staging()
            .stage_index(r, parent)
            .ok_or_else(|| Error::Model("outcome context under a pruned treatment context".into()))?;
        labels.insert(
            ctx,
            format!(
                "{}:{}",
                model.staging().stage_label(r, stage),
                tree.variable(r).levels[level]
            ),
        );
    }
    let staging = model.staging().with_variable_labels(tree, y, labels)?;
    let counts = ContextCounts::collect(tree, data)?;
    let pooled = counts.stage_counts(tree, &staging, y);
    let (params, undefined): (Vec<_>, Vec<_>) =
        pooled.iter().map(|c| estimate_vector(c, model.meta().alpha)).unzip();
    let mut out = model.replace_variable(y, staging, params, undefined)?;
    out.set_stage_counts(y, pooled);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::conditional;
    use crate::model::{EventTree, Staging, Variable};

    fn model() -> (StagedTreeModel, CausalFrame) {
        let vars = vec![Variable::binary("Z"), Variable::binary("R"), Variable::binary("Y")];
        let t = EventTree::new(vars).unwrap();
        let s = Staging::saturated(&t);
        let params = vec![
            vec![vec![0.4, 0.6]],
            vec![vec![0.2, 0.8], vec![0.7, 0.3]],
            vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.3, 0.7], vec![0.6, 0.4]],
        ];
        let m = StagedTreeModel::new(t.clone(), s, params).unwrap();
        (m, CausalFrame::new(&t, 1, 2).unwrap())
    }

    #[test]
    fn randomizing_keeps_outcome_conditionals() {
        let (m, f) = model();
        let r = randomize_treatment(&m, &f).unwrap();
        assert_eq!(r.staging().n_stages(1), 1);
        assert_eq!(r.parameters(1, 0), &[0.5, 0.5]);
        for z in 0..2 {
            for t in 0..2 {
                let a = conditional(&m, 2, &[(0, z), (1, t)]).unwrap();
                let b = conditional(&r, 2, &[(0, z), (1, t)]).unwrap();
                assert_eq!(a.probabilities(), b.probabilities());
            }
        }
        assert!(randomize_treatment_with(&m, &f, &[0.5, 0.6]).is_err());
    }

    #[test]
    fn saturated_treatment_gives_saturated_outcome() {
        let (m, f) = model();
        let data = Dataset::new(
            m.tree().variables().to_vec(),
            vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 0], vec![1, 1, 1]],
        )
        .unwrap();
        let ps = ps_stratify(&m, &data, &f).unwrap();
        assert!(ps.staging().same_partition(&Staging::saturated(m.tree()), 2));
        assert_eq!(ps.staging().stage_label(2, 0), "1:0");
    }

    #[test]
    fn single_treatment_stage_gives_two_outcome_stages() {
        let (m, f) = model();
        let data = Dataset::new(
            m.tree().variables().to_vec(),
            vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]],
        )
        .unwrap();
        let r = randomize_treatment(&m, &f).unwrap();
        let ps = ps_stratify(&r, &data, &f).unwrap();
        assert_eq!(ps.staging().n_stages(2), 2);
        let s0 = ps.staging().stage_by_label(2, "randomized:0").unwrap();
        assert_eq!(ps.parameters(2, s0), &[0.5, 0.5]);
    }

    #[test]
    fn mediator_between_treatment_and_outcome_is_unsupported() {
        let vars = vec![Variable::binary("R"), Variable::binary("M"), Variable::binary("Y")];
        let t = EventTree::new(vars.clone()).unwrap();
        let m = StagedTreeModel::new(
            t.clone(),
            Staging::independence(&t),
            vec![vec![vec![0.5, 0.5]]; 3],
        )
        .unwrap();
        let f = CausalFrame::new(&t, 0, 2).unwrap();
        let d = Dataset::new(vars, vec![vec![0, 0, 0]]).unwrap();
        assert!(matches!(ps_stratify(&m, &d, &f), Err(Error::Unsupported(_))));
    }
}
