//! Interventions on a staged tree, checked against the observational
//! conditional to show confounding.
//!
//! cargo run --example intervention

use stagedcausal::inference::{conditional, intervene, marginal, InterventionSpec};
use stagedcausal::{EventTree, StagedTreeModel, Staging, Variable};

fn main() -> stagedcausal::Result<()> {
    let tree = EventTree::new(vec![Variable::binary("Z"), Variable::binary("R"), Variable::binary("Y")])?;
    let staging = Staging::saturated(&tree);
    // sicker units (Z=1) are treated more often and recover less
    let params = vec![
        vec![vec![0.6, 0.4]],
        vec![vec![0.8, 0.2], vec![0.25, 0.75]],
        vec![vec![0.3, 0.7], vec![0.2, 0.8], vec![0.7, 0.3], vec![0.6, 0.4]],
    ];
    let model = StagedTreeModel::new(tree, staging, params)?;

    let seen1 = conditional(&model, 2, &[(1, 1)])?.get(&[1]);
    let seen0 = conditional(&model, 2, &[(1, 0)])?.get(&[1]);
    println!("observational  P(Y=1|R=1) - P(Y=1|R=0) = {:+.4}", seen1 - seen0);

    let do1 = marginal(&intervene(&model, &InterventionSpec::single(1, 1))?, &[2])?.get(&[1]);
    let do0 = marginal(&intervene(&model, &InterventionSpec::single(1, 0))?, &[2])?.get(&[1]);
    println!("interventional P(Y=1|do(R=1)) - P(Y=1|do(R=0)) = {:+.4}", do1 - do0);

    let both = intervene(&model, &InterventionSpec::new([(0, 1), (1, 1)])?)?;
    println!("P(Y=1 | do(Z=1, R=1)) = {:.4}", marginal(&both, &[2])?.get(&[1]));
    for v in 0..both.p() {
        println!("  {} stages: {:?}", both.tree().variable(v).name, both.staging().stage_labels(v));
    }
    Ok(())
}
