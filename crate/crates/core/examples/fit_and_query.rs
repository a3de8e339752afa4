//! Build a staged tree by hand, sample from it, refit and run queries.
//!
//! cargo run --example fit_and_query

use stagedcausal::inference::{conditional, joint_prob, marginal, sample};
use stagedcausal::{bic, fit_mle, EventTree, StagedTreeModel, Staging, Variable};

fn main() -> stagedcausal::Result<()> {
    let vars = vec![
        Variable::new("smoker", ["no", "yes"]),
        Variable::new("age", ["young", "mid", "old"]),
        Variable::new("treated", ["0", "1"]),
        Variable::new("recovered", ["0", "1"]),
    ];
    let tree = EventTree::new(vars)?;

    // group ids per context in index order; equal ids share a stage
    let staging = Staging::from_groups(
        &tree,
        &[
            vec![0],
            vec![0, 1],
            vec![0, 0, 1, 0, 1, 1],
            vec![0, 1, 0, 1, 0, 1, 2, 1, 2, 3, 2, 3],
        ],
    )?;
    let params = vec![
        vec![vec![0.7, 0.3]],
        vec![vec![0.4, 0.4, 0.2], vec![0.2, 0.3, 0.5]],
        vec![vec![0.7, 0.3], vec![0.35, 0.65]],
        vec![vec![0.4, 0.6], vec![0.2, 0.8], vec![0.6, 0.4], vec![0.45, 0.55]],
    ];
    let truth = StagedTreeModel::new(tree.clone(), staging.clone(), params)?;

    let data = sample(&truth, 5000, 11)?;
    println!("sampled {} rows", data.n_rows());

    for (name, s) in [
        ("true staging", staging.clone()),
        ("saturated", Staging::saturated(&tree)),
        ("independence", Staging::independence(&tree)),
    ] {
        let score = bic(&tree, &s, &data)?;
        println!(
            "{name:<13} stages {:>2}  loglik {:>10.2}  BIC {:>10.2}",
            s.total_stages(),
            score.log_likelihood,
            score.bic
        );
    }

    let model = fit_mle(&tree, &staging, &data, 0.0)?;
    println!("P(recovered=1 | smoker=yes, age=old, treated=1)");
    let given = [(0, 1), (1, 2), (2, 1)];
    println!(
        "  true {:.4}  fitted {:.4}",
        conditional(&truth, 3, &given)?.get(&[1]),
        conditional(&model, 3, &given)?.get(&[1])
    );
    println!("P(treated=1 | age=old)  = {:.4}", conditional(&model, 2, &[(1, 2)])?.get(&[1]));
    let m = marginal(&model, &[1, 3])?;
    for (codes, p) in m.cells() {
        println!("  P(age={}, recovered={}) = {p:.4}", tree.variable(1).levels[codes[0]], codes[1]);
    }
    println!("P(no, young, 0, 1) = {:.5}", joint_prob(&model, &[0, 0, 0, 1])?);
    Ok(())
}
