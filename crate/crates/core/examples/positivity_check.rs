//! Detect one-sided treatment contexts and compare the ways of handling
//! them.
//!
//! cargo run --example positivity_check

use stagedcausal::causal::{ate_ps_stratified_with, ate_randomized_with, positivity_report, PositivityPolicy};
use stagedcausal::io::{export_dot, DotOptions};
use stagedcausal::{fit_mle, learn_bhc, CausalFrame, Dataset, EventTree, Variable};

fn main() -> stagedcausal::Result<()> {
    let vars = vec![
        Variable::new("age", ["young", "old"]),
        Variable::new("frail", ["no", "yes"]),
        Variable::binary("exercise"),
        Variable::binary("fall"),
    ];
    // nobody who is old and frail exercises
    let mut rows = Vec::new();
    for (z, counts) in [
        ([0, 0], [(0, 0, 30), (0, 1, 10), (1, 0, 35), (1, 1, 5)]),
        ([0, 1], [(0, 0, 20), (0, 1, 20), (1, 0, 25), (1, 1, 15)]),
        ([1, 0], [(0, 0, 25), (0, 1, 15), (1, 0, 30), (1, 1, 10)]),
        ([1, 1], [(0, 0, 10), (0, 1, 30), (1, 0, 0), (1, 1, 0)]),
    ] {
        for (r, y, n) in counts {
            rows.extend(std::iter::repeat_n(vec![z[0], z[1], r, y], n));
        }
    }
    let data = Dataset::new(vars.clone(), rows)?;
    // pruning drops the exercise branch of old frail people, which no row reaches
    let tree = EventTree::new(vars)?.prune_unobserved(&data)?;
    let frame = CausalFrame::from_names(&tree, "exercise", "fall")?;

    let report = positivity_report(&tree, &data, &frame, None)?;
    for c in report.flagged_contexts() {
        println!("flagged {}: treated {} untreated {}", c.context, c.n_treated, c.n_untreated);
    }

    let staging = learn_bhc(&tree, &data)?.staging;
    let model = fit_mle(&tree, &staging, &data, 0.0)?;
    for policy in [PositivityPolicy::Exclude, PositivityPolicy::ImputeUniform] {
        let est = ate_randomized_with(&model, &frame, policy)?;
        println!("standardization, {policy:?}: {:+.4} ({} excluded)", est.ate, est.excluded_strata().count());
    }
    for policy in [PositivityPolicy::Exclude, PositivityPolicy::MergeNearest] {
        let est = ate_ps_stratified_with(&model, &data, &frame, policy)?;
        println!("ps-stratified, {policy:?}: {:+.4}", est.ate);
    }

    let dot = export_dot(&model, &DotOptions::default().with_positivity(&tree, &report));
    println!("{} DOT lines, {} red borders", dot.lines().count(), dot.matches("color=\"red\"").count());
    Ok(())
}
