//! Classical estimators next to the tree-based ones on the same data.
//!
//! cargo run --release --example baselines

use stagedcausal::causal::{baseline_aipw_with, OutcomeModel, PropensityModel};
use stagedcausal::inference::sample;
use stagedcausal::simulation::{random_staged_tree, simulation_frame, true_ate, ParamDist};
use stagedcausal::{
    ate_randomized, baseline_aipw, baseline_full_stratification, baseline_ipw, baseline_outcome_regression,
    fit_mle, EventTree, Staging,
};

fn main() -> stagedcausal::Result<()> {
    let truth = random_staged_tree(5, 0.0, ParamDist::Unif, 2)?;
    let frame = simulation_frame(truth.tree())?;
    let data = sample(&truth, 10_000, 9)?;
    println!("{:<26} {:+.4}", "true", true_ate(&truth, &frame)?);

    let tree = EventTree::new(data.variables().to_vec())?;
    let saturated = fit_mle(&tree, &Staging::saturated(&tree), &data, 0.0)?;
    let rows = [
        ("saturated tree", ate_randomized(&saturated, &frame)?),
        ("full stratification", baseline_full_stratification(&data, &frame)?),
        ("outcome regression", baseline_outcome_regression(&data, &frame)?),
        ("ipw", baseline_ipw(&data, &frame)?),
        ("aipw", baseline_aipw(&data, &frame)?),
        (
            "aipw, constant outcome",
            baseline_aipw_with(&data, &frame, OutcomeModel::Constant, PropensityModel::CellMeans)?,
        ),
        (
            "aipw, constant propensity",
            baseline_aipw_with(&data, &frame, OutcomeModel::CellMeans, PropensityModel::Constant)?,
        ),
    ];
    for (name, est) in rows {
        println!("{name:<26} {:+.4}", est.ate);
    }
    Ok(())
}
