//! Learn a staged tree from confounded data and estimate the treatment
//! effect with both tree-based estimators.
//!
//! cargo run --release --example treatment_effects

use stagedcausal::inference::sample;
use stagedcausal::simulation::{random_staged_tree, simulation_frame, true_ate, ParamDist};
use stagedcausal::{
    ate_ps_stratified, ate_randomized, fit_mle, learn_hclust, ps_stratify, randomize_treatment, EventTree,
};

fn main() -> stagedcausal::Result<()> {
    let truth = random_staged_tree(6, 0.5, ParamDist::Exp, 21)?;
    let frame = simulation_frame(truth.tree())?;
    println!("true ATE {:+.4}", true_ate(&truth, &frame)?);

    let data = sample(&truth, 5000, 4)?;
    let tree = EventTree::new(data.variables().to_vec())?.prune_unobserved(&data)?;
    let learned = learn_hclust(&tree, &data)?;
    let model = fit_mle(&tree, &learned.staging, &data, 0.0)?;

    let std = ate_randomized(&model, &frame)?;
    let ps = ate_ps_stratified(&model, &data, &frame)?;
    println!("standardization {:+.4}", std.ate);
    println!("ps-stratified   {:+.4}", ps.ate);

    let rnd = randomize_treatment(&model, &frame)?;
    println!("randomized tree: R has {} stage(s)", rnd.staging().n_stages(frame.treatment));
    let strat = ps_stratify(&model, &data, &frame)?;
    println!("ps tree outcome stages: {:?}", strat.staging().stage_labels(frame.outcome));
    for s in &ps.per_stratum {
        println!("  stratum {:<6} weight {:.3} effect {:?}", s.stratum, s.weight, s.effect.map(|e| (e * 1e4).round() / 1e4));
    }
    Ok(())
}
