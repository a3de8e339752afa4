//! Percentile bootstrap interval for the learn, fit and estimate pipeline.
//!
//! cargo run --release --example bootstrap_ci

use stagedcausal::inference::sample;
use stagedcausal::simulation::{random_staged_tree, simulation_frame, true_ate, ParamDist};
use stagedcausal::{bootstrap_ate, BootstrapConfig, Estimator, Learner};

fn main() -> stagedcausal::Result<()> {
    let truth = random_staged_tree(5, 0.5, ParamDist::Unif, 8)?;
    let frame = simulation_frame(truth.tree())?;
    let data = sample(&truth, 2000, 1)?;
    println!("true ATE {:+.4}", true_ate(&truth, &frame)?);

    for estimator in [Estimator::PsStratified, Estimator::Randomized] {
        let config = BootstrapConfig {
            learner: Learner::Hclust,
            estimator,
            replicates: 100,
            seed: 7,
            ..BootstrapConfig::default()
        };
        let est = bootstrap_ate(&data, &frame, &config)?;
        let ci = est.ci.as_ref().expect("bootstrap sets an interval");
        println!(
            "{:<14} mean {:+.4}  95% CI ({:+.4}, {:+.4})  {} replicates",
            estimator.name(),
            est.ate,
            ci.lower,
            ci.upper,
            ci.n_bootstrap
        );
    }
    Ok(())
}
