//! A reduced version of the estimator comparison grid.
//!
//! cargo run --release --example simulation_study

use stagedcausal::simulation::{run_experiment, summarize, Generator, ParamDist, SimConfig, SimEstimator};

fn main() -> stagedcausal::Result<()> {
    let config = SimConfig {
        p: 6,
        generators: vec![Generator::Sevt, Generator::Dag],
        join_probs: vec![0.5],
        dists: vec![ParamDist::Exp],
        sample_sizes: vec![200, 5000],
        repetitions: 5,
        estimators: vec![SimEstimator::Oracle, SimEstimator::Hclust, SimEstimator::Full, SimEstimator::Aipw],
        record_runtime: false,
        ..SimConfig::default()
    };
    let records = run_experiment(&config)?;
    println!("{} estimates", records.len());
    for s in summarize(&records) {
        println!(
            "{:<5} n={:<5} {:<7} median |error| {}",
            s.generator.name(),
            s.n,
            s.estimator.name(),
            s.median_abs_error.map_or("-".into(), |m| format!("{m:.4}"))
        );
    }
    Ok(())
}
