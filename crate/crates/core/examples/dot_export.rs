//! Write a learned tree as Graphviz DOT and the model as JSON.
//!
//! cargo run --example dot_export -- /tmp/tree.dot

use stagedcausal::inference::sample;
use stagedcausal::io::{export_dot, model_from_json, model_to_json, DotOptions};
use stagedcausal::simulation::{random_staged_tree, ParamDist};
use stagedcausal::{fit_mle, learn_hclust, EventTree};

fn main() -> stagedcausal::Result<()> {
    let truth = random_staged_tree(4, 0.6, ParamDist::Exp, 5)?;
    let data = sample(&truth, 3000, 2)?;
    let tree = EventTree::new(data.variables().to_vec())?.prune_unobserved(&data)?;
    let model = fit_mle(&tree, &learn_hclust(&tree, &data)?.staging, &data, 0.0)?;

    let json = model_to_json(&model)?;
    let back = model_from_json(&json)?;
    assert_eq!(model.all_parameters(), back.all_parameters());
    println!("model JSON: {} bytes, round trip exact", json.len());

    let dot = export_dot(&model, &DotOptions { show_probs: true, ..DotOptions::default() });
    match std::env::args().nth(1) {
        Some(path) => {
            std::fs::write(&path, &dot)?;
            println!("wrote {path}; render with `dot -Tsvg {path}`");
        }
        None => print!("{dot}"),
    }
    Ok(())
}
