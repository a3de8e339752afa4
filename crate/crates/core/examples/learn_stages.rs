//! Recover a planted staging with both learners and compare their scores.
//!
//! cargo run --release --example learn_stages

use stagedcausal::inference::sample;
use stagedcausal::learning::learn_bhc_with_trace;
use stagedcausal::{learn_hclust, EventTree, StagedTreeModel, Staging, Variable};

fn main() -> stagedcausal::Result<()> {
    let vars: Vec<Variable> = ["A", "B", "C", "D"].iter().map(|n| Variable::binary(*n)).collect();
    let tree = EventTree::new(vars)?;
    let planted = Staging::from_groups(&tree, &[vec![0], vec![0, 1], vec![0, 1, 1, 0], vec![0, 0, 1, 1, 0, 2, 2, 1]])?;
    let params = vec![
        vec![vec![0.5, 0.5]],
        vec![vec![0.8, 0.2], vec![0.3, 0.7]],
        vec![vec![0.9, 0.1], vec![0.4, 0.6]],
        vec![vec![0.15, 0.85], vec![0.6, 0.4], vec![0.95, 0.05]],
    ];
    let truth = StagedTreeModel::new(tree.clone(), planted.clone(), params)?;
    let data = sample(&truth, 10_000, 3)?;

    let (bhc, trace) = learn_bhc_with_trace(&tree, &data, &Staging::saturated(&tree))?;
    println!("bhc: {} merges, BIC {:.2} -> {:.2}", trace.len() - 1, trace[0], bhc.bic);
    let hc = learn_hclust(&tree, &data)?;
    println!("hclust: BIC {:.2}", hc.bic);

    for v in 0..tree.p() {
        println!(
            "{}: planted {:?}\n   bhc     {:?} {}\n   hclust  {:?} {}",
            tree.variable(v).name,
            planted.partition(v),
            bhc.staging.partition(v),
            mark(bhc.staging.same_partition(&planted, v)),
            hc.staging.partition(v),
            mark(hc.staging.same_partition(&planted, v)),
        );
    }
    Ok(())
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "(recovered)"
    } else {
        "(differs)"
    }
}
