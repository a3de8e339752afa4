//! Worked scenarios that cross module boundaries.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use rand::Rng;
use stagedcausal::causal::{
    ate_ps_stratified, merge_violating_stages, positivity_report, Diagnostic, PositivityPolicy, PositivityStatus,
    RANDOMIZED_STAGE,
};
use stagedcausal::inference::{conditional, marginal, sample};
use stagedcausal::io::{export_dot, DotOptions};
use stagedcausal::model::ContextCounts;
use stagedcausal::simulation::{estimate_simulated, random_dag_with_parents, random_staged_tree, ParamDist, SimEstimator};
use stagedcausal::{
    ate_randomized, baseline_ipw, baseline_outcome_regression, bic, cate, fit_mle, learn_bhc, learn_hclust,
    ps_stratify, randomize_treatment, CausalFrame, Dataset, EventTree, StagedTreeModel, Staging, Variable,
};

fn labels(pairs: &[(usize, &str)]) -> BTreeMap<usize, String> {
    pairs.iter().map(|&(c, l)| (c, l.to_string())).collect()
}

fn enso_vars() -> Vec<Variable> {
    vec![
        Variable::new("ENSO", ["Nina", "neut", "Nino"]),
        Variable::new("IOD", ["neg", "zero", "pos"]),
        Variable::new("AU", ["low", "high"]),
    ]
}

/// Every (ENSO, IOD) cell observed except El Nino with a negative IOD.
fn enso_data() -> Dataset {
    let mut rows = Vec::new();
    for e in 0..3 {
        for i in 0..3 {
            if (e, i) == (2, 0) {
                continue;
            }
            for a in 0..2 {
                rows.extend(std::iter::repeat_n(vec![e, i, a], 3 + e + i + 2 * a));
            }
        }
    }
    Dataset::new(enso_vars(), rows).unwrap()
}

fn enso_model() -> StagedTreeModel {
    let data = enso_data();
    let tree = EventTree::new(enso_vars()).unwrap().prune_unobserved(&data).unwrap();
    let staging = Staging::from_labels(
        &tree,
        vec![
            labels(&[(0, "1")]),
            labels(&[(0, "1"), (1, "2"), (2, "2")]),
            labels(&[(0, "1"), (1, "1"), (2, "2"), (3, "2"), (4, "3"), (5, "3"), (7, "1"), (8, "2")]),
        ],
    )
    .unwrap();
    fit_mle(&tree, &staging, &data, 0.0).unwrap()
}

#[test]
fn enso_tree_shape() {
    let tree = EventTree::new(enso_vars()).unwrap();
    assert_eq!((0..3).map(|i| tree.n_contexts(i)).collect::<Vec<_>>(), vec![1, 3, 9]);
    assert_eq!(tree.n_leaves(), 18);
    assert_eq!(Staging::saturated(&tree).total_stages(), 13);

    let pruned = tree.prune_unobserved(&enso_data()).unwrap();
    assert!(pruned.contains(1, 2));
    assert!(!pruned.contains(2, 6), "AU context under (Nino, neg) removed");
    assert_eq!(pruned.n_contexts(2), 8);
}

#[test]
fn enso_shared_iod_stage() {
    let model = enso_model();
    let nino = conditional(&model, 1, &[(0, 2)]).unwrap();
    let neut = conditional(&model, 1, &[(0, 1)]).unwrap();
    assert_eq!(nino.probabilities(), neut.probabilities());
    assert_ne!(conditional(&model, 1, &[(0, 0)]).unwrap().probabilities(), neut.probabilities());
}

#[test]
fn enso_dot_colors_and_missing_branch() {
    let model = enso_model();
    let dot = parse_dot(&export_dot(&model, &DotOptions::default()));
    let colors = |var: usize| -> BTreeSet<String> {
        dot.nodes
            .iter()
            .filter(|(id, _)| id.starts_with(&format!("n{var}_")))
            .map(|(_, a)| a["fillcolor"].clone())
            .collect()
    };
    assert_eq!(colors(2).len(), 3);
    assert_eq!(colors(1).len(), 2);
    assert!(!dot.nodes.contains_key("n2_6"));
    // IOD node under Nino has no edge labelled neg
    let under_nino: Vec<&str> =
        dot.edges.iter().filter(|(f, _, _)| f == "n1_2").map(|(_, _, a)| a["label"].as_str()).collect();
    assert_eq!(under_nino, vec!["zero", "pos"]);
    // 8 retained AU contexts with 2 leaves each
    assert_eq!(dot.nodes.keys().filter(|k| k.starts_with("leaf")).count(), 16);
    assert_eq!(dot.edges.len(), 3 + 8 + 16);
}

/// Two covariates, treatment with two stages, outcome with three.
fn fig3_model() -> StagedTreeModel {
    let tree = binary_tree(&["Z1", "Z2", "R", "Y"]);
    let staging = Staging::from_groups(
        &tree,
        &[vec![0], vec![0, 0], vec![0, 0, 1, 1], vec![0, 1, 0, 2, 2, 1, 0, 1]],
    )
    .unwrap();
    let params = vec![
        vec![vec![0.5, 0.5]],
        vec![vec![0.6, 0.4]],
        vec![vec![0.7, 0.3], vec![0.35, 0.65]],
        vec![vec![0.6, 0.4], vec![0.25, 0.75], vec![0.8, 0.2]],
    ];
    StagedTreeModel::new(tree, staging, params).unwrap()
}

#[test]
fn fig3_randomized_tree() {
    let model = fig3_model();
    let frame = CausalFrame::new(model.tree(), 2, 3).unwrap();
    let rnd = randomize_treatment(&model, &frame).unwrap();
    assert_eq!(rnd.staging().stage_labels(2), [RANDOMIZED_STAGE.to_string()]);
    assert_eq!(rnd.parameters(2, 0), &[0.5, 0.5]);
    assert!(rnd.staging().same_partition(model.staging(), 3));
    for v in [0, 1, 3] {
        assert_eq!(rnd.all_parameters()[v], model.all_parameters()[v]);
    }
}

#[test]
fn fig3_ps_stratified_tree() {
    let model = fig3_model();
    let frame = CausalFrame::new(model.tree(), 2, 3).unwrap();
    let data = sample(&model, 4000, 5).unwrap();
    let ps = ps_stratify(&model, &data, &frame).unwrap();
    assert_eq!(model.staging().n_stages(3), 3);
    let got: BTreeSet<&str> = ps.staging().stage_labels(3).iter().map(String::as_str).collect();
    assert_eq!(got, BTreeSet::from(["1:0", "1:1", "2:0", "2:1"]));
    // outcome context (z1, z2, r) lands in stage <stage of R at z>:<r>
    for ctx in 0..8 {
        let (z, r) = (ctx / 2, ctx % 2);
        let want = format!("{}:{r}", model.staging().stage_label(2, model.staging().stage_index(2, z).unwrap()));
        assert_eq!(ps.staging().stage_label(3, ps.staging().stage_index(3, ctx).unwrap()), want);
    }
    // idempotent
    let again = ps_stratify(&ps, &data, &frame).unwrap();
    assert_eq!(again.all_parameters(), ps.all_parameters());
}

fn naive_difference(data: &Dataset, r: usize, y: usize) -> f64 {
    let mut s = [[0.0f64; 2]; 2];
    for row in data.rows() {
        s[row[r]][0] += 1.0;
        s[row[r]][1] += row[y] as f64;
    }
    s[1][1] / s[1][0] - s[0][1] / s[0][0]
}

#[test]
fn merging_all_treatment_stages_gives_naive_estimate() {
    let model = fig3_model();
    let frame = CausalFrame::new(model.tree(), 2, 3).unwrap();
    let data = sample(&model, 3000, 8).unwrap();
    let tree = model.tree();
    let one = model.staging().with_variable_labels(tree, 2, labels(&[(0, "a"), (1, "a"), (2, "a"), (3, "a")])).unwrap();
    let merged = fit_mle(tree, &one, &data, 0.0).unwrap();
    let est = ate_ps_stratified(&merged, &data, &frame).unwrap();
    assert!((est.ate - naive_difference(&data, 2, 3)).abs() < 1e-12);
    assert_eq!(est.per_stratum.len(), 1);
}

#[test]
fn ps_weights_match_treatment_stage_shares() {
    let model = fig3_model();
    let frame = CausalFrame::new(model.tree(), 2, 3).unwrap();
    let data = sample(&model, 5000, 13).unwrap();
    let fitted = fit_mle(model.tree(), model.staging(), &data, 0.0).unwrap();
    let est = ate_ps_stratified(&fitted, &data, &frame).unwrap();
    let total: f64 = est.per_stratum.iter().map(|s| s.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);

    // recompute from counts: stage 1 covers Z1 = 0, stage 2 covers Z1 = 1
    let mut n = [[0.0f64; 2]; 2];
    let mut pos = [[0.0f64; 2]; 2];
    for row in data.rows() {
        n[row[0]][row[2]] += 1.0;
        pos[row[0]][row[2]] += row[3] as f64;
    }
    let rows = data.n_rows() as f64;
    let manual: f64 = (0..2).map(|s| (n[s][0] + n[s][1]) / rows * (pos[s][1] / n[s][1] - pos[s][0] / n[s][0])).sum();
    assert!((est.ate - manual).abs() < 1e-12);
}

/// Low risk: 10% treated. High risk, not referred: 50%. Referred: all
/// treated. Low-risk patients are never referred.
fn fall_data() -> Dataset {
    let vars = vec![
        Variable::new("risk", ["low", "high"]),
        Variable::new("referred", ["no", "yes"]),
        Variable::new("treated", ["0", "1"]),
        Variable::new("fall", ["0", "1"]),
    ];
    let mut rows = Vec::new();
    let mut add = |z: [usize; 2], r: usize, falls: usize, n: usize| {
        for k in 0..n {
            rows.push(vec![z[0], z[1], r, (k < falls) as usize]);
        }
    };
    add([0, 0], 0, 18, 180);
    add([0, 0], 1, 1, 20);
    add([1, 0], 0, 30, 100);
    add([1, 0], 1, 20, 100);
    add([1, 1], 1, 25, 60);
    Dataset::new(vars, rows).unwrap()
}

#[test]
fn fall_referred_context_is_flagged() {
    let data = fall_data();
    let full = EventTree::new(data.variables().to_vec()).unwrap();
    let frame = CausalFrame::from_names(&full, "treated", "fall").unwrap();
    let report = positivity_report(&full, &data, &frame, None).unwrap();
    let status: BTreeMap<&str, PositivityStatus> = report.contexts.iter().map(|c| (c.context.as_str(), c.status)).collect();
    assert_eq!(status["risk=high,referred=yes"], PositivityStatus::OnlyTreated);
    assert_eq!(status["risk=low,referred=yes"], PositivityStatus::Unobserved);
    assert_eq!(status["risk=high,referred=no"], PositivityStatus::Ok);
    assert!(report.has_violations());

    let tree = full.prune_unobserved(&data).unwrap();
    let staging = Staging::saturated(&tree);
    let model = fit_mle(&tree, &staging, &data, 0.0).unwrap();
    let est = ate_ps_stratified(&model, &data, &frame).unwrap();
    let excluded: Vec<&str> = est.excluded_strata().map(|s| s.stratum.as_str()).collect();
    assert_eq!(excluded.len(), 1);
    assert!(est.diagnostics.iter().any(|d| matches!(d, Diagnostic::PositivityViolation { n_untreated: 0, .. })));
    let kept: f64 = est.per_stratum.iter().filter(|s| !s.excluded).map(|s| s.weight).sum();
    assert!((kept - 1.0).abs() < 1e-12);

    // randomization estimator flags the same stratum
    let std = ate_randomized(&model, &frame).unwrap();
    assert_eq!(std.excluded_strata().count(), 1);
    assert!(std.has_positivity_flags());

    // merging folds the referred stage into its nearest neighbour
    let (merged, _) = merge_violating_stages(&model, &data, &frame).unwrap();
    assert!(merged.staging().n_stages(2) < model.staging().n_stages(2));
    let m = stagedcausal::causal::ate_ps_stratified_with(&model, &data, &frame, PositivityPolicy::MergeNearest).unwrap();
    assert_eq!(m.excluded_strata().count(), 0);
    assert!(m.diagnostics.iter().any(|d| matches!(d, Diagnostic::MergedStratum { .. })));
}

#[test]
fn uniform_model_frequencies_converge() {
    let tree = binary_tree(&["A", "B", "C"]);
    let model = StagedTreeModel::new(
        tree.clone(),
        Staging::independence(&tree),
        vec![vec![vec![0.5, 0.5]]; 3],
    )
    .unwrap();
    let data = sample(&model, 100_000, 17).unwrap();
    let mut cells = [0usize; 8];
    for row in data.rows() {
        cells[ctx_of(&tree, row)] += 1;
    }
    for c in cells {
        assert!((c as f64 / 100_000.0 - 0.125).abs() < 0.01);
    }
}

#[test]
fn saturated_refit_converges_to_generator() {
    let truth = fig3_model();
    let tree = truth.tree();
    let passes = (0..3u64)
        .filter(|&seed| {
            let data = sample(&truth, 100_000, seed).unwrap();
            let fit = fit_mle(tree, &Staging::saturated(tree), &data, 0.0).unwrap();
            (0..tree.p()).all(|i| {
                tree.context_indices(i).all(|c| {
                    let a = fit.context_parameters(i, c).unwrap();
                    let b = truth.context_parameters(i, c).unwrap();
                    stagedcausal::learning::tv_distance(a, b).unwrap() < 0.02
                })
            })
        })
        .count();
    assert!(passes >= 2);
}

#[test]
fn hclust_recovers_two_stage_outcome() {
    let tree = binary_tree(&["Z1", "Z2", "R", "Y"]);
    let mut recovered = 0;
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let groups = random_groups(&mut r, 8, 2);
        let groups = if groups.iter().all(|&g| g == groups[0]) { (0..8).map(|i| i % 2).collect() } else { groups };
        let staging = Staging::from_groups(&tree, &[vec![0], vec![0, 0], vec![0, 0, 0, 0], groups]).unwrap();
        let params = vec![
            vec![vec![0.5, 0.5]],
            vec![vec![0.5, 0.5]],
            vec![vec![0.5, 0.5]],
            vec![vec![0.7, 0.3], vec![0.3, 0.7]],
        ];
        let truth = StagedTreeModel::new(tree.clone(), staging.clone(), params).unwrap();
        let data = sample(&truth, 10_000, seed).unwrap();
        recovered += learn_hclust(&tree, &data).unwrap().staging.same_partition(&staging, 3) as usize;
    }
    assert!(recovered >= 18, "{recovered}/20");
}

#[test]
fn bhc_merges_shared_outcome_stage() {
    let tree = binary_tree(&["Z1", "Z2", "R", "Y"]);
    let staging = Staging::from_groups(&tree, &[vec![0], vec![0, 1], vec![0, 1, 1, 0], vec![0; 8]]).unwrap();
    let params = vec![
        vec![vec![0.4, 0.6]],
        vec![vec![0.8, 0.2], vec![0.3, 0.7]],
        vec![vec![0.75, 0.25], vec![0.3, 0.7]],
        vec![vec![0.35, 0.65]],
    ];
    let truth = StagedTreeModel::new(tree.clone(), staging, params).unwrap();
    let data = sample(&truth, 10_000, 4).unwrap();
    assert_eq!(learn_bhc(&tree, &data).unwrap().staging.n_stages(3), 1);
}

#[test]
fn independent_data_prefers_independence_staging() {
    let tree = binary_tree(&["A", "B", "C"]);
    let model = StagedTreeModel::new(
        tree.clone(),
        Staging::independence(&tree),
        vec![vec![vec![0.3, 0.7]], vec![vec![0.5, 0.5]], vec![vec![0.8, 0.2]]],
    )
    .unwrap();
    let data = sample(&model, 10_000, 1).unwrap();
    let ind = bic(&tree, &Staging::independence(&tree), &data).unwrap();
    let sat = bic(&tree, &Staging::saturated(&tree), &data).unwrap();
    assert!(ind.bic > sat.bic);
    assert_eq!((ind.n_free_params, sat.n_free_params), (3, 7));
}

#[test]
fn learned_stagings_validate() {
    for seed in 0..10u64 {
        let truth = random_generator(seed, 3..=6);
        let data = sample(&truth, 500, seed).unwrap();
        let tree = EventTree::new(data.variables().to_vec()).unwrap().prune_unobserved(&data).unwrap();
        for s in [learn_bhc(&tree, &data).unwrap().staging, learn_hclust(&tree, &data).unwrap().staging] {
            assert!(s.validate(&tree).is_empty());
        }
    }
}

#[test]
fn cate_constant_when_effect_does_not_depend_on_covariates() {
    let tree = binary_tree(&["Z1", "Z2", "R", "Y"]);
    let staging = Staging::from_groups(&tree, &[vec![0], vec![0, 1], vec![0, 1, 2, 3], vec![0, 1, 0, 1, 0, 1, 0, 1]]).unwrap();
    let params = vec![
        vec![vec![0.4, 0.6]],
        vec![vec![0.8, 0.2], vec![0.3, 0.7]],
        vec![vec![0.7, 0.3], vec![0.4, 0.6], vec![0.5, 0.5], vec![0.2, 0.8]],
        vec![vec![0.7, 0.3], vec![0.2, 0.8]],
    ];
    let model = StagedTreeModel::new(tree.clone(), staging, params).unwrap();
    let frame = CausalFrame::new(&tree, 2, 3).unwrap();
    for z in all_points(&[2, 2]) {
        assert!((cate(&model, &frame, &z).unwrap() - 0.5).abs() < 1e-15);
    }
}

#[test]
fn cate_zero_when_arms_share_an_outcome_stage() {
    let tree = binary_tree(&["Z", "R", "Y"]);
    // Z = 0: both arms in stage 1; Z = 1: arms split
    let staging = Staging::from_groups(&tree, &[vec![0], vec![0, 1], vec![0, 0, 1, 2]]).unwrap();
    let params = vec![
        vec![vec![0.5, 0.5]],
        vec![vec![0.6, 0.4], vec![0.3, 0.7]],
        vec![vec![0.4, 0.6], vec![0.7, 0.3], vec![0.2, 0.8]],
    ];
    let model = StagedTreeModel::new(tree.clone(), staging, params).unwrap();
    let frame = CausalFrame::new(&tree, 1, 2).unwrap();
    assert_eq!(cate(&model, &frame, &[0]).unwrap(), 0.0);
    assert!((cate(&model, &frame, &[1]).unwrap() - 0.5).abs() < 1e-15);
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Two binary covariates with logistic treatment and outcome; returns the
/// data and the exact standardized effect.
fn logistic_data(seed: u64, b_r: f64, n: usize) -> (Dataset, f64) {
    let pz = [0.4, 0.6];
    let e = |z: &[usize]| sigmoid(-0.5 + 1.2 * z[0] as f64 - 0.8 * z[1] as f64);
    let m = |z: &[usize], r: usize| sigmoid(-0.3 + b_r * r as f64 + 0.9 * z[0] as f64 - 1.1 * z[1] as f64);
    let mut g = rng(seed);
    let rows = (0..n)
        .map(|_| {
            let z: Vec<usize> = pz.iter().map(|&p| g.random_bool(p) as usize).collect();
            let r = g.random_bool(e(&z)) as usize;
            let y = g.random_bool(m(&z, r)) as usize;
            vec![z[0], z[1], r, y]
        })
        .collect();
    let truth = all_points(&[2, 2])
        .iter()
        .map(|z| {
            let w: f64 = (0..2).map(|j| if z[j] == 1 { pz[j] } else { 1.0 - pz[j] }).product();
            w * (m(z, 1) - m(z, 0))
        })
        .sum();
    let vars = ["Z1", "Z2", "R", "Y"].iter().map(|s| Variable::binary(*s)).collect();
    (Dataset::new(vars, rows).unwrap(), truth)
}

#[test]
fn outcome_regression_and_ipw_recover_logistic_truth() {
    let (data, truth) = logistic_data(3, 0.9, 10_000);
    let tree = EventTree::new(data.variables().to_vec()).unwrap();
    let frame = CausalFrame::new(&tree, 2, 3).unwrap();
    assert!((baseline_outcome_regression(&data, &frame).unwrap().ate - truth).abs() < 0.02);
    assert!((baseline_ipw(&data, &frame).unwrap().ate - truth).abs() < 0.02);

    let (null, zero) = logistic_data(4, 0.0, 10_000);
    assert_eq!(zero, 0.0);
    assert!(baseline_outcome_regression(&null, &frame).unwrap().ate.abs() < 0.01);
}

#[test]
fn ipw_with_balanced_design_is_mean_difference() {
    let vars: Vec<Variable> = ["Z", "R", "Y"].iter().map(|s| Variable::binary(*s)).collect();
    let mut rows = Vec::new();
    for (z, r, y, n) in [(0, 0, 0, 30), (0, 0, 1, 20), (0, 1, 0, 10), (0, 1, 1, 40), (1, 0, 0, 25), (1, 0, 1, 25), (1, 1, 0, 15), (1, 1, 1, 35)] {
        rows.extend(std::iter::repeat_n(vec![z, r, y], n));
    }
    // 50 rows per arm within each Z, so the fitted propensity is 0.5 everywhere
    let data = Dataset::new(vars, rows).unwrap();
    let tree = EventTree::new(data.variables().to_vec()).unwrap();
    let frame = CausalFrame::new(&tree, 1, 2).unwrap();
    let ipw = baseline_ipw(&data, &frame).unwrap().ate;
    assert!((ipw - naive_difference(&data, 1, 2)).abs() < 1e-9);
}

#[test]
fn null_generator_estimators_are_accurate() {
    let tree = binary_tree(&["Z1", "Z2", "Z3", "R", "Y"]);
    let mut groups: Vec<Vec<usize>> = (0..5).map(|i| (0..1usize << i).collect()).collect();
    groups[4] = vec![0; 16];
    let staging = Staging::from_groups(&tree, &groups).unwrap();
    let mut g = rng(99);
    let params = (0..5)
        .map(|i| {
            (0..staging.n_stages(i))
                .map(|_| {
                    let p = g.random_range(0.2..0.8);
                    vec![1.0 - p, p]
                })
                .collect()
        })
        .collect();
    let truth = StagedTreeModel::new(tree.clone(), staging, params).unwrap();
    let frame = CausalFrame::new(&tree, 3, 4).unwrap();
    assert_eq!(ate_randomized(&truth, &frame).unwrap().ate, 0.0);
    for est in SimEstimator::ALL {
        let mut errors: Vec<f64> = (0..9u64)
            .filter_map(|s| estimate_simulated(est, &truth, &sample(&truth, 10_000, s).unwrap(), &frame).ok())
            .map(f64::abs)
            .collect();
        errors.sort_by(f64::total_cmp);
        assert!(errors.len() >= 5, "{} failed too often", est.name());
        assert!(errors[errors.len() / 2] < 0.05, "{} median {}", est.name(), errors[errors.len() / 2]);
    }
}

#[test]
fn random_joins_reduce_stage_counts() {
    let saturated = 1usize << 7;
    let mean: f64 = (0..100u64)
        .map(|s| random_staged_tree(8, 0.8, ParamDist::Exp, s).unwrap().staging().n_stages(7) as f64)
        .sum::<f64>()
        / 100.0;
    assert!(mean < saturated as f64);
}

#[test]
fn dag_staging_follows_parent_agreement() {
    for seed in 0..20u64 {
        let dag = random_dag_with_parents(6, 0.4, 0.0, ParamDist::Unif, seed).unwrap();
        let tree = dag.model.tree();
        for i in 0..tree.p() {
            let parents = &dag.parents[i];
            for a in tree.contexts(i) {
                for b in tree.contexts(i) {
                    let agree = parents.iter().all(|&q| a.prefix[q] == b.prefix[q]);
                    let ia = tree.context_index(i, &a.prefix).unwrap();
                    let ib = tree.context_index(i, &b.prefix).unwrap();
                    let same = dag.model.staging().stage_index(i, ia) == dag.model.staging().stage_index(i, ib);
                    assert_eq!(agree, same);
                }
            }
        }
    }
}

#[test]
fn true_effect_ignores_treatment_marginal() {
    for seed in 0..20u64 {
        let truth = random_generator(seed, 3..=5);
        let frame = stagedcausal::simulation::simulation_frame(truth.tree()).unwrap();
        let base = ate_randomized(&truth, &frame).unwrap().ate;
        let other = stagedcausal::causal::randomize_treatment_with(&truth, &frame, &[0.3, 0.7]).unwrap();
        let y = frame.outcome;
        let p1 = conditional(&other, y, &[(frame.treatment, 1)]).unwrap().get(&[1]);
        let p0 = conditional(&other, y, &[(frame.treatment, 0)]).unwrap().get(&[1]);
        assert!((p1 - p0 - base).abs() < 1e-12);
        assert!((base - brute_force_ate(&truth, frame.treatment, y, 1, 1)).abs() < 1e-12);
    }
}

#[test]
fn pruned_counts_match_rows() {
    let data = enso_data();
    let tree = EventTree::new(enso_vars()).unwrap().prune_unobserved(&data).unwrap();
    let counts = ContextCounts::collect(&tree, &data).unwrap();
    assert_eq!(counts.n(), data.n_rows());
    assert_eq!(marginal(&enso_model(), &[0]).unwrap().probabilities().iter().sum::<f64>(), 1.0);
}
