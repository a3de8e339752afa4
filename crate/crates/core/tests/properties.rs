//! Randomized invariants over generated models and datasets.

mod common;

use common::*;
use proptest::prelude::*;
use stagedcausal::inference::{conditional, intervene, joint_prob, sample, InterventionSpec};
use stagedcausal::io::{read_csv, write_csv};
use stagedcausal::learning::tv_distance;
use stagedcausal::{
    ate_ps_stratified, bic, bootstrap_ate, fit_mle, learn_bhc, randomize_treatment, BootstrapConfig, CausalFrame,
    EventTree, Staging,
};

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum::<f64>() + 1e-9;
        v.iter().map(|x| (x + 1e-9 / v.len() as f64) / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_sums_to_one(seed in any::<u64>()) {
        let model = random_generator(seed, 2..=6);
        let total: f64 = all_points(&arities(model.tree())).iter().map(|x| joint_prob(&model, x).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intervened_joint_sums_to_one(seed in any::<u64>(), var in 0usize..6, level in 0usize..2) {
        let model = random_generator(seed, 2..=6);
        let var = var % model.p();
        let done = intervene(&model, &InterventionSpec::single(var, level)).unwrap();
        let points = all_points(&arities(done.tree()));
        let total: f64 = points.iter().map(|x| joint_prob(&done, x).unwrap()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for x in points.iter().filter(|x| x[var] != level) {
            prop_assert_eq!(joint_prob(&done, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn conditional_on_full_prefix_is_the_stage_vector(seed in any::<u64>(), pick in any::<u64>()) {
        let model = random_generator(seed, 2..=6);
        let target = (pick as usize) % model.p();
        let prefix: Vec<usize> = (0..target).map(|i| ((pick >> (8 + i)) & 1) as usize).collect();
        let given: Vec<(usize, usize)> = prefix.iter().copied().enumerate().collect();
        let ctx = ctx_of(model.tree(), &prefix);
        let stage = model.staging().stage_index(target, ctx).unwrap();
        let table = conditional(&model, target, &given).unwrap();
        prop_assert_eq!(table.probabilities(), model.parameters(target, stage));
    }

    #[test]
    fn tv_is_a_metric(p in simplex(4), q in simplex(4), r in simplex(4)) {
        let d = |a: &[f64], b: &[f64]| tv_distance(a, b).unwrap();
        prop_assert_eq!(d(&p, &q), d(&q, &p));
        prop_assert!(d(&p, &p).abs() < 1e-15);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d(&p, &q)));
    }

    #[test]
    fn ps_stratified_ate_is_bounded_and_weights_normalize(seed in 0u64..10_000) {
        let data = dataset_without_empty_cells(seed, 3..=5, 300);
        let tree = EventTree::new(data.variables().to_vec()).unwrap();
        let model = fit_mle(&tree, &learn_bhc(&tree, &data).unwrap().staging, &data, 0.0).unwrap();
        let frame = CausalFrame::new(&tree, data.p() - 2, data.p() - 1).unwrap();
        let est = ate_ps_stratified(&model, &data, &frame).unwrap();
        prop_assert!((-1.0..=1.0).contains(&est.ate));
        let w: f64 = est.per_stratum.iter().map(|s| s.weight).sum();
        prop_assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn randomizing_keeps_other_conditionals(seed in any::<u64>()) {
        let model = random_generator(seed, 3..=6);
        let p = model.p();
        let frame = CausalFrame::new(model.tree(), p - 2, p - 1).unwrap();
        let rand = randomize_treatment(&model, &frame).unwrap();
        let tree = model.tree();
        for i in (0..p).filter(|&i| i != p - 2) {
            for ctx in tree.context_indices(i) {
                let a = model.parameters(i, model.staging().stage_index(i, ctx).unwrap());
                let b = rand.parameters(i, rand.staging().stage_index(i, ctx).unwrap());
                prop_assert_eq!(a, b);
            }
        }
        prop_assert_eq!(rand.staging().n_stages(p - 2), 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bhc_never_scores_below_saturated(seed in any::<u64>(), n in 50usize..800) {
        let data = sample(&random_generator(seed, 2..=5), n, seed).unwrap();
        let tree = EventTree::new(data.variables().to_vec()).unwrap();
        let learned = learn_bhc(&tree, &data).unwrap();
        let saturated = bic(&tree, &Staging::saturated(&tree), &data).unwrap();
        prop_assert!(learned.bic >= saturated.bic - 1e-9);
    }

    #[test]
    fn bootstrap_is_deterministic(seed in 0u64..1000, boot_seed in any::<u64>()) {
        let data = dataset_without_empty_cells(seed, 3..=4, 200);
        let tree = EventTree::new(data.variables().to_vec()).unwrap();
        let frame = CausalFrame::new(&tree, data.p() - 2, data.p() - 1).unwrap();
        let config = BootstrapConfig { replicates: 10, seed: boot_seed, ..BootstrapConfig::default() };
        let a = bootstrap_ate(&data, &frame, &config).unwrap();
        let b = bootstrap_ate(&data, &frame, &config).unwrap();
        prop_assert_eq!(&a.replicates, &b.replicates);
        let ci = a.ci.unwrap();
        prop_assert!(ci.lower <= ci.upper);
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>(), n in 1usize..300) {
        let data = sample(&random_generator(seed, 2..=6), n, seed).unwrap();
        let mut buf = Vec::new();
        write_csv(&data, &mut buf).unwrap();
        prop_assert_eq!(read_csv(buf.as_slice(), Some(data.variables())).unwrap(), data);
    }
}
