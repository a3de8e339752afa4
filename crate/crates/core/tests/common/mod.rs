#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stagedcausal::inference::sample;
use stagedcausal::simulation::{random_staged_tree, ParamDist};
use stagedcausal::{Dataset, EventTree, StagedTreeModel, Staging, Variable};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every full outcome tuple, first variable most significant.
pub fn all_points(arities: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &k in arities {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |l| {
                    let mut x = prefix.clone();
                    x.push(l);
                    x
                })
            })
            .collect();
    }
    out
}

pub fn arities(tree: &EventTree) -> Vec<usize> {
    (0..tree.p()).map(|i| tree.arity(i)).collect()
}

/// Mixed-radix context index computed from scratch.
pub fn ctx_of(tree: &EventTree, prefix: &[usize]) -> usize {
    prefix.iter().enumerate().fold(0, |acc, (j, &x)| acc * tree.arity(j) + x)
}

/// Transition probability of `x[i]` in its context, read straight from
/// the stage parameters.
pub fn theta(model: &StagedTreeModel, x: &[usize], i: usize) -> f64 {
    let tree = model.tree();
    let ctx = ctx_of(tree, &x[..i]);
    match model.staging().stage_index(i, ctx) {
        Some(s) => model.parameters(i, s)[x[i]],
        None => 0.0,
    }
}

/// Joint probability as a product of transitions.
pub fn product_joint(model: &StagedTreeModel, x: &[usize]) -> f64 {
    let mut p = 1.0;
    for i in 0..x.len() {
        if p == 0.0 {
            return 0.0;
        }
        p *= theta(model, x, i);
    }
    p
}

/// Probability of a prefix of length `x.len()`.
pub fn prefix_prob(model: &StagedTreeModel, x: &[usize]) -> f64 {
    product_joint(model, x)
}

/// Standardization sum over covariate prefixes, from stage parameters.
pub fn brute_force_ate(model: &StagedTreeModel, r: usize, y: usize, treated: usize, positive: usize) -> f64 {
    let tree = model.tree();
    let untreated = 1 - treated;
    let mut ate = 0.0;
    for z in all_points(&arities(tree)[..r]) {
        let pz = prefix_prob(model, &z);
        if pz == 0.0 {
            continue;
        }
        let mut x1 = z.clone();
        x1.extend([treated, positive]);
        let mut x0 = z.clone();
        x0.extend([untreated, positive]);
        ate += pz * (theta(model, &x1, y) - theta(model, &x0, y));
    }
    ate
}

pub fn random_generator(seed: u64, p_range: std::ops::RangeInclusive<usize>) -> StagedTreeModel {
    let mut r = rng(seed);
    let p = r.random_range(p_range);
    let pi = [0.0, 0.5, 0.8, 1.0][r.random_range(0..4)];
    let dist = if r.random_bool(0.5) { ParamDist::Exp } else { ParamDist::Unif };
    random_staged_tree(p, pi, dist, r.random()).expect("generator")
}

pub fn binary_tree(names: &[&str]) -> EventTree {
    EventTree::new(names.iter().map(|n| Variable::binary(*n)).collect()).unwrap()
}

/// Data where every (covariates, treatment) cell is observed.
pub fn dataset_without_empty_cells(seed: u64, p_range: std::ops::RangeInclusive<usize>, n: usize) -> Dataset {
    for attempt in 0.. {
        let model = random_generator(seed * 1000 + attempt, p_range.clone());
        let data = sample(&model, n, seed ^ (attempt << 32)).unwrap();
        let p = data.p();
        let cells = 1usize << (p - 1);
        let mut seen = vec![false; cells];
        for row in data.rows() {
            seen[ctx_of(model.tree(), &row[..p - 1])] = true;
        }
        if seen.iter().all(|&s| s) {
            return data;
        }
    }
    unreachable!()
}

/// Random partition of `n` items into at most `max_k` nonempty groups.
pub fn random_groups(r: &mut ChaCha8Rng, n: usize, max_k: usize) -> Vec<usize> {
    let k = r.random_range(1..=n.min(max_k));
    let mut g: Vec<usize> = (0..n).map(|i| if i < k { i } else { r.random_range(0..k) }).collect();
    for i in (1..n).rev() {
        g.swap(i, r.random_range(0..=i));
    }
    g
}

/// Planted binary model whose stage vectors differ by at least `gap` in
/// total variation. Stage probabilities come from an evenly spaced grid.
pub fn planted_model(seed: u64, p: usize, gap: f64) -> StagedTreeModel {
    let mut r = rng(seed);
    let tree = binary_tree(&["A", "B", "C", "D", "E", "F"][..p]);
    let grid: Vec<f64> = (0..).map(|i| 0.2 + gap * i as f64).take_while(|&v| v <= 0.8 + 1e-9).collect();
    let groups: Vec<Vec<usize>> = (0..p).map(|i| random_groups(&mut r, 1 << i, grid.len())).collect();
    let staging = Staging::from_groups(&tree, &groups).unwrap();
    let params = (0..p)
        .map(|i| {
            let mut values = grid.clone();
            for j in (1..values.len()).rev() {
                values.swap(j, r.random_range(0..=j));
            }
            (0..staging.n_stages(i)).map(|s| vec![1.0 - values[s], values[s]]).collect()
        })
        .collect();
    StagedTreeModel::new(tree, staging, params).unwrap()
}

pub struct ParsedDot {
    pub nodes: std::collections::HashMap<String, std::collections::HashMap<String, String>>,
    pub edges: Vec<(String, String, std::collections::HashMap<String, String>)>,
}

/// Parses DOT text with an independent grammar implementation.
pub fn parse_dot(text: &str) -> ParsedDot {
    use dot_parser::{ast, canonical};
    let unquote = |s: String| s.trim_matches('"').to_string();
    let graph = ast::Graph::try_from(text).expect("DOT parses");
    let graph = graph.filter_map(&|(k, v)| Some((Into::<String>::into(k), Into::<String>::into(v))));
    let graph = canonical::Graph::from(graph);
    let nodes = graph
        .nodes
        .set
        .into_iter()
        .map(|(id, n)| (unquote(id), n.attr.into_iter().map(|(k, v)| (unquote(k), unquote(v))).collect()))
        .collect();
    let edges = graph
        .edges
        .set
        .into_iter()
        .map(|e| (unquote(e.from), unquote(e.to), e.attr.into_iter().map(|(k, v)| (unquote(k), unquote(v))).collect()))
        .collect();
    ParsedDot { nodes, edges }
}
