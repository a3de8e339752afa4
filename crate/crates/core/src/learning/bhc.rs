use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::learning::score::{multinomial_ll, score_counts, ScoredStaging};
use crate::model::{ContextCounts, Dataset, EventTree, Staging};

struct Stage {
    contexts: Vec<usize>,
    counts: Vec<u64>,
    ll: f64,
}

/// Per-variable state: active stages and the cached BIC gain of merging
/// each pair (upper triangle, `gain[a][b]` for `a < b`).
struct VarState {
    stages: Vec<Option<Stage>>,
    gain: Vec<Vec<f64>>,
    penalty: f64,
}

impl VarState {
    fn pair_gain(&self, a: usize, b: usize) -> f64 {
        let (sa, sb) = (self.stages[a].as_ref().unwrap(), self.stages[b].as_ref().unwrap());
        let merged: Vec<u64> = sa.counts.iter().zip(&sb.counts).map(|(x, y)| x + y).collect();
        multinomial_ll(&merged) - sa.ll - sb.ll + self.penalty
    }

    fn best(&self) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..self.stages.len() {
            if self.stages[a].is_none() {
                continue;
            }
            for b in a + 1..self.stages.len() {
                if self.stages[b].is_none() {
                    continue;
                }
                let g = self.gain[a][b];
                if best.is_none_or(|(bg, _, _)| g > bg) {
                    best = Some((g, a, b));
                }
            }
        }
        best
    }
}

/// Greedy backward merging from the saturated staging.
pub fn learn_bhc(tree: &EventTree, data: &Dataset) -> Result<ScoredStaging> {
    learn_bhc_from(tree, data, &Staging::saturated(tree))
}

/// Greedy backward merging from an arbitrary initial staging.
pub fn learn_bhc_from(tree: &EventTree, data: &Dataset, init: &Staging) -> Result<ScoredStaging> {
    learn_bhc_with_trace(tree, data, init).map(|(s, _)| s)
}

/// Like [`learn_bhc_from`], also returning the BIC after the initial staging
/// and after every accepted merge.
///
/// Each step applies the within-variable merge of largest BIC gain over all
/// variables; exact ties go to the smaller variable index, then to the pair
/// whose stages come first in context order. Only strictly positive gains
/// are accepted.
pub fn learn_bhc_with_trace(
    tree: &EventTree,
    data: &Dataset,
    init: &Staging,
) -> Result<(ScoredStaging, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Data("cannot learn stages from an empty dataset".into()));
    }
    init.check(tree)?;
    let counts = ContextCounts::collect(tree, data)?;
    let ln_n = (data.n_rows() as f64).ln();
    let start = score_counts(tree, init, &counts);
    let mut trace = vec![start.bic];
    let mut bic = start.bic;

    // stages are ordered by their first context, so index order is the
    // canonical order used for tie-breaking
    let mut states: Vec<VarState> = (0..tree.p())
        .map(|i| {
            let stage_counts = counts.stage_counts(tree, init, i);
            let stages: Vec<Option<Stage>> = init
                .members(i)
                .into_iter()
                .zip(stage_counts)
                .map(|(contexts, c)| {
                    Some(Stage {
                        contexts,
                        ll: multinomial_ll(&c),
                        counts: c,
                    })
                })
                .collect();
            let m = stages.len();
            let mut st = VarState {
                stages,
                gain: vec![vec![f64::NEG_INFINITY; m]; m],
                penalty: 0.5 * (tree.arity(i) - 1) as f64 * ln_n,
            };
            for a in 0..m {
                for b in a + 1..m {
                    st.gain[a][b] = st.pair_gain(a, b);
                }
            }
            st
        })
        .collect();

    loop {
        let mut pick: Option<(f64, usize, usize, usize)> = None;
        for (i, st) in states.iter().enumerate() {
            if let Some((g, a, b)) = st.best() {
                let better = match pick {
                    None => true,
                    Some((pg, ..)) => g.partial_cmp(&pg) == Some(Ordering::Greater),
                };
                if better {
                    pick = Some((g, i, a, b));
                }
            }
        }
        let Some((g, i, a, b)) = pick else { break };
        if g <= 0.0 {
            break;
        }
        let st = &mut states[i];
        let sb = st.stages[b].take().unwrap();
        let sa = st.stages[a].as_mut().unwrap();
        sa.contexts.extend(sb.contexts);
        sa.contexts.sort_unstable();
        for (x, y) in sa.counts.iter_mut().zip(&sb.counts) {
            *x += y;
        }
        sa.ll = multinomial_ll(&sa.counts);
        for k in 0..st.stages.len() {
            if k == a || st.stages[k].is_none() {
                continue;
            }
            let (lo, hi) = if k < a { (k, a) } else { (a, k) };
            st.gain[lo][hi] = st.pair_gain(lo, hi);
        }
        bic += g;
        trace.push(bic);
    }

    let groups: Vec<Vec<usize>> = states
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let ctxs: Vec<usize> = tree.context_indices(i).collect();
            let mut g = vec![0; ctxs.len()];
            for (s, stage) in st.stages.iter().enumerate() {
                for c in stage.iter().flat_map(|x| &x.contexts) {
                    let k = ctxs.binary_search(c).expect("context of the tree");
                    g[k] = s;
                }
            }
            g
        })
        .collect();
    let staging = Staging::from_groups(tree, &groups)?;
    Ok((score_counts(tree, &staging, &counts), trace))
}
