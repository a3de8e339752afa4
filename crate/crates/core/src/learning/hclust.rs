use crate::error::{Error, Result};
use crate::learning::score::{multinomial_ll, score_counts, tv, ScoredStaging};
use crate::model::{estimate_vector, ContextCounts, Dataset, EventTree, Staging};

/// One agglomeration step: clusters `a` and `b` (indices of their smallest
/// member) joined at `height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// Merges sorted by nondecreasing height.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Cluster id of each point after applying the first `steps` merges.
    pub fn cut(&self, steps: usize) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n);
        for m in &self.merges[..steps] {
            uf.union(m.a, m.b);
        }
        (0..self.n).map(|i| uf.find(i)).collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Root is always the smaller representative.
    fn union(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        (lo, hi)
    }
}

/// Average-linkage clustering of `points` under total variation distance,
/// by the nearest-neighbour chain algorithm.
pub fn average_linkage(points: &[Vec<f64>]) -> Dendrogram {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = tv(&points[i], &points[j]);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    let mut remaining = n;
    while remaining > 1 {
        if chain.is_empty() {
            chain.push((0..n).find(|&i| active[i]).unwrap());
        }
        loop {
            let top = *chain.last().unwrap();
            let prev = chain.len().checked_sub(2).map(|k| chain[k]);
            // prefer the previous chain element on ties so the chain terminates
            let mut nn = prev;
            let mut best = prev.map_or(f64::INFINITY, |p| d[top][p]);
            for k in 0..n {
                if active[k] && k != top && d[top][k] < best {
                    best = d[top][k];
                    nn = Some(k);
                }
            }
            let nn = nn.unwrap();
            if Some(nn) == prev {
                chain.pop();
                chain.pop();
                let (lo, hi) = if top < nn { (top, nn) } else { (nn, top) };
                raw.push((lo, hi, best));
                for k in 0..n {
                    if active[k] && k != lo && k != hi {
                        let x = (size[lo] as f64 * d[lo][k] + size[hi] as f64 * d[hi][k])
                            / (size[lo] + size[hi]) as f64;
                        d[lo][k] = x;
                        d[k][lo] = x;
                    }
                }
                size[lo] += size[hi];
                active[hi] = false;
                remaining -= 1;
                break;
            }
            chain.push(nn);
        }
    }
    // stable sort keeps discovery order among equal heights
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));
    // report merges by smallest member of each cluster
    let mut uf = UnionFind::new(n);
    let mut min_member: Vec<usize> = (0..n).collect();
    let merges = raw
        .into_iter()
        .map(|(a, b, height)| {
            let (ra, rb) = (uf.find(a), uf.find(b));
            let (ma, mb) = (min_member[ra], min_member[rb]);
            let (lo, _) = uf.union(ra, rb);
            min_member[lo] = ma.min(mb);
            Merge {
                a: ma.min(mb),
                b: ma.max(mb),
                height,
            }
        })
        .collect();
    Dendrogram { n, merges }
}

/// Clusters the empirical conditional distributions of each variable and
/// keeps, per variable, the dendrogram cut with the highest BIC. Contexts
/// with no data get the uniform vector. Equal scores go to fewer stages.
pub fn learn_hclust(tree: &EventTree, data: &Dataset) -> Result<ScoredStaging> {
    if data.is_empty() {
        return Err(Error::Data("cannot learn stages from an empty dataset".into()));
    }
    let counts = ContextCounts::collect(tree, data)?;
    let ln_n = (data.n_rows() as f64).ln();
    let mut groups = Vec::with_capacity(tree.p());
    for i in 0..tree.p() {
        let arity = tree.arity(i);
        let ctx_counts: Vec<Vec<u64>> = tree
            .context_indices(i)
            .map(|c| counts.get(i, c).map_or_else(|| vec![0; arity], <[u64]>::to_vec))
            .collect();
        let points: Vec<Vec<f64>> = ctx_counts.iter().map(|c| estimate_vector(c, 0.0).0).collect();
        let dendro = average_linkage(&points);

        let penalty = 0.5 * (arity - 1) as f64 * ln_n;
        let mut cluster_counts = ctx_counts.clone();
        let mut cluster_ll: Vec<f64> = ctx_counts.iter().map(|c| multinomial_ll(c)).collect();
        let mut score: f64 = cluster_ll.iter().sum::<f64>() - penalty * points.len() as f64;
        let (mut best_score, mut best_steps) = (score, 0);
        for (step, m) in dendro.merges.iter().enumerate() {
            let moved = std::mem::take(&mut cluster_counts[m.b]);
            for (x, y) in cluster_counts[m.a].iter_mut().zip(&moved) {
                *x += y;
            }
            let merged = multinomial_ll(&cluster_counts[m.a]);
            score += merged - cluster_ll[m.a] - cluster_ll[m.b] + penalty;
            cluster_ll[m.a] = merged;
            cluster_ll[m.b] = 0.0;
            if score >= best_score {
                best_score = score;
                best_steps = step + 1;
            }
        }
        groups.push(dendro.cut(best_steps));
    }
    let staging = Staging::from_groups(tree, &groups)?;
    Ok(score_counts(tree, &staging, &counts))
}
