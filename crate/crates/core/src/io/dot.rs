use std::collections::BTreeSet;
use std::fmt::Write;

use crate::causal::{PositivityReport, PositivityStatus};
use crate::model::{EventTree, StagedTreeModel};

/// Stage fill colors, assigned per variable in stage order.
pub const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

/// Node shapes used once the palette has been cycled through.
const SHAPES: [&str; 4] = ["circle", "box", "diamond", "hexagon"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DotOptions {
    /// Append transition probabilities to edge labels.
    pub show_probs: bool,
    /// Contexts `(variable, context index)` drawn with a red border.
    pub highlight: BTreeSet<(usize, usize)>,
}

impl DotOptions {
    /// Highlights the treatment contexts a positivity report flags as one
    /// sided.
    pub fn with_positivity(mut self, tree: &EventTree, report: &PositivityReport) -> Self {
        if let Some(r) = tree.variable_index(&report.treatment) {
            for c in &report.contexts {
                if matches!(c.status, PositivityStatus::OnlyTreated | PositivityStatus::OnlyUntreated) {
                    if let Ok(idx) = tree.context_index(r, &c.prefix) {
                        self.highlight.insert((r, idx));
                    }
                }
            }
        }
        self
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Integer labels sort numerically, before any other label.
fn stage_rank(labels: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| {
        let key = |s: &str| s.parse::<u64>().map_or((1, 0, s.to_string()), |n| (0, n, String::new()));
        key(&labels[a]).cmp(&key(&labels[b]))
    });
    let mut rank = vec![0; labels.len()];
    for (r, &s) in order.iter().enumerate() {
        rank[s] = r;
    }
    rank
}

/// Graphviz drawing of the tree: one node per retained context and leaf,
/// nodes colored by stage.
pub fn export_dot(model: &StagedTreeModel, options: &DotOptions) -> String {
    let tree = model.tree();
    let staging = model.staging();
    let mut out = String::new();
    out.push_str("digraph staged_tree {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [style=filled, fontsize=10, width=0.3, height=0.3, fixedsize=false];\n");
    out.push_str("  edge [fontsize=9];\n");
    for i in 0..tree.p() {
        let labels = staging.stage_labels(i);
        let rank = stage_rank(labels);
        let numbered = labels.len() > PALETTE.len();
        for ctx in tree.context_indices(i) {
            let s = staging.stage_index(i, ctx).unwrap();
            let r = rank[s];
            let color = PALETTE[r % PALETTE.len()];
            let shape = SHAPES[(r / PALETTE.len()) % SHAPES.len()];
            let label = if numbered { labels[s].as_str() } else { "" };
            let tooltip = format!(
                "{} stage {}",
                tree.describe_context(&tree.context(i, ctx)),
                labels[s]
            );
            let border = if options.highlight.contains(&(i, ctx)) {
                ", color=\"red\", penwidth=3"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  n{i}_{ctx} [fillcolor={}, shape={shape}, label={}, tooltip={}{border}];",
                quote(color),
                quote(label),
                quote(&tooltip)
            );
        }
    }
    let last = tree.p() - 1;
    for ctx in tree.context_indices(last) {
        for l in 0..tree.arity(last) {
            let leaf = tree.child_index(last, ctx, l);
            let _ = writeln!(out, "  leaf{leaf} [shape=point, fillcolor=\"black\", label=\"\"];");
        }
    }
    for i in 0..tree.p() {
        let theta_of = |ctx| model.context_parameters(i, ctx).unwrap();
        for ctx in tree.context_indices(i) {
            for (l, level) in tree.variable(i).levels.iter().enumerate() {
                let child = tree.child_index(i, ctx, l);
                let target = if i == last {
                    format!("leaf{child}")
                } else if tree.contains(i + 1, child) {
                    format!("n{}_{child}", i + 1)
                } else {
                    continue;
                };
                let label = if options.show_probs {
                    format!("{level} ({:.3})", theta_of(ctx)[l])
                } else {
                    level.clone()
                };
                let _ = writeln!(out, "  n{i}_{ctx} -> {target} [label={}];", quote(&label));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_labels_sort_numerically() {
        let labels: Vec<String> = ["10", "2", "b", "1", "a"].iter().map(|s| s.to_string()).collect();
        assert_eq!(stage_rank(&labels), vec![2, 1, 4, 0, 3]);
    }

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(quote("a\"b\\"), "\"a\\\"b\\\\\"");
    }
}
