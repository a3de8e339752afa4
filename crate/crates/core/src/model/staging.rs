use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::tree::{Context, EventTree};

/// Stage identifier. Labels are scoped by variable: `("1", Z)` and
/// `("1", Y)` are different stages.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StageKey {
    pub variable: usize,
    pub label: String,
}

/// One entry of an explicit (unvalidated) stage assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageAssignment {
    pub context: Context,
    pub stage: StageKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StagingViolation {
    MissingContext(Context),
    UnknownContext(Context),
    DuplicateContext(Context),
    CrossVariableStage { context: Context, stage: StageKey },
}

impl fmt::Display for StagingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StagingViolation::MissingContext(c) => {
                write!(f, "missing context: variable {} prefix {:?}", c.variable, c.prefix)
            }
            StagingViolation::UnknownContext(c) => {
                write!(f, "unknown context: variable {} prefix {:?}", c.variable, c.prefix)
            }
            StagingViolation::DuplicateContext(c) => {
                write!(f, "context assigned twice: variable {} prefix {:?}", c.variable, c.prefix)
            }
            StagingViolation::CrossVariableStage { context, stage } => write!(
                f,
                "context of variable {} assigned to stage {:?} of variable {}",
                context.variable, stage.label, stage.variable
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<StagingViolation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks an explicit stage assignment against a tree.
pub fn validate_staging(tree: &EventTree, entries: &[StageAssignment]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for e in entries {
        let c = &e.context;
        let idx = if c.variable < tree.p() {
            tree.context_index(c.variable, &c.prefix).ok()
        } else {
            None
        };
        let Some(idx) = idx.filter(|&i| tree.contains(c.variable, i)) else {
            violations.push(StagingViolation::UnknownContext(c.clone()));
            continue;
        };
        if !seen.insert((c.variable, idx)) {
            violations.push(StagingViolation::DuplicateContext(c.clone()));
        }
        if e.stage.variable != c.variable {
            violations.push(StagingViolation::CrossVariableStage {
                context: c.clone(),
                stage: e.stage.clone(),
            });
        }
    }
    for i in 0..tree.p() {
        for idx in tree.context_indices(i) {
            if !seen.contains(&(i, idx)) {
                violations.push(StagingViolation::MissingContext(tree.context(i, idx)));
            }
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct VariableStaging {
    stage_of: BTreeMap<usize, usize>,
    labels: Vec<String>,
}

impl VariableStaging {
    /// Stage indices follow the order of first appearance over contexts.
    fn from_labels(labels_by_ctx: BTreeMap<usize, String>) -> Self {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut labels = Vec::new();
        let mut stage_of = BTreeMap::new();
        for (ctx, label) in labels_by_ctx {
            let s = *index.entry(label.clone()).or_insert_with(|| {
                labels.push(label);
                labels.len() - 1
            });
            stage_of.insert(ctx, s);
        }
        VariableStaging { stage_of, labels }
    }

    fn from_groups(contexts: &[usize], groups: &[usize]) -> Self {
        let mut canon: HashMap<usize, usize> = HashMap::new();
        let mut stage_of = BTreeMap::new();
        for (&ctx, &g) in contexts.iter().zip(groups) {
            let next = canon.len();
            let s = *canon.entry(g).or_insert(next);
            stage_of.insert(ctx, s);
        }
        let labels = (1..=canon.len()).map(|k| k.to_string()).collect();
        VariableStaging { stage_of, labels }
    }
}

/// Partition of the contexts of every variable into stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Staging {
    vars: Vec<VariableStaging>,
}

impl Staging {
    /// Every context in its own stage, labelled `1..k` in canonical order.
    pub fn saturated(tree: &EventTree) -> Staging {
        let vars = (0..tree.p())
            .map(|i| {
                let ctxs: Vec<usize> = tree.context_indices(i).collect();
                let groups: Vec<usize> = (0..ctxs.len()).collect();
                VariableStaging::from_groups(&ctxs, &groups)
            })
            .collect();
        Staging { vars }
    }

    /// One stage per variable.
    pub fn independence(tree: &EventTree) -> Staging {
        let vars = (0..tree.p())
            .map(|i| {
                let ctxs: Vec<usize> = tree.context_indices(i).collect();
                VariableStaging::from_groups(&ctxs, &vec![0; ctxs.len()])
            })
            .collect();
        Staging { vars }
    }

    /// Builds a staging from explicit entries, rejecting any violation.
    pub fn from_assignments(tree: &EventTree, entries: &[StageAssignment]) -> Result<Staging> {
        let report = validate_staging(tree, entries);
        if !report.is_empty() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::Staging(msgs.join("; ")));
        }
        let mut per_var = vec![BTreeMap::new(); tree.p()];
        for e in entries {
            let idx = tree.context_index(e.context.variable, &e.context.prefix)?;
            per_var[e.context.variable].insert(idx, e.stage.label.clone());
        }
        Ok(Staging {
            vars: per_var.into_iter().map(VariableStaging::from_labels).collect(),
        })
    }

    /// Builds a staging from per-variable maps `context index -> label`.
    pub fn from_labels(tree: &EventTree, per_var: Vec<BTreeMap<usize, String>>) -> Result<Staging> {
        let staging = Staging {
            vars: per_var.into_iter().map(VariableStaging::from_labels).collect(),
        };
        staging.check(tree)?;
        Ok(staging)
    }

    /// Builds a staging from group ids: `groups[i][k]` is the group of the
    /// `k`-th retained context of variable `i`. Stages are relabelled
    /// `1..k` by first appearance.
    pub fn from_groups(tree: &EventTree, groups: &[Vec<usize>]) -> Result<Staging> {
        if groups.len() != tree.p() {
            return Err(Error::Staging("group vector count differs from variable count".into()));
        }
        let mut vars = Vec::with_capacity(tree.p());
        for (i, g) in groups.iter().enumerate() {
            let ctxs: Vec<usize> = tree.context_indices(i).collect();
            if ctxs.len() != g.len() {
                return Err(Error::Staging(format!(
                    "variable {}: {} groups for {} contexts",
                    i,
                    g.len(),
                    ctxs.len()
                )));
            }
            vars.push(VariableStaging::from_groups(&ctxs, g));
        }
        Ok(Staging { vars })
    }

    /// Replaces the stages of one variable, keeping the rest.
    pub fn with_variable_labels(
        &self,
        tree: &EventTree,
        variable: usize,
        labels: BTreeMap<usize, String>,
    ) -> Result<Staging> {
        let mut out = self.clone();
        out.vars[variable] = VariableStaging::from_labels(labels);
        out.check(tree)?;
        Ok(out)
    }

    /// Same stages relabelled `1..k` in order of first appearance.
    pub fn canonical(&self) -> Staging {
        let vars = self
            .vars
            .iter()
            .map(|v| {
                let ctxs: Vec<usize> = v.stage_of.keys().copied().collect();
                let groups: Vec<usize> = v.stage_of.values().copied().collect();
                VariableStaging::from_groups(&ctxs, &groups)
            })
            .collect();
        Staging { vars }
    }

    pub fn p(&self) -> usize {
        self.vars.len()
    }

    pub fn n_stages(&self, variable: usize) -> usize {
        self.vars[variable].labels.len()
    }

    pub fn total_stages(&self) -> usize {
        self.vars.iter().map(|v| v.labels.len()).sum()
    }

    #[inline]
    pub fn stage_index(&self, variable: usize, ctx: usize) -> Option<usize> {
        self.vars[variable].stage_of.get(&ctx).copied()
    }

    pub fn stage_label(&self, variable: usize, stage: usize) -> &str {
        &self.vars[variable].labels[stage]
    }

    pub fn stage_labels(&self, variable: usize) -> &[String] {
        &self.vars[variable].labels
    }

    pub fn stage_by_label(&self, variable: usize, label: &str) -> Option<usize> {
        self.vars[variable].labels.iter().position(|l| l == label)
    }

    /// `(context index, stage index)` pairs of a variable in canonical order.
    pub fn assignment(&self, variable: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vars[variable].stage_of.iter().map(|(&c, &s)| (c, s))
    }

    /// Context indices of each stage of a variable.
    pub fn members(&self, variable: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_stages(variable)];
        for (c, s) in self.assignment(variable) {
            out[s].push(c);
        }
        out
    }

    /// The stage partition of a variable as sorted blocks of context
    /// indices, independent of labels.
    pub fn partition(&self, variable: usize) -> Vec<Vec<usize>> {
        let mut blocks = self.members(variable);
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        blocks
    }

    pub fn same_partition(&self, other: &Staging, variable: usize) -> bool {
        self.partition(variable) == other.partition(variable)
    }

    pub fn assignments(&self, tree: &EventTree) -> Vec<StageAssignment> {
        let mut out = Vec::new();
        for (i, v) in self.vars.iter().enumerate() {
            for (&ctx, &s) in &v.stage_of {
                out.push(StageAssignment {
                    context: tree.context(i, ctx),
                    stage: StageKey {
                        variable: i,
                        label: v.labels[s].clone(),
                    },
                });
            }
        }
        out
    }

    pub fn validate(&self, tree: &EventTree) -> ValidationReport {
        if self.p() != tree.p() {
            return ValidationReport {
                violations: tree
                    .contexts(0)
                    .map(StagingViolation::MissingContext)
                    .collect(),
            };
        }
        validate_staging(tree, &self.assignments(tree))
    }

    pub(crate) fn check(&self, tree: &EventTree) -> Result<()> {
        let report = self.validate(tree);
        if report.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Staging(msgs.join("; ")))
        }
    }
}

/// Each context in its own stage.
pub fn saturated_staging(tree: &EventTree) -> Staging {
    Staging::saturated(tree)
}

/// One stage per variable (full mutual independence).
pub fn independence_staging(tree: &EventTree) -> Staging {
    Staging::independence(tree)
}
