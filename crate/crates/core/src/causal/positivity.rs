use serde::Serialize;

use crate::causal::frame::CausalFrame;
use crate::error::{Error, Result};
use crate::inference::ENUMERATION_LIMIT;
use crate::model::{Dataset, EventTree, Staging};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityStatus {
    Ok,
    OnlyTreated,
    OnlyUntreated,
    Unobserved,
}

impl PositivityStatus {
    fn from_counts(treated: u64, untreated: u64) -> Self {
        match (treated, untreated) {
            (0, 0) => PositivityStatus::Unobserved,
            (_, 0) => PositivityStatus::OnlyTreated,
            (0, _) => PositivityStatus::OnlyUntreated,
            _ => PositivityStatus::Ok,
        }
    }

    pub fn is_flagged(self) -> bool {
        self != PositivityStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextPositivity {
    pub context: String,
    pub prefix: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub n_treated: u64,
    pub n_untreated: u64,
    pub status: PositivityStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePositivity {
    pub stage: String,
    pub contexts: Vec<String>,
    pub n_treated: u64,
    pub n_untreated: u64,
    pub status: PositivityStatus,
}

/// Treated and untreated counts per covariate context and per treatment
/// stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivityReport {
    pub treatment: String,
    pub contexts: Vec<ContextPositivity>,
    pub stages: Vec<StagePositivity>,
}

impl PositivityReport {
    pub fn flagged_contexts(&self) -> impl Iterator<Item = &ContextPositivity> {
        self.contexts.iter().filter(|c| c.status.is_flagged())
    }

    pub fn flagged_stages(&self) -> impl Iterator<Item = &StagePositivity> {
        self.stages.iter().filter(|s| s.status.is_flagged())
    }

    /// True when some observed context or stage lacks an arm.
    pub fn has_violations(&self) -> bool {
        let one_sided = |s: PositivityStatus| s.is_flagged() && s != PositivityStatus::Unobserved;
        self.contexts.iter().any(|c| one_sided(c.status)) || self.stages.iter().any(|s| one_sided(s.status))
    }
}

/// Counts every covariate context of the full tree, including unobserved
/// ones, and aggregates over the treatment stages of `staging` when given.
/// `tree` may be pruned; the staging must belong to it.
pub fn positivity_report(
    tree: &EventTree,
    data: &Dataset,
    frame: &CausalFrame,
    staging: Option<&Staging>,
) -> Result<PositivityReport> {
    frame.check(tree)?;
    tree.check_dataset(data)?;
    let r = frame.treatment;
    let full = tree.unpruned();
    let n_ctx = full.n_full_contexts(r);
    if n_ctx as u128 > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            cells: n_ctx as u128,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut counts = vec![[0u64; 2]; n_ctx];
    for row in data.rows() {
        let ctx = full.context_index(r, &row[..r])?;
        let arm = usize::from(row[r] != frame.treated_level);
        counts[ctx][arm] += 1;
    }
    if let Some(s) = staging {
        s.check(tree)?;
    }
    let stage_of = |ctx: usize| staging.and_then(|s| s.stage_index(r, ctx));
    let contexts: Vec<ContextPositivity> = (0..n_ctx)
        .map(|ctx| {
            let c = full.context(r, ctx);
            let [t, u] = counts[ctx];
            ContextPositivity {
                context: describe(&full, &c.prefix),
                stage: stage_of(ctx).map(|s| staging.unwrap().stage_label(r, s).to_string()),
                prefix: c.prefix,
                n_treated: t,
                n_untreated: u,
                status: PositivityStatus::from_counts(t, u),
            }
        })
        .collect();
    let mut stages = Vec::new();
    if let Some(s) = staging {
        for (k, members) in s.members(r).into_iter().enumerate() {
            let (mut t, mut u) = (0, 0);
            for &ctx in &members {
                t += counts[ctx][0];
                u += counts[ctx][1];
            }
            stages.push(StagePositivity {
                stage: s.stage_label(r, k).to_string(),
                contexts: members.iter().map(|&c| contexts[c].context.clone()).collect(),
                n_treated: t,
                n_untreated: u,
                status: PositivityStatus::from_counts(t, u),
            });
        }
    }
    Ok(PositivityReport {
        treatment: tree.variable(r).name.clone(),
        contexts,
        stages,
    })
}

fn describe(tree: &EventTree, prefix: &[usize]) -> String {
    if prefix.is_empty() {
        return "all".into();
    }
    let parts: Vec<String> = prefix
        .iter()
        .enumerate()
        .map(|(j, &c)| format!("{}={}", tree.variable(j).name, tree.variable(j).levels[c]))
        .collect();
    parts.join(",")
}
