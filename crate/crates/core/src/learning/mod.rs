//! Stage-structure learning by BIC: greedy backward merging of stages and
//! hierarchical clustering of empirical conditionals with a BIC-chosen cut.

mod bhc;
mod hclust;
mod score;

pub use bhc::{learn_bhc, learn_bhc_from, learn_bhc_with_trace};
pub use hclust::{average_linkage, learn_hclust, Dendrogram, Merge};
pub use score::{bic, log_likelihood, tv_distance, ScoredStaging};
pub(crate) use score::tv;

use crate::error::Result;
use crate::model::{Dataset, EventTree};

/// Which stage learner to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Learner {
    Bhc,
    Hclust,
}

impl Learner {
    pub fn learn(self, tree: &EventTree, data: &Dataset) -> Result<ScoredStaging> {
        match self {
            Learner::Bhc => learn_bhc(tree, data),
            Learner::Hclust => learn_hclust(tree, data),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Learner::Bhc => "bhc",
            Learner::Hclust => "hclust",
        }
    }
}

impl std::str::FromStr for Learner {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bhc" => Ok(Learner::Bhc),
            "hclust" => Ok(Learner::Hclust),
            _ => Err(crate::error::Error::InvalidArgument(format!(
                "unknown learner {s:?} (expected bhc or hclust)"
            ))),
        }
    }
}
