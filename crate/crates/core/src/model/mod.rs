//! Event trees, stage partitions and fitted staged tree models.
//!
//! A staged tree model is an event tree over ordered categorical variables
//! whose internal nodes (contexts) are partitioned into stages. All contexts
//! in a stage share one conditional probability vector, so the model is
//! fitted by pooling the counts of every context in a stage.

mod dataset;
mod fit;
mod staging;
mod tree;

pub use dataset::Dataset;
pub use fit::{fit_mle, ContextCounts, FitMetadata, StagedTreeModel, PROBABILITY_TOLERANCE};
pub(crate) use fit::estimate_vector;
pub use staging::{
    independence_staging, saturated_staging, validate_staging, StageAssignment, StageKey, Staging,
    StagingViolation, ValidationReport,
};
pub use tree::{build_event_tree, Context, EventTree, Variable};
