//! Learned cut scoring: a bipartite graph encoding of (instance, cut) pairs,
//! a small message-passing network with hand-written reverse-mode gradients,
//! a cross-entropy training loop, and argmax inference with seeded
//! tie-breaking.
//!
//! Everything here runs on `f64`. The encoding boundary in [`encode`] is the
//! only place exact rationals from the solver side are converted to floats
//! (besides the score labels themselves), and all downstream computation is
//! deterministic given the seeds in [`TrainConfig`].

mod encode;
mod model;
mod train;

pub use encode::{encode, CutGraph, GraphEdge};
pub use model::{GnnModel, GradSummary};
pub use train::{
    loss, make_targets, select_cut, train, Example, TargetScore, TrainConfig, TrainOutcome,
    TrainReport,
};

use thiserror::Error;

/// Errors from encoding, scoring, and training.
#[derive(Debug, Error, PartialEq)]
pub enum GnnError {
    #[error("cut set is empty")]
    EmptyCuts,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("record {id} has no scored cuts; filter the dataset before training")]
    UnscoredRecord { id: String },
    #[error("targets are not a probability vector: {detail}")]
    BadTargets { detail: String },
    #[error("got {scores} scores but {targets} targets")]
    LengthMismatch { scores: usize, targets: usize },
    #[error("temperature must be positive and finite, got {tau}")]
    BadTemperature { tau: f64 },
    #[error("checkpoint declares {expected} parameters but carries {got}")]
    BadCheckpoint { expected: usize, got: usize },
    #[error("checkpoint is not valid model JSON: {detail}")]
    MalformedCheckpoint { detail: String },
    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },
}
