//! Heterogeneous GraphSAGE-style encoder with a pairwise decoder, trained by
//! hand-written backpropagation and Adam.
//!
//! Everything is `f64` and single-threaded, so a fixed seed gives bit-equal
//! parameters across runs.

mod checkpoint;
mod graph;
mod model;
mod train;

pub use checkpoint::Checkpoint;
pub use graph::{Channel, ChannelKind, MessageGraph, MessageOptions, CHANNELS};
pub use model::{decode, Aggregation, ConvParams, DecoderParams, Model, ModelConfig, Params};
pub use train::{auc, evaluate, metrics, train, AdamState, EarlyStopping, EpochRecord, History, Metrics, TrainConfig, Trained};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training configuration {0}")]
    Config(String),
    #[error("non-finite loss {0}")]
    NonFinite(f64),
    #[error("training diverged in epoch {epoch} (loss {loss})")]
    Diverged {
        epoch: usize,
        loss: f64,
        last_finite: Box<Model>,
    },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
