//! Corpus ingestion: the v14 citation-network JSON dump and a seeded
//! synthetic generator used for desk-scale experiments.

mod build;
mod synth;
mod v14;

pub use build::{build_graph, ingest_stream, GraphAssembler};
pub use synth::{synth_generate, synth_records, SynthConfig};
pub use v14::{parse_v14_stream, write_v14_ndjson, InputFormat, ParseCounters, V14Reader};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("input is not a JSON array or newline-delimited objects: {0}")]
    Structure(String),
    #[error("degenerate synthetic configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// One paper of the corpus as read from disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    pub author_ids: Vec<String>,
    pub topic_names: Vec<String>,
    pub reference_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCounts {
    pub author: usize,
    pub paper: usize,
    pub topic: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub writes: usize,
    pub deals_with: usize,
    pub cites: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records_parsed: u64,
    pub records_skipped: u64,
    pub duplicate_papers: u64,
    pub dangling_references: u64,
    pub self_citations: u64,
    pub nodes: NodeCounts,
    pub edges: EdgeCounts,
}
