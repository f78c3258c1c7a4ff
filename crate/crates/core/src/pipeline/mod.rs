//! Experiment configuration, the resumable end-to-end run, and reporting.

mod grid;
mod report;
mod run;
mod spec;

pub use grid::{table1_cells, table1_grid, DROP_FRACTIONS, TABLE_AGGREGATIONS};
pub use report::{mean_over_seeds, read_csv, render_text, sort_rows, write_csv, ResultRow};
pub use run::{build_infosphere, content_key, default_year, graph_stats, load_corpus, run, run_all, RunOptions, RunOutcome, CACHE_ENV};
pub use spec::{CorpusSpec, ExperimentSpec, InfosphereSpec, Resolved};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("stage train failed: {0}")]
    Diverged(String),
    #[error("report: {0}")]
    Report(String),
}

impl PipelineError {
    /// Process exit status: 1 usage, 2 data, 3 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Spec(_) => 1,
            PipelineError::Stage { .. } | PipelineError::Report(_) => 2,
            PipelineError::Diverged(_) => 3,
        }
    }
}
