//! Academic social networks as heterogeneous temporal graphs, simulated
//! recommender exposure ("infospheres"), and a from-scratch heterogeneous
//! GraphSAGE link predictor for next-year co-authorship.

pub mod expansion;
pub mod gnn;
pub mod graph;
pub mod infosphere;
pub mod ingest;
pub mod link;
pub mod pipeline;
pub mod rng;
pub mod seedgraph;
