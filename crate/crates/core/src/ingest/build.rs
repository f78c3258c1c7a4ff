use std::io::BufRead;

use super::{EdgeCounts, IngestError, IngestStats, InputFormat, NodeCounts, PaperRecord, V14Reader};
use crate::graph::{EdgeTriple, GraphBuilder, HeteroTemporalGraph, NodeRef, NodeType, Relation};

/// Incremental record-to-graph assembly. Citations are resolved at
/// [`GraphAssembler::finish`] because references may point forward in the
/// file.
#[derive(Debug, Default)]
pub struct GraphAssembler {
    builder: GraphBuilder,
    pending_refs: Vec<(u32, String)>,
    stats: IngestStats,
}

impl GraphAssembler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_builder(builder: GraphBuilder) -> Self {
        GraphAssembler {
            builder,
            ..Default::default()
        }
    }

    pub fn push(&mut self, rec: PaperRecord) -> Result<(), IngestError> {
        if self.builder.lookup(NodeType::Paper, &rec.paper_id).is_some() {
            self.stats.duplicate_papers += 1;
            return Ok(());
        }
        let paper = self.builder.add_paper(&rec.paper_id, rec.year);
        for a in &rec.author_ids {
            let author = self.builder.add_node(NodeType::Author, a);
            self.builder.add_edge(EdgeTriple::WRITES, author, paper)?;
        }
        for t in &rec.topic_names {
            let topic = self.builder.add_node(NodeType::Topic, t.trim());
            self.builder.add_edge(EdgeTriple::DEALS_WITH, paper, topic)?;
        }
        self.pending_refs
            .extend(rec.reference_ids.into_iter().map(|r| (paper.index, r)));
        Ok(())
    }

    pub fn finish(mut self) -> Result<(HeteroTemporalGraph, IngestStats), IngestError> {
        for (src, r) in std::mem::take(&mut self.pending_refs) {
            match self.builder.lookup(NodeType::Paper, &r) {
                None => self.stats.dangling_references += 1,
                Some(dst) if dst.index == src => self.stats.self_citations += 1,
                Some(dst) => self.builder.add_edge(EdgeTriple::CITES, NodeRef::paper(src), dst)?,
            }
        }
        let graph = self.builder.build()?;
        let mut stats = self.stats;
        stats.nodes = NodeCounts {
            author: graph.node_count(NodeType::Author),
            paper: graph.node_count(NodeType::Paper),
            topic: graph.node_count(NodeType::Topic),
        };
        stats.edges = EdgeCounts {
            writes: graph.edge_count(Relation::Writes),
            deals_with: graph.edge_count(Relation::DealsWith),
            cites: graph.edge_count(Relation::Cites),
        };
        Ok((graph, stats))
    }
}

/// Builds the graph from already-parsed records.
pub fn build_graph(
    records: impl IntoIterator<Item = PaperRecord>,
) -> Result<(HeteroTemporalGraph, IngestStats), IngestError> {
    let mut asm = GraphAssembler::new();
    let mut parsed = 0;
    for r in records {
        asm.push(r)?;
        parsed += 1;
    }
    let (g, mut stats) = asm.finish()?;
    stats.records_parsed = parsed;
    Ok((g, stats))
}

/// Parses and builds in one streaming pass.
pub fn ingest_stream<R: BufRead>(
    input: R,
    format: InputFormat,
) -> Result<(HeteroTemporalGraph, IngestStats), IngestError> {
    let mut reader = V14Reader::new(input, format);
    let mut asm = GraphAssembler::new();
    for rec in reader.by_ref() {
        asm.push(rec?)?;
    }
    let (g, mut stats) = asm.finish()?;
    let c = reader.counters();
    stats.records_parsed = c.records_parsed;
    stats.records_skipped = c.records_skipped;
    Ok((g, stats))
}
