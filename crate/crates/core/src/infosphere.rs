//! Infospheres turned into exposure edges.
//!
//! An infosphere is a per-author list of edges the author is assumed to have
//! seen. Author-future infospheres pass their seedgraph and expansion edges
//! through unchanged. Popularity and random infospheres attach each selected
//! paper to the author with an `(author, writes, paper)` exposure edge. The
//! message graph keeps all of these in channels of their own, apart from the
//! history edges.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expansion::{random_infosphere, ColoredInfosphere};
use crate::graph::{Direction, Edge, NodeRef, NodeType, Relation, Snapshot};
use crate::rng::keyed_rng;
use crate::seedgraph::Seedgraph;

#[derive(Debug, Error)]
pub enum InfosphereError {
    #[error("drop fraction {0} is outside [0, 1]")]
    DropFraction(f64),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where an exposure edge came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExposureSource {
    AuthorFuture,
    TopPaper,
    TopPaperPerTopic,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExposureEdge {
    #[serde(flatten)]
    pub edge: Edge,
    pub source: ExposureSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfosphereEdgeSet {
    pub year: i32,
    /// Per author, edges in insertion order without duplicates.
    pub per_author: BTreeMap<NodeRef, Vec<ExposureEdge>>,
}

#[derive(Serialize, Deserialize)]
struct AuthorRow {
    year: i32,
    author: NodeRef,
    edges: Vec<ExposureEdge>,
}

impl InfosphereEdgeSet {
    pub fn empty(year: i32) -> Self {
        InfosphereEdgeSet {
            year,
            per_author: BTreeMap::new(),
        }
    }

    /// Appends edges for `author`, skipping ones it already has.
    pub fn extend(&mut self, author: NodeRef, edges: impl IntoIterator<Item = ExposureEdge>) {
        let list = self.per_author.entry(author).or_default();
        let mut seen: BTreeSet<Edge> = list.iter().map(|e| e.edge).collect();
        for e in edges {
            if seen.insert(e.edge) {
                list.push(e);
            }
        }
        if list.is_empty() {
            self.per_author.remove(&author);
        }
    }

    /// Number of (author, edge) entries.
    pub fn len(&self) -> usize {
        self.per_author.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeRef, &ExposureEdge)> + '_ {
        self.per_author
            .iter()
            .flat_map(|(&a, es)| es.iter().map(move |e| (a, e)))
    }

    /// The union over authors, sorted.
    pub fn distinct_edges(&self) -> BTreeSet<Edge> {
        self.iter().map(|(_, e)| e.edge).collect()
    }

    /// Checks that every endpoint is a member of `snapshot`.
    pub fn within(&self, snapshot: &Snapshot<'_>) -> bool {
        self.iter()
            .all(|(a, e)| snapshot.contains(a) && snapshot.contains(e.edge.src) && snapshot.contains(e.edge.dst))
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<(), InfosphereError> {
        for (&author, edges) in &self.per_author {
            let row = AuthorRow {
                year: self.year,
                author,
                edges: edges.clone(),
            };
            serde_json::to_writer(&mut w, &row).map_err(|e| InfosphereError::Json { line: 0, source: e })?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a dump written by [`InfosphereEdgeSet::write_ndjson`]. An empty
    /// dump carries no year; `year` is used then.
    pub fn read_ndjson<R: BufRead>(r: R, year: i32) -> Result<Self, InfosphereError> {
        let mut set = InfosphereEdgeSet::empty(year);
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: AuthorRow =
                serde_json::from_str(&line).map_err(|e| InfosphereError::Json { line: i + 1, source: e })?;
            set.year = row.year;
            set.extend(row.author, row.edges);
        }
        Ok(set)
    }
}

/// Citation in-degree of every paper inside a snapshot, with per-topic
/// rankings built once and shared across authors.
pub struct Popularity {
    in_degree: Vec<u32>,
    ranked: Vec<NodeRef>,
    by_topic: Vec<Vec<NodeRef>>,
}

impl Popularity {
    pub fn new(snapshot: &Snapshot<'_>) -> Self {
        let g = snapshot.graph();
        let mut in_degree = vec![0u32; g.node_count(NodeType::Paper)];
        let papers: Vec<NodeRef> = snapshot.nodes(NodeType::Paper).collect();
        for &p in &papers {
            in_degree[p.idx()] = snapshot.degree(p, Relation::Cites, Direction::Reverse) as u32;
        }
        let rank = |list: &mut Vec<NodeRef>| list.sort_by_key(|p| (std::cmp::Reverse(in_degree[p.idx()]), p.index));
        let mut ranked = papers;
        rank(&mut ranked);
        let by_topic = (0..g.node_count(NodeType::Topic) as u32)
            .map(|t| {
                let mut list: Vec<NodeRef> = snapshot
                    .neighbor_iter(NodeRef::topic(t), Relation::DealsWith, Direction::Reverse)
                    .collect();
                rank(&mut list);
                list
            })
            .collect();
        Popularity {
            in_degree,
            ranked,
            by_topic,
        }
    }

    pub fn in_degree(&self, paper: NodeRef) -> u32 {
        self.in_degree[paper.idx()]
    }

    pub fn top(&self, n: usize) -> &[NodeRef] {
        &self.ranked[..n.min(self.ranked.len())]
    }

    pub fn top_in_topic(&self, topic: NodeRef, n: usize) -> &[NodeRef] {
        let list = &self.by_topic[topic.idx()];
        &list[..n.min(list.len())]
    }

    /// The `n` most cited papers in each of the author's `m` most used
    /// topics, concatenated, first occurrence kept.
    pub fn top_per_topic(&self, snapshot: &Snapshot<'_>, author: NodeRef, m: usize, n: usize) -> Vec<NodeRef> {
        if m == 0 || n == 0 {
            return Vec::new();
        }
        let mut uses: BTreeMap<NodeRef, usize> = BTreeMap::new();
        for p in snapshot.neighbor_iter(author, Relation::Writes, Direction::Forward) {
            for t in snapshot.neighbor_iter(p, Relation::DealsWith, Direction::Forward) {
                *uses.entry(t).or_default() += 1;
            }
        }
        let mut topics: Vec<(NodeRef, usize)> = uses.into_iter().collect();
        topics.sort_by_key(|&(t, c)| (std::cmp::Reverse(c), t.index));
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &(t, _) in topics.iter().take(m) {
            for &p in self.top_in_topic(t, n) {
                if seen.insert(p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

pub fn top_papers(snapshot: &Snapshot<'_>, n: usize) -> Vec<NodeRef> {
    Popularity::new(snapshot).top(n).to_vec()
}

pub fn top_papers_per_topic(snapshot: &Snapshot<'_>, author: NodeRef, m: usize, n: usize) -> Vec<NodeRef> {
    Popularity::new(snapshot).top_per_topic(snapshot, author, m, n)
}

fn exposure(author: NodeRef, papers: &[NodeRef], source: ExposureSource) -> Vec<ExposureEdge> {
    papers
        .iter()
        .map(|&p| ExposureEdge {
            edge: Edge::new(author, Relation::Writes, p),
            source,
        })
        .collect()
}

/// Seedgraph and expansion edges, verbatim.
pub fn materialize_colored(year: i32, infospheres: &[ColoredInfosphere], source: ExposureSource) -> InfosphereEdgeSet {
    let mut set = InfosphereEdgeSet::empty(year);
    for info in infospheres {
        set.extend(info.author, info.edges.keys().map(|&edge| ExposureEdge { edge, source }));
    }
    set
}

/// One exposure edge per selected paper.
pub fn materialize_papers(year: i32, selections: &[(NodeRef, Vec<NodeRef>)], source: ExposureSource) -> InfosphereEdgeSet {
    let mut set = InfosphereEdgeSet::empty(year);
    for (author, papers) in selections {
        set.extend(*author, exposure(*author, papers, source));
    }
    set
}

/// The same `n` most cited papers for every author of the snapshot.
pub fn top_paper_infosphere(snapshot: &Snapshot<'_>, n: usize) -> InfosphereEdgeSet {
    let top = top_papers(snapshot, n);
    let selections: Vec<_> = snapshot.nodes(NodeType::Author).map(|a| (a, top.clone())).collect();
    materialize_papers(snapshot.year(), &selections, ExposureSource::TopPaper)
}

pub fn top_paper_per_topic_infosphere(snapshot: &Snapshot<'_>, m: usize, n: usize) -> InfosphereEdgeSet {
    let pop = Popularity::new(snapshot);
    let authors: Vec<NodeRef> = snapshot.nodes(NodeType::Author).collect();
    let selections: Vec<_> = authors
        .par_iter()
        .map(|&a| (a, pop.top_per_topic(snapshot, a, m, n)))
        .collect();
    materialize_papers(snapshot.year(), &selections, ExposureSource::TopPaperPerTopic)
}

/// Random papers for each seedgraph's author, as many as the seedgraph has
/// nodes besides the author.
pub fn random_paper_infosphere(snapshot: &Snapshot<'_>, seedgraphs: &[Seedgraph], seed: u64) -> InfosphereEdgeSet {
    let infos: Vec<ColoredInfosphere> = seedgraphs
        .par_iter()
        .map(|sg| {
            let size = sg.nodes.iter().filter(|&&n| n != sg.author).count();
            random_infosphere(snapshot, sg.author, size, seed).0
        })
        .collect();
    materialize_colored(snapshot.year(), &infos, ExposureSource::Random)
}

/// Removes `round(fraction * len)` entries chosen uniformly.
pub fn drop_infosphere(set: &InfosphereEdgeSet, fraction: f64, seed: u64) -> Result<InfosphereEdgeSet, InfosphereError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(InfosphereError::DropFraction(fraction));
    }
    let total = set.len();
    let removed = ((fraction * total as f64).round() as usize).min(total);
    let mut rng = keyed_rng(seed, "drop", &[set.year as u64, fraction.to_bits()]);
    let gone: BTreeSet<usize> = index::sample(&mut rng, total, removed).into_iter().collect();
    let mut out = InfosphereEdgeSet::empty(set.year);
    for (i, (author, e)) in set.iter().enumerate() {
        if !gone.contains(&i) {
            out.per_author.entry(author).or_default().push(*e);
        }
    }
    Ok(out)
}
