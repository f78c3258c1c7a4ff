//! Co-authorship labels and balanced train/validation/test datasets.
//!
//! Positives are author pairs who write together for the first time in year
//! `y + 1`, both already present at `y`. Negatives are drawn by rejection
//! from pairs of authors present at `y` who have not written together up to
//! and including `y + 1`. Each pair lands in a split by the hash of its
//! canonical form; positives and negatives are split separately with the same
//! quotas, so every split stays balanced.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, HeteroTemporalGraph, NodeRef, NodeType, Relation, Snapshot};
use crate::rng::{keyed_rng, pair_hash};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("{0} and {1} cannot form an author pair")]
    BadPair(NodeRef, NodeRef),
    #[error("year {0} is outside the corpus range {1}..={2}")]
    YearOutOfRange(i32, i32, i32),
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("need {needed} negative pairs but only {available} of {universe} authors' pairs are free")]
    NegativeSpace {
        needed: usize,
        available: usize,
        universe: usize,
    },
    #[error("dataset invariant violated: {0}")]
    Invariant(String),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Two distinct authors, lower index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AuthorPair {
    pub a: NodeRef,
    pub b: NodeRef,
}

impl AuthorPair {
    pub fn new(x: NodeRef, y: NodeRef) -> Result<Self, LinkError> {
        if x.ty != NodeType::Author || y.ty != NodeType::Author || x == y {
            return Err(LinkError::BadPair(x, y));
        }
        Ok(Self::canonical(x.index, y.index))
    }

    fn canonical(i: u32, j: u32) -> Self {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        AuthorPair {
            a: NodeRef::author(lo),
            b: NodeRef::author(hi),
        }
    }

    pub fn hash(&self) -> u64 {
        pair_hash(self.a.index as u64, self.b.index as u64)
    }
}

impl fmt::Display for AuthorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    #[serde(rename = "author_a")]
    pub a: NodeRef,
    #[serde(rename = "author_b")]
    pub b: NodeRef,
    pub label: bool,
    pub split: Split,
}

impl Example {
    pub fn pair(&self) -> AuthorPair {
        AuthorPair { a: self.a, b: self.b }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkDataset {
    pub year: i32,
    /// Positives first, each block in split order then hash order.
    pub examples: Vec<Example>,
}

impl LinkDataset {
    pub fn positives(&self) -> impl Iterator<Item = AuthorPair> + '_ {
        self.examples.iter().filter(|e| e.label).map(Example::pair)
    }

    pub fn negatives(&self) -> impl Iterator<Item = AuthorPair> + '_ {
        self.examples.iter().filter(|e| !e.label).map(Example::pair)
    }

    pub fn split(&self, split: Split) -> Vec<Example> {
        self.examples.iter().filter(|e| e.split == split).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Checks balance and label correctness against the co-author sets of
    /// `y` and `y + 1`.
    pub fn check(&self, coauthors_y: &HashSet<AuthorPair>, coauthors_y1: &HashSet<AuthorPair>) -> Result<(), LinkError> {
        let bad = |m: String| Err(LinkError::Invariant(m));
        let pos: BTreeSet<AuthorPair> = self.positives().collect();
        let neg: BTreeSet<AuthorPair> = self.negatives().collect();
        if pos.len() + neg.len() != self.examples.len() {
            return bad("duplicate pairs".into());
        }
        if pos.len() != neg.len() {
            return bad(format!("{} positives vs {} negatives", pos.len(), neg.len()));
        }
        if let Some(p) = pos.intersection(&neg).next() {
            return bad(format!("{p} is both positive and negative"));
        }
        if let Some(p) = pos.iter().find(|p| coauthors_y.contains(p)) {
            return bad(format!("positive {p} already co-authored"));
        }
        if let Some(p) = neg.iter().find(|p| coauthors_y1.contains(p)) {
            return bad(format!("negative {p} co-authored by the next year"));
        }
        for s in Split::ALL {
            let (p, n) = self
                .examples
                .iter()
                .filter(|e| e.split == s)
                .fold((0, 0), |(p, n), e| if e.label { (p + 1, n) } else { (p, n + 1) });
            if p != n {
                return bad(format!("{s} split has {p} positives and {n} negatives"));
            }
        }
        Ok(())
    }

    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<(), LinkError> {
        for e in &self.examples {
            serde_json::to_writer(&mut w, e).map_err(|source| LinkError::Json { line: 0, source })?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(r: R, year: i32) -> Result<Self, LinkError> {
        let mut examples = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            examples.push(serde_json::from_str(&line).map_err(|source| LinkError::Json { line: i + 1, source })?);
        }
        Ok(LinkDataset { year, examples })
    }
}

fn paper_pairs(snapshot: &Snapshot<'_>, paper: NodeRef) -> Vec<AuthorPair> {
    let authors: Vec<u32> = snapshot
        .neighbor_iter(paper, Relation::Writes, Direction::Reverse)
        .map(|a| a.index)
        .collect();
    let mut out = Vec::with_capacity(authors.len() * authors.len().saturating_sub(1) / 2);
    for (i, &x) in authors.iter().enumerate() {
        for &y in &authors[i + 1..] {
            out.push(AuthorPair::canonical(x, y));
        }
    }
    out
}

fn pairs_of(snapshot: &Snapshot<'_>, papers: Vec<NodeRef>) -> Vec<AuthorPair> {
    let mut pairs: Vec<AuthorPair> = papers.par_iter().flat_map_iter(|&p| paper_pairs(snapshot, p)).collect();
    pairs.par_sort_unstable();
    pairs.dedup();
    pairs
}

/// Pairs of authors sharing at least one paper of the snapshot.
pub fn coauthor_pairs(snapshot: &Snapshot<'_>) -> BTreeSet<AuthorPair> {
    pairs_of(snapshot, snapshot.nodes(NodeType::Paper).collect()).into_iter().collect()
}

fn coauthor_hashset(snapshot: &Snapshot<'_>) -> HashSet<AuthorPair> {
    pairs_of(snapshot, snapshot.nodes(NodeType::Paper).collect()).into_iter().collect()
}

fn check_year(graph: &HeteroTemporalGraph, y: i32) -> Result<(), LinkError> {
    let (lo, hi) = graph.year_range().ok_or(LinkError::EmptyCorpus)?;
    if y < lo || y + 1 > hi {
        return Err(LinkError::YearOutOfRange(y, lo, hi));
    }
    Ok(())
}

fn new_pairs(snapshot_y: &Snapshot<'_>, snapshot_y1: &Snapshot<'_>, old: &HashSet<AuthorPair>) -> BTreeSet<AuthorPair> {
    let g = snapshot_y.graph();
    let y1 = snapshot_y1.year();
    let fresh: Vec<NodeRef> = snapshot_y1
        .nodes(NodeType::Paper)
        .filter(|&p| g.paper_year(p) == y1)
        .collect();
    pairs_of(snapshot_y1, fresh)
        .into_iter()
        .filter(|p| snapshot_y.contains(p.a) && snapshot_y.contains(p.b) && !old.contains(p))
        .collect()
}

/// Co-author pairs new in `y + 1` whose authors both exist at `y`.
pub fn positive_labels(graph: &HeteroTemporalGraph, y: i32) -> Result<BTreeSet<AuthorPair>, LinkError> {
    check_year(graph, y)?;
    let (sy, sy1) = (graph.snapshot(y), graph.snapshot(y + 1));
    Ok(new_pairs(&sy, &sy1, &coauthor_hashset(&sy)))
}

/// Exactly `count` distinct pairs over `universe`, none of them in
/// `blocked`. Rejection sampling; dense instances fall back to sampling from
/// the explicit list of free pairs.
pub fn negative_sample(
    count: usize,
    universe: &[NodeRef],
    blocked: &HashSet<AuthorPair>,
    seed: u64,
) -> Result<BTreeSet<AuthorPair>, LinkError> {
    let mut rng = keyed_rng(seed, "negatives", &[count as u64, universe.len() as u64]);
    let n = universe.len();
    let total = n * n.saturating_sub(1) / 2;
    let members: HashSet<u32> = universe.iter().map(|a| a.index).collect();
    let blocked_inside = blocked
        .iter()
        .filter(|p| members.contains(&p.a.index) && members.contains(&p.b.index))
        .count();
    let available = total - blocked_inside;
    if available < count {
        return Err(LinkError::NegativeSpace {
            needed: count,
            available,
            universe: n,
        });
    }
    let mut out = BTreeSet::new();
    if available >= 2 * count.max(1) && available * 2 >= total {
        while out.len() < count {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i == j {
                continue;
            }
            let pair = AuthorPair::canonical(universe[i].index, universe[j].index);
            if !blocked.contains(&pair) {
                out.insert(pair);
            }
        }
    } else {
        let mut free = Vec::with_capacity(available);
        for i in 0..n {
            for j in i + 1..n {
                let pair = AuthorPair::canonical(universe[i].index, universe[j].index);
                if !blocked.contains(&pair) {
                    free.push(pair);
                }
            }
        }
        free.sort_unstable();
        out.extend(index::sample(&mut rng, free.len(), count).into_iter().map(|k| free[k]));
    }
    Ok(out)
}

/// Quotas of an 80/10/10 split of `n` items.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let train = (n as f64 * 0.8).round() as usize;
    let val = ((n as f64 * 0.1).round() as usize).min(n - train);
    [train, val, n - train - val]
}

fn assign(pairs: &BTreeSet<AuthorPair>, label: bool) -> Vec<Example> {
    let mut ordered: Vec<AuthorPair> = pairs.iter().copied().collect();
    ordered.sort_by_key(|p| (p.hash(), *p));
    let [train, val, _] = split_sizes(ordered.len());
    ordered
        .into_iter()
        .enumerate()
        .map(|(i, p)| Example {
            a: p.a,
            b: p.b,
            label,
            split: if i < train {
                Split::Train
            } else if i < train + val {
                Split::Val
            } else {
                Split::Test
            },
        })
        .collect()
}

/// Builds and checks the balanced dataset for prediction year `y`.
pub fn build_dataset(graph: &HeteroTemporalGraph, y: i32, seed: u64) -> Result<LinkDataset, LinkError> {
    check_year(graph, y)?;
    let (sy, sy1) = (graph.snapshot(y), graph.snapshot(y + 1));
    let old = coauthor_hashset(&sy);
    let positives = new_pairs(&sy, &sy1, &old);
    let blocked = coauthor_hashset(&sy1);
    let universe: Vec<NodeRef> = sy.nodes(NodeType::Author).collect();
    let negatives = negative_sample(positives.len(), &universe, &blocked, crate::rng::derive_seed(seed, "dataset", &[y as u64]))?;
    let mut examples = assign(&positives, true);
    examples.extend(assign(&negatives, false));
    let ds = LinkDataset { year: y, examples };
    ds.check(&old, &blocked)?;
    Ok(ds)
}
