//! Per-author seedgraphs: shortest connections from the elements an author
//! touches in year `y + 1` back into the year-`y` snapshot.
//!
//! The search is a frontier BFS that grows one frontier from the author and
//! one from every seed element, one hop at a time, and retires a seed as soon
//! as its frontier meets the author's. Traversal ignores edge direction; the
//! stored edges keep their native direction.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, Edge, Incident, NodeRef, NodeType, Relation, Snapshot};

pub const DEFAULT_HOP_LIMIT: usize = 10;

#[derive(Debug, Error)]
pub enum SeedError {
    #[error("author {0} does not exist in the graph")]
    UnknownAuthor(NodeRef),
    #[error("{0} is not an author")]
    NotAnAuthor(NodeRef),
    #[error("snapshots must be consecutive years of one graph (got {0} and {1})")]
    SnapshotMismatch(i32, i32),
    #[error("invalid seedgraph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Elements of an author's next-year history that already exist in `G_y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FutureSeeds {
    pub author: NodeRef,
    pub year: i32,
    pub elements: BTreeSet<NodeRef>,
}

/// New co-authors, cited papers and topics of the papers `author` publishes
/// in `y + 1`, restricted to nodes of `snapshot_y`.
pub fn future_history(
    author: NodeRef,
    snapshot_y: &Snapshot<'_>,
    snapshot_y1: &Snapshot<'_>,
) -> Result<FutureSeeds, SeedError> {
    let g = snapshot_y.graph();
    if !std::ptr::eq(g, snapshot_y1.graph()) || snapshot_y1.year() != snapshot_y.year() + 1 {
        return Err(SeedError::SnapshotMismatch(snapshot_y.year(), snapshot_y1.year()));
    }
    if author.ty != NodeType::Author {
        return Err(SeedError::NotAnAuthor(author));
    }
    if !g.contains(author) {
        return Err(SeedError::UnknownAuthor(author));
    }
    let y1 = snapshot_y1.year();
    let mut elements = BTreeSet::new();
    let new_papers = snapshot_y1
        .neighbor_iter(author, Relation::Writes, Direction::Forward)
        .filter(|&p| g.paper_year(p) == y1);
    for paper in new_papers {
        let linked = snapshot_y1
            .neighbor_iter(paper, Relation::Writes, Direction::Reverse)
            .chain(snapshot_y1.neighbor_iter(paper, Relation::Cites, Direction::Forward))
            .chain(snapshot_y1.neighbor_iter(paper, Relation::DealsWith, Direction::Forward));
        for node in linked {
            if node != author && snapshot_y.contains(node) {
                elements.insert(node);
            }
        }
    }
    Ok(FutureSeeds {
        author,
        year: snapshot_y.year(),
        elements,
    })
}

/// BFS frontier rooted at one node, remembering how every node was reached.
#[derive(Debug, Clone)]
pub struct Frontier {
    root: NodeRef,
    parent: HashMap<NodeRef, Option<(NodeRef, Edge)>>,
    layer: Vec<NodeRef>,
    depth: usize,
}

impl Frontier {
    pub fn new(root: NodeRef) -> Self {
        let mut parent = HashMap::new();
        parent.insert(root, None);
        Frontier {
            root,
            parent,
            layer: vec![root],
            depth: 0,
        }
    }

    pub fn root(&self) -> NodeRef {
        self.root
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        self.parent.contains_key(&node)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn is_exhausted(&self) -> bool {
        self.layer.is_empty()
    }

    /// Nodes discovered by the most recent expansion, ascending.
    pub fn last_layer(&self) -> &[NodeRef] {
        &self.layer
    }

    pub fn reached(&self) -> impl Iterator<Item = NodeRef> + '_ {
        self.parent.keys().copied()
    }

    /// Grows the frontier by one hop. Layer nodes are processed in ascending
    /// order and the first node to discover a neighbor becomes its parent.
    pub fn expand(&mut self, snapshot: &Snapshot<'_>, scratch: &mut Vec<Incident>) {
        let mut next = Vec::new();
        for &u in &self.layer {
            snapshot.incident_into(u, scratch);
            for inc in scratch.iter() {
                if let Entry::Vacant(slot) = self.parent.entry(inc.node) {
                    slot.insert(Some((u, inc.edge)));
                    next.push(inc.node);
                }
            }
        }
        next.sort_unstable();
        self.layer = next;
        self.depth += 1;
    }

    /// Walks parents from `node` back to the root: nodes from `node` to the
    /// root and the edges between them.
    pub fn chain(&self, node: NodeRef) -> (Vec<NodeRef>, Vec<Edge>) {
        let mut nodes = vec![node];
        let mut edges = Vec::new();
        let mut cur = node;
        while let Some(Some((p, e))) = self.parent.get(&cur) {
            nodes.push(*p);
            edges.push(*e);
            cur = *p;
        }
        (nodes, edges)
    }
}

/// Nodes reached by both frontiers, ascending by `(type, index)`.
pub fn compare_frontiers(author_frontier: &Frontier, seed_frontier: &Frontier) -> Vec<NodeRef> {
    let (small, large) = if author_frontier.len() <= seed_frontier.len() {
        (author_frontier, seed_frontier)
    } else {
        (seed_frontier, author_frontier)
    };
    let mut out: Vec<NodeRef> = small.reached().filter(|&n| large.contains(n)).collect();
    out.sort_unstable();
    out
}

/// Overlaps introduced by the latest layer of `grown`. Earlier layers had
/// none, so this equals [`compare_frontiers`] at every check point.
fn fresh_overlaps(grown: &Frontier, other: &Frontier) -> Option<NodeRef> {
    grown.last_layer().iter().copied().find(|&n| other.contains(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPath {
    pub seed: NodeRef,
    /// Author first, seed last.
    pub nodes: Vec<NodeRef>,
    /// `edges[i]` joins `nodes[i]` and `nodes[i + 1]`, in native direction.
    pub edges: Vec<Edge>,
}

impl SeedPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seedgraph {
    pub author: NodeRef,
    pub year: i32,
    pub nodes: BTreeSet<NodeRef>,
    pub edges: BTreeSet<Edge>,
    pub paths: Vec<SeedPath>,
    pub unreachable: Vec<NodeRef>,
    /// Seeds given up because the hop limit was reached.
    pub hop_limited: usize,
}

impl Seedgraph {
    pub fn empty(author: NodeRef, year: i32) -> Self {
        Seedgraph {
            author,
            year,
            nodes: BTreeSet::new(),
            edges: BTreeSet::new(),
            paths: Vec::new(),
            unreachable: Vec::new(),
            hop_limited: 0,
        }
    }

    pub fn from_paths(
        author: NodeRef,
        year: i32,
        paths: Vec<SeedPath>,
        unreachable: Vec<NodeRef>,
        hop_limited: usize,
    ) -> Self {
        let mut sg = Seedgraph::empty(author, year);
        for p in &paths {
            sg.nodes.extend(p.nodes.iter().copied());
            sg.edges.extend(p.edges.iter().copied());
        }
        sg.paths = paths;
        sg.unreachable = unreachable;
        sg.hop_limited = hop_limited;
        sg
    }
}

fn join(author_side: &Frontier, seed_side: &Frontier, meet: NodeRef) -> SeedPath {
    let (mut nodes, mut edges) = author_side.chain(meet);
    nodes.reverse();
    edges.reverse();
    let (seed_nodes, seed_edges) = seed_side.chain(meet);
    nodes.extend_from_slice(&seed_nodes[1..]);
    edges.extend(seed_edges);
    SeedPath {
        seed: seed_side.root(),
        nodes,
        edges,
    }
}

/// Builds the seedgraph of `seeds.author` in `snapshot_y`.
///
/// Each round expands the author frontier and then every live seed frontier
/// by one hop, comparing frontiers after every expansion. Seeds whose
/// frontier dies out, or whose connection would exceed `hop_limit` edges,
/// are recorded as unreachable.
pub fn build_seedgraph(snapshot_y: &Snapshot<'_>, seeds: &FutureSeeds, hop_limit: usize) -> Seedgraph {
    let author = seeds.author;
    let mut paths = Vec::new();
    let mut unreachable = Vec::new();
    let mut hop_limited = 0;
    let mut live: Vec<Frontier> = Vec::new();
    for &s in &seeds.elements {
        if s == author || !snapshot_y.contains(s) || !snapshot_y.contains(author) {
            unreachable.push(s);
        } else {
            live.push(Frontier::new(s));
        }
    }
    let mut author_f = Frontier::new(author);
    let mut scratch = Vec::new();

    while !live.is_empty() {
        // both sides share the seed depth, so one test bounds every seed
        let seed_depth = live[0].depth();
        if author_f.depth() + 1 + seed_depth > hop_limit {
            hop_limited += live.len();
            unreachable.extend(live.drain(..).map(|f| f.root()));
            break;
        }
        author_f.expand(snapshot_y, &mut scratch);
        live.retain(|sf| match fresh_overlaps(&author_f, sf) {
            Some(meet) => {
                paths.push(join(&author_f, sf, meet));
                false
            }
            None => true,
        });
        if live.is_empty() || author_f.depth() + seed_depth + 1 > hop_limit {
            continue;
        }
        let mut still = Vec::with_capacity(live.len());
        for mut sf in live.drain(..) {
            sf.expand(snapshot_y, &mut scratch);
            if let Some(meet) = fresh_overlaps(&sf, &author_f) {
                paths.push(join(&author_f, &sf, meet));
            } else if sf.is_exhausted() {
                unreachable.push(sf.root());
            } else {
                still.push(sf);
            }
        }
        live = still;
        if author_f.is_exhausted() && live.iter().all(|f| f.is_exhausted()) {
            unreachable.extend(live.drain(..).map(|f| f.root()));
        }
    }
    paths.sort_by_key(|p| p.seed);
    unreachable.sort_unstable();
    Seedgraph::from_paths(author, snapshot_y.year(), paths, unreachable, hop_limited)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedgraphStats {
    pub authors: usize,
    pub authors_with_paths: usize,
    pub seeds: usize,
    pub paths: usize,
    pub unreachable: usize,
    pub hop_limited: usize,
}

impl SeedgraphStats {
    pub fn collect(seedgraphs: &[Seedgraph]) -> Self {
        let mut s = SeedgraphStats {
            authors: seedgraphs.len(),
            ..Default::default()
        };
        for sg in seedgraphs {
            s.seeds += sg.paths.len() + sg.unreachable.len();
            s.paths += sg.paths.len();
            s.unreachable += sg.unreachable.len();
            s.hop_limited += sg.hop_limited;
            s.authors_with_paths += usize::from(!sg.paths.is_empty());
        }
        s
    }
}

/// Seedgraphs of every author of `snapshot_y` with a non-empty next-year
/// history, in author order. Runs in parallel; results do not depend on
/// scheduling.
pub fn build_all(snapshot_y: &Snapshot<'_>, snapshot_y1: &Snapshot<'_>, hop_limit: usize) -> Result<Vec<Seedgraph>, SeedError> {
    let authors: Vec<NodeRef> = snapshot_y.nodes(NodeType::Author).collect();
    let built: Result<Vec<Option<Seedgraph>>, SeedError> = authors
        .par_iter()
        .map(|&a| {
            let seeds = future_history(a, snapshot_y, snapshot_y1)?;
            Ok((!seeds.elements.is_empty()).then(|| build_seedgraph(snapshot_y, &seeds, hop_limit)))
        })
        .collect();
    Ok(built?.into_iter().flatten().collect())
}

#[derive(Serialize, Deserialize)]
struct SeedgraphRecord {
    author: NodeRef,
    author_id: String,
    year: i32,
    hop_limited: usize,
    paths: Vec<SeedPath>,
    unreachable: Vec<NodeRef>,
}

/// One JSON object per author, for inspection.
pub fn write_ndjson<W: Write>(snapshot: &Snapshot<'_>, seedgraphs: &[Seedgraph], mut w: W) -> Result<(), SeedError> {
    for sg in seedgraphs {
        let rec = SeedgraphRecord {
            author: sg.author,
            author_id: snapshot.graph().external_id(sg.author).to_owned(),
            year: sg.year,
            hop_limited: sg.hop_limited,
            paths: sg.paths.clone(),
            unreachable: sg.unreachable.clone(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ndjson<R: BufRead>(r: R) -> Result<Vec<Seedgraph>, SeedError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SeedgraphRecord = serde_json::from_str(&line)?;
        out.push(Seedgraph::from_paths(rec.author, rec.year, rec.paths, rec.unreachable, rec.hop_limited));
    }
    Ok(out)
}

const BIN_MAGIC: &[u8; 4] = b"ANSG";
const BIN_VERSION: u32 = 1;

fn put_node<W: Write>(w: &mut W, n: NodeRef) -> std::io::Result<()> {
    w.write_all(&[n.ty.slot() as u8])?;
    w.write_all(&n.index.to_le_bytes())
}

fn put_edge<W: Write>(w: &mut W, e: &Edge) -> std::io::Result<()> {
    put_node(w, e.src)?;
    w.write_all(&[e.relation.slot() as u8])?;
    put_node(w, e.dst)
}

/// Compact binary form: per author the seed paths as node and edge lists.
pub fn write_binary<W: Write>(seedgraphs: &[Seedgraph], mut w: W) -> Result<(), SeedError> {
    w.write_all(BIN_MAGIC)?;
    w.write_all(&BIN_VERSION.to_le_bytes())?;
    w.write_all(&(seedgraphs.len() as u64).to_le_bytes())?;
    for sg in seedgraphs {
        put_node(&mut w, sg.author)?;
        w.write_all(&sg.year.to_le_bytes())?;
        w.write_all(&(sg.hop_limited as u32).to_le_bytes())?;
        w.write_all(&(sg.paths.len() as u32).to_le_bytes())?;
        for p in &sg.paths {
            put_node(&mut w, p.seed)?;
            w.write_all(&(p.nodes.len() as u32).to_le_bytes())?;
            for &n in &p.nodes {
                put_node(&mut w, n)?;
            }
            for e in &p.edges {
                put_edge(&mut w, e)?;
            }
        }
        w.write_all(&(sg.unreachable.len() as u32).to_le_bytes())?;
        for &n in &sg.unreachable {
            put_node(&mut w, n)?;
        }
    }
    w.flush()?;
    Ok(())
}

struct BinReader<R>(R);

impl<R: Read> BinReader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], SeedError> {
        let mut b = [0u8; N];
        self.0
            .read_exact(&mut b)
            .map_err(|_| SeedError::Format("truncated".into()))?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32, SeedError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn node(&mut self) -> Result<NodeRef, SeedError> {
        let [t] = self.bytes::<1>()?;
        let ty = NodeType::from_slot(t as usize).ok_or_else(|| SeedError::Format("bad node type".into()))?;
        Ok(NodeRef::new(ty, self.u32()?))
    }
    fn edge(&mut self) -> Result<Edge, SeedError> {
        let src = self.node()?;
        let [r] = self.bytes::<1>()?;
        let relation = *Relation::ALL
            .get(r as usize)
            .ok_or_else(|| SeedError::Format("bad relation".into()))?;
        Ok(Edge::new(src, relation, self.node()?))
    }
}

pub fn read_binary<R: Read>(r: R) -> Result<Vec<Seedgraph>, SeedError> {
    let mut r = BinReader(r);
    if &r.bytes::<4>()? != BIN_MAGIC {
        return Err(SeedError::Format("bad magic".into()));
    }
    if r.u32()? != BIN_VERSION {
        return Err(SeedError::Format("unsupported version".into()));
    }
    let n = u64::from_le_bytes(r.bytes()?) as usize;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let author = r.node()?;
        let year = i32::from_le_bytes(r.bytes()?);
        let hop_limited = r.u32()? as usize;
        let n_paths = r.u32()?;
        let mut paths = Vec::new();
        for _ in 0..n_paths {
            let seed = r.node()?;
            let n_nodes = r.u32()? as usize;
            if n_nodes == 0 {
                return Err(SeedError::Format("empty path".into()));
            }
            let nodes = (0..n_nodes).map(|_| r.node()).collect::<Result<Vec<_>, _>>()?;
            let edges = (1..n_nodes).map(|_| r.edge()).collect::<Result<Vec<_>, _>>()?;
            paths.push(SeedPath { seed, nodes, edges });
        }
        let n_un = r.u32()?;
        let unreachable = (0..n_un).map(|_| r.node()).collect::<Result<Vec<_>, _>>()?;
        out.push(Seedgraph::from_paths(author, year, paths, unreachable, hop_limited));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeTriple, GraphBuilder, HeteroTemporalGraph};

    /// A (2000) writes P0 with topic T0; B writes P1 (2000) citing P0.
    /// In 2001 A and B write P2, which cites P1 and deals with T0.
    fn toy() -> HeteroTemporalGraph {
        let mut b = GraphBuilder::new();
        let a = b.add_node(NodeType::Author, "A");
        let bb = b.add_node(NodeType::Author, "B");
        let p0 = b.add_paper("P0", 2000);
        let p1 = b.add_paper("P1", 2000);
        let p2 = b.add_paper("P2", 2001);
        let p3 = b.add_paper("P3", 2001);
        let t = b.add_node(NodeType::Topic, "T0");
        b.add_edge(EdgeTriple::WRITES, a, p0).unwrap();
        b.add_edge(EdgeTriple::WRITES, bb, p1).unwrap();
        b.add_edge(EdgeTriple::DEALS_WITH, p0, t).unwrap();
        b.add_edge(EdgeTriple::CITES, p1, p0).unwrap();
        b.add_edge(EdgeTriple::WRITES, a, p2).unwrap();
        b.add_edge(EdgeTriple::WRITES, bb, p2).unwrap();
        b.add_edge(EdgeTriple::CITES, p2, p1).unwrap();
        b.add_edge(EdgeTriple::CITES, p2, p3).unwrap();
        b.add_edge(EdgeTriple::DEALS_WITH, p2, t).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn future_history_collects_coauthors_citations_topics() {
        let g = toy();
        let seeds = future_history(NodeRef::author(0), &g.snapshot(2000), &g.snapshot(2001)).unwrap();
        // P3 is a 2001 paper and therefore not part of G_2000
        let expected: BTreeSet<NodeRef> = [NodeRef::author(1), NodeRef::paper(1), NodeRef::topic(0)].into();
        assert_eq!(seeds.elements, expected);
    }

    #[test]
    fn nothing_published_next_year_means_no_seeds() {
        let g = toy();
        let seeds = future_history(NodeRef::author(0), &g.snapshot(1999), &g.snapshot(2000)).unwrap();
        assert!(seeds.elements.iter().all(|n| n.ty != NodeType::Author));
        let seeds = future_history(NodeRef::author(0), &g.snapshot(2001), &g.snapshot(2002)).unwrap();
        assert!(seeds.elements.is_empty());
    }

    #[test]
    fn mismatched_snapshots_are_rejected() {
        let g = toy();
        assert!(future_history(NodeRef::author(0), &g.snapshot(2000), &g.snapshot(2002)).is_err());
        assert!(future_history(NodeRef::author(9), &g.snapshot(2000), &g.snapshot(2001)).is_err());
    }

    #[test]
    fn paths_are_shortest() {
        let g = toy();
        let s = g.snapshot(2000);
        let seeds = future_history(NodeRef::author(0), &s, &g.snapshot(2001)).unwrap();
        let sg = build_seedgraph(&s, &seeds, DEFAULT_HOP_LIMIT);
        let lens: Vec<(NodeRef, usize)> = sg.paths.iter().map(|p| (p.seed, p.len())).collect();
        // A-P0-P1-B, A-P0-P1, A-P0-T0
        assert_eq!(
            lens,
            vec![(NodeRef::author(1), 3), (NodeRef::paper(1), 2), (NodeRef::topic(0), 2)]
        );
        assert!(sg.edges.iter().all(|e| s.contains_edge(e)));
        assert!(sg.unreachable.is_empty());
    }

    #[test]
    fn direct_neighbor_seed_is_single_edge() {
        let g = toy();
        let s = g.snapshot(2000);
        let seeds = FutureSeeds {
            author: NodeRef::author(0),
            year: 2000,
            elements: [NodeRef::paper(0)].into(),
        };
        let sg = build_seedgraph(&s, &seeds, DEFAULT_HOP_LIMIT);
        assert_eq!(sg.paths.len(), 1);
        assert_eq!(sg.paths[0].edges, vec![Edge::new(NodeRef::author(0), Relation::Writes, NodeRef::paper(0))]);
    }

    #[test]
    fn disconnected_seed_is_unreachable() {
        let mut b = GraphBuilder::new();
        let a = b.add_node(NodeType::Author, "a");
        let z = b.add_node(NodeType::Author, "z");
        let p = b.add_paper("p", 2000);
        let q = b.add_paper("q", 2000);
        b.add_edge(EdgeTriple::WRITES, a, p).unwrap();
        b.add_edge(EdgeTriple::WRITES, z, q).unwrap();
        let g = b.build().unwrap();
        let seeds = FutureSeeds {
            author: a,
            year: 2000,
            elements: [z].into(),
        };
        let sg = build_seedgraph(&g.snapshot(2000), &seeds, DEFAULT_HOP_LIMIT);
        assert_eq!(sg.unreachable, vec![z]);
        assert!(sg.nodes.is_empty() && sg.edges.is_empty());
        assert_eq!(sg.hop_limited, 0);
    }

    #[test]
    fn hop_limit_marks_far_seeds() {
        let g = toy();
        let s = g.snapshot(2000);
        let seeds = FutureSeeds {
            author: NodeRef::author(0),
            year: 2000,
            elements: [NodeRef::author(1), NodeRef::topic(0)].into(),
        };
        let sg = build_seedgraph(&s, &seeds, 2);
        assert_eq!(sg.paths.len(), 1);
        assert_eq!(sg.unreachable, vec![NodeRef::author(1)]);
        assert_eq!(sg.hop_limited, 1);
    }

    #[test]
    fn compare_frontiers_sorted_intersection() {
        let g = toy();
        let s = g.snapshot(2000);
        let mut scratch = Vec::new();
        let mut fa = Frontier::new(NodeRef::author(0));
        let mut fb = Frontier::new(NodeRef::author(1));
        assert!(compare_frontiers(&fa, &fb).is_empty());
        fa.expand(&s, &mut scratch);
        fa.expand(&s, &mut scratch);
        fb.expand(&s, &mut scratch);
        assert_eq!(compare_frontiers(&fa, &fb), vec![NodeRef::paper(1)]);
    }

    #[test]
    fn serialization_roundtrips() {
        let g = toy();
        let s = g.snapshot(2000);
        let all = build_all(&s, &g.snapshot(2001), DEFAULT_HOP_LIMIT).unwrap();
        assert_eq!(all.len(), 2);
        let mut bin = Vec::new();
        write_binary(&all, &mut bin).unwrap();
        assert_eq!(read_binary(&bin[..]).unwrap(), all);
        let mut text = Vec::new();
        write_ndjson(&s, &all, &mut text).unwrap();
        assert_eq!(read_ndjson(&text[..]).unwrap(), all);
    }
}
