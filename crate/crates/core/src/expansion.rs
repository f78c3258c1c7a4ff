//! Stochastic expansion of a seedgraph into the author-future infosphere.
//!
//! Nodes of the seedgraph are Orange, nodes added here are Green and every
//! other node is White. For each seed path a walker starts on a uniformly
//! chosen path node and repeats, until `f` new Green nodes exist for that
//! path or `50 * f` steps have passed:
//!
//! 1. a continuation decision with masses proportional to `(p1, p2, p3)`:
//!    step to an Orange neighbor, step to a Green neighbor, or jump back to
//!    the author without adding an edge. A decision that lands on an empty
//!    category is redrawn over the non-empty ones; if none of those carries
//!    mass the walker stays put;
//! 2. an extension: a uniformly chosen White neighbor of the current node is
//!    colored Green and the walker moves onto it.
//!
//! Every traversed edge joins the infosphere with provenance `Expansion`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Direction, Edge, Incident, NodeRef, NodeType, Relation, Snapshot};
use crate::rng::keyed_rng;
use crate::seedgraph::Seedgraph;

#[derive(Debug, Error, PartialEq)]
pub enum ExpansionError {
    #[error("probability {name} = {value} is outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("f = {0} is not one of 0, 2, 4, 6")]
    NewNodes(usize),
    #[error("unknown trial preset {0:?}")]
    UnknownTrial(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// New Green nodes per seed path.
    pub f: usize,
}

impl ExpansionParams {
    pub fn new(p1: f64, p2: f64, p3: f64, f: usize) -> Result<Self, ExpansionError> {
        let params = ExpansionParams { p1, p2, p3, f };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ExpansionError> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ExpansionError::Probability { name, value });
            }
        }
        if ![0, 2, 4, 6].contains(&self.f) {
            return Err(ExpansionError::NewNodes(self.f));
        }
        Ok(())
    }

    pub fn identity() -> Self {
        ExpansionParams {
            p1: 0.0,
            p2: 0.0,
            p3: 0.0,
            f: 0,
        }
    }

    pub fn step_budget(&self) -> usize {
        50 * self.f
    }
}

impl fmt::Display for ExpansionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p1={} p2={} p3={} f={}", self.p1, self.p2, self.p3, self.f)
    }
}

/// Named infosphere parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Trial {
    /// trial0: random infosphere of matching size.
    Random,
    Expand(ExpansionParams),
}

impl Trial {
    pub fn preset(name: &str) -> Result<Trial, ExpansionError> {
        let p = |p1, p2, p3| Trial::Expand(ExpansionParams { p1, p2, p3, f: 2 });
        Ok(match name {
            "trial0" | "0" => Trial::Random,
            "trial1" | "1" => p(0.5, 0.5, 0.5),
            "trial2" | "2" => p(0.75, 0.5, 0.5),
            "trial3" | "3" => p(0.5, 0.75, 0.5),
            "trial4" | "4" => p(0.5, 0.5, 0.75),
            "trial5" | "5" => p(0.25, 0.75, 0.25),
            other => return Err(ExpansionError::UnknownTrial(other.to_owned())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Color {
    Orange,
    Green,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    SeedPath,
    Expansion,
}

/// Outcome of one continuation decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Orange,
    Green,
    Author,
    Stay,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionStats {
    /// Final decisions: Orange, Green, Author, Stay.
    pub decisions: [u64; 4],
    /// Final decisions taken while Orange, Green and the author jump were all
    /// available (Orange, Green, Author).
    pub decisions_all_available: [u64; 3],
    pub redraws: u64,
    pub author_jumps: u64,
    pub green_added: u64,
    pub steps: u64,
    /// Paths that ran out of steps before adding `f` nodes.
    pub budget_exhausted: u64,
    /// Green nodes added, one entry per seed path.
    #[serde(skip)]
    pub green_per_path: Vec<usize>,
}

impl ExpansionStats {
    pub fn merge(&mut self, other: &ExpansionStats) {
        for i in 0..4 {
            self.decisions[i] += other.decisions[i];
        }
        for i in 0..3 {
            self.decisions_all_available[i] += other.decisions_all_available[i];
        }
        self.redraws += other.redraws;
        self.author_jumps += other.author_jumps;
        self.green_added += other.green_added;
        self.steps += other.steps;
        self.budget_exhausted += other.budget_exhausted;
        self.green_per_path.extend_from_slice(&other.green_per_path);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColoredInfosphere {
    pub author: NodeRef,
    pub nodes: BTreeMap<NodeRef, Color>,
    pub edges: BTreeMap<Edge, Provenance>,
    pub stats: ExpansionStats,
}

impl ColoredInfosphere {
    pub fn from_seedgraph(sg: &Seedgraph) -> Self {
        ColoredInfosphere {
            author: sg.author,
            nodes: sg.nodes.iter().map(|&n| (n, Color::Orange)).collect(),
            edges: sg.edges.iter().map(|&e| (e, Provenance::SeedPath)).collect(),
            stats: ExpansionStats::default(),
        }
    }

    pub fn color(&self, node: NodeRef) -> Option<Color> {
        self.nodes.get(&node).copied()
    }

    pub fn count(&self, color: Color) -> usize {
        self.nodes.values().filter(|&&c| c == color).count()
    }
}

/// Draws a continuation category. `available` flags Orange, Green and the
/// author jump. Returns the decision and whether a redraw happened.
pub fn draw_decision(masses: [f64; 3], available: [bool; 3], rng: &mut impl Rng) -> (Decision, bool) {
    const CATS: [Decision; 3] = [Decision::Orange, Decision::Green, Decision::Author];
    let pick = |m: [f64; 3], rng: &mut dyn rand::RngCore| -> Option<usize> {
        let total: f64 = m.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return None;
        }
        let mut x = rng.random::<f64>() * total;
        for (i, &w) in m.iter().enumerate() {
            if w > 0.0 && x < w {
                return Some(i);
            }
            x -= w;
        }
        m.iter().rposition(|&w| w > 0.0)
    };
    match pick(masses, rng) {
        None => (Decision::Stay, false),
        Some(i) if available[i] => (CATS[i], false),
        Some(_) => {
            let restricted = [0, 1, 2].map(|i| if available[i] { masses[i] } else { 0.0 });
            match pick(restricted, rng) {
                Some(j) => (CATS[j], true),
                None => (Decision::Stay, true),
            }
        }
    }
}

struct Walker<'a, 's> {
    snapshot: &'a Snapshot<'s>,
    info: ColoredInfosphere,
    scratch: Vec<Incident>,
}

impl Walker<'_, '_> {
    fn classify(&mut self, at: NodeRef) -> [Vec<Incident>; 3] {
        self.snapshot.incident_into(at, &mut self.scratch);
        let mut out: [Vec<Incident>; 3] = Default::default();
        for inc in &self.scratch {
            let slot = match self.info.nodes.get(&inc.node) {
                Some(Color::Orange) => 0,
                Some(Color::Green) => 1,
                None => 2,
            };
            out[slot].push(*inc);
        }
        out
    }

    fn traverse(&mut self, inc: &Incident) {
        self.info.edges.entry(inc.edge).or_insert(Provenance::Expansion);
    }

    fn walk_path(&mut self, path_nodes: &[NodeRef], params: &ExpansionParams, rng: &mut ChaCha8Rng, stats: &mut ExpansionStats) {
        let masses = [params.p1, params.p2, params.p3];
        let mut cur = path_nodes[rng.random_range(0..path_nodes.len())];
        let mut added = 0;
        let mut steps = 0;
        while added < params.f && steps < params.step_budget() {
            steps += 1;
            let [orange, green, _] = self.classify(cur);
            let all = !orange.is_empty() && !green.is_empty();
            let (decision, redrawn) = draw_decision(masses, [!orange.is_empty(), !green.is_empty(), true], rng);
            stats.redraws += u64::from(redrawn);
            let slot = match decision {
                Decision::Orange => 0,
                Decision::Green => 1,
                Decision::Author => 2,
                Decision::Stay => 3,
            };
            stats.decisions[slot] += 1;
            if all && slot < 3 {
                stats.decisions_all_available[slot] += 1;
            }
            match decision {
                Decision::Orange | Decision::Green => {
                    let choices = if decision == Decision::Orange { &orange } else { &green };
                    let inc = choices[rng.random_range(0..choices.len())];
                    self.traverse(&inc);
                    cur = inc.node;
                }
                Decision::Author => {
                    stats.author_jumps += 1;
                    cur = self.info.author;
                }
                Decision::Stay => {}
            }
            let [_, _, white] = self.classify(cur);
            if !white.is_empty() {
                let inc = white[rng.random_range(0..white.len())];
                self.traverse(&inc);
                self.info.nodes.insert(inc.node, Color::Green);
                cur = inc.node;
                added += 1;
            }
        }
        stats.steps += steps as u64;
        stats.green_added += added as u64;
        stats.budget_exhausted += u64::from(added < params.f);
        stats.green_per_path.push(added);
    }
}

/// Expands one seedgraph. Randomness is keyed by `(seed, author, path)`.
pub fn expand(seedgraph: &Seedgraph, snapshot_y: &Snapshot<'_>, params: &ExpansionParams, seed: u64) -> ColoredInfosphere {
    let mut walker = Walker {
        snapshot: snapshot_y,
        info: ColoredInfosphere::from_seedgraph(seedgraph),
        scratch: Vec::new(),
    };
    let mut stats = ExpansionStats::default();
    if params.f > 0 {
        for (i, path) in seedgraph.paths.iter().enumerate() {
            let mut rng = keyed_rng(seed, "expand", &[seedgraph.author.index as u64, i as u64]);
            walker.walk_path(&path.nodes, params, &mut rng, &mut stats);
        }
    }
    walker.info.stats = stats;
    walker.info
}

pub fn expand_all(seedgraphs: &[Seedgraph], snapshot_y: &Snapshot<'_>, params: &ExpansionParams, seed: u64) -> Vec<ColoredInfosphere> {
    seedgraphs
        .par_iter()
        .map(|sg| expand(sg, snapshot_y, params, seed))
        .collect()
}

/// `size` distinct papers of the snapshot, drawn uniformly from those the
/// author did not write, each attached to the author by an exposure edge.
/// Returns the infosphere and whether `size` had to be capped.
pub fn random_infosphere(snapshot_y: &Snapshot<'_>, author: NodeRef, size: usize, seed: u64) -> (ColoredInfosphere, bool) {
    let own: BTreeSet<NodeRef> = snapshot_y
        .neighbor_iter(author, Relation::Writes, Direction::Forward)
        .collect();
    let pool: Vec<NodeRef> = snapshot_y
        .nodes(NodeType::Paper)
        .filter(|p| !own.contains(p))
        .collect();
    let capped = size > pool.len();
    if capped {
        log::warn!(
            "random infosphere for {author}: requested {size} nodes, only {} available",
            pool.len()
        );
    }
    let mut rng = keyed_rng(seed, "random-infosphere", &[author.index as u64]);
    let picks = index::sample(&mut rng, pool.len(), size.min(pool.len()));
    let mut info = ColoredInfosphere {
        author,
        nodes: BTreeMap::new(),
        edges: BTreeMap::new(),
        stats: ExpansionStats::default(),
    };
    for i in picks.iter() {
        let p = pool[i];
        info.nodes.insert(p, Color::Green);
        info.edges.insert(Edge::new(author, Relation::Writes, p), Provenance::Expansion);
    }
    (info, capped)
}
