//! Typed, year-attributed heterogeneous graph of authors, papers and topics.
//!
//! The graph is assembled once through [`GraphBuilder`] and is immutable
//! afterwards. Year-filtered views are obtained with
//! [`HeteroTemporalGraph::snapshot`]; they copy nothing and answer membership
//! queries in constant time.

mod builder;
mod csr;
pub mod io;
mod snapshot;
mod store;

pub use builder::GraphBuilder;
pub use csr::Csr;
pub use snapshot::{Incident, Snapshot};
pub use store::HeteroTemporalGraph;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge {triple} cannot connect {src} to {dst}")]
    TypeMismatch {
        triple: EdgeTriple,
        src: NodeRef,
        dst: NodeRef,
    },
    #[error("unknown node {0}")]
    UnknownNode(NodeRef),
    #[error("node {node} is not part of the {year} snapshot")]
    NotInSnapshot { node: NodeRef, year: i32 },
    #[error("paper {0:?} has no publication year")]
    MissingYear(String),
    #[error("illegal edge triple ({0}, {1}, {2})")]
    IllegalTriple(NodeType, Relation, NodeType),
    #[error("invalid graph file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeType {
    Author,
    Paper,
    Topic,
}

impl NodeType {
    pub const ALL: [NodeType; 3] = [NodeType::Author, NodeType::Paper, NodeType::Topic];

    pub fn slot(self) -> usize {
        self as usize
    }

    pub fn from_slot(slot: usize) -> Option<NodeType> {
        Self::ALL.get(slot).copied()
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeType::Author => "author",
            NodeType::Paper => "paper",
            NodeType::Topic => "topic",
        };
        f.write_str(s)
    }
}

/// A node addressed by its type and dense per-type index.
///
/// Ordering is by type first, then index; every deterministic tie-break in the
/// crate relies on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef {
    pub ty: NodeType,
    pub index: u32,
}

impl NodeRef {
    pub const fn new(ty: NodeType, index: u32) -> Self {
        NodeRef { ty, index }
    }

    pub const fn author(index: u32) -> Self {
        NodeRef::new(NodeType::Author, index)
    }

    pub const fn paper(index: u32) -> Self {
        NodeRef::new(NodeType::Paper, index)
    }

    pub const fn topic(index: u32) -> Self {
        NodeRef::new(NodeType::Topic, index)
    }

    pub fn idx(self) -> usize {
        self.index as usize
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.ty {
            NodeType::Author => 'A',
            NodeType::Paper => 'P',
            NodeType::Topic => 'T',
        };
        write!(f, "{}{}", c, self.index)
    }
}

impl std::str::FromStr for NodeRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let ty = match chars.next() {
            Some('A') => NodeType::Author,
            Some('P') => NodeType::Paper,
            Some('T') => NodeType::Topic,
            _ => return Err(format!("bad node reference {s:?}")),
        };
        let index = chars
            .as_str()
            .parse()
            .map_err(|_| format!("bad node reference {s:?}"))?;
        Ok(NodeRef::new(ty, index))
    }
}

impl Serialize for NodeRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Writes,
    DealsWith,
    Cites,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Writes, Relation::DealsWith, Relation::Cites];

    pub fn slot(self) -> usize {
        self as usize
    }

    pub fn triple(self) -> EdgeTriple {
        match self {
            Relation::Writes => EdgeTriple::WRITES,
            Relation::DealsWith => EdgeTriple::DEALS_WITH,
            Relation::Cites => EdgeTriple::CITES,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Writes => "writes",
            Relation::DealsWith => "deals_with",
            Relation::Cites => "cites",
        };
        f.write_str(s)
    }
}

/// Whether adjacency is read along the stored edge direction or against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

/// One of the three legal (source type, relation, destination type) triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeTriple {
    pub src: NodeType,
    pub relation: Relation,
    pub dst: NodeType,
}

impl EdgeTriple {
    pub const WRITES: EdgeTriple = EdgeTriple {
        src: NodeType::Author,
        relation: Relation::Writes,
        dst: NodeType::Paper,
    };
    pub const DEALS_WITH: EdgeTriple = EdgeTriple {
        src: NodeType::Paper,
        relation: Relation::DealsWith,
        dst: NodeType::Topic,
    };
    pub const CITES: EdgeTriple = EdgeTriple {
        src: NodeType::Paper,
        relation: Relation::Cites,
        dst: NodeType::Paper,
    };

    pub fn new(src: NodeType, relation: Relation, dst: NodeType) -> Result<Self, GraphError> {
        let triple = relation.triple();
        if triple.src == src && triple.dst == dst {
            Ok(triple)
        } else {
            Err(GraphError::IllegalTriple(src, relation, dst))
        }
    }
}

impl fmt::Display for EdgeTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.src, self.relation, self.dst)
    }
}

/// A stored edge in its native direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeRef,
    pub relation: Relation,
    pub dst: NodeRef,
}

impl Edge {
    pub fn new(src: NodeRef, relation: Relation, dst: NodeRef) -> Self {
        Edge { src, relation, dst }
    }

    /// The endpoint opposite to `node`, if `node` is an endpoint.
    pub fn other(&self, node: NodeRef) -> Option<NodeRef> {
        if self.src == node {
            Some(self.dst)
        } else if self.dst == node {
            Some(self.src)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.src, self.relation, self.dst)
    }
}
