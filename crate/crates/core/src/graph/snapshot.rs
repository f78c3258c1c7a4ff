use super::{Direction, Edge, GraphError, HeteroTemporalGraph, NodeRef, NodeType, Relation};

/// A neighbor reached through `edge`, ignoring edge direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incident {
    pub node: NodeRef,
    pub edge: Edge,
}

/// Everything observable up to and including `year`.
///
/// Papers are members iff published in or before `year`; an edge is a member
/// iff all of its paper endpoints are; authors and topics are members iff they
/// touch at least one member edge.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'g> {
    graph: &'g HeteroTemporalGraph,
    year: i32,
}

impl<'g> Snapshot<'g> {
    pub(crate) fn new(graph: &'g HeteroTemporalGraph, year: i32) -> Self {
        Snapshot { graph, year }
    }

    pub fn graph(&self) -> &'g HeteroTemporalGraph {
        self.graph
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        self.graph.contains(node) && self.graph.first_year(node) <= self.year
    }

    fn paper_visible(&self, index: u32) -> bool {
        self.graph.paper_year[index as usize] <= self.year
    }

    pub fn contains_edge(&self, edge: &Edge) -> bool {
        if !self.graph.has_edge(edge) {
            return false;
        }
        [edge.src, edge.dst]
            .iter()
            .filter(|n| n.ty == NodeType::Paper)
            .all(|n| self.paper_visible(n.index))
    }

    pub fn nodes(&self, ty: NodeType) -> impl Iterator<Item = NodeRef> + '_ {
        let firsts = &self.graph.first_year[ty.slot()];
        let year = self.year;
        firsts
            .iter()
            .enumerate()
            .filter(move |(_, &f)| f <= year)
            .map(move |(i, _)| NodeRef::new(ty, i as u32))
    }

    pub fn node_count(&self, ty: NodeType) -> usize {
        self.graph.first_year[ty.slot()]
            .iter()
            .filter(|&&f| f <= self.year)
            .count()
    }

    /// Neighbors without a membership check on `node`.
    pub fn neighbor_iter(
        &self,
        node: NodeRef,
        relation: Relation,
        direction: Direction,
    ) -> impl Iterator<Item = NodeRef> + '_ {
        let t = relation.triple();
        let other_ty = match direction {
            Direction::Forward => t.dst,
            Direction::Reverse => t.src,
        };
        // Every relation has at least one paper endpoint. When `node` is not
        // the paper side, the neighbor is, and filtering it is sufficient.
        let node_visible = node.ty != NodeType::Paper || self.paper_visible(node.index);
        let other_is_paper = other_ty == NodeType::Paper;
        self.graph
            .raw_neighbors(node, relation, direction)
            .iter()
            .copied()
            .filter(move |&i| node_visible && (!other_is_paper || self.paper_visible(i)))
            .map(move |i| NodeRef::new(other_ty, i))
    }

    /// Sorted, duplicate-free neighbors of a member node.
    pub fn neighbors(
        &self,
        node: NodeRef,
        relation: Relation,
        direction: Direction,
    ) -> Result<Vec<NodeRef>, GraphError> {
        if !self.contains(node) {
            return Err(GraphError::NotInSnapshot {
                node,
                year: self.year,
            });
        }
        Ok(self.neighbor_iter(node, relation, direction).collect())
    }

    pub fn degree(&self, node: NodeRef, relation: Relation, direction: Direction) -> usize {
        self.neighbor_iter(node, relation, direction).count()
    }

    /// All neighbors over every relation and direction, sorted by
    /// `(type, index)`; a paper pair linked by citations in both directions
    /// is reported once through its forward edge.
    pub fn incident_into(&self, node: NodeRef, out: &mut Vec<Incident>) {
        out.clear();
        let push = |out: &mut Vec<Incident>, rel: Relation, dir: Direction| {
            for other in self.neighbor_iter(node, rel, dir) {
                let edge = match dir {
                    Direction::Forward => Edge::new(node, rel, other),
                    Direction::Reverse => Edge::new(other, rel, node),
                };
                out.push(Incident { node: other, edge });
            }
        };
        match node.ty {
            NodeType::Author => push(out, Relation::Writes, Direction::Forward),
            NodeType::Topic => push(out, Relation::DealsWith, Direction::Reverse),
            NodeType::Paper => {
                push(out, Relation::Writes, Direction::Reverse);
                let start = out.len();
                push(out, Relation::Cites, Direction::Forward);
                push(out, Relation::Cites, Direction::Reverse);
                // stable sort keeps the forward edge first among duplicates
                out[start..].sort_by_key(|inc| inc.node);
                let mut seen = start;
                for i in start..out.len() {
                    if i == start || out[i].node != out[seen - 1].node {
                        out[seen] = out[i];
                        seen += 1;
                    }
                }
                out.truncate(seen);
                push(out, Relation::DealsWith, Direction::Forward);
            }
        }
    }

    pub fn incident(&self, node: NodeRef) -> Vec<Incident> {
        let mut out = Vec::new();
        self.incident_into(node, &mut out);
        out
    }

    pub fn edges(&self, relation: Relation) -> impl Iterator<Item = Edge> + '_ {
        let t = relation.triple();
        let src_paper = t.src == NodeType::Paper;
        let dst_paper = t.dst == NodeType::Paper;
        self.graph.edges(relation).filter(move |e| {
            (!src_paper || self.paper_visible(e.src.index)) && (!dst_paper || self.paper_visible(e.dst.index))
        })
    }

    pub fn edge_count(&self, relation: Relation) -> usize {
        self.edges(relation).count()
    }
}
