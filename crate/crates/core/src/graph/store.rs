use std::collections::HashMap;

use super::{Csr, Direction, Edge, NodeRef, NodeType, Relation, Snapshot};

/// Immutable heterogeneous temporal graph.
///
/// Each relation keeps a forward CSR (rows are source nodes) and a reverse CSR
/// (rows are destination nodes) holding the same edge set.
#[derive(Debug, Clone)]
pub struct HeteroTemporalGraph {
    pub(crate) ids: [Vec<String>; 3],
    pub(crate) registry: [HashMap<String, u32>; 3],
    pub(crate) paper_year: Vec<i32>,
    pub(crate) forward: [Csr; 3],
    pub(crate) reverse: [Csr; 3],
    /// Earliest year in which each node is part of a snapshot; `i32::MAX`
    /// for authors and topics without any incident edge.
    pub(crate) first_year: [Vec<i32>; 3],
}

impl HeteroTemporalGraph {
    pub(crate) fn from_parts(ids: [Vec<String>; 3], paper_year: Vec<i32>, forward: [Csr; 3]) -> Self {
        let counts = [ids[0].len(), ids[1].len(), ids[2].len()];
        let reverse = [
            forward[0].transpose(counts[1]),
            forward[1].transpose(counts[2]),
            forward[2].transpose(counts[1]),
        ];
        Self::from_adjacency(ids, paper_year, forward, reverse)
    }

    pub(crate) fn from_adjacency(
        ids: [Vec<String>; 3],
        paper_year: Vec<i32>,
        forward: [Csr; 3],
        reverse: [Csr; 3],
    ) -> Self {
        let registry = ids.clone().map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, s)| (s, i as u32))
                .collect::<HashMap<_, _>>()
        });
        let author_first = (0..ids[0].len())
            .map(|a| {
                forward[Relation::Writes.slot()]
                    .row(a)
                    .iter()
                    .map(|&p| paper_year[p as usize])
                    .min()
                    .unwrap_or(i32::MAX)
            })
            .collect();
        let topic_first = (0..ids[2].len())
            .map(|t| {
                reverse[Relation::DealsWith.slot()]
                    .row(t)
                    .iter()
                    .map(|&p| paper_year[p as usize])
                    .min()
                    .unwrap_or(i32::MAX)
            })
            .collect();
        let first_year = [author_first, paper_year.clone(), topic_first];
        HeteroTemporalGraph {
            ids,
            registry,
            paper_year,
            forward,
            reverse,
            first_year,
        }
    }

    pub fn node_count(&self, ty: NodeType) -> usize {
        self.ids[ty.slot()].len()
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.ids[0].len(), self.ids[1].len(), self.ids[2].len()]
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        node.idx() < self.node_count(node.ty)
    }

    pub fn external_id(&self, node: NodeRef) -> &str {
        &self.ids[node.ty.slot()][node.idx()]
    }

    pub fn find(&self, ty: NodeType, external_id: &str) -> Option<NodeRef> {
        self.registry[ty.slot()]
            .get(external_id)
            .map(|&i| NodeRef::new(ty, i))
    }

    pub fn paper_year(&self, paper: NodeRef) -> i32 {
        debug_assert_eq!(paper.ty, NodeType::Paper);
        self.paper_year[paper.idx()]
    }

    pub fn paper_years(&self) -> &[i32] {
        &self.paper_year
    }

    /// First snapshot year that contains `node`.
    pub fn first_year(&self, node: NodeRef) -> i32 {
        self.first_year[node.ty.slot()][node.idx()]
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.paper_year.iter().copied().min()?;
        let max = self.paper_year.iter().copied().max()?;
        Some((min, max))
    }

    /// Sorted distinct publication years.
    pub fn years(&self) -> Vec<i32> {
        let mut ys = self.paper_year.clone();
        ys.sort_unstable();
        ys.dedup();
        ys
    }

    pub fn adjacency(&self, relation: Relation, direction: Direction) -> &Csr {
        match direction {
            Direction::Forward => &self.forward[relation.slot()],
            Direction::Reverse => &self.reverse[relation.slot()],
        }
    }

    /// Unfiltered neighbors of `node` under `relation`, read in `direction`.
    /// Empty when `node` has the wrong type for that side of the relation.
    pub fn raw_neighbors(&self, node: NodeRef, relation: Relation, direction: Direction) -> &[u32] {
        let triple = relation.triple();
        let row_ty = match direction {
            Direction::Forward => triple.src,
            Direction::Reverse => triple.dst,
        };
        if node.ty != row_ty {
            return &[];
        }
        self.adjacency(relation, direction).row(node.idx())
    }

    pub fn degree(&self, node: NodeRef, relation: Relation, direction: Direction) -> usize {
        self.raw_neighbors(node, relation, direction).len()
    }

    pub fn edge_count(&self, relation: Relation) -> usize {
        self.forward[relation.slot()].edge_count()
    }

    pub fn edges(&self, relation: Relation) -> impl Iterator<Item = Edge> + '_ {
        let t = relation.triple();
        self.forward[relation.slot()]
            .pairs()
            .map(move |(s, d)| Edge::new(NodeRef::new(t.src, s), relation, NodeRef::new(t.dst, d)))
    }

    pub fn has_edge(&self, edge: &Edge) -> bool {
        let t = edge.relation.triple();
        edge.src.ty == t.src
            && edge.dst.ty == t.dst
            && self.forward[edge.relation.slot()].contains(edge.src.idx(), edge.dst.index)
    }

    /// Year-filtered view `G_y`.
    pub fn snapshot(&self, year: i32) -> Snapshot<'_> {
        Snapshot::new(self, year)
    }
}
