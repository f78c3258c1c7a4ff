use std::collections::HashMap;

use super::{Csr, EdgeTriple, GraphError, HeteroTemporalGraph, NodeRef, NodeType};

/// Single-writer build phase of a [`HeteroTemporalGraph`].
///
/// The build phase ends when [`GraphBuilder::build`] consumes the builder, so
/// no mutation can reach a finished graph.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    registry: [HashMap<String, u32>; 3],
    ids: [Vec<String>; 3],
    years: Vec<Option<i32>>,
    edges: [Vec<(u32, u32)>; 3],
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `external_id` under `ty`, returning the existing reference if
    /// the id is already known.
    pub fn add_node(&mut self, ty: NodeType, external_id: &str) -> NodeRef {
        let slot = ty.slot();
        if let Some(&index) = self.registry[slot].get(external_id) {
            return NodeRef::new(ty, index);
        }
        let index = self.ids[slot].len() as u32;
        self.registry[slot].insert(external_id.to_owned(), index);
        self.ids[slot].push(external_id.to_owned());
        if ty == NodeType::Paper {
            self.years.push(None);
        }
        NodeRef::new(ty, index)
    }

    /// Registers a paper together with its publication year.
    pub fn add_paper(&mut self, external_id: &str, year: i32) -> NodeRef {
        let node = self.add_node(NodeType::Paper, external_id);
        self.years[node.idx()] = Some(year);
        node
    }

    pub fn set_paper_year(&mut self, paper: NodeRef, year: i32) -> Result<(), GraphError> {
        self.check(paper)?;
        if paper.ty != NodeType::Paper {
            return Err(GraphError::UnknownNode(paper));
        }
        self.years[paper.idx()] = Some(year);
        Ok(())
    }

    pub fn lookup(&self, ty: NodeType, external_id: &str) -> Option<NodeRef> {
        self.registry[ty.slot()]
            .get(external_id)
            .map(|&i| NodeRef::new(ty, i))
    }

    pub fn node_count(&self, ty: NodeType) -> usize {
        self.ids[ty.slot()].len()
    }

    /// Inserts an edge; repeated insertions collapse at build time.
    pub fn add_edge(&mut self, triple: EdgeTriple, src: NodeRef, dst: NodeRef) -> Result<(), GraphError> {
        let legal = EdgeTriple::new(triple.src, triple.relation, triple.dst)?;
        if src.ty != legal.src || dst.ty != legal.dst {
            return Err(GraphError::TypeMismatch { triple, src, dst });
        }
        self.check(src)?;
        self.check(dst)?;
        self.edges[legal.relation.slot()].push((src.index, dst.index));
        Ok(())
    }

    fn check(&self, node: NodeRef) -> Result<(), GraphError> {
        if node.idx() < self.ids[node.ty.slot()].len() {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(node))
        }
    }

    pub fn build(self) -> Result<HeteroTemporalGraph, GraphError> {
        let GraphBuilder {
            ids, years, edges, ..
        } = self;
        let mut paper_year = Vec::with_capacity(years.len());
        for (i, y) in years.into_iter().enumerate() {
            match y {
                Some(y) => paper_year.push(y),
                None => return Err(GraphError::MissingYear(ids[NodeType::Paper.slot()][i].clone())),
            }
        }
        let [mut writes, mut deals, mut cites] = edges;
        let counts = [ids[0].len(), ids[1].len(), ids[2].len()];
        let forward = [
            Csr::from_pairs(counts[0], &mut writes),
            Csr::from_pairs(counts[1], &mut deals),
            Csr::from_pairs(counts[1], &mut cites),
        ];
        Ok(HeteroTemporalGraph::from_parts(ids, paper_year, forward))
    }
}
