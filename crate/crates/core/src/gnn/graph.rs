//! The graph the encoder passes messages over.
//!
//! Twelve channels: history or exposure, times the three relations, times the
//! two message directions. A channel is a CSR keyed by the receiving node and
//! listing the sending nodes in ascending index order.

use std::fmt;

use rand::seq::index;

use crate::graph::{Csr, Direction, Edge, NodeType, Relation, Snapshot};
use crate::infosphere::InfosphereEdgeSet;
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    History,
    Exposure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Channel {
    pub kind: ChannelKind,
    pub relation: Relation,
    pub direction: Direction,
}

pub const CHANNELS: usize = 12;

impl Channel {
    pub fn all() -> [Channel; CHANNELS] {
        let mut out = [Channel {
            kind: ChannelKind::History,
            relation: Relation::Writes,
            direction: Direction::Forward,
        }; CHANNELS];
        let mut i = 0;
        for kind in [ChannelKind::History, ChannelKind::Exposure] {
            for relation in Relation::ALL {
                for direction in [Direction::Forward, Direction::Reverse] {
                    out[i] = Channel {
                        kind,
                        relation,
                        direction,
                    };
                    i += 1;
                }
            }
        }
        out
    }

    pub fn index(&self) -> usize {
        let k = match self.kind {
            ChannelKind::History => 0,
            ChannelKind::Exposure => 1,
        };
        let d = match self.direction {
            Direction::Forward => 0,
            Direction::Reverse => 1,
        };
        k * 6 + self.relation.slot() * 2 + d
    }

    /// Type of the nodes sending along this channel.
    pub fn src_type(&self) -> NodeType {
        let t = self.relation.triple();
        match self.direction {
            Direction::Forward => t.src,
            Direction::Reverse => t.dst,
        }
    }

    /// Type of the nodes receiving along this channel.
    pub fn dst_type(&self) -> NodeType {
        let t = self.relation.triple();
        match self.direction {
            Direction::Forward => t.dst,
            Direction::Reverse => t.src,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ChannelKind::History => "history",
            ChannelKind::Exposure => "exposure",
        };
        let d = match self.direction {
            Direction::Forward => "fwd",
            Direction::Reverse => "rev",
        };
        write!(f, "{k}-{}-{d}", self.relation)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MessageOptions {
    /// Keep at most this many senders per receiver and channel, chosen by
    /// seeded sampling. Off by default.
    pub max_neighbors: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MessageGraph {
    pub counts: [usize; 3],
    /// Publication year of every paper mapped to [0, 1].
    pub paper_year: Vec<f64>,
    pub channels: Vec<Csr>,
}

impl MessageGraph {
    /// History edges of the snapshot plus the distinct exposure edges of
    /// `infosphere`. Node indices cover the whole underlying graph; nodes
    /// outside the snapshot simply have no edges.
    pub fn build(snapshot: &Snapshot<'_>, infosphere: Option<&InfosphereEdgeSet>, opts: &MessageOptions) -> Self {
        let g = snapshot.graph();
        let counts = g.counts();
        let history: Vec<Edge> = Relation::ALL.iter().flat_map(|&r| snapshot.edges(r)).collect();
        let exposure: Vec<Edge> = infosphere
            .map(|s| s.distinct_edges().into_iter().collect())
            .unwrap_or_default();
        let years = g.paper_years();
        let (lo, hi) = years
            .iter()
            .fold((i32::MAX, i32::MIN), |(lo, hi), &y| (lo.min(y), hi.max(y)));
        let span = (hi - lo).max(1) as f64;
        let paper_year = years.iter().map(|&y| (y - lo) as f64 / span).collect();
        Self::from_edges(counts, paper_year, &history, &exposure, opts)
    }

    pub fn from_edges(
        counts: [usize; 3],
        paper_year: Vec<f64>,
        history: &[Edge],
        exposure: &[Edge],
        opts: &MessageOptions,
    ) -> Self {
        assert_eq!(paper_year.len(), counts[NodeType::Paper.slot()]);
        let mut pairs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); CHANNELS];
        for (kind, edges) in [(ChannelKind::History, history), (ChannelKind::Exposure, exposure)] {
            for e in edges {
                for (direction, recv, send) in [(Direction::Forward, e.dst, e.src), (Direction::Reverse, e.src, e.dst)] {
                    let ch = Channel {
                        kind,
                        relation: e.relation,
                        direction,
                    };
                    debug_assert_eq!(recv.ty, ch.dst_type());
                    pairs[ch.index()].push((recv.index, send.index));
                }
            }
        }
        let channels = Channel::all()
            .iter()
            .map(|ch| {
                let rows = counts[ch.dst_type().slot()];
                let csr = Csr::from_pairs(rows, &mut pairs[ch.index()]);
                match opts.max_neighbors {
                    Some(cap) => cap_neighbors(&csr, cap, opts.seed, ch.index()),
                    None => csr,
                }
            })
            .collect();
        MessageGraph {
            counts,
            paper_year,
            channels,
        }
    }

    pub fn channel(&self, ch: Channel) -> &Csr {
        &self.channels[ch.index()]
    }

    pub fn edge_count(&self, kind: ChannelKind) -> usize {
        Channel::all()
            .iter()
            .filter(|c| c.kind == kind && c.direction == Direction::Forward)
            .map(|c| self.channel(*c).edge_count())
            .sum()
    }
}

fn cap_neighbors(csr: &Csr, cap: usize, seed: u64, channel: usize) -> Csr {
    let mut pairs = Vec::with_capacity(csr.edge_count());
    for r in 0..csr.rows() {
        let row = csr.row(r);
        if row.len() <= cap {
            pairs.extend(row.iter().map(|&t| (r as u32, t)));
        } else {
            let mut rng = keyed_rng(seed, "neighbor-cap", &[channel as u64, r as u64]);
            pairs.extend(index::sample(&mut rng, row.len(), cap).into_iter().map(|i| (r as u32, row[i])));
        }
    }
    Csr::from_pairs(csr.rows(), &mut pairs)
}
