#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use acadnet::gnn::{evaluate, train, Aggregation, MessageGraph, MessageOptions, Model, ModelConfig, Params, TrainConfig};
use acadnet::graph::{Edge, EdgeTriple, GraphBuilder, HeteroTemporalGraph, NodeRef, NodeType, Relation};
use acadnet::link::{Example, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random connected single-year graph: a spanning tree over legal triples
/// plus extra random edges.
pub fn random_connected_graph(seed: u64, max_nodes: usize) -> HeteroTemporalGraph {
    let mut r = rng(seed);
    let total = r.random_range(12..=max_nodes);
    let authors = r.random_range(2..=total / 3);
    let topics = r.random_range(1..=(total / 6).max(1));
    let papers = total - authors - topics;
    let mut b = GraphBuilder::new();
    let a: Vec<NodeRef> = (0..authors).map(|i| b.add_node(NodeType::Author, &format!("a{i}"))).collect();
    let p: Vec<NodeRef> = (0..papers).map(|i| b.add_paper(&format!("p{i}"), 2000)).collect();
    let t: Vec<NodeRef> = (0..topics).map(|i| b.add_node(NodeType::Topic, &format!("t{i}"))).collect();
    // papers form a tree by citations, then authors and topics hang off it
    for i in 1..papers {
        let j = r.random_range(0..i);
        if r.random_bool(0.5) {
            b.add_edge(EdgeTriple::CITES, p[i], p[j]).unwrap();
        } else {
            b.add_edge(EdgeTriple::CITES, p[j], p[i]).unwrap();
        }
    }
    for &x in &a {
        b.add_edge(EdgeTriple::WRITES, x, p[r.random_range(0..papers)]).unwrap();
    }
    for &x in &t {
        b.add_edge(EdgeTriple::DEALS_WITH, p[r.random_range(0..papers)], x).unwrap();
    }
    let extra = r.random_range(0..=total);
    for _ in 0..extra {
        let q = p[r.random_range(0..papers)];
        match r.random_range(0..3) {
            0 => b.add_edge(EdgeTriple::WRITES, a[r.random_range(0..authors)], q).unwrap(),
            1 => b.add_edge(EdgeTriple::DEALS_WITH, q, t[r.random_range(0..topics)]).unwrap(),
            _ => {
                let o = p[r.random_range(0..papers)];
                if o != q {
                    b.add_edge(EdgeTriple::CITES, q, o).unwrap();
                }
            }
        }
    }
    b.build().unwrap()
}

/// Undirected hop distances from `src` over every edge of the graph.
pub fn bfs_distances(g: &HeteroTemporalGraph, src: NodeRef) -> HashMap<NodeRef, usize> {
    let s = g.snapshot(i32::MAX);
    let mut dist = HashMap::from([(src, 0)]);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        for inc in s.incident(u) {
            dist.entry(inc.node).or_insert_with(|| {
                queue.push_back(inc.node);
                du + 1
            });
        }
    }
    dist
}

/// A small heterogeneous message graph with history and exposure edges,
/// `authors + papers + topics` nodes.
pub fn small_message_graph(seed: u64, authors: usize, papers: usize, topics: usize) -> (MessageGraph, Vec<Edge>, Vec<Edge>) {
    let mut r = rng(seed);
    let mut hist = BTreeSet::new();
    let mut expo = BTreeSet::new();
    for i in 0..papers {
        let p = NodeRef::paper(i as u32);
        for _ in 0..2 {
            hist.insert(Edge::new(NodeRef::author(r.random_range(0..authors as u32)), Relation::Writes, p));
        }
        hist.insert(Edge::new(p, Relation::DealsWith, NodeRef::topic(r.random_range(0..topics as u32))));
        if i > 0 {
            hist.insert(Edge::new(p, Relation::Cites, NodeRef::paper(r.random_range(0..i as u32))));
        }
    }
    for _ in 0..papers {
        let p = NodeRef::paper(r.random_range(0..papers as u32));
        expo.insert(Edge::new(NodeRef::author(r.random_range(0..authors as u32)), Relation::Writes, p));
        let q = NodeRef::paper(r.random_range(0..papers as u32));
        if p != q {
            expo.insert(Edge::new(p, Relation::Cites, q));
        }
    }
    expo.insert(Edge::new(NodeRef::paper(0), Relation::DealsWith, NodeRef::topic(0)));
    let hist: Vec<Edge> = hist.into_iter().collect();
    let expo: Vec<Edge> = expo.into_iter().collect();
    let years: Vec<f64> = (0..papers).map(|_| r.random_range(0.0..1.0)).collect();
    let g = MessageGraph::from_edges([authors, papers, topics], years, &hist, &expo, &MessageOptions::default());
    (g, hist, expo)
}

pub fn random_examples(seed: u64, authors: usize, count: usize) -> Vec<Example> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let a = r.random_range(0..authors as u32);
            let mut b = r.random_range(0..authors as u32 - 1);
            if b >= a {
                b += 1;
            }
            Example {
                a: NodeRef::author(a.min(b)),
                b: NodeRef::author(a.max(b)),
                label: r.random_bool(0.5),
                split: Split::Train,
            }
        })
        .collect()
}

/// Makes biases non-zero so their gradients are exercised.
pub fn jitter_biases(params: &mut Params, seed: u64) {
    let mut r = rng(seed);
    for l in &mut params.layers {
        for b in &mut l.bias {
            b.mapv_inplace(|_| r.random_range(-0.3..0.3));
        }
    }
    params.decoder.b1.mapv_inplace(|_| r.random_range(-0.3..0.3));
}

#[derive(Debug, Clone)]
pub struct GradReport {
    pub max_rel_error: f64,
    pub worst: String,
    pub checked: usize,
}

/// Central finite differences against the analytic gradient, entry by
/// entry. Relative error is `|a - n| / max(|a|, |n|, floor)`.
pub fn gradient_check(model: &Model, graph: &MessageGraph, batch: &[Example], step: f64, floor: f64) -> GradReport {
    let (_, grads) = model.loss_and_grad(graph, batch).unwrap();
    let names = Params::names();
    let analytic: Vec<Vec<f64>> = grads.tensors().iter().map(|t| t.iter().copied().collect()).collect();
    let mut probe = model.clone();
    let mut report = GradReport {
        max_rel_error: 0.0,
        worst: String::new(),
        checked: 0,
    };
    let count = probe.params.tensors().len();
    for ti in 0..count {
        for (k, &a) in analytic[ti].iter().enumerate() {
            let orig = probe.params.tensors()[ti].as_slice().unwrap()[k];
            probe.params.tensors_mut()[ti].as_slice_mut().unwrap()[k] = orig + step;
            let up = probe.loss(graph, batch).unwrap();
            probe.params.tensors_mut()[ti].as_slice_mut().unwrap()[k] = orig - step;
            let down = probe.loss(graph, batch).unwrap();
            probe.params.tensors_mut()[ti].as_slice_mut().unwrap()[k] = orig;
            let numeric = (up - down) / (2.0 * step);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            report.checked += 1;
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = format!("{}[{k}] analytic {a:e} numeric {numeric:e}", names[ti]);
            }
        }
    }
    report
}

pub fn grad_check_instance(agg: Aggregation, seed: u64) -> GradReport {
    let (graph, _, _) = small_message_graph(seed, 10, 15, 5);
    let cfg = ModelConfig {
        dim: 4,
        hidden: 5,
        aggregation: agg,
    };
    let mut model = Model::new(graph.counts, cfg, seed);
    jitter_biases(&mut model.params, seed + 1);
    let batch = random_examples(seed + 2, 10, 16);
    gradient_check(&model, &graph, &batch, 1e-5, 1e-6)
}

/// Two author clusters with cluster-specific topics and papers. Positive
/// pairs are exactly the pairs inside cluster A.
pub fn separable_instance(per_cluster: usize) -> (HeteroTemporalGraph, Vec<Example>) {
    let mut b = GraphBuilder::new();
    let topics = [b.add_node(NodeType::Topic, "ta"), b.add_node(NodeType::Topic, "tb")];
    let mut r = rng(99);
    let mut authors = [Vec::new(), Vec::new()];
    for (c, list) in authors.iter_mut().enumerate() {
        for i in 0..per_cluster {
            list.push(b.add_node(NodeType::Author, &format!("a{c}-{i}")));
        }
    }
    let mut papers = [Vec::new(), Vec::new()];
    for c in 0..2 {
        for i in 0..per_cluster * 2 {
            let p = b.add_paper(&format!("p{c}-{i}"), 2000);
            b.add_edge(EdgeTriple::DEALS_WITH, p, topics[c]).unwrap();
            for _ in 0..2 {
                let a = authors[c][r.random_range(0..per_cluster)];
                b.add_edge(EdgeTriple::WRITES, a, p).unwrap();
            }
            papers[c].push(p);
        }
        for (i, &a) in authors[c].iter().enumerate() {
            b.add_edge(EdgeTriple::WRITES, a, papers[c][i]).unwrap();
        }
    }
    let g = b.build().unwrap();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let all: Vec<(NodeRef, usize)> = (0..2).flat_map(|c| authors[c].iter().map(move |&a| (a, c))).collect();
    for (i, &(x, cx)) in all.iter().enumerate() {
        for &(y, cy) in &all[i + 1..] {
            let (a, b) = if x.index < y.index { (x, y) } else { (y, x) };
            let e = Example {
                a,
                b,
                label: cx == 0 && cy == 0,
                split: Split::Train,
            };
            if e.label {
                pos.push(e)
            } else {
                neg.push(e)
            }
        }
    }
    // balance by keeping the first negatives in hash order
    neg.sort_by_key(|e| acadnet::rng::pair_hash(e.a.index as u64, e.b.index as u64));
    neg.truncate(pos.len());
    let mut examples = Vec::new();
    for list in [pos, neg] {
        let mut list = list;
        list.sort_by_key(|e| acadnet::rng::pair_hash(e.a.index as u64, e.b.index as u64));
        let n = list.len();
        for (i, mut e) in list.into_iter().enumerate() {
            e.split = if i < n * 8 / 10 {
                Split::Train
            } else if i < n * 9 / 10 {
                Split::Val
            } else {
                Split::Test
            };
            examples.push(e);
        }
    }
    (g, examples)
}

/// Trains on [`separable_instance`]; returns test accuracy, accuracy over
/// every example, and the raw parameter bytes.
pub fn separable_run(seed: u64) -> (f64, f64, Vec<u8>) {
    let (g, examples) = separable_instance(16);
    let graph = MessageGraph::build(&g.snapshot(2000), None, &MessageOptions::default());
    let split = |s: Split| examples.iter().filter(|e| e.split == s).copied().collect::<Vec<_>>();
    let cfg = TrainConfig {
        epochs: 200,
        patience: 200,
        batch: 64,
        learning_rate: 1e-2,
        seed,
        dim: 16,
        hidden: 16,
        ..Default::default()
    };
    let out = train(&graph, &split(Split::Train), &split(Split::Val), &cfg).unwrap();
    let test = evaluate(&out.model, &graph, &split(Split::Test)).unwrap();
    let all = evaluate(&out.model, &graph, &examples).unwrap();
    let mut bytes = Vec::new();
    for t in out.model.params.tensors() {
        for x in t.iter() {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    (test.accuracy, all.accuracy, bytes)
}

/// Single-year graph in which every node has at least `min_degree`
/// distinct neighbors.
pub fn min_degree_graph(seed: u64, authors: usize, papers: usize, topics: usize, min_degree: usize) -> HeteroTemporalGraph {
    let mut r = rng(seed);
    let mut b = GraphBuilder::new();
    let a: Vec<NodeRef> = (0..authors).map(|i| b.add_node(NodeType::Author, &format!("a{i}"))).collect();
    let p: Vec<NodeRef> = (0..papers).map(|i| b.add_paper(&format!("p{i}"), 2000)).collect();
    let t: Vec<NodeRef> = (0..topics).map(|i| b.add_node(NodeType::Topic, &format!("t{i}"))).collect();
    for (i, &x) in p.iter().enumerate() {
        let mut cited = BTreeSet::new();
        while cited.len() < min_degree {
            let j = r.random_range(0..papers);
            if j != i {
                cited.insert(j);
            }
        }
        for j in cited {
            b.add_edge(EdgeTriple::CITES, x, p[j]).unwrap();
        }
        b.add_edge(EdgeTriple::DEALS_WITH, x, t[i % topics]).unwrap();
        b.add_edge(EdgeTriple::WRITES, a[i % authors], x).unwrap();
    }
    for &x in &a {
        let mut written = BTreeSet::new();
        while written.len() < min_degree {
            written.insert(r.random_range(0..papers));
        }
        for j in written {
            b.add_edge(EdgeTriple::WRITES, x, p[j]).unwrap();
        }
    }
    b.build().unwrap()
}

/// Undirected neighbor count per node, for checking [`min_degree_graph`].
pub fn min_degree(g: &HeteroTemporalGraph) -> usize {
    let s = g.snapshot(i32::MAX);
    [NodeType::Author, NodeType::Paper, NodeType::Topic]
        .into_iter()
        .flat_map(|ty| s.nodes(ty).collect::<Vec<_>>())
        .map(|n| s.incident(n).iter().map(|i| i.node).collect::<BTreeSet<_>>().len())
        .min()
        .unwrap_or(0)
}
