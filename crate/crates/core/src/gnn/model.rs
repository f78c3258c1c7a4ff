//! Parameters, forward pass and hand-written backward pass.
//!
//! Encoder layer, for a node `v` of type `t`:
//!
//! ```text
//! h'_v = act( h_v W_self[t] + sum over channels c into t with N_c(v) non-empty
//!                              of ( AGG_{u in N_c(v)} h_u ) W_c + b_c )
//! ```
//!
//! with ReLU after the first layer and identity after the second. Paper
//! inputs are a free embedding plus the normalized year times a learned row
//! vector. The decoder scores a canonical author pair with
//! `sigmoid(relu([h_a, h_b] W1 + b1) W2 + b2)`.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::graph::{Channel, MessageGraph, CHANNELS};
use super::GnnError;
use crate::graph::{Csr, NodeType};
use crate::link::Example;
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Sum,
    Mean,
    Min,
    Max,
}

impl Aggregation {
    pub const ALL: [Aggregation; 4] = [Aggregation::Sum, Aggregation::Mean, Aggregation::Min, Aggregation::Max];
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
            Aggregation::Min => "min",
            Aggregation::Max => "max",
        })
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            "min" => Ok(Aggregation::Min),
            "max" => Ok(Aggregation::Max),
            _ => Err(format!("unknown aggregation {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub hidden: usize,
    pub aggregation: Aggregation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 64,
            hidden: 64,
            aggregation: Aggregation::Sum,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub self_weight: [Array2<f64>; 3],
    /// Per channel, `d_in x d_out`.
    pub weight: Vec<Array2<f64>>,
    /// Per channel, `1 x d_out`.
    pub bias: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderParams {
    pub w1: Array2<f64>,
    pub b1: Array2<f64>,
    pub w2: Array2<f64>,
    pub b2: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Per node type, `count x dim`.
    pub embeddings: [Array2<f64>; 3],
    /// `1 x dim`, scaled by the normalized paper year.
    pub year_weight: Array2<f64>,
    pub layers: [ConvParams; 2],
    pub decoder: DecoderParams,
}

impl Params {
    pub fn tensors(&self) -> Vec<&Array2<f64>> {
        let mut out: Vec<&Array2<f64>> = self.embeddings.iter().collect();
        out.push(&self.year_weight);
        for l in &self.layers {
            out.extend(l.self_weight.iter());
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        let d = &self.decoder;
        out.extend([&d.w1, &d.b1, &d.w2, &d.b2]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out: Vec<&mut Array2<f64>> = self.embeddings.iter_mut().collect();
        out.push(&mut self.year_weight);
        for l in &mut self.layers {
            out.extend(l.self_weight.iter_mut());
            out.extend(l.weight.iter_mut());
            out.extend(l.bias.iter_mut());
        }
        let d = &mut self.decoder;
        out.extend([&mut d.w1, &mut d.b1, &mut d.w2, &mut d.b2]);
        out
    }

    /// Names aligned with [`Params::tensors`].
    pub fn names() -> Vec<String> {
        let types = ["author", "paper", "topic"];
        let mut out: Vec<String> = types.iter().map(|t| format!("embedding.{t}")).collect();
        out.push("year_weight".into());
        for l in 1..=2 {
            out.extend(types.iter().map(|t| format!("conv{l}.self.{t}")));
            out.extend(Channel::all().iter().map(|c| format!("conv{l}.weight.{c}")));
            out.extend(Channel::all().iter().map(|c| format!("conv{l}.bias.{c}")));
        }
        out.extend(["decoder.w1", "decoder.b1", "decoder.w2", "decoder.b2"].map(String::from));
        out
    }

    pub fn zeros_like(&self) -> Params {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn init(counts: [usize; 3], cfg: &ModelConfig, seed: u64) -> Params {
        let d = cfg.dim;
        let embeddings = [0, 1, 2].map(|t| {
            let mut rng = keyed_rng(seed, "init-embedding", &[t as u64]);
            let scale = 1.0 / (d as f64).sqrt();
            Array2::from_shape_simple_fn((counts[t], d), || {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * scale
            })
        });
        let uniform = |rows: usize, cols: usize, key: u64| {
            let mut rng = keyed_rng(seed, "init-weight", &[key]);
            let bound = 1.0 / (rows as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-bound..=bound))
        };
        let mut key = 0u64;
        let mut next = |rows, cols| {
            key += 1;
            uniform(rows, cols, key)
        };
        let year_weight = next(1, d);
        let layers = [0, 1].map(|_| ConvParams {
            self_weight: [0, 1, 2].map(|_| next(d, d)),
            weight: (0..CHANNELS).map(|_| next(d, d)).collect(),
            bias: (0..CHANNELS).map(|_| Array2::zeros((1, d))).collect(),
        });
        let decoder = DecoderParams {
            w1: next(2 * d, cfg.hidden),
            b1: Array2::zeros((1, cfg.hidden)),
            w2: next(cfg.hidden, 1),
            b2: Array2::zeros((1, 1)),
        };
        Params {
            embeddings,
            year_weight,
            layers,
            decoder,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Params,
}

/// Aggregated sender features for one channel, with the selected sender per
/// entry for min and max.
struct Aggregated {
    value: Array2<f64>,
    selected: Option<Array2<u32>>,
}

fn aggregate(csr: &Csr, src: &Array2<f64>, agg: Aggregation) -> Aggregated {
    let rows = csr.rows();
    let d = src.ncols();
    let mut value = Array2::zeros((rows, d));
    let mut selected = matches!(agg, Aggregation::Min | Aggregation::Max).then(|| Array2::zeros((rows, d)));
    for v in 0..rows {
        let nbrs = csr.row(v);
        if nbrs.is_empty() {
            continue;
        }
        let mut out = value.row_mut(v);
        match agg {
            Aggregation::Sum | Aggregation::Mean => {
                for &u in nbrs {
                    out.scaled_add(1.0, &src.row(u as usize));
                }
                if agg == Aggregation::Mean {
                    out /= nbrs.len() as f64;
                }
            }
            Aggregation::Min | Aggregation::Max => {
                let sel = selected.as_mut().expect("allocated for min and max");
                let first = nbrs[0];
                out.assign(&src.row(first as usize));
                sel.row_mut(v).fill(first);
                let better = |x: f64, best: f64| if agg == Aggregation::Max { x > best } else { x < best };
                for &u in &nbrs[1..] {
                    let row = src.row(u as usize);
                    for k in 0..d {
                        if better(row[k], out[k]) {
                            out[k] = row[k];
                            sel[[v, k]] = u;
                        }
                    }
                }
            }
        }
    }
    Aggregated { value, selected }
}

/// Routes the gradient of an aggregate back to the senders.
fn aggregate_backward(csr: &Csr, grad: &Array2<f64>, agg: Aggregation, selected: Option<&Array2<u32>>, d_src: &mut Array2<f64>) {
    for v in 0..csr.rows() {
        let nbrs = csr.row(v);
        if nbrs.is_empty() {
            continue;
        }
        let g = grad.row(v);
        match agg {
            Aggregation::Sum | Aggregation::Mean => {
                let w = if agg == Aggregation::Mean { 1.0 / nbrs.len() as f64 } else { 1.0 };
                for &u in nbrs {
                    d_src.row_mut(u as usize).scaled_add(w, &g);
                }
            }
            Aggregation::Min | Aggregation::Max => {
                let sel = selected.expect("recorded for min and max");
                for k in 0..g.len() {
                    d_src[[sel[[v, k]] as usize, k]] += g[k];
                }
            }
        }
    }
}

fn nonempty_rows(csr: &Csr) -> Array1<f64> {
    Array1::from_shape_fn(csr.rows(), |v| if csr.degree(v) > 0 { 1.0 } else { 0.0 })
}

struct LayerCache {
    /// Per channel, present when the receiving type was computed.
    aggregated: Vec<Option<Aggregated>>,
    pre_activation: [Option<Array2<f64>>; 3],
}

fn layer_forward(
    p: &ConvParams,
    graph: &MessageGraph,
    input: &[Array2<f64>; 3],
    compute: [bool; 3],
    agg: Aggregation,
    relu: bool,
) -> ([Option<Array2<f64>>; 3], LayerCache) {
    let mut pre: [Option<Array2<f64>>; 3] = [0, 1, 2].map(|t| compute[t].then(|| input[t].dot(&p.self_weight[t])));
    let mut aggregated: Vec<Option<Aggregated>> = Vec::with_capacity(CHANNELS);
    for ch in Channel::all() {
        let t = ch.dst_type().slot();
        let Some(z) = pre[t].as_mut() else {
            aggregated.push(None);
            continue;
        };
        let csr = graph.channel(ch);
        if csr.edge_count() == 0 {
            aggregated.push(None);
            continue;
        }
        let a = aggregate(csr, &input[ch.src_type().slot()], agg);
        *z += &a.value.dot(&p.weight[ch.index()]);
        let mask = nonempty_rows(csr);
        let bias = p.bias[ch.index()].row(0);
        for (v, &m) in mask.iter().enumerate() {
            if m > 0.0 {
                z.row_mut(v).scaled_add(1.0, &bias);
            }
        }
        aggregated.push(Some(a));
    }
    let out = [0, 1, 2].map(|t| {
        pre[t]
            .as_ref()
            .map(|z| if relu { z.mapv(|x| x.max(0.0)) } else { z.clone() })
    });
    (
        out,
        LayerCache {
            aggregated,
            pre_activation: pre,
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn layer_backward(
    p: &ConvParams,
    graph: &MessageGraph,
    input: &[Array2<f64>; 3],
    cache: &LayerCache,
    d_out: [Option<Array2<f64>>; 3],
    agg: Aggregation,
    relu: bool,
    grads: &mut ConvParams,
) -> [Array2<f64>; 3] {
    let mut d_in = [0, 1, 2].map(|t| Array2::<f64>::zeros(input[t].raw_dim()));
    let d_pre: [Option<Array2<f64>>; 3] = [0, 1, 2].map(|t| {
        let g = d_out[t].as_ref()?;
        let z = cache.pre_activation[t].as_ref().expect("computed type");
        Some(if relu {
            let mut g = g.clone();
            g.zip_mut_with(z, |g, &z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            });
            g
        } else {
            g.clone()
        })
    });
    for t in 0..3 {
        if let Some(dz) = &d_pre[t] {
            grads.self_weight[t] += &input[t].t().dot(dz);
            d_in[t] += &dz.dot(&p.self_weight[t].t());
        }
    }
    for ch in Channel::all() {
        let Some(a) = &cache.aggregated[ch.index()] else {
            continue;
        };
        let dz = d_pre[ch.dst_type().slot()].as_ref().expect("aggregated implies computed");
        let csr = graph.channel(ch);
        let c = ch.index();
        grads.weight[c] += &a.value.t().dot(dz);
        let mask = nonempty_rows(csr);
        let db = mask.view().insert_axis(Axis(0)).dot(dz);
        grads.bias[c] += &db;
        let d_agg = dz.dot(&p.weight[c].t());
        aggregate_backward(csr, &d_agg, agg, a.selected.as_ref(), &mut d_in[ch.src_type().slot()]);
    }
    d_in
}

struct Encoded {
    input: [Array2<f64>; 3],
    hidden: [Array2<f64>; 3],
    output: [Option<Array2<f64>>; 3],
    caches: [LayerCache; 2],
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Scores one pair of representations, already in canonical order.
pub fn decode(h_a: ArrayView1<'_, f64>, h_b: ArrayView1<'_, f64>, dec: &DecoderParams) -> f64 {
    let d = h_a.len();
    let mut z = dec.b1.row(0).to_owned();
    z += &h_a.dot(&dec.w1.slice(s![..d, ..]));
    z += &h_b.dot(&dec.w1.slice(s![d.., ..]));
    z.mapv_inplace(|x| x.max(0.0));
    sigmoid(z.dot(&dec.w2.column(0)) + dec.b2[[0, 0]])
}

struct DecoderPass {
    x: Array2<f64>,
    z1: Array2<f64>,
    r: Array2<f64>,
    logits: Array1<f64>,
}

fn decoder_forward(dec: &DecoderParams, authors: &Array2<f64>, batch: &[Example]) -> DecoderPass {
    let d = authors.ncols();
    let mut x = Array2::zeros((batch.len(), 2 * d));
    for (i, e) in batch.iter().enumerate() {
        let (lo, hi) = if e.a.index <= e.b.index { (e.a, e.b) } else { (e.b, e.a) };
        x.slice_mut(s![i, ..d]).assign(&authors.row(lo.idx()));
        x.slice_mut(s![i, d..]).assign(&authors.row(hi.idx()));
    }
    let z1 = x.dot(&dec.w1) + &dec.b1;
    let r = z1.mapv(|v| v.max(0.0));
    let logits = r.dot(&dec.w2).column(0).to_owned() + dec.b2[[0, 0]];
    DecoderPass { x, z1, r, logits }
}

impl Model {
    pub fn new(counts: [usize; 3], config: ModelConfig, seed: u64) -> Self {
        Model {
            config,
            params: Params::init(counts, &config, seed),
        }
    }

    fn check(&self, graph: &MessageGraph) -> Result<(), GnnError> {
        for t in NodeType::ALL {
            let rows = self.params.embeddings[t.slot()].nrows();
            if rows != graph.counts[t.slot()] {
                return Err(GnnError::Shape(format!(
                    "{t} embeddings have {rows} rows, graph has {} nodes",
                    graph.counts[t.slot()]
                )));
            }
        }
        Ok(())
    }

    fn inputs(&self, graph: &MessageGraph) -> [Array2<f64>; 3] {
        let mut input = self.params.embeddings.clone();
        let years = Array2::from_shape_vec((graph.paper_year.len(), 1), graph.paper_year.clone()).expect("column");
        input[NodeType::Paper.slot()] += &years.dot(&self.params.year_weight);
        input
    }

    fn run(&self, graph: &MessageGraph, output_types: [bool; 3]) -> Result<Encoded, GnnError> {
        self.check(graph)?;
        let agg = self.config.aggregation;
        let input = self.inputs(graph);
        let (h1, c1) = layer_forward(&self.params.layers[0], graph, &input, [true; 3], agg, true);
        let hidden = h1.map(|h| h.expect("all types computed"));
        let (output, c2) = layer_forward(&self.params.layers[1], graph, &hidden, output_types, agg, false);
        Ok(Encoded {
            input,
            hidden,
            output,
            caches: [c1, c2],
        })
    }

    /// Final representations of every node, per type.
    pub fn encode(&self, graph: &MessageGraph) -> Result<[Array2<f64>; 3], GnnError> {
        let enc = self.run(graph, [true; 3])?;
        Ok(enc.output.map(|h| h.expect("all types computed")))
    }

    /// Author representations only; enough for scoring pairs.
    pub fn encode_authors(&self, graph: &MessageGraph) -> Result<Array2<f64>, GnnError> {
        let enc = self.run(graph, [true, false, false])?;
        let [a, _, _] = enc.output;
        Ok(a.expect("authors computed"))
    }

    /// Link probability per example, given author representations.
    pub fn score(&self, authors: &Array2<f64>, batch: &[Example]) -> Vec<f64> {
        let pass = decoder_forward(&self.params.decoder, authors, batch);
        pass.logits.iter().map(|&s| sigmoid(s)).collect()
    }

    pub fn predict(&self, graph: &MessageGraph, batch: &[Example]) -> Result<Vec<f64>, GnnError> {
        Ok(self.score(&self.encode_authors(graph)?, batch))
    }

    /// Mean binary cross-entropy, computed from logits.
    pub fn loss(&self, graph: &MessageGraph, batch: &[Example]) -> Result<f64, GnnError> {
        let authors = self.encode_authors(graph)?;
        Ok(self.loss_from(&authors, batch))
    }

    pub fn loss_from(&self, authors: &Array2<f64>, batch: &[Example]) -> f64 {
        let pass = decoder_forward(&self.params.decoder, authors, batch);
        let total: f64 = pass
            .logits
            .iter()
            .zip(batch)
            .map(|(&s, e)| softplus(s) - if e.label { s } else { 0.0 })
            .sum();
        total / batch.len() as f64
    }

    pub fn loss_and_grad(&self, graph: &MessageGraph, batch: &[Example]) -> Result<(f64, Params), GnnError> {
        if batch.is_empty() {
            return Err(GnnError::EmptyDataset);
        }
        let agg = self.config.aggregation;
        let enc = self.run(graph, [true, false, false])?;
        let authors = enc.output[0].as_ref().expect("authors computed");
        let dec = &self.params.decoder;
        let pass = decoder_forward(dec, authors, batch);
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut d_logit = Array1::zeros(batch.len());
        for (i, (&s, e)) in pass.logits.iter().zip(batch).enumerate() {
            let y = if e.label { 1.0 } else { 0.0 };
            loss += softplus(s) - y * s;
            d_logit[i] = (sigmoid(s) - y) / n;
        }
        loss /= n;
        if !loss.is_finite() {
            return Err(GnnError::NonFinite(loss));
        }

        let mut g = self.params.zeros_like();
        let d_logit_col = d_logit.view().insert_axis(Axis(1));
        g.decoder.w2 = pass.r.t().dot(&d_logit_col);
        g.decoder.b2[[0, 0]] = d_logit.sum();
        let mut d_z1 = d_logit_col.dot(&dec.w2.t());
        d_z1.zip_mut_with(&pass.z1, |g, &z| {
            if z <= 0.0 {
                *g = 0.0
            }
        });
        g.decoder.w1 = pass.x.t().dot(&d_z1);
        g.decoder.b1 = d_z1.sum_axis(Axis(0)).insert_axis(Axis(0));
        let d_x = d_z1.dot(&dec.w1.t());

        let d = authors.ncols();
        let mut d_authors = Array2::zeros(authors.raw_dim());
        for (i, e) in batch.iter().enumerate() {
            let (lo, hi) = if e.a.index <= e.b.index { (e.a, e.b) } else { (e.b, e.a) };
            d_authors.row_mut(lo.idx()).scaled_add(1.0, &d_x.slice(s![i, ..d]));
            d_authors.row_mut(hi.idx()).scaled_add(1.0, &d_x.slice(s![i, d..]));
        }

        let [c1, c2] = &enc.caches;
        let d_hidden = layer_backward(
            &self.params.layers[1],
            graph,
            &enc.hidden,
            c2,
            [Some(d_authors), None, None],
            agg,
            false,
            &mut g.layers[1],
        );
        let d_input = layer_backward(
            &self.params.layers[0],
            graph,
            &enc.input,
            c1,
            d_hidden.map(Some),
            agg,
            true,
            &mut g.layers[0],
        );
        let years = ndarray::ArrayView2::from_shape((1, graph.paper_year.len()), &graph.paper_year).expect("row");
        g.year_weight = years.dot(&d_input[NodeType::Paper.slot()]);
        g.embeddings = d_input;
        Ok((loss, g))
    }
}
