use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::graph::MessageGraph;
use super::model::{Aggregation, Model, ModelConfig, Params};
use super::GnnError;
use crate::link::Example;
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub patience: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub dim: usize,
    pub hidden: usize,
    pub aggregation: Aggregation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            patience: 10,
            batch: 1024,
            learning_rate: 1e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            dim: 64,
            hidden: 64,
            aggregation: Aggregation::Sum,
        }
    }
}

impl TrainConfig {
    pub fn model(&self) -> ModelConfig {
        ModelConfig {
            dim: self.dim,
            hidden: self.hidden,
            aggregation: self.aggregation,
        }
    }

    pub fn validate(&self) -> Result<(), GnnError> {
        let ok = self.epochs > 0
            && self.patience > 0
            && self.batch > 0
            && self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0
            && self.dim > 0
            && self.hidden > 0;
        if ok {
            Ok(())
        } else {
            Err(GnnError::Config(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Params,
    pub v: Params,
}

impl AdamState {
    pub fn new(params: &Params) -> Self {
        AdamState {
            step: 0,
            m: params.zeros_like(),
            v: params.zeros_like(),
        }
    }

    pub fn update(&mut self, params: &mut Params, grads: &Params, cfg: &TrainConfig) {
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        let lr = cfg.learning_rate;
        let eps = cfg.epsilon;
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            ndarray::Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        }
    }
}

/// Tracks the best validation loss and the parameters that achieved it.
#[derive(Debug, Clone)]
pub struct EarlyStopping<T> {
    patience: usize,
    best_loss: f64,
    best_epoch: usize,
    best: Option<T>,
    stale: usize,
}

impl<T> EarlyStopping<T> {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best_loss: f64::INFINITY,
            best_epoch: 0,
            best: None,
            stale: 0,
        }
    }

    /// Records an epoch; `state` is only called on improvement. Returns
    /// true when training should stop.
    pub fn observe(&mut self, epoch: usize, val_loss: f64, state: impl FnOnce() -> T) -> bool {
        if val_loss < self.best_loss {
            self.best_loss = val_loss;
            self.best_epoch = epoch;
            self.best = Some(state());
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best_loss
    }

    pub fn into_best(self) -> Option<T> {
        self.best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl History {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "epoch,train_loss,val_loss,val_acc")?;
        for r in &self.epochs {
            writeln!(w, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.val_acc)?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub adam: AdamState,
    pub history: History,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub loss: f64,
    pub count: usize,
}

/// Metrics of probabilities against labels, thresholded at `p >= 0.5`.
pub fn metrics(probs: &[f64], labels: &[bool]) -> Result<Metrics, GnnError> {
    if probs.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let (mut tp, mut fp, mut tn, mut fnn) = (0usize, 0usize, 0usize, 0usize);
    let mut loss = 0.0;
    for (&p, &y) in probs.iter().zip(labels) {
        match (p >= 0.5, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fnn += 1,
        }
        let q = if y { p } else { 1.0 - p };
        loss -= q.max(1e-300).ln();
    }
    let n = probs.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(Metrics {
        accuracy: ratio(tp + tn, n),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fnn),
        auc: auc(probs, labels),
        loss: loss / n as f64,
        count: n,
    })
}

/// Area under the ROC curve by average ranks; ties count one half.
pub fn auc(probs: &[f64], labels: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&i, &j| probs[i].total_cmp(&probs[j]));
    let mut rank = vec![0.0; probs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && probs[order[j + 1]] == probs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            rank[order[k]] = avg;
        }
        i = j + 1;
    }
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return 0.5;
    }
    let sum: f64 = rank.iter().zip(labels).filter(|(_, &y)| y).map(|(r, _)| r).sum();
    (sum - (pos * (pos + 1)) as f64 / 2.0) / (pos * neg) as f64
}

pub fn evaluate(model: &Model, graph: &MessageGraph, data: &[Example]) -> Result<Metrics, GnnError> {
    if data.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let probs = model.predict(graph, data)?;
    let labels: Vec<bool> = data.iter().map(|e| e.label).collect();
    metrics(&probs, &labels)
}

/// Minibatch Adam with seeded epoch shuffles and early stopping on the
/// validation loss. Returns the best-validation parameters.
pub fn train(graph: &MessageGraph, train_set: &[Example], val_set: &[Example], cfg: &TrainConfig) -> Result<Trained, GnnError> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(GnnError::EmptyDataset);
    }
    let mut model = Model::new(graph.counts, cfg.model(), cfg.seed);
    let mut adam = AdamState::new(&model.params);
    let mut stopper: EarlyStopping<(Params, AdamState)> = EarlyStopping::new(cfg.patience);
    let mut history = History::default();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch);
    for epoch in 1..=cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut keyed_rng(cfg.seed, "epoch", &[epoch as u64]));
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train_set[i]));
            let (loss, grads) = match model.loss_and_grad(graph, &batch) {
                Ok(r) => r,
                Err(GnnError::NonFinite(loss)) => {
                    return Err(GnnError::Diverged {
                        epoch,
                        loss,
                        last_finite: Box::new(model),
                    })
                }
                Err(e) => return Err(e),
            };
            total += loss * batch.len() as f64;
            let before = model.params.clone();
            adam.update(&mut model.params, &grads, cfg);
            if !model.params.is_finite() {
                return Err(GnnError::Diverged {
                    epoch,
                    loss,
                    last_finite: Box::new(Model {
                        config: model.config,
                        params: before,
                    }),
                });
            }
        }
        let val = evaluate(&model, graph, val_set)?;
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: total / train_set.len() as f64,
            val_loss: val.loss,
            val_acc: val.accuracy,
        });
        log::debug!("epoch {epoch}: train {:.5} val {:.5} acc {:.4}", total / train_set.len() as f64, val.loss, val.accuracy);
        if stopper.observe(epoch, val.loss, || (model.params.clone(), adam.clone())) {
            history.stopped_early = true;
            break;
        }
    }
    history.best_epoch = stopper.best_epoch();
    if let Some((params, state)) = stopper.into_best() {
        model.params = params;
        adam = state;
    }
    Ok(Trained { model, adam, history })
}
