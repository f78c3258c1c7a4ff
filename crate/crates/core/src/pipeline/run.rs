//! The end-to-end run.
//!
//! Every stage writes its artifact next to a `.key` file holding the SHA-256
//! of the stage's inputs, which chain through the keys of upstream stages. A
//! stage whose key file matches and whose artifact loads is skipped. The
//! corpus graph and the seedgraphs go to a cache directory so runs that
//! differ only downstream share them.

use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::report::ResultRow;
use super::spec::{CorpusSpec, ExperimentSpec, Resolved};
use super::PipelineError;
use crate::expansion::{expand_all, ExpansionStats};
use crate::gnn::{evaluate, train, Checkpoint, GnnError, History, MessageGraph, MessageOptions, Metrics, TrainConfig};
use crate::graph::{io as graph_io, HeteroTemporalGraph};
use crate::infosphere::{
    drop_infosphere, materialize_colored, random_paper_infosphere, top_paper_infosphere, top_paper_per_topic_infosphere, ExposureSource,
    InfosphereEdgeSet,
};
use crate::ingest::{ingest_stream, synth_generate, EdgeCounts, IngestStats, InputFormat, NodeCounts};
use crate::graph::{NodeType, Relation};
use crate::link::{build_dataset, LinkDataset, Split};
use crate::rng::derive_seed;
use crate::seedgraph::{self, Seedgraph};

pub const CACHE_ENV: &str = "ACADNET_CACHE";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Shared artifact cache; falls back to `$ACADNET_CACHE`, then to
    /// `<output>/cache`.
    pub cache_dir: Option<PathBuf>,
    /// Recompute every stage.
    pub force: bool,
}

impl RunOptions {
    pub fn cache_for(&self, spec: &ExperimentSpec) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| spec.output.join("cache"))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: ResultRow,
    /// Stages whose artifacts were reused.
    pub reused: Vec<&'static str>,
    pub output: PathBuf,
}

fn at<E: Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Hex SHA-256 over length-prefixed parts.
pub fn content_key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

fn file_digest(path: &Path) -> std::io::Result<String> {
    let mut h = Sha256::new();
    let mut f = BufReader::new(File::open(path)?);
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

/// Writes through a temporary file so a crash never leaves a truncated
/// artifact under the final name.
fn write_atomic(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), String>) -> Result<(), String> {
    let tmp = path.with_extension("tmp");
    let file = File::create(&tmp).map_err(|e| format!("{}: {e}", tmp.display()))?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().map_err(|e| e.to_string())?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| e.to_string())
}

struct Stage<'a> {
    name: &'static str,
    artifact: PathBuf,
    key: String,
    force: bool,
    reused: &'a mut Vec<&'static str>,
}

impl Stage<'_> {
    fn key_path(&self) -> PathBuf {
        let mut p = self.artifact.clone().into_os_string();
        p.push(".key");
        PathBuf::from(p)
    }

    fn run<T>(
        self,
        load: impl FnOnce(&Path) -> Result<T, String>,
        compute: impl FnOnce() -> Result<T, PipelineError>,
        save: impl FnOnce(&T, &mut BufWriter<File>) -> Result<(), String>,
    ) -> Result<T, PipelineError> {
        let key_path = self.key_path();
        if !self.force && fs::read_to_string(&key_path).is_ok_and(|k| k.trim() == self.key) {
            match load(&self.artifact) {
                Ok(v) => {
                    log::info!("{}: reusing {}", self.name, self.artifact.display());
                    self.reused.push(self.name);
                    return Ok(v);
                }
                Err(e) => log::warn!("{}: stale artifact {} ({e}), recomputing", self.name, self.artifact.display()),
            }
        }
        let started = Instant::now();
        let value = compute()?;
        let _ = fs::remove_file(&key_path);
        write_atomic(&self.artifact, |w| save(&value, w)).map_err(at(self.name))?;
        fs::write(&key_path, &self.key).map_err(at(self.name))?;
        log::info!("{}: done in {:.2?}", self.name, started.elapsed());
        Ok(value)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphArtifact {
    stats: IngestStats,
}

#[derive(Serialize, Deserialize)]
struct InfosphereSummary {
    entries: usize,
    distinct_edges: usize,
    authors: usize,
    expansion: Option<ExpansionStats>,
}

#[derive(Serialize, Deserialize)]
struct TrainSummary {
    history: History,
    seconds: f64,
}

fn load_graph(path: &Path) -> Result<HeteroTemporalGraph, String> {
    graph_io::load(path).map_err(|e| e.to_string())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let f = File::open(path).map_err(|e| e.to_string())?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| e.to_string())
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), String> {
    write_atomic(path, |w| serde_json::to_writer_pretty(&mut *w, v).map_err(|e| e.to_string()))
}

pub fn load_corpus(corpus: &CorpusSpec, seed: u64) -> Result<(HeteroTemporalGraph, IngestStats), PipelineError> {
    match corpus {
        CorpusSpec::File { path, format } => {
            let format: InputFormat = format.parse().map_err(PipelineError::Spec)?;
            let f = File::open(path).map_err(at("ingest"))?;
            ingest_stream(BufReader::with_capacity(1 << 20, f), format).map_err(at("ingest"))
        }
        CorpusSpec::Synth(cfg) => {
            let g = synth_generate(cfg, seed).map_err(at("synth"))?;
            let stats = graph_stats(&g);
            Ok((g, stats))
        }
    }
}

/// Node and edge counts of an already built graph.
pub fn graph_stats(g: &HeteroTemporalGraph) -> IngestStats {
    IngestStats {
        records_parsed: g.node_count(NodeType::Paper) as u64,
        nodes: NodeCounts {
            author: g.node_count(NodeType::Author),
            paper: g.node_count(NodeType::Paper),
            topic: g.node_count(NodeType::Topic),
        },
        edges: EdgeCounts {
            writes: g.edge_count(Relation::Writes),
            deals_with: g.edge_count(Relation::DealsWith),
            cites: g.edge_count(Relation::Cites),
        },
        ..Default::default()
    }
}

/// The penultimate corpus year, so that `y + 1` exists.
pub fn default_year(graph: &HeteroTemporalGraph) -> Result<i32, PipelineError> {
    let (lo, hi) = graph.year_range().ok_or_else(|| at("dataset")("empty corpus"))?;
    if hi <= lo {
        return Err(at("dataset")(format!("corpus spans only year {lo}")));
    }
    Ok(hi - 1)
}

/// Builds the infosphere for `spec` on the snapshot at `year`.
pub fn build_infosphere(
    graph: &HeteroTemporalGraph,
    year: i32,
    resolved: Resolved,
    seedgraphs: Option<&[Seedgraph]>,
    seed: u64,
) -> (InfosphereEdgeSet, Option<ExpansionStats>) {
    let sy = graph.snapshot(year);
    let sgs = || seedgraphs.expect("seedgraphs computed for this infosphere");
    match resolved {
        Resolved::None => (InfosphereEdgeSet::empty(year), None),
        Resolved::TopPaper(n) => (top_paper_infosphere(&sy, n), None),
        Resolved::TopPaperPerTopic(m, n) => (top_paper_per_topic_infosphere(&sy, m, n), None),
        Resolved::Random => (random_paper_infosphere(&sy, sgs(), derive_seed(seed, "random-infosphere", &[])), None),
        Resolved::Expand(params) => {
            let infos = expand_all(sgs(), &sy, &params, derive_seed(seed, "expansion", &[]));
            let mut stats = ExpansionStats::default();
            for i in &infos {
                stats.merge(&i.stats);
            }
            stats.green_per_path.clear();
            (materialize_colored(year, &infos, ExposureSource::AuthorFuture), Some(stats))
        }
    }
}

pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunOutcome, PipelineError> {
    spec.validate()?;
    let started = Instant::now();
    let out = spec.output.clone();
    let cache = opts.cache_for(spec);
    fs::create_dir_all(&out).map_err(at("setup"))?;
    fs::create_dir_all(&cache).map_err(at("setup"))?;
    fs::write(out.join("spec.toml"), spec.to_toml()).map_err(at("setup"))?;
    let mut reused = Vec::new();

    // corpus
    let corpus_key = match &spec.corpus {
        CorpusSpec::File { path, format } => {
            content_key(&["corpus-file", &file_digest(path).map_err(at("ingest"))?, format])
        }
        CorpusSpec::Synth(cfg) => content_key(&["corpus-synth", &json(cfg), &spec.seed.to_string()]),
    };
    let graph_path = cache.join(format!("graph-{}.anpg", &corpus_key[..16]));
    let graph = Stage {
        name: "ingest",
        artifact: graph_path.clone(),
        key: corpus_key.clone(),
        force: opts.force,
        reused: &mut reused,
    }
    .run(
        load_graph,
        || {
            let (g, stats) = load_corpus(&spec.corpus, spec.seed)?;
            write_json(&graph_path.with_extension("stats.json"), &GraphArtifact { stats }).map_err(at("ingest"))?;
            Ok(g)
        },
        |g, w| graph_io::write_graph(g, w).map_err(|e| e.to_string()),
    )?;

    let year = match spec.prediction_year {
        Some(y) => y,
        None => default_year(&graph)?,
    };
    let (lo, hi) = graph.year_range().expect("non-empty corpus");
    if year < lo || year >= hi {
        return Err(PipelineError::Spec(format!("prediction year {year} needs years {year} and {} in {lo}..={hi}", year + 1)));
    }
    let resolved = spec.infosphere.resolve()?;

    // seedgraphs
    let seed_key = content_key(&["seedgraphs", &corpus_key, &year.to_string(), &spec.hop_limit.to_string()]);
    let seedgraphs = if spec.infosphere.needs_seedgraphs()? {
        let path = cache.join(format!("seedgraphs-{}.ansg", &seed_key[..16]));
        Some(
            Stage {
                name: "seedgraph",
                artifact: path,
                key: seed_key.clone(),
                force: opts.force,
                reused: &mut reused,
            }
            .run(
                |p| {
                    let f = File::open(p).map_err(|e| e.to_string())?;
                    seedgraph::read_binary(BufReader::new(f)).map_err(|e| e.to_string())
                },
                || {
                    seedgraph::build_all(&graph.snapshot(year), &graph.snapshot(year + 1), spec.hop_limit).map_err(at("seedgraph"))
                },
                |sgs, w| seedgraph::write_binary(sgs, w).map_err(|e| e.to_string()),
            )?,
        )
    } else {
        None
    };

    // infosphere, after dropout
    let info_key = content_key(&[
        "infosphere",
        if seedgraphs.is_some() { &seed_key } else { &corpus_key },
        &year.to_string(),
        &json(&spec.infosphere),
        &spec.drop.to_bits().to_string(),
        &spec.seed.to_string(),
    ]);
    let info_path = out.join("infosphere.ndjson");
    let summary_path = out.join("infosphere.summary.json");
    let infosphere = Stage {
        name: "infosphere",
        artifact: info_path,
        key: info_key.clone(),
        force: opts.force,
        reused: &mut reused,
    }
    .run(
        |p| {
            let f = File::open(p).map_err(|e| e.to_string())?;
            InfosphereEdgeSet::read_ndjson(BufReader::new(f), year).map_err(|e| e.to_string())
        },
        || {
            let (full, stats) = build_infosphere(&graph, year, resolved, seedgraphs.as_deref(), spec.seed);
            let kept = drop_infosphere(&full, spec.drop, derive_seed(spec.seed, "drop", &[])).map_err(at("infosphere"))?;
            let summary = InfosphereSummary {
                entries: kept.len(),
                distinct_edges: kept.distinct_edges().len(),
                authors: kept.per_author.len(),
                expansion: stats,
            };
            write_json(&summary_path, &summary).map_err(at("infosphere"))?;
            Ok(kept)
        },
        |set, w| set.write_ndjson(w).map_err(|e| e.to_string()),
    )?;

    // dataset
    let data_key = content_key(&["dataset", &corpus_key, &year.to_string(), &spec.seed.to_string()]);
    let dataset = Stage {
        name: "dataset",
        artifact: out.join("dataset.ndjson"),
        key: data_key.clone(),
        force: opts.force,
        reused: &mut reused,
    }
    .run(
        |p| {
            let f = File::open(p).map_err(|e| e.to_string())?;
            LinkDataset::read_ndjson(BufReader::new(f), year).map_err(|e| e.to_string())
        },
        || build_dataset(&graph, year, spec.seed).map_err(at("dataset")),
        |ds, w| ds.write_ndjson(w).map_err(|e| e.to_string()),
    )?;

    // train
    let msg_opts = MessageOptions {
        max_neighbors: spec.max_neighbors,
        seed: derive_seed(spec.seed, "neighbors", &[]),
    };
    let message_graph = MessageGraph::build(&graph.snapshot(year), Some(&infosphere), &msg_opts);
    let train_cfg = TrainConfig {
        seed: derive_seed(spec.seed, "train", &[spec.train.seed]),
        ..spec.train
    };
    let train_key = content_key(&[
        "train",
        &info_key,
        &data_key,
        &json(&spec.train),
        &json(&spec.max_neighbors),
        &spec.seed.to_string(),
    ]);
    let history_path = out.join("history.json");
    let csv_path = out.join("history.csv");
    let checkpoint = Stage {
        name: "train",
        artifact: out.join("model.ckpt"),
        key: train_key.clone(),
        force: opts.force,
        reused: &mut reused,
    }
    .run(
        |p| {
            if !history_path.is_file() {
                return Err("training history is missing".into());
            }
            let f = File::open(p).map_err(|e| e.to_string())?;
            Checkpoint::read(BufReader::new(f)).map_err(|e| e.to_string())
        },
        || {
            let t0 = Instant::now();
            let train_set = dataset.split(Split::Train);
            let val_set = dataset.split(Split::Val);
            let trained = train(&message_graph, &train_set, &val_set, &train_cfg).map_err(|e| match e {
                GnnError::Diverged { .. } => PipelineError::Diverged(e.to_string()),
                other => at("train")(other),
            })?;
            let summary = TrainSummary {
                history: trained.history.clone(),
                seconds: t0.elapsed().as_secs_f64(),
            };
            write_json(&history_path, &summary).map_err(at("train"))?;
            write_atomic(&csv_path, |w| trained.history.write_csv(w).map_err(|e| e.to_string())).map_err(at("train"))?;
            Ok(Checkpoint {
                config: train_cfg,
                counts: message_graph.counts,
                model: trained.model,
                adam: trained.adam,
            })
        },
        |ck, w| ck.write(w).map_err(|e| e.to_string()),
    )?;
    let history: TrainSummary = read_json(&history_path).map_err(at("train"))?;

    // evaluate
    let eval_key = content_key(&["evaluate", &train_key]);
    let metrics: Metrics = Stage {
        name: "evaluate",
        artifact: out.join("metrics.json"),
        key: eval_key,
        force: opts.force,
        reused: &mut reused,
    }
    .run(
        read_json,
        || evaluate(&checkpoint.model, &message_graph, &dataset.split(Split::Test)).map_err(at("evaluate")),
        |m, w| serde_json::to_writer_pretty(&mut *w, m).map_err(|e| e.to_string()),
    )?;

    let row = ResultRow {
        infosphere: spec.infosphere.kind_label().into(),
        params: spec.infosphere.params_label(),
        dropped: spec.drop,
        accuracy: metrics.accuracy,
        aggregation: spec.train.aggregation,
        encoder: "SAGE".into(),
        seed: spec.seed,
        runtime_secs: started.elapsed().as_secs_f64(),
        year,
        precision: metrics.precision,
        recall: metrics.recall,
        auc: metrics.auc,
        test_pairs: metrics.count,
        best_epoch: history.history.best_epoch,
        exposure_edges: infosphere.distinct_edges().len(),
    };
    write_json(&out.join("result.json"), &row).map_err(at("report"))?;
    Ok(RunOutcome {
        row,
        reused,
        output: out,
    })
}

/// Runs specs one after another, stopping at the first failure.
pub fn run_all(specs: &[ExperimentSpec], opts: &RunOptions) -> Result<Vec<ResultRow>, PipelineError> {
    let mut rows = Vec::with_capacity(specs.len());
    for (i, s) in specs.iter().enumerate() {
        log::info!("run {}/{}: {} -> {}", i + 1, specs.len(), s.infosphere, s.output.display());
        rows.push(run(s, opts)?.row);
    }
    Ok(rows)
}
