use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acadnet::expansion::{ExpansionParams, Trial};
use acadnet::gnn::{evaluate, train, Aggregation, Checkpoint, GnnError, MessageGraph, MessageOptions, TrainConfig};
use acadnet::graph::{io as graph_io, HeteroTemporalGraph};
use acadnet::infosphere::{drop_infosphere, InfosphereEdgeSet};
use acadnet::ingest::{ingest_stream, synth_generate, synth_records, write_v14_ndjson, InputFormat, SynthConfig};
use acadnet::link::{build_dataset, LinkDataset, Split};
use acadnet::pipeline::{
    build_infosphere, default_year, mean_over_seeds, read_csv, render_text, run, table1_grid, write_csv, ExperimentSpec,
    InfosphereSpec, PipelineError, Resolved, ResultRow, RunOptions, CACHE_ENV,
};
use acadnet::rng::derive_seed;
use acadnet::seedgraph::{self, Seedgraph, DEFAULT_HOP_LIMIT};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acadnet", version, about = "Infosphere experiments on academic co-authorship graphs")]
struct Cli {
    /// Worker threads for parallel stages; 1 gives bit-exact single-threaded runs.
    #[arg(long, global = true, env = "ACADNET_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a v14 corpus into a graph file.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        format: InputFormat,
    },
    /// Generate a synthetic corpus.
    Synth {
        #[arg(long)]
        output: PathBuf,
        /// Also write the records as v14 NDJSON.
        #[arg(long)]
        records: Option<PathBuf>,
        /// TOML file with generator settings; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        authors: Option<usize>,
        #[arg(long)]
        years: Option<usize>,
        #[arg(long)]
        papers_per_year: Option<usize>,
        #[arg(long)]
        influence: Option<f64>,
    },
    /// Build per-author seedgraphs for a prediction year.
    Seedgraph {
        #[command(flatten)]
        at: YearArgs,
        #[arg(long, default_value_t = DEFAULT_HOP_LIMIT)]
        hop_limit: usize,
        /// `.ndjson` for a readable dump, anything else for the binary form.
        #[arg(long)]
        output: PathBuf,
    },
    /// Expand seedgraphs into author infospheres.
    Expand {
        #[command(flatten)]
        at: YearArgs,
        #[command(flatten)]
        seeds: SeedgraphInput,
        /// Preset name, trial0 to trial5.
        #[arg(long, conflicts_with_all = ["p1", "p2", "p3", "f"])]
        trial: Option<String>,
        #[arg(long, requires_all = ["p2", "p3", "f"])]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        #[arg(long)]
        p3: Option<f64>,
        #[arg(long)]
        f: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Build any infosphere variant and dump the per-author exposure lists.
    Infosphere {
        #[command(flatten)]
        at: YearArgs,
        #[command(flatten)]
        seeds: SeedgraphInput,
        /// none, author[/N], top-paper/N, top-paper-per-topic/M,N or random.
        #[arg(long, default_value = "none")]
        infosphere: InfosphereSpec,
        #[arg(long, default_value_t = 0.0)]
        drop: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Label next-year co-authorships and sample negatives.
    Dataset {
        #[command(flatten)]
        at: YearArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train the link predictor.
    Train {
        #[command(flatten)]
        model_input: ModelInput,
        /// TOML training settings; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        aggregation: Option<Aggregation>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Score a checkpoint on one split.
    Evaluate {
        #[command(flatten)]
        model_input: ModelInput,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Run experiments end to end from TOML specs.
    Run {
        specs: Vec<PathBuf>,
        /// Use the synthetic benchmark preset when no spec file is given.
        #[arg(long)]
        benchmark: bool,
        /// Override the infosphere of every spec.
        #[arg(long)]
        infosphere: Option<InfosphereSpec>,
        #[arg(long)]
        drop: Option<f64>,
        #[arg(long)]
        aggregation: Option<Aggregation>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Repeat each spec with seeds 0..N.
        #[arg(long)]
        seeds: Option<u64>,
        /// Expand each spec into the full results-table grid.
        #[arg(long)]
        grid: bool,
        /// Run every prediction year the corpus allows and pool the rows.
        #[arg(long)]
        all_years: bool,
        #[arg(long, env = CACHE_ENV)]
        cache: Option<PathBuf>,
        #[arg(long)]
        force: bool,
        /// Collected rows as CSV.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Format result rows as a table.
    Report {
        /// result.json files, directories holding them, or results CSVs.
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Average accuracy over seeds.
        #[arg(long)]
        mean: bool,
    },
}

#[derive(Args)]
struct YearArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Defaults to the penultimate corpus year.
    #[arg(long)]
    year: Option<i32>,
}

#[derive(Args)]
struct SeedgraphInput {
    /// Precomputed seedgraphs; built on the fly when absent.
    #[arg(long)]
    seedgraphs: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HOP_LIMIT)]
    hop_limit: usize,
}

#[derive(Args)]
struct ModelInput {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    /// Exposure edges from `infosphere` or `expand`.
    #[arg(long)]
    exposure: Option<PathBuf>,
    #[arg(long)]
    max_neighbors: Option<usize>,
}

enum Failure {
    Usage(String),
    Data(String),
    Diverged(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Diverged(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Diverged(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e.exit_code() {
            1 => Failure::Usage(e.to_string()),
            3 => Failure::Diverged(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn data<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> Failure {
    move |e| Failure::Data(format!("{context}: {e}"))
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(data(dir.display()))?;
    }
    File::create(path).map(BufWriter::new).map_err(data(path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(data(path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<(), Failure> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(data(path.display()))?;
    w.flush().map_err(data(path.display()))
}

fn load_graph(path: &Path) -> Result<HeteroTemporalGraph, Failure> {
    graph_io::load(path).map_err(data(path.display()))
}

fn resolve_year(graph: &HeteroTemporalGraph, year: Option<i32>) -> Result<i32, Failure> {
    let y = match year {
        Some(y) => y,
        None => default_year(graph)?,
    };
    match graph.year_range() {
        Some((lo, hi)) if y >= lo && y < hi => Ok(y),
        Some((lo, hi)) => Err(Failure::Usage(format!("year {y} needs a following year inside {lo}..={hi}"))),
        None => Err(Failure::Data("empty corpus".into())),
    }
}

fn seedgraphs_for(graph: &HeteroTemporalGraph, year: i32, input: &SeedgraphInput) -> Result<Vec<Seedgraph>, Failure> {
    match &input.seedgraphs {
        Some(path) => {
            let r = open(path)?;
            let sgs = if path.extension().is_some_and(|e| e == "ndjson") {
                seedgraph::read_ndjson(r)
            } else {
                seedgraph::read_binary(r)
            };
            sgs.map_err(data(path.display()))
        }
        None => seedgraph::build_all(&graph.snapshot(year), &graph.snapshot(year + 1), input.hop_limit).map_err(data("seedgraph")),
    }
}

fn message_graph(input: &ModelInput) -> Result<(MessageGraph, LinkDataset), Failure> {
    let graph = load_graph(&input.graph)?;
    let first = std::fs::read_to_string(&input.dataset).map_err(data(input.dataset.display()))?;
    let year = first
        .lines()
        .next()
        .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .and_then(|v| v.get("year").and_then(|y| y.as_i64()))
        .map(|y| y as i32);
    let year = resolve_year(&graph, year)?;
    let dataset = LinkDataset::read_ndjson(first.as_bytes(), year).map_err(data(input.dataset.display()))?;
    let exposure = match &input.exposure {
        Some(p) => Some(InfosphereEdgeSet::read_ndjson(open(p)?, year).map_err(data(p.display()))?),
        None => None,
    };
    let opts = MessageOptions {
        max_neighbors: input.max_neighbors,
        ..MessageOptions::default()
    };
    Ok((MessageGraph::build(&graph.snapshot(year), exposure.as_ref(), &opts), dataset))
}

fn load_rows(inputs: &[PathBuf]) -> Result<Vec<ResultRow>, Failure> {
    let mut rows = Vec::new();
    let push_json = |p: &Path, rows: &mut Vec<ResultRow>| -> Result<(), Failure> {
        rows.push(serde_json::from_reader(open(p)?).map_err(data(p.display()))?);
        Ok(())
    };
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = walk(input).into_iter().filter(|p| p.ends_with("result.json")).collect();
            found.sort();
            for p in found {
                push_json(&p, &mut rows)?;
            }
        } else if input.extension().is_some_and(|e| e == "csv") {
            rows.extend(read_csv(open(input)?)?);
        } else {
            push_json(input, &mut rows)?;
        }
    }
    Ok(rows)
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let Ok(entries) = std::fs::read_dir(dir) else { return out };
    for e in entries.flatten() {
        let p = e.path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Ingest {
            input,
            output,
            stats,
            format,
        } => {
            let (graph, st) = ingest_stream(open(&input)?, format).map_err(data(input.display()))?;
            graph_io::save(&graph, &output).map_err(data(output.display()))?;
            log::info!("{} papers, {} authors, {} topics", st.nodes.paper, st.nodes.author, st.nodes.topic);
            match stats {
                Some(p) => write_json(&p, &st)?,
                None => println!("{}", serde_json::to_string_pretty(&st).expect("stats serialize")),
            }
        }
        Command::Synth {
            output,
            records,
            config,
            seed,
            authors,
            years,
            papers_per_year,
            influence,
        } => {
            let mut cfg: SynthConfig = match config {
                Some(p) => toml::from_str(&std::fs::read_to_string(&p).map_err(data(p.display()))?).map_err(usage)?,
                None => SynthConfig::default(),
            };
            cfg.n_authors = authors.unwrap_or(cfg.n_authors);
            cfg.n_years = years.unwrap_or(cfg.n_years);
            cfg.papers_per_year = papers_per_year.unwrap_or(cfg.papers_per_year);
            cfg.influence = influence.unwrap_or(cfg.influence);
            cfg.validate().map_err(usage)?;
            if let Some(p) = records {
                let recs = synth_records(&cfg, seed).map_err(usage)?;
                let mut w = create(&p)?;
                write_v14_ndjson(&recs, &mut w).map_err(data(p.display()))?;
                w.flush().map_err(data(p.display()))?;
            }
            let graph = synth_generate(&cfg, seed).map_err(usage)?;
            graph_io::save(&graph, &output).map_err(data(output.display()))?;
        }
        Command::Seedgraph { at, hop_limit, output } => {
            let graph = load_graph(&at.graph)?;
            let year = resolve_year(&graph, at.year)?;
            let sy = graph.snapshot(year);
            let sgs = seedgraph::build_all(&sy, &graph.snapshot(year + 1), hop_limit).map_err(data("seedgraph"))?;
            let mut w = create(&output)?;
            if output.extension().is_some_and(|e| e == "ndjson") {
                seedgraph::write_ndjson(&sy, &sgs, &mut w)
            } else {
                seedgraph::write_binary(&sgs, &mut w)
            }
            .map_err(data(output.display()))?;
            w.flush().map_err(data(output.display()))?;
            println!("{}", serde_json::to_string(&seedgraph::SeedgraphStats::collect(&sgs)).expect("stats serialize"));
        }
        Command::Expand {
            at,
            seeds,
            trial,
            p1,
            p2,
            p3,
            f,
            seed,
            output,
            stats,
        } => {
            let resolved = match (trial, p1, p2, p3, f) {
                (_, Some(p1), Some(p2), Some(p3), Some(f)) => {
                    Resolved::Expand(ExpansionParams::new(p1, p2, p3, f).map_err(usage)?)
                }
                (trial, ..) => match Trial::preset(trial.as_deref().unwrap_or("trial1")).map_err(usage)? {
                    Trial::Random => Resolved::Random,
                    Trial::Expand(p) => Resolved::Expand(p),
                },
            };
            let graph = load_graph(&at.graph)?;
            let year = resolve_year(&graph, at.year)?;
            let sgs = seedgraphs_for(&graph, year, &seeds)?;
            let (set, st) = build_infosphere(&graph, year, resolved, Some(&sgs), seed);
            let mut w = create(&output)?;
            set.write_ndjson(&mut w).map_err(data(output.display()))?;
            w.flush().map_err(data(output.display()))?;
            if let (Some(p), Some(st)) = (stats, st) {
                write_json(&p, &st)?;
            }
        }
        Command::Infosphere {
            at,
            seeds,
            infosphere,
            drop,
            seed,
            output,
        } => {
            let resolved = infosphere.resolve()?;
            let graph = load_graph(&at.graph)?;
            let year = resolve_year(&graph, at.year)?;
            let sgs = if infosphere.needs_seedgraphs()? {
                Some(seedgraphs_for(&graph, year, &seeds)?)
            } else {
                None
            };
            let (set, _) = build_infosphere(&graph, year, resolved, sgs.as_deref(), seed);
            let set = drop_infosphere(&set, drop, derive_seed(seed, "drop", &[])).map_err(usage)?;
            let mut w = create(&output)?;
            set.write_ndjson(&mut w).map_err(data(output.display()))?;
            w.flush().map_err(data(output.display()))?;
            log::info!("{} exposure entries for {} authors", set.len(), set.per_author.len());
        }
        Command::Dataset { at, seed, output } => {
            let graph = load_graph(&at.graph)?;
            let year = resolve_year(&graph, at.year)?;
            let ds = build_dataset(&graph, year, seed).map_err(data("dataset"))?;
            let mut w = create(&output)?;
            ds.write_ndjson(&mut w).map_err(data(output.display()))?;
            w.flush().map_err(data(output.display()))?;
            log::info!("{} positives, {} negatives", ds.positives().count(), ds.negatives().count());
        }
        Command::Train {
            model_input,
            config,
            epochs,
            lr,
            aggregation,
            seed,
            output,
            history,
        } => {
            let mut cfg: TrainConfig = match config {
                Some(p) => toml::from_str(&std::fs::read_to_string(&p).map_err(data(p.display()))?).map_err(usage)?,
                None => TrainConfig::default(),
            };
            cfg.epochs = epochs.unwrap_or(cfg.epochs);
            cfg.learning_rate = lr.unwrap_or(cfg.learning_rate);
            cfg.aggregation = aggregation.unwrap_or(cfg.aggregation);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.validate().map_err(usage)?;
            let (mg, ds) = message_graph(&model_input)?;
            let trained = train(&mg, &ds.split(Split::Train), &ds.split(Split::Val), &cfg).map_err(|e| match e {
                GnnError::Diverged { .. } => Failure::Diverged(e.to_string()),
                other => Failure::Data(format!("train: {other}")),
            })?;
            if let Some(p) = history {
                let mut w = create(&p)?;
                trained.history.write_csv(&mut w).map_err(data(p.display()))?;
                w.flush().map_err(data(p.display()))?;
            }
            let ck = Checkpoint {
                config: cfg,
                counts: mg.counts,
                model: trained.model,
                adam: trained.adam,
            };
            let mut w = create(&output)?;
            ck.write(&mut w).map_err(data(output.display()))?;
            w.flush().map_err(data(output.display()))?;
            println!("best epoch {}", trained.history.best_epoch);
        }
        Command::Evaluate {
            model_input,
            model,
            split,
        } => {
            let split = match split.as_str() {
                "train" => Split::Train,
                "val" => Split::Val,
                "test" => Split::Test,
                other => return Err(Failure::Usage(format!("unknown split {other:?}"))),
            };
            let (mg, ds) = message_graph(&model_input)?;
            let ck = Checkpoint::read(open(&model)?).map_err(data(model.display()))?;
            if ck.counts != mg.counts {
                return Err(Failure::Data(format!(
                    "checkpoint was trained on node counts {:?}, graph has {:?}",
                    ck.counts, mg.counts
                )));
            }
            let m = evaluate(&ck.model, &mg, &ds.split(split)).map_err(data("evaluate"))?;
            println!("{}", serde_json::to_string_pretty(&m).expect("metrics serialize"));
        }
        Command::Run {
            specs,
            benchmark,
            infosphere,
            drop,
            aggregation,
            output,
            seeds,
            grid,
            all_years,
            cache,
            force,
            results,
        } => {
            let mut base: Vec<ExperimentSpec> = specs.iter().map(|p| ExperimentSpec::load(p)).collect::<Result<_, _>>()?;
            if base.is_empty() {
                if !benchmark {
                    return Err(Failure::Usage("give spec files or --benchmark".into()));
                }
                base.push(ExperimentSpec::benchmark(0));
            }
            for s in &mut base {
                if let Some(i) = &infosphere {
                    s.infosphere = i.clone();
                }
                if let Some(d) = drop {
                    s.drop = d;
                }
                if let Some(a) = aggregation {
                    s.train.aggregation = a;
                }
                if let Some(o) = &output {
                    s.output = o.clone();
                }
            }
            let mut all = Vec::new();
            for s in base {
                let expanded = if grid { table1_grid(&s) } else { vec![s] };
                for e in expanded {
                    match seeds {
                        Some(n) => all.extend((0..n).map(|k| ExperimentSpec {
                            seed: k,
                            output: e.output.join(format!("seed{k}")),
                            ..e.clone()
                        })),
                        None => all.push(e),
                    }
                }
            }
            if all_years {
                all = per_year(all)?;
            }
            let opts = RunOptions { cache_dir: cache, force };
            let mut rows = Vec::with_capacity(all.len());
            for (i, s) in all.iter().enumerate() {
                log::info!("run {}/{}: {} -> {}", i + 1, all.len(), s.infosphere, s.output.display());
                let outcome = run(s, &opts)?;
                if !outcome.reused.is_empty() {
                    log::info!("reused: {}", outcome.reused.join(", "));
                }
                rows.push(outcome.row);
            }
            if all_years {
                rows = pool_years(rows);
            }
            print!("{}", render_text(&rows));
            if let Some(p) = results {
                let mut w = create(&p)?;
                write_csv(&rows, &mut w)?;
            }
        }
        Command::Report { inputs, csv, mean } => {
            let mut rows = load_rows(&inputs)?;
            if rows.is_empty() {
                return Err(Failure::Usage("no result rows found".into()));
            }
            if mean {
                rows = mean_over_seeds(&rows);
            }
            print!("{}", render_text(&rows));
            if let Some(p) = csv {
                write_csv(&rows, create(&p)?)?;
            }
        }
    }
    Ok(())
}

/// One spec per prediction year the corpus supports.
fn per_year(specs: Vec<ExperimentSpec>) -> Result<Vec<ExperimentSpec>, Failure> {
    let mut out = Vec::new();
    for s in specs {
        let (graph, _) = acadnet::pipeline::load_corpus(&s.corpus, s.seed)?;
        let years = graph.years();
        for w in years.windows(2) {
            out.push(ExperimentSpec {
                prediction_year: Some(w[0]),
                output: s.output.join(format!("year{}", w[0])),
                ..s.clone()
            });
        }
    }
    Ok(out)
}

/// Averages rows that differ only in prediction year, weighting by test size.
fn pool_years(rows: Vec<ResultRow>) -> Vec<ResultRow> {
    let mut groups: Vec<Vec<ResultRow>> = Vec::new();
    for r in rows {
        let key = |x: &ResultRow| (x.infosphere.clone(), x.params.clone(), x.dropped.to_bits(), x.aggregation, x.seed);
        match groups.iter_mut().find(|g| key(&g[0]) == key(&r)) {
            Some(g) => g.push(r),
            None => groups.push(vec![r]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let total: usize = g.iter().map(|r| r.test_pairs).sum();
            let w = |f: fn(&ResultRow) -> f64| g.iter().map(|r| f(r) * r.test_pairs as f64).sum::<f64>() / total.max(1) as f64;
            ResultRow {
                accuracy: w(|r| r.accuracy),
                precision: w(|r| r.precision),
                recall: w(|r| r.recall),
                auc: w(|r| r.auc),
                runtime_secs: g.iter().map(|r| r.runtime_secs).sum(),
                test_pairs: total,
                exposure_edges: g.iter().map(|r| r.exposure_edges).sum(),
                ..g[g.len() - 1].clone()
            }
        })
        .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
