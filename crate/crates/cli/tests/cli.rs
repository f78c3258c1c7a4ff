use std::path::Path;
use std::process::{Command, Output};

fn acadnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acadnet"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("ACADNET_CACHE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = acadnet(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn stage_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name);
    let (graph, records) = (d("g.anpg"), d("records.ndjson"));
    ok(&["synth", "--output", p(&graph), "--records", p(&records), "--authors", "120", "--papers-per-year", "50", "--years", "4", "--seed", "2"]);
    ok(&["ingest", "--input", p(&records), "--output", p(&d("ingested.anpg"))]);
    let stats: serde_json::Value = serde_json::from_str(&ok(&["seedgraph", "--graph", p(&graph), "--output", p(&d("sg.ndjson"))])).unwrap();
    assert!(stats.is_object());
    ok(&["infosphere", "--graph", p(&graph), "--seedgraphs", p(&d("sg.ndjson")), "--infosphere", "author/1", "--drop", "0.25", "--output", p(&d("info.ndjson"))]);
    ok(&["dataset", "--graph", p(&graph), "--output", p(&d("ds.ndjson"))]);
    let train = ok(&[
        "train", "--graph", p(&graph), "--dataset", p(&d("ds.ndjson")), "--exposure", p(&d("info.ndjson")), "--epochs", "5", "--lr", "0.01", "--output", p(&d("m.ckpt")), "--history", p(&d("h.csv")),
    ]);
    assert!(train.contains("best epoch"));
    let metrics: serde_json::Value = serde_json::from_str(&ok(&[
        "evaluate", "--graph", p(&graph), "--dataset", p(&d("ds.ndjson")), "--exposure", p(&d("info.ndjson")), "--model", p(&d("m.ckpt")),
    ]))
    .unwrap();
    let acc = metrics["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn exit_codes_follow_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(acadnet(&["--help"]).status.code(), Some(0));
    assert_eq!(acadnet(&["train", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(acadnet(&["run"]).status.code(), Some(1));
    let missing = dir.path().join("missing.ndjson");
    let out = dir.path().join("g.anpg");
    assert_eq!(acadnet(&["ingest", "--input", p(&missing), "--output", p(&out)]).status.code(), Some(2));
    let garbage = dir.path().join("garbage.anpg");
    std::fs::write(&garbage, b"not a graph").unwrap();
    assert_eq!(acadnet(&["dataset", "--graph", p(&garbage), "--output", p(&out)]).status.code(), Some(2));
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("exp.toml");
    std::fs::write(
        &spec,
        format!(
            "seed = 1\noutput = {:?}\n\n[corpus]\nsource = \"synth\"\nn_authors = 120\npapers_per_year = 50\nn_years = 4\n\n[infosphere]\nkind = \"top-paper\"\nn = 5\n\n[train]\nepochs = 8\nbatch = 64\nlearning_rate = 0.01\ndim = 8\nhidden = 8\n",
            p(&dir.path().join("out"))
        ),
    )
    .unwrap();
    let cache = dir.path().join("cache");
    let results = dir.path().join("rows.csv");
    let table = ok(&["run", p(&spec), "--seeds", "2", "--cache", p(&cache), "--results", p(&results)]);
    assert!(table.contains("top-paper"));
    let csv = std::fs::read_to_string(&results).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("out/seed1/result.json").exists());

    let merged = dir.path().join("merged.csv");
    ok(&["report", p(&dir.path().join("out/seed0")), p(&dir.path().join("out/seed1/result.json")), "--mean", "--csv", p(&merged)]);
    assert_eq!(std::fs::read_to_string(&merged).unwrap().lines().count(), 2);

    let again = ok(&["run", p(&spec), "--seeds", "2", "--cache", p(&cache)]);
    assert_eq!(again, table);
}
