use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::gnn::Aggregation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub infosphere: String,
    pub params: String,
    pub dropped: f64,
    pub accuracy: f64,
    pub aggregation: Aggregation,
    pub encoder: String,
    pub seed: u64,
    pub runtime_secs: f64,
    pub year: i32,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub test_pairs: usize,
    pub best_epoch: usize,
    pub exposure_edges: usize,
}

impl ResultRow {
    /// Equality on everything except wall-clock time.
    pub fn same_outcome(&self, other: &ResultRow) -> bool {
        let mut a = self.clone();
        a.runtime_secs = other.runtime_secs;
        &a == other
    }
}

fn kind_rank(kind: &str) -> usize {
    ["none", "author", "top-paper", "top-paper-per-topic", "random"]
        .iter()
        .position(|k| *k == kind)
        .unwrap_or(usize::MAX)
}

fn aggregation_rank(a: Aggregation) -> usize {
    match a {
        Aggregation::Max => 0,
        Aggregation::Mean => 1,
        Aggregation::Min => 2,
        Aggregation::Sum => 3,
    }
}

fn numbers(label: &str) -> Vec<u64> {
    label
        .split(|c: char| !c.is_ascii_digit())
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse().ok())
        .collect()
}

/// Table order: infosphere type, then undropped before dropped rows, then
/// parameters, drop fraction, aggregation (max, mean, min, sum) and seed.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        let key = |r: &ResultRow| (kind_rank(&r.infosphere), r.dropped > 0.0, numbers(&r.params), r.params.clone());
        key(a)
            .cmp(&key(b))
            .then(a.dropped.total_cmp(&b.dropped))
            .then(aggregation_rank(a.aggregation).cmp(&aggregation_rank(b.aggregation)))
            .then(a.seed.cmp(&b.seed))
    });
}

fn dropped_label(d: f64) -> String {
    if d == 0.0 {
        "-".into()
    } else {
        format!("{}%", (d * 100.0).round())
    }
}

/// Plain-text grid; blocks of one infosphere configuration are separated by
/// rules.
pub fn render_text(rows: &[ResultRow]) -> String {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let header = ["Inf. Type", "Inf. Params", "Inf. Dropped", "Accuracy", "Aggregation", "GNN Type"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                if r.infosphere == "none" { "-".into() } else { r.infosphere.clone() },
                r.params.clone(),
                dropped_label(r.dropped),
                format!("{:.3}", r.accuracy),
                r.aggregation.to_string(),
                r.encoder.clone(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for c in &cells {
        for (w, s) in widths.iter_mut().zip(c) {
            *w = (*w).max(s.len());
        }
    }
    let line = |cols: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in cols.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            let _ = write!(s, "{c:<w$}");
        }
        s.trim_end().to_owned() + "\n"
    };
    let rule: String = "-".repeat(widths.iter().sum::<usize>() + 3 * (widths.len() - 1)) + "\n";
    let mut out = line(&header.map(String::from));
    let mut last_block = None;
    for (r, c) in rows.iter().zip(&cells) {
        let block = (r.infosphere.clone(), r.params.clone(), r.dropped > 0.0);
        if last_block.as_ref() != Some(&block) {
            out.push_str(&rule);
            last_block = Some(block);
        }
        out.push_str(&line(c));
    }
    out
}

pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<(), PipelineError> {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let mut wr = csv::Writer::from_writer(w);
    for r in &rows {
        wr.serialize(r).map_err(|e| PipelineError::Report(e.to_string()))?;
    }
    wr.flush().map_err(|e| PipelineError::Report(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResultRow>, PipelineError> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::Report(e.to_string()))
}

/// One row per configuration with accuracy averaged over seeds. The seed
/// field then holds the number of runs.
pub fn mean_over_seeds(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut groups: BTreeMap<(String, String, u64, String), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.infosphere.clone(), r.params.clone(), r.dropped.to_bits(), r.aggregation.to_string()))
            .or_default()
            .push(r);
    }
    let mut out: Vec<ResultRow> = groups
        .into_values()
        .map(|g| {
            let n = g.len() as f64;
            let mean = |f: fn(&ResultRow) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / n;
            ResultRow {
                accuracy: mean(|r| r.accuracy),
                precision: mean(|r| r.precision),
                recall: mean(|r| r.recall),
                auc: mean(|r| r.auc),
                runtime_secs: mean(|r| r.runtime_secs),
                seed: g.len() as u64,
                ..g[0].clone()
            }
        })
        .collect();
    sort_rows(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(kind: &str, params: &str, dropped: f64, agg: Aggregation) -> ResultRow {
        ResultRow {
            infosphere: kind.into(),
            params: params.into(),
            dropped,
            accuracy: 0.5,
            aggregation: agg,
            encoder: "SAGE".into(),
            seed: 0,
            runtime_secs: 1.0,
            year: 2004,
            precision: 0.5,
            recall: 1.0,
            auc: 0.5,
            test_pairs: 10,
            best_epoch: 3,
            exposure_edges: 0,
        }
    }

    #[test]
    fn table_order() {
        let mut rows = vec![
            row("top-paper-per-topic", "[10,1]", 0.0, Aggregation::Sum),
            row("author", "0", 0.5, Aggregation::Sum),
            row("top-paper-per-topic", "[2,5]", 0.0, Aggregation::Sum),
            row("author", "5", 0.0, Aggregation::Max),
            row("none", "-", 0.0, Aggregation::Sum),
            row("none", "-", 0.0, Aggregation::Max),
            row("author", "0", 0.0, Aggregation::Min),
        ];
        sort_rows(&mut rows);
        let got: Vec<_> = rows.iter().map(|r| (r.infosphere.as_str(), r.params.as_str(), r.aggregation)).collect();
        assert_eq!(
            got,
            vec![
                ("none", "-", Aggregation::Max),
                ("none", "-", Aggregation::Sum),
                ("author", "0", Aggregation::Min),
                ("author", "5", Aggregation::Max),
                ("author", "0", Aggregation::Sum),
                ("top-paper-per-topic", "[2,5]", Aggregation::Sum),
                ("top-paper-per-topic", "[10,1]", Aggregation::Sum),
            ]
        );
    }

    #[test]
    fn text_and_csv() {
        let rows: Vec<_> = Aggregation::ALL.iter().map(|&a| row("none", "-", 0.0, a)).collect();
        let text = render_text(&rows);
        assert_eq!(text.lines().count(), 1 + 1 + 4);
        let one = render_text(&rows[..1]);
        assert_eq!(one.lines().count(), 3);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let mut sorted = rows.clone();
        sort_rows(&mut sorted);
        assert_eq!(read_csv(&buf[..]).unwrap(), sorted);
    }

    #[test]
    fn runtime_is_not_an_outcome() {
        let a = row("none", "-", 0.0, Aggregation::Sum);
        let mut b = a.clone();
        b.runtime_secs = 99.0;
        assert!(a.same_outcome(&b));
        b.accuracy = 0.6;
        assert!(!a.same_outcome(&b));
    }
}
