//! The results-table experiment grid.

use super::spec::{ExperimentSpec, InfosphereSpec};
use crate::gnn::Aggregation;

/// Table order of aggregations.
pub const TABLE_AGGREGATIONS: [Aggregation; 4] = [Aggregation::Max, Aggregation::Mean, Aggregation::Min, Aggregation::Sum];

pub const DROP_FRACTIONS: [f64; 6] = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

/// `(infosphere, drop, aggregation)` for every SAGE row of the table.
pub fn table1_cells() -> Vec<(InfosphereSpec, f64, Aggregation)> {
    let all_aggs = [
        InfosphereSpec::None,
        InfosphereSpec::author(0),
        InfosphereSpec::author(5),
        InfosphereSpec::TopPaper { n: 10 },
        InfosphereSpec::TopPaper { n: 50 },
        InfosphereSpec::TopPaperPerTopic { m: 1, n: 10 },
        InfosphereSpec::TopPaperPerTopic { m: 1, n: 50 },
    ];
    let sum_only = [(2, 5), (5, 10), (10, 1), (10, 5), (50, 1)];
    let mut out = Vec::new();
    for inf in &all_aggs {
        for agg in TABLE_AGGREGATIONS {
            out.push((inf.clone(), 0.0, agg));
        }
    }
    for d in DROP_FRACTIONS {
        out.push((InfosphereSpec::author(0), d, Aggregation::Sum));
    }
    for (m, n) in sum_only {
        out.push((InfosphereSpec::TopPaperPerTopic { m, n }, 0.0, Aggregation::Sum));
    }
    out
}

fn slug(inf: &InfosphereSpec, drop: f64, agg: Aggregation) -> String {
    let params: String = inf
        .params_label()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    let params = params.trim_matches('_');
    let mut s = inf.kind_label().to_owned();
    if !params.is_empty() {
        s.push('-');
        s.push_str(params);
    }
    if drop > 0.0 {
        s.push_str(&format!("-drop{}", (drop * 100.0).round()));
    }
    s.push('-');
    s.push_str(&agg.to_string());
    s
}

/// One spec per table row, each writing below `base.output`.
pub fn table1_grid(base: &ExperimentSpec) -> Vec<ExperimentSpec> {
    table1_cells()
        .into_iter()
        .map(|(inf, drop, agg)| {
            let mut s = base.clone();
            s.output = base.output.join(slug(&inf, drop, agg));
            s.infosphere = inf;
            s.drop = drop;
            s.train.aggregation = agg;
            s
        })
        .collect()
}
