use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::expansion::{ExpansionParams, Trial};
use crate::gnn::TrainConfig;
use crate::ingest::{InputFormat, SynthConfig};
use crate::seedgraph::DEFAULT_HOP_LIMIT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum CorpusSpec {
    File {
        path: PathBuf,
        #[serde(default = "auto")]
        format: String,
    },
    Synth(SynthConfig),
}

fn auto() -> String {
    "auto".into()
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec::Synth(SynthConfig::default())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InfosphereSpec {
    #[default]
    None,
    /// Seedgraph plus expansion. `expansion` overrides `trial` when given.
    Author {
        #[serde(default = "trial1")]
        trial: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expansion: Option<ExpansionParams>,
    },
    TopPaper {
        n: usize,
    },
    TopPaperPerTopic {
        m: usize,
        n: usize,
    },
    /// Random papers, as many per author as the seedgraph has nodes.
    Random,
}

fn trial1() -> String {
    "trial1".into()
}

/// What an infosphere spec resolves to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolved {
    None,
    Expand(ExpansionParams),
    Random,
    TopPaper(usize),
    TopPaperPerTopic(usize, usize),
}

impl InfosphereSpec {
    pub fn author(trial: u8) -> Self {
        InfosphereSpec::Author {
            trial: format!("trial{trial}"),
            expansion: None,
        }
    }

    pub fn resolve(&self) -> Result<Resolved, PipelineError> {
        Ok(match self {
            InfosphereSpec::None => Resolved::None,
            InfosphereSpec::Author {
                expansion: Some(p), ..
            } => {
                p.validate().map_err(|e| PipelineError::Spec(e.to_string()))?;
                Resolved::Expand(*p)
            }
            InfosphereSpec::Author { trial, .. } => match Trial::preset(trial).map_err(|e| PipelineError::Spec(e.to_string()))? {
                Trial::Random => Resolved::Random,
                Trial::Expand(p) => Resolved::Expand(p),
            },
            InfosphereSpec::TopPaper { n } => Resolved::TopPaper(*n),
            InfosphereSpec::TopPaperPerTopic { m, n } => Resolved::TopPaperPerTopic(*m, *n),
            InfosphereSpec::Random => Resolved::Random,
        })
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            InfosphereSpec::None => "none",
            InfosphereSpec::Author { .. } => "author",
            InfosphereSpec::TopPaper { .. } => "top-paper",
            InfosphereSpec::TopPaperPerTopic { .. } => "top-paper-per-topic",
            InfosphereSpec::Random => "random",
        }
    }

    pub fn params_label(&self) -> String {
        match self {
            InfosphereSpec::None | InfosphereSpec::Random => "-".into(),
            InfosphereSpec::Author {
                expansion: Some(p), ..
            } => format!("p1={},p2={},p3={},f={}", p.p1, p.p2, p.p3, p.f),
            InfosphereSpec::Author { trial, .. } => trial.trim_start_matches("trial").to_owned(),
            InfosphereSpec::TopPaper { n } => n.to_string(),
            InfosphereSpec::TopPaperPerTopic { m, n } => format!("[{m},{n}]"),
        }
    }

    pub fn needs_seedgraphs(&self) -> Result<bool, PipelineError> {
        Ok(matches!(self.resolve()?, Resolved::Expand(_) | Resolved::Random))
    }
}

impl fmt::Display for InfosphereSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfosphereSpec::None | InfosphereSpec::Random => f.write_str(self.kind_label()),
            InfosphereSpec::TopPaperPerTopic { m, n } => write!(f, "top-paper-per-topic/{m},{n}"),
            _ => write!(f, "{}/{}", self.kind_label(), self.params_label()),
        }
    }
}

/// `none`, `random`, `author`, `author/5`, `author/trial2`, `top-paper/10`,
/// `top-paper-per-topic/1,10`.
impl FromStr for InfosphereSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = match s.split_once('/') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |a: &str| a.trim().parse::<usize>().map_err(|_| format!("bad number {a:?} in {s:?}"));
        match (kind, arg) {
            ("none", None) => Ok(InfosphereSpec::None),
            ("random", None) => Ok(InfosphereSpec::Random),
            ("author", None) => Ok(InfosphereSpec::author(1)),
            ("author", Some(t)) => {
                let trial = if t.starts_with("trial") { t.to_owned() } else { format!("trial{t}") };
                Trial::preset(&trial).map_err(|e| e.to_string())?;
                Ok(InfosphereSpec::Author { trial, expansion: None })
            }
            ("top-paper", Some(n)) => Ok(InfosphereSpec::TopPaper { n: num(n)? }),
            ("top-paper", None) => Ok(InfosphereSpec::TopPaper { n: 10 }),
            ("top-paper-per-topic", Some(mn)) => {
                let (m, n) = mn
                    .trim_matches(['[', ']'])
                    .split_once(',')
                    .ok_or_else(|| format!("expected m,n in {s:?}"))?;
                Ok(InfosphereSpec::TopPaperPerTopic { m: num(m)?, n: num(n)? })
            }
            ("top-paper-per-topic", None) => Ok(InfosphereSpec::TopPaperPerTopic { m: 1, n: 10 }),
            _ => Err(format!("unknown infosphere {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub seed: u64,
    pub output: PathBuf,
    /// Defaults to the penultimate corpus year.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_year: Option<i32>,
    pub hop_limit: usize,
    pub drop: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_neighbors: Option<usize>,
    pub corpus: CorpusSpec,
    pub infosphere: InfosphereSpec,
    pub train: TrainConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            seed: 0,
            output: PathBuf::from("out"),
            prediction_year: None,
            hop_limit: DEFAULT_HOP_LIMIT,
            drop: 0.0,
            max_neighbors: None,
            corpus: CorpusSpec::default(),
            infosphere: InfosphereSpec::None,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Spec(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Spec(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("specs serialize")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Spec(m));
        if !(0.0..=1.0).contains(&self.drop) {
            return bad(format!("drop fraction {} is outside [0, 1]", self.drop));
        }
        if self.hop_limit == 0 {
            return bad("hop limit must be positive".into());
        }
        self.infosphere.resolve()?;
        self.train.validate().map_err(|e| PipelineError::Spec(e.to_string()))?;
        match &self.corpus {
            CorpusSpec::File { path, format } => {
                if !path.is_file() {
                    return bad(format!("corpus file {} does not exist", path.display()));
                }
                format.parse::<InputFormat>().map_err(PipelineError::Spec)?;
            }
            CorpusSpec::Synth(cfg) => cfg.validate().map_err(|e| PipelineError::Spec(e.to_string()))?,
        }
        Ok(())
    }

    /// Desk-scale synthetic benchmark. The learning rate is far above the
    /// reference one, which barely moves a model of this size in the
    /// available epochs; small embeddings keep per-node parameters from
    /// memorizing the few thousand training pairs.
    pub fn benchmark(seed: u64) -> Self {
        ExperimentSpec {
            seed,
            corpus: CorpusSpec::Synth(SynthConfig {
                n_authors: 1500,
                papers_per_year: 600,
                ..SynthConfig::default()
            }),
            train: TrainConfig {
                epochs: 200,
                patience: 10,
                batch: 256,
                learning_rate: 1e-3,
                dim: 16,
                hidden: 16,
                ..TrainConfig::default()
            },
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut spec = ExperimentSpec::benchmark(3);
        spec.infosphere = InfosphereSpec::TopPaperPerTopic { m: 2, n: 5 };
        spec.prediction_year = Some(2004);
        let back = ExperimentSpec::from_toml(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn minimal_toml() {
        let spec = ExperimentSpec::from_toml(
            "seed = 4\n[corpus]\nsource = \"synth\"\nn_authors = 50\n[infosphere]\nkind = \"author\"\ntrial = \"trial5\"\n[train]\naggregation = \"max\"\n",
        )
        .unwrap();
        assert_eq!(spec.seed, 4);
        assert_eq!(spec.train.epochs, 500);
        assert!(matches!(spec.corpus, CorpusSpec::Synth(SynthConfig { n_authors: 50, .. })));
        assert_eq!(spec.infosphere.params_label(), "5");
        assert!(ExperimentSpec::from_toml("drop = \"x\"").is_err());
    }

    #[test]
    fn shorthand() {
        assert_eq!("author/5".parse::<InfosphereSpec>().unwrap(), InfosphereSpec::author(5));
        assert_eq!(
            "top-paper-per-topic/[10,1]".parse::<InfosphereSpec>().unwrap(),
            InfosphereSpec::TopPaperPerTopic { m: 10, n: 1 }
        );
        assert_eq!("author/0".parse::<InfosphereSpec>().unwrap().resolve().unwrap(), Resolved::Random);
        assert!("author/9".parse::<InfosphereSpec>().is_err());
        assert!("bogus".parse::<InfosphereSpec>().is_err());
        for s in ["none", "author/1", "top-paper/50", "top-paper-per-topic/1,50", "random"] {
            assert_eq!(s.parse::<InfosphereSpec>().unwrap().to_string(), s);
        }
    }
}
