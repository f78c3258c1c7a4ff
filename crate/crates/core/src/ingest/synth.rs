//! Seeded synthetic academic corpus.
//!
//! Authors have a log-normal productivity and a Dirichlet topic preference.
//! The first year assigns authors round-robin over a shuffled roster so every
//! author gets a history. Later papers pick a lead author by productivity and
//! a topic from the lead's past topics; each further co-author is drawn
//!
//! * with probability `influence` from exposure: an author of a popular
//!   prior paper, either globally or within the paper's topic;
//! * otherwise locally: a prior co-author of the lead or another past
//!   contributor to the same topic.
//!
//! Citations go to papers of earlier years, weighted by citation count and
//! topic overlap. Node and edge totals depend only on the configuration.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal};
use serde::{Deserialize, Serialize};

use super::{GraphAssembler, IngestError, PaperRecord};
use crate::graph::{GraphBuilder, HeteroTemporalGraph, NodeType};
use crate::rng::keyed_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_authors: usize,
    pub n_topics: usize,
    pub first_year: i32,
    pub n_years: usize,
    pub papers_per_year: usize,
    pub authors_per_paper: usize,
    pub topics_per_paper: usize,
    pub refs_per_paper: usize,
    /// Dirichlet concentration of per-author topic preferences.
    pub topic_concentration: f64,
    /// Log-normal sigma of author productivity.
    pub productivity_sigma: f64,
    /// Probability that a co-author is drawn from popularity exposure.
    pub influence: f64,
    /// Within local draws, probability of preferring a prior co-author.
    pub repeat_collaboration: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_authors: 400,
            n_topics: 12,
            first_year: 2000,
            n_years: 6,
            papers_per_year: 150,
            authors_per_paper: 3,
            topics_per_paper: 2,
            refs_per_paper: 4,
            topic_concentration: 0.3,
            productivity_sigma: 1.0,
            influence: 0.7,
            repeat_collaboration: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let err = |m: &str| Err(IngestError::Config(m.to_owned()));
        if self.n_authors == 0 {
            return err("zero authors");
        }
        if self.n_topics == 0 {
            return err("zero topics");
        }
        if self.n_years == 0 || self.papers_per_year == 0 {
            return err("no papers would be generated");
        }
        if self.authors_per_paper == 0 {
            return err("papers need at least one author");
        }
        if self.first_year <= 0 {
            return err("years must be positive");
        }
        if !(0.0..=1.0).contains(&self.influence) || !(0.0..=1.0).contains(&self.repeat_collaboration) {
            return err("probabilities must lie in [0, 1]");
        }
        if self.topic_concentration.is_nan() || self.topic_concentration <= 0.0 || self.productivity_sigma.is_nan() || self.productivity_sigma < 0.0 {
            return err("concentration must be positive and sigma non-negative");
        }
        Ok(())
    }

    pub fn authors_per_paper_eff(&self) -> usize {
        self.authors_per_paper.min(self.n_authors)
    }

    pub fn topics_per_paper_eff(&self) -> usize {
        self.topics_per_paper.min(self.n_topics)
    }
}

struct World {
    productivity: Vec<f64>,
    preference: Vec<Vec<f64>>,
    author_topics: Vec<BTreeSet<u32>>,
    coauthors: Vec<BTreeSet<u32>>,
    topic_workers: Vec<BTreeSet<u32>>,
    topic_papers: Vec<Vec<u32>>,
    paper_authors: Vec<Vec<u32>>,
    paper_topics: Vec<Vec<u32>>,
    citations: Vec<u32>,
}

/// Index drawn with probability proportional to `weights`; `None` if all
/// weights are zero.
fn weighted_pick(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = f64> + Clone) -> Option<usize> {
    let total: f64 = weights.clone().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    let mut last = None;
    for (i, w) in weights.enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = Some(i);
        if x < w {
            return Some(i);
        }
        x -= w;
    }
    last
}

impl World {
    fn new(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Self {
        let lognormal = LogNormal::new(0.0, cfg.productivity_sigma).expect("validated sigma");
        let gamma = Gamma::new(cfg.topic_concentration, 1.0).expect("validated concentration");
        let productivity = (0..cfg.n_authors).map(|_| lognormal.sample(rng)).collect();
        let preference = (0..cfg.n_authors)
            .map(|_| {
                let mut p: Vec<f64> = (0..cfg.n_topics).map(|_| gamma.sample(rng) + 1e-12).collect();
                let s: f64 = p.iter().sum();
                p.iter_mut().for_each(|x| *x /= s);
                p
            })
            .collect();
        World {
            productivity,
            preference,
            author_topics: vec![BTreeSet::new(); cfg.n_authors],
            coauthors: vec![BTreeSet::new(); cfg.n_authors],
            topic_workers: vec![BTreeSet::new(); cfg.n_topics],
            topic_papers: vec![Vec::new(); cfg.n_topics],
            paper_authors: Vec::new(),
            paper_topics: Vec::new(),
            citations: Vec::new(),
        }
    }

    /// Topics drawn without replacement by the lead's preference, starting
    /// with `first` when given.
    fn pick_topics(&self, rng: &mut ChaCha8Rng, lead: u32, first: Option<u32>, count: usize) -> Vec<u32> {
        let pref = &self.preference[lead as usize];
        let mut chosen: Vec<u32> = first.into_iter().collect();
        while chosen.len() < count {
            let i = weighted_pick(
                rng,
                pref.iter()
                    .enumerate()
                    .map(|(t, &w)| if chosen.contains(&(t as u32)) { 0.0 } else { w }),
            )
            .expect("fewer chosen topics than topics");
            chosen.push(i as u32);
        }
        chosen
    }

    fn pick_author<'a>(
        &self,
        rng: &mut ChaCha8Rng,
        pool: impl Iterator<Item = &'a u32> + Clone,
        taken: &[u32],
    ) -> Option<u32> {
        let pool = pool.filter(|a| !taken.contains(a));
        let i = weighted_pick(rng, pool.clone().map(|&a| self.productivity[a as usize]))?;
        pool.clone().nth(i).copied()
    }

    fn exposure_author(&self, rng: &mut ChaCha8Rng, topic: u32, taken: &[u32]) -> Option<u32> {
        let within_topic = rng.random::<f64>() < 0.5;
        let paper = if within_topic {
            let papers = &self.topic_papers[topic as usize];
            let i = weighted_pick(rng, papers.iter().map(|&p| self.citations[p as usize] as f64 + 1.0))?;
            papers[i]
        } else {
            weighted_pick(rng, self.citations.iter().map(|&c| c as f64 + 1.0))? as u32
        };
        let free: Vec<u32> = self.paper_authors[paper as usize]
            .iter()
            .copied()
            .filter(|a| !taken.contains(a))
            .collect();
        free.choose(rng).copied()
    }

    fn local_author(&self, rng: &mut ChaCha8Rng, cfg: &SynthConfig, lead: u32, topic: u32, taken: &[u32]) -> Option<u32> {
        let workers = &self.topic_workers[topic as usize];
        if rng.random::<f64>() < cfg.repeat_collaboration {
            let repeat = self.coauthors[lead as usize].iter().filter(|a| workers.contains(a));
            if let Some(a) = self.pick_author(rng, repeat, taken) {
                return Some(a);
            }
        }
        self.pick_author(rng, workers.iter(), taken)
    }
}

/// Generates the corpus as records, in publication order.
pub fn synth_records(cfg: &SynthConfig, seed: u64) -> Result<Vec<PaperRecord>, IngestError> {
    cfg.validate()?;
    let mut rng = keyed_rng(seed, "synth", &[]);
    let mut w = World::new(cfg, &mut rng);
    let k = cfg.authors_per_paper_eff();
    let tpp = cfg.topics_per_paper_eff();
    let mut roster: Vec<u32> = (0..cfg.n_authors as u32).collect();
    roster.shuffle(&mut rng);
    let mut cursor = 0usize;
    let mut records = Vec::with_capacity(cfg.n_years * cfg.papers_per_year);

    for yi in 0..cfg.n_years {
        let year = cfg.first_year + yi as i32;
        let prior_papers = w.paper_authors.len();
        let mut fresh: Vec<(Vec<u32>, Vec<u32>)> = Vec::with_capacity(cfg.papers_per_year);
        for _ in 0..cfg.papers_per_year {
            let (authors, topics) = if yi == 0 {
                let authors: Vec<u32> = (0..k).map(|j| roster[(cursor + j) % roster.len()]).collect();
                cursor += k;
                let topics = w.pick_topics(&mut rng, authors[0], None, tpp);
                (authors, topics)
            } else {
                let lead = w
                    .pick_author(
                        &mut rng,
                        roster.iter().filter(|&&a| !w.author_topics[a as usize].is_empty()),
                        &[],
                    )
                    .expect("first year gives authors a history");
                let pref = &w.preference[lead as usize];
                let known: Vec<u32> = w.author_topics[lead as usize].iter().copied().collect();
                let topic = known[weighted_pick(&mut rng, known.iter().map(|&t| pref[t as usize]))
                    .unwrap_or(0)];
                let topics = w.pick_topics(&mut rng, lead, Some(topic), tpp);
                let mut authors = vec![lead];
                while authors.len() < k {
                    let exposed = if rng.random::<f64>() < cfg.influence {
                        w.exposure_author(&mut rng, topic, &authors)
                    } else {
                        None
                    };
                    let next = exposed
                        .or_else(|| w.local_author(&mut rng, cfg, lead, topic, &authors))
                        .or_else(|| {
                            // degenerate pools: anyone with a history
                            w.pick_author(
                                &mut rng,
                                roster.iter().filter(|&&a| !w.author_topics[a as usize].is_empty()),
                                &authors,
                            )
                        })
                        .or_else(|| w.pick_author(&mut rng, roster.iter(), &authors));
                    authors.push(next.expect("k <= n_authors"));
                }
                (authors, topics)
            };
            fresh.push((authors, topics));
        }

        for (authors, topics) in fresh {
            let pid = w.paper_authors.len() as u32;
            let n_refs = cfg.refs_per_paper.min(prior_papers);
            let mut refs: Vec<u32> = Vec::with_capacity(n_refs);
            while refs.len() < n_refs {
                let i = weighted_pick(
                    &mut rng,
                    (0..prior_papers).map(|p| {
                        if refs.contains(&(p as u32)) {
                            return 0.0;
                        }
                        let shared = w.paper_topics[p].iter().any(|t| topics.contains(t));
                        (w.citations[p] as f64 + 1.0) * if shared { 4.0 } else { 1.0 }
                    }),
                )
                .expect("uncited prior papers remain");
                refs.push(i as u32);
            }
            records.push(PaperRecord {
                paper_id: format!("p{pid}"),
                year,
                author_ids: authors.iter().map(|a| format!("a{a}")).collect(),
                topic_names: topics.iter().map(|t| format!("t{t}")).collect(),
                reference_ids: refs.iter().map(|r| format!("p{r}")).collect(),
            });
            w.paper_authors.push(authors);
            w.paper_topics.push(topics);
            w.citations.push(0);
            for r in refs {
                // counts become visible to draws from next year on
                w.citations[r as usize] += 1;
            }
        }

        // this year's papers join the observable history
        for p in prior_papers..w.paper_authors.len() {
            let authors = w.paper_authors[p].clone();
            for &t in &w.paper_topics[p] {
                w.topic_papers[t as usize].push(p as u32);
                for &a in &authors {
                    w.topic_workers[t as usize].insert(a);
                    w.author_topics[a as usize].insert(t);
                }
            }
            for &a in &authors {
                for &b in &authors {
                    if a != b {
                        w.coauthors[a as usize].insert(b);
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Generates the synthetic corpus as a graph. Every configured author and
/// topic is registered, including ones that never publish.
pub fn synth_generate(cfg: &SynthConfig, seed: u64) -> Result<HeteroTemporalGraph, IngestError> {
    let records = synth_records(cfg, seed)?;
    let mut builder = GraphBuilder::new();
    for a in 0..cfg.n_authors {
        builder.add_node(NodeType::Author, &format!("a{a}"));
    }
    for t in 0..cfg.n_topics {
        builder.add_node(NodeType::Topic, &format!("t{t}"));
    }
    let mut asm = GraphAssembler::with_builder(builder);
    for r in records {
        asm.push(r)?;
    }
    Ok(asm.finish()?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{io, Relation};

    fn small() -> SynthConfig {
        SynthConfig {
            n_authors: 50,
            n_topics: 6,
            n_years: 5,
            papers_per_year: 20,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = io::to_bytes(&synth_generate(&small(), 7).unwrap());
        let b = io::to_bytes(&synth_generate(&small(), 7).unwrap());
        let c = io::to_bytes(&synth_generate(&small(), 8).unwrap());
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn counts_follow_the_configuration() {
        let cfg = small();
        let g = synth_generate(&cfg, 3).unwrap();
        let papers = cfg.n_years * cfg.papers_per_year;
        // counting oracle: cites are min(refs, papers of earlier years) per paper
        let cites: usize = (0..cfg.n_years)
            .map(|yi| cfg.papers_per_year * cfg.refs_per_paper.min(yi * cfg.papers_per_year))
            .sum();
        assert_eq!(g.node_count(NodeType::Author), 50);
        assert_eq!(g.node_count(NodeType::Topic), 6);
        assert_eq!(g.node_count(NodeType::Paper), papers);
        assert_eq!(g.edge_count(Relation::Writes), papers * cfg.authors_per_paper);
        assert_eq!(g.edge_count(Relation::DealsWith), papers * cfg.topics_per_paper);
        assert_eq!(g.edge_count(Relation::Cites), cites);
    }

    #[test]
    fn rejects_degenerate_configs() {
        let cfg = SynthConfig {
            n_authors: 0,
            ..small()
        };
        assert!(matches!(synth_generate(&cfg, 1), Err(IngestError::Config(_))));
        let cfg = SynthConfig {
            influence: 1.5,
            ..small()
        };
        assert!(cfg.validate().is_err());
    }
}
