//! Synthetic minority-topic benchmark: sample background documents and
//! inject words from known topics into a random fraction of them.

mod background;
mod topics;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedCorpus;
use crate::error::{Error, Result};
use crate::rng;

pub use background::{generate_background, BackgroundSpec};

/// Label of documents that received no injection.
pub const BACKGROUND_LABEL: i64 = -1;

const BUNDLED_BACKGROUND: &str = include_str!("../../data/background.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionTopic {
    pub name: String,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub topics: Vec<InjectionTopic>,
    pub n_docs: usize,
    pub p_inject: f64,
    pub n_words_per_injection: usize,
    pub rng_seed: u64,
}

/// A ground-truth topic as a word distribution. Stored sparsely by word so it
/// can be aligned to any vocabulary later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub name: String,
    pub words: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Injected topic index per document, [`BACKGROUND_LABEL`] if none.
    pub labels: Vec<i64>,
    pub topic_word_dists: Vec<TopicDistribution>,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_inject) {
            return Err(Error::InvalidParameter(format!(
                "p_inject {} outside [0, 1]",
                self.p_inject
            )));
        }
        if self.topics.is_empty() && self.p_inject > 0.0 {
            return Err(Error::InvalidParameter("no injection topics".into()));
        }
        for t in &self.topics {
            let unique: BTreeSet<&String> = t.words.iter().collect();
            if unique.len() != t.words.len() {
                return Err(Error::InvalidParameter(format!(
                    "topic '{}' repeats a word",
                    t.name
                )));
            }
            if t.words.len() < self.n_words_per_injection {
                return Err(Error::TopicTooSmall {
                    topic: t.name.clone(),
                    available: t.words.len(),
                    requested: self.n_words_per_injection,
                });
            }
        }
        Ok(())
    }

    /// Union of all topic words, sorted.
    pub fn all_words(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.topics.iter().flat_map(|t| &t.words).collect();
        set.into_iter().cloned().collect()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// 18 topics, 500 documents, 10% injection probability, 4 words per injection.
pub fn default_spec() -> SyntheticSpec {
    SyntheticSpec {
        topics: topics::BUNDLED_TOPICS
            .iter()
            .map(|(name, words)| InjectionTopic {
                name: (*name).to_owned(),
                words: words.iter().map(|w| (*w).to_owned()).collect(),
            })
            .collect(),
        n_docs: 500,
        p_inject: 0.1,
        n_words_per_injection: 4,
        rng_seed: 0,
    }
}

/// The background corpus shipped with the crate (2000 random-word documents).
pub fn bundled_background() -> TokenizedCorpus {
    TokenizedCorpus::parse(BUNDLED_BACKGROUND)
}

/// Uniform distribution over each topic's full word list.
pub fn topic_distributions(topics: &[InjectionTopic]) -> Vec<TopicDistribution> {
    topics
        .iter()
        .map(|t| {
            let p = 1.0 / t.words.len() as f64;
            TopicDistribution {
                name: t.name.clone(),
                words: t.words.iter().map(|w| (w.clone(), p)).collect(),
            }
        })
        .collect()
}

/// Samples `n_docs` background documents without replacement and injects
/// topic words into each with probability `p_inject`.
///
/// An injected document gets one uniformly chosen topic and
/// `n_words_per_injection` distinct words from it, each inserted at a uniform
/// position among the current token gaps.
pub fn generate(background: &TokenizedCorpus, spec: &SyntheticSpec) -> Result<(TokenizedCorpus, GroundTruth)> {
    spec.validate()?;
    if background.len() < spec.n_docs {
        return Err(Error::BackgroundTooSmall {
            available: background.len(),
            requested: spec.n_docs,
        });
    }
    let mut sampling = rng::stream(spec.rng_seed, rng::SAMPLING);
    let mut injection = rng::stream(spec.rng_seed, rng::INJECTION);

    let picked = index::sample(&mut sampling, background.len(), spec.n_docs);
    let mut docs = Vec::with_capacity(spec.n_docs);
    let mut labels = Vec::with_capacity(spec.n_docs);
    let mut ids = Vec::with_capacity(spec.n_docs);
    for src in picked.iter() {
        let mut doc = background.docs[src].clone();
        let mut label = BACKGROUND_LABEL;
        if injection.random::<f64>() < spec.p_inject {
            let t = injection.random_range(0..spec.topics.len());
            let topic = &spec.topics[t];
            for w in index::sample(&mut injection, topic.words.len(), spec.n_words_per_injection) {
                let pos = injection.random_range(0..=doc.len());
                doc.insert(pos, topic.words[w].clone());
            }
            label = t as i64;
        }
        ids.push(match &background.source_ids {
            Some(ids) => ids[src].clone(),
            None => src.to_string(),
        });
        docs.push(doc);
        labels.push(label);
    }

    Ok((
        TokenizedCorpus::with_source_ids(docs, ids)?,
        GroundTruth {
            labels,
            topic_word_dists: topic_distributions(&spec.topics),
        },
    ))
}

impl GroundTruth {
    pub fn n_injected(&self) -> usize {
        self.labels.iter().filter(|&&l| l != BACKGROUND_LABEL).count()
    }

    pub fn labels_text(&self) -> String {
        self.labels.iter().map(|l| format!("{l}\n")).collect()
    }

    pub fn parse_labels(text: &str) -> std::result::Result<Vec<i64>, String> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(n, l)| {
                l.trim()
                    .parse::<i64>()
                    .map_err(|e| format!("line {}: {e}", n + 1))
            })
            .collect()
    }

    pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<i64>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_labels(&text).map_err(|m| Error::parse(path, m))
    }

    pub fn distributions_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.topic_word_dists)? + "\n")
    }

    pub fn read_distributions(path: impl AsRef<Path>) -> Result<Vec<TopicDistribution>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}
