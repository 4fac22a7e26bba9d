//! Random-word background corpus.
//!
//! Documents are short bags of pseudo-words drawn from a handful of latent
//! majority themes plus a shared pool of common words, both Zipf-distributed.
//! This stands in for the unpublished comment texts: it has majority topic
//! structure for a factorization to find and never contains injection words.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedCorpus;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSpec {
    pub n_docs: usize,
    pub vocab_size: usize,
    pub n_themes: usize,
    /// Words owned by each theme.
    pub theme_width: usize,
    /// Probability that a token comes from the document's theme rather than the common pool.
    pub theme_share: f64,
    pub mean_doc_len: f64,
    pub zipf_exponent: f64,
    pub rng_seed: u64,
}

impl Default for BackgroundSpec {
    fn default() -> Self {
        Self {
            n_docs: 2000,
            vocab_size: 3000,
            n_themes: 13,
            theme_width: 200,
            theme_share: 0.7,
            mean_doc_len: 9.6,
            zipf_exponent: 1.0,
            rng_seed: 2024,
        }
    }
}

const ONSETS: &[&str] = &[
    "k", "l", "t", "s", "n", "m", "p", "r", "v", "j", "h", "kr", "st", "tr", "pl", "sk",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "y", "ä", "ö", "aa", "ei", "ou", "uo"];
const CODAS: &[&str] = &["", "", "", "n", "s", "t", "l", "r"];

fn pseudo_word<R: Rng>(rng: &mut R) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS.choose(rng).expect("non-empty"));
        w.push_str(VOWELS.choose(rng).expect("non-empty"));
    }
    w.push_str(CODAS.choose(rng).expect("non-empty"));
    w
}

fn zipf_weights(n: usize, exponent: f64) -> Vec<f64> {
    (1..=n).map(|r| (r as f64).powf(-exponent)).collect()
}

/// Generates a background corpus; words in `exclude` never appear.
pub fn generate_background(spec: &BackgroundSpec, exclude: &BTreeSet<String>) -> Result<TokenizedCorpus> {
    if spec.n_themes == 0 || spec.theme_width == 0 || spec.vocab_size < spec.theme_width {
        return Err(Error::InvalidParameter(format!(
            "background needs themes and a vocabulary of at least {} words",
            spec.theme_width
        )));
    }
    if !(0.0..=1.0).contains(&spec.theme_share) || !(spec.mean_doc_len > 0.0) {
        return Err(Error::InvalidParameter("theme_share or mean_doc_len out of range".into()));
    }
    let mut rng = rng::stream(spec.rng_seed, rng::BACKGROUND);

    let mut seen = BTreeSet::new();
    let mut vocab = Vec::with_capacity(spec.vocab_size);
    let mut attempts = 0usize;
    while vocab.len() < spec.vocab_size {
        attempts += 1;
        if attempts > spec.vocab_size * 100 {
            return Err(Error::InvalidParameter(format!(
                "cannot draw {} distinct pseudo-words",
                spec.vocab_size
            )));
        }
        let w = pseudo_word(&mut rng);
        if !exclude.contains(&w) && seen.insert(w.clone()) {
            vocab.push(w);
        }
    }

    // Each theme owns a random slice of the vocabulary; the common pool is the whole vocabulary.
    let theme_dist = WeightedAliasIndex::new(zipf_weights(spec.theme_width, spec.zipf_exponent))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let common_dist = WeightedAliasIndex::new(zipf_weights(spec.vocab_size, spec.zipf_exponent))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let themes: Vec<Vec<usize>> = (0..spec.n_themes)
        .map(|_| {
            let mut idx: Vec<usize> = (0..spec.vocab_size).collect();
            idx.shuffle(&mut rng);
            idx.truncate(spec.theme_width);
            idx
        })
        .collect();
    let mut common: Vec<usize> = (0..spec.vocab_size).collect();
    common.shuffle(&mut rng);
    let len_dist = Poisson::new(spec.mean_doc_len).map_err(|e| Error::InvalidParameter(e.to_string()))?;

    let docs = (0..spec.n_docs)
        .map(|_| {
            let theme = &themes[rng.random_range(0..spec.n_themes)];
            let len = (len_dist.sample(&mut rng) as usize).max(1);
            (0..len)
                .map(|_| {
                    let j = if rng.random::<f64>() < spec.theme_share {
                        theme[theme_dist.sample(&mut rng)]
                    } else {
                        common[common_dist.sample(&mut rng)]
                    };
                    vocab[j].clone()
                })
                .collect()
        })
        .collect();
    Ok(TokenizedCorpus::new(docs))
}
