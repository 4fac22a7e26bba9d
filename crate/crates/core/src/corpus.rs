//! Pre-tokenized corpus ingestion: vocabulary, TF-IDF / count matrices,
//! seed resolution and the seedless document set.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::DocTermMatrix;

/// Documents as token sequences, with optional external identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenizedCorpus {
    pub docs: Vec<Vec<String>>,
    pub source_ids: Option<Vec<String>>,
}

impl TokenizedCorpus {
    pub fn new(docs: Vec<Vec<String>>) -> Self {
        Self {
            docs,
            source_ids: None,
        }
    }

    pub fn with_source_ids(docs: Vec<Vec<String>>, ids: Vec<String>) -> Result<Self> {
        if ids.len() != docs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} source ids for {} documents",
                ids.len(),
                docs.len()
            )));
        }
        Ok(Self {
            docs,
            source_ids: Some(ids),
        })
    }

    /// Parses one document per line, tokens separated by spaces.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(|l| l.split_whitespace().map(str::to_owned).collect())
                .collect(),
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for doc in &self.docs {
            out.push_str(&doc.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn mean_doc_len(&self) -> f64 {
        if self.docs.is_empty() {
            return 0.0;
        }
        self.docs.iter().map(Vec::len).sum::<usize>() as f64 / self.docs.len() as f64
    }
}

/// Lexicographically ordered term list with its inverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from arbitrary terms (sorted and deduplicated).
    pub fn from_terms<I, S>(terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        let terms: Vec<String> = set.into_iter().collect();
        let index = terms
            .iter()
            .enumerate()
            .map(|(j, t)| (t.clone(), j))
            .collect();
        Self { terms, index }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, j: usize) -> &str {
        &self.terms[j]
    }
}

/// Vocabulary columns of the seed words, plus the seeds that were not found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    pub words: Vec<String>,
    pub indices: Vec<usize>,
    pub missing: Vec<String>,
}

impl SeedSet {
    pub fn empty() -> Self {
        Self {
            words: Vec::new(),
            indices: Vec::new(),
            missing: Vec::new(),
        }
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// One seed per line; blank lines and `#` comments are skipped.
    pub fn parse_words(text: &str) -> Vec<String> {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    }

    pub fn read_words(path: impl AsRef<Path>) -> Result<Vec<String>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse_words(&text))
    }
}

/// Documents whose seed columns are all zero (I₀).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedlessDocs {
    pub indices: Vec<usize>,
}

/// Terms whose document-frequency fraction lies in `[min_df, max_df]`.
pub fn build_vocabulary(corpus: &TokenizedCorpus, min_df: f64, max_df: f64) -> Result<Vocabulary> {
    if !(0.0..=1.0).contains(&min_df) || !(max_df > 0.0 && max_df <= 1.0) || min_df > max_df {
        return Err(Error::InvalidParameter(format!(
            "document-frequency bounds min_df={min_df}, max_df={max_df}"
        )));
    }
    let m = corpus.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &corpus.docs {
        let uniq: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in uniq {
            *df.entry(t).or_default() += 1;
        }
    }
    let kept: Vec<&str> = df
        .into_iter()
        .filter(|&(_, n)| {
            let frac = n as f64 / m as f64;
            frac >= min_df && frac <= max_df
        })
        .map(|(t, _)| t)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary { min_df, max_df });
    }
    Ok(Vocabulary::from_terms(kept))
}

fn term_counts(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> Vec<Vec<(usize, f64)>> {
    corpus
        .docs
        .iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for t in doc {
                if let Some(j) = vocab.index_of(t) {
                    *counts.entry(j).or_default() += 1.0;
                }
            }
            counts.into_iter().collect()
        })
        .collect()
}

fn require_vocab(vocab: &Vocabulary) -> Result<()> {
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_df: f64::NAN,
            max_df: f64::NAN,
        });
    }
    Ok(())
}

/// Raw occurrence counts.
pub fn build_count_matrix(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> Result<DocTermMatrix> {
    require_vocab(vocab)?;
    DocTermMatrix::from_rows(vocab.len(), term_counts(corpus, vocab))
}

/// TF-IDF with smoothed idf `ln((1+M)/(1+df)) + 1` and L2-normalised rows.
///
/// Documents with no in-vocabulary terms stay as zero rows; see
/// [`DocTermMatrix::empty_rows`].
pub fn build_tfidf(corpus: &TokenizedCorpus, vocab: &Vocabulary) -> Result<DocTermMatrix> {
    require_vocab(vocab)?;
    let counts = term_counts(corpus, vocab);
    let m = corpus.len() as f64;
    let mut df = vec![0usize; vocab.len()];
    for row in &counts {
        for &(j, _) in row {
            df[j] += 1;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + m) / (1.0 + d as f64)).ln() + 1.0)
        .collect();
    let rows = counts
        .into_iter()
        .map(|row| {
            let weighted: Vec<(usize, f64)> = row.into_iter().map(|(j, c)| (j, c * idf[j])).collect();
            let norm = weighted.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            weighted
                .into_iter()
                .map(|(j, v)| (j, v / norm))
                .collect()
        })
        .collect();
    let v = DocTermMatrix::from_rows(vocab.len(), rows)?;
    let empty = v.empty_rows();
    if !empty.is_empty() {
        log::warn!("{} documents have no in-vocabulary terms and are kept as zero rows", empty.len());
    }
    Ok(v)
}

/// Maps seed words to vocabulary columns. Missing seeds are reported, not fatal,
/// unless every seed is missing.
pub fn resolve_seeds(seed_words: &[String], vocab: &Vocabulary) -> Result<SeedSet> {
    if seed_words.is_empty() {
        return Err(Error::EmptySeedList);
    }
    let unique: BTreeSet<&str> = seed_words.iter().map(String::as_str).collect();
    let mut indices = Vec::new();
    let mut missing = Vec::new();
    for w in &unique {
        match vocab.index_of(w) {
            Some(j) => indices.push(j),
            None => missing.push((*w).to_owned()),
        }
    }
    if indices.is_empty() {
        return Err(Error::NoSeedsInVocabulary(unique.len()));
    }
    if !missing.is_empty() {
        log::warn!("{} seed words not in vocabulary: {:?}", missing.len(), missing);
    }
    indices.sort_unstable();
    Ok(SeedSet {
        words: unique.into_iter().map(str::to_owned).collect(),
        indices,
        missing,
    })
}

/// I₀ = { i : Σ_{j∈SI} V_ij = 0 }.
pub fn find_seedless_docs(v: &DocTermMatrix, seeds: &SeedSet) -> Result<SeedlessDocs> {
    if let Some(&j) = seeds.indices.iter().find(|&&j| j >= v.n_terms()) {
        return Err(Error::DimensionMismatch(format!(
            "seed column {j} outside {} terms",
            v.n_terms()
        )));
    }
    let indices = (0..v.n_docs())
        .filter(|&i| {
            let (cols, vals) = v.row(i);
            let mass: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(j, _)| seeds.contains(**j))
                .map(|(_, v)| *v)
                .sum();
            mass == 0.0
        })
        .collect();
    Ok(SeedlessDocs { indices })
}
