//! Scoring a factorization against injected ground truth.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::synth::{TopicDistribution, BACKGROUND_LABEL};

/// Hard document-to-topic assignment by argmax over rows of W.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub topic_of_doc: Vec<usize>,
    /// Documents whose W row is entirely zero (assigned to topic 0).
    pub degenerate: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsdSummary {
    pub per_topic: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub purity: f64,
    pub nmi: f64,
    pub jsd: JsdSummary,
    pub n_docs: usize,
    pub n_topics: usize,
}

/// Row-wise argmax; ties go to the lowest topic index.
pub fn assign_documents(w: &Array2<f64>) -> Assignment {
    let mut topic_of_doc = Vec::with_capacity(w.nrows());
    let mut degenerate = Vec::new();
    for (i, row) in w.rows().into_iter().enumerate() {
        let mut best = 0;
        for (k, &x) in row.iter().enumerate() {
            if x > row[best] {
                best = k;
            }
        }
        if row.iter().all(|&x| x == 0.0) {
            degenerate.push(i);
        }
        topic_of_doc.push(best);
    }
    Assignment {
        topic_of_doc,
        degenerate,
    }
}

fn check_lengths(assign: &Assignment, labels: &[i64]) -> Result<()> {
    if assign.topic_of_doc.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} assignments for {} labels",
            assign.topic_of_doc.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// Purity restricted to minority labels.
///
/// Each learned topic's dominant label is chosen among non-background labels
/// only (lowest label wins ties); topics holding no minority documents are
/// left out of both the numerator and the denominator.
pub fn minority_purity(assign: &Assignment, labels: &[i64]) -> Result<f64> {
    check_lengths(assign, labels)?;
    let mut size: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_label: BTreeMap<usize, BTreeMap<i64, usize>> = BTreeMap::new();
    for (&t, &y) in assign.topic_of_doc.iter().zip(labels) {
        *size.entry(t).or_default() += 1;
        if y != BACKGROUND_LABEL {
            *by_label.entry(t).or_default().entry(y).or_default() += 1;
        }
    }
    let mut hits = 0usize;
    let mut total = 0usize;
    for (t, counts) in &by_label {
        // labels iterate ascending and only a strictly larger count replaces the best, so ties keep the lowest label
        let dominant = counts
            .iter()
            .fold((0usize, i64::MAX), |(best, label), (&y, &c)| {
                if c > best {
                    (c, y)
                } else {
                    (best, label)
                }
            })
            .0;
        if dominant > 0 {
            hits += dominant;
            total += size[t];
        }
    }
    Ok(if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    })
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(A;B) / sqrt(H(A) H(B))` between two
/// labelings (natural logs). Zero when either labeling has zero entropy.
pub fn nmi_labels(a: &[i64], b: &[i64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "labelings of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut ca: BTreeMap<i64, usize> = BTreeMap::new();
    let mut cb: BTreeMap<i64, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ha <= 0.0 || hb <= 0.0 {
        return Ok(0.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / n;
            pxy * (pxy * n * n / (ca[&x] as f64 * cb[&y] as f64)).ln()
        })
        .sum();
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// NMI between the hard assignment and the ground-truth labels, with the
/// background label treated as an ordinary class.
pub fn nmi(assign: &Assignment, labels: &[i64]) -> Result<f64> {
    check_lengths(assign, labels)?;
    let t: Vec<i64> = assign.topic_of_doc.iter().map(|&k| k as i64).collect();
    nmi_labels(labels, &t)
}

/// Base-2 Jensen-Shannon divergence of two distributions on the same support.
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> f64 {
    let half_kl = |a: f64, m: f64| if a > 0.0 { 0.5 * a * (a / m).log2() } else { 0.0 };
    let js: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| {
            let m = 0.5 * (a + b);
            half_kl(a, m) + half_kl(b, m)
        })
        .sum();
    js.clamp(0.0, 1.0)
}

fn summarize(per_topic: Vec<f64>) -> JsdSummary {
    let n = per_topic.len() as f64;
    if per_topic.is_empty() {
        return JsdSummary {
            per_topic,
            mean: 0.0,
            std: 0.0,
            min: 0.0,
            max: 0.0,
        };
    }
    let mean = per_topic.iter().sum::<f64>() / n;
    let var = per_topic.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    JsdSummary {
        mean,
        std: var.sqrt(),
        min: per_topic.iter().copied().fold(f64::INFINITY, f64::min),
        max: per_topic.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        per_topic,
    }
}

/// For each ground-truth topic, the minimum JSD to any row-normalized row of H.
///
/// Truth words missing from `vocab` keep their probability mass on extra
/// positions where every learned topic has zero weight.
pub fn topic_jsd(h: &Array2<f64>, vocab: &Vocabulary, truth: &[TopicDistribution]) -> Result<JsdSummary> {
    if h.ncols() != vocab.len() {
        return Err(Error::DimensionMismatch(format!(
            "H has {} columns, vocabulary has {} terms",
            h.ncols(),
            vocab.len()
        )));
    }
    let n = vocab.len();
    let mut extra: BTreeMap<&str, usize> = BTreeMap::new();
    for d in truth {
        let sum: f64 = d.words.values().sum();
        if (sum - 1.0).abs() > 1e-9 || d.words.values().any(|&p| p < 0.0) {
            return Err(Error::BadDistribution {
                topic: d.name.clone(),
                sum,
            });
        }
        for w in d.words.keys() {
            if vocab.index_of(w).is_none() {
                let next = n + extra.len();
                extra.entry(w.as_str()).or_insert(next);
            }
        }
    }
    let width = n + extra.len();

    let learned: Vec<Vec<f64>> = h
        .rows()
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let s = row.sum();
            if !(s > 0.0) {
                return Err(Error::DegenerateRow(k));
            }
            let mut q: Vec<f64> = row.iter().map(|x| x / s).collect();
            q.resize(width, 0.0);
            Ok(q)
        })
        .collect::<Result<_>>()?;

    let per_topic = truth
        .iter()
        .map(|d| {
            let mut p = vec![0.0; width];
            for (w, &prob) in &d.words {
                let j = vocab.index_of(w).unwrap_or_else(|| extra[w.as_str()]);
                p[j] += prob;
            }
            learned
                .iter()
                .map(|q| jensen_shannon(&p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(summarize(per_topic))
}

/// Purity, NMI and topic JSD in one report.
pub fn score(
    w: &Array2<f64>,
    h: &Array2<f64>,
    vocab: &Vocabulary,
    labels: &[i64],
    truth: &[TopicDistribution],
) -> Result<ScoreReport> {
    let assign = assign_documents(w);
    Ok(ScoreReport {
        purity: minority_purity(&assign, labels)?,
        nmi: nmi(&assign, labels)?,
        jsd: topic_jsd(h, vocab, truth)?,
        n_docs: w.nrows(),
        n_topics: w.ncols(),
    })
}

/// Column indices of the `top_n` largest entries in each row of H, heaviest
/// first, ties broken by the lower column index. `top_n` is clamped to N.
pub fn top_terms(h: &Array2<f64>, top_n: usize) -> Vec<Vec<usize>> {
    h.rows()
        .into_iter()
        .map(|row| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            idx.truncate(top_n);
            idx
        })
        .collect()
}
