//! On-disk formats: model export (JSON, TSV), trace CSV and run summaries.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::solver::{ConstraintSpec, FactorPair, FitReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "K_MH")]
    pub k_mh: usize,
    #[serde(rename = "W_max")]
    pub w_max: f64,
    pub theta_min: f64,
    pub eta: f64,
    pub rng_seed: u64,
    pub iterations_run: usize,
}

/// A fitted model as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExport {
    pub meta: ModelMeta,
    pub vocabulary: Vec<String>,
    pub vocab_hash: String,
    pub w: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

/// SHA-256 over the newline-joined vocabulary, hex encoded.
pub fn vocab_hash(terms: &[String]) -> String {
    let mut hasher = Sha256::new();
    for t in terms {
        hasher.update(t.as_bytes());
        hasher.update(b"\n");
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: &[Vec<f64>], cols: usize, what: &str) -> Result<Array2<f64>> {
    let mut flat = Vec::with_capacity(rows.len() * cols);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(Error::DimensionMismatch(format!(
                "{what} row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        flat.extend_from_slice(r);
    }
    Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| Error::DimensionMismatch(e.to_string()))
}

impl ModelExport {
    pub fn new(
        factors: &FactorPair,
        vocab: &Vocabulary,
        spec: &ConstraintSpec,
        rng_seed: u64,
        iterations_run: usize,
    ) -> Self {
        let (m, k) = factors.w.dim();
        Self {
            meta: ModelMeta {
                m,
                n: factors.h.ncols(),
                k,
                k_mh: spec.n_minority,
                w_max: spec.w_max,
                theta_min: spec.theta_min,
                eta: spec.eta,
                rng_seed,
                iterations_run,
            },
            vocabulary: vocab.terms().to_vec(),
            vocab_hash: vocab_hash(vocab.terms()),
            w: to_rows(&factors.w),
            h: to_rows(&factors.h),
        }
    }

    /// Checks shapes, non-negativity and the vocabulary hash, and returns the factors.
    pub fn factors(&self) -> Result<FactorPair> {
        let meta = &self.meta;
        if self.w.len() != meta.m || self.h.len() != meta.k || self.vocabulary.len() != meta.n {
            return Err(Error::DimensionMismatch(format!(
                "model header says M={} N={} K={} but holds {} W rows, {} H rows, {} terms",
                meta.m,
                meta.n,
                meta.k,
                self.w.len(),
                self.h.len(),
                self.vocabulary.len()
            )));
        }
        if vocab_hash(&self.vocabulary) != self.vocab_hash {
            return Err(Error::DimensionMismatch("vocabulary does not match its recorded hash".into()));
        }
        let w = from_rows(&self.w, meta.k, "W")?;
        let h = from_rows(&self.h, meta.n, "H")?;
        for (name, a) in [("W", &w), ("H", &h)] {
            if let Some(((row, col), &value)) = a.indexed_iter().find(|(_, x)| !(**x >= 0.0)) {
                return Err(Error::NegativeEntry {
                    matrix: name,
                    row,
                    col,
                    value,
                });
            }
        }
        Ok(FactorPair { w, h })
    }

    pub fn vocab(&self) -> Vocabulary {
        Vocabulary::from_terms(self.vocabulary.iter().cloned())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Tab-separated export: `#` header lines with the metadata and
    /// vocabulary, then a `W` block (one row per document) and an `H` block
    /// (one row per topic).
    pub fn to_tsv(&self) -> String {
        let m = &self.meta;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# M={}\tN={}\tK={}\tK_MH={}\tW_max={}\ttheta_min={}\teta={}\trng_seed={}\titerations_run={}",
            m.m, m.n, m.k, m.k_mh, m.w_max, m.theta_min, m.eta, m.rng_seed, m.iterations_run
        );
        let _ = writeln!(out, "# vocab_hash={}", self.vocab_hash);
        let _ = writeln!(out, "# vocabulary\t{}", self.vocabulary.join("\t"));
        for (name, rows) in [("W", &self.w), ("H", &self.h)] {
            out.push_str(name);
            out.push('\n');
            for r in rows {
                let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                out.push_str(&cells.join("\t"));
                out.push('\n');
            }
        }
        out
    }
}

/// Trace CSV: one line per iteration, 1-based.
pub fn trace_csv(report: &FitReport) -> String {
    let mut out = String::from("iter,kl,max_g1_residual,max_g2_residual,active_lambda,active_mu\n");
    for t in 0..report.kl_trace.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t + 1,
            report.kl_trace[t],
            report.g1_residual_trace[t],
            report.g2_residual_trace[t],
            report.active_lambda_trace[t],
            report.active_mu_trace[t]
        );
    }
    out
}

/// Per-iteration mean and population standard deviation of KL across runs.
/// Runs that stopped early contribute to the iterations they reached.
pub fn kl_band_csv(reports: &[&FitReport]) -> String {
    let longest = reports.iter().map(|r| r.kl_trace.len()).max().unwrap_or(0);
    let mut out = String::from("iter,n_runs,kl_mean,kl_std\n");
    for t in 0..longest {
        let vals: Vec<f64> = reports.iter().filter_map(|r| r.kl_trace.get(t).copied()).collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let _ = writeln!(out, "{},{},{},{}", t + 1, vals.len(), mean, var.sqrt());
    }
    out
}

/// What `fit` records about a run besides the model itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rng_seed: u64,
    pub classical: bool,
    pub n_topics: usize,
    pub n_minority: usize,
    pub theta_min: f64,
    pub w_max: f64,
    pub eta: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub h_update: String,
    pub weighting: String,
    pub n_seed_terms: usize,
    pub n_seedless_docs: usize,
    pub initial_kl: f64,
    pub final_kl: f64,
    pub final_max_g1_residual: f64,
    pub final_max_g2_residual: f64,
    pub iterations_run: usize,
    pub converged: bool,
    pub v2_fallback_cells: usize,
    pub degenerate_row_resets: usize,
    pub wall_time_secs: f64,
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model() -> ModelExport {
        let f = FactorPair {
            w: array![[0.5, 0.0], [1.0, 2.5]],
            h: array![[0.1, 0.2, 0.3], [1.0, 0.0, 1e-300]],
        };
        let vocab = Vocabulary::from_terms(["b", "a", "c"]);
        ModelExport::new(&f, &vocab, &ConstraintSpec::classical(2), 7, 12)
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = model();
        let back: ModelExport = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let f = back.factors().unwrap();
        assert_eq!(f.h[[1, 2]], 1e-300);
        assert_eq!(back.vocabulary, ["a", "b", "c"]);
        assert!(m.to_json().unwrap().contains("\"K_MH\": 0"));
    }

    #[test]
    fn tampered_vocabulary_is_rejected() {
        let mut m = model();
        m.vocabulary[0] = "z".into();
        assert!(matches!(m.factors(), Err(Error::DimensionMismatch(_))));
        let mut m = model();
        m.w[1][1] = -1.0;
        assert!(matches!(m.factors(), Err(Error::NegativeEntry { matrix: "W", .. })));
    }

    #[test]
    fn tsv_layout() {
        let tsv = model().to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert!(lines[0].starts_with("# M=2\tN=3\tK=2\tK_MH=0"));
        assert_eq!(lines[3], "W");
        assert_eq!(lines[4], "0.5\t0");
        assert_eq!(lines[6], "H");
        assert_eq!(lines.len(), 9);
    }

    #[test]
    fn trace_and_band() {
        let r = FitReport {
            kl_trace: vec![3.0, 2.0],
            g1_residual_trace: vec![0.5, 0.0],
            g2_residual_trace: vec![0.1, 0.1],
            active_lambda_trace: vec![4, 0],
            active_mu_trace: vec![1, 1],
            ..FitReport::default()
        };
        assert_eq!(
            trace_csv(&r),
            "iter,kl,max_g1_residual,max_g2_residual,active_lambda,active_mu\n1,3,0.5,0.1,4,1\n2,2,0,0.1,0,1\n"
        );
        let s = FitReport {
            kl_trace: vec![5.0],
            ..FitReport::default()
        };
        assert_eq!(kl_band_csv(&[&r, &s]), "iter,n_runs,kl_mean,kl_std\n1,2,4,1\n2,1,2,0\n");
    }
}
