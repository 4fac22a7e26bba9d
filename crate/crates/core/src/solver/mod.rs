//! Seed-guided constrained NMF under the generalized KL objective.
//!
//! Minimises `D_KL(V ‖ WH)` subject to
//!
//! * `g1_ik = W_ik − W_max ≤ 0` for seedless documents `i ∈ I₀` and minority topics `k`,
//! * `g2_k = θ_min − Σ_{j∈SI} H_kj / Σ_j H_kj ≤ 0` for minority topics `k`,
//!
//! with multiplicative updates for the factors and projected gradient ascent
//! for the multipliers. Minority topics are the first `n_minority` rows of `H`.

mod classical;
mod fit;
mod init;
mod objective;
mod updates;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classical::classical_nmf_step;
pub use fit::{fit, fit_from, fit_observed, FitOutcome, IterationView};
pub use init::init_factors;
pub use objective::{
    eval_g1, eval_g2, kl_divergence, lagrangian, lagrangian_grad_h, lagrangian_grad_w,
};
pub use updates::{update_h, update_h_v1, update_h_v2, update_lambda, update_mu, update_w};

/// Problem constants: topic counts, bounds, multiplier step and the seed structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub n_topics: usize,
    pub n_minority: usize,
    pub w_max: f64,
    pub theta_min: f64,
    pub eta: f64,
    /// SI, sorted and unique.
    pub seed_indices: Vec<usize>,
    /// I₀, sorted and unique.
    pub seedless_docs: Vec<usize>,
}

impl ConstraintSpec {
    pub fn new(
        n_topics: usize,
        n_minority: usize,
        w_max: f64,
        theta_min: f64,
        eta: f64,
        mut seed_indices: Vec<usize>,
        mut seedless_docs: Vec<usize>,
    ) -> Result<Self> {
        seed_indices.sort_unstable();
        seed_indices.dedup();
        seedless_docs.sort_unstable();
        seedless_docs.dedup();
        let spec = Self {
            n_topics,
            n_minority,
            w_max,
            theta_min,
            eta,
            seed_indices,
            seedless_docs,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unconstrained model with `k` topics.
    pub fn classical(k: usize) -> Self {
        Self {
            n_topics: k,
            n_minority: 0,
            w_max: 0.0,
            theta_min: 0.0,
            eta: 1.0,
            seed_indices: Vec::new(),
            seedless_docs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_topics == 0 {
            return bad("n_topics must be positive".into());
        }
        if self.n_minority > self.n_topics {
            return bad(format!(
                "n_minority {} exceeds n_topics {}",
                self.n_minority, self.n_topics
            ));
        }
        if !(self.w_max >= 0.0) {
            return bad(format!("w_max {} must be non-negative", self.w_max));
        }
        if !(0.0..=1.0).contains(&self.theta_min) {
            return bad(format!("theta_min {} outside [0, 1]", self.theta_min));
        }
        if !(self.eta > 0.0) {
            return bad(format!("eta {} must be positive", self.eta));
        }
        Ok(())
    }

    pub(crate) fn check_dims(&self, m: usize, n: usize) -> Result<()> {
        if let Some(&j) = self.seed_indices.last() {
            if j >= n {
                return Err(Error::DimensionMismatch(format!(
                    "seed index {j} outside {n} terms"
                )));
            }
        }
        if let Some(&i) = self.seedless_docs.last() {
            if i >= m {
                return Err(Error::DimensionMismatch(format!(
                    "seedless document {i} outside {m} documents"
                )));
            }
        }
        Ok(())
    }

    /// Number of constrained topics actually in force. An empty seed set makes
    /// both constraint families vacuous.
    pub fn active_minority(&self) -> usize {
        if self.seed_indices.is_empty() {
            0
        } else {
            self.n_minority
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.active_minority() == 0
    }

    pub(crate) fn seed_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &j in &self.seed_indices {
            mask[j] = true;
        }
        mask
    }

    /// Row of the λ rectangle for each document, `None` outside I₀.
    pub(crate) fn lambda_rows(&self, m: usize) -> Vec<Option<usize>> {
        let mut rows = vec![None; m];
        for (r, &i) in self.seedless_docs.iter().enumerate() {
            rows[i] = Some(r);
        }
        rows
    }
}

/// Dense non-negative factors: `W` is M×K, `H` is K×N.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub w: Array2<f64>,
    pub h: Array2<f64>,
}

impl FactorPair {
    pub fn n_topics(&self) -> usize {
        self.w.ncols()
    }

    pub fn min_entry(&self) -> f64 {
        self.w
            .iter()
            .chain(self.h.iter())
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Lagrange multipliers. `lambda` is dense over I₀ × S_MH (row `r` is document
/// `seedless_docs[r]`), `mu` has one entry per minority topic.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierState {
    pub lambda: Array2<f64>,
    pub mu: Vec<f64>,
}

impl MultiplierState {
    pub fn zeros(spec: &ConstraintSpec) -> Self {
        let k = spec.active_minority();
        let rows = if k == 0 { 0 } else { spec.seedless_docs.len() };
        Self {
            lambda: Array2::zeros((rows, k)),
            mu: vec![0.0; k],
        }
    }

    pub fn active_lambda(&self) -> usize {
        self.lambda.iter().filter(|&&l| l > 0.0).count()
    }

    pub fn active_mu(&self) -> usize {
        self.mu.iter().filter(|&&m| m > 0.0).count()
    }

    pub(crate) fn check_shape(&self, spec: &ConstraintSpec) -> Result<()> {
        let k = spec.active_minority();
        let rows = if k == 0 { 0 } else { spec.seedless_docs.len() };
        if self.lambda.dim() != (rows, k) || self.mu.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "multipliers {:?}/{} for rectangle {rows}x{k}",
                self.lambda.dim(),
                self.mu.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HUpdate {
    #[serde(rename = "v1")]
    Version1,
    #[serde(rename = "v2")]
    Version2,
    /// Version 1 with per-cell fallback to version 2 where its denominator is ≤ ε.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub epsilon: f64,
    pub h_update: HUpdate,
    pub rng_seed: u64,
    pub init_sigma: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iters: 200,
            rel_tol: 1e-7,
            epsilon: 1e-12,
            h_update: HUpdate::Auto,
            rng_seed: 0,
            init_sigma: 0.01,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidParameter("rel_tol must be non-negative".into()));
        }
        if !(self.init_sigma > 0.0) {
            return Err(Error::InvalidParameter("init_sigma must be positive".into()));
        }
        Ok(())
    }
}

/// Per-iteration diagnostics of a fit. All traces have `iterations_run` entries.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitReport {
    pub initial_kl: f64,
    pub kl_trace: Vec<f64>,
    pub g1_residual_trace: Vec<f64>,
    pub g2_residual_trace: Vec<f64>,
    pub active_lambda_trace: Vec<usize>,
    pub active_mu_trace: Vec<usize>,
    pub iterations_run: usize,
    pub converged: bool,
    /// H cells that used the version-2 rule under `HUpdate::Auto`, summed over iterations.
    pub v2_fallback_cells: usize,
    pub degenerate_row_resets: usize,
}

impl FitReport {
    pub fn final_kl(&self) -> f64 {
        self.kl_trace.last().copied().unwrap_or(self.initial_kl)
    }
}
