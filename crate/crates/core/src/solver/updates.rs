//! Multiplicative factor updates and multiplier ascent.
//!
//! Each sweep uses batch semantics: `(WH)`, row/column masses and the seed
//! masses `Num_k`, `Den_k` are taken from the sweep's input factors. Rows of W
//! (columns of H) are then independent and are updated in parallel; every
//! element is computed with a fixed sequential reduction order, so results do
//! not depend on the thread count.

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::objective::{check_factor_dims, seed_mass};
use super::{ConstraintSpec, FactorPair, FitConfig, HUpdate, MultiplierState};
use crate::error::{Error, Result};
use crate::sparse::DocTermMatrix;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_inputs(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
) -> Result<()> {
    check_factor_dims(v, f)?;
    if f.n_topics() != spec.n_topics {
        return Err(Error::DimensionMismatch(format!(
            "factors have {} topics, spec has {}",
            f.n_topics(),
            spec.n_topics
        )));
    }
    spec.check_dims(v.n_docs(), v.n_terms())?;
    mult.check_shape(spec)
}

/// `W_ik ← W_ik · Σ_j H_kj V_ij/((WH)_ij+ε) / (Σ_j H_kj + λ_ik δ_{i∈I₀,k∈S_MH} + ε)`.
pub fn update_w(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
) -> Result<Array2<f64>> {
    check_inputs(v, f, mult, spec)?;
    let eps = cfg.epsilon;
    let (m, k) = f.w.dim();
    let kmh = spec.active_minority();
    let h_mass = f.h.sum_axis(Axis(1));
    let ht = f.h.t().as_standard_layout().into_owned();
    let w = f.w.as_standard_layout();
    let lambda_rows = spec.lambda_rows(m);

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let w_row = &w.as_slice().expect("standard layout")[i * k..(i + 1) * k];
            let (cols, vals) = v.row(i);
            let mut num = vec![0.0; k];
            for (&j, &x) in cols.iter().zip(vals) {
                let h_col = &ht.as_slice().expect("standard layout")[j * k..(j + 1) * k];
                let ratio = x / (dot(w_row, h_col) + eps);
                for t in 0..k {
                    num[t] += h_col[t] * ratio;
                }
            }
            (0..k)
                .map(|t| {
                    let mut den = h_mass[t];
                    if let (Some(r), true) = (lambda_rows[i], t < kmh) {
                        den += mult.lambda[[r, t]];
                    }
                    w_row[t] * (num[t] / (den + eps))
                })
                .collect()
        })
        .collect();

    let mut out = Array2::zeros((m, k));
    for (i, row) in rows.into_iter().enumerate() {
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&row[..]));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum HRule {
    /// Version 1; cells with `denominator + ε ≤ 0` are reported.
    Strict1,
    Version2,
    /// Version 1, switching to version 2 per cell where the raw version-1
    /// denominator is `≤ ε`.
    Auto,
}

struct HSweep {
    h: Array2<f64>,
    failed: Vec<(usize, usize)>,
    fallbacks: usize,
}

fn sweep_h(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
    rule: HRule,
) -> Result<HSweep> {
    check_inputs(v, f, mult, spec)?;
    let eps = cfg.epsilon;
    let (k, n) = f.h.dim();
    let kmh = spec.active_minority();
    let mass = seed_mass(&f.h, spec);
    for (t, &(_, den)) in mass.iter().enumerate() {
        if mult.mu[t] != 0.0 && !(den > 0.0) {
            return Err(Error::DegenerateRow(t));
        }
    }
    let seed = spec.seed_mask(n);
    let w_mass = f.w.sum_axis(Axis(0));
    let w = f.w.as_standard_layout();
    let w_slice = w.as_slice().expect("standard layout");
    let ht = f.h.t().as_standard_layout().into_owned();
    let ht_slice = ht.as_slice().expect("standard layout");

    let cols: Vec<(Vec<f64>, Vec<usize>, usize)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let h_col = &ht_slice[j * k..(j + 1) * k];
            let (rows, vals) = v.col(j);
            let mut num = vec![0.0; k];
            for (&i, &x) in rows.iter().zip(vals) {
                let w_row = &w_slice[i * k..(i + 1) * k];
                let ratio = x / (dot(w_row, h_col) + eps);
                for t in 0..k {
                    num[t] += w_row[t] * ratio;
                }
            }
            let mut failed = Vec::new();
            let mut fallbacks = 0;
            let new_col = (0..k)
                .map(|t| {
                    let mu = if t < kmh { mult.mu[t] } else { 0.0 };
                    if mu == 0.0 {
                        return h_col[t] * (num[t] / (w_mass[t] + eps));
                    }
                    let (seed_num, den) = mass[t];
                    let seed_term = if seed[j] { 1.0 / den } else { 0.0 };
                    let spread = seed_num / (den * den);
                    let v1_den = w_mass[t] + mu * (spread - seed_term);
                    let use_v2 = match rule {
                        HRule::Version2 => true,
                        HRule::Strict1 => false,
                        HRule::Auto => v1_den <= eps,
                    };
                    if use_v2 {
                        if rule == HRule::Auto {
                            fallbacks += 1;
                        }
                        h_col[t] * ((num[t] + mu * seed_term) / (w_mass[t] + mu * spread + eps))
                    } else {
                        if v1_den + eps <= 0.0 {
                            failed.push(t);
                        }
                        h_col[t] * (num[t] / (v1_den + eps))
                    }
                })
                .collect();
            (new_col, failed, fallbacks)
        })
        .collect();

    let mut h = Array2::zeros((k, n));
    let mut failed = Vec::new();
    let mut fallbacks = 0;
    for (j, (col, bad, fb)) in cols.into_iter().enumerate() {
        h.column_mut(j).assign(&ndarray::ArrayView1::from(&col[..]));
        failed.extend(bad.into_iter().map(|t| (t, j)));
        fallbacks += fb;
    }
    Ok(HSweep { h, failed, fallbacks })
}

/// Version-1 rule:
/// `H_kj ← H_kj · Σ_i W_ik V_ij/((WH)_ij+ε) / (Σ_i W_ik + μ_k δ_{k∈S_MH}(Num_k/Den_k² − δ_{j∈SI}/Den_k) + ε)`.
///
/// Fails with [`Error::NonPositiveDenominator`] listing every `(k, j)` whose
/// denominator is not positive.
pub fn update_h_v1(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
) -> Result<Array2<f64>> {
    let sweep = sweep_h(v, f, mult, spec, cfg, HRule::Strict1)?;
    if !sweep.failed.is_empty() {
        let mut cells = sweep.failed;
        cells.sort_unstable();
        return Err(Error::NonPositiveDenominator { cells });
    }
    Ok(sweep.h)
}

/// Version-2 rule, non-negative for any `μ ≥ 0`:
/// `H_kj ← H_kj · (Σ_i W_ik V_ij/((WH)_ij+ε) + μ_k δ δ_{j∈SI}/Den_k) / (Σ_i W_ik + μ_k δ Num_k/Den_k² + ε)`.
pub fn update_h_v2(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
) -> Result<Array2<f64>> {
    Ok(sweep_h(v, f, mult, spec, cfg, HRule::Version2)?.h)
}

/// H sweep according to `cfg.h_update`. Returns the new H and the number of
/// cells that fell back to version 2.
pub fn update_h(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
) -> Result<(Array2<f64>, usize)> {
    match cfg.h_update {
        HUpdate::Version1 => Ok((update_h_v1(v, f, mult, spec, cfg)?, 0)),
        HUpdate::Version2 => Ok((update_h_v2(v, f, mult, spec, cfg)?, 0)),
        HUpdate::Auto => {
            let s = sweep_h(v, f, mult, spec, cfg, HRule::Auto)?;
            Ok((s.h, s.fallbacks))
        }
    }
}

/// `λ_ik ← 0` if `g1_ik < 0`, else `max(0, λ_ik + η g1_ik)`.
pub fn update_lambda(w: &Array2<f64>, mult: &MultiplierState, spec: &ConstraintSpec) -> Array2<f64> {
    let g1 = super::eval_g1(w, spec);
    let mut out = mult.lambda.clone();
    out.zip_mut_with(&g1, |l, &g| *l = ascend(*l, g, spec.eta));
    out
}

/// `μ_k ← 0` if `g2_k < 0`, else `max(0, μ_k + η g2_k)`.
pub fn update_mu(h: &Array2<f64>, mult: &MultiplierState, spec: &ConstraintSpec) -> Result<Vec<f64>> {
    let g2 = super::eval_g2(h, spec)?;
    Ok(mult
        .mu
        .iter()
        .zip(g2)
        .map(|(&m, g)| ascend(m, g, spec.eta))
        .collect())
}

#[inline]
fn ascend(current: f64, g: f64, eta: f64) -> f64 {
    if g < 0.0 {
        0.0
    } else {
        (current + eta * g).max(0.0)
    }
}
