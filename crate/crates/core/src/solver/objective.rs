//! Objective, constraint functions and Lagrangian gradients.

use ndarray::{Array2, ArrayView1};

use super::{ConstraintSpec, FactorPair, MultiplierState};
use crate::error::{Error, Result};
use crate::sparse::DocTermMatrix;

pub(crate) fn dot_col(w_row: ArrayView1<f64>, h: &Array2<f64>, j: usize) -> f64 {
    w_row
        .iter()
        .zip(h.column(j).iter())
        .map(|(a, b)| a * b)
        .sum()
}

fn check_nonneg(name: &'static str, m: &Array2<f64>) -> Result<()> {
    for ((row, col), &value) in m.indexed_iter() {
        if !(value >= 0.0) {
            return Err(Error::NegativeEntry {
                matrix: name,
                row,
                col,
                value,
            });
        }
    }
    Ok(())
}

pub(crate) fn check_factor_dims(v: &DocTermMatrix, f: &FactorPair) -> Result<()> {
    let (m, k) = f.w.dim();
    let (k2, n) = f.h.dim();
    if m != v.n_docs() || n != v.n_terms() || k != k2 {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{}, W is {m}x{k}, H is {k2}x{n}",
            v.n_docs(),
            v.n_terms()
        )));
    }
    Ok(())
}

/// Generalized KL divergence `Σ V log(V/(WH)) − V + WH`.
///
/// Uses `0·log(0/x) = 0`; `epsilon` is added to `(WH)_ij` inside the log only
/// where `V_ij > 0`. The `Σ (WH)_ij` term is evaluated in factored form.
pub fn kl_divergence(v: &DocTermMatrix, f: &FactorPair, epsilon: f64) -> Result<f64> {
    check_factor_dims(v, f)?;
    check_nonneg("W", &f.w)?;
    check_nonneg("H", &f.h)?;
    let mut total = 0.0;
    for i in 0..v.n_docs() {
        let (cols, vals) = v.row(i);
        let w_row = f.w.row(i);
        for (&j, &x) in cols.iter().zip(vals) {
            let wh = dot_col(w_row, &f.h, j);
            total += x * (x / (wh + epsilon)).ln() - x;
        }
    }
    let w_mass = f.w.sum_axis(ndarray::Axis(0));
    let h_mass = f.h.sum_axis(ndarray::Axis(1));
    total += w_mass.dot(&h_mass);
    Ok(total)
}

/// `g1_ik = W_ik − W_max` over I₀ × S_MH, shaped like `MultiplierState::lambda`.
pub fn eval_g1(w: &Array2<f64>, spec: &ConstraintSpec) -> Array2<f64> {
    let k = spec.active_minority();
    if k == 0 {
        return Array2::zeros((0, 0));
    }
    Array2::from_shape_fn((spec.seedless_docs.len(), k), |(r, t)| {
        w[[spec.seedless_docs[r], t]] - spec.w_max
    })
}

/// `(Num_k, Den_k)` for each minority row: seed mass and total mass.
pub(crate) fn seed_mass(h: &Array2<f64>, spec: &ConstraintSpec) -> Vec<(f64, f64)> {
    (0..spec.active_minority())
        .map(|k| {
            let row = h.row(k);
            let num = spec.seed_indices.iter().map(|&j| row[j]).sum::<f64>();
            (num, row.sum())
        })
        .collect()
}

/// `g2_k = θ_min − Num_k / Den_k` for each minority topic.
pub fn eval_g2(h: &Array2<f64>, spec: &ConstraintSpec) -> Result<Vec<f64>> {
    seed_mass(h, spec)
        .into_iter()
        .enumerate()
        .map(|(k, (num, den))| {
            if den > 0.0 {
                Ok(spec.theta_min - num / den)
            } else {
                Err(Error::DegenerateRow(k))
            }
        })
        .collect()
}

/// Lagrangian `D_KL + Σ λ_ik g1_ik + Σ μ_k g2_k` at fixed multipliers.
pub fn lagrangian(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    epsilon: f64,
) -> Result<f64> {
    mult.check_shape(spec)?;
    let kl = kl_divergence(v, f, epsilon)?;
    let g1 = eval_g1(&f.w, spec);
    let g2 = eval_g2(&f.h, spec)?;
    let pen_w: f64 = g1.iter().zip(mult.lambda.iter()).map(|(g, l)| g * l).sum();
    let pen_h: f64 = g2.iter().zip(&mult.mu).map(|(g, m)| g * m).sum();
    Ok(kl + pen_w + pen_h)
}

/// `∂L/∂W_ik = Σ_j H_kj (1 − V_ij/(WH)_ij) + λ_ik δ_{i∈I₀, k∈S_MH}`.
pub fn lagrangian_grad_w(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    epsilon: f64,
) -> Result<Array2<f64>> {
    check_factor_dims(v, f)?;
    mult.check_shape(spec)?;
    let (m, k) = f.w.dim();
    let h_mass = f.h.sum_axis(ndarray::Axis(1));
    let lambda_rows = spec.lambda_rows(m);
    let kmh = spec.active_minority();
    let mut grad = Array2::zeros((m, k));
    for i in 0..m {
        let (cols, vals) = v.row(i);
        let w_row = f.w.row(i);
        for t in 0..k {
            let mut pull = 0.0;
            for (&j, &x) in cols.iter().zip(vals) {
                pull += f.h[[t, j]] * x / (dot_col(w_row, &f.h, j) + epsilon);
            }
            let mut g = h_mass[t] - pull;
            if let (Some(r), true) = (lambda_rows[i], t < kmh) {
                g += mult.lambda[[r, t]];
            }
            grad[[i, t]] = g;
        }
    }
    Ok(grad)
}

/// `∂L/∂H_kj = Σ_i W_ik (1 − V_ij/(WH)_ij) + μ_k δ_{k∈S_MH} (Num_k/Den_k² − δ_{j∈SI}/Den_k)`.
pub fn lagrangian_grad_h(
    v: &DocTermMatrix,
    f: &FactorPair,
    mult: &MultiplierState,
    spec: &ConstraintSpec,
    epsilon: f64,
) -> Result<Array2<f64>> {
    check_factor_dims(v, f)?;
    mult.check_shape(spec)?;
    let (k, n) = f.h.dim();
    let w_mass = f.w.sum_axis(ndarray::Axis(0));
    let mass = seed_mass(&f.h, spec);
    if let Some(t) = mass.iter().position(|&(_, den)| !(den > 0.0)) {
        return Err(Error::DegenerateRow(t));
    }
    let seed = spec.seed_mask(n);
    let mut grad = Array2::zeros((k, n));
    for j in 0..n {
        let (rows, vals) = v.col(j);
        for t in 0..k {
            let mut pull = 0.0;
            for (&i, &x) in rows.iter().zip(vals) {
                pull += f.w[[i, t]] * x / (dot_col(f.w.row(i), &f.h, j) + epsilon);
            }
            let mut g = w_mass[t] - pull;
            if let Some(&(num, den)) = mass.get(t) {
                let seed_term = if seed[j] { 1.0 / den } else { 0.0 };
                g += mult.mu[t] * (num / (den * den) - seed_term);
            }
            grad[[t, j]] = g;
        }
    }
    Ok(grad)
}
