use ndarray::Array2;

use super::{FactorPair, FitConfig};
use crate::sparse::DocTermMatrix;

/// One sweep of the unconstrained multiplicative KL rules (W with the old H,
/// then H with the new W).
///
/// Written as a triplet scatter, independent of the gather-based constrained
/// updates, so it can serve as their reference.
#[allow(clippy::needless_range_loop)]
pub fn classical_nmf_step(v: &DocTermMatrix, f: &FactorPair, cfg: &FitConfig) -> FactorPair {
    let eps = cfg.epsilon;
    let (m, k) = f.w.dim();
    let n = f.h.ncols();
    let triplets: Vec<(usize, usize, f64)> = v.triplets().collect();

    let reconstruct = |w: &Array2<f64>, h: &Array2<f64>, i: usize, j: usize| {
        let mut s = 0.0;
        for t in 0..k {
            s += w[[i, t]] * h[[t, j]];
        }
        s
    };

    // W ← W ⊙ (R Hᵀ) ⊘ (1 Hᵀ + ε), R = V ⊘ (WH + ε)
    let mut w_num = Array2::<f64>::zeros((m, k));
    for &(i, j, x) in &triplets {
        let r = x / (reconstruct(&f.w, &f.h, i, j) + eps);
        for t in 0..k {
            w_num[[i, t]] += r * f.h[[t, j]];
        }
    }
    let mut h_rowsum = vec![0.0; k];
    for t in 0..k {
        for j in 0..n {
            h_rowsum[t] += f.h[[t, j]];
        }
    }
    let mut w = f.w.clone();
    for i in 0..m {
        for t in 0..k {
            w[[i, t]] *= w_num[[i, t]] / (h_rowsum[t] + eps);
        }
    }

    // H ← H ⊙ (Wᵀ R) ⊘ (Wᵀ 1 + ε), with R recomputed from the new W
    let mut h_num = Array2::<f64>::zeros((k, n));
    for &(i, j, x) in &triplets {
        let r = x / (reconstruct(&w, &f.h, i, j) + eps);
        for t in 0..k {
            h_num[[t, j]] += r * w[[i, t]];
        }
    }
    let mut w_colsum = vec![0.0; k];
    for i in 0..m {
        for t in 0..k {
            w_colsum[t] += w[[i, t]];
        }
    }
    let mut h = f.h.clone();
    for t in 0..k {
        for j in 0..n {
            h[[t, j]] *= h_num[[t, j]] / (w_colsum[t] + eps);
        }
    }
    FactorPair { w, h }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn fixed_point_at_exact_factorisation() {
        let w = array![[1.0, 0.5], [0.2, 2.0], [0.7, 0.7]];
        let h = array![[0.3, 1.0, 0.1, 0.6], [1.2, 0.2, 0.9, 0.4]];
        let v = DocTermMatrix::from_dense(&w.dot(&h)).unwrap();
        let f = FactorPair { w, h };
        let tight = FitConfig {
            epsilon: 1e-15,
            ..FitConfig::default()
        };
        let g = classical_nmf_step(&v, &f, &tight);
        for (a, b) in f.w.iter().zip(g.w.iter()).chain(f.h.iter().zip(g.h.iter())) {
            assert!((a - b).abs() < 1e-12);
        }
        let g = classical_nmf_step(&v, &f, &FitConfig::default());
        for (a, b) in f.w.iter().zip(g.w.iter()).chain(f.h.iter().zip(g.h.iter())) {
            assert!((a - b).abs() <= 1e-10 * a.abs());
        }
    }

    #[test]
    fn scalar_sweep_hand_value() {
        // W: 1·(1·2/1)/1 = 2. H with W=2: WH = 2 = V, so H stays 1.
        let v = DocTermMatrix::from_dense(&array![[2.0]]).unwrap();
        let f = FactorPair {
            w: array![[1.0]],
            h: array![[1.0]],
        };
        let g = classical_nmf_step(&v, &f, &FitConfig::default());
        assert!((g.w[[0, 0]] - 2.0).abs() < 1e-9);
        assert!((g.h[[0, 0]] - 1.0).abs() < 1e-9);
    }
}
