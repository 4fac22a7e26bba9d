use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{ConstraintSpec, FactorPair, FitConfig};
use crate::rng;

/// Fills an array with |N(0, σ²)| draws, resampling exact zeros.
pub(crate) fn folded_normal<R: Rng>(rows: usize, cols: usize, sigma: f64, rng: &mut R) -> Array2<f64> {
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and positive");
    Array2::from_shape_simple_fn((rows, cols), || loop {
        let x: f64 = normal.sample(rng).abs();
        if x > 0.0 {
            break x;
        }
    })
}

/// W (M×K) then H (K×N) from the `init` sub-stream of `cfg.rng_seed`.
pub fn init_factors(m: usize, n: usize, spec: &ConstraintSpec, cfg: &FitConfig) -> FactorPair {
    let k = spec.n_topics;
    let mut rng = rng::stream(cfg.rng_seed, rng::INIT);
    let w = folded_normal(m, k, cfg.init_sigma, &mut rng);
    let h = folded_normal(k, n, cfg.init_sigma, &mut rng);
    FactorPair { w, h }
}
