#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seednmf::corpus::{self, TokenizedCorpus, Vocabulary};
use seednmf::solver::ConstraintSpec;
use seednmf::sparse::DocTermMatrix;
use seednmf::synth::{self, GroundTruth, SyntheticSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense random V with roughly `density` non-zeros, every row and column hit at least once.
pub fn random_v(r: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> DocTermMatrix {
    let mut a = Array2::<f64>::zeros((m, n));
    for x in a.iter_mut() {
        if r.random::<f64>() < density {
            *x = r.random_range(0.1..3.0);
        }
    }
    for i in 0..m {
        let j = r.random_range(0..n);
        a[[i, j]] = r.random_range(0.1..3.0);
    }
    for j in 0..n {
        let i = r.random_range(0..m);
        a[[i, j]] = r.random_range(0.1..3.0);
    }
    DocTermMatrix::from_dense(&a).unwrap()
}

pub fn random_positive(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| r.random_range(0.05..1.5))
}

pub fn max_rel_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// One draw of the bundled benchmark, with the TF-IDF matrix and the default constraint constants.
pub struct Benchmark {
    pub corpus: TokenizedCorpus,
    pub truth: GroundTruth,
    pub vocab: Vocabulary,
    pub v: DocTermMatrix,
    pub spec: ConstraintSpec,
}

pub fn benchmark(draw: u64) -> Benchmark {
    let s = SyntheticSpec {
        rng_seed: draw,
        ..synth::default_spec()
    };
    let (corpus, truth) = synth::generate(&synth::bundled_background(), &s).unwrap();
    let vocab = corpus::build_vocabulary(&corpus, 0.0, 1.0).unwrap();
    let v = corpus::build_tfidf(&corpus, &vocab).unwrap();
    let seeds = corpus::resolve_seeds(&s.all_words(), &vocab).unwrap();
    let seedless = corpus::find_seedless_docs(&v, &seeds).unwrap();
    let spec = ConstraintSpec::new(20, 7, 1e-9, 0.4, 0.001, seeds.indices, seedless.indices).unwrap();
    Benchmark {
        corpus,
        truth,
        vocab,
        v,
        spec,
    }
}
