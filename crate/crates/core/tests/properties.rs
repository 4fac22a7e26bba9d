mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::Rng;

use seednmf::corpus::{TokenizedCorpus, Vocabulary};
use seednmf::eval::{self, Assignment};
use seednmf::solver::{self, ConstraintSpec, FactorPair, FitConfig, HUpdate, MultiplierState};
use seednmf::sparse::DocTermMatrix;
use seednmf::synth::{self, InjectionTopic, SyntheticSpec, TopicDistribution, BACKGROUND_LABEL};

use common::*;

struct Instance {
    v: DocTermMatrix,
    f: FactorPair,
    mult: MultiplierState,
    spec: ConstraintSpec,
}

/// Random problem with a constrained rectangle and random non-negative multipliers.
fn instance(seed: u64, m: usize, n: usize, k: usize) -> Instance {
    let mut r = rng(seed);
    let v = random_v(&mut r, m, n, 0.4);
    let k_mh = r.random_range(1..=k);
    let seeds: Vec<usize> = (0..n).filter(|_| r.random::<f64>() < 0.3).chain([0]).collect();
    let seedless: Vec<usize> = (0..m).filter(|_| r.random::<f64>() < 0.5).chain([m - 1]).collect();
    let spec = ConstraintSpec::new(k, k_mh, 0.05, 0.4, 0.01, seeds, seedless).unwrap();
    let mut mult = MultiplierState::zeros(&spec);
    mult.lambda.mapv_inplace(|_| if r.random::<bool>() { r.random_range(0.0..2.0) } else { 0.0 });
    for mu in &mut mult.mu {
        *mu = r.random_range(0.0..0.5);
    }
    let f = FactorPair {
        w: random_positive(&mut r, m, k),
        h: random_positive(&mut r, k, n),
    };
    Instance { v, f, mult, spec }
}

fn exact() -> FitConfig {
    FitConfig {
        epsilon: 0.0,
        ..FitConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn updates_keep_factors_nonnegative_and_finite(seed in any::<u64>(), m in 2usize..9, n in 2usize..9, k in 1usize..4) {
        let p = instance(seed, m, n, k);
        let cfg = FitConfig::default();
        let w = solver::update_w(&p.v, &p.f, &p.mult, &p.spec, &cfg).unwrap();
        let f1 = FactorPair { w, h: p.f.h.clone() };
        for rule in [HUpdate::Auto, HUpdate::Version2] {
            let (h, _) = solver::update_h(&p.v, &f1, &p.mult, &p.spec, &FitConfig { h_update: rule, ..cfg.clone() }).unwrap();
            prop_assert!(h.iter().all(|x| x.is_finite() && *x >= 0.0));
        }
        prop_assert!(f1.w.iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    /// A multiplicative step moves each entry against its Lagrangian gradient.
    #[test]
    fn updates_move_against_the_gradient(seed in any::<u64>(), m in 2usize..8, n in 2usize..8, k in 1usize..4) {
        let p = instance(seed, m, n, k);
        let cfg = exact();
        let gw = solver::lagrangian_grad_w(&p.v, &p.f, &p.mult, &p.spec, 0.0).unwrap();
        let w = solver::update_w(&p.v, &p.f, &p.mult, &p.spec, &cfg).unwrap();
        for ((idx, &g), (&old, &new)) in gw.indexed_iter().zip(p.f.w.iter().zip(w.iter())) {
            prop_assert!((new - old) * g <= 1e-12 * old.abs().max(1.0), "W{idx:?}: g={g} {old}->{new}");
        }
        let gh = solver::lagrangian_grad_h(&p.v, &p.f, &p.mult, &p.spec, 0.0).unwrap();
        if let Ok(h) = solver::update_h_v1(&p.v, &p.f, &p.mult, &p.spec, &cfg) {
            for ((idx, &g), (&old, &new)) in gh.indexed_iter().zip(p.f.h.iter().zip(h.iter())) {
                prop_assert!((new - old) * g <= 1e-12 * old.abs().max(1.0), "H{idx:?}: g={g} {old}->{new}");
            }
        }
    }

    #[test]
    fn multipliers_stay_dual_feasible(seed in any::<u64>(), m in 2usize..9, n in 2usize..9, k in 1usize..4) {
        let p = instance(seed, m, n, k);
        let g1 = solver::eval_g1(&p.f.w, &p.spec);
        let lambda = solver::update_lambda(&p.f.w, &p.mult, &p.spec);
        for (&l, &g) in lambda.iter().zip(g1.iter()) {
            prop_assert!(l >= 0.0);
            if g < 0.0 {
                prop_assert_eq!(l, 0.0);
            }
        }
        let g2 = solver::eval_g2(&p.f.h, &p.spec).unwrap();
        let mu = solver::update_mu(&p.f.h, &p.mult, &p.spec).unwrap();
        for (&u, &g) in mu.iter().zip(&g2) {
            prop_assert!(u >= 0.0);
            if g < 0.0 {
                prop_assert_eq!(u, 0.0);
            }
        }
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_exact_fits(seed in any::<u64>(), m in 1usize..8, n in 1usize..8, k in 1usize..4) {
        let mut r = rng(seed);
        let v = random_v(&mut r, m, n, 0.5);
        let f = FactorPair { w: random_positive(&mut r, m, k), h: random_positive(&mut r, k, n) };
        prop_assert!(solver::kl_divergence(&v, &f, 0.0).unwrap() >= 0.0);
        let exact_v = DocTermMatrix::from_dense(&f.w.dot(&f.h)).unwrap();
        prop_assert!(solver::kl_divergence(&exact_v, &f, 0.0).unwrap().abs() < 1e-9);
    }

    /// The unconstrained KL multiplicative rules never increase the loss.
    #[test]
    fn classical_step_is_monotone(seed in any::<u64>(), m in 2usize..10, n in 2usize..10, k in 1usize..4) {
        let mut r = rng(seed);
        let v = random_v(&mut r, m, n, 0.4);
        let mut f = FactorPair { w: random_positive(&mut r, m, k), h: random_positive(&mut r, k, n) };
        let cfg = FitConfig::default();
        let mut prev = solver::kl_divergence(&v, &f, cfg.epsilon).unwrap();
        for _ in 0..15 {
            f = solver::classical_nmf_step(&v, &f, &cfg);
            let kl = solver::kl_divergence(&v, &f, cfg.epsilon).unwrap();
            prop_assert!(kl <= prev * (1.0 + 1e-12) + 1e-12, "{prev} -> {kl}");
            prev = kl;
        }
    }

    #[test]
    fn vacuous_constraints_reduce_to_classical(seed in any::<u64>(), m in 2usize..10, n in 2usize..10, k in 1usize..4) {
        let mut r = rng(seed);
        let v = random_v(&mut r, m, n, 0.4);
        let spec = ConstraintSpec::new(k, k, 1e-9, 0.4, 0.001, vec![], (0..m).collect()).unwrap();
        let cfg = FitConfig { max_iters: 20, rel_tol: 0.0, rng_seed: seed, ..FitConfig::default() };
        let init = solver::init_factors(m, n, &spec, &cfg);
        let mut oracle = init.clone();
        for _ in 0..20 {
            oracle = solver::classical_nmf_step(&v, &oracle, &cfg);
        }
        let out = solver::fit_from(&v, &spec, &cfg, init, |_| {}).unwrap();
        prop_assert!(max_rel_diff(&out.factors.w, &oracle.w) <= 1e-10);
        prop_assert!(max_rel_diff(&out.factors.h, &oracle.h) <= 1e-10);
    }

    #[test]
    fn purity_and_nmi_are_bounded_and_label_invariant(
        seed in any::<u64>(), m in 1usize..30, k in 1usize..6, shift in 0usize..6,
    ) {
        let mut r = rng(seed);
        let topic_of_doc: Vec<usize> = (0..m).map(|_| r.random_range(0..k)).collect();
        let labels: Vec<i64> = (0..m).map(|_| r.random_range(-1..5)).collect();
        let a = Assignment { topic_of_doc: topic_of_doc.clone(), degenerate: vec![] };
        let relabeled = Assignment { topic_of_doc: topic_of_doc.iter().map(|&t| (t + shift) % k).collect(), degenerate: vec![] };
        let p = eval::minority_purity(&a, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert_eq!(p, eval::minority_purity(&relabeled, &labels).unwrap());
        let x = eval::nmi(&a, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert!((x - eval::nmi(&relabeled, &labels).unwrap()).abs() < 1e-12);
        let t: Vec<i64> = topic_of_doc.iter().map(|&v| v as i64).collect();
        prop_assert!((eval::nmi_labels(&labels, &t).unwrap() - eval::nmi_labels(&t, &labels).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn jsd_is_a_bounded_symmetric_divergence(raw_p in prop::collection::vec(0.0f64..1.0, 1..12), seed in any::<u64>()) {
        let mut r = rng(seed);
        let raw_q: Vec<f64> = raw_p.iter().map(|_| r.random_range(0.0..1.0)).collect();
        let norm = |v: &[f64]| {
            let s: f64 = v.iter().sum();
            if s == 0.0 { vec![1.0 / v.len() as f64; v.len()] } else { v.iter().map(|x| x / s).collect::<Vec<_>>() }
        };
        let (p, q) = (norm(&raw_p), norm(&raw_q));
        let d = eval::jensen_shannon(&p, &q);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - eval::jensen_shannon(&q, &p)).abs() < 1e-12);
        prop_assert!(eval::jensen_shannon(&p, &p) < 1e-12);
    }

    /// Adding a learned topic can only lower each truth topic's best match.
    #[test]
    fn min_jsd_does_not_grow_with_more_topics(seed in any::<u64>(), k in 1usize..5) {
        let mut r = rng(seed);
        let terms: Vec<String> = (0..8).map(|j| format!("t{j}")).collect();
        let vocab = Vocabulary::from_terms(terms.iter().cloned());
        let truth: Vec<TopicDistribution> = (0..3)
            .map(|t| TopicDistribution {
                name: format!("truth{t}"),
                words: terms[t * 2..t * 2 + 3].iter().map(|w| (w.clone(), 1.0 / 3.0)).collect(),
            })
            .collect();
        let h = random_positive(&mut r, k + 1, 8);
        let fewer = h.slice(ndarray::s![..k, ..]).to_owned();
        let a = eval::topic_jsd(&fewer, &vocab, &truth).unwrap();
        let b = eval::topic_jsd(&h, &vocab, &truth).unwrap();
        for (x, y) in a.per_topic.iter().zip(&b.per_topic) {
            prop_assert!(y <= x);
        }
    }

    #[test]
    fn top_terms_match_a_full_sort(seed in any::<u64>(), k in 1usize..4, n in 1usize..12, top in 0usize..15) {
        let mut r = rng(seed);
        // coarse values so ties occur
        let h = Array2::from_shape_fn((k, n), |_| r.random_range(0..4) as f64);
        let got = eval::top_terms(&h, top);
        for (t, row) in got.iter().enumerate() {
            let mut all: Vec<(f64, usize)> = (0..n).map(|j| (-h[[t, j]], j)).collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let want: Vec<usize> = all.into_iter().take(top.min(n)).map(|(_, j)| j).collect();
            prop_assert_eq!(row, &want);
        }
    }

    #[test]
    fn generator_labels_match_injections(seed in any::<u64>(), p in 0.0f64..=1.0, n_words in 1usize..4) {
        let background = TokenizedCorpus::new((0..60).map(|i| vec![format!("w{}", i % 7), format!("x{i}")]).collect());
        let topics: Vec<InjectionTopic> = (0..3)
            .map(|t| InjectionTopic { name: format!("T{t}"), words: (0..5).map(|j| format!("topic{t}_{j}")).collect() })
            .collect();
        let spec = SyntheticSpec { topics, n_docs: 40, p_inject: p, n_words_per_injection: n_words, rng_seed: seed };
        let (corpus, truth) = synth::generate(&background, &spec).unwrap();
        let ids = corpus.source_ids.as_ref().unwrap();
        for ((doc, &label), id) in corpus.docs.iter().zip(&truth.labels).zip(ids) {
            let original = &background.docs[id.parse::<usize>().unwrap()];
            let injected: Vec<&String> = doc.iter().filter(|w| w.starts_with("topic")).collect();
            if label == BACKGROUND_LABEL {
                prop_assert!(injected.is_empty());
                prop_assert_eq!(doc, original);
            } else {
                let prefix = format!("topic{label}_");
                prop_assert_eq!(injected.len(), n_words);
                prop_assert!(injected.iter().all(|w| w.starts_with(&prefix)));
                let distinct: std::collections::BTreeSet<_> = injected.iter().collect();
                prop_assert_eq!(distinct.len(), n_words);
                let rest: Vec<&String> = doc.iter().filter(|w| !w.starts_with("topic")).collect();
                prop_assert_eq!(rest, original.iter().collect::<Vec<_>>());
            }
        }
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), 40);
    }

    #[test]
    fn coordinate_text_round_trips(seed in any::<u64>(), m in 1usize..8, n in 1usize..8) {
        let mut r = rng(seed);
        let v = random_v(&mut r, m, n, 0.3);
        let back = DocTermMatrix::from_coordinate_text(&v.to_coordinate_text()).unwrap();
        prop_assert_eq!(back.to_dense(), v.to_dense());
    }
}
