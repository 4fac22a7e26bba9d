//! Constrained vs classical fits on ten benchmark draws for one multiplier step size.
//!
//! `cargo run --release --example eta_sweep -- 0.001`

use seednmf::corpus::{build_tfidf, build_vocabulary, find_seedless_docs, resolve_seeds};
use seednmf::eval;
use seednmf::solver::{fit, ConstraintSpec, FitConfig};
use seednmf::synth::{bundled_background, default_spec, generate, SyntheticSpec};

fn main() -> anyhow::Result<()> {
    let eta: f64 = std::env::args().nth(1).unwrap_or_else(|| "0.001".into()).parse()?;
    let (mut wins, mut g2_ok) = (0, 0);
    let (mut pc, mut pn, mut nc, mut nn, mut worst_g1) = (0.0, 0.0, 0.0, 0.0, 0.0f64);
    for draw in 0..10u64 {
        let spec = SyntheticSpec {
            rng_seed: 1000 + draw,
            ..default_spec()
        };
        let (corpus, truth) = generate(&bundled_background(), &spec)?;
        let vocab = build_vocabulary(&corpus, 0.0, 1.0)?;
        let v = build_tfidf(&corpus, &vocab)?;
        let seeds = resolve_seeds(&spec.all_words(), &vocab)?;
        let seedless = find_seedless_docs(&v, &seeds)?;
        let cs = ConstraintSpec::new(20, 7, 1e-9, 0.4, eta, seeds.indices, seedless.indices)?;
        let cfg = FitConfig {
            rng_seed: draw,
            ..FitConfig::default()
        };
        let con = fit(&v, &cs, &cfg)?;
        let cla = fit(&v, &ConstraintSpec::classical(20), &cfg)?;
        let a = eval::score(&con.factors.w, &con.factors.h, &vocab, &truth.labels, &truth.topic_word_dists)?;
        let b = eval::score(&cla.factors.w, &cla.factors.h, &vocab, &truth.labels, &truth.topic_word_dists)?;
        if a.purity > b.purity {
            wins += 1;
        }
        pc += a.purity / 10.0;
        pn += b.purity / 10.0;
        nc += a.nmi / 10.0;
        nn += b.nmi / 10.0;
        let r = &con.report;
        worst_g1 = worst_g1.max(*r.g1_residual_trace.last().unwrap());
        let g2 = &r.g2_residual_trace;
        let n = g2.len();
        if g2[n - 50..].windows(2).all(|p| p[1] <= p[0]) && g2[n - 1] < g2[19] {
            g2_ok += 1;
        }
    }
    println!(
        "eta {eta}: purity {pc:.4} vs classical {pn:.4}, NMI {nc:.4} vs {nn:.4}, \
         purity wins {wins}/10, worst terminal g1 {worst_g1:.2e}, g2 tail ok {g2_ok}/10"
    );
    Ok(())
}
