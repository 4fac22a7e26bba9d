use ndarray::Array2;

use super::init::folded_normal;
use super::{
    eval_g1, eval_g2, init_factors, kl_divergence, update_h, update_lambda, update_mu, update_w,
    ConstraintSpec, FactorPair, FitConfig, FitReport, MultiplierState,
};
use crate::error::{Error, Result};
use crate::rng;
use crate::sparse::DocTermMatrix;

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub factors: FactorPair,
    pub multipliers: MultiplierState,
    pub report: FitReport,
}

/// State handed to a fit observer after each completed iteration.
pub struct IterationView<'a> {
    /// 1-based iteration number.
    pub iteration: usize,
    pub factors: &'a FactorPair,
    pub multipliers: &'a MultiplierState,
    pub kl: f64,
}

/// Fits from the seeded initialisation.
pub fn fit(v: &DocTermMatrix, spec: &ConstraintSpec, cfg: &FitConfig) -> Result<FitOutcome> {
    fit_observed(v, spec, cfg, |_| {})
}

pub fn fit_observed(
    v: &DocTermMatrix,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
    observer: impl FnMut(&IterationView<'_>),
) -> Result<FitOutcome> {
    let init = init_factors(v.n_docs(), v.n_terms(), spec, cfg);
    fit_from(v, spec, cfg, init, observer)
}

fn ensure_finite(m: &Array2<f64>, name: &'static str, iteration: usize) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            matrix: name,
            iteration,
        })
    }
}

fn max_residual(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// Alternates W sweep, H sweep, λ ascent and μ ascent until the relative KL
/// change drops below `rel_tol` or `max_iters` is reached.
pub fn fit_from(
    v: &DocTermMatrix,
    spec: &ConstraintSpec,
    cfg: &FitConfig,
    init: FactorPair,
    mut observer: impl FnMut(&IterationView<'_>),
) -> Result<FitOutcome> {
    spec.validate()?;
    cfg.validate()?;
    spec.check_dims(v.n_docs(), v.n_terms())?;
    if init.n_topics() != spec.n_topics {
        return Err(Error::DimensionMismatch(format!(
            "initial factors have {} topics, spec has {}",
            init.n_topics(),
            spec.n_topics
        )));
    }

    let mut factors = init;
    let mut mult = MultiplierState::zeros(spec);
    let mut resample_rng = rng::stream(cfg.rng_seed, rng::RESAMPLE);
    let mut report = FitReport {
        initial_kl: kl_divergence(v, &factors, cfg.epsilon)?,
        ..FitReport::default()
    };
    let mut prev_kl = report.initial_kl;

    for iteration in 1..=cfg.max_iters {
        factors.w = update_w(v, &factors, &mult, spec, cfg)?;
        ensure_finite(&factors.w, "W", iteration)?;

        let (h, fallbacks) = update_h(v, &factors, &mult, spec, cfg)?;
        factors.h = h;
        ensure_finite(&factors.h, "H", iteration)?;
        report.v2_fallback_cells += fallbacks;

        let n = factors.h.ncols();
        for k in 0..factors.h.nrows() {
            if factors.h.row(k).sum() <= 0.0 {
                log::warn!("topic {k} collapsed to a zero row at iteration {iteration}; resampling");
                let fresh = folded_normal(1, n, cfg.epsilon, &mut resample_rng);
                factors.h.row_mut(k).assign(&fresh.row(0));
                report.degenerate_row_resets += 1;
            }
        }

        mult.lambda = update_lambda(&factors.w, &mult, spec);
        mult.mu = update_mu(&factors.h, &mult, spec)?;

        let kl = kl_divergence(v, &factors, cfg.epsilon)?;
        if !kl.is_finite() {
            return Err(Error::NonFinite {
                matrix: "D_KL",
                iteration,
            });
        }
        let g1 = eval_g1(&factors.w, spec);
        let g2 = eval_g2(&factors.h, spec)?;
        report.kl_trace.push(kl);
        report.g1_residual_trace.push(max_residual(g1.iter().copied()));
        report.g2_residual_trace.push(max_residual(g2.into_iter()));
        report.active_lambda_trace.push(mult.active_lambda());
        report.active_mu_trace.push(mult.active_mu());
        report.iterations_run = iteration;

        observer(&IterationView {
            iteration,
            factors: &factors,
            multipliers: &mult,
            kl,
        });

        let change = (prev_kl - kl).abs() / kl.max(cfg.epsilon);
        prev_kl = kl;
        if change < cfg.rel_tol {
            report.converged = true;
            break;
        }
    }

    Ok(FitOutcome {
        factors,
        multipliers: mult,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{classical_nmf_step, HUpdate};
    use ndarray::array;

    fn random_v(m: usize, n: usize, seed: u64) -> DocTermMatrix {
        use rand::Rng;
        let mut r = rng::stream(seed, "test");
        let d = Array2::from_shape_fn((m, n), |_| {
            if r.random::<f64>() < 0.4 {
                r.random::<f64>()
            } else {
                0.0
            }
        });
        DocTermMatrix::from_dense(&d).unwrap()
    }

    #[test]
    fn traces_have_iteration_length() {
        let v = random_v(10, 8, 1);
        let spec = ConstraintSpec::new(3, 1, 1e-3, 0.4, 1e-3, vec![0, 1], vec![]).unwrap();
        let cfg = FitConfig {
            max_iters: 30,
            rel_tol: 0.0,
            rng_seed: 5,
            ..FitConfig::default()
        };
        let out = fit(&v, &spec, &cfg).unwrap();
        let r = &out.report;
        assert_eq!(r.iterations_run, 30);
        assert!(!r.converged);
        for len in [
            r.kl_trace.len(),
            r.g1_residual_trace.len(),
            r.g2_residual_trace.len(),
            r.active_lambda_trace.len(),
            r.active_mu_trace.len(),
        ] {
            assert_eq!(len, 30);
        }
    }

    #[test]
    fn stops_on_relative_change() {
        let v = random_v(12, 9, 2);
        let spec = ConstraintSpec::classical(2);
        let cfg = FitConfig {
            max_iters: 5000,
            rel_tol: 1e-6,
            ..FitConfig::default()
        };
        let out = fit(&v, &spec, &cfg).unwrap();
        assert!(out.report.converged);
        assert!(out.report.iterations_run < 5000);
    }

    #[test]
    fn vacuous_spec_matches_classical_sweeps() {
        let v = random_v(15, 11, 3);
        let spec = ConstraintSpec::new(4, 2, 1e-9, 0.4, 1e-3, vec![], (0..15).collect()).unwrap();
        assert!(spec.is_vacuous());
        let cfg = FitConfig {
            max_iters: 40,
            rel_tol: 0.0,
            rng_seed: 9,
            ..FitConfig::default()
        };
        let out = fit(&v, &spec, &cfg).unwrap();
        let mut f = init_factors(15, 11, &spec, &cfg);
        for _ in 0..40 {
            f = classical_nmf_step(&v, &f, &cfg);
        }
        for (a, b) in out.factors.w.iter().chain(out.factors.h.iter()).zip(f.w.iter().chain(f.h.iter())) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn identical_runs_are_bitwise_equal() {
        let v = random_v(20, 14, 4);
        let spec = ConstraintSpec::new(3, 1, 1e-6, 0.4, 1e-3, vec![2, 5], vec![0, 3, 7]).unwrap();
        let cfg = FitConfig {
            max_iters: 25,
            rel_tol: 0.0,
            h_update: HUpdate::Auto,
            rng_seed: 17,
            ..FitConfig::default()
        };
        let a = fit(&v, &spec, &cfg).unwrap();
        let b = fit(&v, &spec, &cfg).unwrap();
        assert_eq!(a.factors, b.factors);
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn observer_sees_every_iteration() {
        let v = random_v(6, 5, 6);
        let spec = ConstraintSpec::classical(2);
        let cfg = FitConfig {
            max_iters: 7,
            rel_tol: 0.0,
            ..FitConfig::default()
        };
        let mut seen = Vec::new();
        fit_observed(&v, &spec, &cfg, |it| seen.push(it.iteration)).unwrap();
        assert_eq!(seen, (1..=7).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_mismatched_spec() {
        let v = DocTermMatrix::from_dense(&array![[1.0, 0.0]]).unwrap();
        let spec = ConstraintSpec::new(1, 1, 0.0, 0.4, 1e-3, vec![5], vec![]).unwrap();
        assert!(matches!(
            fit(&v, &spec, &FitConfig::default()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
