//! Photon-arrival-time histogram model: an exponentially modified
//! Gaussian (detector latency and jitter convolved with the exponential
//! decay of the emitter), fitted by maximum likelihood.

use crate::error::{Error, Result};
use crate::numeric::{ln_erfc, nelder_mead};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

/// Arrival-time distribution parameters. Times are in seconds.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HistogramModel {
    /// Gaussian mean: trigger-to-detector latency.
    pub latency_s: f64,
    /// Gaussian width: combined timing jitter.
    pub jitter_sigma_s: f64,
    /// Exponential 1/e decay time of the emission.
    pub decay_tau_s: f64,
    /// Display scale for binned counts; the density itself is normalized.
    pub amplitude: f64,
    /// Acceptance window (start, end).
    pub window_s: (f64, f64),
}

impl HistogramModel {
    pub fn validate(&self) -> Result<()> {
        if self.jitter_sigma_s <= 0.0 || self.decay_tau_s <= 0.0 {
            return Err(Error::InvalidParameter(
                "sigma and tau must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Log-density of the exponentially modified Gaussian at `t`, stable for
/// arguments many decades into either tail.
fn emg_log_pdf(t: f64, mu: f64, sigma: f64, tau: f64) -> f64 {
    let lambda = 1.0 / tau;
    let z = (mu + lambda * sigma * sigma - t) / (std::f64::consts::SQRT_2 * sigma);
    (lambda / 2.0).ln()
        + (lambda / 2.0) * (2.0 * mu + lambda * sigma * sigma - 2.0 * t)
        + ln_erfc(z)
}

/// Probability density of the arrival-time model at `t`.
pub fn histogram_pdf(model: &HistogramModel, t: f64) -> f64 {
    emg_log_pdf(t, model.latency_s, model.jitter_sigma_s, model.decay_tau_s).exp()
}

/// Draw arrival times: Gaussian latency/jitter plus exponential decay.
pub fn sample_histogram(model: &HistogramModel, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(model.latency_s, model.jitter_sigma_s).expect("valid sigma");
    let exp = Exp::new(1.0 / model.decay_tau_s).expect("valid tau");
    (0..n)
        .map(|_| normal.sample(&mut rng) + exp.sample(&mut rng))
        .collect()
}

/// Maximum-likelihood fit result with parameter standard errors from the
/// observed information matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistogramFit {
    pub model: HistogramModel,
    pub stderr_latency_s: f64,
    pub stderr_sigma_s: f64,
    pub stderr_tau_s: f64,
    pub log_likelihood: f64,
    pub n_samples: usize,
    pub function_evaluations: usize,
}

/// Fit the exponentially modified Gaussian by maximum likelihood.
///
/// The samples are standardized internally, started from moment estimates
/// (the EMG skewness fixes the Gaussian/exponential split) and optimized
/// with a simplex search on (μ, ln σ, ln τ).
pub fn fit_histogram(samples: &[f64]) -> Result<HistogramFit> {
    let n = samples.len();
    if n < 10 {
        return Err(Error::DegenerateFit(format!("only {n} samples")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd <= 0.0 {
        return Err(Error::DegenerateFit("zero-variance sample".into()));
    }
    let skew = samples
        .iter()
        .map(|t| {
            let z = (t - mean) / sd;
            z * z * z
        })
        .sum::<f64>()
        / n as f64;

    // Standardized samples; all fitting happens in units of the sample sd.
    let u: Vec<f64> = samples.iter().map(|t| (t - mean) / sd).collect();

    // Moment-based start: τ³ = skew/2 (standardized), σ² = 1 − τ²,
    // μ = −τ. Clamp to keep both components alive.
    let tau0 = (skew.max(1e-3) / 2.0).cbrt().clamp(0.05, 0.95);
    let sigma0 = (1.0 - tau0 * tau0).max(1e-4).sqrt();
    let mu0 = -tau0;

    let neg_loglik = |params: &[f64]| -> f64 {
        let mu = params[0];
        let sigma = params[1].exp();
        let tau = params[2].exp();
        if !(1e-8..1e4).contains(&sigma) || !(1e-8..1e4).contains(&tau) {
            return f64::INFINITY;
        }
        -u.iter()
            .map(|&t| emg_log_pdf(t, mu, sigma, tau))
            .sum::<f64>()
    };

    let start = vec![mu0, sigma0.ln(), tau0.ln()];
    let (best, fmin, evals) = nelder_mead(&neg_loglik, &start, &[0.2, 0.3, 0.3], 2000, 1e-12);
    let (mu_u, sigma_u, tau_u) = (best[0], best[1].exp(), best[2].exp());
    if !fmin.is_finite() {
        return Err(Error::DegenerateFit("likelihood did not evaluate".into()));
    }
    if sigma_u < 1e-6 {
        return Err(Error::DegenerateFit(format!(
            "jitter width collapsed to {sigma_u} standard deviations"
        )));
    }

    // Observed information: central-difference Hessian of −logL in the
    // natural (μ, σ, τ) parameterization.
    let nll_nat = |p: &[f64]| -> f64 {
        if p[1] <= 0.0 || p[2] <= 0.0 {
            return f64::INFINITY;
        }
        -u.iter()
            .map(|&t| emg_log_pdf(t, p[0], p[1], p[2]))
            .sum::<f64>()
    };
    let theta = [mu_u, sigma_u, tau_u];
    let mut hess = [[0.0f64; 3]; 3];
    let step = [1e-4, 1e-4 * sigma_u.max(1e-3), 1e-4 * tau_u.max(1e-3)];
    let f0 = nll_nat(&theta);
    for i in 0..3 {
        for j in i..3 {
            let mut tpp = theta;
            let mut tpm = theta;
            let mut tmp = theta;
            let mut tmm = theta;
            tpp[i] += step[i];
            tpp[j] += step[j];
            tpm[i] += step[i];
            tpm[j] -= step[j];
            tmp[i] -= step[i];
            tmp[j] += step[j];
            tmm[i] -= step[i];
            tmm[j] -= step[j];
            let v = if i == j {
                let mut tp = theta;
                let mut tm = theta;
                tp[i] += step[i];
                tm[i] -= step[i];
                (nll_nat(&tp) - 2.0 * f0 + nll_nat(&tm)) / (step[i] * step[i])
            } else {
                (nll_nat(&tpp) - nll_nat(&tpm) - nll_nat(&tmp) + nll_nat(&tmm))
                    / (4.0 * step[i] * step[j])
            };
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let cov = crate::numeric::invert3(&hess)
        .ok_or_else(|| Error::DegenerateFit("singular information matrix".into()))?;
    let se = |i: usize| -> f64 {
        let v = cov[i][i];
        if v > 0.0 {
            v.sqrt()
        } else {
            f64::NAN
        }
    };

    let window = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &t| {
            (acc.0.min(t), acc.1.max(t))
        });
    Ok(HistogramFit {
        model: HistogramModel {
            latency_s: mean + mu_u * sd,
            jitter_sigma_s: sigma_u * sd,
            decay_tau_s: tau_u * sd,
            amplitude: 1.0,
            window_s: window,
        },
        stderr_latency_s: se(0) * sd,
        stderr_sigma_s: se(1) * sd,
        stderr_tau_s: se(2) * sd,
        log_likelihood: -fmin - n as f64 * sd.ln(),
        n_samples: n,
        function_evaluations: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    fn paper_model() -> HistogramModel {
        HistogramModel {
            latency_s: 20e-9,
            jitter_sigma_s: 1e-9,
            decay_tau_s: 6.936e-9,
            amplitude: 1.0,
            window_s: (0.0, 100e-9),
        }
    }

    #[test]
    fn pdf_normalizes_to_one() {
        let m = paper_model();
        // Work in nanoseconds for quadrature conditioning.
        let m_ns = HistogramModel {
            latency_s: m.latency_s * 1e9,
            jitter_sigma_s: m.jitter_sigma_s * 1e9,
            decay_tau_s: m.decay_tau_s * 1e9,
            ..m
        };
        let total = integrate(&|t: f64| histogram_pdf(&m_ns, t), -50.0, 400.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-9, "∫pdf = {total}");
    }

    #[test]
    fn sigma_to_zero_limit_is_pure_exponential() {
        let tau = 7.0;
        let m = HistogramModel {
            latency_s: 5.0,
            jitter_sigma_s: 1e-4,
            decay_tau_s: tau,
            amplitude: 1.0,
            window_s: (0.0, 100.0),
        };
        // Mean of the distribution approaches latency + τ.
        let mean = integrate(&|t: f64| t * histogram_pdf(&m, t), -10.0, 300.0, 1e-10);
        assert!((mean - (5.0 + tau)).abs() < 1e-3);
        // Density at t > latency matches the exponential.
        for &t in &[6.0, 10.0, 20.0] {
            let expect = (1.0 / tau) * (-(t - 5.0) / tau).exp();
            assert!((histogram_pdf(&m, t) - expect).abs() / expect < 1e-3);
        }
    }

    #[test]
    fn generator_recovery_within_two_standard_errors() {
        let truth = paper_model();
        let samples = sample_histogram(&truth, 100_000, 0xf17);
        let fit = fit_histogram(&samples).unwrap();
        let dev = (fit.model.decay_tau_s - truth.decay_tau_s).abs();
        assert!(
            dev <= 2.0 * fit.stderr_tau_s,
            "tau {} ± {} vs truth {}",
            fit.model.decay_tau_s,
            fit.stderr_tau_s,
            truth.decay_tau_s
        );
        let dev = (fit.model.jitter_sigma_s - truth.jitter_sigma_s).abs();
        assert!(dev <= 3.0 * fit.stderr_sigma_s);
        // Standard error of τ at 1e5 samples is a small fraction of τ.
        assert!(fit.stderr_tau_s < 0.02 * truth.decay_tau_s);
    }

    #[test]
    fn close_decay_times_give_overlapping_intervals() {
        // Fits for nearby generator τ values land within a few standard
        // errors of each other, so the link cases are only marginally
        // distinguishable at these sample sizes.
        let mut fits = Vec::new();
        for (i, tau) in [6.703e-9, 6.936e-9, 7.091e-9].into_iter().enumerate() {
            let m = HistogramModel {
                decay_tau_s: tau,
                ..paper_model()
            };
            let samples = sample_histogram(&m, 20_000, 42 + i as u64);
            fits.push(fit_histogram(&samples).unwrap());
        }
        let a = &fits[0];
        let b = &fits[2];
        let gap = (b.model.decay_tau_s - a.model.decay_tau_s).abs();
        let joint = a.stderr_tau_s.hypot(b.stderr_tau_s);
        assert!(gap < 8.0 * joint, "separation {gap} vs joint error {joint}");
    }

    #[test]
    fn tiny_sample_is_rejected() {
        assert!(matches!(
            fit_histogram(&[1.0, 2.0, 3.0]),
            Err(Error::DegenerateFit(_))
        ));
    }

    /// Repeated-seed study: the estimator's bias stays below one standard
    /// error.
    #[test]
    fn fit_is_consistent_across_seeds() {
        let truth = paper_model();
        let mut devs = Vec::new();
        let mut ses = Vec::new();
        for seed in 0..6u64 {
            let samples = sample_histogram(&truth, 20_000, 1000 + seed);
            let fit = fit_histogram(&samples).unwrap();
            devs.push(fit.model.decay_tau_s - truth.decay_tau_s);
            ses.push(fit.stderr_tau_s);
        }
        let mean_dev = devs.iter().sum::<f64>() / devs.len() as f64;
        let mean_se = ses.iter().sum::<f64>() / ses.len() as f64;
        assert!(
            mean_dev.abs() < mean_se,
            "bias {mean_dev:e} vs standard error {mean_se:e}"
        );
    }
}
