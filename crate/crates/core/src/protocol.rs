//! Discrete-event Monte Carlo of the node sequence (setup cooling, memory
//! storage with a midpoint spin echo, heralded entangling attempts with
//! periodic intermediate cooling, readout at 2τ) and of the two-link
//! entanglement-swapping protocol, plus the analytic swap performance
//! curves.
//!
//! Every trial draws from its own counter-based RNG stream derived from
//! (seed, trial index), so serial and parallel runs are bit-identical and
//! results do not depend on the worker count.

use crate::budget::NodeConfig;
use crate::error::{Error, Result};
use crate::herald::direct_herald;
use crate::noise::{self, NoiseParams};
use crate::numeric::{erfcx, integrate};
use crate::quantum::bell_fidelity;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Geometric attempt count (k ≥ 1) at per-attempt success probability `p`.
fn sample_attempts(p: f64, rng: &mut ChaCha8Rng) -> u64 {
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.random();
    let k = ((1.0 - u).ln() / (1.0 - p).ln()).ceil();
    k.max(1.0) as u64
}

/// Wall-clock time consumed by `k` attempts with intermediate cooling.
fn attempt_time(k: u64, period_s: f64, cooling_every: u64, cooling_time_s: f64) -> f64 {
    let blocks = k.checked_div(cooling_every).unwrap_or(0);
    k as f64 * period_s + blocks as f64 * cooling_time_s
}

/// Largest number of attempts whose wall-clock time fits in `window_s`.
fn attempts_fitting(window_s: f64, period_s: f64, cooling_every: u64, cooling_time_s: f64) -> u64 {
    if window_s <= 0.0 || period_s <= 0.0 {
        return 0;
    }
    let mut k = (window_s / period_s).floor() as u64;
    // Cooling only removes attempts; a couple of refinements settle it.
    for _ in 0..64 {
        let blocks = k.checked_div(cooling_every).unwrap_or(0);
        let k2 = ((window_s - blocks as f64 * cooling_time_s) / period_s)
            .floor()
            .max(0.0) as u64;
        if k2 == k {
            break;
        }
        k = k2;
    }
    while attempt_time(k + 1, period_s, cooling_every, cooling_time_s) <= window_s {
        k += 1;
    }
    while k > 0 && attempt_time(k, period_s, cooling_every, cooling_time_s) > window_s {
        k -= 1;
    }
    k
}

/// Draw the waiting time until the first herald: a geometric attempt
/// count at probability `p_per_attempt`, with a cooling pause inserted
/// every `cooling_every` attempts.
pub fn waiting_time_sampler(
    p_per_attempt: f64,
    attempt_period_s: f64,
    cooling_every: u64,
    cooling_time_s: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    assert!(p_per_attempt > 0.0 && p_per_attempt <= 1.0);
    let k = sample_attempts(p_per_attempt, rng);
    attempt_time(k, attempt_period_s, cooling_every, cooling_time_s)
}

/// Outcome of one protocol sequence (one storage window of 2τ).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sequence_index: u64,
    /// Attempts consumed inside the storage window.
    pub attempt_index: u64,
    pub heralded: bool,
    /// Herald time from sequence start (setup included).
    pub herald_time_s: Option<f64>,
    /// Completed cooling blocks before the herald.
    pub block_index: u64,
    /// Memory storage time at readout (2τ).
    pub memory_elapsed_s: f64,
    pub decayed: bool,
    pub detector_pattern: String,
    pub ion_photon_fidelity: Option<f64>,
    pub memory_fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub n_sequences: u64,
    pub total_attempts: u64,
    pub herald_count: u64,
    pub decay_count: u64,
    pub herald_fraction: f64,
    pub decay_fraction: f64,
    /// Heralds per second of attempting time.
    pub herald_rate_hz: f64,
    pub analytic_herald_rate_hz: f64,
    pub analytic_decay_fraction: f64,
    pub mean_ion_photon_fidelity: Option<f64>,
    pub mean_memory_fidelity: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct NodeRun {
    pub records: Vec<TrialRecord>,
    pub summary: RunSummary,
}

/// Simulate `n_sequences` protocol sequences. Deterministic for a given
/// seed regardless of the rayon worker count; records are returned in
/// sequence order.
pub fn run_node_sequence(
    config: &NodeConfig,
    noise_params: &NoiseParams,
    seed: u64,
    n_sequences: u64,
) -> Result<NodeRun> {
    config.validate()?;
    noise_params.validate()?;
    let window = 2.0 * config.storage_tau_s;
    if window < config.op_overhead_s {
        return Err(Error::InconsistentTiming(format!(
            "storage window 2τ = {} s is shorter than the {} s setup",
            window, config.op_overhead_s
        )));
    }
    let (p, post) = direct_herald(config, noise_params)?;
    if p <= 0.0 {
        return Err(Error::InvalidParameter(
            "per-attempt success probability is zero".into(),
        ));
    }
    let ion_photon_fid = bell_fidelity(&post)?;
    let memory_fid = noise::memory_fidelity(window, noise_params.t2_s, &noise_params.modulation);
    let p_decay = 1.0 - noise::metastable_decay(window, noise_params.t1_prime_s);
    let period = 1.0 / config.attempt_rate_hz;
    let n_cool = config.cooling_period_attempts;
    let t_cool = config.cooling_time_s;
    let k_max = attempts_fitting(window, period, n_cool, t_cool);
    if k_max == 0 {
        return Err(Error::InconsistentTiming(
            "storage window admits no entangling attempts".into(),
        ));
    }

    let records: Vec<TrialRecord> = (0..n_sequences)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let k = sample_attempts(p, &mut rng);
            let decayed = rng.random::<f64>() < p_decay;
            let heralded = k <= k_max;
            let attempts = k.min(k_max);
            let wait = attempt_time(attempts, period, n_cool, t_cool);
            let blocks = attempts.checked_div(n_cool).unwrap_or(0);
            TrialRecord {
                sequence_index: i,
                attempt_index: attempts,
                heralded,
                herald_time_s: heralded.then_some(config.op_overhead_s + wait),
                block_index: blocks,
                memory_elapsed_s: window,
                decayed,
                detector_pattern: if heralded { "click" } else { "none" }.to_string(),
                ion_photon_fidelity: (heralded && !decayed).then_some(ion_photon_fid),
                memory_fidelity: (!decayed).then_some(memory_fid),
            }
        })
        .collect();

    let herald_count = records.iter().filter(|r| r.heralded).count() as u64;
    let decay_count = records.iter().filter(|r| r.decayed).count() as u64;
    let total_attempts: u64 = records.iter().map(|r| r.attempt_index).sum();
    let attempting_time: f64 = records
        .iter()
        .map(|r| attempt_time(r.attempt_index, period, n_cool, t_cool))
        .sum();
    let mean_of = |f: &dyn Fn(&TrialRecord) -> Option<f64>| {
        let vals: Vec<f64> = records.iter().filter_map(f).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    let summary = RunSummary {
        seed,
        n_sequences,
        total_attempts,
        herald_count,
        decay_count,
        herald_fraction: herald_count as f64 / n_sequences.max(1) as f64,
        decay_fraction: decay_count as f64 / n_sequences.max(1) as f64,
        herald_rate_hz: if attempting_time > 0.0 {
            herald_count as f64 / attempting_time
        } else {
            0.0
        },
        analytic_herald_rate_hz: p / (period + t_cool / n_cool.max(1) as f64),
        analytic_decay_fraction: p_decay,
        mean_ion_photon_fidelity: mean_of(&|r| r.ion_photon_fidelity),
        mean_memory_fidelity: mean_of(&|r| r.memory_fidelity),
    };
    Ok(NodeRun { records, summary })
}

/// [`run_node_sequence`] on a dedicated pool with a fixed worker count.
/// Exists for determinism demonstrations; the records are identical for
/// any worker count.
pub fn run_node_sequence_with_workers(
    config: &NodeConfig,
    noise_params: &NoiseParams,
    seed: u64,
    n_sequences: u64,
    workers: usize,
) -> Result<NodeRun> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(e.to_string()))?;
    pool.install(|| run_node_sequence(config, noise_params, seed, n_sequences))
}

/// Render trial records as CSV; shared by the CLI and the byte-stability
/// checks.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 64 + 128);
    out.push_str(
        "sequence_index,attempt_index,heralded,herald_time_s,block_index,memory_elapsed_s,\
         decayed,detector_pattern,ion_photon_fidelity,memory_fidelity\n",
    );
    for r in records {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.sequence_index,
            r.attempt_index,
            r.heralded,
            opt(r.herald_time_s),
            r.block_index,
            r.memory_elapsed_s,
            r.decayed,
            r.detector_pattern,
            opt(r.ion_photon_fidelity),
            opt(r.memory_fidelity),
        ));
    }
    out
}

/// One memory-enhanced swap trial: link 1 is already heralded, link 2 is
/// awaited.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapResult {
    pub trial_index: u64,
    pub waiting_time_s: f64,
    pub success: bool,
    /// Reported only on success.
    pub photon_photon_fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapSummary {
    pub seed: u64,
    pub n_trials: u64,
    pub success_fraction: f64,
    pub mean_fidelity_on_success: Option<f64>,
    pub analytic_success: f64,
    pub analytic_fidelity_conditioned: f64,
}

#[derive(Clone, Debug)]
pub struct SwapRun {
    pub results: Vec<SwapResult>,
    pub summary: SwapSummary,
}

/// Simulate the two-link swap: ion 1 holds link 1 while node `config_b`
/// attempts link 2; decay of the held memory discards the trial (it is
/// caught by state detection before the swap), dephasing degrades the
/// swapped photon-photon pair. Gates and detection are ideal.
pub fn swap_experiment(
    config_a: &NodeConfig,
    config_b: &NodeConfig,
    noise_params: &NoiseParams,
    seed: u64,
    n_trials: u64,
) -> Result<SwapRun> {
    config_a.validate()?;
    config_b.validate()?;
    noise_params.validate()?;
    let p = config_b.per_attempt_probability();
    if p <= 0.0 {
        return Err(Error::InvalidParameter(
            "link-2 success probability is zero".into(),
        ));
    }
    let period = 1.0 / config_b.attempt_rate_hz;
    let n_cool = config_b.cooling_period_attempts;
    let t_cool = config_b.cooling_time_s;
    let t1 = noise_params.t1_prime_s;
    let t2 = noise_params.t2_s;

    let results: Vec<SwapResult> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let wait = waiting_time_sampler(p, period, n_cool, t_cool, &mut rng);
            let survived = rng.random::<f64>() < (-wait / t1).exp();
            let fidelity = survived.then(|| 0.5 * (1.0 + (-(wait / t2) * (wait / t2)).exp()));
            SwapResult {
                trial_index: i,
                waiting_time_s: wait,
                success: survived,
                photon_photon_fidelity: fidelity,
            }
        })
        .collect();

    let successes: Vec<&SwapResult> = results.iter().filter(|r| r.success).collect();
    let rate = p / (period + t_cool / n_cool.max(1) as f64);
    let summary = SwapSummary {
        seed,
        n_trials,
        success_fraction: successes.len() as f64 / n_trials.max(1) as f64,
        mean_fidelity_on_success: if successes.is_empty() {
            None
        } else {
            Some(
                successes
                    .iter()
                    .filter_map(|r| r.photon_photon_fidelity)
                    .sum::<f64>()
                    / successes.len() as f64,
            )
        },
        analytic_success: swap_success_analytic(rate, t1),
        analytic_fidelity_conditioned: swap_fidelity_analytic(rate, t1, t2, true),
    };
    Ok(SwapRun { results, summary })
}

/// Probability that the held memory survives until link 2 heralds:
/// R/(R + 1/T1').
pub fn swap_success_analytic(rate_hz: f64, t1_prime_s: f64) -> f64 {
    rate_hz / (rate_hz + 1.0 / t1_prime_s)
}

/// ∫₀^∞ e^{−a·t} e^{−(t/t2)²} dt by adaptive quadrature.
fn survival_weighted_coherence(a: f64, t2: f64) -> f64 {
    let tmax = (40.0 / a).min(7.0 * t2);
    integrate(
        &|t: f64| (-a * t - (t / t2) * (t / t2)).exp(),
        0.0,
        tmax,
        1e-12,
    )
}

/// Closed form of the same integral, (√π·t2/2)·erfcx(a·t2/2); the dual
/// route used to validate the quadrature.
pub fn survival_weighted_coherence_closed(a: f64, t2: f64) -> f64 {
    0.5 * std::f64::consts::PI.sqrt() * t2 * erfcx(0.5 * a * t2)
}

/// Swapped-pair fidelity versus link-2 generation rate.
///
/// Default (`conditioned = false`): heralded trials that lost the memory
/// count as fully dephased, F = ½(1 + R·∫ e^{−(R+1/T1')t} e^{−(t/T2)²} dt).
/// With `conditioned = true` the expectation runs over decay-free trials
/// only (the statistic reported by `swap_experiment` successes).
pub fn swap_fidelity_analytic(rate_hz: f64, t1_prime_s: f64, t2_s: f64, conditioned: bool) -> f64 {
    let a = rate_hz + 1.0 / t1_prime_s;
    let integral = survival_weighted_coherence(a, t2_s);
    let weighted = if conditioned {
        a * integral
    } else {
        rate_hz * integral
    };
    0.5 * (1.0 + weighted)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwapCurvePoint {
    pub rate_hz: f64,
    pub success_analytic: f64,
    pub fidelity_analytic: f64,
    pub success_mc: f64,
    pub fidelity_mc: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SwapCurveOptions {
    /// Condition the fidelity column on decay-free trials.
    pub conditioned: bool,
    pub mc_trials: u64,
    pub seed: u64,
}

impl Default for SwapCurveOptions {
    fn default() -> Self {
        Self {
            conditioned: false,
            mc_trials: 20_000,
            seed: 1,
        }
    }
}

/// Analytic success/fidelity curves versus link generation rate with a
/// Monte Carlo cross-check column. The Monte Carlo column samples the
/// discrete attempt process at a fine cadence (p = 0.01 per attempt).
pub fn swap_curve(
    rates_hz: &[f64],
    t1_prime_s: f64,
    t2_s: f64,
    opts: SwapCurveOptions,
) -> Result<Vec<SwapCurvePoint>> {
    if t1_prime_s <= 0.0 || t2_s <= 0.0 {
        return Err(Error::InvalidParameter("T1'/T2 must be positive".into()));
    }
    if rates_hz.iter().any(|&r| r <= 0.0) {
        return Err(Error::InvalidParameter("rates must be positive".into()));
    }
    let points: Vec<SwapCurvePoint> = rates_hz
        .par_iter()
        .enumerate()
        .map(|(idx, &rate)| {
            let p = 0.01;
            let period = p / rate;
            let mut survived_coh_sum = 0.0;
            let mut survived_count = 0u64;
            let mut coh_on_success = 0.0;
            for t in 0..opts.mc_trials {
                let mut rng = stream_rng(opts.seed ^ ((idx as u64) << 32), t);
                let wait = waiting_time_sampler(p, period, 0, 0.0, &mut rng);
                let survived = rng.random::<f64>() < (-wait / t1_prime_s).exp();
                if survived {
                    let coh = (-(wait / t2_s) * (wait / t2_s)).exp();
                    survived_count += 1;
                    coh_on_success += coh;
                }
            }
            // Decayed trials contribute zero coherence in the default
            // (survival-weighted) column.
            survived_coh_sum += coh_on_success;
            let n = opts.mc_trials.max(1) as f64;
            let fidelity_mc = if opts.conditioned {
                if survived_count > 0 {
                    0.5 * (1.0 + coh_on_success / survived_count as f64)
                } else {
                    0.5
                }
            } else {
                0.5 * (1.0 + survived_coh_sum / n)
            };
            SwapCurvePoint {
                rate_hz: rate,
                success_analytic: swap_success_analytic(rate, t1_prime_s),
                fidelity_analytic: swap_fidelity_analytic(rate, t1_prime_s, t2_s, opts.conditioned),
                success_mc: survived_count as f64 / n,
                fidelity_mc,
            }
        })
        .collect();
    Ok(points)
}

/// `n` log-spaced values from `start` to `end` inclusive.
pub fn log_spaced(start: f64, end: f64, n: usize) -> Vec<f64> {
    assert!(start > 0.0 && end > start && n >= 2);
    let (a, b) = (start.ln(), end.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
