//! Parametric noise models for the memory and communication qubits:
//! metastable decay, Gaussian dephasing, AC-line phase modulation,
//! noise-herald mixing and transfer-pulse depolarization.

use crate::error::{Error, Result};
use crate::quantum::QuantumState;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// One sinusoidal phase-modulation tone.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ModTone {
    pub freq_hz: f64,
    pub amplitude_rad: f64,
    pub phase_rad: f64,
}

/// Measured noise figures for one node.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NoiseParams {
    /// Measured metastable lifetime in seconds (includes beam leakage).
    pub t1_prime_s: f64,
    /// Gaussian 1/e dephasing time in seconds, echo-inclusive.
    pub t2_s: f64,
    /// AC-line phase modulation tones; amplitudes default to zero because
    /// only the tone frequencies are known a priori.
    #[serde(default)]
    pub modulation: Vec<ModTone>,
    /// Signal-to-noise ratio of the heralding photon.
    pub snr: f64,
    /// Average state fidelity per transfer π-pulse over six MUB states.
    pub raman_pi_fidelity: f64,
    /// Fidelity of the merge pulse.
    pub merge_fidelity: f64,
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if self.t1_prime_s <= 0.0 || self.t2_s <= 0.0 {
            return Err(Error::InvalidParameter("T1'/T2 must be positive".into()));
        }
        if self.snr < 0.0 {
            return Err(Error::InvalidParameter("snr must be non-negative".into()));
        }
        for (name, f) in [
            ("raman_pi_fidelity", self.raman_pi_fidelity),
            ("merge_fidelity", self.merge_fidelity),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!("{name} outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Survival probability of the metastable level after time `t`. The
/// protocol layer treats the complement as a heralded erasure: decay is
/// detected at readout and the trial discarded.
pub fn metastable_decay(t: f64, t1_prime: f64) -> f64 {
    assert!(t >= 0.0 && t1_prime > 0.0);
    (-t / t1_prime).exp()
}

/// Deterministic AC-line phase at time `t`: Σ Aᵢ sin(2π fᵢ t + φᵢ).
pub fn ac_line_phase(t: f64, modulation: &[ModTone]) -> f64 {
    modulation
        .iter()
        .map(|m| m.amplitude_rad * (2.0 * std::f64::consts::PI * m.freq_hz * t + m.phase_rad).sin())
        .sum()
}

/// Memory coherence after storage time `t`: Gaussian envelope times the
/// cosine of the accumulated modulation phase.
pub fn memory_coherence(t: f64, t2: f64, modulation: &[ModTone]) -> f64 {
    (-(t / t2) * (t / t2)).exp() * ac_line_phase(t, modulation).cos()
}

/// Storage fidelity of a superposition state, F(t) = (1 + coherence)/2.
pub fn memory_fidelity(t: f64, t2: f64, modulation: &[ModTone]) -> f64 {
    0.5 * (1.0 + memory_coherence(t, t2, modulation))
}

/// Scale the off-diagonal blocks of one qubit by exp(−(t/t2)²).
pub fn gaussian_dephasing(
    state: &QuantumState,
    t: f64,
    t2: f64,
    target: usize,
) -> Result<QuantumState> {
    if target >= state.dims().len() || state.dims()[target] != 2 {
        return Err(Error::NotAQubit {
            index: target,
            dim: state.dims().get(target).copied().unwrap_or(0),
        });
    }
    if t < 0.0 || t2 <= 0.0 {
        return Err(Error::InvalidParameter(
            "dephasing needs t ≥ 0, t2 > 0".into(),
        ));
    }
    let factor = (-(t / t2) * (t / t2)).exp();
    if (factor - 1.0).abs() < f64::EPSILON {
        return Ok(state.clone());
    }
    let dims = state.dims().to_vec();
    let d: usize = dims.iter().product();
    let mut rho = state.density_matrix();
    let stride: usize = dims[target + 1..].iter().product();
    let digit = |idx: usize| (idx / stride) % dims[target];
    for i in 0..d {
        for j in 0..d {
            if digit(i) != digit(j) {
                rho[(i, j)] *= factor;
            }
        }
    }
    QuantumState::density(dims, state.labels().to_vec(), rho)
}

/// Mix the state with the maximally mixed state to model heralds caused by
/// noise photons or dark counts: ρ → (snr·ρ + I/d)/(snr + 1).
pub fn snr_mixture(state: &QuantumState, snr: f64) -> Result<QuantumState> {
    if snr < 0.0 {
        return Err(Error::InvalidParameter("snr must be non-negative".into()));
    }
    let d = state.dim();
    let w = snr / (snr + 1.0);
    let rho = state.density_matrix();
    let mut out = rho.mapv(|z| z * w);
    let floor = (1.0 - w) / d as f64;
    for i in 0..d {
        out[(i, i)] += C64::new(floor, 0.0);
    }
    QuantumState::density(state.dims().to_vec(), state.labels().to_vec(), out)
}

/// Local depolarizing channel on one subsystem with shrink factor
/// `lambda`: ρ → λρ + (1−λ)·(I/d ⊗ tr_target ρ).
pub fn depolarize(state: &QuantumState, target: usize, lambda: f64) -> Result<QuantumState> {
    if target >= state.dims().len() {
        return Err(Error::DimensionMismatch(
            "depolarize target out of range".into(),
        ));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "shrink factor {lambda} outside [0,1]"
        )));
    }
    let dims = state.dims().to_vec();
    let dt = dims[target];
    let d: usize = dims.iter().product();
    let rho = state.density_matrix();
    let stride: usize = dims[target + 1..].iter().product();
    let split = |idx: usize| {
        let digit = (idx / stride) % dt;
        let rest = idx - digit * stride;
        (digit, rest)
    };
    let mut out = rho.mapv(|z| z * lambda);
    // (I/d_t ⊗ tr_t ρ)[(a,r),(b,s)] = δ_ab/d_t · Σ_k ρ[(k,r),(k,s)]
    for i in 0..d {
        let (a, r) = split(i);
        for j in 0..d {
            let (b, s) = split(j);
            if a != b {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dt {
                acc += rho[(k * stride + r, k * stride + s)];
            }
            out[(i, j)] += acc * ((1.0 - lambda) / dt as f64);
        }
    }
    QuantumState::density(dims, state.labels().to_vec(), out)
}

/// Depolarizing model of `n_pulses` transfer π-pulses on a qubit,
/// calibrated so that the MUB-averaged state fidelity after the burst is
/// exactly `f_pi^n`. Clamps at the fully mixed state once `f_pi^n` reaches
/// the 1/2 floor of a depolarizing qubit channel.
pub fn raman_transfer(
    state: &QuantumState,
    target: usize,
    n_pulses: u32,
    f_pi: f64,
) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&f_pi) {
        return Err(Error::InvalidParameter(
            "pulse fidelity outside [0,1]".into(),
        ));
    }
    if n_pulses == 0 {
        return Ok(state.clone());
    }
    if state.dims()[target] != 2 {
        return Err(Error::NotAQubit {
            index: target,
            dim: state.dims()[target],
        });
    }
    // MUB-average fidelity of a qubit depolarizing channel with shrink λ
    // is (1 + λ)/2, so λ = 2 f^n − 1.
    let f_total = f_pi.powi(n_pulses as i32);
    let lambda = (2.0 * f_total - 1.0).max(0.0);
    depolarize(state, target, lambda)
}

/// Depolarizing model of the merge pulse with the measured fidelity.
pub fn merge_channel(state: &QuantumState, target: usize, fidelity: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidParameter(
            "merge fidelity outside [0,1]".into(),
        ));
    }
    let lambda = (2.0 * fidelity - 1.0).max(0.0);
    depolarize(state, target, lambda)
}
