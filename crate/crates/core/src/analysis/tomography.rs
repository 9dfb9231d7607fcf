//! Two-qubit state tomography: Born-rule count simulation, iterative
//! maximum-likelihood reconstruction and correlation-visibility
//! estimators.

use crate::error::{Error, Result};
use crate::linalg;
use crate::quantum::{pauli, QuantumState};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Array2<C64> {
        match self {
            Pauli::X => pauli('x'),
            Pauli::Y => pauli('y'),
            Pauli::Z => pauli('z'),
        }
    }

    /// Eigenvector projectors for outcomes +1, −1.
    fn projectors(self) -> [Array2<C64>; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (vp, vm): (Vec<C64>, Vec<C64>) = match self {
            Pauli::X => (
                vec![C64::new(s, 0.), C64::new(s, 0.)],
                vec![C64::new(s, 0.), C64::new(-s, 0.)],
            ),
            Pauli::Y => (
                vec![C64::new(s, 0.), C64::new(0., s)],
                vec![C64::new(s, 0.), C64::new(0., -s)],
            ),
            Pauli::Z => (
                vec![C64::new(1., 0.), C64::new(0., 0.)],
                vec![C64::new(0., 0.), C64::new(1., 0.)],
            ),
        };
        let proj = |v: &[C64]| Array2::from_shape_fn((2, 2), |(i, j)| v[i] * v[j].conj());
        [proj(&vp), proj(&vm)]
    }
}

/// The nine two-qubit Pauli-pair measurement settings.
pub fn pauli_pair_settings() -> Vec<(Pauli, Pauli)> {
    let axes = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut v = Vec::with_capacity(9);
    for a in axes {
        for b in axes {
            v.push((a, b));
        }
    }
    v
}

/// Four joint projectors of a Pauli-pair setting, outcome order
/// (++, +−, −+, −−).
fn setting_projectors(setting: (Pauli, Pauli)) -> [Array2<C64>; 4] {
    let pa = setting.0.projectors();
    let pb = setting.1.projectors();
    [
        linalg::kron(&pa[0], &pb[0]),
        linalg::kron(&pa[0], &pb[1]),
        linalg::kron(&pa[1], &pb[0]),
        linalg::kron(&pa[1], &pb[1]),
    ]
}

/// Born probabilities of the four outcomes of one setting.
pub fn born_probabilities(state: &QuantumState, setting: (Pauli, Pauli)) -> Result<[f64; 4]> {
    if state.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(
            "tomography expects a two-qubit state".into(),
        ));
    }
    let projs = setting_projectors(setting);
    let mut out = [0.0; 4];
    for (k, p) in projs.iter().enumerate() {
        out[k] = state.expectation(p)?.max(0.0);
    }
    Ok(out)
}

/// Measured (or synthesized) outcome counts per setting. Counts are kept
/// as floats so exact infinite-shot frequencies can be represented.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountTable {
    pub settings: Vec<(Pauli, Pauli)>,
    pub shots: Vec<f64>,
    pub counts: Vec<[f64; 4]>,
}

impl CountTable {
    /// A table is tomographically complete when every Pauli pair appears.
    pub fn is_complete(&self) -> bool {
        pauli_pair_settings()
            .iter()
            .all(|s| self.settings.contains(s))
    }

    fn setting_index(&self, setting: (Pauli, Pauli)) -> Option<usize> {
        self.settings.iter().position(|&s| s == setting)
    }

    /// Correlator ⟨σ_a ⊗ σ_b⟩ estimated from one setting's counts.
    pub fn correlator(&self, setting: (Pauli, Pauli)) -> Option<f64> {
        let i = self.setting_index(setting)?;
        let n = self.counts[i];
        let total: f64 = n.iter().sum();
        if total <= 0.0 {
            return None;
        }
        Some((n[0] - n[1] - n[2] + n[3]) / total)
    }
}

/// Sample multinomial counts for each setting from the Born probabilities.
/// Deterministic for a given seed; each setting draws from its own RNG
/// stream.
pub fn simulate_counts(
    state: &QuantumState,
    settings: &[(Pauli, Pauli)],
    shots: u64,
    seed: u64,
) -> Result<CountTable> {
    let mut counts = Vec::with_capacity(settings.len());
    for (idx, &setting) in settings.iter().enumerate() {
        let probs = born_probabilities(state, setting)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64 + 1);
        // Multinomial via chained binomials.
        let mut remaining = shots;
        let mut rest = 1.0;
        let mut row = [0.0; 4];
        for k in 0..3 {
            let p = if rest > 0.0 {
                (probs[k] / rest).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let draw = Binomial::new(remaining, p)
                .map_err(|e| Error::Numerical(e.to_string()))?
                .sample(&mut rng);
            row[k] = draw as f64;
            remaining -= draw;
            rest -= probs[k];
        }
        row[3] = remaining as f64;
        counts.push(row);
    }
    Ok(CountTable {
        settings: settings.to_vec(),
        shots: vec![shots as f64; settings.len()],
        counts,
    })
}

/// Infinite-shot table: exact Born probabilities scaled by `shots`.
pub fn exact_counts(
    state: &QuantumState,
    settings: &[(Pauli, Pauli)],
    shots: f64,
) -> Result<CountTable> {
    let mut counts = Vec::with_capacity(settings.len());
    for &setting in settings {
        let p = born_probabilities(state, setting)?;
        counts.push([p[0] * shots, p[1] * shots, p[2] * shots, p[3] * shots]);
    }
    Ok(CountTable {
        settings: settings.to_vec(),
        shots: vec![shots; settings.len()],
        counts,
    })
}

#[derive(Clone, Debug)]
pub struct MleResult {
    pub state: QuantumState,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted iteration, starting from the
    /// maximally mixed seed; non-decreasing by construction.
    pub log_likelihood_trace: Vec<f64>,
}

fn log_likelihood(rho: &Array2<C64>, table: &CountTable, projs: &[[Array2<C64>; 4]]) -> f64 {
    let mut ll = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for k in 0..4 {
            if row[k] > 0.0 {
                let p = linalg::trace(&projs[i][k].dot(rho)).re.max(1e-300);
                ll += row[k] * p.ln();
            }
        }
    }
    ll
}

/// Iterative RρR maximum-likelihood reconstruction with a diluted
/// fallback step so the log-likelihood never decreases. Stops when the
/// log-likelihood improves by less than 1e-10 or after 5000 iterations;
/// non-convergence is reported on the result, with the last iterate.
pub fn mle_reconstruct(table: &CountTable) -> Result<MleResult> {
    if !table.is_complete() {
        return Err(Error::IncompleteSettings(
            "all nine Pauli pairs are required".into(),
        ));
    }
    if table.shots.iter().any(|&s| s <= 0.0) {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    let projs: Vec<[Array2<C64>; 4]> = table
        .settings
        .iter()
        .map(|&s| setting_projectors(s))
        .collect();
    let total_counts: f64 = table.counts.iter().flatten().sum();

    let mut rho = linalg::identity(4).mapv(|z| z * 0.25);
    let mut ll = log_likelihood(&rho, table, &projs);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..5000 {
        iterations = it + 1;
        // R = Σ f_j / p_j Π_j with f the global outcome frequencies.
        let mut r = Array2::<C64>::zeros((4, 4));
        for (i, row) in table.counts.iter().enumerate() {
            for k in 0..4 {
                if row[k] <= 0.0 {
                    continue;
                }
                let p = linalg::trace(&projs[i][k].dot(&rho)).re.max(1e-12);
                let f = row[k] / total_counts;
                r = r + projs[i][k].mapv(|z| z * (f / p));
            }
        }
        // Full RρR step, diluted toward the identity on any likelihood
        // regression.
        let mut accepted = false;
        let mut eps = 1.0f64;
        for _ in 0..40 {
            let step = if eps >= 1.0 {
                r.clone()
            } else {
                let id = linalg::identity(4);
                id.mapv(|z| z * (1.0 - eps)) + r.mapv(|z| z * eps)
            };
            let candidate = step.dot(&rho).dot(&linalg::dagger(&step));
            let tr = linalg::trace(&candidate).re;
            if tr <= 0.0 {
                eps *= 0.5;
                continue;
            }
            let candidate = candidate.mapv(|z| z / tr);
            let cand_ll = log_likelihood(&candidate, table, &projs);
            if cand_ll >= ll - 1e-13 {
                let delta = cand_ll - ll;
                rho = candidate;
                ll = cand_ll;
                trace.push(ll);
                accepted = true;
                if delta.abs() < 1e-10 {
                    converged = true;
                }
                break;
            }
            eps *= 0.5;
        }
        if !accepted {
            // No admissible step improves the likelihood: stationary.
            converged = true;
        }
        if converged {
            break;
        }
    }

    // Symmetrize away accumulated floating-point skew before validation.
    let herm = rho.clone() + linalg::dagger(&rho);
    let rho = herm.mapv(|z| z * 0.5);
    let state = QuantumState::density(vec![2, 2], vec!["ion", "photon"], rho)?;
    Ok(MleResult {
        state,
        iterations,
        converged,
        log_likelihood: ll,
        log_likelihood_trace: trace,
    })
}

/// Correlation visibilities with the sign alignment used by the fidelity
/// estimator: `values` are |⟨σσ⟩|, `signed` carries the correlators
/// aligned to the sign pattern of the nearest Bell flavor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub values: (f64, f64, f64),
    pub signed: (f64, f64, f64),
    /// Bell flavor whose sign pattern was used for alignment.
    pub flavor: String,
}

fn align(cx: f64, cy: f64, cz: f64) -> VisibilityEstimate {
    // Sign patterns of (⟨XX⟩, ⟨YY⟩, ⟨ZZ⟩) for the four Bell states.
    let flavors = [
        ("phi_plus", [1.0, -1.0, 1.0]),
        ("phi_minus", [-1.0, 1.0, 1.0]),
        ("psi_plus", [1.0, 1.0, -1.0]),
        ("psi_minus", [-1.0, -1.0, -1.0]),
    ];
    let (name, s) = flavors
        .iter()
        .max_by(|a, b| {
            let fa = a.1[0] * cx + a.1[1] * cy + a.1[2] * cz;
            let fb = b.1[0] * cx + b.1[1] * cy + b.1[2] * cz;
            fa.partial_cmp(&fb).unwrap()
        })
        .unwrap();
    VisibilityEstimate {
        values: (cx.abs(), cy.abs(), cz.abs()),
        signed: (s[0] * cx, s[1] * cy, s[2] * cz),
        flavor: name.to_string(),
    }
}

pub fn visibilities_from_state(state: &QuantumState) -> Result<VisibilityEstimate> {
    if state.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(
            "visibilities expect a two-qubit state".into(),
        ));
    }
    let corr =
        |p: Pauli| -> Result<f64> { state.expectation(&linalg::kron(&p.matrix(), &p.matrix())) };
    Ok(align(corr(Pauli::X)?, corr(Pauli::Y)?, corr(Pauli::Z)?))
}

pub fn visibilities_from_counts(table: &CountTable) -> Result<VisibilityEstimate> {
    let take = |p: Pauli| {
        table
            .correlator((p, p))
            .ok_or_else(|| Error::IncompleteSettings(format!("missing {:?}{:?} setting", p, p)))
    };
    Ok(align(take(Pauli::X)?, take(Pauli::Y)?, take(Pauli::Z)?))
}

/// Sinusoid fit of a phase-scanned coincidence probability
/// p(φ) = C + (V/2)·cos(φ − φ₀).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SinusoidFit {
    pub visibility: f64,
    pub stderr: f64,
    pub phase_rad: f64,
    pub offset: f64,
}

/// Weighted least squares on (phase, observed probability, shots)
/// triples. At least four phase points are required.
pub fn fit_visibility_scan(points: &[(f64, f64, f64)]) -> Result<SinusoidFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "{} phase points; a sinusoid fit needs at least 4",
            points.len()
        )));
    }
    // Design matrix [1, cos φ, sin φ] with binomial weights.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for &(phi, p, n) in points {
        let var = (p.clamp(1e-4, 1.0 - 1e-4) * (1.0 - p.clamp(1e-4, 1.0 - 1e-4))) / n.max(1.0);
        let w = 1.0 / var;
        let row = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += w * row[i] * row[j];
            }
            atb[i] += w * row[i] * p;
        }
    }
    let cov = crate::numeric::invert3(&ata)
        .ok_or_else(|| Error::DegenerateFit("singular design matrix".into()))?;
    let mut beta = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            beta[i] += cov[i][j] * atb[j];
        }
    }
    let (c0, a, b) = (beta[0], beta[1], beta[2]);
    let amp = (a * a + b * b).sqrt();
    let visibility = 2.0 * amp;
    // Propagate parameter covariance through V = 2√(a²+b²).
    let var_v = if amp > 1e-12 {
        4.0 * (a * a * cov[1][1] + b * b * cov[2][2] + 2.0 * a * b * cov[1][2]) / (amp * amp)
    } else {
        4.0 * cov[1][1].max(cov[2][2])
    };
    Ok(SinusoidFit {
        visibility,
        stderr: var_v.max(0.0).sqrt(),
        phase_rad: b.atan2(a),
        offset: c0,
    })
}
