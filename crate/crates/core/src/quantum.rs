//! Minimal dense state engine for composite Hilbert spaces up to dimension
//! 64, together with the node-specific state constructions and gates.
//!
//! Conventions used throughout the crate:
//!
//! * subsystem order is fixed: ions first, then photonic modes; node a
//!   before node b;
//! * the emitted-photon polarization mode uses basis order `π, σ−, σ+`;
//! * the fiber photon qubit uses basis order `H, V`;
//! * post-selection is always expressed as a `(probability, renormalized
//!   state)` pair — a vacuum / no-click branch is an explicit outcome and
//!   is never silently dropped.

use crate::error::{Error, Result};
use crate::linalg;
use crate::numeric;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Largest supported total Hilbert-space dimension (two ions ⊗ two
/// dual-rail photonic modes). Larger requests are rejected.
pub const MAX_DIM: usize = 64;
/// Tolerance for norm / trace / unitarity checks.
pub const NORM_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted for a density matrix.
pub const POSITIVITY_TOL: f64 = -1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Decompose a flat basis index into per-subsystem digits.
fn digits_of(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

/// Flat basis index of per-subsystem digits.
fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0;
    for (k, &d) in dims.iter().enumerate() {
        idx = idx * d + digits[k];
    }
    idx
}

#[derive(Clone, Debug)]
enum StateData {
    Pure(Array1<C64>),
    Density(Array2<C64>),
}

/// A pure state or density matrix over a labelled composite Hilbert space.
#[derive(Clone, Debug)]
pub struct QuantumState {
    dims: Vec<usize>,
    labels: Vec<String>,
    data: StateData,
}

impl QuantumState {
    fn check_shape(dims: &[usize], labels: &[String]) -> Result<usize> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(
                "subsystem dimensions must be non-empty and positive".into(),
            ));
        }
        if dims.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        let total: usize = dims.iter().product();
        if total > MAX_DIM {
            return Err(Error::DimensionCap(total, MAX_DIM));
        }
        Ok(total)
    }

    /// Construct a pure state. Amplitudes must be normalized to 1 within
    /// [`NORM_TOL`].
    pub fn pure<S: Into<String>>(
        dims: Vec<usize>,
        labels: Vec<S>,
        amplitudes: Vec<C64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let total = Self::check_shape(&dims, &labels)?;
        if amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                total,
                amplitudes.len()
            )));
        }
        let v = Array1::from(amplitudes);
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if (norm2.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "pure state norm {} differs from 1",
                norm2.sqrt()
            )));
        }
        Ok(Self {
            dims,
            labels,
            data: StateData::Pure(v),
        })
    }

    /// Construct a density matrix. Must be Hermitian with unit trace within
    /// [`NORM_TOL`] and eigenvalues above [`POSITIVITY_TOL`].
    pub fn density<S: Into<String>>(
        dims: Vec<usize>,
        labels: Vec<S>,
        matrix: Array2<C64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let total = Self::check_shape(&dims, &labels)?;
        if matrix.dim() != (total, total) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {total}×{total} matrix, got {:?}",
                matrix.dim()
            )));
        }
        if !linalg::is_hermitian(&matrix, NORM_TOL) {
            return Err(Error::InvalidState(
                "density matrix is not Hermitian".into(),
            ));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix trace {} differs from 1",
                tr.re
            )));
        }
        let min_eig = linalg::min_eigenvalue(&matrix);
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {min_eig}"
            )));
        }
        Ok(Self {
            dims,
            labels,
            data: StateData::Density(matrix),
        })
    }

    /// Computational basis state with the given per-subsystem digits.
    pub fn basis<S: Into<String>>(
        dims: Vec<usize>,
        labels: Vec<S>,
        digits: &[usize],
    ) -> Result<Self> {
        let total: usize = dims.iter().product();
        let idx = index_of(digits, &dims);
        let mut amps = vec![c(0.0, 0.0); total];
        amps[idx] = c(1.0, 0.0);
        Self::pure(dims, labels, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    /// Amplitude vector, if this is a pure state.
    pub fn amplitudes(&self) -> Option<&Array1<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    /// The state as a density matrix (|ψ⟩⟨ψ| for pure states).
    pub fn density_matrix(&self) -> Array2<C64> {
        match &self.data {
            StateData::Pure(v) => linalg::outer(v, v),
            StateData::Density(m) => m.clone(),
        }
    }

    /// Norm for pure states, trace for density matrices.
    pub fn norm_or_trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            StateData::Density(m) => linalg::trace(m).re,
        }
    }

    /// Born probability of a joint computational-basis outcome.
    pub fn basis_probability(&self, digits: &[usize]) -> f64 {
        let idx = index_of(digits, &self.dims);
        match &self.data {
            StateData::Pure(v) => v[idx].norm_sqr(),
            StateData::Density(m) => m[(idx, idx)].re,
        }
    }

    /// ⟨target|ρ|target⟩ for a pure `target` on the same space.
    pub fn fidelity_to(&self, target: &QuantumState) -> Result<f64> {
        if target.dims != self.dims {
            return Err(Error::DimensionMismatch(
                "fidelity requires matching subsystem dimensions".into(),
            ));
        }
        let t = target
            .amplitudes()
            .ok_or_else(|| Error::InvalidState("fidelity target must be pure".into()))?;
        match &self.data {
            StateData::Pure(v) => {
                let ov: C64 = t.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                Ok(ov.norm_sqr())
            }
            StateData::Density(m) => {
                let mut acc = c(0.0, 0.0);
                for i in 0..t.len() {
                    for j in 0..t.len() {
                        acc += t[i].conj() * m[(i, j)] * t[j];
                    }
                }
                Ok(acc.re)
            }
        }
    }

    /// Expectation value tr(ρ·op) of a Hermitian observable.
    pub fn expectation(&self, op: &Array2<C64>) -> Result<f64> {
        let d = self.dim();
        if op.dim() != (d, d) {
            return Err(Error::DimensionMismatch(
                "observable dimension mismatch".into(),
            ));
        }
        match &self.data {
            StateData::Pure(v) => {
                let mut acc = c(0.0, 0.0);
                for i in 0..d {
                    for j in 0..d {
                        acc += v[i].conj() * op[(i, j)] * v[j];
                    }
                }
                Ok(acc.re)
            }
            StateData::Density(m) => Ok(linalg::trace(&op.dot(m)).re),
        }
    }

    /// Embed an operator acting on `targets` (in the given order) into the
    /// full space.
    pub fn embed_operator(&self, op: &Array2<C64>, targets: &[usize]) -> Result<Array2<C64>> {
        embed_operator(op, targets, &self.dims)
    }

    /// Apply a unitary to the named target subsystems.
    pub fn apply_unitary(&self, u: &Unitary, targets: &[usize]) -> Result<Self> {
        let tdim: usize = targets
            .iter()
            .map(|&t| self.dims.get(t).copied().unwrap_or(0))
            .product();
        if tdim != u.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary of dimension {} applied to subsystems of joint dimension {}",
                u.dim(),
                tdim
            )));
        }
        let full = embed_operator(&u.matrix, targets, &self.dims)?;
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(full.dot(v)),
            StateData::Density(m) => StateData::Density(full.dot(m).dot(&linalg::dagger(&full))),
        };
        Ok(Self {
            dims: self.dims.clone(),
            labels: self.labels.clone(),
            data,
        })
    }

    /// Trace out every subsystem not listed in `keep` (indices must be
    /// strictly increasing). The result is a density matrix.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DimensionMismatch(
                "kept subsystems must be non-empty and strictly increasing".into(),
            ));
        }
        if keep.iter().any(|&k| k >= self.dims.len()) {
            return Err(Error::DimensionMismatch(
                "kept subsystem out of range".into(),
            ));
        }
        let rho = self.density_matrix();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let kept_labels: Vec<String> = keep.iter().map(|&k| self.labels[k].clone()).collect();
        let dk: usize = kept_dims.iter().product();
        let mut out = Array2::<C64>::zeros((dk, dk));
        let d = self.dim();
        for r in 0..d {
            let rd = digits_of(r, &self.dims);
            for col in 0..d {
                let cd = digits_of(col, &self.dims);
                // Environment digits must match for the term to survive.
                let mut env_match = true;
                for k in 0..self.dims.len() {
                    if !keep.contains(&k) && rd[k] != cd[k] {
                        env_match = false;
                        break;
                    }
                }
                if !env_match {
                    continue;
                }
                let rk: Vec<usize> = keep.iter().map(|&k| rd[k]).collect();
                let ck: Vec<usize> = keep.iter().map(|&k| cd[k]).collect();
                out[(index_of(&rk, &kept_dims), index_of(&ck, &kept_dims))] += rho[(r, col)];
            }
        }
        QuantumState::density(kept_dims, kept_labels, out)
    }

    /// Apply a (generally rectangular) operator to a single subsystem,
    /// changing its dimension. Used for projections and isometric
    /// embeddings; the result is *not* renormalized.
    fn map_subsystem_raw(
        &self,
        op: &Array2<C64>,
        target: usize,
    ) -> Result<(Vec<usize>, StateData)> {
        let (new_d, old_d) = op.dim();
        if target >= self.dims.len() || self.dims[target] != old_d {
            return Err(Error::DimensionMismatch(format!(
                "operator expects subsystem of dimension {old_d}"
            )));
        }
        let mut new_dims = self.dims.clone();
        new_dims[target] = new_d;
        let total_new: usize = new_dims.iter().product();
        let total_old = self.dim();
        // Full rectangular matrix; fine at these dimensions.
        let mut full = Array2::<C64>::zeros((total_new, total_old));
        for col in 0..total_old {
            let mut dg = digits_of(col, &self.dims);
            let old_t = dg[target];
            for new_t in 0..new_d {
                let v = op[(new_t, old_t)];
                if v == c(0.0, 0.0) {
                    continue;
                }
                dg[target] = new_t;
                full[(index_of(&dg, &new_dims), col)] += v;
            }
            dg[target] = old_t;
        }
        let data = match &self.data {
            StateData::Pure(v) => StateData::Pure(full.dot(v)),
            StateData::Density(m) => StateData::Density(full.dot(m).dot(&linalg::dagger(&full))),
        };
        Ok((new_dims, data))
    }

    /// Apply an isometry (op†·op = I on the source space) to one
    /// subsystem, changing its dimension while preserving normalization.
    pub fn apply_isometry(&self, op: &Array2<C64>, target: usize) -> Result<Self> {
        let (rows, cols) = op.dim();
        if rows < cols {
            return Err(Error::DimensionMismatch(
                "isometry cannot shrink a subsystem".into(),
            ));
        }
        let gram = linalg::dagger(op).dot(op);
        if linalg::max_abs_diff(&gram, &linalg::identity(cols)) > NORM_TOL {
            return Err(Error::InvalidState("operator is not an isometry".into()));
        }
        let (new_dims, data) = self.map_subsystem_raw(op, target)?;
        let total: usize = new_dims.iter().product();
        if total > MAX_DIM {
            return Err(Error::DimensionCap(total, MAX_DIM));
        }
        match data {
            StateData::Pure(v) => QuantumState::pure(new_dims, self.labels.clone(), v.to_vec()),
            StateData::Density(m) => QuantumState::density(new_dims, self.labels.clone(), m),
        }
    }

    /// Post-select one subsystem onto a subset of its levels, relabelling
    /// them 0..k. Returns the selection probability and the renormalized
    /// state; the discarded branch carries the rest of the probability.
    pub fn restrict_levels(&self, target: usize, kept: &[usize]) -> Result<(f64, Self)> {
        if target >= self.dims.len() {
            return Err(Error::DimensionMismatch("subsystem out of range".into()));
        }
        let d_old = self.dims[target];
        if kept.is_empty() || kept.iter().any(|&l| l >= d_old) {
            return Err(Error::DimensionMismatch("kept level out of range".into()));
        }
        let mut op = Array2::<C64>::zeros((kept.len(), d_old));
        for (new, &old) in kept.iter().enumerate() {
            op[(new, old)] = c(1.0, 0.0);
        }
        let (new_dims, data) = self.map_subsystem_raw(&op, target)?;
        renormalized(new_dims, self.labels.clone(), data)
    }

    /// Reorder subsystems; `perm[i]` names the old position that moves to
    /// new position `i`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::DimensionMismatch(
                "invalid subsystem permutation".into(),
            ));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let new_labels: Vec<String> = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let d = self.dim();
        let map = |old_idx: usize| {
            let dg = digits_of(old_idx, &self.dims);
            let new_dg: Vec<usize> = perm.iter().map(|&p| dg[p]).collect();
            index_of(&new_dg, &new_dims)
        };
        let data = match &self.data {
            StateData::Pure(v) => {
                let mut out = Array1::<C64>::zeros(d);
                for i in 0..d {
                    out[map(i)] = v[i];
                }
                StateData::Pure(out)
            }
            StateData::Density(m) => {
                let mut out = Array2::<C64>::zeros((d, d));
                for i in 0..d {
                    let ni = map(i);
                    for j in 0..d {
                        out[(ni, map(j))] = m[(i, j)];
                    }
                }
                StateData::Density(out)
            }
        };
        Ok(Self {
            dims: new_dims,
            labels: new_labels,
            data,
        })
    }

    /// Tensor product `self ⊗ other` (self's subsystems first).
    pub fn tensor(&self, other: &QuantumState) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let total: usize = dims.iter().product();
        if total > MAX_DIM {
            return Err(Error::DimensionCap(total, MAX_DIM));
        }
        match (&self.data, &other.data) {
            (StateData::Pure(a), StateData::Pure(b)) => {
                let mut amps = Vec::with_capacity(total);
                for x in a.iter() {
                    for y in b.iter() {
                        amps.push(x * y);
                    }
                }
                QuantumState::pure(dims, labels, amps)
            }
            _ => {
                let m = linalg::kron(&self.density_matrix(), &other.density_matrix());
                QuantumState::density(dims, labels, m)
            }
        }
    }

    /// Projective measurement. Returns one outcome per projector with its
    /// Born probability and renormalized post-state (absent for
    /// zero-probability branches). The record exposes the completeness
    /// deficit so post-selective projector sets are allowed.
    pub fn measure(&self, projectors: &[Projector]) -> Result<MeasurementRecord> {
        let d = self.dim();
        let mut outcomes = Vec::with_capacity(projectors.len());
        let mut total = 0.0;
        for p in projectors {
            if p.matrix.dim() != (d, d) {
                return Err(Error::DimensionMismatch(
                    "projector dimension mismatch".into(),
                ));
            }
            let rho = self.density_matrix();
            let projected = p.matrix.dot(&rho).dot(&linalg::dagger(&p.matrix));
            let prob = linalg::trace(&projected).re.max(0.0);
            total += prob;
            let post_state = if prob > 1e-14 {
                let renorm = projected.mapv(|z| z / prob);
                Some(QuantumState::density(
                    self.dims.clone(),
                    self.labels.clone(),
                    renorm,
                )?)
            } else {
                None
            };
            outcomes.push(MeasurementOutcome {
                label: p.outcome.clone(),
                probability: prob,
                post_state,
            });
        }
        Ok(MeasurementRecord {
            outcomes,
            completeness_deficit: 1.0 - total,
        })
    }

    pub fn to_json(&self) -> StateJson {
        let (kind, re, im) = match &self.data {
            StateData::Pure(v) => (
                "pure".to_string(),
                v.iter().map(|z| z.re).collect(),
                v.iter().map(|z| z.im).collect(),
            ),
            StateData::Density(m) => (
                "density".to_string(),
                m.iter().map(|z| z.re).collect(),
                m.iter().map(|z| z.im).collect(),
            ),
        };
        StateJson {
            dims: self.dims.clone(),
            labels: self.labels.clone(),
            kind,
            re,
            im,
        }
    }

    pub fn from_json(doc: &StateJson) -> Result<Self> {
        let total: usize = doc.dims.iter().product();
        let vals: Vec<C64> = doc
            .re
            .iter()
            .zip(doc.im.iter())
            .map(|(&r, &i)| c(r, i))
            .collect();
        match doc.kind.as_str() {
            "pure" => QuantumState::pure(doc.dims.clone(), doc.labels.clone(), vals),
            "density" => {
                if vals.len() != total * total {
                    return Err(Error::DimensionMismatch(
                        "bad density payload length".into(),
                    ));
                }
                let m = Array2::from_shape_vec((total, total), vals)
                    .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
                QuantumState::density(doc.dims.clone(), doc.labels.clone(), m)
            }
            other => Err(Error::InvalidState(format!("unknown state kind `{other}`"))),
        }
    }
}

fn renormalized(
    dims: Vec<usize>,
    labels: Vec<String>,
    data: StateData,
) -> Result<(f64, QuantumState)> {
    match data {
        StateData::Pure(v) => {
            let p: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if p <= 1e-14 {
                return Err(Error::Numerical(
                    "post-selection probability is zero".into(),
                ));
            }
            let scaled = v.mapv(|z| z / p.sqrt());
            Ok((p, QuantumState::pure(dims, labels, scaled.to_vec())?))
        }
        StateData::Density(m) => {
            let p = linalg::trace(&m).re;
            if p <= 1e-14 {
                return Err(Error::Numerical(
                    "post-selection probability is zero".into(),
                ));
            }
            let scaled = m.mapv(|z| z / p);
            Ok((p, QuantumState::density(dims, labels, scaled)?))
        }
    }
}

/// Embed `op` acting on `targets` (ordered) into the full space described
/// by `dims`.
pub fn embed_operator(op: &Array2<C64>, targets: &[usize], dims: &[usize]) -> Result<Array2<C64>> {
    let n = dims.len();
    if targets.iter().any(|&t| t >= n) {
        return Err(Error::DimensionMismatch(
            "target subsystem out of range".into(),
        ));
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if std::mem::replace(&mut seen[t], true) {
            return Err(Error::DimensionMismatch("repeated target subsystem".into()));
        }
    }
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let tdim: usize = tdims.iter().product();
    if op.dim() != (tdim, tdim) {
        return Err(Error::DimensionMismatch(format!(
            "operator is {:?} but targets have joint dimension {tdim}",
            op.dim()
        )));
    }
    let d: usize = dims.iter().product();
    let mut full = Array2::<C64>::zeros((d, d));
    for col in 0..d {
        let dg = digits_of(col, dims);
        let tcol: Vec<usize> = targets.iter().map(|&t| dg[t]).collect();
        let tcol_idx = index_of(&tcol, &tdims);
        for trow_idx in 0..tdim {
            let v = op[(trow_idx, tcol_idx)];
            if v == c(0.0, 0.0) {
                continue;
            }
            let trow = digits_of(trow_idx, &tdims);
            let mut rdg = dg.clone();
            for (k, &t) in targets.iter().enumerate() {
                rdg[t] = trow[k];
            }
            full[(index_of(&rdg, dims), col)] += v;
        }
    }
    Ok(full)
}

/// A unitary operator over the listed subsystem dimensions.
#[derive(Clone, Debug)]
pub struct Unitary {
    matrix: Array2<C64>,
    dims: Vec<usize>,
}

impl Unitary {
    pub fn new(matrix: Array2<C64>, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "unitary shape {:?} does not match dims {:?}",
                matrix.dim(),
                dims
            )));
        }
        if !linalg::is_unitary(&matrix, NORM_TOL) {
            return Err(Error::InvalidState("matrix is not unitary".into()));
        }
        Ok(Self { matrix, dims })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: linalg::dagger(&self.matrix),
            dims: self.dims.clone(),
        }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Self {
            matrix: linalg::identity(d),
            dims,
        }
    }
}

/// A projector with an outcome label.
#[derive(Clone, Debug)]
pub struct Projector {
    matrix: Array2<C64>,
    outcome: String,
}

impl Projector {
    pub fn new<S: Into<String>>(matrix: Array2<C64>, outcome: S) -> Result<Self> {
        if !linalg::is_hermitian(&matrix, NORM_TOL) {
            return Err(Error::InvalidState("projector is not Hermitian".into()));
        }
        let sq = matrix.dot(&matrix);
        if linalg::max_abs_diff(&sq, &matrix) > NORM_TOL {
            return Err(Error::InvalidState("projector is not idempotent".into()));
        }
        Ok(Self {
            matrix,
            outcome: outcome.into(),
        })
    }

    /// Embed a subsystem-level projector into the full space.
    pub fn on_subsystems<S: Into<String>>(
        op: &Array2<C64>,
        targets: &[usize],
        dims: &[usize],
        outcome: S,
    ) -> Result<Self> {
        Self::new(embed_operator(op, targets, dims)?, outcome)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn outcome(&self) -> &str {
        &self.outcome
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub label: String,
    pub probability: f64,
    pub post_state: Option<QuantumState>,
}

#[derive(Clone, Debug)]
pub struct MeasurementRecord {
    pub outcomes: Vec<MeasurementOutcome>,
    /// 1 − Σ probabilities; near zero for a complete projector set.
    pub completeness_deficit: f64,
}

impl MeasurementRecord {
    pub fn is_complete(&self) -> bool {
        self.completeness_deficit.abs() <= NORM_TOL
    }
}

/// JSON document form of a state: `{dims, labels, kind, re[], im[]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    pub kind: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Pauli matrices for qubit observables.
pub fn pauli(axis: char) -> Array2<C64> {
    match axis {
        'x' | 'X' => {
            Array2::from_shape_vec((2, 2), vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
                .unwrap()
        }
        'y' | 'Y' => {
            Array2::from_shape_vec((2, 2), vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
                .unwrap()
        }
        'z' | 'Z' => {
            Array2::from_shape_vec((2, 2), vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
                .unwrap()
        }
        _ => panic!("unknown Pauli axis {axis}"),
    }
}

/// The two-qubit Bell state (|00⟩ + |11⟩)/√2 with the given labels.
pub fn bell_pair(label_a: &str, label_b: &str) -> QuantumState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::pure(
        vec![2, 2],
        vec![label_a, label_b],
        vec![c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)],
    )
    .expect("bell pair is a valid state")
}

/// Ion-photon state after spontaneous emission: a three-level ion
/// entangled with a three-component polarization mode,
/// (1/√3)|0,π⟩ + (1/√6)|1,σ−⟩ + (1/√2)|2,σ+⟩.
pub fn emission_state() -> QuantumState {
    let mut amps = vec![c(0.0, 0.0); 9];
    amps[0] = c((1.0f64 / 3.0).sqrt(), 0.0); // |0, π⟩
    amps[4] = c((1.0f64 / 6.0).sqrt(), 0.0); // |1, σ−⟩
    amps[8] = c((1.0f64 / 2.0).sqrt(), 0.0); // |2, σ+⟩
    QuantumState::pure(vec![3, 3], vec!["ion", "pol"], amps).expect("valid emission state")
}

/// Project the polarization mode onto the fiber axis: |π⟩ → |H⟩ with unit
/// amplitude, |σ±⟩ → |V⟩ with amplitude 1/√2 (the other half of the σ
/// emission misses the fiber mode). Acts on the last subsystem, which must
/// be a π/σ∓ polarization mode of dimension 3.
///
/// Returns the collection probability and the renormalized state with the
/// polarization mode replaced by an H/V photon qubit.
pub fn fiber_projection(state: &QuantumState) -> Result<(f64, QuantumState)> {
    let target = state.dims().len() - 1;
    if state.dims()[target] != 3 {
        return Err(Error::MissingPolarization);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = Array2::<C64>::zeros((2, 3));
    k[(0, 0)] = c(1.0, 0.0); // π → H
    k[(1, 1)] = c(s, 0.0); // σ− → V
    k[(1, 2)] = c(s, 0.0); // σ+ → V
    let (new_dims, data) = state.map_subsystem_raw(&k, target)?;
    let mut labels = state.labels().to_vec();
    labels[target] = "photon".into();
    renormalized(new_dims, labels, data)
}

/// The 2π/3 rotation on the ion's {|1⟩, |2⟩} subspace that merges
/// (1/2)|1⟩ + (√3/2)|2⟩ into |1⟩; |0⟩ is untouched. This is the ideal
/// merge pulse — its measured imperfection is applied separately as a
/// noise channel.
pub fn merge_unitary() -> Unitary {
    let ch = 0.5;
    let sh = 3.0f64.sqrt() / 2.0;
    let mut m = linalg::identity(3);
    m[(1, 1)] = c(ch, 0.0);
    m[(1, 2)] = c(sh, 0.0);
    m[(2, 1)] = c(-sh, 0.0);
    m[(2, 2)] = c(ch, 0.0);
    Unitary::new(m, vec![3]).expect("merge rotation is unitary")
}

/// Apply the merge pulse to the ion (subsystem 0, dimension ≥ 3).
pub fn merge_gate(state: &QuantumState) -> Result<QuantumState> {
    if state.dims()[0] < 3 {
        return Err(Error::DimensionMismatch(
            "merge gate needs ion levels |1⟩ and |2⟩".into(),
        ));
    }
    state.apply_unitary(&merge_unitary(), &[0])
}

/// Overlap with the closest maximally entangled two-qubit state, maximised
/// over per-side phase rotations of the |Φ⟩ and |Ψ⟩ Bell flavors. The
/// phase is found numerically to better than 1e-6.
pub fn bell_fidelity(state: &QuantumState) -> Result<f64> {
    if state.dims() != [2, 2] {
        return Err(Error::DimensionMismatch(
            "bell_fidelity expects a two-qubit state".into(),
        ));
    }
    let rho = state.density_matrix();
    // ⟨B(φ)|ρ|B(φ)⟩ is sinusoidal in the relative phase for each flavor.
    let phi_family = |phi: f64| {
        0.5 * (rho[(0, 0)].re + rho[(3, 3)].re) + (C64::from_polar(1.0, phi) * rho[(0, 3)]).re
    };
    let psi_family = |phi: f64| {
        0.5 * (rho[(1, 1)].re + rho[(2, 2)].re) + (C64::from_polar(1.0, phi) * rho[(1, 2)]).re
    };
    let (_, f_phi) = numeric::maximize_periodic(&phi_family, 1e-8);
    let (_, f_psi) = numeric::maximize_periodic(&psi_family, 1e-8);
    Ok(f_phi.max(f_psi).clamp(0.0, 1.0))
}

/// Entanglement fidelity estimated from three correlation visibilities,
/// F = (1 + Vx + Vy + Vz)/4.
pub fn visibility_fidelity(vx: f64, vy: f64, vz: f64) -> Result<f64> {
    for (name, v) in [("Vx", vx), ("Vy", vy), ("Vz", vz)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} is outside [-1, 1]"
            )));
        }
    }
    Ok((1.0 + vx + vy + vz) / 4.0)
}

/// Werner state: Bell |Φ+⟩ with weight `p` mixed with the maximally mixed
/// state. Its Bell fidelity is p + (1−p)/4.
pub fn werner_state(p: f64) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "werner weight {p} outside [0,1]"
        )));
    }
    let bell = bell_pair("ion", "photon").density_matrix();
    let mixed = linalg::identity(4).mapv(|z| z * 0.25);
    let m = bell.mapv(|z| z * p) + mixed.mapv(|z| z * (1.0 - p));
    QuantumState::density(vec![2, 2], vec!["ion", "photon"], m)
}
