//! Dense complex matrix helpers for small Hilbert spaces.
//!
//! Everything here works on `ndarray` arrays of `Complex64` and is sized for
//! dimensions up to a few hundred; no BLAS backend is required.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Identity matrix of dimension `d`.
pub fn identity(d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |(i, j)| {
        if i == j {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &Array1<C64>, b: &Array1<C64>) -> Array2<C64> {
    let n = a.len();
    let m = b.len();
    Array2::from_shape_fn((n, m), |(i, j)| a[i] * b[j].conj())
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &Array2<C64>, tol: f64) -> bool {
    let (r, c) = m.dim();
    if r != c {
        return false;
    }
    for i in 0..r {
        for j in i..c {
            let d = m[(i, j)] - m[(j, i)].conj();
            if d.norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn is_unitary(m: &Array2<C64>, tol: f64) -> bool {
    let (r, c) = m.dim();
    if r != c {
        return false;
    }
    let prod = dagger(m).dot(m);
    max_abs_diff(&prod, &identity(r)) <= tol
}

/// Eigenvalues of a Hermitian matrix by the cyclic Jacobi method with
/// complex rotations. Returns the eigenvalues sorted ascending.
///
/// Accurate to roughly machine precision times the matrix norm for the
/// small (≤ 64) dimensions used in this crate.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let mut a = m.clone();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Phase that makes the off-diagonal element real.
                let w = apq.conj() / r;
                // Real Jacobi rotation zeroing the (p,q) element.
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // J = D·R with D = diag(1, w); update A ← J† A J on the
                // (p,q) plane: columns first, then rows.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * w * s;
                    a[(k, q)] = akp * s + akq * w * c;
                }
                let wc = w.conj();
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * wc * s;
                    a[(q, k)] = apk * s + aqk * wc * c;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = a.diag().iter().map(|z| z.re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &Array2<C64>) -> f64 {
    hermitian_eigenvalues(m)[0]
}
