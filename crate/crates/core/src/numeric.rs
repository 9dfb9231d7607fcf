//! Shared numerical routines: error functions, adaptive quadrature and a
//! small derivative-free minimizer.

use std::f64::consts::PI;

/// erf(x) by Taylor series; used for |x| ≤ 2 where it converges quickly.
fn erf_taylor(x: f64) -> f64 {
    let x2 = x * x;
    // c_k = (−1)^k x^{2k+1} / k!, contribution c_k / (2k+1)
    let mut c = x;
    let mut sum = x;
    let mut k = 1u32;
    loop {
        c *= -x2 / k as f64;
        let contrib = c / (2.0 * k as f64 + 1.0);
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) || k > 200 {
            break;
        }
        k += 1;
    }
    sum * 2.0 / PI.sqrt()
}

/// √π·e^{x²}·erfc(x) via a Lentz continued fraction; accurate for x ≥ 2.
fn erfcx_cf_scaled(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x.max(tiny);
    let mut c = f;
    let mut d = 0.0_f64;
    for i in 1..300 {
        let a = i as f64 / 2.0;
        d = x + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = x + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    // f is the continued-fraction value V with √π·erfcx(x) = 1/V.
    1.0 / f
}

/// Scaled complementary error function e^{x²}·erfc(x).
pub fn erfcx(x: f64) -> f64 {
    if x >= 2.0 {
        erfcx_cf_scaled(x) / PI.sqrt()
    } else if x >= 0.0 {
        (x * x).exp() * (1.0 - erf_taylor(x))
    } else {
        // erfcx(−x) = 2e^{x²} − erfcx(x); overflows for very negative x.
        2.0 * (x * x).exp() - erfcx(-x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x <= 2.0 {
        1.0 - erf_taylor(x)
    } else {
        erfcx_cf_scaled(x) / PI.sqrt() * (-x * x).exp()
    }
}

pub fn erf(x: f64) -> f64 {
    if x.abs() <= 2.0 {
        erf_taylor(x)
    } else {
        (1.0 - erfc(x.abs())) * x.signum()
    }
}

/// ln(erfc(x)), stable over the whole real line.
pub fn ln_erfc(x: f64) -> f64 {
    if x > 2.0 {
        -x * x + (erfcx_cf_scaled(x) / PI.sqrt()).ln()
    } else {
        erfc(x).ln()
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        let s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        (m, fm, s)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Maximise a smooth periodic function of one angle over [0, 2π).
///
/// Coarse scan followed by golden-section refinement; adequate for the
/// sinusoidal overlap profiles this crate optimises.
pub fn maximize_periodic<F: Fn(f64) -> f64>(f: &F, tol: f64) -> (f64, f64) {
    let n = 256;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let phi = 2.0 * PI * i as f64 / n as f64;
        let v = f(phi);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let step = 2.0 * PI / n as f64;
    let mut lo = best_i as f64 * step - step;
    let mut hi = best_i as f64 * step + step;
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let phi = 0.5 * (lo + hi);
    (phi, f(phi))
}

/// Inverse of a symmetric 3×3 matrix via the adjugate; `None` when
/// singular.
pub fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let a = m[(i + 1) % 3][(j + 1) % 3] * m[(i + 2) % 3][(j + 2) % 3]
                - m[(i + 1) % 3][(j + 2) % 3] * m[(i + 2) % 3][(j + 1) % 3];
            out[j][i] = a * inv_det;
        }
    }
    Some(out)
}

/// Nelder-Mead simplex minimisation.
///
/// Returns the best point, its function value and the number of function
/// evaluations. `scale` sets the initial simplex edge per coordinate.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    scale: &[f64],
    max_iter: usize,
    ftol: f64,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if (values[worst] - values[best]).abs()
            <= ftol * (values[best].abs() + values[worst].abs() + 1e-30)
        {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (idx, v) in simplex.iter().enumerate() {
            if idx != worst {
                for k in 0..n {
                    centroid[k] += v[k] / n as f64;
                }
            }
        }

        let reflect: Vec<f64> = (0..n)
            .map(|k| centroid[k] + (centroid[k] - simplex[worst][k]))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < values[best] {
            let expand: Vec<f64> = (0..n)
                .map(|k| centroid[k] + 2.0 * (centroid[k] - simplex[worst][k]))
                .collect();
            let fe = eval(&expand, &mut evals);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|k| centroid[k] + 0.5 * (simplex[worst][k] - centroid[k]))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[best].clone();
                for idx in 0..=n {
                    if idx == best {
                        continue;
                    }
                    for k in 0..n {
                        simplex[idx][k] = anchor[k] + 0.5 * (simplex[idx][k] - anchor[k]);
                    }
                    values[idx] = eval(&simplex[idx].clone(), &mut evals);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best], evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_gaussian_tail_quadrature() {
        // Independent check: erfc(x) = 2/√π e^{−x²} ∫_0^∞ e^{−2xu−u²} du.
        // The substitution keeps the integrand O(1) so the quadrature
        // oracle retains relative precision in the far tail.
        for &x in &[0.0, 0.3, 1.0, 1.7, 2.0, 2.5, 4.0, 6.0] {
            let scaled = integrate(&|u: f64| (-2.0 * x * u - u * u).exp(), 0.0, 14.0, 1e-15);
            let expected = 2.0 / PI.sqrt() * (-x * x).exp() * scaled;
            let got = erfc(x);
            assert!(
                (got - expected).abs() <= 1e-11 * expected.max(1e-300),
                "erfc({x}) = {got}, quadrature {expected}"
            );
        }
    }

    #[test]
    fn erfc_symmetry_and_known_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-15);
        assert!((erfc(-1.0) + erfc(1.0) - 2.0).abs() < 1e-15);
        // erf(1) = 0.842700792949715...
        assert!((erf(1.0) - 0.8427007929497149).abs() < 1e-13);
    }

    #[test]
    fn ln_erfc_consistent_across_regions() {
        for &x in &[-3.0, -1.0, 0.5, 1.9, 2.1, 5.0, 10.0] {
            let direct = erfc(x);
            if direct > 0.0 {
                assert!((ln_erfc(x) - direct.ln()).abs() < 1e-10);
            }
        }
        // Far tail stays finite and tracks −x².
        let v = ln_erfc(30.0);
        assert!(v < -890.0 && v > -910.0);
    }

    #[test]
    fn simpson_integrates_polynomial_exactly() {
        let v = integrate(&|x: f64| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-10);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 3.0;
        let (x, fv, _) = nelder_mead(&f, &[0.0, 0.0], &[0.5, 0.5], 500, 1e-14);
        assert!((x[0] - 1.5).abs() < 1e-5);
        assert!((x[1] + 0.5).abs() < 1e-5);
        assert!((fv - 3.0).abs() < 1e-9);
    }

    #[test]
    fn periodic_maximizer_finds_cosine_peak() {
        let (phi, v) = maximize_periodic(&|p: f64| (p - 1.0).cos(), 1e-10);
        assert!((phi - 1.0).abs() < 1e-6 || (phi - 1.0 - 2.0 * PI).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }
}
