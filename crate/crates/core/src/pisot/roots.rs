//! All complex roots of a [`MinimalPolynomial`] at high precision.
//!
//! Starting values are the eigenvalues of the companion matrix in double
//! precision. They are then refined simultaneously by Newton steps with
//! Aberth's deflation term, which keeps two starting values from collapsing
//! onto the same root.

use nalgebra::DMatrix;
use rug::Float;

use super::poly::MinimalPolynomial;
use crate::error::{Error, Result};
use crate::real::Complex;

const EXTRA_BITS: u32 = 64;

fn companion_estimates(poly: &MinimalPolynomial) -> Vec<(f64, f64)> {
    let m = poly.degree();
    let d: Vec<f64> = poly.d().iter().map(|c| c.to_f64()).collect();
    let companion = DMatrix::from_fn(m, m, |i, j| {
        if i == 0 {
            d[j]
        } else if j + 1 == i {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

/// Roots refined to `prec` bits, sorted by decreasing modulus (ties broken by
/// decreasing imaginary part). Complex roots come in exact conjugate pairs.
pub fn refined_roots(poly: &MinimalPolynomial, prec: u32) -> Result<Vec<Complex>> {
    let m = poly.degree();
    if m == 1 {
        return Ok(vec![Complex::from_real(Float::with_val(prec, &poly.d()[0]))]);
    }
    let wp = prec + EXTRA_BITS;
    let mut z: Vec<Complex> = companion_estimates(poly)
        .into_iter()
        .enumerate()
        .map(|(i, (re, im))| {
            // nudge exact duplicates apart so the deflation sum stays finite
            let eps = 1e-9 * (i as f64 + 1.0);
            Complex::from_f64(re + eps, im + eps * 0.5, wp)
        })
        .collect();

    let stop = Float::with_val(wp, Float::i_exp(1, -(wp as i32 - 8)));
    let max_iter = 200 + wp as usize / 4;
    let mut converged_rounds = 0;
    for _ in 0..max_iter {
        let mut worst = Float::new(wp);
        for i in 0..m {
            let p = poly.eval(&z[i]);
            if p.re.is_zero() && p.im.is_zero() {
                continue;
            }
            let dp = poly.eval_derivative(&z[i]);
            let ratio = p.div(&dp);
            let mut repulse = Complex::zero(wp);
            for j in 0..m {
                if j != i {
                    repulse = repulse.add(&z[i].sub(&z[j]).recip());
                }
            }
            let one = Complex::from_f64(1.0, 0.0, wp);
            let step = ratio.div(&one.sub(&ratio.mul(&repulse)));
            let mut scale = z[i].abs();
            if scale < 1 {
                scale = Float::with_val(wp, 1);
            }
            let rel = Float::with_val(wp, step.abs() / &scale);
            if rel > worst {
                worst = rel;
            }
            z[i] = z[i].sub(&step);
        }
        if worst < stop {
            converged_rounds += 1;
            if converged_rounds >= 2 {
                break;
            }
        } else {
            converged_rounds = 0;
        }
    }
    if converged_rounds == 0 {
        return Err(Error::PrecisionExhausted(format!(
            "root refinement for {poly} did not converge at {wp} bits"
        )));
    }

    symmetrize(poly, &mut z, wp);

    z.sort_by(|a, b| {
        b.abs()
            .partial_cmp(&a.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut out = Vec::with_capacity(m);
    let residual_cap = Float::with_val(wp, Float::i_exp(1, -(prec as i32 - 16)));
    for mut root in z {
        root.set_prec(prec);
        let mut check = root.clone();
        check.set_prec(wp);
        let r = poly.eval(&check).abs();
        if r >= residual_cap {
            return Err(Error::PrecisionExhausted(format!(
                "root residual {} exceeds 2^-{} for {poly}",
                r.to_f64(),
                prec - 16
            )));
        }
        out.push(root);
    }
    Ok(out)
}

/// Snaps near-real roots onto the real axis and makes complex roots exact
/// conjugate pairs, so conjugate sums are real to the last bit.
fn symmetrize(poly: &MinimalPolynomial, z: &mut [Complex], wp: u32) {
    let tiny = Float::with_val(wp, Float::i_exp(1, -(wp as i32 / 2)));
    for root in z.iter_mut() {
        let scale = Float::with_val(wp, root.abs() + 1u32);
        if Float::with_val(wp, root.im.abs_ref()) < Float::with_val(wp, &tiny * &scale) {
            root.im = Float::new(wp);
            for _ in 0..4 {
                let p = poly.eval(root);
                let dp = poly.eval_derivative(root);
                if dp.re.is_zero() {
                    break;
                }
                root.re -= Float::with_val(wp, &p.re / &dp.re);
            }
        }
    }
    let n = z.len();
    let mut paired = vec![false; n];
    for i in 0..n {
        if paired[i] || z[i].im <= 0 {
            continue;
        }
        let target = Complex::new(z[i].re.clone(), Float::with_val(wp, -&z[i].im));
        let partner = (0..n)
            .filter(|&j| j != i && !paired[j] && z[j].im < 0)
            .min_by(|&a, &b| {
                let da = z[a].sub(&target).abs();
                let db = z[b].sub(&target).abs();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(j) = partner {
            z[j] = target;
            paired[i] = true;
            paired[j] = true;
        }
    }
}
