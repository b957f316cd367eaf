//! Star discrepancy of fractional parts `{alpha x_i}`.

use rand::RngCore;
use rug::Float;

use crate::real;

/// `D*_N = max_i max(i/N - u_(i), u_(i) - (i-1)/N)` over the sorted `u`.
pub fn star_discrepancy(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut u = values.to_vec();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| {
            let i = i as f64;
            ((i + 1.0) / n - x).max(x - i / n)
        })
        .fold(0.0, f64::max)
}

/// Star discrepancy of `{alpha x_i mod 1}` in double precision.
pub fn discrepancy(alpha: f64, x: &[f64]) -> f64 {
    let u: Vec<f64> = x.iter().map(|&xi| (alpha * xi).rem_euclid(1.0)).collect();
    star_discrepancy(&u)
}

/// Star discrepancy of `{alpha theta^i}`, `i = 1..=n`, with `alpha` and the
/// powers carried at enough bits that every fractional part is exact to
/// double precision.
pub fn discrepancy_lacunary(alpha: &Float, theta: &Float, n: usize) -> f64 {
    let bits = (n as f64 * theta.to_f64().log2()).ceil() as u32 + 96;
    let prec = bits.max(alpha.prec()).max(theta.prec());
    let th = Float::with_val(prec, theta);
    let mut x = Float::with_val(prec, alpha);
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        x *= &th;
        let f = real::centered_fraction(&x).to_f64();
        u.push(f.rem_euclid(1.0));
    }
    star_discrepancy(&u)
}

/// Uniform real in `(0, 1)` with `bits` random bits.
pub fn random_unit_float<R: RngCore>(rng: &mut R, bits: u32) -> Float {
    let words = bits.div_ceil(64);
    let mut x = Float::new(words * 64 + 64);
    for i in 0..words {
        let w = Float::with_val(64, rng.next_u64());
        x += w >> (64 * (i + 1));
    }
    if x.is_zero() {
        x = Float::with_val(words * 64, Float::i_exp(1, -(bits as i32)));
    }
    Float::with_val(bits, x)
}
