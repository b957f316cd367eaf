//! The Fourier transform `mu_hat(t) = prod_{k>=0} cos(2 pi theta^-k t)` of the
//! Bernoulli convolution, digit traces `y theta^j = K_j + delta_j`, and the
//! integer recurrence satisfied by runs of small remainders.

use std::io::Write;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pisot::{FieldElement, PisotNumber};
use crate::real::{self, GUARD_BITS};

/// A cosine factor with modulus below this turns the result into an interval
/// bracketing zero.
pub const FACTOR_FLOOR: f64 = 1e-30;

/// Default tolerance of the double-precision path.
pub const FAST_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MuHatResult {
    pub value: Float,
    pub error_bound: f64,
    /// Index of the last factor multiplied in.
    pub truncation_index: u64,
    pub contains_zero: bool,
}

impl MuHatResult {
    pub fn abs_value(&self) -> Float {
        Float::with_val(self.value.prec(), self.value.abs_ref())
    }

    pub fn to_record(&self, t: &Float) -> MuHatRecord {
        let digits = real::decimal_digits(self.value.prec().min(t.prec()).max(53));
        MuHatRecord {
            t: real::format_float(t, digits),
            value: real::format_float(&self.value, digits),
            error_bound: self.error_bound,
            truncation_index: self.truncation_index,
            contains_zero: self.contains_zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuHatRecord {
    pub t: String,
    pub value: String,
    pub error_bound: f64,
    pub truncation_index: u64,
    pub contains_zero: bool,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidTolerance(tol));
    }
    Ok(())
}

/// Working precision for evaluating at `t`: enough that `t theta^-k` keeps
/// `prec` bits after the binary point.
fn working_prec(prec: u32, t: &Float) -> u32 {
    let e = t.get_exp().unwrap_or(0).max(0) as u32;
    prec + GUARD_BITS + e
}

/// `mu_hat_theta(t)` for any real `theta > 1`, truncated once the neglected
/// factors multiply to within `exp(-tol)` of 1.
///
/// With `x_k = 2 pi theta^-k |t|`, truncation stops at the first `K` with
/// `x_(K+1) <= 1` and `x_(K+1)^2 / (1 - theta^-2) <= tol`; since
/// `|log cos x| <= x^2` on `|x| <= 1` the tail lies in `[exp(-tol), 1]`.
pub fn mu_hat(theta: &Float, t: &Float, tol: f64) -> Result<MuHatResult> {
    check_tol(tol)?;
    if *theta <= 1 {
        return Err(Error::InvalidArgument(format!("theta must exceed 1, got {}", theta.to_f64())));
    }
    let prec = theta.prec();
    let t = Float::with_val(t.prec(), t.abs_ref());
    if t.is_zero() {
        return Ok(MuHatResult {
            value: Float::with_val(prec, 1),
            error_bound: 0.0,
            truncation_index: 0,
            contains_zero: false,
        });
    }
    let wp = working_prec(prec, &t);
    let theta = Float::with_val(wp, theta);
    let two_pi = Float::with_val(wp, real::pi(wp) * 2u32);
    let inv_sq = Float::with_val(wp, 1u32 - Float::with_val(wp, theta.square_ref()).recip());

    let mut x = Float::with_val(wp, &t);
    let mut value = Float::with_val(wp, 1);
    let mut smallest = f64::INFINITY;
    let mut k: u64 = 0;
    loop {
        let factor = real::cos_two_pi(&x);
        let f = factor.to_f64().abs();
        if f < smallest {
            smallest = f;
        }
        value *= &factor;
        x /= &theta;
        let arg = Float::with_val(wp, &two_pi * &x);
        if arg <= 1 {
            let tail = Float::with_val(wp, arg.square_ref()) / &inv_sq;
            if tail <= tol {
                break;
            }
        }
        k += 1;
    }
    // each factor carries a few ulps; t theta^-k carries k roundings
    let rounding = (k as f64 + 4.0) * (k as f64 + 4.0) * real::pow2_f64(-(wp as i32 - 4));
    if smallest < FACTOR_FLOOR {
        let bound = value.to_f64().abs().max(smallest) + rounding;
        return Ok(MuHatResult {
            value: Float::with_val(prec, 0),
            error_bound: bound,
            truncation_index: k,
            contains_zero: true,
        });
    }
    let error_bound = tol * value.to_f64().abs() + rounding;
    Ok(MuHatResult {
        value: Float::with_val(prec, &value),
        error_bound,
        truncation_index: k,
        contains_zero: false,
    })
}

/// `prod_{j>=0} |cos(2 pi x theta^-j)| = |mu_hat(x)|`.
pub fn tail(theta: &Float, x: &Float, tol: f64) -> Result<(Float, f64)> {
    let r = mu_hat(theta, x, tol)?;
    Ok((r.abs_value(), r.error_bound))
}

/// Double-precision evaluator with the powers `theta^-k` tabulated once.
#[derive(Debug, Clone)]
pub struct FastMuHat {
    inv_pows: Vec<f64>,
    inv_sq: f64,
}

impl FastMuHat {
    pub fn new(theta: &Float) -> Self {
        let wp = theta.prec().max(128);
        let th = Float::with_val(wp, theta);
        let mut p = Float::with_val(wp, 1);
        let mut inv_pows = Vec::new();
        // enough powers for t up to 2^60 at 1e-20 tolerance
        while inv_pows.len() < 4096 {
            let v = p.to_f64();
            if v < 1e-40 {
                break;
            }
            inv_pows.push(v);
            p /= &th;
        }
        let t = theta.to_f64();
        FastMuHat { inv_pows, inv_sq: 1.0 - 1.0 / (t * t) }
    }

    /// `(value, contains_zero)`; a factor counts as zero when its reduced
    /// argument is within rounding of `+-1/4`.
    pub fn eval(&self, t: f64) -> (f64, bool) {
        let t = t.abs();
        if t == 0.0 {
            return (1.0, false);
        }
        let ulp = t * f64::EPSILON * 4.0;
        let tau = std::f64::consts::TAU;
        let mut value = 1.0;
        for (k, ip) in self.inv_pows.iter().enumerate() {
            let x = t * ip;
            let frac = x - x.round();
            if (frac.abs() - 0.25).abs() <= ulp * ip.max(f64::EPSILON) + 4.0 * f64::EPSILON {
                return (0.0, true);
            }
            value *= (tau * frac).cos();
            if k + 1 < self.inv_pows.len() {
                let next = tau * t * self.inv_pows[k + 1];
                if next <= 1.0 && next * next / self.inv_sq <= 1e-17 {
                    break;
                }
            }
        }
        (value, false)
    }
}

/// `mu_hat(t)` in double precision.
pub fn mu_hat_fast(theta: f64, t: f64) -> f64 {
    FastMuHat::new(&Float::with_val(64, theta)).eval(t).0
}

/// How the sample points `t = r n` are formed.
#[derive(Debug, Clone)]
pub enum Scale {
    /// `r` in `Q(theta)`, embedded through the real embedding.
    Field(FieldElement),
    /// An arbitrary real `r`.
    Real(Float),
}

impl Scale {
    pub fn to_float(&self, p: &PisotNumber) -> Float {
        match self {
            Scale::Field(f) => p.embed_field_real(f),
            Scale::Real(x) => x.clone(),
        }
    }

    /// Field elements as `a0/q0,a1/q1,...`, reals as decimals.
    pub fn label(&self) -> String {
        match self {
            Scale::Field(f) => f.to_string(),
            Scale::Real(x) => real::format_float(x, 17),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Scale::Real(_))
    }

    /// Parses a field-element string, or a decimal when the string contains a
    /// `.` or an exponent.
    pub fn parse(s: &str, degree: usize, prec: u32) -> Result<Self> {
        let s = s.trim();
        if s.contains('.') || s.contains('e') || s.contains('E') {
            Ok(Scale::Real(real::parse_float(s, prec)?))
        } else {
            Ok(Scale::Field(FieldElement::parse(s, degree)?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesItem {
    pub n: u64,
    pub t: Float,
    pub value: Float,
    pub error_bound: f64,
    pub contains_zero: bool,
}

/// `mu_hat(r n)` for `n = 1..=n_max`, ordered by `n`. Evaluation runs in
/// parallel; the fast path is bit-reproducible because each item is computed
/// independently in a fixed operation order.
pub fn coefficient_series(
    p: &PisotNumber,
    r: &Scale,
    n_max: u64,
    tol: f64,
    fast: bool,
) -> Result<Vec<SeriesItem>> {
    check_tol(tol)?;
    let r_val = r.to_float(p);
    if r_val <= 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if fast {
        let ev = FastMuHat::new(p.theta());
        let rf = r_val.to_f64();
        return Ok((1..=n_max)
            .into_par_iter()
            .map(|n| {
                let t = rf * n as f64;
                let (v, z) = ev.eval(t);
                SeriesItem {
                    n,
                    t: Float::with_val(53, t),
                    value: Float::with_val(53, v),
                    error_bound: FAST_TOL,
                    contains_zero: z,
                }
            })
            .collect());
    }
    let wp = p.working_prec();
    let theta = p.theta();
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let t = Float::with_val(wp, &r_val * n);
            let res = mu_hat(theta, &t, tol)?;
            Ok(SeriesItem {
                n,
                t,
                value: res.value,
                error_bound: res.error_bound,
                contains_zero: res.contains_zero,
            })
        })
        .collect()
}

/// `|mu_hat(r n)|` in double precision for every `n` in `ns`.
pub fn fast_moduli(theta: &Float, r: f64, ns: &[u64]) -> Vec<f64> {
    let ev = FastMuHat::new(theta);
    ns.par_iter().map(|&n| ev.eval(r * n as f64).0.abs()).collect()
}

/// Largest deviation between the fast and precise paths over at most
/// `count` evenly spaced points of `ns`.
pub fn validate_fast(theta: &Float, r: &Float, ns: &[u64], count: usize) -> Result<f64> {
    if ns.is_empty() {
        return Ok(0.0);
    }
    let step = (ns.len() / count.max(1)).max(1);
    let picks: Vec<u64> = ns.iter().step_by(step).copied().collect();
    let ev = FastMuHat::new(theta);
    let rf = r.to_f64();
    let devs = picks
        .par_iter()
        .map(|&n| {
            // the fast path sees t rounded to a double, so compare at that t
            let tf = rf * n as f64;
            let precise = mu_hat(theta, &Float::with_val(theta.prec(), tf), 1e-20)?;
            let (fast, _) = ev.eval(tf);
            Ok((fast - precise.value.to_f64()).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

pub fn write_series_csv<W: Write>(items: &[SeriesItem], digits: usize, mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,t,value,error_bound,contains_zero")?;
    for it in items {
        writeln!(
            w,
            "{},{},{},{:e},{}",
            it.n,
            real::format_float(&it.t, digits),
            real::format_float(&it.value, digits),
            it.error_bound,
            it.contains_zero
        )?;
    }
    Ok(())
}

/// `K_j = <y theta^j>` and `delta_j = y theta^j - K_j` for `j = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitTrace {
    pub y: Float,
    pub n: usize,
    pub k: Vec<Integer>,
    pub delta: Vec<Float>,
    pub threshold: f64,
    /// 1-based indices `j` with `|delta_j| > threshold`.
    pub exceed_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitTraceRecord {
    pub y: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Vec<String>,
    pub delta: Vec<String>,
    pub threshold: f64,
    pub exceed_set: Vec<usize>,
}

impl DigitTrace {
    pub fn to_record(&self, digits: usize) -> DigitTraceRecord {
        DigitTraceRecord {
            y: real::format_float(&self.y, digits),
            n: self.n,
            k: self.k.iter().map(|k| k.to_string()).collect(),
            delta: self.delta.iter().map(|d| real::format_float(d, digits)).collect(),
            threshold: self.threshold,
            exceed_set: self.exceed_set.clone(),
        }
    }
}

/// Digit trace of `y in [1, theta)`; the exceed set is taken against
/// `threshold`, or `delta_max` when `None`.
pub fn digit_trace(p: &PisotNumber, y: &Float, n: usize, threshold: Option<f64>) -> Result<DigitTrace> {
    let wp = p.working_prec();
    let theta = Float::with_val(wp, p.theta());
    if *y < 1 || *y >= theta {
        return Err(Error::InvalidArgument(format!("y = {} is outside [1, theta)", y.to_f64())));
    }
    let dmax = p.delta_max().to_f64();
    let threshold = threshold.unwrap_or(dmax);
    if threshold > dmax {
        return Err(Error::InvalidDelta { delta: threshold, max: p.delta_max().to_string() });
    }
    let log_bound = n as f64 * p.theta_f64().log2() + 2.0 - p.precision_bits() as f64;
    if log_bound >= -2.0 {
        return Err(Error::PrecisionExhausted(format!(
            "2^-{} * theta^{n} is not below 1/4",
            p.precision_bits()
        )));
    }
    let tie_tol = Float::with_val(wp, Float::i_exp(1, -(p.precision_bits() as i32 / 2)));
    let mut x = Float::with_val(wp, y);
    let mut k = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut exceed_set = Vec::new();
    for j in 1..=n {
        x *= &theta;
        let (kj, dj) = real::nearest_integer(&x);
        let gap = Float::with_val(wp, dj.abs_ref()) - 0.5f64;
        if gap.abs() < tie_tol {
            return Err(Error::AmbiguousRounding {
                tolerance: real::pow2_f64(-(p.precision_bits() as i32 / 2)),
            });
        }
        if dj.to_f64().abs() > threshold {
            exceed_set.push(j);
        }
        k.push(kj);
        delta.push(dj);
    }
    Ok(DigitTrace { y: y.clone(), n, k, delta, threshold, exceed_set })
}

/// Indices `j` (1-based) inside a run of `|delta| <= delta` where
/// `K_(j+m) = d_1 K_(j+m-1) + ... + d_m K_j` fails. Empty whenever
/// `delta < delta_max`.
pub fn check_recurrence(trace: &DigitTrace, p: &PisotNumber, delta: f64) -> Result<Vec<usize>> {
    let dmax = p.delta_max();
    let dq = Rational::from_f64(delta).ok_or(Error::InvalidDelta { delta, max: dmax.to_string() })?;
    if delta <= 0.0 || dq >= *dmax {
        return Err(Error::InvalidDelta { delta, max: dmax.to_string() });
    }
    let m = p.degree();
    let d = p.poly().d();
    let small: Vec<bool> = trace.delta.iter().map(|x| x.to_f64().abs() <= delta).collect();
    let mut violations = Vec::new();
    let mut start = 0;
    while start < small.len() {
        if !small[start] {
            start += 1;
            continue;
        }
        let mut end = start;
        while end < small.len() && small[end] {
            end += 1;
        }
        // run covers 0-based [start, end)
        if end - start > m {
            for j in start..end - m {
                let mut rhs = Integer::new();
                for (i, di) in d.iter().enumerate() {
                    rhs += Integer::from(di * &trace.k[j + m - 1 - i]);
                }
                if rhs != trace.k[j + m] {
                    violations.push(j + 1);
                }
            }
        }
        start = end;
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pisot::build_pisot;
    use proptest::prelude::*;

    fn f(x: f64) -> Float {
        Float::with_val(256, x)
    }

    fn sinc_oracle(t: &Float) -> Float {
        let arg = Float::with_val(256, real::pi(256) * t) * 4u32;
        Float::with_val(256, arg.clone().sin() / arg)
    }

    #[test]
    fn zero_argument_is_one() {
        let r = mu_hat(&f(1.7), &f(0.0), 1e-20).unwrap();
        assert_eq!(r.value, 1);
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn theta_two_matches_sinc() {
        let r = mu_hat(&f(2.0), &f(0.3), 1e-20).unwrap();
        let expect = sinc_oracle(&f(0.3));
        let diff = Float::with_val(256, &r.value - &expect).abs().to_f64();
        assert!(diff <= r.error_bound + 1e-20, "diff {diff}");
        assert!((r.value.to_f64() + 0.155_914_880_631_439_8).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert_eq!(mu_hat(&f(2.0), &f(1.0), 0.0), Err(Error::InvalidTolerance(0.0)));
        assert_eq!(mu_hat(&f(2.0), &f(1.0), 0.5), Err(Error::InvalidTolerance(0.5)));
    }

    #[test]
    fn golden_values_against_mpmath() {
        // frozen from an independent 300-bit evaluation
        let p = build_pisot(&[1, 1], 256).unwrap();
        let r = mu_hat(p.theta(), &f(98209.0), 1e-20).unwrap();
        assert!((r.value.to_f64() - 0.042_497_423_403_582_857).abs() < 1e-16);
        let r = mu_hat(p.theta(), &f(930249.0), 1e-20).unwrap();
        assert!((r.value.to_f64() + 0.006_613_493_035_398_379).abs() < 1e-16);
    }

    #[test]
    fn zeros_at_theta_power_quarters() {
        let p = build_pisot(&[1, 1], 256).unwrap();
        for n in 1..=10u32 {
            let t = Float::with_val(288, rug::ops::Pow::pow(p.theta(), n)) / 4u32;
            let r = mu_hat(p.theta(), &t, 1e-20).unwrap();
            assert!(r.contains_zero);
            assert!(r.value.to_f64().abs() <= r.error_bound);
        }
    }

    #[test]
    fn fast_path_agrees_with_precise() {
        let p = build_pisot(&[1, 1], 256).unwrap();
        let ns: Vec<u64> = (1..=2000).map(|i| i * 499).collect();
        let dev = validate_fast(p.theta(), &f(1.0), &ns, 200).unwrap();
        assert!(dev < 1e-9, "{dev}");
        let fast = FastMuHat::new(&f(2.0));
        assert_eq!(fast.eval(3.0), (0.0, true));
    }

    #[test]
    fn golden_trace_for_y_one() {
        let p = build_pisot(&[1, 1], 256).unwrap();
        let tr = digit_trace(&p, &f(1.0), 10, None).unwrap();
        let k: Vec<i64> = tr.k.iter().map(|k| k.to_i64().unwrap()).collect();
        assert_eq!(k, vec![2, 3, 4, 7, 11, 18, 29, 47, 76, 123]);
        assert_eq!(tr.exceed_set, vec![1, 2]);
        assert!((tr.delta[0].to_f64() + 0.381_966_011_250_105_1).abs() < 1e-15);
    }

    #[test]
    fn integer_theta_trace_is_exact() {
        let p = build_pisot(&[3], 128).unwrap();
        let tr = digit_trace(&p, &Float::with_val(128, 1), 5, None).unwrap();
        for (j, kj) in tr.k.iter().enumerate() {
            assert_eq!(*kj, Integer::from(Integer::u_pow_u(3, j as u32 + 1)));
            assert!(tr.delta[j].is_zero());
        }
        assert!(check_recurrence(&tr, &p, 0.2).unwrap().is_empty());
    }

    #[test]
    fn lucas_recurrence_holds() {
        let p = build_pisot(&[1, 1], 256).unwrap();
        let tr = digit_trace(&p, &f(1.0), 30, None).unwrap();
        assert!(check_recurrence(&tr, &p, 0.3).unwrap().is_empty());
        assert!(matches!(check_recurrence(&tr, &p, 1.0 / 3.0 + 1e-9), Err(Error::InvalidDelta { .. })));
        assert!(matches!(check_recurrence(&tr, &p, 0.0), Err(Error::InvalidDelta { .. })));
    }

    #[test]
    fn recurrence_check_flags_corrupted_traces() {
        let p = build_pisot(&[1, 1], 256).unwrap();
        let mut tr = digit_trace(&p, &f(1.0), 30, None).unwrap();
        tr.k[20] += 1;
        assert!(!check_recurrence(&tr, &p, 0.3).unwrap().is_empty());
    }

    #[test]
    fn series_theta_two_is_zero_at_integers() {
        let p = build_pisot(&[2], 256).unwrap();
        let s = coefficient_series(&p, &Scale::Field(FieldElement::rational(1, 1)), 4, 1e-20, false).unwrap();
        for it in &s {
            assert!(it.contains_zero || it.value.to_f64().abs() <= it.error_bound);
        }
        let mut csv = Vec::new();
        write_series_csv(&s, 20, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("n,t,value,error_bound,contains_zero\n1,"));
        assert_eq!(text.lines().count(), 5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn scale_identity(t in 0.01f64..500.0) {
            let theta = Float::with_val(256, 1.5f64.sqrt() + 0.7);
            let tt = Float::with_val(256, t);
            let a = mu_hat(&theta, &tt, 1e-20).unwrap();
            let scaled = Float::with_val(256, &theta * &tt);
            let b = mu_hat(&theta, &scaled, 1e-20).unwrap();
            let c = real::cos_two_pi(&scaled);
            let lhs = b.value.to_f64();
            let rhs = (c * &a.value).to_f64();
            prop_assert!((lhs - rhs).abs() <= a.error_bound + b.error_bound + 1e-30);
        }

        #[test]
        fn evenness(t in -1e4f64..1e4) {
            let theta = Float::with_val(128, 1.618);
            let a = mu_hat(&theta, &Float::with_val(128, t), 1e-20).unwrap();
            let b = mu_hat(&theta, &Float::with_val(128, -t), 1e-20).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
