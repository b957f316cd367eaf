//! Predicted limit points of `|mu_hat(r n)|` for `r` in `Q(theta)`: the
//! bi-infinite products `Phi(z) = prod_{j in Z} |cos(pi z theta^j)|`, the limit
//! formula `prod_i Phi(z_i) * tail(r A)`, enumeration of a finite window of
//! such values, and the integer sequences that realize them.

use std::collections::HashMap;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::pisot::{FieldElement, PisotNumber, RingElement};
use crate::real;

/// Default cap on the number of enumerated tuples.
pub const CANDIDATE_CAP: u64 = 1_000_000;

/// Any factor below this modulus (without being exactly zero) makes the
/// product an interval around zero.
pub const FACTOR_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq)]
pub struct ProductValue {
    pub value: Float,
    pub error_bound: f64,
    /// Some factor is exactly zero, detected in exact arithmetic.
    pub degenerate_zero: bool,
    /// Some factor fell below [`FACTOR_FLOOR`]; `value` is 0 and
    /// `error_bound` covers the true value.
    pub contains_zero: bool,
    /// Number of factors multiplied in on the `j < 0` side.
    pub terms_negative: u64,
    /// Number of factors multiplied in on the `j >= 0` side.
    pub terms_positive: u64,
}

impl ProductValue {
    fn exact(value: Float) -> Self {
        ProductValue {
            value,
            error_bound: 0.0,
            degenerate_zero: false,
            contains_zero: false,
            terms_negative: 0,
            terms_positive: 0,
        }
    }
}

/// `prod_{k>=0} |cos(pi x theta^-k)|`, truncated at the first `k` with
/// `y = pi |x| theta^-k <= 1` and `y^2 / (1 - theta^-2) <= tol`.
///
/// Returns `(value, error_bound, factors used, smallest factor)`.
pub fn one_sided(theta: &Float, x: &Float, tol: f64) -> Result<(Float, f64, u64, f64)> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidTolerance(tol));
    }
    let base = theta.prec();
    let e = x.get_exp().unwrap_or(0).max(0) as u32;
    let wp = base + real::GUARD_BITS + e;
    let theta = Float::with_val(wp, theta);
    let pi = real::pi(wp);
    let shrink = Float::with_val(wp, 1u32 - Float::with_val(wp, theta.square_ref()).recip());
    let mut y = Float::with_val(wp, x.abs_ref());
    let mut value = Float::with_val(wp, 1);
    let mut smallest = f64::INFINITY;
    let mut k = 0u64;
    loop {
        let arg = Float::with_val(wp, &pi * &y);
        if arg <= 1 && Float::with_val(wp, arg.square_ref()) / &shrink <= tol {
            break;
        }
        let f = real::abs_cos_pi(&y);
        smallest = smallest.min(f.to_f64());
        value *= f;
        y /= &theta;
        k += 1;
    }
    let rounding = (k as f64 + 4.0).powi(2) * real::pow2_f64(-(wp as i32 - 4));
    let err = tol * value.to_f64() + rounding;
    Ok((Float::with_val(base, value), err, k, smallest))
}

/// `tail(x) = prod_{j>=0} |cos(2 pi x theta^-j)|`, equal to `|mu_hat(x)|`.
pub fn tail(p: &PisotNumber, x: &Float, tol: f64) -> Result<(Float, f64)> {
    let two_x = Float::with_val(x.prec(), x * 2u32);
    let theta = Float::with_val(p.working_prec(), p.theta());
    let (v, e, _, smallest) = one_sided(&theta, &two_x, tol)?;
    if smallest < FACTOR_FLOOR {
        return Ok((Float::new(v.prec()), smallest.max(e)));
    }
    Ok((v, e))
}

/// `prod_{j in Z} |cos(pi s w theta^j)|` for `s in {1, 2}`, with the `j >= 0`
/// factors taken from the exact traces `Tr(w theta^j)` and the small
/// conjugate sums `sum_{i>=2} sigma_i(w) theta_i^j`.
fn biinfinite(p: &PisotNumber, w: &FieldElement, s: u32, tol: f64) -> Result<ProductValue> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidTolerance(tol));
    }
    let wp = p.working_prec();
    if w.is_zero() {
        return Ok(ProductValue::exact(Float::with_val(p.precision_bits(), 1)));
    }
    let scaled = w.scale(&Rational::from(s));
    if !p.in_dual_lattice(&scaled) {
        return Err(Error::InvalidArgument(format!(
            "{w}: Tr(z theta^j) is not integral, so ||z theta^j|| does not decay"
        )));
    }
    if exact_half_integer_index(p, &scaled, tol)?.is_some() {
        return Ok(ProductValue {
            value: Float::with_val(p.precision_bits(), 0),
            error_bound: 0.0,
            degenerate_zero: true,
            contains_zero: false,
            terms_negative: 0,
            terms_positive: 0,
        });
    }

    // j < 0: prod_{k>=0} |cos(pi s w theta^-1 theta^-k)|
    let theta = Float::with_val(wp, p.theta());
    let x = Float::with_val(wp, p.embed_field_real(w) * s) / &theta;
    let (neg, neg_err, k_neg, neg_small) = one_sided(&theta, &x, tol)?;

    // j >= 0
    let m = p.degree();
    let c = p.decay_constant(w).to_f64() * s as f64 * (1.0 + 1e-12);
    let rho = p.rho().to_f64();
    let pi = std::f64::consts::PI;
    let mut j_plus = 0u64;
    if c > 0.0 {
        let mut y = pi * c;
        while !(y <= 1.0 && y * y / (1.0 - rho * rho) <= tol) {
            y *= rho;
            j_plus += 1;
        }
    }
    let d = p.poly().d();
    let mut traces: Vec<Rational> = (0..m.min(j_plus as usize))
        .map(|j| {
            let wj = p.field_mul_ring(w, &p.theta_pow(j as u64));
            p.trace_field(&wj)
        })
        .collect();
    while traces.len() < j_plus as usize {
        let n = traces.len();
        let mut t = Rational::new();
        for (i, di) in d.iter().enumerate() {
            t += Rational::from(di * &traces[n - 1 - i]);
        }
        traces.push(t);
    }
    let mut powers: Vec<real::Complex> = p.conjugate_images(w);
    let roots: Vec<real::Complex> = (2..=m).map(|i| p.root(i).expect("valid index")).collect();
    let mut pos = Float::with_val(wp, 1);
    let mut pos_small = f64::INFINITY;
    for tr in traces.iter().take(j_plus as usize) {
        let conj: Float = powers.iter().fold(Float::new(wp), |acc, z| acc + &z.re);
        let st = Rational::from(tr * s);
        let frac = &st - st.clone().floor();
        let arg = Float::with_val(wp, &frac) - Float::with_val(wp, &conj * s);
        let f = real::abs_cos_pi(&arg);
        pos_small = pos_small.min(f.to_f64());
        pos *= f;
        for (z, r) in powers.iter_mut().zip(&roots) {
            *z = z.mul(r);
        }
    }
    let smallest = neg_small.min(pos_small);
    let value = Float::with_val(wp, &pos * &neg);
    let rounding = (j_plus as f64 + 4.0).powi(2) * real::pow2_f64(-(wp as i32 - 4));
    if smallest < FACTOR_FLOOR {
        return Ok(ProductValue {
            value: Float::with_val(p.precision_bits(), 0),
            error_bound: smallest.max(value.to_f64()) + rounding + neg_err,
            degenerate_zero: false,
            contains_zero: true,
            terms_negative: k_neg,
            terms_positive: j_plus,
        });
    }
    let v = value.to_f64();
    Ok(ProductValue {
        value: Float::with_val(p.precision_bits(), &value),
        error_bound: tol * v + neg_err + rounding,
        degenerate_zero: false,
        contains_zero: false,
        terms_negative: k_neg,
        terms_positive: j_plus,
    })
}

/// First `j` with `w theta^j` an exact half-integer, scanning the window of
/// indices whose factors are actually evaluated.
fn exact_half_integer_index(p: &PisotNumber, w: &FieldElement, tol: f64) -> Result<Option<i64>> {
    let is_half = |x: &FieldElement| {
        x.as_rational()
            .map(|q| *q.denom() == 2)
            .unwrap_or(false)
    };
    let m = p.degree();
    // rational multiples of a power of theta only arise this way when m = 1
    // or w itself is a rational multiple of some theta^k; scan both sides
    let theta_f = p.theta_f64();
    let size = p.embed_field_real(w).to_f64().abs().max(1e-300);
    let k_neg = ((size * 4.0 / tol.sqrt()).log(theta_f).ceil().max(0.0) as u64) + 2;
    let inv_theta = p.field_invert(&FieldElement::from(&p.theta_pow(1)))?;
    let mut cur = w.clone();
    for k in 1..=k_neg {
        cur = p.field_mul(&cur, &inv_theta);
        if is_half(&cur) {
            return Ok(Some(-(k as i64)));
        }
    }
    if m > 1 {
        let theta = FieldElement::from(&p.theta_pow(1));
        let mut cur = w.clone();
        for j in 0..=(4 * m as i64 + 64) {
            if is_half(&cur) {
                return Ok(Some(j));
            }
            cur = p.field_mul(&cur, &theta);
        }
    } else if is_half(w) {
        return Ok(Some(0));
    }
    Ok(None)
}

/// `Phi(z) = prod_{j in Z} |cos(pi z theta^j)|` for `z` in `Z[theta]`.
pub fn phi_biinfinite(p: &PisotNumber, z: &RingElement, tol: f64) -> Result<ProductValue> {
    biinfinite(p, &z.to_field(), 1, tol)
}

/// `Phi(z)` for `z` in the trace-dual lattice `{z : Tr(z theta^j) in Z, j >= 0}`,
/// which contains `Z[theta]` and is exactly the set of field elements with
/// `||z theta^j|| -> 0`.
pub fn phi_field(p: &PisotNumber, z: &FieldElement, tol: f64) -> Result<ProductValue> {
    biinfinite(p, z, 1, tol)
}

/// `phi_Lambda(q) = prod_{j in Z} |cos(2 pi Lambda q theta^j)|`.
pub fn phi_lambda(p: &PisotNumber, lambda: &RingElement, q: &RingElement, tol: f64) -> Result<ProductValue> {
    let lq = p.ring_mul(lambda, q);
    biinfinite(p, &lq.to_field(), 2, tol)
}

/// `|phi_Lambda(a + b theta^n) - phi_Lambda(a) phi_Lambda(b)|` and its error bound.
pub fn product_law_residual(
    p: &PisotNumber,
    lambda: &RingElement,
    a: &RingElement,
    b: &RingElement,
    n: u64,
    tol: f64,
) -> Result<(Float, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let q = p.ring_add(a, &p.mul_theta_pow(b, n));
    let fq = phi_lambda(p, lambda, &q, tol)?;
    let fa = phi_lambda(p, lambda, a, tol)?;
    let fb = phi_lambda(p, lambda, b, tol)?;
    let (prod, prod_err) = compose(&[&fa, &fb]);
    let diff = Float::with_val(p.working_prec(), &fq.value - &prod).abs();
    Ok((Float::with_val(p.precision_bits(), diff), fq.error_bound + prod_err))
}

/// Value and error bound of a product of bounded nonnegative factors.
fn compose(parts: &[&ProductValue]) -> (Float, f64) {
    let prec = parts.first().map(|p| p.value.prec()).unwrap_or(64);
    let mut value = Float::with_val(prec, 1);
    let mut upper = 1.0f64;
    let mut lower = 1.0f64;
    for part in parts {
        value *= &part.value;
        let v = part.value.to_f64();
        upper *= (v + part.error_bound).min(1.0);
        lower *= v;
    }
    let err = (upper - lower).max(0.0) + 4.0 * f64::EPSILON * lower;
    (value, err)
}

/// Which coefficient vectors the enumeration turns into `z` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    /// `z = w` in `Z[theta]`.
    #[default]
    Ring,
    /// `z = w / f'(theta)`, the trace-dual lattice.
    Dual,
}

impl std::str::FromStr for Lattice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring" => Ok(Lattice::Ring),
            "dual" => Ok(Lattice::Dual),
            other => Err(Error::Parse(format!("lattice must be ring or dual, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCandidate {
    /// Position in the lexicographic enumeration over `(M, A, z_0, ..., z_M)`.
    pub id: u64,
    pub z: Vec<FieldElement>,
    pub a: i64,
    pub r: FieldElement,
    pub predicted: Float,
    pub error_bound: f64,
}

fn coeff_json(q: &Rational) -> Value {
    if *q.denom() == 1 {
        match q.numer().to_i64() {
            Some(v) => Value::from(v),
            None => Value::from(q.numer().to_string()),
        }
    } else {
        Value::from(q.to_string())
    }
}

fn coeff_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(Rational::from)
            .ok_or_else(|| Error::Parse(format!("coefficient {n} is not an integer"))),
        Value::String(s) => s.parse::<Rational>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))),
        other => Err(Error::Parse(format!("bad coefficient {other}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub z: Vec<Vec<Value>>,
    #[serde(rename = "A")]
    pub a: i64,
    pub r: String,
    pub predicted: String,
    pub error: String,
    pub id: String,
}

impl SpectrumCandidate {
    pub fn to_record(&self, digits: usize) -> CandidateRecord {
        CandidateRecord {
            z: self.z.iter().map(|z| z.coeffs().iter().map(coeff_json).collect()).collect(),
            a: self.a,
            r: self.r.to_string(),
            predicted: real::format_float(&self.predicted, digits),
            error: format!("{:e}", self.error_bound),
            id: self.id.to_string(),
        }
    }

    pub fn from_record(rec: &CandidateRecord, degree: usize, prec: u32) -> Result<Self> {
        let z = rec
            .z
            .iter()
            .map(|zs| {
                let mut c = zs.iter().map(coeff_from_json).collect::<Result<Vec<_>>>()?;
                if c.len() > degree {
                    return Err(Error::Parse(format!("{} coefficients for degree {degree}", c.len())));
                }
                c.resize(degree, Rational::new());
                Ok(FieldElement::from_coeffs(c))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectrumCandidate {
            id: rec.id.parse().map_err(|e| Error::Parse(format!("id {:?}: {e}", rec.id)))?,
            z,
            a: rec.a,
            r: FieldElement::parse(&rec.r, degree)?,
            predicted: real::parse_float(&rec.predicted, prec)?,
            error_bound: rec.error.parse().map_err(|e| Error::Parse(format!("error {:?}: {e}", rec.error)))?,
        })
    }
}

fn check_r(p: &PisotNumber, r: &FieldElement) -> Result<Float> {
    let rv = p.embed_field_real(r);
    if rv <= 0 {
        return Err(Error::InvalidArgument(format!("r = {r} must be positive")));
    }
    Ok(rv)
}

/// `prod_i Phi(z_i) * tail(r A)` for `z_i` in the trace-dual lattice
/// (in particular any `z_i` in `Z[theta]`).
pub fn limit_value(
    p: &PisotNumber,
    z_list: &[FieldElement],
    a: i64,
    r: &FieldElement,
    tol: f64,
) -> Result<SpectrumCandidate> {
    if z_list.is_empty() {
        return Err(Error::InvalidArgument("z_list must not be empty".into()));
    }
    let rv = check_r(p, r)?;
    let mut parts = Vec::with_capacity(z_list.len() + 1);
    for z in z_list {
        parts.push(phi_field(p, z, tol)?);
    }
    parts.push(tail_value(p, &rv, a, tol)?);
    let refs: Vec<&ProductValue> = parts.iter().collect();
    let (predicted, error_bound) = compose(&refs);
    Ok(SpectrumCandidate { id: 0, z: z_list.to_vec(), a, r: r.clone(), predicted, error_bound })
}

fn tail_value(p: &PisotNumber, rv: &Float, a: i64, tol: f64) -> Result<ProductValue> {
    if a == 0 {
        return Ok(ProductValue::exact(Float::with_val(p.precision_bits(), 1)));
    }
    let x = Float::with_val(p.working_prec(), rv * a);
    let (v, e) = tail(p, &x, tol)?;
    Ok(ProductValue { value: v, error_bound: e, ..ProductValue::exact(Float::new(2)) })
}

/// Window of the enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub height: i64,
    pub m_max: usize,
    pub a_max: i64,
    pub lattice: Lattice,
    pub cap: u64,
}

impl Window {
    pub fn new(height: i64, m_max: usize, a_max: i64) -> Self {
        Window { height, m_max, a_max, lattice: Lattice::Ring, cap: CANDIDATE_CAP }
    }

    pub fn with_lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = lattice;
        self
    }

    /// Number of `(M, A, z_0..z_M)` tuples.
    pub fn count(&self, degree: usize) -> u128 {
        let v = (2 * self.height as u128 + 1).pow(degree as u32);
        let a = 2 * self.a_max as u128 + 1;
        (0..=self.m_max as u32).map(|mm| a * v.pow(mm + 1)).sum()
    }
}

/// Every coefficient vector in `[-H, H]^m`, lexicographic.
fn coefficient_vectors(height: i64, m: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * (2 * height as usize + 1));
        for prefix in &out {
            for c in -height..=height {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// All tuples of the window, in enumeration order, with predicted value at
/// least `eta`. No deduplication.
pub fn enumerate_candidates(
    p: &PisotNumber,
    r: &FieldElement,
    window: &Window,
    tol: f64,
    eta: f64,
) -> Result<Vec<SpectrumCandidate>> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    if window.height < 0 || window.a_max < 0 {
        return Err(Error::InvalidArgument("height and A_max must be nonnegative".into()));
    }
    let m = p.degree();
    let total = window.count(m);
    if total > window.cap as u128 {
        return Err(Error::BudgetExceeded { count: total.min(u64::MAX as u128) as u64, cap: window.cap });
    }
    let rv = check_r(p, r)?;
    let basis = match window.lattice {
        Lattice::Ring => FieldElement::rational(1, m),
        Lattice::Dual => p.inverse_different(),
    };
    let vectors = coefficient_vectors(window.height, m);
    let zs: Vec<FieldElement> = vectors
        .iter()
        .map(|v| {
            let w = RingElement::from_i64s(v, m).expect("length m");
            p.field_mul(&w.to_field(), &basis)
        })
        .collect();
    let phis: Vec<ProductValue> = zs
        .par_iter()
        .map(|z| phi_field(p, z, tol))
        .collect::<Result<Vec<_>>>()?;
    let tails: HashMap<i64, ProductValue> = (-window.a_max..=window.a_max)
        .map(|a| tail_value(p, &rv, a, tol).map(|t| (a, t)))
        .collect::<Result<_>>()?;

    let nv = zs.len();
    let mut tuples: Vec<(u64, usize, i64, Vec<usize>)> = Vec::new();
    let mut id = 0u64;
    for mm in 0..=window.m_max {
        for a in -window.a_max..=window.a_max {
            let count = nv.pow(mm as u32 + 1);
            for idx in 0..count {
                let mut digits = Vec::with_capacity(mm + 1);
                let mut rem = idx;
                for _ in 0..=mm {
                    digits.push(rem % nv);
                    rem /= nv;
                }
                digits.reverse();
                tuples.push((id, mm, a, digits));
                id += 1;
            }
        }
    }
    let out: Vec<Option<SpectrumCandidate>> = tuples
        .par_iter()
        .map(|(id, _, a, digits)| {
            let mut parts: Vec<&ProductValue> = digits.iter().map(|&i| &phis[i]).collect();
            parts.push(&tails[a]);
            let (predicted, error_bound) = compose(&parts);
            if predicted.to_f64() < eta {
                return None;
            }
            Some(SpectrumCandidate {
                id: *id,
                z: digits.iter().map(|&i| zs[i].clone()).collect(),
                a: *a,
                r: r.clone(),
                predicted,
                error_bound,
            })
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

/// Distinct predicted values `>= eta` in the window, sorted descending; values
/// within `2 tol` merge into the candidate with the smallest id.
pub fn enumerate_spectrum(
    p: &PisotNumber,
    r: &FieldElement,
    window: &Window,
    tol: f64,
    eta: f64,
) -> Result<Vec<SpectrumCandidate>> {
    let mut all = enumerate_candidates(p, r, window, tol, eta)?;
    all.sort_by(|x, y| {
        y.predicted
            .partial_cmp(&x.predicted)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.id.cmp(&y.id))
    });
    let merge = 2.0 * tol;
    let mut out: Vec<SpectrumCandidate> = Vec::new();
    let mut group_top: Option<Float> = None;
    for c in all {
        match &group_top {
            Some(top) if Float::with_val(top.prec(), top - &c.predicted).to_f64() <= merge => {
                let last = out.last_mut().expect("group has a representative");
                if c.id < last.id {
                    let keep = last.predicted.clone();
                    *last = c;
                    last.predicted = keep;
                }
            }
            _ => {
                group_top = Some(c.predicted.clone());
                out.push(c);
            }
        }
    }
    Ok(out)
}

/// `n_k = <(2r)^-1 (z_0 theta^((M+1)k) + z_1 theta^(Mk) + ... + z_M theta^k)> + A`.
///
/// The exact field element is rounded through its rational trace; the
/// conjugate part is accumulated multiplicatively so it stays accurate even
/// when the coefficients are huge.
pub fn synthesize_sequence(
    p: &PisotNumber,
    z_list: &[FieldElement],
    a: i64,
    r: &FieldElement,
    k: u64,
) -> Result<Integer> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if z_list.is_empty() {
        return Err(Error::InvalidArgument("z_list must not be empty".into()));
    }
    check_r(p, r)?;
    let two_r = r.scale(&Rational::from(2));
    let inv = p.field_invert(&two_r)?;
    let big_m = z_list.len() as u64 - 1;
    let mut sum = FieldElement::zero(p.degree());
    let inv_images = p.conjugate_images(&inv);
    let mut conj = vec![real::Complex::zero(p.working_prec()); p.degree() - 1];
    for (i, z) in z_list.iter().enumerate() {
        let e = (big_m + 1 - i as u64) * k;
        sum = &sum + &p.field_mul_ring(z, &p.theta_pow(e));
        for ((acc, img), idx) in conj.iter_mut().zip(p.conjugate_images(z)).zip(2..) {
            let root = p.root(idx)?;
            *acc = acc.add(&img.mul(&root.pow(e)));
        }
    }
    let u = p.field_mul(&sum, &inv);
    let tail: Float = conj
        .iter()
        .zip(&inv_images)
        .fold(Float::new(p.working_prec()), |s, (c, i)| s + c.mul(i).re);
    let near = p.round_exact_minus(&p.trace_field(&u), &tail)?;
    Ok(near.k + a)
}
