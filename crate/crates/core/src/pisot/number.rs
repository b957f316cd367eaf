use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use super::element::{FieldElement, RingElement};
use super::poly::{qpoly, MinimalPolynomial};
use super::roots::refined_roots;
use crate::error::{Error, Result};
use crate::real::{self, Complex, GUARD_BITS};

/// Conjugates must stay this far inside the unit circle: `|theta_i| < 1 - 2^-20`.
pub const PISOT_MARGIN_LOG2: i32 = -20;

/// A certified Pisot number: dominant real root `theta > 1` of a monic
/// integer polynomial whose other roots lie strictly inside the unit disk.
///
/// Such a polynomial with nonzero constant term is automatically irreducible:
/// a factor not vanishing at `theta` would have integer constant term of
/// modulus `< 1`, hence zero.
#[derive(Debug, Clone)]
pub struct PisotNumber {
    poly: MinimalPolynomial,
    theta: Float,
    conjugates: Vec<Complex>,
    rho: Float,
    delta_max: Rational,
    precision_bits: u32,
    power_sums: Vec<Integer>,
}

/// Nearest integer `K` and remainder `delta in (-1/2, 1/2]` of a real number.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestInt {
    pub k: Integer,
    pub delta: Float,
}

/// Distances `||z theta^j||` together with the decay constant
/// `C_z = sum_{i>=2} |sigma_i(z)|`.
#[derive(Debug, Clone)]
pub struct DistDecay {
    pub distances: Vec<Float>,
    pub c_z: Float,
    pub rho: Float,
}

impl DistDecay {
    /// Indices `j` where `C_z rho^j < 1/2` but `||z theta^j||` exceeds the bound
    /// by more than the rounding slack `2^-(prec/2)`.
    pub fn violations(&self) -> Vec<usize> {
        let prec = self.c_z.prec();
        let slack = Float::with_val(prec, Float::i_exp(1, -(prec as i32 / 2)));
        let mut bound = self.c_z.clone();
        let mut out = Vec::new();
        for (j, d) in self.distances.iter().enumerate() {
            if bound < 0.5 && *d > Float::with_val(prec, &bound + &slack) {
                out.push(j);
            }
            bound *= &self.rho;
        }
        out
    }
}

impl PisotNumber {
    /// Certifies `x^m - d_1 x^(m-1) - ... - d_m` as a Pisot polynomial and
    /// computes its roots to `precision_bits`.
    pub fn new(poly: MinimalPolynomial, precision_bits: u32) -> Result<Self> {
        if precision_bits < 64 {
            return Err(Error::InvalidArgument(format!(
                "precision_bits must be at least 64, got {precision_bits}"
            )));
        }
        let g = poly.derivative_gcd_degree();
        if g > 0 {
            return Err(Error::NotSquarefree(g));
        }
        let roots = refined_roots(&poly, precision_bits)?;
        let threshold = 1.0 - 2f64.powi(-PISOT_MARGIN_LOG2.abs());
        let big: Vec<&Complex> = roots.iter().filter(|z| z.abs().to_f64() >= threshold).collect();
        match big.len() {
            0 => {
                return Err(Error::NoDominantRealRoot(format!(
                    "{poly}: every root lies inside the unit disk"
                )))
            }
            1 => {}
            n => {
                return Err(Error::NotPisot(format!(
                    "{poly}: {n} roots have modulus >= 1 - 2^-20"
                )))
            }
        }
        let dominant = big[0];
        if !dominant.is_real() || dominant.re <= 1 {
            return Err(Error::NoDominantRealRoot(format!(
                "{poly}: the only root outside the unit disk is {:?}",
                dominant.to_f64_pair()
            )));
        }
        // sorted by decreasing modulus, so the dominant root is first
        let theta = roots[0].re.clone();
        let conjugates: Vec<Complex> = roots[1..].to_vec();
        let rho = conjugates
            .iter()
            .map(|z| z.abs())
            .fold(Float::new(precision_bits), |a, b| if b > a { b } else { a });
        let delta_max = Rational::from((Integer::from(1), poly.height_sum()));
        let power_sums = poly.power_sums(poly.degree());
        Ok(PisotNumber { poly, theta, conjugates, rho, delta_max, precision_bits, power_sums })
    }

    pub fn poly(&self) -> &MinimalPolynomial {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn theta(&self) -> &Float {
        &self.theta
    }

    pub fn theta_f64(&self) -> f64 {
        self.theta.to_f64()
    }

    /// `theta_2..theta_m`.
    pub fn conjugates(&self) -> &[Complex] {
        &self.conjugates
    }

    pub fn rho(&self) -> &Float {
        &self.rho
    }

    /// `(1 + |d_1| + ... + |d_m|)^-1`; admissible recurrence thresholds are strictly below it.
    pub fn delta_max(&self) -> &Rational {
        &self.delta_max
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub(crate) fn working_prec(&self) -> u32 {
        self.precision_bits + GUARD_BITS
    }

    /// Root `which` (1-based, 1 = theta) at working precision.
    pub fn root(&self, which: usize) -> Result<Complex> {
        let wp = self.working_prec();
        match which {
            1 => Ok(Complex::from_real(Float::with_val(wp, &self.theta))),
            i if i >= 2 && i <= self.degree() => {
                let mut z = self.conjugates[i - 2].clone();
                z.set_prec(wp);
                Ok(z)
            }
            i => Err(Error::InvalidArgument(format!(
                "embedding index {i} out of range 1..={}",
                self.degree()
            ))),
        }
    }

    // ---- exact ring and field arithmetic ----

    pub fn zero(&self) -> RingElement {
        RingElement::zero(self.degree())
    }

    pub fn one(&self) -> RingElement {
        RingElement::one(self.degree())
    }

    pub fn ring_add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        a + b
    }

    pub fn ring_mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let m = self.degree();
        assert!(a.degree() == m && b.degree() == m, "ring element degree mismatch");
        let mut prod = vec![Integer::new(); 2 * m - 1];
        for (i, ai) in a.coeffs().iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs().iter().enumerate() {
                prod[i + j] += Integer::from(ai * bj);
            }
        }
        RingElement::from_coeffs(self.poly.reduce(prod))
    }

    /// `theta^j` reduced modulo the minimal polynomial.
    pub fn theta_pow(&self, j: u64) -> RingElement {
        let m = self.degree();
        if m == 1 {
            return RingElement::from_coeffs(vec![self.poly.d()[0].clone().pow(j as u32)]);
        }
        let mut base = RingElement::from_coeffs(self.poly.reduce({
            let mut c = vec![Integer::new(); 2];
            c[1] = Integer::from(1);
            c
        }));
        let mut acc = self.one();
        let mut e = j;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.ring_mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.ring_mul(&base, &base);
            }
        }
        acc
    }

    /// `x * theta^j`, by shifting when `j` is small.
    pub fn mul_theta_pow(&self, x: &RingElement, j: u64) -> RingElement {
        if j <= 4 * self.degree() as u64 {
            let mut c = vec![Integer::new(); j as usize];
            c.extend(x.coeffs().iter().cloned());
            RingElement::from_coeffs(self.poly.reduce(c))
        } else {
            self.ring_mul(x, &self.theta_pow(j))
        }
    }

    pub fn field_mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let (na, da) = a.to_scaled_ring();
        let (nb, db) = b.to_scaled_ring();
        let prod = self.ring_mul(&na, &nb);
        let den = Integer::from(&da * &db);
        FieldElement::from_coeffs(
            prod.coeffs().iter().map(|c| Rational::from((c.clone(), den.clone()))).collect(),
        )
    }

    pub fn field_mul_ring(&self, a: &FieldElement, b: &RingElement) -> FieldElement {
        self.field_mul(a, &b.to_field())
    }

    /// Exact inverse in `Q(theta)` via the extended Euclidean algorithm against
    /// the minimal polynomial.
    pub fn field_invert(&self, r: &FieldElement) -> Result<FieldElement> {
        if r.is_zero() {
            return Err(Error::ZeroDivision);
        }
        let m = self.degree();
        let f = self.poly.ascending_rational();
        let (g, s) = qpoly::ext_gcd_mod(r.coeffs(), &f);
        if qpoly::degree(&g) != Some(0) {
            // only possible for a reducible modulus
            return Err(Error::ZeroDivision);
        }
        let g0 = g[0].clone();
        let (_, s) = qpoly::divrem(&s, &f);
        let mut coeffs: Vec<Rational> = s.iter().map(|c| Rational::from(c / &g0)).collect();
        coeffs.resize(m, Rational::new());
        let inv = FieldElement::from_coeffs(coeffs);
        debug_assert!(self.field_mul(r, &inv).is_one());
        Ok(inv)
    }

    /// `1 / f'(theta)`; `Z[theta]` scaled by it is the trace-dual lattice,
    /// the set of `z` with `Tr(z theta^j)` an integer for every `j >= 0`.
    pub fn inverse_different(&self) -> FieldElement {
        let asc = self.poly.ascending();
        let m = self.degree();
        let mut deriv: Vec<Integer> = (1..=m).map(|i| Integer::from(&asc[i] * i as u32)).collect();
        deriv.resize(m, Integer::new());
        let fp = RingElement::from_coeffs(self.poly.reduce(deriv));
        self.field_invert(&fp.to_field()).expect("f'(theta) is nonzero for squarefree f")
    }

    // ---- traces ----

    /// `Tr(x)`, an integer for `x` in `Z[theta]`.
    pub fn trace(&self, x: &RingElement) -> Integer {
        x.coeffs()
            .iter()
            .zip(&self.power_sums)
            .fold(Integer::new(), |acc, (c, p)| acc + Integer::from(c * p))
    }

    pub fn trace_field(&self, x: &FieldElement) -> Rational {
        x.coeffs()
            .iter()
            .zip(&self.power_sums)
            .fold(Rational::new(), |acc, (c, p)| acc + Rational::from(c * p))
    }

    /// `Tr(z theta^j)` integral for `j = 0..m-1`, which by the recurrence
    /// extends to every `j >= 0`.
    pub fn in_dual_lattice(&self, z: &FieldElement) -> bool {
        let (num, den) = z.to_scaled_ring();
        (0..self.degree() as u64).all(|j| {
            let t = self.trace(&self.mul_theta_pow(&num, j));
            t.is_divisible(&den)
        })
    }

    // ---- embeddings ----

    /// `sum_i coeffs_i * theta_which^i` at working precision (1-based index).
    pub fn embed(&self, x: &RingElement, which: usize) -> Result<Complex> {
        let z = self.root(which)?;
        let wp = z.prec();
        let mut acc = Complex::zero(wp);
        for c in x.coeffs().iter().rev() {
            acc = acc.mul(&z);
            acc.re += c;
        }
        Ok(acc)
    }

    pub fn embed_field(&self, x: &FieldElement, which: usize) -> Result<Complex> {
        let z = self.root(which)?;
        let wp = z.prec();
        let mut acc = Complex::zero(wp);
        for c in x.coeffs().iter().rev() {
            acc = acc.mul(&z);
            acc.re += c;
        }
        Ok(acc)
    }

    pub fn embed_real(&self, x: &RingElement) -> Float {
        self.embed(x, 1).expect("index 1 is valid").re
    }

    pub fn embed_field_real(&self, x: &FieldElement) -> Float {
        self.embed_field(x, 1).expect("index 1 is valid").re
    }

    /// All non-real-embedding images `sigma_i(x)`, `i = 2..m`.
    pub fn conjugate_images(&self, x: &FieldElement) -> Vec<Complex> {
        (2..=self.degree())
            .map(|i| self.embed_field(x, i).expect("valid index"))
            .collect()
    }

    /// `sum_{i>=2} sigma_i(x) theta_i^j` (real, since conjugates pair up).
    pub fn conjugate_tail(&self, images: &[Complex], j: u64) -> Float {
        let wp = self.working_prec();
        let mut s = Float::new(wp);
        for (img, root) in images.iter().zip(&self.conjugates) {
            let mut r = root.clone();
            r.set_prec(wp);
            s += img.mul(&r.pow(j)).re;
        }
        s
    }

    /// `C_z = sum_{i>=2} |sigma_i(z)|`.
    pub fn decay_constant(&self, z: &FieldElement) -> Float {
        let wp = self.working_prec();
        self.conjugate_images(z)
            .iter()
            .fold(Float::new(wp), |acc, c| acc + c.abs())
    }

    // ---- nearest integers ----

    fn ambiguity_tol(&self) -> Float {
        Float::with_val(self.working_prec(), Float::i_exp(1, -(self.precision_bits as i32 / 2)))
    }

    fn check_ambiguity(&self, delta: &Float) -> Result<()> {
        let half_gap = Float::with_val(delta.prec(), delta.abs_ref()) - 0.5f64;
        if half_gap.abs() < self.ambiguity_tol() {
            return Err(Error::AmbiguousRounding {
                tolerance: real::pow2_f64(-(self.precision_bits as i32 / 2)),
            });
        }
        Ok(())
    }

    /// Rounds `q - s` where `q` is exact and `s` a (small) real.
    pub(crate) fn round_exact_minus(&self, q: &Rational, s: &Float) -> Result<NearestInt> {
        let wp = self.working_prec();
        let floor = q.clone().floor().numer().clone();
        let frac = Rational::from(q - &floor);
        let small = Float::with_val(wp, &frac) - s;
        let (k_small, delta) = real::nearest_integer(&small);
        self.check_ambiguity(&delta)?;
        Ok(NearestInt { k: floor + k_small, delta })
    }

    /// Nearest integer to `x theta^j` and its remainder, computed by the
    /// conjugate-trace route and cross-checked against the direct embedding.
    pub fn nearest_int_data(&self, x: &RingElement, j: u64) -> Result<NearestInt> {
        let wp = self.working_prec();
        // direct route needs 2^-prec * theta^j * ||x|| < 1/4
        let theta = self.theta_f64();
        let norm: f64 = x
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_f64().abs() * theta.powi(i as i32))
            .sum();
        if norm > 0.0 {
            let log_bound = norm.log2() + j as f64 * theta.log2() - self.precision_bits as f64;
            if log_bound >= -2.0 {
                return Err(Error::PrecisionExhausted(format!(
                    "2^-{} * theta^{j} * ||x|| = 2^{log_bound:.1} is not below 1/4",
                    self.precision_bits
                )));
            }
        }
        let w = self.mul_theta_pow(x, j);

        // trace route
        let images = self.conjugate_images(&x.to_field());
        let tail = self.conjugate_tail(&images, j);
        let trace = Rational::from(self.trace(&w));
        let via_trace = self.round_exact_minus(&trace, &tail)?;

        // direct route
        let direct = Float::with_val(wp, self.embed_real(&w));
        let (k_direct, delta_direct) = real::nearest_integer(&direct);
        let diff = Float::with_val(wp, &delta_direct - &via_trace.delta).abs();
        if k_direct != via_trace.k || diff > self.ambiguity_tol() {
            return Err(Error::RouteMismatch(format!(
                "x theta^{j}: direct ({k_direct}, {}) vs trace ({}, {})",
                delta_direct.to_f64(),
                via_trace.k,
                via_trace.delta.to_f64()
            )));
        }
        Ok(via_trace)
    }

    /// Direct-embedding half of [`Self::nearest_int_data`] on its own.
    pub fn nearest_int_direct(&self, x: &RingElement, j: u64) -> NearestInt {
        let w = self.mul_theta_pow(x, j);
        let (k, delta) = real::nearest_integer(&self.embed_real(&w));
        NearestInt { k, delta }
    }

    /// Trace-route half of [`Self::nearest_int_data`] on its own.
    pub fn nearest_int_trace(&self, x: &RingElement, j: u64) -> Result<NearestInt> {
        let w = self.mul_theta_pow(x, j);
        let images = self.conjugate_images(&x.to_field());
        let tail = self.conjugate_tail(&images, j);
        self.round_exact_minus(&Rational::from(self.trace(&w)), &tail)
    }

    /// Nearest integer to an arbitrary field element, through its exact trace.
    pub fn nearest_int_field(&self, u: &FieldElement) -> Result<NearestInt> {
        let images = self.conjugate_images(u);
        let tail = self.conjugate_tail(&images, 0);
        self.round_exact_minus(&self.trace_field(u), &tail)
    }

    /// `||z theta^j||` for `j = 0..=j_max` and the constant `C_z`.
    pub fn dist_decay(&self, z: &RingElement, j_max: u64) -> Result<DistDecay> {
        let distances = (0..=j_max)
            .map(|j| self.nearest_int_data(z, j).map(|n| n.delta.abs()))
            .collect::<Result<Vec<_>>>()?;
        let mut rho = self.rho.clone();
        rho.set_prec(self.working_prec());
        Ok(DistDecay { distances, c_z: self.decay_constant(&z.to_field()), rho })
    }

    // ---- serialization ----

    pub fn to_record(&self) -> PisotRecord {
        let digits = real::decimal_digits(self.precision_bits);
        PisotRecord {
            d: self.poly.d().iter().map(|c| c.to_i64().expect("coefficient fits i64")).collect(),
            theta: real::format_float(&self.theta, digits),
            conjugates: self
                .conjugates
                .iter()
                .map(|z| [real::format_float(&z.re, digits), real::format_float(&z.im, digits)])
                .collect(),
            rho: real::format_float(&self.rho, digits),
            delta_max: Some(self.delta_max.to_string()),
            precision_bits: self.precision_bits,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("record serializes")
    }

    /// Rebuilds from a JSON record and checks the recorded `theta` against the
    /// recomputed root.
    pub fn from_json(s: &str) -> Result<Self> {
        let rec: PisotRecord = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let p = build_pisot(&rec.d, rec.precision_bits)?;
        let recorded = real::parse_float(&rec.theta, p.precision_bits)?;
        let digits = real::decimal_digits(p.precision_bits) as i32;
        let tol = Float::with_val(p.precision_bits, 10f64.powi(-(digits - 3)));
        if Float::with_val(p.precision_bits, &recorded - &p.theta).abs() > tol {
            return Err(Error::Parse(format!(
                "recorded theta {} disagrees with the root of {}",
                rec.theta, p.poly
            )));
        }
        Ok(p)
    }
}

/// JSON form of a [`PisotNumber`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PisotRecord {
    pub d: Vec<i64>,
    pub theta: String,
    pub conjugates: Vec<[String; 2]>,
    pub rho: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_max: Option<String>,
    pub precision_bits: u32,
}

/// Certifies the polynomial with recurrence coefficients `d` at the given precision.
pub fn build_pisot(d: &[i64], precision_bits: u32) -> Result<PisotNumber> {
    PisotNumber::new(MinimalPolynomial::new(d.iter().copied())?, precision_bits)
}
