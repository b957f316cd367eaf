//! Big-float helpers shared by every module: a minimal complex type over
//! [`rug::Float`], cosine with argument reduction, and decimal formatting.

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Guard bits added to internal computations on top of the requested precision.
pub const GUARD_BITS: u32 = 32;

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Significant decimal digits that `prec` bits carry.
pub fn decimal_digits(prec: u32) -> usize {
    ((prec as f64) / std::f64::consts::LOG2_10).floor().max(1.0) as usize
}

/// Signed distance of `x` to the nearest integer, in `(-1/2, 1/2]`.
pub fn centered_fraction(x: &Float) -> Float {
    // x - ceil(x - 1/2) lands in (-1/2, 1/2]
    let mut shifted = Float::with_val(x.prec(), x - 0.5f64);
    shifted.ceil_mut();
    Float::with_val(x.prec(), x - &shifted)
}

/// Nearest integer with the `(-1/2, 1/2]` remainder convention.
pub fn nearest_integer(x: &Float) -> (Integer, Float) {
    let mut shifted = Float::with_val(x.prec(), x - 0.5f64);
    shifted.ceil_mut();
    let k = shifted.to_integer().expect("finite value");
    let delta = Float::with_val(x.prec(), x - &k);
    (k, delta)
}

/// `cos(2 pi x)` with `x` reduced modulo 1 before scaling.
pub fn cos_two_pi(x: &Float) -> Float {
    let prec = x.prec();
    let frac = centered_fraction(x);
    let mut arg = pi(prec) * frac;
    arg *= 2u32;
    arg.cos()
}

/// `|cos(pi x)|` with `x` reduced modulo 1 before scaling.
pub fn abs_cos_pi(x: &Float) -> Float {
    let prec = x.prec();
    let frac = centered_fraction(x);
    let arg = pi(prec) * frac;
    arg.cos().abs()
}

/// `2^e` as an `f64`, saturating to the smallest positive normal instead of 0.
pub fn pow2_f64(e: i32) -> f64 {
    2f64.powi(e).max(f64::MIN_POSITIVE)
}

pub fn format_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix_round(10, Some(digits), Round::Nearest)
}

pub fn parse_float(s: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

pub fn rational_to_float(q: &Rational, prec: u32) -> Float {
    Float::with_val(prec, q)
}

/// Complex number over big floats; only the operations root refinement and
/// conjugate embeddings need.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex::new(Float::new(prec), Float::new(prec))
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Complex { re, im }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        Complex::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn set_prec(&mut self, prec: u32) {
        self.re.set_prec(prec);
        self.im.set_prec(prec);
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn add(&self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex::new(
            Float::with_val(p, &self.re + &o.re),
            Float::with_val(p, &self.im + &o.im),
        )
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex::new(
            Float::with_val(p, &self.re - &o.re),
            Float::with_val(p, &self.im - &o.im),
        )
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        let p = self.prec();
        if self.is_real() && o.is_real() {
            return Complex::from_real(Float::with_val(p, &self.re * &o.re));
        }
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        Complex::new(rr - ii, ri + ir)
    }

    pub fn scale_int(&self, k: &Integer) -> Complex {
        let p = self.prec();
        Complex::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn scale_rational(&self, q: &Rational) -> Complex {
        let p = self.prec();
        Complex::new(Float::with_val(p, &self.re * q), Float::with_val(p, &self.im * q))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let a = Float::with_val(p, self.re.square_ref());
        let b = Float::with_val(p, self.im.square_ref());
        a + b
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn recip(&self) -> Complex {
        let p = self.prec();
        let n = self.norm_sqr();
        Complex::new(
            Float::with_val(p, &self.re / &n),
            Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        )
    }

    pub fn div(&self, o: &Complex) -> Complex {
        self.mul(&o.recip())
    }

    pub fn pow(&self, mut e: u64) -> Complex {
        let p = self.prec();
        if self.is_real() {
            return Complex::from_real(Float::with_val(p, (&self.re).pow(e)));
        }
        let mut base = self.clone();
        let mut acc = Complex::from_real(Float::with_val(p, 1));
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}
