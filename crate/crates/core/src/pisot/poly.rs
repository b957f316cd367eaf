use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::real::Complex;

/// Monic integer polynomial `x^m - d_1 x^(m-1) - ... - d_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalPolynomial {
    d: Vec<Integer>,
}

impl MinimalPolynomial {
    pub fn new<I, T>(d: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        Integer: From<T>,
    {
        let d: Vec<Integer> = d.into_iter().map(Integer::from).collect();
        if d.is_empty() {
            return Err(Error::InvalidPolynomial("degree must be at least 1".into()));
        }
        if d.last().is_none_or(|c| c.is_zero()) {
            return Err(Error::InvalidPolynomial(
                "d_m must be nonzero (0 would be a root)".into(),
            ));
        }
        Ok(MinimalPolynomial { d })
    }

    /// Parses `"d1,d2,...,dm"`.
    pub fn parse(s: &str) -> Result<Self> {
        let d = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<Integer>()
                    .map_err(|e| Error::Parse(format!("polynomial coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(d)
    }

    pub fn degree(&self) -> usize {
        self.d.len()
    }

    /// The recurrence coefficients `d_1..d_m`.
    pub fn d(&self) -> &[Integer] {
        &self.d
    }

    /// `1 + |d_1| + ... + |d_m|`.
    pub fn height_sum(&self) -> Integer {
        self.d.iter().fold(Integer::from(1), |acc, c| acc + c.clone().abs())
    }

    /// Coefficients `c_0..c_m` in ascending order, `c_m = 1`.
    pub fn ascending(&self) -> Vec<Integer> {
        let m = self.degree();
        let mut c = vec![Integer::new(); m + 1];
        c[m] = Integer::from(1);
        for (i, di) in self.d.iter().enumerate() {
            c[m - 1 - i] = -di.clone();
        }
        c
    }

    pub fn ascending_rational(&self) -> Vec<Rational> {
        self.ascending().into_iter().map(Rational::from).collect()
    }

    pub fn eval(&self, z: &Complex) -> Complex {
        let prec = z.prec();
        let c = self.ascending();
        let mut acc = Complex::zero(prec);
        for ci in c.iter().rev() {
            acc = acc.mul(z);
            acc.re += ci;
        }
        acc
    }

    pub fn eval_derivative(&self, z: &Complex) -> Complex {
        let prec = z.prec();
        let c = self.ascending();
        let mut acc = Complex::zero(prec);
        for (i, ci) in c.iter().enumerate().skip(1).rev() {
            acc = acc.mul(z);
            acc.re += Integer::from(ci * i as u32);
        }
        acc
    }

    /// Reduces an ascending coefficient vector of any length modulo the
    /// polynomial, using `x^m = d_1 x^(m-1) + ... + d_m`.
    pub fn reduce(&self, mut c: Vec<Integer>) -> Vec<Integer> {
        let m = self.degree();
        while c.len() > m {
            let top = c.pop().expect("nonempty");
            if top.is_zero() {
                continue;
            }
            let k = c.len(); // exponent of `top`
            for (i, di) in self.d.iter().enumerate() {
                // x^k contributes d_{i+1} x^(k-1-i)
                c[k - 1 - i] += Integer::from(&top * di);
            }
        }
        c.resize(m, Integer::new());
        c
    }

    /// Power sums `Tr(theta^k)` for `k = 0..count` via Newton's identities.
    pub fn power_sums(&self, count: usize) -> Vec<Integer> {
        let m = self.degree();
        let mut p: Vec<Integer> = Vec::with_capacity(count);
        for k in 0..count {
            let v = if k == 0 {
                Integer::from(m)
            } else {
                let mut acc = Integer::new();
                for i in 1..=m.min(k) {
                    if i < k {
                        acc += Integer::from(&self.d[i - 1] * &p[k - i]);
                    } else {
                        // i == k <= m
                        acc += Integer::from(&self.d[i - 1] * k as u32);
                    }
                }
                acc
            };
            p.push(v);
        }
        p
    }

    /// Degree of `gcd(f, f')` over the rationals; 0 means squarefree.
    pub fn derivative_gcd_degree(&self) -> usize {
        let f = self.ascending_rational();
        let df: Vec<Rational> = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| Rational::from(c * i as u32))
            .collect();
        let g = qpoly::gcd(f, df);
        qpoly::degree(&g).unwrap_or(0)
    }
}

impl fmt::Display for MinimalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.degree();
        write!(f, "x^{m}")?;
        for (i, di) in self.d.iter().enumerate() {
            if di.is_zero() {
                continue;
            }
            let e = m - 1 - i;
            let sign = if *di > 0 { '-' } else { '+' };
            let a = di.clone().abs();
            let coef = if a == 1 && e > 0 { String::new() } else { a.to_string() };
            match e {
                0 => write!(f, " {sign} {a}")?,
                1 => write!(f, " {sign} {coef}x")?,
                _ => write!(f, " {sign} {coef}x^{e}")?,
            }
        }
        Ok(())
    }
}

/// Dense polynomials over Q in ascending order, trailing zeros trimmed.
pub(crate) mod qpoly {
    use rug::Rational;

    pub fn trim(p: &mut Vec<Rational>) {
        while p.last().is_some_and(|c| *c == 0) {
            p.pop();
        }
    }

    pub fn degree(p: &[Rational]) -> Option<usize> {
        p.iter().rposition(|c| *c != 0)
    }

    pub fn divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let db = degree(b).expect("division by zero polynomial");
        let mut r: Vec<Rational> = a.to_vec();
        trim(&mut r);
        let mut q = vec![Rational::new(); r.len().saturating_sub(db).max(1)];
        let lead = b[db].clone();
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let coef = Rational::from(&r[dr] / &lead);
            let shift = dr - db;
            for (i, bi) in b.iter().enumerate().take(db + 1) {
                r[shift + i] -= Rational::from(&coef * bi);
            }
            q[shift] += coef;
            trim(&mut r);
        }
        trim(&mut q);
        (q, r)
    }

    pub fn mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![Rational::new(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                out[i + j] += Rational::from(ai * bj);
            }
        }
        trim(&mut out);
        out
    }

    pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let n = a.len().max(b.len());
        let mut out = vec![Rational::new(); n];
        for (i, ai) in a.iter().enumerate() {
            out[i] += ai;
        }
        for (i, bi) in b.iter().enumerate() {
            out[i] -= bi;
        }
        trim(&mut out);
        out
    }

    pub fn gcd(mut a: Vec<Rational>, mut b: Vec<Rational>) -> Vec<Rational> {
        trim(&mut a);
        trim(&mut b);
        while degree(&b).is_some() {
            let (_, r) = divrem(&a, &b);
            a = b;
            b = r;
        }
        a
    }

    /// Returns `(g, s)` with `s * a = g (mod m)`, where `g = gcd(a, m)`.
    pub fn ext_gcd_mod(a: &[Rational], m: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
        let mut r0: Vec<Rational> = m.to_vec();
        let mut r1: Vec<Rational> = a.to_vec();
        trim(&mut r0);
        trim(&mut r1);
        let mut s0: Vec<Rational> = Vec::new();
        let mut s1: Vec<Rational> = vec![Rational::from(1)];
        while degree(&r1).is_some() {
            let (q, r) = divrem(&r0, &r1);
            let s = sub(&s0, &mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        (r0, s0)
    }
}
