use std::fmt;
use std::ops::{Add, Neg, Sub};

use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element `a_0 + a_1 theta + ... + a_(m-1) theta^(m-1)` of `Z[theta]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElement {
    coeffs: Vec<Integer>,
}

impl RingElement {
    pub fn from_coeffs(coeffs: Vec<Integer>) -> Self {
        assert!(!coeffs.is_empty(), "ring element needs at least one coefficient");
        RingElement { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64], degree: usize) -> Result<Self> {
        if coeffs.len() > degree {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients given for a degree-{degree} ring",
                coeffs.len()
            )));
        }
        let mut c: Vec<Integer> = coeffs.iter().map(|&x| Integer::from(x)).collect();
        c.resize(degree, Integer::new());
        Ok(RingElement { coeffs: c })
    }

    pub fn zero(degree: usize) -> Self {
        RingElement { coeffs: vec![Integer::new(); degree] }
    }

    pub fn one(degree: usize) -> Self {
        Self::integer(1, degree)
    }

    pub fn integer(n: impl Into<Integer>, degree: usize) -> Self {
        let mut e = Self::zero(degree);
        e.coeffs[0] = n.into();
        e
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Sum of absolute coefficient values.
    pub fn l1_norm(&self) -> Integer {
        self.coeffs.iter().fold(Integer::new(), |acc, c| acc + c.clone().abs())
    }

    /// Parses `"c0,c1,..."`; missing high coefficients are zero.
    pub fn parse(s: &str, degree: usize) -> Result<Self> {
        let c = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<Integer>()
                    .map_err(|e| Error::Parse(format!("ring coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if c.len() > degree {
            return Err(Error::Parse(format!("{s:?} has more than {degree} coefficients")));
        }
        let mut c = c;
        c.resize(degree, Integer::new());
        Ok(RingElement { coeffs: c })
    }

    pub fn to_field(&self) -> FieldElement {
        FieldElement { coeffs: self.coeffs.iter().map(Rational::from).collect() }
    }

    fn check_same(&self, o: &Self) {
        assert_eq!(self.degree(), o.degree(), "ring elements over different degrees");
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl Add for &RingElement {
    type Output = RingElement;
    fn add(self, o: &RingElement) -> RingElement {
        self.check_same(o);
        RingElement {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Integer::from(a + b)).collect(),
        }
    }
}

impl Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, o: &RingElement) -> RingElement {
        self.check_same(o);
        RingElement {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Integer::from(a - b)).collect(),
        }
    }
}

impl Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        RingElement { coeffs: self.coeffs.iter().map(|a| Integer::from(-a)).collect() }
    }
}

/// Element of `Q(theta)` with rational coefficients in the power basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coeffs: Vec<Rational>,
}

impl FieldElement {
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty(), "field element needs at least one coefficient");
        FieldElement { coeffs }
    }

    pub fn rational(q: impl Into<Rational>, degree: usize) -> Self {
        let mut c = vec![Rational::new(); degree];
        c[0] = q.into();
        FieldElement { coeffs: c }
    }

    pub fn zero(degree: usize) -> Self {
        FieldElement { coeffs: vec![Rational::new(); degree] }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|c| *c == 0)
    }

    /// `Some(q)` when the element is the rational number `q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.coeffs[1..].iter().all(|c| *c == 0).then(|| &self.coeffs[0])
    }

    /// Splits into `(numerator, denominator)` with `numerator / denominator`
    /// equal to `self` and a positive denominator.
    pub fn to_scaled_ring(&self) -> (RingElement, Integer) {
        let den = self
            .coeffs
            .iter()
            .fold(Integer::from(1), |acc, c| acc.lcm(c.denom()));
        let num = self
            .coeffs
            .iter()
            .map(|c| {
                let scaled = Rational::from(c * &den);
                scaled.numer().clone()
            })
            .collect();
        (RingElement { coeffs: num }, den)
    }

    pub fn scale(&self, q: &Rational) -> FieldElement {
        FieldElement { coeffs: self.coeffs.iter().map(|c| Rational::from(c * q)).collect() }
    }

    /// Parses `"a0/q0,a1/q1,..."`; entries may be integers.
    pub fn parse(s: &str, degree: usize) -> Result<Self> {
        let c = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<Rational>()
                    .map_err(|e| Error::Parse(format!("field coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if c.len() > degree {
            return Err(Error::Parse(format!("{s:?} has more than {degree} coefficients")));
        }
        let mut c = c;
        c.resize(degree, Rational::new());
        Ok(FieldElement { coeffs: c })
    }

    fn check_same(&self, o: &Self) {
        assert_eq!(self.degree(), o.degree(), "field elements over different degrees");
    }
}

impl From<&RingElement> for FieldElement {
    fn from(r: &RingElement) -> Self {
        r.to_field()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        self.check_same(o);
        FieldElement {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Rational::from(a + b)).collect(),
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        self.check_same(o);
        FieldElement {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| Rational::from(a - b)).collect(),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement { coeffs: self.coeffs.iter().map(|a| Rational::from(-a)).collect() }
    }
}

/// Integer coefficient vectors serialize as JSON number arrays when they fit
/// in `i64`, otherwise as decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Small(i64),
    Big(String),
}

impl From<&Integer> for JsonInt {
    fn from(x: &Integer) -> Self {
        match x.to_i64() {
            Some(v) => JsonInt::Small(v),
            None => JsonInt::Big(x.to_string()),
        }
    }
}

impl TryFrom<&JsonInt> for Integer {
    type Error = Error;
    fn try_from(j: &JsonInt) -> Result<Integer> {
        match j {
            JsonInt::Small(v) => Ok(Integer::from(*v)),
            JsonInt::Big(s) => s.parse().map_err(|e| Error::Parse(format!("{s:?}: {e}"))),
        }
    }
}

impl RingElement {
    pub fn to_json_coeffs(&self) -> Vec<JsonInt> {
        self.coeffs.iter().map(JsonInt::from).collect()
    }

    pub fn from_json_coeffs(c: &[JsonInt], degree: usize) -> Result<Self> {
        if c.len() > degree {
            return Err(Error::Parse(format!("{} coefficients for degree {degree}", c.len())));
        }
        let mut v = c.iter().map(Integer::try_from).collect::<Result<Vec<_>>>()?;
        v.resize(degree, Integer::new());
        Ok(RingElement { coeffs: v })
    }
}
