//! Fourier coefficients of Bernoulli convolutions at Pisot parameters.

pub mod empirical;
pub mod error;
pub mod pisot;
pub mod real;
pub mod spectrum;
pub mod transform;

pub use error::{Error, Result};
pub use pisot::{build_pisot, FieldElement, MinimalPolynomial, PisotNumber, RingElement};
