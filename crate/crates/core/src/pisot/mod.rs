//! Pisot numbers, exact arithmetic in `Z[theta]` and `Q(theta)`, and the
//! distance of `x theta^j` to the nearest integer.

mod element;
mod number;
mod poly;
mod roots;

pub use element::{FieldElement, JsonInt, RingElement};
pub use number::{build_pisot, DistDecay, NearestInt, PisotNumber, PisotRecord, PISOT_MARGIN_LOG2};
pub use poly::MinimalPolynomial;
pub use roots::refined_roots;
