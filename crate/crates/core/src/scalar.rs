use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Field of coefficients the whole engine is generic over.
///
/// All decisions (ranks, pivots, flatness) reduce to exact equality tests,
/// so the canonical instantiation is [`BigRational`]; the float impls exist
/// for quick numeric experiments and make no exactness promises.
pub trait Scalar:
    Num + FromPrimitive + Neg<Output = Self> + Clone + PartialEq + Debug + Display + Send + Sync + 'static
{
    /// Injects an exact rational constant (literals, base-point coordinates).
    fn from_rational(q: &BigRational) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer out of range for scalar type")
    }
}

impl Scalar for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

impl Scalar for f64 {
    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn from_rational(q: &BigRational) -> Self {
        q.to_f32().unwrap_or(f32::NAN)
    }
}
