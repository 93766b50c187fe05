//! Floating point abstraction shared by the geometry and tile math.

use std::fmt::Debug;

use num_traits::{Float, FloatConst, FromPrimitive};

/// The floating point types geometry can be expressed in.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in the implementing types.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
