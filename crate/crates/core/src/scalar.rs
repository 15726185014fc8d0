//! Scalar abstractions.
//!
//! Every numerical routine in the crate is written against [`Scalar`], which
//! covers the real types `f32`/`f64` and their complex counterparts. Real
//! dictionaries (identity, Hadamard, DCT, Haar) can therefore run in real
//! arithmetic, while the DFT needs one of the complex instantiations.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{ComplexField, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point field (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Debug + Send + Sync
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Field of dictionary entries and coefficients: a [`Real`] or a complex number over one.
pub trait Scalar: ComplexField<RealField: Real> + Copy + Debug + Send + Sync {
    const IS_COMPLEX: bool;

    /// Builds a scalar from its real and imaginary parts. Real scalars reject
    /// a nonzero imaginary part.
    fn from_parts(re: Self::RealField, im: Self::RealField) -> Option<Self>;
}

/// Real field underlying a scalar type.
pub type RealOf<S> = <S as ComplexField>::RealField;

impl Scalar for f32 {
    const IS_COMPLEX: bool = false;
    fn from_parts(re: f32, im: f32) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
}

impl Scalar for Complex<f32> {
    const IS_COMPLEX: bool = true;
    fn from_parts(re: f32, im: f32) -> Option<Self> {
        Some(Complex::new(re, im))
    }
}

impl Scalar for Complex<f64> {
    const IS_COMPLEX: bool = true;
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(re, im))
    }
}

/// Converts an `f64` literal into the working precision.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in working precision")
}

/// Converts a working-precision real back to `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Lifts a real value into the scalar field.
#[inline]
pub fn from_real<S: Scalar>(x: RealOf<S>) -> S {
    S::from_real(x)
}

/// `usize` to working precision.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable")
}

/// Traits needed to call numeric methods on `RealOf<S>` in generic code.
pub(crate) mod prelude {
    pub use super::{count, lit, to_f64, Real, RealOf, Scalar};
    pub use nalgebra::{ComplexField, RealField};
    pub use num_traits::{One, Zero};
}
