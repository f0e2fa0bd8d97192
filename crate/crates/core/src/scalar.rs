//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
///
/// All physics routines are generic over this trait. The tolerances quoted in
/// the documentation and tests are for `f64`; `f32` works but loses the
/// near-threshold accuracy.
pub trait Real:
    Float + FloatConst + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn real<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// `e^{-i x}`.
#[inline]
pub(crate) fn cis_neg<T: Real>(x: T) -> Cx<T> {
    Complex::new(x.cos(), -x.sin())
}

/// Evenly spaced points over `[lo, hi]` (inclusive). One point yields `lo`.
pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / T::lit((n - 1) as f64);
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else {
                        lo + step * T::lit(k as f64)
                    }
                })
                .collect()
        }
    }
}

/// Logarithmically spaced points from `lo` to `hi` (both > 0), inclusive.
pub fn logspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(Float::exp)
        .collect()
}
