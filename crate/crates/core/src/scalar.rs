//! Scalar abstraction shared by the channel algebra.
//!
//! Everything that is plain matrix arithmetic (Kraus sets, process matrices,
//! fidelities, the Bloch-ball minimization) is written against [`Real`], so
//! it runs in `f32` or `f64`. The constrained optimizer works in `f64` only.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Absolute tolerance used for invariant checks at this precision.
    const DEFAULT_TOL: f64;

    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn default_tol() -> Self {
        Self::lit(Self::DEFAULT_TOL)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    const DEFAULT_TOL: f64 = 1e-4;
}

impl Real for f64 {
    const DEFAULT_TOL: f64 = 1e-10;
}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}
