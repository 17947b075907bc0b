//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All state, entropy and optimizer code is written against [`Real`], which is
//! implemented for `f32` and `f64`. The trait carries the validation
//! tolerances so that single precision gets thresholds it can actually meet.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Complex amplitude over a real scalar.
pub type C<T> = Complex<T>;

/// Real scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Tolerance for Hermiticity, trace, positivity and normalisation checks.
    fn state_tol() -> Self;
    /// Eigenvalues at or below this are treated as zero inside `λ log λ`.
    fn eigen_floor() -> Self;
    /// Tolerance for exact linear-algebra identities.
    fn identity_tol() -> Self;
    /// Tolerance for inequalities that go through an optimizer.
    fn optimizer_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn state_tol() -> Self {
        1e-10
    }
    fn eigen_floor() -> Self {
        1e-12
    }
    fn identity_tol() -> Self {
        1e-9
    }
    fn optimizer_tol() -> Self {
        1e-6
    }
}

impl Real for f32 {
    fn state_tol() -> Self {
        2e-5
    }
    fn eigen_floor() -> Self {
        1e-7
    }
    fn identity_tol() -> Self {
        1e-4
    }
    fn optimizer_tol() -> Self {
        1e-3
    }
}

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// `log₂ x`, with the convention that callers never pass non-positive values.
#[inline]
pub(crate) fn log2<T: Real>(x: T) -> T {
    x.ln() / T::ln_2()
}
