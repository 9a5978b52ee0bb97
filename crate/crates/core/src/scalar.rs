//! Scalar abstraction: the whole library is generic over the real field.

use nalgebra::RealField;
use num_complex::Complex;

/// Real scalar the library is generic over (`f32` or `f64` in practice).
pub trait Real: RealField + Copy {}
impl<T: RealField + Copy> Real for T {}

/// Complex number over the library scalar.
pub type C<T> = Complex<T>;

/// Convert an `f64` constant into the working scalar.
#[inline]
pub fn fr<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Complex constant from `f64` parts.
#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(fr(re), fr(im))
}

/// `-i` as a complex scalar.
#[inline]
pub fn minus_i<T: Real>() -> C<T> {
    Complex::new(T::zero(), -T::one())
}

/// Hermiticity tolerance: 1e-12 at double precision, relaxed for wider epsilon.
#[inline]
pub fn hermitian_tol<T: Real>() -> T {
    fr::<T>(1e-12).max(T::default_epsilon() * fr(1e3))
}

/// Unitarity tolerance: 1e-10 at double precision, relaxed for wider epsilon.
#[inline]
pub fn unitary_tol<T: Real>() -> T {
    fr::<T>(1e-10).max(T::default_epsilon() * fr(1e5))
}
