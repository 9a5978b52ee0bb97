//! Haar-distributed unitaries and random states.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::operator::Operator;
use crate::scalar::{fr, Real, C};

fn gaussian_complex<T: Real, R: Rng>(rng: &mut R) -> C<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(fr(re), fr(im))
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre
/// matrix, with the R-diagonal phases absorbed into Q.
pub fn haar_unitary<T: Real, R: Rng>(d: usize, rng: &mut R) -> Operator<T> {
    let g: DMatrix<C<T>> = DMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let mag = rjj.modulus();
        let phase = if mag > T::default_epsilon() {
            rjj / Complex::new(mag, T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Operator::unitary(q).expect("QR of Ginibre is unitary")
}

/// Haar-random pure state (uniform on the unit sphere).
pub fn random_state<T: Real, R: Rng>(d: usize, rng: &mut R) -> DVector<C<T>> {
    let v: DVector<C<T>> = DVector::from_fn(d, |_, _| gaussian_complex(rng));
    let n = v.norm();
    v / Complex::new(n, T::zero())
}

/// GUE-style random Hermitian matrix (entries O(1)).
pub fn random_hermitian<T: Real, R: Rng>(d: usize, rng: &mut R) -> Operator<T> {
    let g: DMatrix<C<T>> = DMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let h = (&g + g.adjoint()) * Complex::new(fr::<T>(0.5), T::zero());
    Operator::hermitian(h).expect("symmetrized matrix is hermitian")
}
