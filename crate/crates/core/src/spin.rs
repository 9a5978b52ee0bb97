//! Spin quantum numbers and angular-momentum generators.
//!
//! Basis convention throughout: |j,m⟩ with m descending from +j to -j, so
//! index 0 is the stretched state |j,+j⟩.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::half::Half;
use crate::operator::Operator;
use crate::scalar::{fr, Real, C};

/// A spin quantum number j with 2j a non-negative integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Spin {
    two_j: u64,
}

impl Spin {
    pub fn new(j: Half) -> Result<Self> {
        if j.doubled() < 0 {
            return Err(Error::argument(format!("spin j = {j} must be ≥ 0")));
        }
        Ok(Spin {
            two_j: j.doubled() as u64,
        })
    }

    /// Spin from the doubled quantum number: `Spin::from_two_j(7)` is j = 7/2.
    pub fn from_two_j(two_j: u64) -> Self {
        Spin { two_j }
    }

    pub fn j(&self) -> Half {
        Half::twice(self.two_j as i64)
    }

    pub fn dim(&self) -> usize {
        self.two_j as usize + 1
    }

    /// Magnetic quantum numbers in basis order (m = +j ... -j).
    pub fn m_values(&self) -> impl Iterator<Item = Half> + '_ {
        let two_j = self.two_j as i64;
        (0..self.dim() as i64).map(move |i| Half::twice(two_j - 2 * i))
    }

    /// Basis index of |j,m⟩, if m is a valid projection.
    pub fn index_of(&self, m: Half) -> Result<usize> {
        let two_j = self.two_j as i64;
        let idx2 = two_j - m.doubled();
        if idx2 < 0 || idx2 % 2 != 0 || idx2 > 2 * two_j {
            return Err(Error::argument(format!(
                "m = {m} is not a projection of j = {}",
                self.j()
            )));
        }
        Ok((idx2 / 2) as usize)
    }
}

/// The standard generators on a single spin manifold.
#[derive(Debug, Clone)]
pub struct AngularMomentum<T: Real> {
    pub jx: Operator<T>,
    pub jy: Operator<T>,
    pub jz: Operator<T>,
    pub jplus: Operator<T>,
    pub jminus: Operator<T>,
}

/// Matrices of Jx, Jy, Jz, J± in the descending-m basis.
///
/// Jx = (J+ + J-)/2, Jy = (J+ - J-)/(2i), ⟨j,m±1|J±|j,m⟩ = √(j(j+1) - m(m±1)).
pub fn angular_momentum_generators<T: Real>(spin: Spin) -> AngularMomentum<T> {
    let d = spin.dim();
    let j = spin.j().value();
    let mut jp: DMatrix<C<T>> = DMatrix::zeros(d, d);
    // Row index i holds m = j - i; J+ raises m, so it connects column i+1 to row i.
    for i in 0..d.saturating_sub(1) {
        let m = j - (i + 1) as f64; // m of the source state
        let amp = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        jp[(i, i + 1)] = Complex::new(fr(amp), T::zero());
    }
    let jm = jp.adjoint();
    let half = Complex::new(fr::<T>(0.5), T::zero());
    let half_over_i = Complex::new(T::zero(), -fr::<T>(0.5));
    let jx = (&jp + &jm) * half;
    let jy = (&jp - &jm) * half_over_i;
    let jz = DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            Complex::new(fr(j - r as f64), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    AngularMomentum {
        jx: Operator::hermitian(jx).expect("Jx hermitian by construction"),
        jy: Operator::hermitian(jy).expect("Jy hermitian by construction"),
        jz: Operator::hermitian(jz).expect("Jz hermitian by construction"),
        jplus: Operator::general(jp).expect("square"),
        jminus: Operator::general(jm).expect("square"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs;

    #[test]
    fn pauli_half() {
        let gen = angular_momentum_generators::<f64>(Spin::from_two_j(1));
        let jx = gen.jx.matrix();
        assert!((jx[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!((jx[(1, 0)].re - 0.5).abs() < 1e-15);
        assert!(jx[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn jz_eigenvalues_spin_one() {
        let gen = angular_momentum_generators::<f64>(Spin::from_two_j(2));
        let jz = gen.jz.matrix();
        for (i, want) in [1.0, 0.0, -1.0].iter().enumerate() {
            assert!((jz[(i, i)].re - want).abs() < 1e-15);
        }
    }

    #[test]
    fn su2_commutator() {
        for two_j in 1..=9u64 {
            let gen = angular_momentum_generators::<f64>(Spin::from_two_j(two_j));
            let comm = gen.jx.commutator(&gen.jy).unwrap();
            let expect = gen.jz.matrix() * Complex::new(0.0, 1.0);
            assert!(max_abs(&(comm - expect)) < 1e-12, "two_j = {two_j}");
        }
    }

    #[test]
    fn index_of_descending() {
        let s = Spin::from_two_j(8); // F = 4
        assert_eq!(s.index_of(Half::int(4)).unwrap(), 0);
        assert_eq!(s.index_of(Half::int(-4)).unwrap(), 8);
        assert!(s.index_of(Half::twice(1)).is_err());
    }
}
