//! Dense operator type: the universal currency of the library.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{hermitian_tol, unitary_tol, Real, C};

/// What an operator claims to be; construction validates the claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Hermitian,
    Unitary,
    General,
}

/// Dense complex matrix with a validated flavor tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator<T: Real> {
    mat: DMatrix<C<T>>,
    flavor: Flavor,
}

impl<T: Real> Operator<T> {
    /// Hermitian operator: `‖A - A†‖_max` must be below tolerance.
    pub fn hermitian(mat: DMatrix<C<T>>) -> Result<Self> {
        check_square(&mat)?;
        let dev = hermitian_deviation(&mat);
        let tol = hermitian_tol::<T>();
        if dev > tol {
            return Err(Error::Flavor {
                expected: "hermitian",
                deviation: to_f64(dev),
                tol: to_f64(tol),
            });
        }
        Ok(Operator {
            mat,
            flavor: Flavor::Hermitian,
        })
    }

    /// Unitary operator: `‖U†U - I‖_max` must be below tolerance.
    pub fn unitary(mat: DMatrix<C<T>>) -> Result<Self> {
        check_square(&mat)?;
        let dev = unitary_deviation(&mat);
        let tol = unitary_tol::<T>();
        if dev > tol {
            return Err(Error::Flavor {
                expected: "unitary",
                deviation: to_f64(dev),
                tol: to_f64(tol),
            });
        }
        Ok(Operator {
            mat,
            flavor: Flavor::Unitary,
        })
    }

    pub fn general(mat: DMatrix<C<T>>) -> Result<Self> {
        check_square(&mat)?;
        Ok(Operator {
            mat,
            flavor: Flavor::General,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Operator {
            mat: DMatrix::identity(dim, dim),
            flavor: Flavor::Unitary,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Operator {
            mat: DMatrix::zeros(dim, dim),
            flavor: Flavor::Hermitian,
        }
    }

    /// Rank-1 projector |v⟩⟨v| for a normalized vector.
    pub fn projector(v: &DVector<C<T>>) -> Self {
        let mat = DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj());
        Operator {
            mat,
            flavor: Flavor::Hermitian,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C<T>> {
        self.mat
    }

    pub fn adjoint(&self) -> Operator<T> {
        Operator {
            mat: self.mat.adjoint(),
            flavor: self.flavor,
        }
    }

    /// Matrix product; the result carries no validated structure unless both
    /// factors are unitary.
    pub fn mul(&self, rhs: &Operator<T>) -> Result<Operator<T>> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch(self.dim(), rhs.dim()));
        }
        let flavor = match (self.flavor, rhs.flavor) {
            (Flavor::Unitary, Flavor::Unitary) => Flavor::Unitary,
            _ => Flavor::General,
        };
        Ok(Operator {
            mat: &self.mat * &rhs.mat,
            flavor,
        })
    }

    pub fn apply(&self, v: &DVector<C<T>>) -> DVector<C<T>> {
        &self.mat * v
    }

    pub fn scale(&self, s: T) -> Operator<T> {
        let flavor = if self.flavor == Flavor::Hermitian {
            Flavor::Hermitian
        } else {
            Flavor::General
        };
        Operator {
            mat: self.mat.map(|z| z * Complex::new(s, T::zero())),
            flavor,
        }
    }

    pub fn add(&self, rhs: &Operator<T>) -> Result<Operator<T>> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch(self.dim(), rhs.dim()));
        }
        let flavor = match (self.flavor, rhs.flavor) {
            (Flavor::Hermitian, Flavor::Hermitian) => Flavor::Hermitian,
            _ => Flavor::General,
        };
        Ok(Operator {
            mat: &self.mat + &rhs.mat,
            flavor,
        })
    }

    /// Commutator [A, B].
    pub fn commutator(&self, rhs: &Operator<T>) -> Result<DMatrix<C<T>>> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch(self.dim(), rhs.dim()));
        }
        Ok(&self.mat * &rhs.mat - &rhs.mat * &self.mat)
    }

    pub fn trace(&self) -> C<T> {
        self.mat.diagonal().sum()
    }

    pub fn frobenius_norm(&self) -> T {
        frobenius(&self.mat)
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.mat)
    }

    pub fn is_hermitian(&self) -> bool {
        hermitian_deviation(&self.mat) <= hermitian_tol::<T>()
    }
}

/// Standard trace inner product ⟨A, B⟩ = Tr(A†B).
pub fn trace_inner_product<T: Real>(a: &Operator<T>, b: &Operator<T>) -> Result<C<T>> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(a.dim(), b.dim()));
    }
    Ok(mat_trace_inner(a.matrix(), b.matrix()))
}

/// Tr(A†B) on raw matrices.
pub fn mat_trace_inner<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> C<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    acc
}

pub fn hermitian_deviation<T: Real>(m: &DMatrix<C<T>>) -> T {
    let mut dev = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).modulus();
            if d > dev {
                dev = d;
            }
        }
    }
    dev
}

pub fn unitary_deviation<T: Real>(m: &DMatrix<C<T>>) -> T {
    let prod = m.adjoint() * m;
    let mut dev = T::zero();
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let expect = if i == j { T::one() } else { T::zero() };
            let d = (prod[(i, j)] - Complex::new(expect, T::zero())).modulus();
            if d > dev {
                dev = d;
            }
        }
    }
    dev
}

pub fn frobenius<T: Real>(m: &DMatrix<C<T>>) -> T {
    let mut acc = T::zero();
    for z in m.iter() {
        acc += z.modulus_squared();
    }
    acc.sqrt()
}

pub fn max_abs<T: Real>(m: &DMatrix<C<T>>) -> T {
    let mut dev = T::zero();
    for z in m.iter() {
        let n = z.modulus();
        if n > dev {
            dev = n;
        }
    }
    dev
}

/// Embed `block` at diagonal offset (`row0`, `col0`) of a `dim`-dimensional zero matrix.
pub fn embed_block<T: Real>(
    dim: usize,
    row0: usize,
    col0: usize,
    block: &DMatrix<C<T>>,
) -> DMatrix<C<T>> {
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((row0, col0), (block.nrows(), block.ncols()))
        .copy_from(block);
    out
}

/// Block-diagonal matrix from two blocks.
pub fn block_diag<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> DMatrix<C<T>> {
    let d = a.nrows() + b.nrows();
    let mut out = DMatrix::zeros(d, d);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

fn check_square<T: Real>(m: &DMatrix<C<T>>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimMismatch(m.nrows(), m.ncols()));
    }
    if m.is_empty() {
        return Err(Error::argument("empty matrix"));
    }
    Ok(())
}

fn to_f64<T: Real>(x: T) -> f64 {
    nalgebra::try_convert(x).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{angular_momentum_generators, Spin};

    #[test]
    fn trace_inner_product_basics() {
        let id = Operator::<f64>::identity(5);
        let ip = trace_inner_product(&id, &id).unwrap();
        assert!((ip.re - 5.0).abs() < 1e-14 && ip.im.abs() < 1e-15);

        let gen = angular_momentum_generators::<f64>(Spin::from_two_j(2));
        let xy = trace_inner_product(&gen.jx, &gen.jy).unwrap();
        assert!(xy.norm() < 1e-14, "Tr(Jx†Jy) = {xy} for j = 1");

        let small = Operator::<f64>::identity(3);
        assert!(trace_inner_product(&id, &small).is_err());
    }

    #[test]
    fn flavor_validation() {
        let mut m: DMatrix<C<f64>> = DMatrix::identity(3, 3);
        m[(0, 1)] = Complex::new(1e-6, 0.0);
        assert!(Operator::hermitian(m.clone()).is_err());
        assert!(Operator::unitary(m).is_err());
    }
}
