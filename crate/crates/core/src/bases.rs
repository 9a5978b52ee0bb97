//! Orthonormal Hermitian operator bases and coordinate maps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::operator::Operator;
use crate::scalar::{fr, Real, C};

/// Canonical orthonormal Hermitian basis of all d×d Hermitian operators:
/// d projectors |e_j⟩⟨e_j|, then (|e_i⟩⟨e_j| + |e_j⟩⟨e_i|)/√2 for i<j, then
/// (-i|e_i⟩⟨e_j| + i|e_j⟩⟨e_i|)/√2 for i<j. d² elements in total.
pub fn hermitian_basis<T: Real>(d: usize) -> Vec<Operator<T>> {
    let mut out = Vec::with_capacity(d * d);
    let inv_sqrt2 = fr::<T>(std::f64::consts::FRAC_1_SQRT_2);
    for j in 0..d {
        let mut m: DMatrix<C<T>> = DMatrix::zeros(d, d);
        m[(j, j)] = Complex::new(T::one(), T::zero());
        out.push(Operator::hermitian(m).expect("projector"));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m: DMatrix<C<T>> = DMatrix::zeros(d, d);
            m[(i, j)] = Complex::new(inv_sqrt2, T::zero());
            m[(j, i)] = Complex::new(inv_sqrt2, T::zero());
            out.push(Operator::hermitian(m).expect("symmetric pair"));
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut m: DMatrix<C<T>> = DMatrix::zeros(d, d);
            m[(i, j)] = Complex::new(T::zero(), -inv_sqrt2);
            m[(j, i)] = Complex::new(T::zero(), inv_sqrt2);
            out.push(Operator::hermitian(m).expect("antisymmetric pair"));
        }
    }
    out
}

/// Traceless orthonormal Hermitian basis of su(d): d-1 diagonal elements of
/// the form (e_1 + … + e_l - l·e_{l+1})/√(l²+l), then the symmetric and
/// antisymmetric pairs. d²-1 elements.
pub fn traceless_hermitian_basis<T: Real>(d: usize) -> Vec<Operator<T>> {
    let mut out = Vec::with_capacity(d * d - 1);
    for l in 1..d {
        let norm = fr::<T>(1.0 / ((l * l + l) as f64).sqrt());
        let mut m: DMatrix<C<T>> = DMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = Complex::new(norm, T::zero());
        }
        m[(l, l)] = Complex::new(-norm * fr::<T>(l as f64), T::zero());
        out.push(Operator::hermitian(m).expect("diagonal"));
    }
    out.extend(hermitian_basis::<T>(d).into_iter().skip(d));
    out
}

/// Coordinates of a Hermitian matrix over `traceless_hermitian_basis(d)`,
/// computed entrywise (the trace part is projected out by construction).
pub fn traceless_coords<T: Real>(m: &DMatrix<C<T>>) -> DVector<T> {
    let d = m.nrows();
    let mut coords = DVector::zeros(d * d - 1);
    let sqrt2 = fr::<T>(std::f64::consts::SQRT_2);
    let mut idx = 0;
    let mut running = T::zero(); // Σ_{j≤l} m_jj as we extend l
    for l in 1..d {
        running += m[(l - 1, l - 1)].re;
        let norm = fr::<T>(1.0 / ((l * l + l) as f64).sqrt());
        coords[idx] = norm * (running - fr::<T>(l as f64) * m[(l, l)].re);
        idx += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            coords[idx] = sqrt2 * m[(i, j)].re;
            idx += 1;
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            coords[idx] = -sqrt2 * m[(i, j)].im;
            idx += 1;
        }
    }
    coords
}

/// Inverse of `traceless_coords`: rebuild the Hermitian matrix.
pub fn from_traceless_coords<T: Real>(d: usize, coords: &DVector<T>) -> DMatrix<C<T>> {
    let mut m: DMatrix<C<T>> = DMatrix::zeros(d, d);
    let inv_sqrt2 = fr::<T>(std::f64::consts::FRAC_1_SQRT_2);
    let mut idx = 0;
    for l in 1..d {
        let norm = fr::<T>(1.0 / ((l * l + l) as f64).sqrt());
        for j in 0..l {
            m[(j, j)] += Complex::new(coords[idx] * norm, T::zero());
        }
        m[(l, l)] -= Complex::new(coords[idx] * norm * fr::<T>(l as f64), T::zero());
        idx += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let v = coords[idx] * inv_sqrt2;
            m[(i, j)] += Complex::new(v, T::zero());
            m[(j, i)] += Complex::new(v, T::zero());
            idx += 1;
        }
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let v = coords[idx] * inv_sqrt2;
            m[(i, j)] += Complex::new(T::zero(), -v);
            m[(j, i)] += Complex::new(T::zero(), v);
            idx += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::trace_inner_product;

    #[test]
    fn hermitian_basis_is_orthonormal() {
        for d in [2usize, 3, 5] {
            let basis = hermitian_basis::<f64>(d);
            assert_eq!(basis.len(), d * d);
            for (a, ea) in basis.iter().enumerate() {
                for (b, eb) in basis.iter().enumerate() {
                    let ip = trace_inner_product(ea, eb).unwrap();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip.re - expect).abs() < 1e-14 && ip.im.abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn traceless_basis_is_orthonormal_and_traceless() {
        for d in [2usize, 4] {
            let basis = traceless_hermitian_basis::<f64>(d);
            assert_eq!(basis.len(), d * d - 1);
            for ea in &basis {
                assert!(ea.trace().norm() < 1e-14);
            }
            for (a, ea) in basis.iter().enumerate() {
                for (b, eb) in basis.iter().enumerate() {
                    let ip = trace_inner_product(ea, eb).unwrap();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip.re - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let d = 4;
        let basis = traceless_hermitian_basis::<f64>(d);
        // coords must agree with explicit trace inner products
        let mut m: DMatrix<Complex<f64>> = DMatrix::zeros(d, d);
        for (i, e) in basis.iter().enumerate() {
            m += e.matrix() * Complex::new((i as f64 + 1.0).sin(), 0.0);
        }
        let coords = traceless_coords(&m);
        for (i, e) in basis.iter().enumerate() {
            let ip = trace_inner_product(e, &Operator::hermitian(m.clone()).unwrap()).unwrap();
            assert!((coords[i] - ip.re).abs() < 1e-13);
        }
        let back = from_traceless_coords(d, &coords);
        assert!(crate::operator::max_abs(&(back - m)) < 1e-13);
    }
}
