//! Dense linear algebra kernels for small Hermitian/unitary matrices.
//!
//! Everything here targets d ≤ 16 working matrices (plus d² ≤ 36 Hessians),
//! where a cyclic Jacobi eigensolver is both simple and unconditionally
//! stable.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{fr, Real, C};

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the matching orthonormal eigenvector
/// columns.
pub fn eigh<T: Real>(a: &DMatrix<C<T>>) -> (DVector<T>, DMatrix<C<T>>) {
    let d = a.nrows();
    let mut m = a.clone();
    let mut v: DMatrix<C<T>> = DMatrix::identity(d, d);
    if d == 1 {
        return (DVector::from_element(1, m[(0, 0)].re), v);
    }

    let norm = crate::operator::frobenius(&m).max(T::default_epsilon());
    let stop = norm * T::default_epsilon() * fr::<T>(d as f64);

    for _sweep in 0..60 {
        let mut off = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off += m[(p, q)].modulus_squared();
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let beta = m[(p, q)];
                let b = beta.modulus();
                if b <= norm * T::default_epsilon() * fr::<T>(1e-2) {
                    continue;
                }
                let w = beta / Complex::new(b, T::zero());
                let alpha = m[(p, p)].re;
                let gamma = m[(q, q)].re;
                let theta = (gamma - alpha) / (b + b);
                let t = {
                    let at = theta.abs();
                    let s = T::one() / (at + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -s
                    } else {
                        s
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let cc = Complex::new(c, T::zero());
                let sc = Complex::new(s, T::zero());
                let sw = sc * w;
                let sw_conj = sc * w.conj();
                let cw_conj = cc * w.conj();
                let cw = cc * w;

                // Column update: A ← A·J with J = [[c, s],[−s·w̄, c·w̄]] on (p,q).
                for r in 0..d {
                    let arp = m[(r, p)];
                    let arq = m[(r, q)];
                    m[(r, p)] = arp * cc - arq * sw_conj;
                    m[(r, q)] = arp * sc + arq * cw_conj;
                }
                // Row update: A ← J†·A.
                for r in 0..d {
                    let apr = m[(p, r)];
                    let aqr = m[(q, r)];
                    m[(p, r)] = apr * cc - aqr * sw;
                    m[(q, r)] = apr * sc + aqr * cw;
                }
                m[(p, p)] = Complex::new(alpha - t * b, T::zero());
                m[(q, q)] = Complex::new(gamma + t * b, T::zero());
                m[(p, q)] = Complex::new(T::zero(), T::zero());
                m[(q, p)] = Complex::new(T::zero(), T::zero());

                // Accumulate eigenvectors: V ← V·J.
                for r in 0..d {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * cc - vrq * sw_conj;
                    v[(r, q)] = vrp * sc + vrq * cw_conj;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let evals: Vec<T> = (0..d).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).unwrap());
    let sorted_vals = DVector::from_fn(d, |i, _| evals[order[i]]);
    let mut sorted_vecs = DMatrix::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        sorted_vecs.set_column(new, &v.column(old));
    }
    (sorted_vals, sorted_vecs)
}

/// exp(-i·scale·H) for Hermitian H, via eigendecomposition (exact up to the
/// eigensolver).
pub fn expm_hermitian<T: Real>(h: &DMatrix<C<T>>, scale: T) -> DMatrix<C<T>> {
    let (vals, vecs) = eigh(h);
    let d = h.nrows();
    let mut phased = vecs.clone();
    for j in 0..d {
        let angle = -scale * vals[j];
        let phase = Complex::new(angle.cos(), angle.sin());
        for i in 0..d {
            phased[(i, j)] *= phase;
        }
    }
    phased * vecs.adjoint()
}

/// exp(-i·scale·H)·ψ for Hermitian H by a sub-stepped Taylor series,
/// accurate to machine precision for the step sizes used here.
pub fn exp_action<T: Real>(h: &DMatrix<C<T>>, scale: T, psi: &DVector<C<T>>) -> DVector<C<T>> {
    let d = h.nrows();
    // Infinity norm bounds the spectral radius.
    let mut hnorm = T::zero();
    for i in 0..d {
        let mut row = T::zero();
        for j in 0..d {
            row += h[(i, j)].modulus();
        }
        if row > hnorm {
            hnorm = row;
        }
    }
    let theta = (scale * hnorm).abs();
    let substeps = if theta > fr(0.5) {
        let m: f64 = nalgebra::try_convert(theta / fr::<T>(0.5)).unwrap_or(1.0);
        m.ceil() as usize
    } else {
        1
    };
    let dt = scale / fr::<T>(substeps as f64);
    let coeff = Complex::new(T::zero(), -dt);

    let mut y = psi.clone();
    for _ in 0..substeps {
        let mut term = y.clone();
        let mut acc = y.clone();
        let ynorm = y.norm().max(T::default_epsilon());
        for k in 1..=30usize {
            term = h * &term * (coeff / Complex::new(fr(k as f64), T::zero()));
            acc += &term;
            if term.norm() <= ynorm * T::default_epsilon() * fr(0.25) {
                break;
            }
        }
        y = acc;
    }
    y
}

/// Eigendecomposition of a unitary matrix into (λ_j, |φ_j⟩) with
/// U = Σ e^{-iλ_j} |φ_j⟩⟨φ_j| and λ_j ∈ (-π, π].
///
/// Works through the commuting Hermitian parts (U+U†)/2 and (U-U†)/(2i):
/// eigenspaces of the first are refined by the second, which resolves all
/// unitary eigenvalue degeneracies and keeps eigenvectors orthonormal.
pub fn eig_unitary<T: Real>(u: &DMatrix<C<T>>) -> Result<Vec<(T, DVector<C<T>>)>> {
    let d = u.nrows();
    let udag = u.adjoint();
    let half = Complex::new(fr::<T>(0.5), T::zero());
    let half_i = Complex::new(T::zero(), -fr::<T>(0.5));
    let h1 = (u + &udag) * half;
    let h2 = (u - &udag) * half_i;

    let (vals, vecs) = eigh(&h1);
    let cluster_tol = fr::<T>(1e-7).max(T::default_epsilon() * fr(100.0));

    let mut out: Vec<(T, DVector<C<T>>)> = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals[end] - vals[end - 1]).abs() < cluster_tol {
            end += 1;
        }
        let nc = end - start;
        let q = vecs.columns(start, nc).into_owned();
        if nc == 1 {
            out.push((T::zero(), q.column(0).into_owned()));
        } else {
            let m = q.adjoint() * &h2 * &q;
            let (_, w) = eigh(&m);
            let refined = q * w;
            for c in 0..nc {
                out.push((T::zero(), refined.column(c).into_owned()));
            }
        }
        start = end;
    }

    let utol = fr::<T>(1e-8);
    for (lambda, v) in out.iter_mut() {
        let uv = u * &*v;
        let mu = v.dotc(&uv);
        // eigenphase: U|v⟩ = e^{-iλ}|v⟩
        let lam = -mu.im.atan2(mu.re);
        *lambda = if lam <= -T::pi() { T::pi() } else { lam };
        let residual = (&uv - &*v * mu).norm();
        if residual > utol * fr(d as f64) {
            return Err(Error::argument(format!(
                "unitary eigendecomposition residual {:e}",
                nalgebra::try_convert::<T, f64>(residual).unwrap_or(f64::NAN)
            )));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}
