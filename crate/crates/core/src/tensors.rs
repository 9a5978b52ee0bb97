//! Irreducible spherical tensor operators, single- and two-manifold.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::cg::clebsch_gordan;
use crate::error::{Error, Result};
use crate::half::Half;
use crate::operator::Operator;
use crate::scalar::{fr, Real, C};
use crate::spin::Spin;

/// Rank and component of a spherical tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorIndex {
    pub k: u32,
    pub q: i32,
}

impl TensorIndex {
    pub fn new(k: u32, q: i32) -> Result<Self> {
        if q.unsigned_abs() > k {
            return Err(Error::argument(format!("|q| = {} exceeds k = {k}", q.abs())));
        }
        Ok(TensorIndex { k, q })
    }
}

/// T^(k)_q(J) = √((2k+1)/(2J+1)) Σ_m ⟨J,m+q|k,q;J,m⟩ |J,m+q⟩⟨J,m|.
///
/// Orthonormal under the trace inner product for 0 ≤ k ≤ 2j.
pub fn spherical_tensor<T: Real>(spin: Spin, idx: TensorIndex) -> Result<Operator<T>> {
    if idx.q.unsigned_abs() > idx.k {
        return Err(Error::argument(format!(
            "|q| = {} exceeds k = {}",
            idx.q.abs(),
            idx.k
        )));
    }
    if 2 * idx.k as u64 > 2 * spin.j().doubled() as u64 {
        return Err(Error::argument(format!(
            "rank k = {} exceeds 2j = {} for spin j = {}",
            idx.k,
            spin.j().doubled(),
            spin.j()
        )));
    }
    let block = tensor_block::<T>(spin, spin, idx)?;
    Operator::general(block)
}

/// Two-manifold tensor T^(k)_q(F,F') embedded in the (2F+1)+(2F'+1) space
/// ordered [F block, F' block]; for F = F' this is `spherical_tensor`.
pub fn cross_tensor<T: Real>(f: Spin, fp: Spin, idx: TensorIndex) -> Result<Operator<T>> {
    if f == fp {
        return spherical_tensor(f, idx);
    }
    let k = Half::int(idx.k as i64);
    let lo = (f.j() - fp.j()).doubled().abs();
    let hi = (f.j() + fp.j()).doubled();
    if k.doubled() < lo || k.doubled() > hi {
        return Err(Error::argument(format!(
            "rank k = {} outside triangle range [{}, {}]",
            idx.k,
            lo / 2,
            hi / 2
        )));
    }
    if idx.q.unsigned_abs() > idx.k {
        return Err(Error::argument(format!(
            "|q| = {} exceeds k = {}",
            idx.q.abs(),
            idx.k
        )));
    }
    let block = tensor_block::<T>(f, fp, idx)?;
    let d = f.dim() + fp.dim();
    let mut out: DMatrix<C<T>> = DMatrix::zeros(d, d);
    out.view_mut((0, f.dim()), (f.dim(), fp.dim()))
        .copy_from(&block);
    Operator::general(out)
}

/// The raw (2F+1)×(2F'+1) block of T^(k)_q(F,F').
pub(crate) fn tensor_block<T: Real>(
    f: Spin,
    fp: Spin,
    idx: TensorIndex,
) -> Result<DMatrix<C<T>>> {
    let norm = ((2 * idx.k as i64 + 1) as f64 / f.dim() as f64).sqrt();
    let k = Half::int(idx.k as i64);
    let q = Half::int(idx.q as i64);
    let mut block: DMatrix<C<T>> = DMatrix::zeros(f.dim(), fp.dim());
    for m in fp.m_values() {
        let m_row = m + q;
        let Ok(row) = f.index_of(m_row) else {
            continue;
        };
        let col = fp.index_of(m)?;
        let cg: f64 = clebsch_gordan(k, q, fp.j(), m, f.j(), m_row)?;
        block[(row, col)] = Complex::new(fr(norm * cg), T::zero());
    }
    Ok(block)
}
