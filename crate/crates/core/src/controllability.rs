//! Lie-algebra closure and controllability tests.
//!
//! The closure routine mirrors the reference procedure: operators are mapped
//! to real coordinate vectors over the traceless Hermitian basis (which
//! projects out the identity), Gram-Schmidt-orthonormalized with
//! re-orthogonalization, and new directions are produced breadth-first by
//! commutating each basis element with all earlier ones until the set closes
//! or spans su(d). A projector onto the orthogonal complement is maintained
//! alongside; its residual is the run's stability check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::bases::from_traceless_coords;
use crate::bases::traceless_coords;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::{fr, Real, C};
use crate::spin::Spin;
use crate::tensors::{spherical_tensor, TensorIndex};

/// Default acceptance threshold on squared norms ("zeroish").
pub fn default_closure_tol<T: Real>() -> T {
    fr(1e-10)
}

/// Orthonormal coordinate basis of the generated Lie algebra.
#[derive(Debug, Clone)]
pub struct AlgebraBasis<T: Real> {
    pub dim_hilbert: usize,
    /// Mutually orthonormal coordinate vectors of length d²-1.
    pub vectors: Vec<DVector<T>>,
}

impl<T: Real> AlgebraBasis<T> {
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    /// Rebuild basis element `i` as a Hermitian matrix.
    pub fn element(&self, i: usize) -> DMatrix<C<T>> {
        from_traceless_coords(self.dim_hilbert, &self.vectors[i])
    }
}

/// Result of a closure run.
#[derive(Debug, Clone)]
pub struct Closure<T: Real> {
    pub dimension: usize,
    pub basis: AlgebraBasis<T>,
    /// False when the complement-projector residual exceeded the stability
    /// bound; the dimension should then be treated as indeterminate.
    pub stable: bool,
    pub residual: T,
}

struct GramState<T: Real> {
    basis: Vec<DVector<T>>,
    mats: Vec<DMatrix<C<T>>>,
    projector: DMatrix<T>,
    tol: T,
    dim: usize,
}

impl<T: Real> GramState<T> {
    fn new(dim: usize, tol: T) -> Self {
        let dalg = dim * dim - 1;
        GramState {
            basis: Vec::new(),
            mats: Vec::new(),
            projector: DMatrix::identity(dalg, dalg),
            tol,
            dim,
        }
    }

    /// Try to insert a candidate coordinate vector; Gram-Schmidt with one
    /// re-orthogonalization pass, gated by the complement projector.
    fn offer(&mut self, candidate: &DVector<T>) -> bool {
        let projected = &self.projector * candidate;
        if projected.dot(&projected) <= self.tol {
            return false;
        }
        let mut v = candidate.clone();
        for _pass in 0..2 {
            for b in &self.basis {
                let overlap = b.dot(&v);
                v -= b * overlap;
            }
            if v.dot(&v) <= self.tol {
                return false;
            }
        }
        let norm = v.dot(&v).sqrt();
        v /= norm;
        self.projector -= &v * v.transpose();
        self.mats.push(from_traceless_coords(self.dim, &v));
        self.basis.push(v);
        true
    }

    fn full(&self) -> bool {
        self.basis.len() == self.dim * self.dim - 1
    }

    /// Frobenius-squared deviation of the complement projector from its
    /// exact value (rank dalg - count).
    fn residual(&self) -> T {
        let expect = fr::<T>((self.dim * self.dim - 1 - self.basis.len()) as f64);
        let mut frob2 = T::zero();
        for x in self.projector.iter() {
            frob2 += *x * *x;
        }
        (frob2 - expect).abs()
    }
}

/// Dimension and basis of the real Lie algebra generated by the Hermitian
/// `generators` under linear combination and commutation, identity projected
/// out.
pub fn lie_closure<T: Real>(generators: &[Operator<T>], tol: T) -> Result<Closure<T>> {
    if generators.is_empty() {
        return Err(Error::argument("empty generator list"));
    }
    if tol <= T::zero() {
        return Err(Error::argument("closure tolerance must be positive"));
    }
    let dim = generators[0].dim();
    for g in generators {
        if g.dim() != dim {
            return Err(Error::DimMismatch(dim, g.dim()));
        }
        if !g.is_hermitian() {
            return Err(Error::argument("closure generators must be Hermitian"));
        }
    }

    let mut state = GramState::new(dim, tol);
    for g in generators {
        let mut coords = traceless_coords(g.matrix());
        // Normalize up front so the closure is invariant under rescaling.
        let norm = coords.dot(&coords).sqrt();
        if norm > fr(1e-300) {
            coords /= norm;
        }
        state.offer(&coords);
        if state.full() {
            break;
        }
    }

    // Breadth-first: commutate basis element mm against every earlier one.
    let mut mm = 1;
    while mm < state.basis.len() && !state.full() {
        for nn in 0..mm {
            // -i[A, B] is Hermitian for Hermitian A, B.
            let prod = &state.mats[mm] * &state.mats[nn];
            let comm = &prod - prod.adjoint();
            let herm = comm.map(|z| Complex::new(z.im, -z.re)); // multiply by -i
            let coords = traceless_coords(&herm);
            state.offer(&coords);
            if state.full() {
                break;
            }
        }
        mm += 1;
    }

    let residual = state.residual();
    let stable = !state.full() || residual <= fr(1e-10);
    Ok(Closure {
        dimension: state.basis.len(),
        basis: AlgebraBasis {
            dim_hilbert: dim,
            vectors: state.basis,
        },
        stable,
        residual,
    })
}

/// True iff the generators span the whole of su(d).
pub fn is_controllable<T: Real>(generators: &[Operator<T>]) -> Result<bool> {
    let closure = lie_closure(generators, default_closure_tol())?;
    if !closure.stable {
        return Err(Error::IndeterminateClosure(
            nalgebra::try_convert(closure.residual).unwrap_or(f64::NAN),
        ));
    }
    let d = generators[0].dim();
    Ok(closure.dimension == d * d - 1)
}

/// Analytic rank-2 controllability criterion: h together with {Jx, Jy} gives
/// full control of a d > 2 spin space iff h overlaps some rank-2 tensor.
pub fn rank2_criterion<T: Real>(h: &Operator<T>, spin: Spin) -> Result<bool> {
    if spin.dim() <= 2 {
        return Err(Error::argument(
            "rank-2 criterion requires d > 2 (theorem precondition)",
        ));
    }
    if h.dim() != spin.dim() {
        return Err(Error::DimMismatch(h.dim(), spin.dim()));
    }
    if !h.is_hermitian() {
        return Err(Error::argument(
            "rank-2 criterion expects a Hermitian operator",
        ));
    }
    let scale = h.frobenius_norm().max(T::default_epsilon());
    let tol = fr::<T>(1e-10) * scale;
    for q in -2..=2i32 {
        let t = spherical_tensor::<T>(spin, TensorIndex { k: 2, q })?;
        let overlap = crate::operator::mat_trace_inner(h.matrix(), t.matrix());
        let mag2 = overlap.re * overlap.re + overlap.im * overlap.im;
        if mag2 > tol * tol {
            return Ok(true);
        }
    }
    Ok(false)
}
