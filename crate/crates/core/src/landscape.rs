//! Numerical verification of control-landscape topology at small dimension.
//!
//! Unitary-objective critical manifolds are probed by building exact critical
//! points W_n = V·T(I_{d-n} ⊕ -I_n)T† and measuring the curvature of
//! J[U] = 2 Re Tr(V†U) under perturbations e^{-ih}U, directly on the
//! unitary-group tangent. State-preparation optima are sampled by running
//! the actual gradient search and checking the commutator condition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;

use crate::bases::{hermitian_basis, traceless_hermitian_basis};
use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::operator::{frobenius, Operator};
use crate::optimize::{
    gradient_ascent, random_seed_params, AscentOptions, Objective, ObjectiveKind,
};
use crate::random::haar_unitary;
use crate::scalar::{fr, Real, C};

/// The d+1 critical values of J = 2 Re Tr(V†U): {-2d, -2d+4, ..., 2d}.
pub fn critical_values<T: Real>(d: usize) -> Vec<T> {
    (0..=d)
        .map(|n| fr(2.0 * (d as f64 - 2.0 * n as f64)))
        .rev()
        .collect()
}

/// Analytic Hessian signature on the critical manifold with n eigenvalues
/// at -1: (positive, negative, zero) = (n², (d-n)², 2n(d-n)).
pub fn hessian_signature(d: usize, n: usize) -> Result<(usize, usize, usize)> {
    if n > d {
        return Err(Error::argument(format!("n = {n} exceeds d = {d}")));
    }
    Ok((n * n, (d - n) * (d - n), 2 * n * (d - n)))
}

/// Signature measured from the quadratic form ℋ_h(U) = -Re Tr(V†h²U) at a
/// randomly conjugated critical point, plus the critical value 2 Re Tr(V†U).
pub fn numeric_hessian_check<T: Real>(
    v: &Operator<T>,
    n: usize,
    rng: &mut impl Rng,
) -> Result<((usize, usize, usize), T)> {
    let d = v.dim();
    if n > d {
        return Err(Error::argument(format!("n = {n} exceeds d = {d}")));
    }
    let t = haar_unitary::<T, _>(d, rng);
    let mut signs: DMatrix<C<T>> = DMatrix::identity(d, d);
    for i in (d - n)..d {
        signs[(i, i)] = Complex::new(-T::one(), T::zero());
    }
    // critical point U_n = V · T diag(1..1,-1..-1) T†
    let w = t.matrix() * signs * t.matrix().adjoint();
    let u_n = v.matrix() * w;

    let critical_value = {
        let tr = crate::operator::mat_trace_inner(v.matrix(), &u_n);
        tr.re + tr.re
    };

    // Hessian over the d² canonical Hermitian directions:
    // B(h1,h2) = -½ Re Tr(V†(h1h2 + h2h1)U)
    let dirs = hermitian_basis::<T>(d);
    let vdag = v.matrix().adjoint();
    let u_vdag = &u_n * &vdag; // Tr(V† X U) = Tr(X U V†)
    let m = dirs.len();
    let mut hess: DMatrix<C<T>> = DMatrix::zeros(m, m);
    // Precompute E_μ · (U V†) to turn each entry into a trace product.
    let right: Vec<DMatrix<C<T>>> = dirs.iter().map(|e| e.matrix() * &u_vdag).collect();
    for a in 0..m {
        for b in a..m {
            let t1 = trace_of_prod(dirs[a].matrix(), &right[b]);
            let t2 = trace_of_prod(dirs[b].matrix(), &right[a]);
            let val = -(t1.re + t2.re) * fr::<T>(0.5);
            hess[(a, b)] = Complex::new(val, T::zero());
            hess[(b, a)] = Complex::new(val, T::zero());
        }
    }
    let (evals, _) = eigh(&hess);
    Ok((count_signs(evals.as_slice()), critical_value))
}

fn trace_of_prod<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> C<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Count (positive, negative, zero) with the zero band at 1e-8 of the
/// largest magnitude.
fn count_signs<T: Real>(evals: &[T]) -> (usize, usize, usize) {
    let mut max_mag = T::zero();
    for v in evals {
        max_mag = max_mag.max(v.abs());
    }
    let tol = max_mag * fr(1e-8) + fr(1e-300);
    let mut pos = 0;
    let mut neg = 0;
    let mut zero = 0;
    for v in evals {
        if *v > tol {
            pos += 1;
        } else if *v < -tol {
            neg += 1;
        } else {
            zero += 1;
        }
    }
    (pos, neg, zero)
}

/// Signature of the state-preparation Hessian at a perfect optimum with
/// final state |f⟩, over the traceless (su(d)) tangent directions:
/// Q(h) = -(⟨f|h²|f⟩ - ⟨f|h|f⟩²). Zero count is (d-1)², the dimension of
/// the U(d-1) critical submanifold inside su(d).
pub fn stateprep_hessian_signature<T: Real>(f: &DVector<C<T>>) -> (usize, usize, usize) {
    let d = f.len();
    let dirs = traceless_hermitian_basis::<T>(d);
    let m = dirs.len();
    let hf: Vec<DVector<C<T>>> = dirs.iter().map(|e| e.matrix() * f).collect();
    let means: Vec<C<T>> = hf.iter().map(|v| f.dotc(v)).collect();
    let mut hess: DMatrix<C<T>> = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            // ⟨f|(h_a h_b + h_b h_a)/2|f⟩ = Re ⟨h_a f | h_b f⟩
            let cross = hf[a].dotc(&hf[b]).re;
            let val = -(cross - (means[a] * means[b]).re);
            hess[(a, b)] = Complex::new(val, T::zero());
            hess[(b, a)] = Complex::new(val, T::zero());
        }
    }
    let (evals, _) = eigh(&hess);
    count_signs(evals.as_slice())
}

/// Statistics from sampling state-preparation searches.
#[derive(Debug, Clone)]
pub struct SamplerStats<T: Real> {
    pub n_samples: usize,
    /// Fraction of seeds reaching fidelity > 0.99.
    pub high_fidelity_fraction: T,
    /// Largest ‖[ρ_ψ, ρ_f]‖_F over points classified as converged.
    pub max_commutator_residual: T,
    /// Number of seeds classified as converged.
    pub converged_count: usize,
    pub mean_path_length: T,
    pub best_value: T,
}

/// Run `n_samples` independent searches on a state-preparation objective and
/// measure how often they reach the top of the landscape and how well the
/// commutator condition [ρ_ψ, ρ_f] = 0 holds there.
pub fn stateprep_critical_sampler<T: Real + Send + Sync>(
    obj: &Objective<T>,
    n_samples: usize,
    rng_seed: u64,
    opts: &AscentOptions<T>,
) -> Result<SamplerStats<T>> {
    let ObjectiveKind::StatePrep { initial, target } = &obj.kind else {
        return Err(Error::argument(
            "critical sampler requires a state-preparation objective",
        ));
    };
    use rand::SeedableRng;
    use rayon::prelude::*;

    let runs: Vec<Result<(T, bool, T, T)>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(i as u64);
            let seed = random_seed_params(&obj.layout, &mut rng);
            let report = gradient_ascent(obj, &seed, opts)?;
            let fields = crate::waveform::render(&report.best_params, &obj.system)?;
            let psi = crate::propagation::evolve_state(initial, &obj.system, &fields)?;
            let commutator = state_commutator_residual(&psi, target);
            let converged =
                report.converged || (T::one() - report.best_value) <= fr(1e-9);
            Ok((report.best_value, converged, commutator, report.path_length))
        })
        .collect();

    let mut high = 0usize;
    let mut converged_count = 0usize;
    let mut max_comm = T::zero();
    let mut path_acc = T::zero();
    let mut best = T::zero();
    for r in runs {
        let (value, converged, comm, path) = r?;
        if value > fr(0.99) {
            high += 1;
        }
        if converged {
            converged_count += 1;
            max_comm = max_comm.max(comm);
        }
        path_acc += path;
        best = best.max(value);
    }
    Ok(SamplerStats {
        n_samples,
        high_fidelity_fraction: fr::<T>(high as f64) / fr(n_samples as f64),
        max_commutator_residual: max_comm,
        converged_count,
        mean_path_length: path_acc / fr(n_samples as f64),
        best_value: best,
    })
}

/// ‖[|ψ⟩⟨ψ|, |f⟩⟨f|]‖_F.
pub fn state_commutator_residual<T: Real>(psi: &DVector<C<T>>, f: &DVector<C<T>>) -> T {
    let rho_psi = Operator::projector(psi);
    let rho_f = Operator::projector(f);
    let comm = rho_psi.commutator(&rho_f).expect("same dims");
    frobenius(&comm)
}

/// A dimensionless controllable test bench for landscape sampling:
/// drift = 0.4·Jz² with unit-bounded Jx, Jy channels (controllable by the
/// rank-2 criterion for d > 2).
pub fn generic_controllable_system<T: Real>(
    spin: crate::spin::Spin,
) -> crate::hamiltonians::ControlSystem<T> {
    let gen = crate::spin::angular_momentum_generators::<T>(spin);
    let jz2 = Operator::hermitian(gen.jz.matrix() * gen.jz.matrix()).expect("Jz² hermitian");
    crate::hamiltonians::ControlSystem {
        dim: spin.dim(),
        drift: jz2.scale(fr(0.4)),
        groups: vec![
            crate::hamiltonians::ChannelGroup {
                label: "jx".into(),
                ops: vec![gen.jx],
                amplitude_bound: T::one(),
                slew_time: T::one(),
                amp_controlled: true,
            },
            crate::hamiltonians::ChannelGroup {
                label: "jy".into(),
                ops: vec![gen.jy],
                amplitude_bound: T::one(),
                slew_time: T::one(),
                amp_controlled: true,
            },
        ],
        phase_primitive: None,
        phase_primitive_strength: T::zero(),
    }
}
