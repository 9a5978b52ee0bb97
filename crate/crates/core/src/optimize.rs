//! Objective functions, gradients, and multistart gradient-ascent search.
//!
//! Gradients come in three flavors: central finite differences (any layout),
//! the piecewise-constant forward/backward sweep (the classic O(N) trick),
//! and the same sweep chained through the spline rendering for knot-based
//! layouts. The sweep step derivative is symmetrized, ½(H_j·U + U·H_j),
//! which is second-order accurate in Δt·‖H‖ at no extra propagation cost.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonians::ControlSystem;
use crate::linalg::exp_action;
use crate::operator::Operator;
use crate::propagation::{evolve_state, propagate, step_hamiltonian};
use crate::scalar::{fr, Real, C};
use crate::waveform::{chain_gradient, render, SampledFields, WaveformLayout, WaveformParams};

/// What the search maximizes.
#[derive(Debug, Clone)]
pub enum ObjectiveKind<T: Real> {
    StatePrep {
        initial: DVector<C<T>>,
        target: DVector<C<T>>,
    },
    UnitaryTarget {
        target: Operator<T>,
    },
}

/// Objective = kind + system + waveform layout.
#[derive(Debug, Clone)]
pub struct Objective<T: Real> {
    pub kind: ObjectiveKind<T>,
    pub system: ControlSystem<T>,
    pub layout: WaveformLayout<T>,
}

impl<T: Real> Objective<T> {
    pub fn state_prep(
        system: ControlSystem<T>,
        layout: WaveformLayout<T>,
        initial: DVector<C<T>>,
        target: DVector<C<T>>,
    ) -> Result<Self> {
        for (name, v) in [("initial", &initial), ("target", &target)] {
            if v.len() != system.dim {
                return Err(Error::DimMismatch(v.len(), system.dim));
            }
            if (v.norm() - T::one()).abs() > fr(1e-8) {
                return Err(Error::argument(format!("{name} state is not normalized")));
            }
        }
        Ok(Objective {
            kind: ObjectiveKind::StatePrep { initial, target },
            system,
            layout,
        })
    }

    pub fn unitary_target(
        system: ControlSystem<T>,
        layout: WaveformLayout<T>,
        target: Operator<T>,
    ) -> Result<Self> {
        if target.dim() != system.dim {
            return Err(Error::DimMismatch(target.dim(), system.dim));
        }
        if crate::operator::unitary_deviation(target.matrix()) > crate::scalar::unitary_tol() {
            return Err(Error::argument("unitary objective target is not unitary"));
        }
        Ok(Objective {
            kind: ObjectiveKind::UnitaryTarget { target },
            system,
            layout,
        })
    }

    fn params_unchecked(&self, raw: DVector<T>) -> WaveformParams<T> {
        WaveformParams {
            raw,
            layout: self.layout.clone(),
        }
    }

    /// Objective value for a raw vector (no box validation; used internally
    /// by finite differences which probe just outside the box).
    pub fn value_raw(&self, raw: &DVector<T>) -> Result<T> {
        let params = self.params_unchecked(raw.clone());
        let fields = render(&params, &self.system)?;
        self.value_fields(&fields)
    }

    pub fn value(&self, params: &WaveformParams<T>) -> Result<T> {
        let fields = render(params, &self.system)?;
        self.value_fields(&fields)
    }

    fn value_fields(&self, fields: &SampledFields<T>) -> Result<T> {
        match &self.kind {
            ObjectiveKind::StatePrep { initial, target } => {
                let psi = evolve_state(initial, &self.system, fields)?;
                let overlap = target.dotc(&psi);
                Ok(overlap.modulus_squared())
            }
            ObjectiveKind::UnitaryTarget { target } => {
                let u = propagate(&self.system, fields)?;
                let tr = crate::operator::mat_trace_inner(target.matrix(), u.matrix());
                Ok(tr.modulus() / fr(self.system.dim as f64))
            }
        }
    }
}

/// |⟨target| U |initial⟩|² for a state-preparation objective.
pub fn state_fidelity<T: Real>(obj: &Objective<T>, params: &WaveformParams<T>) -> Result<T> {
    match obj.kind {
        ObjectiveKind::StatePrep { .. } => obj.value(params),
        _ => Err(Error::argument(
            "state_fidelity requires a state-preparation objective",
        )),
    }
}

/// |Tr(W†U)|/d for a unitary-target objective (global-phase invariant).
pub fn unitary_fidelity<T: Real>(obj: &Objective<T>, params: &WaveformParams<T>) -> Result<T> {
    match obj.kind {
        ObjectiveKind::UnitaryTarget { .. } => obj.value(params),
        _ => Err(Error::argument(
            "unitary_fidelity requires a unitary-target objective",
        )),
    }
}

/// Central finite differences per coordinate.
pub fn fd_gradient<T: Real>(
    obj: &Objective<T>,
    params: &WaveformParams<T>,
    h: T,
) -> Result<DVector<T>> {
    if h <= T::zero() {
        return Err(Error::argument("finite-difference step must be positive"));
    }
    let n = params.raw.len();
    let mut grad = DVector::zeros(n);
    let mut probe = params.raw.clone();
    for i in 0..n {
        let x0 = probe[i];
        probe[i] = x0 + h;
        let up = obj.value_raw(&probe)?;
        probe[i] = x0 - h;
        let dn = obj.value_raw(&probe)?;
        probe[i] = x0;
        grad[i] = (up - dn) / (h + h);
    }
    Ok(grad)
}

/// O(N) gradient for piecewise-constant layouts via one forward and one
/// backward propagation sweep.
pub fn grape_gradient<T: Real>(
    obj: &Objective<T>,
    params: &WaveformParams<T>,
) -> Result<DVector<T>> {
    if !params.layout.piecewise_constant {
        return Err(Error::UnsupportedLayout(
            "the sweep gradient over knots requires a piecewise-constant layout; \
             spline layouts go through the chained sweep inside gradient_ascent"
                .into(),
        ));
    }
    Ok(sweep_gradient(obj, params)?.1)
}

/// Sweep gradient for any layout: (objective value, d objective / d raw).
pub(crate) fn sweep_gradient<T: Real>(
    obj: &Objective<T>,
    params: &WaveformParams<T>,
) -> Result<(T, DVector<T>)> {
    let fields = render(params, &obj.system)?;
    let n = fields.n_samples();
    let row_ops = obj.system.row_ops();
    let n_rows = row_ops.len();
    let dt = fields.dt;

    match &obj.kind {
        ObjectiveKind::StatePrep { initial, target } => {
            let states = crate::propagation::forward_states(initial, &obj.system, &fields);
            let overlap = target.dotc(&states[n]); // o = ⟨f|U|i⟩
            let value = overlap.modulus_squared();

            // e[k+1][row] = ⟨f(k)|H_row|i(k)⟩ for k = -1..N-1 shifted by one.
            let mut elems = vec![Complex::new(T::zero(), T::zero()); (n + 1) * n_rows];
            let mut bwd = target.clone();
            for k in (0..n).rev() {
                for (r, op) in row_ops.iter().enumerate() {
                    let hv = op.matrix() * &states[k + 1];
                    elems[(k + 1) * n_rows + r] = bwd.dotc(&hv);
                }
                let h = step_hamiltonian(&obj.system, &fields, k);
                // ⟨f(k-1)| = ⟨f(k)|U_k, i.e. f(k-1) = U_k† f(k)
                bwd = exp_action(&h, -dt, &bwd);
            }
            for (r, op) in row_ops.iter().enumerate() {
                let hv = op.matrix() * &states[0];
                elems[r] = bwd.dotc(&hv);
            }

            let half_dt = Complex::new(T::zero(), -dt * fr::<T>(0.5)); // -iΔt/2
            let mut row_grads = DMatrix::zeros(n_rows, n);
            for k in 0..n {
                for r in 0..n_rows {
                    let d_overlap =
                        half_dt * (elems[(k + 1) * n_rows + r] + elems[k * n_rows + r]);
                    // dJ = 2 Re(conj(o) · do)
                    let t = overlap.conj() * d_overlap;
                    row_grads[(r, k)] = (t.re + t.re) * T::one();
                }
            }
            Ok((value, chain_gradient(params, &obj.system, &row_grads)))
        }
        ObjectiveKind::UnitaryTarget { target } => {
            let d = obj.system.dim;
            // forward partial products A_k = U_k ... U_0
            let mut partials: Vec<DMatrix<C<T>>> = Vec::with_capacity(n + 1);
            partials.push(DMatrix::identity(d, d));
            let mut acc: DMatrix<C<T>> = DMatrix::identity(d, d);
            for k in 0..n {
                let h = step_hamiltonian(&obj.system, &fields, k);
                acc = crate::linalg::expm_hermitian(&h, dt) * acc;
                partials.push(acc.clone());
            }
            let o = crate::operator::mat_trace_inner(target.matrix(), &acc);
            let abs_o = o.modulus();
            let value = abs_o / fr(d as f64);

            // e[k+1][row] = Tr(B_k H_row A_k) with B_k = W† U_N..U_{k+1}
            let mut elems = vec![Complex::new(T::zero(), T::zero()); (n + 1) * n_rows];
            let mut b = target.matrix().adjoint();
            for k in (0..n).rev() {
                // Tr(B H A) = Tr(H A B)
                let e = &partials[k + 1] * &b;
                for (r, op) in row_ops.iter().enumerate() {
                    elems[(k + 1) * n_rows + r] = trace_prod(op.matrix(), &e);
                }
                let h = step_hamiltonian(&obj.system, &fields, k);
                b *= crate::linalg::expm_hermitian(&h, dt);
            }
            let e0 = &partials[0] * &b;
            for (r, op) in row_ops.iter().enumerate() {
                elems[r] = trace_prod(op.matrix(), &e0);
            }

            let half_dt = Complex::new(T::zero(), -dt * fr::<T>(0.5));
            let phase = if abs_o > T::default_epsilon() {
                o.conj() / Complex::new(abs_o, T::zero())
            } else {
                Complex::new(T::one(), T::zero())
            };
            let scale = T::one() / fr::<T>(d as f64);
            let mut row_grads = DMatrix::zeros(n_rows, n);
            for k in 0..n {
                for r in 0..n_rows {
                    let d_o = half_dt * (elems[(k + 1) * n_rows + r] + elems[k * n_rows + r]);
                    row_grads[(r, k)] = (phase * d_o).re * scale;
                }
            }
            Ok((value, chain_gradient(params, &obj.system, &row_grads)))
        }
    }
}

fn trace_prod<T: Real>(a: &DMatrix<C<T>>, b: &DMatrix<C<T>>) -> C<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// How `gradient_ascent` obtains its gradients.
#[derive(Debug, Clone, Copy)]
pub enum GradientMethod<T: Real> {
    /// Forward/backward sweep (chained through the rendering for splines).
    Sweep,
    /// Central finite differences with the given step.
    FiniteDifference { h: T },
}

/// Ascent controls.
#[derive(Debug, Clone)]
pub struct AscentOptions<T: Real> {
    /// Initial trial step ε.
    pub step: T,
    /// Convergence threshold δ on the projected gradient norm.
    pub tol: T,
    pub max_iters: usize,
    /// Armijo sufficient-increase constant.
    pub armijo_c: T,
    /// Give up back-tracking below this step.
    pub min_step: T,
    pub gradient: GradientMethod<T>,
}

impl<T: Real> Default for AscentOptions<T> {
    fn default() -> Self {
        AscentOptions {
            step: fr(0.1),
            tol: fr(1e-3),
            max_iters: 2_000,
            armijo_c: fr(1e-4),
            min_step: fr(1e-14),
            gradient: GradientMethod::Sweep,
        }
    }
}

/// Outcome of a search.
#[derive(Debug, Clone)]
pub struct SearchReport<T: Real> {
    pub best_params: WaveformParams<T>,
    pub best_value: T,
    pub seeds_run: usize,
    pub iterations: usize,
    pub converged: bool,
    pub rng_seed: u64,
    /// Objective value after each accepted step of the winning search.
    pub objective_trace: Vec<T>,
    /// Parameter-space path length of the winning search.
    pub path_length: T,
}

fn clip<T: Real>(v: &DVector<T>) -> DVector<T> {
    v.map(|x| x.min(T::one()).max(-T::one()))
}

/// Projected gradient: zero out components pushing outside the box.
fn projected<T: Real>(x: &DVector<T>, g: &DVector<T>) -> DVector<T> {
    DVector::from_fn(x.len(), |i, _| {
        let at_hi = x[i] >= T::one() && g[i] > T::zero();
        let at_lo = x[i] <= -T::one() && g[i] < T::zero();
        if at_hi || at_lo {
            T::zero()
        } else {
            g[i]
        }
    })
}

/// Box-constrained gradient ascent with Armijo backtracking.
pub fn gradient_ascent<T: Real>(
    obj: &Objective<T>,
    seed_params: &WaveformParams<T>,
    opts: &AscentOptions<T>,
) -> Result<SearchReport<T>> {
    let mut x = clip(&seed_params.raw);
    let mut value = obj.value_raw(&x)?;
    if !value.is_finite() {
        return Err(Error::NonFinite("objective at seed"));
    }
    let mut trace = vec![value];
    let mut step = opts.step;
    let mut iterations = 0;
    let mut converged = false;
    let mut path_length = T::zero();

    for _ in 0..opts.max_iters {
        let grad = match opts.gradient {
            GradientMethod::Sweep => {
                let (v, g) = sweep_gradient(obj, &obj.params_unchecked(x.clone()))?;
                value = v;
                g
            }
            GradientMethod::FiniteDifference { h } => {
                fd_gradient(obj, &obj.params_unchecked(x.clone()), h)?
            }
        };
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective gradient"));
        }
        let proj = projected(&x, &grad);
        if proj.norm() <= opts.tol {
            converged = true;
            break;
        }

        // Armijo backtracking along clip(x + s·g).
        let mut accepted = false;
        let mut s = step;
        while s >= opts.min_step {
            let candidate = clip(&(&x + &grad * s));
            let displacement = &candidate - &x;
            let predicted = grad.dot(&displacement);
            if predicted <= T::zero() {
                break; // fully blocked by the box
            }
            let cand_value = obj.value_raw(&candidate)?;
            if !cand_value.is_finite() {
                return Err(Error::NonFinite("objective during line search"));
            }
            if cand_value >= value + opts.armijo_c * predicted {
                path_length += displacement.norm();
                x = candidate;
                value = cand_value;
                trace.push(value);
                accepted = true;
                break;
            }
            s *= fr(0.5);
        }
        iterations += 1;
        if !accepted {
            break; // no improving step at the smallest scale
        }
        // warm-start the next line search
        step = (s + s).min(fr(1e3));
    }

    Ok(SearchReport {
        best_params: WaveformParams::new(x, seed_params.layout.clone())?,
        best_value: value,
        seeds_run: 1,
        iterations,
        converged,
        rng_seed: 0,
        objective_trace: trace,
        path_length,
    })
}

/// Draw a raw seed vector: uniform on [0,1], affinely mapped to [-1,1].
pub fn random_seed_params<T: Real>(
    layout: &WaveformLayout<T>,
    rng: &mut impl Rng,
) -> WaveformParams<T> {
    let raw = DVector::from_fn(layout.n_vars(), |_, _| {
        let u: f64 = rng.gen();
        fr::<T>(2.0 * u - 1.0)
    });
    WaveformParams {
        raw,
        layout: layout.clone(),
    }
}

/// Best of `n_seeds` independent gradient-ascent runs; deterministic for a
/// fixed `rng_seed` regardless of thread scheduling.
pub fn multistart<T: Real + Send + Sync>(
    obj: &Objective<T>,
    n_seeds: usize,
    rng_seed: u64,
    opts: &AscentOptions<T>,
) -> Result<SearchReport<T>> {
    if n_seeds == 0 {
        return Err(Error::argument("multistart needs at least one seed"));
    }
    let reports: Vec<Result<SearchReport<T>>> = (0..n_seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(i as u64);
            let seed = random_seed_params(&obj.layout, &mut rng);
            gradient_ascent(obj, &seed, opts)
        })
        .collect();

    let mut best: Option<(usize, SearchReport<T>)> = None;
    let mut total_iters = 0;
    let mut any_converged = false;
    for (i, r) in reports.into_iter().enumerate() {
        let r = r?;
        total_iters += r.iterations;
        any_converged |= r.converged;
        let better = match &best {
            None => true,
            Some((_, b)) => r.best_value > b.best_value,
        };
        if better {
            best = Some((i, r));
        }
    }
    let (_, mut report) = best.expect("n_seeds >= 1");
    report.seeds_run = n_seeds;
    report.iterations = total_iters;
    report.converged = any_converged;
    report.rng_seed = rng_seed;
    Ok(report)
}
