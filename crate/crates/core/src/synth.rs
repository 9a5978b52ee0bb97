//! Constructing arbitrary unitaries and subspace maps from state
//! preparations plus a fiducial-state phase primitive.
//!
//! A target unitary is eigendecomposed, each eigenvector is mapped onto the
//! fiducial state by a state preparation V, the eigenphase is imprinted with
//! the phase primitive, and the map is undone by time-reversing the controls:
//! U = Π_j V_j† e^{-iλ_j|0⟩⟨0|} V_j. Subspace maps come from two-state
//! π-rotations (reflections) that act as the identity on the orthogonal
//! complement.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonians::ControlSystem;
use crate::linalg::{eig_unitary, expm_hermitian};
use crate::operator::{unitary_deviation, Operator};
use crate::propagation::{propagate, time_reverse};
use crate::scalar::{fr, unitary_tol, Real, C};
use crate::spin::{angular_momentum_generators, Spin};
use crate::waveform::{render, WaveformParams};

/// Eigenpairs (λ_j, |φ_j⟩) of a unitary with U = Σ e^{-iλ_j}|φ_j⟩⟨φ_j| and
/// λ_j ∈ (-π, π], orthonormal under degeneracy.
pub fn eigendecompose<T: Real>(u: &Operator<T>) -> Result<Vec<(T, DVector<C<T>>)>> {
    if unitary_deviation(u.matrix()) > unitary_tol() {
        return Err(Error::argument("eigendecompose expects a unitary operator"));
    }
    eig_unitary(u.matrix())
}

/// A constant-Hamiltonian segment realizing exp(-iλ|0⟩⟨0|).
#[derive(Debug, Clone)]
pub struct PhaseSegment<T: Real> {
    /// Phase reduced mod 2π into [0, 2π).
    pub phase: T,
    /// Duration at the system's primitive strength (s).
    pub duration: T,
    pub operator: Operator<T>,
}

/// exp(-iλ|0⟩⟨0|) as a pulse on the system's phase primitive, with the
/// duration reduced mod 2π to the minimal non-negative value.
pub fn phase_primitive_pulse<T: Real>(
    lambda: T,
    system: &ControlSystem<T>,
) -> Result<PhaseSegment<T>> {
    let Some(projector) = &system.phase_primitive else {
        return Err(Error::UnsupportedSystem(
            "system has no phase primitive".into(),
        ));
    };
    let two_pi = fr::<T>(std::f64::consts::TAU);
    let mut phase = lambda % two_pi;
    if phase < T::zero() {
        phase += two_pi;
    }
    let strength = system.phase_primitive_strength;
    let duration = if strength > T::zero() {
        phase / strength
    } else {
        T::zero()
    };
    // exp(-iλP) = I + (e^{-iλ} - 1)P for a rank-1 projector.
    let d = system.dim;
    let factor = Complex::new(phase.cos() - T::one(), -phase.sin());
    let mat = DMatrix::identity(d, d) + projector.matrix() * factor;
    Ok(PhaseSegment {
        phase,
        duration,
        operator: Operator::unitary(mat)?,
    })
}

/// How a state map |φ⟩ → |0⟩ is realized.
#[derive(Debug, Clone)]
pub enum MapRealization<T: Real> {
    /// Analytic unitary executed as a matrix (oracle path).
    Matrix(Operator<T>),
    /// Optimized control waveform.
    Pulse(WaveformParams<T>),
}

/// A state map with its recorded fidelity |⟨0|V|φ⟩|².
#[derive(Debug, Clone)]
pub struct StateMap<T: Real> {
    pub realization: MapRealization<T>,
    pub fidelity: T,
}

impl<T: Real> StateMap<T> {
    /// The forward unitary V.
    pub fn unitary(&self, system: &ControlSystem<T>) -> Result<Operator<T>> {
        match &self.realization {
            MapRealization::Matrix(op) => Ok(op.clone()),
            MapRealization::Pulse(params) => propagate(system, &render(params, system)?),
        }
    }

    /// The reverse unitary V†, realized by time-reversed controls for pulses.
    pub fn reverse_unitary(&self, system: &ControlSystem<T>) -> Result<Operator<T>> {
        match &self.realization {
            MapRealization::Matrix(op) => Ok(op.adjoint()),
            MapRealization::Pulse(params) => {
                let fields = render(params, system)?;
                propagate(system, &time_reverse(&fields, system)?)
            }
        }
    }
}

/// Supplies state maps |φ⟩ → |fiducial⟩ for synthesis.
pub trait StateMapProvider<T: Real> {
    fn map_to_fiducial(
        &self,
        system: &ControlSystem<T>,
        state: &DVector<C<T>>,
        fiducial: usize,
    ) -> Result<StateMap<T>>;
}

/// Analytic provider: the two-state reflection between |φ⟩ and the fiducial
/// basis vector, executed as a matrix.
pub struct ExactMapProvider;

impl<T: Real> StateMapProvider<T> for ExactMapProvider {
    fn map_to_fiducial(
        &self,
        _system: &ControlSystem<T>,
        state: &DVector<C<T>>,
        fiducial: usize,
    ) -> Result<StateMap<T>> {
        let mut e0: DVector<C<T>> = DVector::zeros(state.len());
        e0[fiducial] = Complex::new(T::one(), T::zero());
        let refl = reflection(state, &e0)?;
        Ok(StateMap {
            realization: MapRealization::Matrix(refl),
            fidelity: T::one(),
        })
    }
}

/// Provider that searches for an optimized control waveform mapping the
/// state onto the fiducial basis vector.
pub struct PulseMapProvider<T: Real> {
    pub layout: crate::waveform::WaveformLayout<T>,
    pub n_seeds: usize,
    pub rng_seed: u64,
    pub opts: crate::optimize::AscentOptions<T>,
    /// Reject maps below this fidelity.
    pub f_min: T,
}

impl<T: Real + Send + Sync> StateMapProvider<T> for PulseMapProvider<T> {
    fn map_to_fiducial(
        &self,
        system: &ControlSystem<T>,
        state: &DVector<C<T>>,
        fiducial: usize,
    ) -> Result<StateMap<T>> {
        let mut target: DVector<C<T>> = DVector::zeros(system.dim);
        target[fiducial] = Complex::new(T::one(), T::zero());
        let obj = crate::optimize::Objective::state_prep(
            system.clone(),
            self.layout.clone(),
            state.clone(),
            target,
        )?;
        let report = crate::optimize::multistart(&obj, self.n_seeds, self.rng_seed, &self.opts)?;
        if report.best_value < self.f_min {
            return Err(Error::argument(format!(
                "state map fidelity {:.6} below threshold {:.6}",
                nalgebra::try_convert::<T, f64>(report.best_value).unwrap_or(f64::NAN),
                nalgebra::try_convert::<T, f64>(self.f_min).unwrap_or(f64::NAN),
            )));
        }
        Ok(StateMap {
            realization: MapRealization::Pulse(report.best_params),
            fidelity: report.best_value,
        })
    }
}

/// One synthesis step: an eigenphase and the state map realizing it.
#[derive(Debug, Clone)]
pub struct SynthesisStep<T: Real> {
    pub eigenphase: T,
    pub phase_duration: T,
    pub eigenvector: DVector<C<T>>,
    pub map: StateMap<T>,
}

/// Ordered plan realizing a target unitary.
#[derive(Debug, Clone)]
pub struct SynthesisPlan<T: Real> {
    pub steps: Vec<SynthesisStep<T>>,
    pub fiducial_index: usize,
    pub target: Operator<T>,
    pub realized: Operator<T>,
    /// |Tr(target† realized)| / d.
    pub fidelity: T,
}

/// Index of the basis state the phase primitive projects onto.
pub fn fiducial_index<T: Real>(system: &ControlSystem<T>) -> Result<usize> {
    let Some(projector) = &system.phase_primitive else {
        return Err(Error::UnsupportedSystem(
            "system has no phase primitive".into(),
        ));
    };
    let m = projector.matrix();
    for i in 0..m.nrows() {
        if (m[(i, i)].re - T::one()).abs() < fr(1e-9) {
            return Ok(i);
        }
    }
    Err(Error::UnsupportedSystem(
        "phase primitive is not a basis-state projector".into(),
    ))
}

/// A bare d-dimensional container system for matrix-level synthesis: no
/// channels, phase primitive on basis state 0.
pub fn matrix_synthesis_system<T: Real>(d: usize) -> ControlSystem<T> {
    let mut prim: DMatrix<C<T>> = DMatrix::zeros(d, d);
    prim[(0, 0)] = Complex::new(T::one(), T::zero());
    ControlSystem {
        dim: d,
        drift: Operator::zeros(d),
        groups: Vec::new(),
        phase_primitive: Some(Operator::hermitian(prim).expect("projector")),
        phase_primitive_strength: T::one(),
    }
}

/// Synthesize `target` from state preparations and phase-primitive pulses.
///
/// Steps are ordered by eigenphase so degenerate eigenvalues sit adjacent
/// (one phase setting covering several eigenvector maps); eigenphases below
/// 1e-9 are dropped entirely.
pub fn synthesize_unitary<T: Real>(
    target: &Operator<T>,
    system: &ControlSystem<T>,
    provider: &dyn StateMapProvider<T>,
) -> Result<SynthesisPlan<T>> {
    if system.has_drift() {
        return Err(Error::UnsupportedSystem(
            "synthesis requires a drift-free system (time reversal)".into(),
        ));
    }
    let fid_idx = fiducial_index(system)?;
    if target.dim() != system.dim {
        return Err(Error::DimMismatch(target.dim(), system.dim));
    }
    let pairs = eigendecompose(target)?;

    let mut steps = Vec::new();
    let d = system.dim;
    let mut realized: DMatrix<C<T>> = DMatrix::identity(d, d);
    for (j, (lambda, phi)) in pairs.into_iter().enumerate() {
        if lambda.abs() < fr(1e-9) {
            continue;
        }
        let map = provider
            .map_to_fiducial(system, &phi, fid_idx)
            .map_err(|e| Error::Synthesis {
                index: j,
                reason: e.to_string(),
            })?;
        let segment = phase_primitive_pulse(lambda, system)?;
        let v = map.unitary(system)?;
        let v_rev = map.reverse_unitary(system)?;
        let factor = v_rev.matrix() * segment.operator.matrix() * v.matrix();
        realized = factor * realized;
        steps.push(SynthesisStep {
            eigenphase: lambda,
            phase_duration: segment.duration,
            eigenvector: phi,
            map,
        });
    }

    let tr = crate::operator::mat_trace_inner(target.matrix(), &realized);
    let fidelity = tr.modulus() / fr(d as f64);
    Ok(SynthesisPlan {
        steps,
        fiducial_index: fid_idx,
        target: target.clone(),
        realized: Operator::general(realized)?,
        fidelity,
    })
}

/// Two-state π-rotation S(|a⟩,|b⟩) = I - 2|φ⟩⟨φ| with |φ⟩ ∝ |a⟩ - |b̃⟩,
/// where |b̃⟩ is |b⟩ phase-aligned so ⟨b̃|a⟩ is real and non-negative.
/// S maps a ↔ b̃ and is the identity on the orthogonal complement; for
/// nearly parallel pairs it degenerates to the identity.
pub fn reflection<T: Real>(a: &DVector<C<T>>, b: &DVector<C<T>>) -> Result<Operator<T>> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch(a.len(), b.len()));
    }
    let (b_aligned, overlap) = align_phase(a, b);
    if T::one() - overlap < fr(1e-12) {
        return Ok(Operator::identity(a.len()));
    }
    let diff = a - &b_aligned;
    let norm_sq = (T::one() - overlap) * fr(2.0); // ‖a - b̃‖² = 2(1 - ⟨b̃|a⟩)
    let scale = Complex::new(fr::<T>(2.0) / norm_sq, T::zero());
    let d = a.len();
    let mat = DMatrix::from_fn(d, d, |i, j| {
        let delta = if i == j {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        };
        delta - diff[i] * diff[j].conj() * scale
    });
    Operator::unitary(mat)
}

/// Phase-align b against a: returns (b̃, ⟨b̃|a⟩) with the overlap real ≥ 0.
/// When ⟨b|a⟩ = 0 the phase is unconstrained and b is used as given.
pub fn align_phase<T: Real>(
    a: &DVector<C<T>>,
    b: &DVector<C<T>>,
) -> (DVector<C<T>>, T) {
    let ip = b.dotc(a); // ⟨b|a⟩
    let mag = ip.modulus();
    if mag <= T::default_epsilon() {
        return (b.clone(), T::zero());
    }
    let phase = ip / Complex::new(mag, T::zero());
    (b * phase, mag)
}

/// A subspace map T with its reflection factorization.
#[derive(Debug, Clone)]
pub struct SubspaceMap<T: Real> {
    pub operator: Operator<T>,
    /// The |φ⟩ vector of each reflection factor, first factor first.
    pub factors: Vec<DVector<C<T>>>,
    /// The phase-aligned targets b̃_i the map sends a_i onto exactly.
    pub aligned_targets: Vec<DVector<C<T>>>,
}

/// Unitary carrying the orthonormal frame {a_i} onto {b_i} (up to the
/// per-vector phase alignment), built as T = s_n…s_1 with each s_k a
/// reflection between the running image ã_k and b_k.
pub fn subspace_map<T: Real>(
    a_basis: &[DVector<C<T>>],
    b_basis: &[DVector<C<T>>],
) -> Result<SubspaceMap<T>> {
    if a_basis.len() != b_basis.len() || a_basis.is_empty() {
        return Err(Error::argument("subspace bases must have equal nonzero size"));
    }
    let d = a_basis[0].len();
    if a_basis.len() > d {
        return Err(Error::argument("subspace dimension exceeds space dimension"));
    }
    check_orthonormal(a_basis, "A")?;
    check_orthonormal(b_basis, "B")?;

    let mut t: DMatrix<C<T>> = DMatrix::identity(d, d);
    let mut factors = Vec::new();
    let mut aligned = Vec::new();
    for (a, b) in a_basis.iter().zip(b_basis) {
        let a_tilde = &t * a;
        let (b_tilde, overlap) = align_phase(&a_tilde, b);
        let s = reflection(&a_tilde, &b_tilde)?;
        if T::one() - overlap >= fr(1e-12) {
            let diff = &a_tilde - &b_tilde;
            let nrm = diff.norm();
            factors.push(diff / Complex::new(nrm, T::zero()));
        }
        aligned.push(b_tilde);
        t = s.matrix() * t;
    }
    Ok(SubspaceMap {
        operator: Operator::unitary(t)?,
        factors,
        aligned_targets: aligned,
    })
}

fn check_orthonormal<T: Real>(basis: &[DVector<C<T>>], name: &str) -> Result<()> {
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let ip = u.dotc(v);
            let expect = if i == j { T::one() } else { T::zero() };
            if (ip - Complex::new(expect, T::zero())).modulus() > fr(1e-8) {
                return Err(Error::argument(format!(
                    "basis {name} is not orthonormal at pair ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// The qudit gates of the generalized Pauli/Clifford library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateSpec {
    /// Cyclic shift X|j⟩ = |j ⊕ 1⟩.
    X,
    /// Phase Z|j⟩ = ω^j |j⟩.
    Z,
    /// Discrete Fourier transform H|j⟩ = Σ_k ω^{jk}|k⟩/√d.
    Dft,
    /// Nonlinear phase gate S (odd-d and even-d phase conventions differ).
    SPhase,
    /// Modular multiplication G_a|j⟩ = |a·j mod d⟩, gcd(a,d) = 1.
    Mult(u64),
}

/// Exact gate matrix on dimension d; computational index j = 0..d-1 maps
/// onto the spin basis in descending-m order.
pub fn gate_matrix<T: Real>(spec: GateSpec, d: usize) -> Result<Operator<T>> {
    if d == 0 {
        return Err(Error::argument("gate dimension must be positive"));
    }
    let omega = |num: f64| -> C<T> {
        let angle = std::f64::consts::TAU * num / d as f64;
        Complex::new(fr(angle.cos()), fr(angle.sin()))
    };
    let mat: DMatrix<C<T>> = match spec {
        GateSpec::X => DMatrix::from_fn(d, d, |i, j| {
            if i == (j + 1) % d {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }),
        GateSpec::Z => DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                omega(j as f64)
            } else {
                Complex::new(T::zero(), T::zero())
            }
        }),
        GateSpec::Dft => {
            let scale = Complex::new(fr::<T>(1.0 / (d as f64).sqrt()), T::zero());
            DMatrix::from_fn(d, d, |k, j| omega((j * k) as f64) * scale)
        }
        GateSpec::SPhase => DMatrix::from_fn(d, d, |i, j| {
            if i != j {
                return Complex::new(T::zero(), T::zero());
            }
            let jf = j as f64;
            if d % 2 == 1 {
                omega(jf * (jf - 1.0) / 2.0)
            } else {
                omega(jf * jf / 2.0)
            }
        }),
        GateSpec::Mult(a) => {
            if gcd(a, d as u64) != 1 {
                return Err(Error::argument(format!(
                    "G_a needs gcd(a, d) = 1; a = {a}, d = {d}"
                )));
            }
            DMatrix::from_fn(d, d, |i, j| {
                if i == (a as usize * j) % d {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::new(T::zero(), T::zero())
                }
            })
        }
    };
    Operator::unitary(mat)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One sweep point of the error-correction demo.
#[derive(Debug, Clone, Copy)]
pub struct EccPoint<T: Real> {
    pub epsilon: T,
    pub corrected: T,
    pub uncorrected: T,
}

/// Which subspace maps the demo uses.
pub enum EccMaps<T: Real> {
    /// Build the three maps exactly from reflections.
    Exact,
    /// Externally supplied (encode, error-to-upper, restore) on the 16-dim
    /// space.
    Provided {
        encode: Operator<T>,
        syndrome: Operator<T>,
        restore: Operator<T>,
    },
}

/// Phase-flip-style error correction of a qubit encoded in x-stretched
/// states of F=3, against z-rotation errors e^{-2iεF_z}, compared with the
/// bare |4,4⟩/|3,3⟩ physical qubit under the same error. Fidelities are
/// averaged over `n_qubits` Haar-random logical states.
pub fn ecc_demo<T: Real>(
    epsilons: &[T],
    maps: &EccMaps<T>,
    n_qubits: usize,
    rng: &mut impl Rng,
) -> Result<Vec<EccPoint<T>>> {
    let up = Spin::from_two_j(8);
    let down = Spin::from_two_j(6);
    let d = up.dim() + down.dim();
    let gen_up = angular_momentum_generators::<T>(up);
    let gen_down = angular_momentum_generators::<T>(down);

    // Zeeman error generator: the g-factors of the two manifolds have
    // opposite sign, so a z-field fluctuation drives Fz⁺ - Fz⁻. Restricted
    // to the F=3 code manifold this is the ±F_z rotation of the encoded
    // qubit; on the |4,4⟩/|3,3⟩ physical qubit the manifolds counter-rotate.
    let fz = crate::operator::block_diag(
        gen_up.jz.matrix(),
        &(gen_down.jz.matrix() * Complex::new(-T::one(), T::zero())),
    );

    // z-basis kets.
    let ket = |manifold_up: bool, m: i64| -> Result<DVector<C<T>>> {
        let mut v = DVector::zeros(d);
        let idx = if manifold_up {
            up.index_of(crate::half::Half::int(m))?
        } else {
            up.dim() + down.index_of(crate::half::Half::int(m))?
        };
        v[idx] = Complex::new(T::one(), T::zero());
        Ok(v)
    };

    // x-basis states of F=3: rotate by π/2 about y inside the manifold.
    let rot = expm_hermitian(gen_down.jy.matrix(), fr(std::f64::consts::FRAC_PI_2));
    let xket = |m: i64| -> Result<DVector<C<T>>> {
        let col = &rot * {
            let mut v: DVector<C<T>> = DVector::zeros(down.dim());
            v[down.index_of(crate::half::Half::int(m))?] = Complex::new(T::one(), T::zero());
            v
        };
        let mut out = DVector::zeros(d);
        for i in 0..down.dim() {
            out[up.dim() + i] = col[i];
        }
        Ok(out)
    };

    let phys0 = ket(true, 4)?; // |4,4⟩
    let phys1 = ket(false, 3)?; // |3,3⟩

    let (t_enc, t_syn, t_rest) = match maps {
        EccMaps::Provided {
            encode,
            syndrome,
            restore,
        } => (encode.clone(), syndrome.clone(), restore.clone()),
        EccMaps::Exact => {
            let enc = subspace_map(
                &[phys0.clone(), phys1.clone()],
                &[xket(3)?, xket(-3)?],
            )?;
            // code words as actually realized (alignment-exact here since
            // every pair is cross-manifold orthogonal or real)
            let w0 = enc.operator.matrix() * &phys0;
            let w1 = enc.operator.matrix() * &phys1;
            // error words: normalized F_z action on the code words
            let e0 = {
                let v = &fz * &w0;
                let n = v.norm();
                v / Complex::new(n, T::zero())
            };
            let e1 = {
                let v = &fz * &w1;
                let n = v.norm();
                v / Complex::new(n, T::zero())
            };
            let syn = subspace_map(&[e0, e1], &[ket(true, 4)?, ket(true, -4)?])?;
            let rest = subspace_map(&[ket(true, 4)?, ket(true, -4)?], &[w0, w1])?;
            (enc.operator, syn.operator, rest.operator)
        }
    };

    // projector onto the F=4 manifold
    let p_up = DMatrix::from_fn(d, d, |i, j| {
        if i == j && i < up.dim() {
            Complex::new(T::one(), T::zero())
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });

    let mut points = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let error = expm_hermitian(&fz, eps + eps); // e^{-2iεF_z}
        let mut corrected_acc = T::zero();
        let mut uncorrected_acc = T::zero();
        for _ in 0..n_qubits {
            let q = crate::random::random_state::<T, _>(2, rng);
            let (alpha, beta) = (q[0], q[1]);
            let phys = &phys0 * alpha + &phys1 * beta;

            // uncorrected: free evolution of the physical qubit
            let evolved = &error * &phys;
            uncorrected_acc += phys.dotc(&evolved).modulus_squared();

            // encoded pipeline
            let enc = t_enc.matrix() * &phys;
            let after_err = &error * &enc;
            let extracted = t_syn.matrix() * &after_err;
            let up_part = &p_up * &extracted;
            let p4 = up_part.norm_squared();
            let p3 = T::one() - p4;

            let mut fidelity = T::zero();
            if p3 > T::zero() {
                let low = (&extracted - &up_part) / Complex::new(p3.sqrt(), T::zero());
                fidelity += p3 * enc.dotc(&low).modulus_squared();
            }
            if p4 > fr(1e-300) {
                let high = &up_part / Complex::new(p4.sqrt(), T::zero());
                let restored = t_rest.matrix() * high;
                fidelity += p4 * enc.dotc(&restored).modulus_squared();
            }
            corrected_acc += fidelity;
        }
        let scale = T::one() / fr::<T>(n_qubits as f64);
        points.push(EccPoint {
            epsilon: eps,
            corrected: corrected_acc * scale,
            uncorrected: uncorrected_acc * scale,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::max_abs;
    use crate::random::{haar_unitary, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eigendecompose_identity_gives_empty_plan() {
        let system = matrix_synthesis_system::<f64>(4);
        let id = Operator::identity(4);
        let plan = synthesize_unitary(&id, &system, &ExactMapProvider).unwrap();
        assert!(plan.steps.is_empty());
        assert!(plan.fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn z_gate_eigenphases_d3() {
        let z = gate_matrix::<f64>(GateSpec::Z, 3).unwrap();
        let pairs = eigendecompose(&z).unwrap();
        let mut phases: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Z = diag(1, ω, ω²) = Σ e^{-iλ}: λ ∈ {0, -2π/3, +2π/3}
        let tau = std::f64::consts::TAU;
        let expect = [-tau / 3.0, 0.0, tau / 3.0];
        for (p, e) in phases.iter().zip(expect) {
            assert!((p - e).abs() < 1e-10, "{p} vs {e}");
        }
    }

    #[test]
    fn spectral_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = haar_unitary::<f64, _>(6, &mut rng);
        let pairs = eigendecompose(&u).unwrap();
        let mut rebuilt: DMatrix<Complex<f64>> = DMatrix::zeros(6, 6);
        for (l, v) in &pairs {
            let phase = Complex::new(l.cos(), -l.sin()); // e^{-iλ}
            rebuilt += DMatrix::from_fn(6, 6, |i, j| v[i] * v[j].conj() * phase);
        }
        assert!(max_abs(&(rebuilt - u.matrix())) < 1e-10);
    }

    #[test]
    fn phase_segment_identities() {
        let system = matrix_synthesis_system::<f64>(5);
        let zero = phase_primitive_pulse(0.0, &system).unwrap();
        assert!(max_abs(&(zero.operator.matrix() - DMatrix::identity(5, 5))) < 1e-15);

        let pi = phase_primitive_pulse(std::f64::consts::PI, &system).unwrap();
        let mut expect: DMatrix<Complex<f64>> = DMatrix::identity(5, 5);
        expect[(0, 0)] = Complex::new(-1.0, 0.0);
        assert!(max_abs(&(pi.operator.matrix() - expect)) < 1e-14);

        let a = phase_primitive_pulse(1.1, &system).unwrap();
        let b = phase_primitive_pulse(1.1 + std::f64::consts::TAU, &system).unwrap();
        assert!(max_abs(&(a.operator.matrix() - b.operator.matrix())) < 1e-12);
        assert!((a.duration - b.duration).abs() < 1e-12);
    }

    #[test]
    fn exact_synthesis_reproduces_haar_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [4usize, 8] {
            let system = matrix_synthesis_system::<f64>(d);
            for _ in 0..5 {
                let target = haar_unitary::<f64, _>(d, &mut rng);
                let plan = synthesize_unitary(&target, &system, &ExactMapProvider).unwrap();
                assert!(plan.fidelity > 1.0 - 1e-9, "d={d}: {}", plan.fidelity);
                assert!(plan.steps.len() <= d);
            }
        }
    }

    #[test]
    fn reflection_swaps_and_fixes_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = random_state::<f64, _>(8, &mut rng);
        let b = random_state::<f64, _>(8, &mut rng);
        let s = reflection(&a, &b).unwrap();
        let (b_tilde, _) = align_phase(&a, &b);
        assert!((s.matrix() * &a - &b_tilde).norm() < 1e-10);
        assert!((s.matrix() * &b_tilde - &a).norm() < 1e-10);
        // involution and hermiticity
        assert!(max_abs(&(s.matrix() * s.matrix() - DMatrix::identity(8, 8))) < 1e-12);
        assert!(crate::operator::hermitian_deviation(s.matrix()) < 1e-12);
        // fixes the orthogonal complement of span{a, b̃}
        let b_perp = {
            let mut v = b_tilde.clone();
            let ov = a.dotc(&v);
            v -= &a * ov;
            let n = v.norm();
            v / Complex::new(n, 0.0)
        };
        for _ in 0..10 {
            let mut c = random_state::<f64, _>(8, &mut rng);
            let ca = a.dotc(&c);
            c -= &a * ca;
            let cb = b_perp.dotc(&c);
            c -= &b_perp * cb;
            let n = c.norm();
            let c = c / Complex::new(n, 0.0);
            assert!((s.matrix() * &c - &c).norm() < 1e-10);
        }
    }

    #[test]
    fn reflection_orthogonal_and_degenerate_cases() {
        let mut a: DVector<Complex<f64>> = DVector::zeros(4);
        a[0] = Complex::new(1.0, 0.0);
        let mut b: DVector<Complex<f64>> = DVector::zeros(4);
        b[1] = Complex::new(1.0, 0.0);
        let s = reflection(&a, &b).unwrap();
        assert!((s.matrix() * &a - &b).norm() < 1e-14);

        let same = reflection(&a, &a).unwrap();
        assert!(max_abs(&(same.matrix() - DMatrix::identity(4, 4))) < 1e-15);
        // a vs e^{iθ}a also degenerates to the identity after alignment
        let phased = &a * Complex::new(0.6f64.cos(), 0.6f64.sin());
        let s2 = reflection(&a, &phased).unwrap();
        assert!(max_abs(&(s2.matrix() - DMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn subspace_map_carries_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 5;
        let n = d; // full-dimension case
        let ua = haar_unitary::<f64, _>(d, &mut rng);
        let ub = haar_unitary::<f64, _>(d, &mut rng);
        let a_basis: Vec<_> = (0..n).map(|i| ua.matrix().column(i).into_owned()).collect();
        let b_basis: Vec<_> = (0..n).map(|i| ub.matrix().column(i).into_owned()).collect();
        let map = subspace_map(&a_basis, &b_basis).unwrap();
        for i in 0..n {
            let image = map.operator.matrix() * &a_basis[i];
            let overlap = map.aligned_targets[i].dotc(&image);
            assert!(
                (overlap - Complex::new(1.0, 0.0)).norm() < 1e-8,
                "i={i}: {overlap}"
            );
            // and against the original target the modulus is still 1
            assert!((b_basis[i].dotc(&image).norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn naive_sequential_product_fails_where_subspace_map_succeeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let d = 6;
        let ua = haar_unitary::<f64, _>(d, &mut rng);
        let ub = haar_unitary::<f64, _>(d, &mut rng);
        let a1 = ua.matrix().column(0).into_owned();
        let a2 = ua.matrix().column(1).into_owned();
        let b1 = ub.matrix().column(0).into_owned();
        let b2 = ub.matrix().column(1).into_owned();

        // naive: apply the two state maps in sequence without re-basing
        let s1 = reflection(&a1, &b1).unwrap();
        let s2 = reflection(&a2, &b2).unwrap();
        let naive = s2.matrix() * s1.matrix();
        let naive_overlap = b1.dotc(&(&naive * &a1)).norm();
        assert!(
            naive_overlap < 1.0 - 1e-3,
            "naive product should corrupt the first image: {naive_overlap}"
        );

        let map = subspace_map(&[a1.clone(), a2], &[b1, b2]).unwrap();
        let good = map.aligned_targets[0]
            .dotc(&(map.operator.matrix() * &a1))
            .norm();
        assert!((good - 1.0).abs() < 1e-10);
    }

    #[test]
    fn induction_lemma_prior_images_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let d = 6;
        let n = 4;
        let ua = haar_unitary::<f64, _>(d, &mut rng);
        let ub = haar_unitary::<f64, _>(d, &mut rng);
        let a_basis: Vec<_> = (0..n).map(|i| ua.matrix().column(i).into_owned()).collect();
        let b_basis: Vec<_> = (0..n).map(|i| ub.matrix().column(i).into_owned()).collect();
        let map = subspace_map(&a_basis, &b_basis).unwrap();
        // rebuild the partial products and check s_j fixes earlier b̃_k
        let mut t: DMatrix<Complex<f64>> = DMatrix::identity(d, d);
        let mut partial: Vec<DMatrix<Complex<f64>>> = Vec::new();
        for (a, b) in a_basis.iter().zip(&b_basis) {
            let a_tilde = &t * a;
            let (b_tilde, _) = align_phase(&a_tilde, b);
            let s = reflection(&a_tilde, &b_tilde).unwrap();
            t = s.matrix() * &t;
            partial.push(s.matrix().clone());
        }
        for k in 0..n {
            for (j, s_j) in partial.iter().enumerate().skip(k + 1) {
                let image = s_j * &map.aligned_targets[k];
                assert!(
                    (image - &map.aligned_targets[k]).norm() < 1e-9,
                    "s_{j} moved b̃_{k}"
                );
            }
        }
    }

    #[test]
    fn eigendecompose_rejects_non_unitary() {
        let m = DMatrix::from_fn(3, 3, |i, j| Complex::new((i + 2 * j) as f64, 0.0));
        let op = Operator::general(m).unwrap();
        assert!(eigendecompose(&op).is_err());
    }

    #[test]
    fn phase_primitive_requires_primitive() {
        let sys = crate::hamiltonians::light_shift_system(
            &crate::hamiltonians::LightShiftConfig::<f64>::default(),
        );
        assert!(matches!(
            phase_primitive_pulse(1.0, &sys),
            Err(Error::UnsupportedSystem(_))
        ));
    }

    #[test]
    fn provider_failure_carries_eigenvector_index() {
        struct Failing;
        impl StateMapProvider<f64> for Failing {
            fn map_to_fiducial(
                &self,
                _system: &ControlSystem<f64>,
                _state: &DVector<Complex<f64>>,
                _fiducial: usize,
            ) -> Result<StateMap<f64>> {
                Err(Error::argument("search did not converge"))
            }
        }
        let system = matrix_synthesis_system::<f64>(3);
        let z = gate_matrix::<f64>(GateSpec::Z, 3).unwrap();
        let err = synthesize_unitary(&z, &system, &Failing).unwrap_err();
        assert!(matches!(err, Error::Synthesis { .. }), "{err}");
    }

    #[test]
    fn subspace_map_rejects_non_orthonormal_basis() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a1 = random_state::<f64, _>(4, &mut rng);
        let a2 = random_state::<f64, _>(4, &mut rng); // not orthogonal to a1
        let b = haar_unitary::<f64, _>(4, &mut rng);
        let b1 = b.matrix().column(0).into_owned();
        let b2 = b.matrix().column(1).into_owned();
        assert!(subspace_map(&[a1, a2], &[b1, b2]).is_err());
    }

    #[test]
    fn single_pair_subspace_map_is_a_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = haar_unitary::<f64, _>(5, &mut rng);
        let a = u.matrix().column(0).into_owned();
        let b = u.matrix().column(1).into_owned();
        let map =
            subspace_map(std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        let refl = reflection(&a, &b).unwrap();
        assert!(max_abs(&(map.operator.matrix() - refl.matrix())) < 1e-12);
        assert_eq!(map.factors.len(), 1);
    }

    #[test]
    fn gate_relations_d7() {
        let d = 7;
        let x = gate_matrix::<f64>(GateSpec::X, d).unwrap();
        let z = gate_matrix::<f64>(GateSpec::Z, d).unwrap();
        let h = gate_matrix::<f64>(GateSpec::Dft, d).unwrap();
        let s = gate_matrix::<f64>(GateSpec::SPhase, d).unwrap();

        // X^d = I
        let mut xp = DMatrix::identity(d, d);
        for _ in 0..d {
            xp = x.matrix() * xp;
        }
        assert!(max_abs(&(xp - DMatrix::identity(d, d))) < 1e-12);

        // HXH† = Z
        let hxh = h.matrix() * x.matrix() * h.matrix().adjoint();
        assert!(max_abs(&(hxh - z.matrix())) < 1e-12);
        // HZH† = X^{-1}
        let hzh = h.matrix() * z.matrix() * h.matrix().adjoint();
        assert!(max_abs(&(hzh - x.matrix().adjoint())) < 1e-12);

        // SZS† = Z exactly
        let szs = s.matrix() * z.matrix() * s.matrix().adjoint();
        assert!(max_abs(&(szs - z.matrix())) < 1e-12);
        // SXS† = XZ up to a global phase; log the residual phase
        let sxs = s.matrix() * x.matrix() * s.matrix().adjoint();
        let xz = x.matrix() * z.matrix();
        let tr = crate::operator::mat_trace_inner(&xz, &sxs);
        assert!(
            (tr.norm() / d as f64 - 1.0).abs() < 1e-12,
            "SXS† differs from XZ beyond a phase"
        );
        let residual_phase = tr.arg();
        println!("SXS† = e^(i{residual_phase:.6}) XZ at d = {d}");

        // G_3 X G_3† = X^3
        let g3 = gate_matrix::<f64>(GateSpec::Mult(3), d).unwrap();
        let gxg = g3.matrix() * x.matrix() * g3.matrix().adjoint();
        let mut x3 = DMatrix::identity(d, d);
        for _ in 0..3 {
            x3 = x.matrix() * x3;
        }
        assert!(max_abs(&(gxg - x3)) < 1e-12);

        assert!(gate_matrix::<f64>(GateSpec::Mult(2), 4).is_err());
    }

    #[test]
    fn ecc_exact_maps_zero_error_is_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts = ecc_demo(&[0.0], &EccMaps::Exact, 20, &mut rng).unwrap();
        assert!((pts[0].corrected - 1.0).abs() < 1e-10);
        assert!((pts[0].uncorrected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ecc_corrected_beats_uncorrected() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let eps: Vec<f64> = vec![0.05, 0.1, 0.2, 0.3];
        let pts = ecc_demo(&eps, &EccMaps::Exact, 60, &mut rng).unwrap();
        for p in &pts {
            assert!(
                p.corrected >= p.uncorrected,
                "ε={}: corrected {} < uncorrected {}",
                p.epsilon,
                p.corrected,
                p.uncorrected
            );
        }
    }
}
