//! Acceptance suite: one test per exit criterion, each printing a PASS line
//! with its measured numbers (run with `--nocapture` to see them).
//!
//! Two long-running targets are `#[ignore]` by default and meant for nightly
//! runs: the full d = 16 state preparation at the 150 µs operating point and
//! the pulse-level gate synthesis. `criterion6` runs the reduced
//! 8-dimensional variant per-commit.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qctl_core::controllability::{default_closure_tol, lie_closure, rank2_criterion};
use qctl_core::hamiltonians::{
    mwrf_system, restricted_phase_system, six_operator_set, ConfigId, MwRfConfig,
};
use qctl_core::landscape::{
    critical_values, generic_controllable_system, hessian_signature, numeric_hessian_check,
    stateprep_critical_sampler,
};
use qctl_core::operator::Operator;
use qctl_core::optimize::{
    fd_gradient, grape_gradient, multistart, AscentOptions, Objective,
};
use qctl_core::random::{haar_unitary, random_hermitian, random_state};
use qctl_core::spin::{angular_momentum_generators, Spin};
use qctl_core::synth::{
    ecc_demo, gate_matrix, matrix_synthesis_system, subspace_map, synthesize_unitary, EccMaps,
    ExactMapProvider, GateSpec, PulseMapProvider,
};
use qctl_core::waveform::{WaveformLayout, WaveformParams};
use qctl_core::wigner::multipoles;

type C64 = Complex<f64>;

fn basis_state(d: usize, i: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d);
    v[i] = Complex::new(1.0, 0.0);
    v
}

#[test]
fn criterion1_controllability_reproduction() {
    let start = Instant::now();

    // {Fx, Fy, Fx²} on the d = 7 manifold closes on su(7)
    let spin = Spin::from_two_j(6);
    let gen = angular_momentum_generators::<f64>(spin);
    let fx2 = Operator::hermitian(gen.jx.matrix() * gen.jx.matrix()).unwrap();
    let c7 = lie_closure(
        &[gen.jx.clone(), gen.jy.clone(), fx2],
        default_closure_tol(),
    )
    .unwrap();
    assert_eq!(c7.dimension, 48, "light-shift generators must span su(7)");
    assert!(c7.stable);

    // the six-operator microwave/rf set closes on su(16)
    let c16 = lie_closure(&six_operator_set::<f64>(), default_closure_tol()).unwrap();
    assert_eq!(c16.dimension, 255, "six-operator set must span su(16)");
    assert!(c16.stable);

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "closure computations took {elapsed:.1?} (budget 60 s)"
    );
    println!("criterion 1: PASS — su(7) dim 48, su(16) dim 255 in {elapsed:.2?}");
}

#[test]
fn criterion2_rank2_criterion_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let start = Instant::now();
    for d in 3..=8usize {
        let spin = Spin::from_two_j(d as u64 - 1);
        let gen = angular_momentum_generators::<f64>(spin);
        let mut checked = 0;
        while checked < 20 {
            let h = random_hermitian::<f64, _>(d, &mut rng);
            if !rank2_criterion(&h, spin).unwrap() {
                continue;
            }
            checked += 1;
            let closure = lie_closure(
                &[gen.jx.clone(), gen.jy.clone(), h],
                default_closure_tol(),
            )
            .unwrap();
            assert!(closure.stable, "d={d} instance {checked} unstable");
            assert_eq!(
                closure.dimension,
                d * d - 1,
                "d={d} instance {checked}: rank-2 overlap must imply full control"
            );
        }
    }
    println!(
        "criterion 2: PASS — 120/120 rank-2 instances reach d²-1 ({:.2?})",
        start.elapsed()
    );
}

#[test]
fn criterion3_stateprep_landscape_d3() {
    let start = Instant::now();
    let system = generic_controllable_system::<f64>(Spin::from_two_j(2));
    let layout = WaveformLayout::piecewise_constant(&system, 20.0, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let target = random_state::<f64, _>(3, &mut rng);
    let obj = Objective::state_prep(system, layout, basis_state(3, 0), target).unwrap();
    let opts = AscentOptions {
        tol: 1e-6,
        max_iters: 6_000,
        ..AscentOptions::default()
    };
    let stats = stateprep_critical_sampler(&obj, 50, 33, &opts).unwrap();
    let elapsed = start.elapsed();

    assert!(
        stats.high_fidelity_fraction >= 0.95,
        "only {:.0}% of seeds reached F > 0.99",
        100.0 * stats.high_fidelity_fraction
    );
    assert!(
        stats.max_commutator_residual < 1e-3,
        "commutator residual {:e} at converged points",
        stats.max_commutator_residual
    );
    assert!(elapsed.as_secs() < 600, "took {elapsed:.1?} (budget 10 min)");
    println!(
        "criterion 3: PASS — {:.0}% of 50 seeds above 0.99, max ‖[ρψ,ρf]‖ = {:.2e} ({:.2?})",
        100.0 * stats.high_fidelity_fraction,
        stats.max_commutator_residual,
        elapsed
    );
}

#[test]
fn criterion4_unitary_landscape_signatures() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let start = Instant::now();
    let mut instances = 0;
    for d in 2..=5usize {
        let values = critical_values::<f64>(d);
        assert_eq!(values.len(), d + 1);
        for (n, expect) in (0..=d).map(|n| (n, 2.0 * (d as f64 - 2.0 * n as f64))) {
            // the n-th manifold value appears at index d-n in ascending order
            assert!((values[d - n] - expect).abs() < 1e-12);
            for _ in 0..50 {
                let v = haar_unitary::<f64, _>(d, &mut rng);
                let (measured, crit) = numeric_hessian_check(&v, n, &mut rng).unwrap();
                assert_eq!(
                    measured,
                    hessian_signature(d, n).unwrap(),
                    "signature mismatch at d={d}, n={n}"
                );
                assert!(
                    (crit - expect).abs() < 1e-8,
                    "critical value {crit} vs {expect} at d={d}, n={n}"
                );
                instances += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:.1?} (budget 5 min)");
    println!(
        "criterion 4: PASS — {instances} instances match (n², (d-n)², 2n(d-n)) exactly ({elapsed:.2?})"
    );
}

#[test]
fn criterion5_gradient_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for &(d, n_steps) in &[(2usize, 10usize), (2, 50), (4, 10), (4, 50), (8, 10), (8, 50)] {
        let runs = if count < 18 { 4 } else { 2 };
        for _ in 0..runs {
            if count >= 20 {
                break;
            }
            count += 1;
            let system = generic_controllable_system::<f64>(Spin::from_two_j(d as u64 - 1));
            let dt = 0.005 / d as f64;
            let layout =
                WaveformLayout::piecewise_constant(&system, dt * n_steps as f64, dt).unwrap();
            let initial = random_state::<f64, _>(d, &mut rng);
            let target = random_state::<f64, _>(d, &mut rng);
            let obj =
                Objective::state_prep(system, layout.clone(), initial, target).unwrap();
            let raw = DVector::from_fn(layout.n_vars(), |_, _| 2.0 * rng.gen::<f64>() - 1.0);
            let params = WaveformParams::new(raw, layout).unwrap();
            let sweep = grape_gradient(&obj, &params).unwrap();
            let fd = fd_gradient(&obj, &params, 1e-6).unwrap();
            let rel = (&sweep - &fd).norm() / fd.norm();
            worst = worst.max(rel);
            assert!(rel < 1e-4, "instance {count} (d={d}, N={n_steps}): rel {rel:e}");
        }
    }
    println!("criterion 5: PASS — {count} instances, worst relative ℓ₂ error {worst:.2e}");
}

/// Desk-scale variant: restricted 8-dimensional system, T = 50 μs,
/// 20 seeds, fidelity ≥ 0.99.
#[test]
fn criterion6_desk_scale_state_prep_d8_variant() {
    let start = Instant::now();
    let system = restricted_phase_system::<f64>(4).unwrap();
    let layout = WaveformLayout::spline(&system, 50e-6, 0.1e-6).unwrap();
    // (|4,4⟩ + |3,-3⟩)/√2 in the restricted basis (fiducial first)
    let mut target: DVector<C64> = DVector::zeros(8);
    target[0] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    target[7] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let obj = Objective::state_prep(system, layout, basis_state(8, 0), target).unwrap();
    let report = multistart(&obj, 20, 6, &AscentOptions::default()).unwrap();
    assert!(
        report.best_value >= 0.99,
        "best of 20 seeds reached only {:.4}",
        report.best_value
    );
    println!(
        "criterion 6 (d=8 variant): PASS — best fidelity {:.4} over 20 seeds ({:.1?})",
        report.best_value,
        start.elapsed()
    );
}

/// Full-scale run: d = 16, config 2rfap2struwap, T = 150 μs, Δt = 0.1 μs,
/// 20 seeds, target (|4,4⟩+|3,-3⟩)/√2, best fidelity ≥ 0.98.
/// Roughly half an hour on two cores; run nightly or explicitly with
/// `cargo test -p qctl-core --test acceptance -- --ignored`.
#[test]
#[ignore = "full-scale d=16 run, ~30 min; nightly"]
fn criterion6_full_d16() {
    let start = Instant::now();
    let system = mwrf_system(&MwRfConfig::<f64>::new(ConfigId::RfAp2Mw2Ap)).unwrap();
    let layout = WaveformLayout::spline(&system, 150e-6, 0.1e-6).unwrap();
    let mut target: DVector<C64> = DVector::zeros(16);
    target[0] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); // |4,4⟩
    target[15] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); // |3,-3⟩
    let obj = Objective::state_prep(system, layout, basis_state(16, 0), target).unwrap();
    let report = multistart(&obj, 20, 6, &AscentOptions::default()).unwrap();
    assert!(
        report.best_value >= 0.98,
        "best of 20 seeds reached only {:.4}",
        report.best_value
    );
    println!(
        "criterion 6 (full d=16): PASS — best fidelity {:.4} over 20 seeds ({:.1?})",
        report.best_value,
        start.elapsed()
    );
}

#[test]
fn criterion7_exact_map_synthesis_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 1.0;
    for d in [4usize, 8] {
        let system = matrix_synthesis_system::<f64>(d);
        for _ in 0..25 {
            let target = haar_unitary::<f64, _>(d, &mut rng);
            let plan = synthesize_unitary(&target, &system, &ExactMapProvider).unwrap();
            worst = worst.min(plan.fidelity);
            assert!(
                plan.fidelity > 1.0 - 1e-9,
                "d={d}: synthesized fidelity {:.12}",
                plan.fidelity
            );
        }
    }
    println!("criterion 7: PASS — 50 Haar targets, worst fidelity 1 - {:.1e}", 1.0 - worst);
}

/// Pulse-level gate synthesis of the five qudit gates on the restricted
/// system. Hours-scale; nightly.
#[test]
#[ignore = "pulse-level synthesis of five gates, ~1 h; nightly"]
fn criterion8_pulse_level_gate_synthesis() {
    let start = Instant::now();
    let system = restricted_phase_system::<f64>(4).unwrap();
    let layout = WaveformLayout::spline(&system, 50e-6, 0.1e-6).unwrap();
    let provider = PulseMapProvider {
        layout,
        n_seeds: 6,
        rng_seed: 8,
        opts: AscentOptions::default(),
        f_min: 0.99,
    };
    let gates = [
        ("Z", GateSpec::Z),
        ("X", GateSpec::X),
        ("H", GateSpec::Dft),
        ("S", GateSpec::SPhase),
        ("G3", GateSpec::Mult(3)),
    ];
    let mut results = Vec::new();
    for (name, spec) in gates {
        let gate = gate_matrix::<f64>(spec, 7).unwrap();
        let mut target = DMatrix::identity(8, 8);
        target.view_mut((1, 1), (7, 7)).copy_from(gate.matrix());
        let target = Operator::unitary(target).unwrap();
        let plan = synthesize_unitary(&target, &system, &provider).unwrap();
        let min_map = plan
            .steps
            .iter()
            .map(|s| s.map.fidelity)
            .fold(1.0f64, f64::min);
        println!(
            "  gate {name}: fidelity {:.4} ({} steps, worst map {:.4})",
            plan.fidelity,
            plan.steps.len(),
            min_map
        );
        assert!(
            plan.fidelity >= 0.97,
            "gate {name} synthesized at {:.4} < 0.97",
            plan.fidelity
        );
        results.push((name, plan.fidelity));
    }
    let summary: Vec<String> = results
        .iter()
        .map(|(n, f)| format!("J[{n}]={f:.4}"))
        .collect();
    println!(
        "criterion 8: PASS — {} ({:.1?})",
        summary.join(", "),
        start.elapsed()
    );
}

#[test]
fn criterion9_subspace_map_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for d in 4..=8usize {
        for n in 1..=d {
            let ua = haar_unitary::<f64, _>(d, &mut rng);
            let ub = haar_unitary::<f64, _>(d, &mut rng);
            let a: Vec<DVector<C64>> =
                (0..n).map(|i| ua.matrix().column(i).into_owned()).collect();
            let b: Vec<DVector<C64>> =
                (0..n).map(|i| ub.matrix().column(i).into_owned()).collect();
            let map = subspace_map(&a, &b).unwrap();
            for i in 0..n {
                let image = map.operator.matrix() * &a[i];
                let aligned = map.aligned_targets[i].dotc(&image);
                assert!(
                    (aligned - Complex::new(1.0, 0.0)).norm() < 1e-8,
                    "d={d} n={n} i={i}: ⟨b̃|T|a⟩ = {aligned}"
                );
                assert!((b[i].dotc(&image).norm() - 1.0).abs() < 1e-8);
            }
        }
    }

    // the naïve sequential product corrupts earlier images on a random n=2
    // instance while the subspace map keeps them exact
    let d = 6;
    let ua = haar_unitary::<f64, _>(d, &mut rng);
    let ub = haar_unitary::<f64, _>(d, &mut rng);
    let a1 = ua.matrix().column(0).into_owned();
    let a2 = ua.matrix().column(1).into_owned();
    let b1 = ub.matrix().column(0).into_owned();
    let b2 = ub.matrix().column(1).into_owned();
    let s1 = qctl_core::synth::reflection(&a1, &b1).unwrap();
    let s2 = qctl_core::synth::reflection(&a2, &b2).unwrap();
    let naive = s2.matrix() * s1.matrix();
    let naive_overlap = b1.dotc(&(&naive * &a1)).norm();
    assert!(
        naive_overlap < 1.0 - 1e-3,
        "naïve product unexpectedly preserved the first image: {naive_overlap}"
    );
    println!(
        "criterion 9: PASS — all frames carried exactly; naïve product drops |⟨b₁|T|a₁⟩| to {naive_overlap:.4}"
    );
}

#[test]
fn criterion10_ecc_demo() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let epsilons: Vec<f64> = vec![
        0.02, 0.035, 0.05, 0.07, 0.1, 0.125, 0.15, 0.2, 0.25, 0.3,
    ];
    let points = ecc_demo(&epsilons, &EccMaps::Exact, 400, &mut rng).unwrap();
    for p in &points {
        assert!(
            p.corrected >= p.uncorrected,
            "ε = {}: corrected {:.6} < uncorrected {:.6}",
            p.epsilon,
            p.corrected,
            p.uncorrected
        );
    }
    // exponent fit in the power-law window ε ≤ 0.15
    let fit = |infids: Vec<(f64, f64)>| -> f64 {
        let pts: Vec<(f64, f64)> = infids
            .into_iter()
            .filter(|(e, i)| *e <= 0.15 && *i > 1e-14)
            .map(|(e, i)| (e.ln(), i.ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let corrected_exp = fit(points.iter().map(|p| (p.epsilon, 1.0 - p.corrected)).collect());
    let uncorrected_exp = fit(
        points
            .iter()
            .map(|p| (p.epsilon, 1.0 - p.uncorrected))
            .collect(),
    );
    assert!(
        corrected_exp - uncorrected_exp >= 1.5,
        "exponent gap {:.2} (corrected {corrected_exp:.2}, uncorrected {uncorrected_exp:.2})",
        corrected_exp - uncorrected_exp
    );
    println!(
        "criterion 10: PASS — corrected ≥ uncorrected on (0, 0.3]; exponents {corrected_exp:.2} vs {uncorrected_exp:.2}"
    );
}

#[test]
fn criterion11_wigner_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    // Parseval to 1e-10 on mixed states of both manifolds
    for two_j in [6u64, 8] {
        let spin = Spin::from_two_j(two_j);
        let d = spin.dim();
        let a = random_state::<f64, _>(d, &mut rng);
        let b = random_state::<f64, _>(d, &mut rng);
        let rho = Operator::projector(&a)
            .scale(0.6)
            .add(&Operator::projector(&b).scale(0.4))
            .unwrap();
        let m = multipoles(rho.matrix(), spin, spin).unwrap();
        let purity = qctl_core::operator::mat_trace_inner(rho.matrix(), rho.matrix()).re;
        assert!(
            (m.power() - purity).abs() < 1e-10,
            "Parseval residue {:e} at F = {}",
            (m.power() - purity).abs(),
            spin.j()
        );

        // maximally mixed state is constant to 1e-10
        let mixed = Operator::hermitian(
            DMatrix::identity(d, d) * Complex::new(1.0 / d as f64, 0.0),
        )
        .unwrap();
        let mm = multipoles(mixed.matrix(), spin, spin).unwrap();
        let expect = 1.0 / (4.0 * std::f64::consts::PI * d as f64).sqrt();
        for (theta, phi) in [(0.0, 0.0), (1.0, 2.0), (2.7, 5.1)] {
            let v = mm.evaluate(theta, phi);
            assert!((v.re - expect).abs() < 1e-10 && v.im.abs() < 1e-12);
        }
    }

    // rotation covariance: 10 random rotations at F = 3 and F = 4 to 1e-8
    let mut worst: f64 = 0.0;
    for two_j in [6u64, 8] {
        let spin = Spin::from_two_j(two_j);
        let d = spin.dim();
        let gen = angular_momentum_generators::<f64>(spin);
        for _ in 0..10 {
            let psi = random_state::<f64, _>(d, &mut rng);
            let rho = Operator::projector(&psi);
            let axis = {
                let v: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() - 0.5).collect();
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                [v[0] / n, v[1] / n, v[2] / n]
            };
            let angle: f64 = rng.gen::<f64>() * std::f64::consts::PI;
            let h = gen.jx.matrix() * Complex::new(axis[0], 0.0)
                + gen.jy.matrix() * Complex::new(axis[1], 0.0)
                + gen.jz.matrix() * Complex::new(axis[2], 0.0);
            let u = qctl_core::linalg::expm_hermitian(&h, angle);
            let rotated = Operator::hermitian(&u * rho.matrix() * u.adjoint()).unwrap();
            let m0 = multipoles(rho.matrix(), spin, spin).unwrap();
            let m1 = multipoles(rotated.matrix(), spin, spin).unwrap();
            let (s, c) = angle.sin_cos();
            let omc = 1.0 - c;
            let (x, y, z) = (axis[0], axis[1], axis[2]);
            let r = [
                [c + x * x * omc, x * y * omc - z * s, x * z * omc + y * s],
                [y * x * omc + z * s, c + y * y * omc, y * z * omc - x * s],
                [z * x * omc - y * s, z * y * omc + x * s, c + z * z * omc],
            ];
            for (theta, phi) in [(0.4f64, 0.9f64), (1.3, 3.3), (2.5, 5.7)] {
                let n = [
                    theta.sin() * phi.cos(),
                    theta.sin() * phi.sin(),
                    theta.cos(),
                ];
                let back = [
                    r[0][0] * n[0] + r[1][0] * n[1] + r[2][0] * n[2],
                    r[0][1] * n[0] + r[1][1] * n[1] + r[2][1] * n[2],
                    r[0][2] * n[0] + r[1][2] * n[1] + r[2][2] * n[2],
                ];
                let lhs = m1.evaluate(theta, phi);
                let rhs = m0.evaluate(back[2].clamp(-1.0, 1.0).acos(), back[1].atan2(back[0]));
                let diff = (lhs - rhs).norm();
                worst = worst.max(diff);
                assert!(diff < 1e-8, "covariance residue {diff:e} at F = {}", spin.j());
            }
        }
    }
    println!(
        "criterion 11: PASS — Parseval & constancy to 1e-10, covariance worst residue {worst:.1e}"
    );
}
