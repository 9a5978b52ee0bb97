//! Task runners: each consumes a resolved `RunConfig`, writes its artifacts
//! under the output directory, and prints a short summary.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qctl_core::controllability::{default_closure_tol, lie_closure};
use qctl_core::hamiltonians::{six_operator_set, ControlSystem};
use qctl_core::landscape::{
    critical_values, generic_controllable_system, hessian_signature, numeric_hessian_check,
    stateprep_critical_sampler, stateprep_hessian_signature,
};
use qctl_core::operator::Operator;
use qctl_core::optimize::{multistart, AscentOptions, Objective};
use qctl_core::synth::{
    ecc_demo, gate_matrix, matrix_synthesis_system, synthesize_unitary, EccMaps,
    ExactMapProvider, GateSpec, MapRealization, PulseMapProvider,
    SynthesisPlan,
};
use qctl_core::waveform::{render, write_fields, WaveformLayout};
use qctl_core::wigner::{
    wigner_coupled, wigner_single, write_block, write_coefficients, SphereGrid,
};
use qctl_core::Spin;

use crate::config::{RunConfig, SystemSpec, TaskKind};
use crate::targets::parse_state;

type C64 = Complex<f64>;

pub fn run(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    match cfg.task {
        TaskKind::Controllability => controllability(cfg, false),
        TaskKind::StatePrep => stateprep(cfg),
        TaskKind::Synth => synth(cfg),
        TaskKind::Gates => gates(cfg),
        TaskKind::Landscape => landscape(cfg),
        TaskKind::Wigner => wigner(cfg),
        TaskKind::Ecc => ecc(cfg),
    }
}

fn outdir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(&cfg.outdir);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn rng_for(cfg: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.rng_seed.unwrap_or(0))
}

fn ascent_options(cfg: &RunConfig) -> AscentOptions<f64> {
    AscentOptions {
        tol: cfg.tol,
        max_iters: cfg.max_iters,
        ..AscentOptions::default()
    }
}

pub fn controllability(cfg: &RunConfig, six_operators: bool) -> Result<()> {
    let (label, generators, dim) = if six_operators {
        let gens = six_operator_set::<f64>();
        ("six-operator set".to_string(), gens, 16)
    } else {
        let system = cfg.system.build()?;
        let mut gens: Vec<Operator<f64>> =
            system.groups.iter().flat_map(|g| g.ops.clone()).collect();
        if system.has_drift() {
            gens.push(system.drift.clone());
        }
        (cfg.system.describe(), gens, system.dim)
    };
    let closure = lie_closure(&generators, default_closure_tol())?;
    let full = dim * dim - 1;
    let controllable = closure.stable && closure.dimension == full;
    println!("system: {label}");
    println!("generators: {}", generators.len());
    println!("dimension: {} / {}", closure.dimension, full);
    println!("controllable: {controllable}");
    println!("stable: {}", closure.stable);
    Ok(())
}

fn stateprep(cfg: &RunConfig) -> Result<()> {
    let system = cfg.system.build()?;
    let mut rng = rng_for(cfg);
    let target_spec = cfg
        .target
        .clone()
        .unwrap_or_else(|| "haar-random".to_string());
    let target = parse_state(&target_spec, &system, &mut rng)?;
    let mut initial: DVector<C64> = DVector::zeros(system.dim);
    initial[0] = Complex::new(1.0, 0.0);

    let layout = WaveformLayout::spline(&system, cfg.total_time, cfg.sample_rate)?;
    println!(
        "state preparation on {} (d = {}): {} variables, {} seeds",
        cfg.system.describe(),
        system.dim,
        layout.n_vars(),
        cfg.seeds
    );
    let obj = Objective::state_prep(system.clone(), layout, initial, target)?;
    let report = multistart(&obj, cfg.seeds, cfg.rng_seed.unwrap_or(0), &ascent_options(cfg))?;

    let dir = outdir(cfg)?;
    let path = dir.join("stateprep_report.tsv");
    let fields = render(&report.best_params, &system)?;
    let mut file = fs::File::create(&path)?;
    writeln!(file, "# objective = state_prep")?;
    writeln!(file, "# target = {target_spec}")?;
    writeln!(file, "# best_fidelity = {:.12}", report.best_value)?;
    writeln!(file, "# seeds_run = {}", report.seeds_run)?;
    writeln!(file, "# iterations = {}", report.iterations)?;
    writeln!(file, "# converged = {}", report.converged)?;
    writeln!(file, "# rng_seed = {}", report.rng_seed)?;
    for line in cfg.resolved_lines() {
        writeln!(file, "# {line}")?;
    }
    write_fields(&mut file, &fields)?;
    println!(
        "best fidelity {:.6} after {} total iterations -> {}",
        report.best_value,
        report.iterations,
        path.display()
    );
    Ok(())
}

fn target_unitary(
    cfg: &RunConfig,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Operator<f64>> {
    let name = cfg
        .target
        .clone()
        .or_else(|| cfg.gate.clone())
        .unwrap_or_else(|| "haar-random".into());
    if name == "haar-random" {
        return Ok(qctl_core::random::haar_unitary(d, rng));
    }
    parse_gate(&name, d)
}

pub fn parse_gate(name: &str, d: usize) -> Result<Operator<f64>> {
    let spec = match name {
        "x" | "X" => GateSpec::X,
        "z" | "Z" => GateSpec::Z,
        "h" | "H" | "dft" => GateSpec::Dft,
        "s" | "S" => GateSpec::SPhase,
        other => {
            if let Some(a) = other.strip_prefix('g').or_else(|| other.strip_prefix('G')) {
                GateSpec::Mult(a.parse().map_err(|e| {
                    qctl_core::Error::argument(format!("bad multiplier gate `{other}`: {e}"))
                })?)
            } else {
                bail!("unknown gate `{other}`; valid: x, z, dft, s, g<a>, haar-random");
            }
        }
    };
    Ok(gate_matrix(spec, d)?)
}

/// Embed a d-dimensional gate as identity ⊕ gate on the fiducial-first space.
fn embed_gate(gate: &Operator<f64>) -> Result<Operator<f64>> {
    let d = gate.dim() + 1;
    let mut m = nalgebra::DMatrix::identity(d, d);
    m.view_mut((1, 1), (gate.dim(), gate.dim()))
        .copy_from(gate.matrix());
    Ok(Operator::unitary(m)?)
}

fn synth(cfg: &RunConfig) -> Result<()> {
    let mut rng = rng_for(cfg);
    match cfg.mode.as_str() {
        "exact-maps" => {
            // matrix-level synthesis on the system's dimension
            let system_dim = match &cfg.system {
                SystemSpec::Restricted { .. } => 8,
                other => other.build()?.dim,
            };
            let system = matrix_synthesis_system::<f64>(system_dim);
            let target = target_unitary(cfg, system_dim, &mut rng)?;
            let plan = synthesize_unitary(&target, &system, &ExactMapProvider)?;
            report_plan(cfg, &plan, &system, "synth")?;
        }
        "pulse" => {
            let SystemSpec::Restricted { .. } = &cfg.system else {
                bail!("pulse-mode synthesis runs on the restricted phase system; pass --system restricted-4");
            };
            let system = cfg.system.build()?;
            let target = target_unitary(cfg, system.dim, &mut rng)?;
            let layout = WaveformLayout::spline(&system, cfg.total_time, cfg.sample_rate)?;
            let provider = PulseMapProvider {
                layout,
                n_seeds: cfg.seeds,
                rng_seed: cfg.rng_seed.unwrap_or(0),
                opts: ascent_options(cfg),
                f_min: 0.0,
            };
            let plan = synthesize_unitary(&target, &system, &provider)?;
            report_plan(cfg, &plan, &system, "synth")?;
        }
        other => bail!("unknown synthesis mode `{other}`; valid: exact-maps, pulse"),
    }
    Ok(())
}

fn gates(cfg: &RunConfig) -> Result<()> {
    let gate_name = cfg.gate.clone().unwrap_or_else(|| "dft".into());
    let gate = parse_gate(&gate_name, cfg.gate_dim)?;
    let target = embed_gate(&gate)?;
    match cfg.mode.as_str() {
        "exact-maps" => {
            let system = matrix_synthesis_system::<f64>(target.dim());
            let plan = synthesize_unitary(&target, &system, &ExactMapProvider)?;
            report_plan(cfg, &plan, &system, &format!("gate_{gate_name}"))?;
        }
        "pulse" => {
            let system = match &cfg.system {
                SystemSpec::Restricted { .. } => cfg.system.build()?,
                _ => crate::config::system_from_name("restricted-4")?.build()?,
            };
            if system.dim != target.dim() {
                bail!(
                    "gate dimension {} + fiducial does not fit the restricted system (d = {})",
                    cfg.gate_dim,
                    system.dim
                );
            }
            let layout = WaveformLayout::spline(&system, cfg.total_time, cfg.sample_rate)?;
            let provider = PulseMapProvider {
                layout,
                n_seeds: cfg.seeds,
                rng_seed: cfg.rng_seed.unwrap_or(0),
                opts: ascent_options(cfg),
                f_min: 0.0,
            };
            let plan = synthesize_unitary(&target, &system, &provider)?;
            report_plan(cfg, &plan, &system, &format!("gate_{gate_name}"))?;
        }
        other => bail!("unknown gates mode `{other}`; valid: exact-maps, pulse"),
    }
    Ok(())
}

/// Write the synthesis manifest plus per-step waveform tables.
fn report_plan(
    cfg: &RunConfig,
    plan: &SynthesisPlan<f64>,
    system: &ControlSystem<f64>,
    stem: &str,
) -> Result<()> {
    let dir = outdir(cfg)?;
    let manifest_path = dir.join(format!("{stem}_manifest.txt"));
    let mut manifest = fs::File::create(&manifest_path)?;
    writeln!(manifest, "# synthesis manifest")?;
    writeln!(manifest, "# fidelity = {:.12}", plan.fidelity)?;
    writeln!(manifest, "# fidelity_definition = |Tr(target' realized)| / d")?;
    writeln!(manifest, "# fiducial_index = {}", plan.fiducial_index)?;
    writeln!(manifest, "# steps = {}", plan.steps.len())?;
    for line in cfg.resolved_lines() {
        writeln!(manifest, "# {line}")?;
    }
    writeln!(
        manifest,
        "step\teigenphase_rad\tphase_duration_s\tmap_fidelity\twaveform_file"
    )?;
    for (i, step) in plan.steps.iter().enumerate() {
        let wf_name = match &step.map.realization {
            MapRealization::Matrix(_) => "-".to_string(),
            MapRealization::Pulse(params) => {
                let name = format!("{stem}_step{i}.tsv");
                let fields = render(params, system)?;
                let mut f = fs::File::create(dir.join(&name))?;
                write_fields(&mut f, &fields)?;
                name
            }
        };
        writeln!(
            manifest,
            "{i}\t{:.12e}\t{:.12e}\t{:.12}\t{wf_name}",
            step.eigenphase, step.phase_duration, step.map.fidelity
        )?;
    }
    println!(
        "synthesized with fidelity {:.9} ({} steps) -> {}",
        plan.fidelity,
        plan.steps.len(),
        manifest_path.display()
    );
    Ok(())
}

fn landscape(cfg: &RunConfig) -> Result<()> {
    let mut rng = rng_for(cfg);
    println!("critical values and Hessian signatures (formula vs measured):");
    println!("d\tn\tcritical_J\tformula(+,-,0)\tmeasured(+,-,0)");
    for d in 2..=4usize {
        let values = critical_values::<f64>(d);
        for n in 0..=d {
            let v = qctl_core::random::haar_unitary::<f64, _>(d, &mut rng);
            let (measured, crit) = numeric_hessian_check(&v, n, &mut rng)?;
            let formula = hessian_signature(d, n)?;
            let ok = measured == formula && (crit - values[d - n]).abs() < 1e-9;
            println!(
                "{d}\t{n}\t{crit:+.1}\t{formula:?}\t{measured:?}\t{}",
                if ok { "ok" } else { "MISMATCH" }
            );
        }
    }

    println!("\nstate-preparation landscape at d = 3 (generic controllable system):");
    let system = generic_controllable_system::<f64>(Spin::from_two_j(2));
    let layout = WaveformLayout::piecewise_constant(&system, 20.0, 0.05)?;
    let mut initial: DVector<C64> = DVector::zeros(3);
    initial[0] = Complex::new(1.0, 0.0);
    let target = qctl_core::random::random_state::<f64, _>(3, &mut rng);
    let obj = Objective::state_prep(system, layout, initial, target.clone())?;
    let opts = AscentOptions {
        tol: 1e-6,
        max_iters: 4_000,
        ..AscentOptions::default()
    };
    let n_samples = cfg.seeds.max(10);
    let stats = stateprep_critical_sampler(&obj, n_samples, cfg.rng_seed.unwrap_or(0), &opts)?;
    println!("seeds: {}", stats.n_samples);
    println!("fraction F > 0.99: {:.3}", stats.high_fidelity_fraction);
    println!(
        "max ‖[ρψ,ρf]‖ at converged points: {:.3e}",
        stats.max_commutator_residual
    );
    println!("mean search path length: {:.3}", stats.mean_path_length);
    let (pos, neg, zero) = stateprep_hessian_signature(&target);
    println!(
        "state-prep Hessian at the optimum: (+{pos}, -{neg}, 0:{zero}); U(d-1) dimension = {}",
        (3 - 1) * (3 - 1)
    );
    Ok(())
}

fn wigner(cfg: &RunConfig) -> Result<()> {
    let system = cfg.system.build()?;
    let mut rng = rng_for(cfg);
    let spec = cfg.target.clone().unwrap_or_else(|| "cat".into());
    let psi = parse_state(&spec, &system, &mut rng)?;
    let rho = Operator::projector(&psi);
    let grid = SphereGrid::default();
    let dir = outdir(cfg)?;

    if system.dim == 16 {
        let field = wigner_coupled(&rho, &grid)?;
        for block in &field.blocks {
            let path = dir.join(format!("wigner_{}.tsv", block.id));
            let mut f = fs::File::create(&path)?;
            write_block(&mut f, block, &grid)?;
            let cpath = dir.join(format!("wigner_{}_coefficients.tsv", block.id));
            let mut cf = fs::File::create(&cpath)?;
            write_coefficients(&mut cf, &block.multipoles)?;
            println!(
                "block {} (radius {:.4}) -> {}",
                block.id,
                block.radius,
                path.display()
            );
        }
    } else {
        let spin = match system.dim {
            8 => bail!("wigner export needs a single manifold or the full 16-dim space"),
            d => Spin::from_two_j((d - 1) as u64),
        };
        let field = wigner_single(&rho, spin, &grid)?;
        let m = qctl_core::wigner::multipoles(rho.matrix(), spin, spin)?;
        let path = dir.join("wigner_single.tsv");
        let mut f = fs::File::create(&path)?;
        writeln!(f, "# block W_single")?;
        writeln!(f, "# radius 1")?;
        writeln!(f, "# grid {} {}", grid.thetas.len(), grid.phis.len())?;
        writeln!(f, "theta\tphi\tvalue")?;
        for (i, t) in grid.thetas.iter().enumerate() {
            for (j, p) in grid.phis.iter().enumerate() {
                writeln!(f, "{t:.12e}\t{p:.12e}\t{:.17e}", field[(i, j)])?;
            }
        }
        let cpath = dir.join("wigner_single_coefficients.tsv");
        let mut cf = fs::File::create(&cpath)?;
        write_coefficients(&mut cf, &m)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn ecc(cfg: &RunConfig) -> Result<()> {
    let mut rng = rng_for(cfg);
    let n_qubits = cfg.seeds.max(100);
    let points = ecc_demo(&cfg.epsilons, &EccMaps::Exact, n_qubits, &mut rng)?;
    let dir = outdir(cfg)?;
    let path = dir.join("ecc_table.tsv");
    let mut f = fs::File::create(&path)?;
    writeln!(f, "# qubits_per_point = {n_qubits}")?;
    writeln!(f, "# rng_seed = {}", cfg.rng_seed.unwrap_or(0))?;
    writeln!(f, "epsilon\tcorrected\tuncorrected")?;
    println!("epsilon\tcorrected\tuncorrected");
    for p in &points {
        writeln!(f, "{:.6}\t{:.12}\t{:.12}", p.epsilon, p.corrected, p.uncorrected)?;
        println!("{:.3}\t{:.8}\t{:.8}", p.epsilon, p.corrected, p.uncorrected);
    }
    // log-log exponent fit over points with measurable infidelity
    let fit = |values: Vec<(f64, f64)>| -> Option<f64> {
        let pts: Vec<(f64, f64)> = values
            .into_iter()
            .filter(|(_, infid)| *infid > 1e-14)
            .map(|(e, i)| (e.ln(), i.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    };
    let corr = fit(points.iter().map(|p| (p.epsilon, 1.0 - p.corrected)).collect());
    let unc = fit(points.iter().map(|p| (p.epsilon, 1.0 - p.uncorrected)).collect());
    if let (Some(c), Some(u)) = (corr, unc) {
        println!("fitted infidelity exponents: corrected {c:.2}, uncorrected {u:.2}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

