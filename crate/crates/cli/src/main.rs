//! qctl: optimal-control runs for alkali-atom spin systems.

mod config;
mod targets;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_config, parse_config_lenient, system_from_name, RunConfig, TaskKind};

#[derive(Parser)]
#[command(
    name = "qctl",
    about = "Controllability checks, waveform optimization, unitary synthesis, \
             landscape verification, and Wigner-function exports for spin systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Sectioned key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// System name: a mwrf config id, `lightshift`, or `restricted±4`.
    #[arg(long)]
    system: Option<String>,
    /// Output directory.
    #[arg(long)]
    outdir: Option<String>,
    /// RNG seed for stochastic tasks.
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Worker-thread cap for seed-level parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct SearchArgs {
    /// Total waveform time, with unit suffix (e.g. 150us).
    #[arg(long)]
    time: Option<String>,
    /// Integrator sample interval (e.g. 0.1us).
    #[arg(long)]
    dt: Option<String>,
    /// Number of random seeds.
    #[arg(long)]
    seeds: Option<usize>,
    /// Gradient-norm convergence threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap per seed.
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Lie-algebra closure of a system's generator set.
    Controllability {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the idealized six-operator set {Fx±, Fy±, σx, σy} on d = 16.
        #[arg(long)]
        six_operators: bool,
    },
    /// Optimize a state-preparation waveform.
    Stateprep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Target state: |F,m>, cat, haar-random, or file:PATH.
        #[arg(long)]
        target: Option<String>,
    },
    /// Synthesize a full unitary from state preparations.
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Target unitary on the full system space: haar-random, or a gate
        /// name (x, z, dft, s, g<a>) taken at the system dimension. Use
        /// `gates` to embed a d-dimensional gate under the fiducial state.
        #[arg(long)]
        target: Option<String>,
        /// exact-maps (matrix oracle) or pulse (optimized waveforms).
        #[arg(long)]
        mode: Option<String>,
    },
    /// Synthesize a named qudit gate.
    Gates {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Gate name: x, z, dft, s, g<a>.
        #[arg(long)]
        gate: Option<String>,
        /// Gate dimension (embedded below the fiducial state).
        #[arg(long)]
        d: Option<usize>,
        /// exact-maps or pulse.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Verify landscape topology numerically.
    Landscape {
        #[command(flatten)]
        common: CommonArgs,
        /// Sampler seed count.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Export generalized Wigner-function data.
    Wigner {
        #[command(flatten)]
        common: CommonArgs,
        /// State to plot: |F,m>, cat, haar-random, or file:PATH.
        #[arg(long)]
        state: Option<String>,
    },
    /// Error-correction demo sweep.
    Ecc {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated rotation-error angles.
        #[arg(long)]
        epsilons: Option<String>,
        /// Haar-random qubits per sweep point.
        #[arg(long)]
        qubits: Option<usize>,
    },
    /// Execute the task named in a config file.
    Run {
        /// Config file.
        #[arg(long)]
        config: PathBuf,
    },
}

fn base_config(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => parse_config_lenient(path)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &common.system {
        cfg.system = system_from_name(name)?;
    }
    if let Some(dir) = &common.outdir {
        cfg.outdir = dir.clone();
    }
    if let Some(seed) = common.rng_seed {
        cfg.rng_seed = Some(seed);
    }
    if let Some(jobs) = common.jobs {
        let _ = qctl_core::rayon_thread_cap(jobs);
    }
    Ok(cfg)
}

fn apply_search(cfg: &mut RunConfig, search: &SearchArgs) -> anyhow::Result<()> {
    if let Some(t) = &search.time {
        cfg.total_time = config::parse_duration(t, 0)?;
    }
    if let Some(dt) = &search.dt {
        cfg.sample_rate = config::parse_duration(dt, 0)?;
    }
    if let Some(s) = search.seeds {
        cfg.seeds = s;
    }
    if let Some(t) = search.tol {
        cfg.tol = t;
    }
    if let Some(m) = search.max_iters {
        cfg.max_iters = m;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Controllability {
            common,
            six_operators,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::Controllability;
            tasks::controllability(&cfg, six_operators)
        }
        Command::Stateprep {
            common,
            search,
            target,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::StatePrep;
            apply_search(&mut cfg, &search)?;
            if target.is_some() {
                cfg.target = target;
            }
            if cfg.rng_seed.is_none() {
                cfg.rng_seed = Some(0);
            }
            tasks::run(&cfg)
        }
        Command::Synth {
            common,
            search,
            target,
            mode,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::Synth;
            apply_search(&mut cfg, &search)?;
            if target.is_some() {
                cfg.target = target;
            }
            if let Some(m) = mode {
                cfg.mode = m;
            }
            if cfg.rng_seed.is_none() {
                cfg.rng_seed = Some(0);
            }
            tasks::run(&cfg)
        }
        Command::Gates {
            common,
            search,
            gate,
            d,
            mode,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::Gates;
            apply_search(&mut cfg, &search)?;
            if gate.is_some() {
                cfg.gate = gate;
            }
            if let Some(d) = d {
                cfg.gate_dim = d;
            }
            if let Some(m) = mode {
                cfg.mode = m;
            }
            if cfg.rng_seed.is_none() {
                cfg.rng_seed = Some(0);
            }
            tasks::run(&cfg)
        }
        Command::Landscape { common, samples } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::Landscape;
            if let Some(s) = samples {
                cfg.seeds = s;
            }
            if cfg.rng_seed.is_none() {
                cfg.rng_seed = Some(0);
            }
            tasks::run(&cfg)
        }
        Command::Wigner { common, state } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::Wigner;
            if state.is_some() {
                cfg.target = state;
            }
            if cfg.rng_seed.is_none() {
                cfg.rng_seed = Some(0);
            }
            tasks::run(&cfg)
        }
        Command::Ecc {
            common,
            epsilons,
            qubits,
        } => {
            let mut cfg = base_config(&common)?;
            cfg.task = TaskKind::Ecc;
            if let Some(e) = epsilons {
                cfg.epsilons = e
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()?;
            }
            if let Some(q) = qubits {
                cfg.seeds = q;
            }
            if cfg.rng_seed.is_none() {
                cfg.rng_seed = Some(0);
            }
            tasks::run(&cfg)
        }
        Command::Run { config } => {
            let cfg = parse_config(&config)?;
            tasks::run(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // machine-readable error record on stderr
            let msg = format!("{err:#}").replace('\\', "\\\\").replace('"', "\\\"");
            eprintln!("{{\"status\":\"error\",\"message\":\"{msg}\"}}");
            ExitCode::FAILURE
        }
    }
}
