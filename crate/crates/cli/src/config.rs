//! Sectioned key=value run configuration.
//!
//! Frequencies accept Hz/kHz/MHz suffixes and are stored as angular
//! frequencies (rad/s); durations accept s/ms/us/ns. Unknown keys, duplicate
//! task sections, and malformed values are errors carrying the line number.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use qctl_core::hamiltonians::{
    light_shift_system, mwrf_system, restricted_phase_system_with, ConfigId, ControlSystem,
    LightShiftConfig, MwRfConfig, RestrictedPhaseConfig,
};
use qctl_core::spin::Spin;
use qctl_core::{Error, Result};

/// Which physical system the run uses.
#[derive(Debug, Clone)]
pub enum SystemSpec {
    MwRf(MwRfConfig<f64>),
    LightShift(LightShiftConfig<f64>),
    Restricted {
        aux_m: i64,
        cfg: RestrictedPhaseConfig<f64>,
    },
}

impl SystemSpec {
    pub fn build(&self) -> Result<ControlSystem<f64>> {
        match self {
            SystemSpec::MwRf(cfg) => mwrf_system(cfg),
            SystemSpec::LightShift(cfg) => Ok(light_shift_system(cfg)),
            SystemSpec::Restricted { aux_m, cfg } => restricted_phase_system_with(*aux_m, cfg),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SystemSpec::MwRf(cfg) => format!("mwrf:{}", cfg.config_id),
            SystemSpec::LightShift(cfg) => {
                format!("lightshift:F={}", cfg.spin.j())
            }
            SystemSpec::Restricted { aux_m, .. } => format!("restricted:aux_m={aux_m}"),
        }
    }
}

/// Task selector and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskKind {
    Controllability,
    StatePrep,
    Synth,
    Gates,
    Landscape,
    Wigner,
    Ecc,
}

impl TaskKind {
    pub fn parse(s: &str, line: usize) -> Result<Self> {
        match s {
            "controllability" => Ok(TaskKind::Controllability),
            "stateprep" => Ok(TaskKind::StatePrep),
            "synth" => Ok(TaskKind::Synth),
            "gates" => Ok(TaskKind::Gates),
            "landscape" => Ok(TaskKind::Landscape),
            "wigner" => Ok(TaskKind::Wigner),
            "ecc" => Ok(TaskKind::Ecc),
            other => Err(Error::Parse {
                line,
                message: format!(
                    "unknown task `{other}`; valid: controllability, stateprep, synth, gates, \
                     landscape, wigner, ecc"
                ),
            }),
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            TaskKind::StatePrep | TaskKind::Synth | TaskKind::Landscape | TaskKind::Ecc
        )
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub task: TaskKind,
    pub target: Option<String>,
    pub gate: Option<String>,
    pub gate_dim: usize,
    pub mode: String,
    pub epsilons: Vec<f64>,
    pub total_time: f64,
    pub sample_rate: f64,
    pub seeds: usize,
    pub rng_seed: Option<u64>,
    pub tol: f64,
    pub max_iters: usize,
    pub outdir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemSpec::MwRf(MwRfConfig::new(ConfigId::RfAp2Mw2Ap)),
            task: TaskKind::StatePrep,
            target: None,
            gate: None,
            gate_dim: 7,
            mode: "exact-maps".into(),
            epsilons: vec![0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            total_time: 150e-6,
            sample_rate: 0.1e-6,
            seeds: 20,
            rng_seed: None,
            tol: 1e-3,
            max_iters: 2_000,
            outdir: "out".into(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_time <= 0.0 || self.sample_rate <= 0.0 {
            return Err(Error::argument("durations must be positive"));
        }
        if self.seeds == 0 {
            return Err(Error::argument("seeds must be at least 1"));
        }
        if self.task.is_stochastic() && self.rng_seed.is_none() {
            return Err(Error::argument(
                "stochastic tasks require an explicit rng_seed",
            ));
        }
        Ok(())
    }

    /// Resolved key=value lines for embedding into reports.
    pub fn resolved_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("system = {}", self.system.describe()),
            format!("task = {:?}", self.task).to_lowercase(),
            format!("total_time_s = {:e}", self.total_time),
            format!("sample_rate_s = {:e}", self.sample_rate),
            format!("seeds = {}", self.seeds),
            format!("tol = {:e}", self.tol),
            format!("max_iters = {}", self.max_iters),
        ];
        if let Some(seed) = self.rng_seed {
            out.push(format!("rng_seed = {seed}"));
        }
        if let Some(t) = &self.target {
            out.push(format!("target = {t}"));
        }
        if let Some(g) = &self.gate {
            out.push(format!("gate = {g} (d = {})", self.gate_dim));
        }
        out
    }
}

/// Parse a frequency with Hz/kHz/MHz suffix into rad/s.
pub fn parse_frequency(s: &str, line: usize) -> Result<f64> {
    let s = s.trim();
    let (value, mult) = if let Some(v) = s.strip_suffix("MHz") {
        (v, TAU * 1e6)
    } else if let Some(v) = s.strip_suffix("kHz") {
        (v, TAU * 1e3)
    } else if let Some(v) = s.strip_suffix("Hz") {
        (v, TAU)
    } else {
        return Err(Error::Parse {
            line,
            message: format!("frequency `{s}` needs a Hz/kHz/MHz suffix"),
        });
    };
    let x: f64 = value.trim().parse().map_err(|e| Error::Parse {
        line,
        message: format!("bad frequency `{s}`: {e}"),
    })?;
    Ok(x * mult)
}

/// Parse a duration with s/ms/us/ns suffix into seconds.
pub fn parse_duration(s: &str, line: usize) -> Result<f64> {
    let s = s.trim();
    let (value, mult) = if let Some(v) = s.strip_suffix("ns") {
        (v, 1e-9)
    } else if let Some(v) = s.strip_suffix("us") {
        (v, 1e-6)
    } else if let Some(v) = s.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = s.strip_suffix('s') {
        (v, 1.0)
    } else {
        return Err(Error::Parse {
            line,
            message: format!("duration `{s}` needs an s/ms/us/ns suffix"),
        });
    };
    let x: f64 = value.trim().parse().map_err(|e| Error::Parse {
        line,
        message: format!("bad duration `{s}`: {e}"),
    })?;
    Ok(x * mult)
}

fn parse_number<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| Error::Parse {
        line,
        message: format!("bad {what} `{s}`: {e}"),
    })
}

/// Parse the sectioned key=value config file. A `[task]` section with a
/// `kind` is required; use `parse_config_lenient` when the task comes from
/// the command line instead.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = read_config(path)?;
    parse_config_str(&text)
}

/// Like `parse_config` but without requiring a `[task]` section.
pub fn parse_config_lenient(path: &Path) -> Result<RunConfig> {
    let text = read_config(path)?;
    parse_config_str_impl(&text, false)
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    parse_config_str_impl(text, true)
}

fn parse_config_str_impl(text: &str, require_task: bool) -> Result<RunConfig> {
    // section -> key -> (value, line)
    let mut sections: BTreeMap<String, Vec<(String, String, usize)>> = BTreeMap::new();
    let mut task_section_lines = Vec::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_owned();
            if name == "task" {
                task_section_lines.push(line_no);
            }
            current = Some(name.clone());
            sections.entry(name).or_default();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let Some(section) = &current else {
            return Err(Error::Parse {
                line: line_no,
                message: "key outside of any [section]".into(),
            });
        };
        sections.get_mut(section).unwrap().push((
            key.trim().to_owned(),
            value.trim().to_owned(),
            line_no,
        ));
    }

    if task_section_lines.len() > 1 {
        return Err(Error::Parse {
            line: task_section_lines[1],
            message: "duplicate [task] section".into(),
        });
    }

    for name in sections.keys() {
        if !matches!(name.as_str(), "system" | "task" | "optimization" | "io") {
            return Err(Error::Parse {
                line: 0,
                message: format!("unknown section [{name}]"),
            });
        }
    }

    let mut cfg = RunConfig::default();
    let mut task_seen = false;

    if let Some(entries) = sections.get("system") {
        cfg.system = parse_system_section(entries)?;
    }
    if let Some(entries) = sections.get("task") {
        for (key, value, line) in entries {
            match key.as_str() {
                "kind" => {
                    cfg.task = TaskKind::parse(value, *line)?;
                    task_seen = true;
                }
                "target" => cfg.target = Some(value.clone()),
                "gate" => cfg.gate = Some(value.clone()),
                "d" => cfg.gate_dim = parse_number(value, *line, "dimension")?,
                "mode" => cfg.mode = value.clone(),
                "epsilons" => {
                    cfg.epsilons = value
                        .split(',')
                        .map(|v| parse_number::<f64>(v, *line, "epsilon"))
                        .collect::<Result<_>>()?;
                }
                other => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("unknown key `{other}` in [task]"),
                    })
                }
            }
        }
    }
    if let Some(entries) = sections.get("optimization") {
        for (key, value, line) in entries {
            match key.as_str() {
                "total_time" => cfg.total_time = parse_duration(value, *line)?,
                "sample_rate" => cfg.sample_rate = parse_duration(value, *line)?,
                "seeds" => cfg.seeds = parse_number(value, *line, "seed count")?,
                "rng_seed" => cfg.rng_seed = Some(parse_number(value, *line, "rng seed")?),
                "tol" => cfg.tol = parse_number(value, *line, "tolerance")?,
                "max_iters" => cfg.max_iters = parse_number(value, *line, "iteration cap")?,
                other => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("unknown key `{other}` in [optimization]"),
                    })
                }
            }
        }
    }
    if let Some(entries) = sections.get("io") {
        for (key, value, line) in entries {
            match key.as_str() {
                "outdir" => cfg.outdir = value.clone(),
                other => {
                    return Err(Error::Parse {
                        line: *line,
                        message: format!("unknown key `{other}` in [io]"),
                    })
                }
            }
        }
    }

    if require_task && !task_seen {
        return Err(Error::Parse {
            line: task_section_lines.first().copied().unwrap_or(0),
            message: "no task selected: a [task] section with `kind` is required".into(),
        });
    }
    if sections.contains_key("task") && !task_seen {
        return Err(Error::Parse {
            line: task_section_lines.first().copied().unwrap_or(0),
            message: "[task] section is missing `kind`".into(),
        });
    }
    Ok(cfg)
}

fn parse_system_section(entries: &[(String, String, usize)]) -> Result<SystemSpec> {
    let kind = entries
        .iter()
        .find(|(k, _, _)| k == "kind")
        .map(|(_, v, _)| v.as_str())
        .unwrap_or("mwrf");

    match kind {
        "mwrf" => {
            let mut cfg = MwRfConfig::<f64>::new(ConfigId::RfAp2Mw2Ap);
            for (key, value, line) in entries {
                match key.as_str() {
                    "kind" => {}
                    "config_id" => {
                        cfg.config_id = value.parse().map_err(|e: Error| Error::Parse {
                            line: *line,
                            message: e.to_string(),
                        })?
                    }
                    "rf_amp" => cfg.rf_amp = parse_frequency(value, *line)?,
                    "mw_amp" => cfg.mw_amp = parse_frequency(value, *line)?,
                    "rf_slew" => cfg.rf_slew = parse_duration(value, *line)?,
                    "mw_slew" => cfg.mw_slew = parse_duration(value, *line)?,
                    "rf_detuning" => cfg.rf_detuning = parse_frequency(value, *line)?,
                    "mw_detuning" => cfg.mw_detuning = parse_frequency(value, *line)?,
                    "g_ratio" => cfg.g_ratio = parse_number(value, *line, "g ratio")?,
                    other => {
                        return Err(Error::Parse {
                            line: *line,
                            message: format!("unknown key `{other}` in [system] (mwrf)"),
                        })
                    }
                }
            }
            Ok(SystemSpec::MwRf(cfg))
        }
        "lightshift" => {
            let mut cfg = LightShiftConfig::<f64>::default();
            for (key, value, line) in entries {
                match key.as_str() {
                    "kind" => {}
                    "f" => {
                        let two_j: u64 = parse_number::<f64>(value, *line, "spin")
                            .map(|j| (2.0 * j).round() as u64)?;
                        cfg.spin = Spin::from_two_j(two_j);
                    }
                    "nonlinearity" => cfg.nonlinearity = parse_frequency(value, *line)?,
                    "larmor" => cfg.larmor_bound = parse_frequency(value, *line)?,
                    "slew" => cfg.slew_time = parse_duration(value, *line)?,
                    "constrained_angle" => {
                        cfg.constrained_angle_mode = parse_number(value, *line, "flag")?
                    }
                    other => {
                        return Err(Error::Parse {
                            line: *line,
                            message: format!("unknown key `{other}` in [system] (lightshift)"),
                        })
                    }
                }
            }
            Ok(SystemSpec::LightShift(cfg))
        }
        "restricted" => {
            let mut aux_m = -4i64;
            let mut cfg = RestrictedPhaseConfig::<f64>::default();
            for (key, value, line) in entries {
                match key.as_str() {
                    "kind" => {}
                    "aux_m" => aux_m = parse_number(value, *line, "aux_m")?,
                    "rf_amp" => cfg.rf_amp = parse_frequency(value, *line)?,
                    "mw_amp" => cfg.mw_amp = parse_frequency(value, *line)?,
                    "rf_slew" => cfg.rf_slew = parse_duration(value, *line)?,
                    "mw_slew" => cfg.mw_slew = parse_duration(value, *line)?,
                    "primitive_strength" => {
                        cfg.primitive_strength = parse_frequency(value, *line)?
                    }
                    other => {
                        return Err(Error::Parse {
                            line: *line,
                            message: format!("unknown key `{other}` in [system] (restricted)"),
                        })
                    }
                }
            }
            Ok(SystemSpec::Restricted { aux_m, cfg })
        }
        other => Err(Error::Parse {
            line: entries
                .iter()
                .find(|(k, _, _)| k == "kind")
                .map(|(_, _, l)| *l)
                .unwrap_or(0),
            message: format!("unknown system kind `{other}`; valid: mwrf, lightshift, restricted"),
        }),
    }
}

/// Parse a system name given on the command line: a mwrf config id,
/// `lightshift`, `restricted+4`, or `restricted-4`.
pub fn system_from_name(name: &str) -> Result<SystemSpec> {
    match name {
        "lightshift" => Ok(SystemSpec::LightShift(LightShiftConfig::default())),
        "restricted+4" => Ok(SystemSpec::Restricted {
            aux_m: 4,
            cfg: RestrictedPhaseConfig::default(),
        }),
        "restricted-4" => Ok(SystemSpec::Restricted {
            aux_m: -4,
            cfg: RestrictedPhaseConfig::default(),
        }),
        other => {
            let id: ConfigId = other.parse().map_err(|_: Error| {
                Error::argument(format!(
                    "unknown system `{other}`; valid: lightshift, restricted+4, restricted-4, \
                     or a mwrf config id ({})",
                    ConfigId::ALL
                        .iter()
                        .map(|c| c.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
            Ok(SystemSpec::MwRf(MwRfConfig::new(id)))
        }
    }
}
