//! The target-state mini-language: named kets, `cat`, `haar-random`, and
//! raw-amplitude files.

use nalgebra::DVector;
use num_complex::Complex;
use rand::Rng;

use qctl_core::hamiltonians::ControlSystem;
use qctl_core::{Error, Half, Result, Spin};

type C64 = Complex<f64>;

/// Resolve a state spec against a system's basis layout.
///
/// Kets `|F,m>` address the 16-dimensional space (F = 4 then F = 3 blocks,
/// m descending), the restricted 8-dimensional space (index 0 is the
/// auxiliary |4,±4⟩, then F = 3), or a single manifold. `cat` is
/// (|4,4⟩+|3,-3⟩)/√2 on the full space and (|F,F⟩+|F,-F⟩)/√2 on one
/// manifold; `haar-random` draws from the seeded generator; `file:PATH`
/// reads one `re im` amplitude pair per line.
pub fn parse_state(
    spec: &str,
    system: &ControlSystem<f64>,
    rng: &mut impl Rng,
) -> Result<DVector<C64>> {
    let d = system.dim;
    let spec = spec.trim();
    if spec == "haar-random" {
        return Ok(qctl_core::random::random_state(d, rng));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        return read_amplitudes(path, d);
    }
    if spec == "cat" {
        let mut v: DVector<C64> = DVector::zeros(d);
        let amp = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match d {
            16 => {
                v[0] = amp; // |4,4⟩
                v[15] = amp; // |3,-3⟩
            }
            8 => {
                v[1] = amp; // |3,3⟩
                v[7] = amp; // |3,-3⟩
            }
            _ => {
                v[0] = amp;
                v[d - 1] = amp;
            }
        }
        return Ok(v);
    }
    if let Some(body) = spec.strip_prefix('|').and_then(|s| s.strip_suffix('>')) {
        let Some((f_str, m_str)) = body.split_once(',') else {
            return Err(Error::argument(format!("bad ket `{spec}`: expected |F,m>")));
        };
        let f = Half::from_f64(f_str.trim().parse::<f64>().map_err(|e| {
            Error::argument(format!("bad ket `{spec}`: {e}"))
        })?)?;
        let m = Half::from_f64(m_str.trim().parse::<f64>().map_err(|e| {
            Error::argument(format!("bad ket `{spec}`: {e}"))
        })?)?;
        let index = ket_index(d, f, m)?;
        let mut v: DVector<C64> = DVector::zeros(d);
        v[index] = Complex::new(1.0, 0.0);
        return Ok(v);
    }
    Err(Error::argument(format!(
        "unknown state `{spec}`; use |F,m>, cat, haar-random, or file:PATH"
    )))
}

fn ket_index(d: usize, f: Half, m: Half) -> Result<usize> {
    match d {
        16 => {
            let up = Spin::from_two_j(8);
            let down = Spin::from_two_j(6);
            if f == Half::int(4) {
                up.index_of(m)
            } else if f == Half::int(3) {
                Ok(9 + down.index_of(m)?)
            } else {
                Err(Error::argument(format!("F = {f} is not 4 or 3")))
            }
        }
        8 => {
            if f == Half::int(4) {
                // the auxiliary state, whatever its m sign
                Ok(0)
            } else if f == Half::int(3) {
                Ok(1 + Spin::from_two_j(6).index_of(m)?)
            } else {
                Err(Error::argument(format!("F = {f} is not 4 or 3")))
            }
        }
        _ => {
            let spin = Spin::from_two_j((d - 1) as u64);
            if f != spin.j() {
                return Err(Error::argument(format!(
                    "F = {f} does not match the system manifold F = {}",
                    spin.j()
                )));
            }
            spin.index_of(m)
        }
    }
}

fn read_amplitudes(path: &str, d: usize) -> Result<DVector<C64>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::argument(format!("cannot read state file {path}: {e}"))
    })?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|e| Error::Parse {
                line: i + 1,
                message: format!("bad amplitude `{s}`: {e}"),
            })
        };
        let (re, im) = match parts.len() {
            1 => (parse(parts[0])?, 0.0),
            2 => (parse(parts[0])?, parse(parts[1])?),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected `re` or `re im`".into(),
                })
            }
        };
        values.push(Complex::new(re, im));
    }
    if values.len() != d {
        return Err(Error::argument(format!(
            "state file has {} amplitudes, system needs {d}",
            values.len()
        )));
    }
    let mut v = DVector::from_vec(values);
    let norm = v.norm();
    if norm < 1e-12 {
        return Err(Error::argument("state file holds the zero vector"));
    }
    v /= Complex::new(norm, 0.0);
    Ok(v)
}
