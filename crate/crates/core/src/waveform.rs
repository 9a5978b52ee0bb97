//! Raw optimization vectors and their rendering into physical field samples.
//!
//! A waveform is parameterized by knots in [-1,1] at the slew-time spacing of
//! each channel. Amplitude streams scale the channel bound directly; phase
//! streams accumulate (2π × cumulative sum) and drive an in-phase/quadrature
//! pair at either a controlled or a fixed amplitude. Knots are interpolated
//! onto the integrator grid by a natural cubic spline pinned to zero at both
//! endpoints.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hamiltonians::{ChannelKind, ControlSystem};
use crate::scalar::{fr, Real};

/// What a knot stream controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Amplitude,
    Phase,
}

/// One contiguous slice of the raw vector.
#[derive(Debug, Clone, Copy)]
pub struct StreamRef {
    pub group: usize,
    pub role: StreamRole,
    pub offset: usize,
    pub knots: usize,
}

/// Shape of the optimization vector for one system and time grid.
#[derive(Debug, Clone)]
pub struct WaveformLayout<T: Real> {
    pub total_time: T,
    pub sample_rate: T,
    /// Number of field samples, T/Δt + 1.
    pub n_samples: usize,
    pub piecewise_constant: bool,
    pub streams: Vec<StreamRef>,
    /// First field row of each channel group.
    pub group_rows: Vec<usize>,
    pub n_rows: usize,
    n_vars: usize,
    spline_cache: HashMap<usize, Arc<DMatrix<T>>>,
}

/// Knot count at slew time τ over total time T: ceil(T/τ) - 1.
pub fn knot_count<T: Real>(total_time: T, slew_time: T) -> usize {
    let ratio: f64 = nalgebra::try_convert(total_time / slew_time).unwrap_or(0.0);
    ((ratio - 1e-9).ceil() as usize).saturating_sub(1)
}

impl<T: Real> WaveformLayout<T> {
    /// Spline layout: knots per channel at its slew spacing.
    pub fn spline(system: &ControlSystem<T>, total_time: T, sample_rate: T) -> Result<Self> {
        let n_samples = samples_for(total_time, sample_rate)?;
        let mut streams = Vec::new();
        let mut group_rows = Vec::new();
        let mut offset = 0;
        let mut row = 0;
        for (gi, g) in system.groups.iter().enumerate() {
            group_rows.push(row);
            row += g.n_rows();
            let knots = knot_count(total_time, g.slew_time);
            match g.kind() {
                ChannelKind::Amplitude => {
                    streams.push(StreamRef {
                        group: gi,
                        role: StreamRole::Amplitude,
                        offset,
                        knots,
                    });
                    offset += knots;
                }
                ChannelKind::PhaseQuadraturePair => {
                    if g.amp_controlled {
                        streams.push(StreamRef {
                            group: gi,
                            role: StreamRole::Amplitude,
                            offset,
                            knots,
                        });
                        offset += knots;
                    }
                    streams.push(StreamRef {
                        group: gi,
                        role: StreamRole::Phase,
                        offset,
                        knots,
                    });
                    offset += knots;
                }
            }
        }
        let mut layout = WaveformLayout {
            total_time,
            sample_rate,
            n_samples,
            piecewise_constant: false,
            streams,
            group_rows,
            n_rows: row,
            n_vars: offset,
            spline_cache: HashMap::new(),
        };
        let counts: Vec<usize> = layout.streams.iter().map(|s| s.knots).collect();
        for knots in counts {
            layout.ensure_basis(knots);
        }
        Ok(layout)
    }

    /// Piecewise-constant layout: one knot per Δt interval per field row,
    /// amplitude semantics on every row.
    pub fn piecewise_constant(
        system: &ControlSystem<T>,
        total_time: T,
        sample_rate: T,
    ) -> Result<Self> {
        let n_samples = samples_for(total_time, sample_rate)?;
        let mut streams = Vec::new();
        let mut group_rows = Vec::new();
        let mut offset = 0;
        let mut row = 0;
        for (gi, g) in system.groups.iter().enumerate() {
            group_rows.push(row);
            for _ in 0..g.n_rows() {
                streams.push(StreamRef {
                    group: gi,
                    role: StreamRole::Amplitude,
                    offset,
                    knots: n_samples,
                });
                offset += n_samples;
                row += 1;
            }
        }
        Ok(WaveformLayout {
            total_time,
            sample_rate,
            n_samples,
            piecewise_constant: true,
            streams,
            group_rows,
            n_rows: row,
            n_vars: offset,
            spline_cache: HashMap::new(),
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    fn ensure_basis(&mut self, knots: usize) {
        if knots == 0 || self.spline_cache.contains_key(&knots) {
            return;
        }
        let basis = spline_response(knots, self.total_time, self.sample_rate, self.n_samples);
        self.spline_cache.insert(knots, Arc::new(basis));
    }

    fn basis(&self, knots: usize) -> &DMatrix<T> {
        self.spline_cache
            .get(&knots)
            .expect("spline basis cached at layout construction")
    }
}

fn samples_for<T: Real>(total_time: T, sample_rate: T) -> Result<usize> {
    if total_time <= T::zero() || sample_rate <= T::zero() {
        return Err(Error::argument("durations must be positive"));
    }
    let ratio: f64 = nalgebra::try_convert(total_time / sample_rate).unwrap_or(f64::NAN);
    let n = ratio.round();
    if !n.is_finite() || (ratio - n).abs() > 1e-6 * n.max(1.0) {
        return Err(Error::argument(format!(
            "total_time must be an integer multiple of sample_rate (ratio {ratio})"
        )));
    }
    Ok(n as usize + 1)
}

/// Response matrix of the natural cubic spline through n interior knots with
/// pinned zero endpoints: rows are sample times, columns are unit knots.
fn spline_response<T: Real>(
    n_knots: usize,
    total_time: T,
    sample_rate: T,
    n_samples: usize,
) -> DMatrix<T> {
    let m = n_knots + 2; // knot points including endpoints
    let h: f64 = nalgebra::try_convert::<T, f64>(total_time).unwrap() / (m as f64 - 1.0);
    let dt: f64 = nalgebra::try_convert(sample_rate).unwrap();

    let mut weights = DMatrix::zeros(n_samples, n_knots);
    for j in 0..n_knots {
        let mut y = vec![0.0f64; m];
        y[j + 1] = 1.0;
        let m2 = natural_spline_second_derivatives(&y, h);
        for k in 0..n_samples {
            let t = (k as f64) * dt;
            weights[(k, j)] = fr(eval_cubic(&y, &m2, h, t));
        }
    }
    weights
}

/// Second derivatives of the natural cubic spline on a uniform grid.
fn natural_spline_second_derivatives(y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len();
    let mut m2 = vec![0.0f64; m];
    if m < 3 {
        return m2;
    }
    let n = m - 2; // interior count
    let mut diag = vec![4.0f64; n];
    let mut rhs = vec![0.0f64; n];
    for i in 0..n {
        rhs[i] = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
    }
    // Thomas algorithm, off-diagonals are 1.
    for i in 1..n {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    m2[n] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m2[i + 1] = (rhs[i] - m2[i + 2]) / diag[i];
    }
    m2
}

fn eval_cubic(y: &[f64], m2: &[f64], h: f64, t: f64) -> f64 {
    let m = y.len();
    let mut i = (t / h).floor() as usize;
    if i > m - 2 {
        i = m - 2;
    }
    let s = t - (i as f64) * h;
    let dy = (y[i + 1] - y[i]) / h - h * (2.0 * m2[i] + m2[i + 1]) / 6.0;
    y[i] + s * (dy + s * (m2[i] / 2.0 + s * (m2[i + 1] - m2[i]) / (6.0 * h)))
}

/// Raw optimization vector with its layout.
#[derive(Debug, Clone)]
pub struct WaveformParams<T: Real> {
    pub raw: DVector<T>,
    pub layout: WaveformLayout<T>,
}

impl<T: Real> WaveformParams<T> {
    pub fn new(raw: DVector<T>, layout: WaveformLayout<T>) -> Result<Self> {
        if raw.len() != layout.n_vars() {
            return Err(Error::argument(format!(
                "raw vector length {} does not match layout ({} variables)",
                raw.len(),
                layout.n_vars()
            )));
        }
        let one = T::one();
        for v in raw.iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite("waveform parameters"));
            }
            if v.abs() > one + fr(1e-12) {
                return Err(Error::argument("raw waveform values must lie in [-1, 1]"));
            }
        }
        Ok(WaveformParams { raw, layout })
    }

    pub fn zeros(layout: WaveformLayout<T>) -> Self {
        WaveformParams {
            raw: DVector::zeros(layout.n_vars()),
            layout,
        }
    }
}

/// Per-channel field samples on the uniform time grid (rad/s).
#[derive(Debug, Clone)]
pub struct SampledFields<T: Real> {
    pub dt: T,
    /// n_rows × n_samples.
    pub rows: DMatrix<T>,
    pub labels: Vec<String>,
}

impl<T: Real> SampledFields<T> {
    pub fn n_samples(&self) -> usize {
        self.rows.ncols()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * fr(k as f64)
    }
}

/// Render raw parameters into field samples for `system`.
pub fn render<T: Real>(
    params: &WaveformParams<T>,
    system: &ControlSystem<T>,
) -> Result<SampledFields<T>> {
    let layout = &params.layout;
    if layout.n_rows != system.n_rows() {
        return Err(Error::argument(format!(
            "layout has {} field rows but system has {}",
            layout.n_rows,
            system.n_rows()
        )));
    }
    let n = layout.n_samples;
    let mut rows: DMatrix<T> = DMatrix::zeros(layout.n_rows, n);

    if layout.piecewise_constant {
        for sref in &layout.streams {
            let g = &system.groups[sref.group];
            let row = row_of_stream(layout, sref);
            for k in 0..n {
                rows[(row, k)] = g.amplitude_bound * params.raw[sref.offset + k];
            }
        }
        return Ok(SampledFields {
            dt: layout.sample_rate,
            rows,
            labels: system.row_labels(),
        });
    }

    for (gi, g) in system.groups.iter().enumerate() {
        let row0 = layout.group_rows[gi];
        let streams: Vec<&StreamRef> = layout.streams.iter().filter(|s| s.group == gi).collect();
        match g.kind() {
            ChannelKind::Amplitude => {
                let s = streams[0];
                if s.knots == 0 {
                    continue;
                }
                let basis = layout.basis(s.knots);
                let knots: Vec<T> = (0..s.knots)
                    .map(|i| g.amplitude_bound * params.raw[s.offset + i])
                    .collect();
                accumulate(&mut rows, row0, basis, &knots);
            }
            ChannelKind::PhaseQuadraturePair => {
                let phase_ref = streams
                    .iter()
                    .find(|s| s.role == StreamRole::Phase)
                    .expect("pair has phase stream");
                let amp_ref = streams.iter().find(|s| s.role == StreamRole::Amplitude);
                let nk = phase_ref.knots;
                if nk == 0 {
                    continue;
                }
                let basis = layout.basis(nk);
                let two_pi = fr::<T>(std::f64::consts::TAU);
                let mut theta = T::zero();
                let mut in_knots = Vec::with_capacity(nk);
                let mut quad_knots = Vec::with_capacity(nk);
                for i in 0..nk {
                    theta += two_pi * params.raw[phase_ref.offset + i];
                    let amp = match amp_ref {
                        Some(a) => g.amplitude_bound * params.raw[a.offset + i],
                        None => g.amplitude_bound,
                    };
                    in_knots.push(amp * theta.cos());
                    quad_knots.push(amp * theta.sin());
                }
                accumulate(&mut rows, row0, basis, &in_knots);
                accumulate(&mut rows, row0 + 1, basis, &quad_knots);
            }
        }
    }

    // Spline channels are pinned to zero at both ends; snap away roundoff.
    for r in 0..rows.nrows() {
        rows[(r, 0)] = T::zero();
        rows[(r, n - 1)] = T::zero();
    }

    Ok(SampledFields {
        dt: layout.sample_rate,
        rows,
        labels: system.row_labels(),
    })
}

fn row_of_stream<T: Real>(layout: &WaveformLayout<T>, sref: &StreamRef) -> usize {
    // In piecewise-constant layouts streams map 1:1 onto rows in order.
    let mut row = layout.group_rows[sref.group];
    for s in &layout.streams {
        if std::ptr::eq(s, sref) {
            break;
        }
        if s.group == sref.group {
            row += 1;
        }
    }
    row
}

fn accumulate<T: Real>(rows: &mut DMatrix<T>, row: usize, basis: &DMatrix<T>, knots: &[T]) {
    for (j, kv) in knots.iter().enumerate() {
        for k in 0..rows.ncols() {
            rows[(row, k)] += basis[(k, j)] * *kv;
        }
    }
}

/// Pull a gradient over field samples back onto the raw parameters.
///
/// `row_grads[(row, k)]` is ∂J/∂field, and the return value is ∂J/∂raw via
/// the (linear) spline map and the amplitude/phase chain rule.
pub fn chain_gradient<T: Real>(
    params: &WaveformParams<T>,
    system: &ControlSystem<T>,
    row_grads: &DMatrix<T>,
) -> DVector<T> {
    let layout = &params.layout;
    let mut grad = DVector::zeros(layout.n_vars());

    if layout.piecewise_constant {
        for sref in &layout.streams {
            let g = &system.groups[sref.group];
            let row = row_of_stream(layout, sref);
            for k in 0..layout.n_samples {
                grad[sref.offset + k] = g.amplitude_bound * row_grads[(row, k)];
            }
        }
        return grad;
    }

    for (gi, g) in system.groups.iter().enumerate() {
        let row0 = layout.group_rows[gi];
        let streams: Vec<&StreamRef> = layout.streams.iter().filter(|s| s.group == gi).collect();
        match g.kind() {
            ChannelKind::Amplitude => {
                let s = streams[0];
                if s.knots == 0 {
                    continue;
                }
                let basis = layout.basis(s.knots);
                for j in 0..s.knots {
                    let mut acc = T::zero();
                    for k in 0..layout.n_samples {
                        acc += basis[(k, j)] * row_grads[(row0, k)];
                    }
                    grad[s.offset + j] = g.amplitude_bound * acc;
                }
            }
            ChannelKind::PhaseQuadraturePair => {
                let phase_ref = streams
                    .iter()
                    .find(|s| s.role == StreamRole::Phase)
                    .expect("pair has phase stream");
                let amp_ref = streams.iter().find(|s| s.role == StreamRole::Amplitude);
                let nk = phase_ref.knots;
                if nk == 0 {
                    continue;
                }
                let basis = layout.basis(nk);
                let two_pi = fr::<T>(std::f64::consts::TAU);
                let mut theta = T::zero();
                let mut dtheta = vec![T::zero(); nk];
                for i in 0..nk {
                    theta += two_pi * params.raw[phase_ref.offset + i];
                    let amp = match amp_ref {
                        Some(a) => g.amplitude_bound * params.raw[a.offset + i],
                        None => g.amplitude_bound,
                    };
                    let (mut u, mut v) = (T::zero(), T::zero());
                    for k in 0..layout.n_samples {
                        u += basis[(k, i)] * row_grads[(row0, k)];
                        v += basis[(k, i)] * row_grads[(row0 + 1, k)];
                    }
                    let (sin_t, cos_t) = (theta.sin(), theta.cos());
                    if let Some(a) = amp_ref {
                        grad[a.offset + i] = g.amplitude_bound * (cos_t * u + sin_t * v);
                    }
                    dtheta[i] = amp * (cos_t * v - sin_t * u);
                }
                // θ_i depends on all phase knots up to i.
                let mut acc = T::zero();
                for i in (0..nk).rev() {
                    acc += dtheta[i];
                    grad[phase_ref.offset + i] = two_pi * acc;
                }
            }
        }
    }
    grad
}

/// Write a delimited text table: time column, one column per channel row.
pub fn write_fields<T: Real, W: Write>(w: &mut W, fields: &SampledFields<T>) -> io::Result<()> {
    write!(w, "time_s")?;
    for label in &fields.labels {
        write!(w, "\t{label}")?;
    }
    writeln!(w)?;
    for k in 0..fields.n_samples() {
        let t: f64 = nalgebra::try_convert(fields.time(k)).unwrap_or(f64::NAN);
        write!(w, "{t:.12e}")?;
        for r in 0..fields.n_rows() {
            let v: f64 = nalgebra::try_convert(fields.rows[(r, k)]).unwrap_or(f64::NAN);
            write!(w, "\t{v:.17e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a table produced by `write_fields`.
pub fn read_fields<T: Real, R: BufRead>(reader: R) -> Result<SampledFields<T>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty waveform table".into(),
        })?
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
    let labels: Vec<String> = header.split('\t').skip(1).map(str::to_owned).collect();
    let mut times: Vec<f64> = Vec::new();
    let mut data: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t').map(|c| {
            c.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: i + 2,
                message: format!("bad number `{c}`: {e}"),
            })
        });
        let t = cols.next().ok_or_else(|| Error::Parse {
            line: i + 2,
            message: "missing time column".into(),
        })??;
        times.push(t);
        let row: Vec<f64> = cols.collect::<Result<_>>()?;
        if row.len() != labels.len() {
            return Err(Error::Parse {
                line: i + 2,
                message: format!("expected {} channels, found {}", labels.len(), row.len()),
            });
        }
        data.push(row);
    }
    if times.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            message: "waveform table needs at least two samples".into(),
        });
    }
    let dt = times[1] - times[0];
    let rows = DMatrix::from_fn(labels.len(), times.len(), |r, k| fr(data[k][r]));
    Ok(SampledFields {
        dt: fr(dt),
        rows,
        labels,
    })
}
