//! The physical control systems: rotating-frame microwave/rf control of the
//! full 16-dimensional alkali ground manifold, the quasi-static field plus
//! light-shift system on a single manifold, and the 8-dimensional restricted
//! system with a fiducial-state phase primitive.
//!
//! All Hamiltonian entries are angular frequencies (rad/s). Basis ordering is
//! always descending-m within a manifold, upper (F₊) manifold first.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operator::{block_diag, Operator};
use crate::scalar::{fr, Real, C};
use crate::spin::{angular_momentum_generators, Spin};

/// How a channel group maps raw optimization variables to field samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// One knot stream; field = bound × spline(knots).
    Amplitude,
    /// In-phase/quadrature pair driven by a phase knot stream (cumulative),
    /// optionally with its own amplitude stream.
    PhaseQuadraturePair,
}

/// A physical control channel: one field row (amplitude) or two (pair).
#[derive(Debug, Clone)]
pub struct ChannelGroup<T: Real> {
    pub label: String,
    /// One operator for `Amplitude`, two (in-phase, quadrature) for pairs.
    pub ops: Vec<Operator<T>>,
    /// Peak angular frequency the hardware can apply (rad/s).
    pub amplitude_bound: T,
    /// Minimum interval over which the field can change (s); sets knot count.
    pub slew_time: T,
    /// Pairs only: whether the amplitude has its own knot stream.
    pub amp_controlled: bool,
}

impl<T: Real> ChannelGroup<T> {
    pub fn kind(&self) -> ChannelKind {
        if self.ops.len() == 1 {
            ChannelKind::Amplitude
        } else {
            ChannelKind::PhaseQuadraturePair
        }
    }

    pub fn n_rows(&self) -> usize {
        self.ops.len()
    }
}

/// Drift operator plus control channels.
#[derive(Debug, Clone)]
pub struct ControlSystem<T: Real> {
    pub dim: usize,
    pub drift: Operator<T>,
    pub groups: Vec<ChannelGroup<T>>,
    /// Projector |0⟩⟨0| onto the fiducial state, when the system has one.
    pub phase_primitive: Option<Operator<T>>,
    /// Strength of the phase-primitive Hamiltonian (rad/s).
    pub phase_primitive_strength: T,
}

impl<T: Real> ControlSystem<T> {
    /// Total number of field sample rows across all groups.
    pub fn n_rows(&self) -> usize {
        self.groups.iter().map(|g| g.n_rows()).sum()
    }

    /// Channel operators in row order.
    pub fn row_ops(&self) -> Vec<&Operator<T>> {
        self.groups.iter().flat_map(|g| g.ops.iter()).collect()
    }

    /// Row labels ("rf_x_i", "rf_x_q", ...).
    pub fn row_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for g in &self.groups {
            match g.kind() {
                ChannelKind::Amplitude => out.push(g.label.clone()),
                ChannelKind::PhaseQuadraturePair => {
                    out.push(format!("{}_i", g.label));
                    out.push(format!("{}_q", g.label));
                }
            }
        }
        out
    }

    /// Flat per-row channel view: (label, operator, bound, slew, kind).
    pub fn channels(&self) -> Vec<(String, &Operator<T>, T, T, ChannelKind)> {
        let labels = self.row_labels();
        let mut out = Vec::new();
        let mut row = 0;
        for g in &self.groups {
            for op in &g.ops {
                out.push((
                    labels[row].clone(),
                    op,
                    g.amplitude_bound,
                    g.slew_time,
                    g.kind(),
                ));
                row += 1;
            }
        }
        out
    }

    pub fn has_drift(&self) -> bool {
        self.drift.max_abs() > T::default_epsilon()
    }
}

/// The nine microwave/rf control configurations.
///
/// Naming: `2rf{ap|a|p}{2|1}struw{ap|a|p|0}` — two rf coils with
/// amplitude+phase / amplitude-only / phase-only control, one or two
/// stretched-transition microwaves with the same control split, or a
/// constant microwave folded into the drift (`uw0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigId {
    RfAp2Mw2Ap,
    RfA2Mw2A,
    RfP2Mw2P,
    RfAp2Mw1Ap,
    RfA2Mw1A,
    RfP2Mw1P,
    RfAp2Mw0,
    RfA2Mw0,
    RfP2Mw0,
}

impl ConfigId {
    pub const ALL: [ConfigId; 9] = [
        ConfigId::RfAp2Mw2Ap,
        ConfigId::RfA2Mw2A,
        ConfigId::RfP2Mw2P,
        ConfigId::RfAp2Mw1Ap,
        ConfigId::RfA2Mw1A,
        ConfigId::RfP2Mw1P,
        ConfigId::RfAp2Mw0,
        ConfigId::RfA2Mw0,
        ConfigId::RfP2Mw0,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConfigId::RfAp2Mw2Ap => "2rfap2struwap",
            ConfigId::RfA2Mw2A => "2rfa2struwa",
            ConfigId::RfP2Mw2P => "2rfp2struwp",
            ConfigId::RfAp2Mw1Ap => "2rfap1struwap",
            ConfigId::RfA2Mw1A => "2rfa1struwa",
            ConfigId::RfP2Mw1P => "2rfp1struwp",
            ConfigId::RfAp2Mw0 => "2rfap1struw0",
            ConfigId::RfA2Mw0 => "2rfa1struw0",
            ConfigId::RfP2Mw0 => "2rfp1struw0",
        }
    }

    fn rf_amp_controlled(&self) -> bool {
        matches!(
            self,
            ConfigId::RfAp2Mw2Ap | ConfigId::RfAp2Mw1Ap | ConfigId::RfAp2Mw0
        )
    }

    fn rf_phase_controlled(&self) -> bool {
        !matches!(self, ConfigId::RfA2Mw2A | ConfigId::RfA2Mw1A | ConfigId::RfA2Mw0)
    }

    fn mw_amp_controlled(&self) -> bool {
        matches!(self, ConfigId::RfAp2Mw2Ap | ConfigId::RfAp2Mw1Ap)
    }

    fn mw_phase_controlled(&self) -> bool {
        matches!(
            self,
            ConfigId::RfAp2Mw2Ap | ConfigId::RfP2Mw2P | ConfigId::RfAp2Mw1Ap | ConfigId::RfP2Mw1P
        )
    }

    fn mw_constant(&self) -> bool {
        matches!(self, ConfigId::RfAp2Mw0 | ConfigId::RfA2Mw0 | ConfigId::RfP2Mw0)
    }

    /// Microwave transitions as physical (m₋, m₊) pairs.
    fn transitions(&self) -> Vec<(i64, i64)> {
        match self {
            ConfigId::RfAp2Mw2Ap | ConfigId::RfA2Mw2A | ConfigId::RfP2Mw2P => {
                vec![(3, 4), (-3, -4)]
            }
            _ => vec![(-3, -4)],
        }
    }
}

impl FromStr for ConfigId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConfigId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = ConfigId::ALL.iter().map(|c| c.as_str()).collect();
                Error::argument(format!(
                    "unknown config_id `{s}`; valid ids: {}",
                    valid.join(", ")
                ))
            })
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of the microwave/rf control system.
#[derive(Debug, Clone)]
pub struct MwRfConfig<T: Real> {
    pub config_id: ConfigId,
    /// rf Larmor frequency Ω_rf (rad/s).
    pub rf_amp: T,
    /// Microwave Rabi frequency Ω_μw (rad/s).
    pub mw_amp: T,
    /// rf slew time τ_rf (s).
    pub rf_slew: T,
    /// Microwave slew time τ_μw (s).
    pub mw_slew: T,
    /// rf detuning Δ_rf (rad/s).
    pub rf_detuning: T,
    /// Microwave detuning Δ_μw (rad/s).
    pub mw_detuning: T,
    /// Lower-manifold g-factor ratio g₋/|g₊|.
    pub g_ratio: T,
}

impl<T: Real> MwRfConfig<T> {
    pub fn new(config_id: ConfigId) -> Self {
        MwRfConfig {
            config_id,
            rf_amp: fr(TAU * 15e3),
            mw_amp: fr(TAU * 40e3),
            rf_slew: fr(10e-6),
            mw_slew: fr(1e-6),
            rf_detuning: T::zero(),
            mw_detuning: T::zero(),
            g_ratio: fr(-1.00321),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rf_amp <= T::zero() || self.mw_amp <= T::zero() {
            return Err(Error::argument("field amplitudes must be positive"));
        }
        if self.rf_slew <= T::zero() || self.mw_slew <= T::zero() {
            return Err(Error::argument("slew times must be positive"));
        }
        Ok(())
    }
}

const F_UP: u64 = 8; // 2F₊, F₊ = 4
const F_DOWN: u64 = 6; // 2F₋, F₋ = 3

type MatrixPair<T> = (DMatrix<C<T>>, DMatrix<C<T>>);

/// Microwave σ_x/2 and σ_y/2 for the transition |F₋,m₋⟩ ↔ |F₊,m₊⟩ on the
/// 16-dimensional space; matrix elements are exactly 1/2.
fn mw_pair<T: Real>(m_minus: i64, m_plus: i64) -> Result<MatrixPair<T>> {
    let up = Spin::from_two_j(F_UP);
    let down = Spin::from_two_j(F_DOWN);
    let row = up.index_of(crate::half::Half::int(m_plus))?;
    let col = up.dim() + down.index_of(crate::half::Half::int(m_minus))?;
    let d = up.dim() + down.dim();
    let mut sx: DMatrix<C<T>> = DMatrix::zeros(d, d);
    let half = fr::<T>(0.5);
    sx[(row, col)] = Complex::new(half, T::zero());
    sx[(col, row)] = Complex::new(half, T::zero());
    let mut sy: DMatrix<C<T>> = DMatrix::zeros(d, d);
    sy[(row, col)] = Complex::new(T::zero(), -half);
    sy[(col, row)] = Complex::new(T::zero(), half);
    Ok((sx, sy))
}

/// Construct the 16-dimensional microwave/rf rotating-frame control system
/// for the given configuration.
pub fn mwrf_system<T: Real>(cfg: &MwRfConfig<T>) -> Result<ControlSystem<T>> {
    cfg.validate()?;
    let up = Spin::from_two_j(F_UP);
    let down = Spin::from_two_j(F_DOWN);
    let d = up.dim() + down.dim();
    let gen_up = angular_momentum_generators::<T>(up);
    let gen_down = angular_momentum_generators::<T>(down);
    let g = Complex::new(cfg.g_ratio, T::zero());

    let jx_mix = |sign: T| {
        block_diag(
            gen_up.jx.matrix(),
            &(gen_down.jx.matrix() * (g * Complex::new(sign, T::zero()))),
        )
    };
    let jy_mix = |sign: T| {
        block_diag(
            gen_up.jy.matrix(),
            &(gen_down.jy.matrix() * (g * Complex::new(sign, T::zero()))),
        )
    };

    let mut groups: Vec<ChannelGroup<T>> = Vec::new();
    let id = cfg.config_id;
    if id.rf_phase_controlled() {
        // Quadrature layout mirrors the reference construction: x-coil
        // (Fx-type, Fy-type), y-coil (Fy-type, Fx-type), with the quadrature
        // member carrying the opposite g sign on F₋.
        groups.push(ChannelGroup {
            label: "rf_x".into(),
            ops: vec![
                Operator::hermitian(jx_mix(T::one()))?,
                Operator::hermitian(jy_mix(-T::one()))?,
            ],
            amplitude_bound: cfg.rf_amp,
            slew_time: cfg.rf_slew,
            amp_controlled: id.rf_amp_controlled(),
        });
        groups.push(ChannelGroup {
            label: "rf_y".into(),
            ops: vec![
                Operator::hermitian(jy_mix(T::one()))?,
                Operator::hermitian(jx_mix(-T::one()))?,
            ],
            amplitude_bound: cfg.rf_amp,
            slew_time: cfg.rf_slew,
            amp_controlled: id.rf_amp_controlled(),
        });
    } else {
        groups.push(ChannelGroup {
            label: "rf_x".into(),
            ops: vec![Operator::hermitian(jx_mix(T::one()))?],
            amplitude_bound: cfg.rf_amp,
            slew_time: cfg.rf_slew,
            amp_controlled: true,
        });
        groups.push(ChannelGroup {
            label: "rf_y".into(),
            ops: vec![Operator::hermitian(jy_mix(T::one()))?],
            amplitude_bound: cfg.rf_amp,
            slew_time: cfg.rf_slew,
            amp_controlled: true,
        });
    }

    let mut drift = drift_matrix(cfg, &gen_up, &gen_down);
    if id.mw_constant() {
        let (sx, _) = mw_pair::<T>(-3, -4)?;
        drift += sx * Complex::new(cfg.mw_amp, T::zero());
    } else {
        for (i, (m_minus, m_plus)) in id.transitions().into_iter().enumerate() {
            let (sx, sy) = mw_pair::<T>(m_minus, m_plus)?;
            let label = format!("mw_{}", i + 1);
            if id.mw_phase_controlled() {
                groups.push(ChannelGroup {
                    label,
                    ops: vec![Operator::hermitian(sx)?, Operator::hermitian(sy)?],
                    amplitude_bound: cfg.mw_amp,
                    slew_time: cfg.mw_slew,
                    amp_controlled: id.mw_amp_controlled(),
                });
            } else {
                groups.push(ChannelGroup {
                    label,
                    ops: vec![Operator::hermitian(sx)?],
                    amplitude_bound: cfg.mw_amp,
                    slew_time: cfg.mw_slew,
                    amp_controlled: true,
                });
            }
        }
    }

    Ok(ControlSystem {
        dim: d,
        drift: Operator::hermitian(drift)?,
        groups,
        phase_primitive: None,
        phase_primitive_strength: T::zero(),
    })
}

/// Static rotating-frame Hamiltonian (Δ_μw/2)(P₊-P₋) + Δ_rf(Fz⁺-Fz⁻).
fn drift_matrix<T: Real>(
    cfg: &MwRfConfig<T>,
    gen_up: &crate::spin::AngularMomentum<T>,
    gen_down: &crate::spin::AngularMomentum<T>,
) -> DMatrix<C<T>> {
    let up_dim = gen_up.jz.dim();
    let down_dim = gen_down.jz.dim();
    let half_mw = Complex::new(cfg.mw_detuning * fr::<T>(0.5), T::zero());
    let rf = Complex::new(cfg.rf_detuning, T::zero());
    let p_up: DMatrix<C<T>> = DMatrix::identity(up_dim, up_dim) * half_mw;
    let p_down: DMatrix<C<T>> = DMatrix::identity(down_dim, down_dim) * (-half_mw);
    let fz_up = gen_up.jz.matrix() * rf;
    let fz_down = gen_down.jz.matrix() * (-rf);
    block_diag(&(p_up + fz_up), &(p_down + fz_down))
}

/// The idealized six-operator generator set {Fx⁺, Fy⁺, Fx⁻, Fy⁻, σ_x, σ_y}
/// on the 16-dimensional space, with the microwave on the (3,3)↔(4,4)
/// stretched transition.
pub fn six_operator_set<T: Real>() -> Vec<Operator<T>> {
    let up = Spin::from_two_j(F_UP);
    let down = Spin::from_two_j(F_DOWN);
    let gen_up = angular_momentum_generators::<T>(up);
    let gen_down = angular_momentum_generators::<T>(down);
    let zero_up: DMatrix<C<T>> = DMatrix::zeros(up.dim(), up.dim());
    let zero_down: DMatrix<C<T>> = DMatrix::zeros(down.dim(), down.dim());
    let (sx, sy) = mw_pair::<T>(3, 4).expect("stretched transition");
    vec![
        Operator::hermitian(block_diag(gen_up.jx.matrix(), &zero_down)).unwrap(),
        Operator::hermitian(block_diag(gen_up.jy.matrix(), &zero_down)).unwrap(),
        Operator::hermitian(block_diag(&zero_up, gen_down.jx.matrix())).unwrap(),
        Operator::hermitian(block_diag(&zero_up, gen_down.jy.matrix())).unwrap(),
        Operator::hermitian(sx).unwrap(),
        Operator::hermitian(sy).unwrap(),
    ]
}

/// Parameters of the quasi-static field + light-shift system on one manifold.
#[derive(Debug, Clone)]
pub struct LightShiftConfig<T: Real> {
    pub spin: Spin,
    /// Nonlinear strength βγ_s (rad/s).
    pub nonlinearity: T,
    /// Peak Larmor frequency Ω (rad/s).
    pub larmor_bound: T,
    /// Field update interval (s); sets the waveform knot count.
    pub slew_time: T,
    /// When set, the only control is the field angle φ(t) at fixed |B|.
    pub constrained_angle_mode: bool,
}

impl<T: Real> Default for LightShiftConfig<T> {
    fn default() -> Self {
        LightShiftConfig {
            spin: Spin::from_two_j(6),
            nonlinearity: fr(TAU * 0.5e3),
            larmor_bound: fr(TAU * 15e3),
            slew_time: fr(10e-6),
            constrained_angle_mode: false,
        }
    }
}

/// H = βγ_s Fx² + Ω_x(t) Fx + Ω_y(t) Fy on a single spin manifold.
pub fn light_shift_system<T: Real>(cfg: &LightShiftConfig<T>) -> ControlSystem<T> {
    let gen = angular_momentum_generators::<T>(cfg.spin);
    let fx2 = gen.jx.matrix() * gen.jx.matrix();
    let drift = Operator::hermitian(fx2 * Complex::new(cfg.nonlinearity, T::zero()))
        .expect("Fx² is hermitian");
    let groups = if cfg.constrained_angle_mode {
        vec![ChannelGroup {
            label: "b_angle".into(),
            ops: vec![gen.jx.clone(), gen.jy.clone()],
            amplitude_bound: cfg.larmor_bound,
            slew_time: cfg.slew_time,
            amp_controlled: false,
        }]
    } else {
        vec![
            ChannelGroup {
                label: "b_x".into(),
                ops: vec![gen.jx.clone()],
                amplitude_bound: cfg.larmor_bound,
                slew_time: cfg.slew_time,
                amp_controlled: true,
            },
            ChannelGroup {
                label: "b_y".into(),
                ops: vec![gen.jy.clone()],
                amplitude_bound: cfg.larmor_bound,
                slew_time: cfg.slew_time,
                amp_controlled: true,
            },
        ]
    };
    ControlSystem {
        dim: cfg.spin.dim(),
        drift,
        groups,
        phase_primitive: None,
        phase_primitive_strength: T::zero(),
    }
}

/// Tunable parameters of the restricted phase system.
#[derive(Debug, Clone)]
pub struct RestrictedPhaseConfig<T: Real> {
    pub rf_amp: T,
    pub mw_amp: T,
    pub rf_slew: T,
    pub mw_slew: T,
    /// Light-shift strength on the fiducial state (rad/s).
    pub primitive_strength: T,
}

impl<T: Real> Default for RestrictedPhaseConfig<T> {
    fn default() -> Self {
        RestrictedPhaseConfig {
            rf_amp: fr(TAU * 15e3),
            mw_amp: fr(TAU * 40e3),
            rf_slew: fr(10e-6),
            mw_slew: fr(1e-6),
            primitive_strength: fr(TAU * 10e3),
        }
    }
}

/// The 8-dimensional restricted system: the F=3 manifold plus one auxiliary
/// stretched state |4,±4⟩ which carries the phase primitive. Basis order:
/// index 0 is the auxiliary (fiducial) state, 1..=7 are |3,3⟩..|3,-3⟩.
pub fn restricted_phase_system<T: Real>(aux_m: i64) -> Result<ControlSystem<T>> {
    restricted_phase_system_with(aux_m, &RestrictedPhaseConfig::default())
}

pub fn restricted_phase_system_with<T: Real>(
    aux_m: i64,
    cfg: &RestrictedPhaseConfig<T>,
) -> Result<ControlSystem<T>> {
    if aux_m != 4 && aux_m != -4 {
        return Err(Error::argument(format!(
            "auxiliary state must be |4,±4⟩, got m = {aux_m}"
        )));
    }
    let down = Spin::from_two_j(F_DOWN);
    let d = down.dim() + 1;
    let gen = angular_momentum_generators::<T>(down);

    let embed = |op: &DMatrix<C<T>>| -> DMatrix<C<T>> { crate::operator::embed_block(d, 1, 1, op) };

    let half = fr::<T>(0.5);
    // The microwave couples the fiducial state to the adjacent stretched
    // state |3, sign(aux_m)·3⟩.
    let m_minus = if aux_m > 0 { 3 } else { -3 };
    let col = 1 + down.index_of(crate::half::Half::int(m_minus))?;
    let mut sx: DMatrix<C<T>> = DMatrix::zeros(d, d);
    sx[(0, col)] = Complex::new(half, T::zero());
    sx[(col, 0)] = Complex::new(half, T::zero());
    let mut sy: DMatrix<C<T>> = DMatrix::zeros(d, d);
    sy[(0, col)] = Complex::new(T::zero(), -half);
    sy[(col, 0)] = Complex::new(T::zero(), half);

    let groups = vec![
        ChannelGroup {
            label: "rf_x".into(),
            ops: vec![
                Operator::hermitian(embed(gen.jx.matrix()))?,
                Operator::hermitian(embed(gen.jy.matrix()))?,
            ],
            amplitude_bound: cfg.rf_amp,
            slew_time: cfg.rf_slew,
            amp_controlled: true,
        },
        ChannelGroup {
            label: "rf_y".into(),
            ops: vec![
                Operator::hermitian(embed(gen.jy.matrix()))?,
                Operator::hermitian(embed(gen.jx.matrix()))?,
            ],
            amplitude_bound: cfg.rf_amp,
            slew_time: cfg.rf_slew,
            amp_controlled: true,
        },
        ChannelGroup {
            label: "mw".into(),
            ops: vec![Operator::hermitian(sx)?, Operator::hermitian(sy)?],
            amplitude_bound: cfg.mw_amp,
            slew_time: cfg.mw_slew,
            amp_controlled: true,
        },
    ];

    let mut prim: DMatrix<C<T>> = DMatrix::zeros(d, d);
    prim[(0, 0)] = Complex::new(T::one(), T::zero());

    Ok(ControlSystem {
        dim: d,
        drift: Operator::zeros(d),
        groups,
        phase_primitive: Some(Operator::hermitian(prim)?),
        phase_primitive_strength: cfg.primitive_strength,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllability::{default_closure_tol, is_controllable, lie_closure};
    use crate::operator::max_abs;
    use nalgebra::ComplexField;

    #[test]
    fn config_roundtrip_and_unknown() {
        for id in ConfigId::ALL {
            assert_eq!(id.as_str().parse::<ConfigId>().unwrap(), id);
        }
        let err = "3rfzz".parse::<ConfigId>().unwrap_err();
        assert!(err.to_string().contains("2rfap2struwap"));
    }

    #[test]
    fn baseline_config_has_eight_rows_and_zero_drift() {
        let cfg = MwRfConfig::<f64>::new(ConfigId::RfAp2Mw2Ap);
        let sys = mwrf_system(&cfg).unwrap();
        assert_eq!(sys.dim, 16);
        assert_eq!(sys.n_rows(), 8);
        assert!(!sys.has_drift());
    }

    #[test]
    fn mw_coupling_is_half_on_stretched_pair() {
        let cfg = MwRfConfig::<f64>::new(ConfigId::RfAp2Mw2Ap);
        let sys = mwrf_system(&cfg).unwrap();
        // rows: rf_x_i, rf_x_q, rf_y_i, rf_y_q, mw_1_i, mw_1_q, mw_2_i, mw_2_q
        let sx = sys.row_ops()[4].matrix().clone();
        let mut nonzero = 0;
        for i in 0..16 {
            for j in 0..16 {
                if sx[(i, j)].modulus() > 0.0 {
                    nonzero += 1;
                    assert!((sx[(i, j)].re - 0.5).abs() < 1e-15);
                }
            }
        }
        assert_eq!(nonzero, 2);
        // (3,3) ↔ (4,4): |4,4⟩ is row 0, |3,3⟩ is row 9
        assert!((sx[(0, 9)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rf_channel_restricted_to_upper_manifold_is_fx() {
        let cfg = MwRfConfig::<f64>::new(ConfigId::RfAp2Mw2Ap);
        let sys = mwrf_system(&cfg).unwrap();
        let fx_up = angular_momentum_generators::<f64>(Spin::from_two_j(8)).jx;
        let upper = sys.row_ops()[0].matrix().view((0, 0), (9, 9)).into_owned();
        assert!(max_abs(&(upper - fx_up.matrix())) < 1e-15);
    }

    #[test]
    fn detuning_builds_drift() {
        let mut cfg = MwRfConfig::<f64>::new(ConfigId::RfAp2Mw2Ap);
        assert!(!mwrf_system(&cfg).unwrap().has_drift());
        cfg.mw_detuning = 1.0e3;
        cfg.rf_detuning = 2.0e3;
        let sys = mwrf_system(&cfg).unwrap();
        let drift = sys.drift.matrix();
        // (Δ_μw/2) + Δ_rf·m on |4,4⟩
        assert!((drift[(0, 0)].re - (0.5e3 + 2.0e3 * 4.0)).abs() < 1e-9);
        // -(Δ_μw/2) - Δ_rf·m on |3,3⟩
        assert!((drift[(9, 9)].re - (-0.5e3 - 2.0e3 * 3.0)).abs() < 1e-9);
    }

    #[test]
    fn constant_mw_config_folds_into_drift() {
        let cfg = MwRfConfig::<f64>::new(ConfigId::RfAp2Mw0);
        let sys = mwrf_system(&cfg).unwrap();
        assert_eq!(sys.n_rows(), 4);
        assert!(sys.has_drift());
        let drift = sys.drift.matrix();
        // constant σx/2 coupling on |4,-4⟩ (row 8) ↔ |3,-3⟩ (row 15)
        assert!((drift[(8, 15)].re - cfg.mw_amp / 2.0).abs() < 1e-9);
    }

    #[test]
    fn channel_spectral_radii() {
        for id in ConfigId::ALL {
            let cfg = MwRfConfig::<f64>::new(id);
            let sys = mwrf_system(&cfg).unwrap();
            for (label, op, _, _, _) in sys.channels() {
                let (vals, _) = crate::linalg::eigh(op.matrix());
                let rho = vals[0].abs().max(vals[vals.len() - 1].abs());
                if label.starts_with("rf") {
                    assert!(rho <= 4.0 + 1e-12, "{id} {label}: {rho}");
                } else {
                    assert!(rho <= 0.5 + 1e-12, "{id} {label}: {rho}");
                }
            }
        }
    }

    #[test]
    fn phase_only_two_transition_channels_span_su16() {
        let cfg = MwRfConfig::<f64>::new(ConfigId::RfP2Mw2P);
        let sys = mwrf_system(&cfg).unwrap();
        let gens: Vec<Operator<f64>> = sys.groups.iter().flat_map(|g| g.ops.clone()).collect();
        let closure = lie_closure(&gens, default_closure_tol()).unwrap();
        assert_eq!(closure.dimension, 255);
        assert!(closure.stable);
    }

    #[test]
    fn light_shift_system_is_controllable() {
        let cfg = LightShiftConfig::<f64>::default();
        let sys = light_shift_system(&cfg);
        assert_eq!(sys.dim, 7);
        let mut gens: Vec<Operator<f64>> = sys.groups.iter().flat_map(|g| g.ops.clone()).collect();
        gens.push(sys.drift.clone());
        assert!(is_controllable(&gens).unwrap());
    }

    #[test]
    fn restricted_system_is_controllable_and_driftfree() {
        for aux in [4i64, -4] {
            let sys = restricted_phase_system::<f64>(aux).unwrap();
            assert_eq!(sys.dim, 8);
            assert!(!sys.has_drift());
            let prim = sys.phase_primitive.as_ref().unwrap();
            // rank-1 projector
            assert!((prim.trace().re - 1.0).abs() < 1e-14);
            assert!(max_abs(&(prim.matrix() * prim.matrix() - prim.matrix())) < 1e-14);
            let gens: Vec<Operator<f64>> =
                sys.groups.iter().flat_map(|g| g.ops.clone()).collect();
            let closure = lie_closure(&gens, default_closure_tol()).unwrap();
            assert_eq!(closure.dimension, 63);
        }
        assert!(restricted_phase_system::<f64>(3).is_err());
    }
}
