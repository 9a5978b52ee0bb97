//! Optimal control of finite-dimensional spin systems.
//!
//! The crate builds physical control Hamiltonians for alkali-atom hyperfine
//! manifolds, decides controllability by Lie-algebra closure, optimizes
//! control waveforms for state preparation, synthesizes arbitrary unitary
//! and subspace maps out of state preparations, verifies control-landscape
//! topology numerically, and exports generalized spherical Wigner functions
//! for plotting.
//!
//! All numerics are generic over the real scalar type (`f64` in anger,
//! `f32` compiles and works at reduced tolerances); concrete aliases live at
//! the crate root.

pub mod bases;
pub mod cg;
pub mod controllability;
pub mod error;
pub mod half;
pub mod hamiltonians;
pub mod landscape;
pub mod linalg;
pub mod operator;
pub mod optimize;
pub mod propagation;
pub mod random;
pub mod scalar;
pub mod spin;
pub mod synth;
pub mod tensors;
pub mod waveform;
pub mod wigner;

pub use error::{Error, Result};
pub use half::Half;
pub use operator::{trace_inner_product, Flavor, Operator};
pub use scalar::{Real, C};
pub use spin::{angular_momentum_generators, Spin};
pub use tensors::TensorIndex;

/// Cap the global worker pool used for seed-level parallelism. Returns an
/// error if a pool was already initialized.
pub fn rayon_thread_cap(n: usize) -> std::result::Result<(), rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()
}

/// Concrete double-precision aliases.
pub type Operator64 = Operator<f64>;
pub type ControlSystem64 = hamiltonians::ControlSystem<f64>;
pub type SampledFields64 = waveform::SampledFields<f64>;
pub type WaveformParams64 = waveform::WaveformParams<f64>;

/// Single-precision aliases for quick, low-accuracy work.
pub type Operator32 = Operator<f32>;
pub type ControlSystem32 = hamiltonians::ControlSystem<f32>;
