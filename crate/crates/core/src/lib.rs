//! Two-particle path sums in the punctured plane.
//!
//! Paths of two particles that may not coincide are classified by how often
//! their relative coordinate winds around the origin. Lattice propagators are
//! split by that winding, weighted by a topological phase `e^{iθw}`, and
//! combined under the boson or fermion rule for distinguishable-particle
//! amplitudes. The [`exchange`] module follows a single designated exchange
//! path to its anyonic phase.

pub mod amplitudes;
pub mod cli;
pub mod config_space;
pub mod exchange;
pub mod homotopy;
pub mod permutation;
pub mod report;

pub use amplitudes::{
    action, anyonic_kernel, anyonic_weight, feynman_product, feynman_sum, noninteracting_alpha,
    operational_combine, path_amplitude, probability, resolved_kernel, walk_sum, Amplitude,
    CombineError, KernelError, KernelOptions, OpClass, PermutationAmplitudes, PhysicsParams,
    ResolvedKernel, StatisticsSpec,
};
pub use config_space::{
    count_walks, enumerate_walks, swap, validate_path, DiscretePath, EndpointPair, LatticeError,
    LatticeSpec, PathError, TwoParticleConfig, Vec2,
};
pub use exchange::{
    build_exchange_path, dephasing_exponent, exchange_phase, step_factors, theta_sweep, Direction,
    ExchangeError, ExchangeGeometry, FundamentalDomain, StepFactors,
};
pub use homotopy::{
    class_relative, classify, signed_angle, total_angle, EndpointKind, HomotopyClass,
    HomotopyError, TotalAngle,
};
pub use permutation::Permutation;
