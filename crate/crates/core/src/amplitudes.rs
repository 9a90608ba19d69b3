//! Path amplitudes, winding-resolved lattice propagators, topological
//! weighting and the operational rules for combining amplitudes.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_space::{
    DiscretePath, EndpointPair, LatticeError, LatticeSpec, TwoParticleConfig, WalkSearch,
};
use crate::homotopy::{class_from_angle, EndpointKind, HomotopyClass, HomotopyError};
use crate::permutation::{Permutation, PermutationError};

pub type Amplitude = Complex64;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: Amplitude,
    carry: Amplitude,
}

fn two_sum(acc: &mut f64, carry: &mut f64, x: f64) {
    let t = *acc + x;
    if acc.abs() >= x.abs() {
        *carry += (*acc - t) + x;
    } else {
        *carry += (x - t) + *acc;
    }
    *acc = t;
}

impl CompensatedSum {
    pub fn add(&mut self, z: Amplitude) {
        two_sum(&mut self.sum.re, &mut self.carry.re, z.re);
        two_sum(&mut self.sum.im, &mut self.carry.im, z.im);
    }

    pub fn value(&self) -> Amplitude {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub mass: f64,
    pub hbar: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        PhysicsParams {
            mass: 1.0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("InvalidParams: mass and hbar must be finite and positive (mass={mass}, hbar={hbar})")]
    NonPositive { mass: f64, hbar: f64 },
}

impl PhysicsParams {
    pub fn new(mass: f64, hbar: f64) -> Result<Self, ParamsError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(mass) && ok(hbar) {
            Ok(PhysicsParams { mass, hbar })
        } else {
            Err(ParamsError::NonPositive { mass, hbar })
        }
    }
}

/// Free kinetic action of one step of duration `dt` for both particles.
pub fn step_action(
    from: &TwoParticleConfig,
    to: &TwoParticleConfig,
    dt: f64,
    params: &PhysicsParams,
) -> f64 {
    let d1 = (to.p1 - from.p1).norm_sq();
    let d2 = (to.p2 - from.p2).norm_sq();
    params.mass * (d1 + d2) / (2.0 * dt)
}

/// Discretized free-particle action `Σ_k m(|Δp1|² + |Δp2|²) / (2 dt)`.
pub fn action(path: &DiscretePath, params: &PhysicsParams) -> f64 {
    path.configs()
        .windows(2)
        .map(|w| step_action(&w[0], &w[1], path.dt(), params))
        .sum()
}

/// `exp(i S / ħ)`.
pub fn path_amplitude(path: &DiscretePath, params: &PhysicsParams) -> Amplitude {
    Amplitude::cis(action(path, params) / params.hbar)
}

pub fn feynman_product(ab: Amplitude, bc: Amplitude) -> Amplitude {
    ab * bc
}

pub fn feynman_sum(abd: Amplitude, acd: Amplitude) -> Amplitude {
    abd + acd
}

pub fn probability(a: Amplitude) -> f64 {
    a.norm_sqr()
}

/// Topological weight `e^{iθw}` of a class with winding `w` turns.
pub fn anyonic_weight(class: HomotopyClass, theta: f64) -> Amplitude {
    Amplitude::cis(theta * class.winding())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpClass {
    Boson,
    Fermion,
}

impl OpClass {
    /// Sign attached to odd permutations.
    pub fn sign(&self) -> f64 {
        match self {
            OpClass::Boson => 1.0,
            OpClass::Fermion => -1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OpClass::Boson => "boson",
            OpClass::Fermion => "fermion",
        }
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OpClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boson" => Ok(OpClass::Boson),
            "fermion" => Ok(OpClass::Fermion),
            other => Err(format!("unknown operational class '{other}'")),
        }
    }
}

/// Topological angle `θ` (phase of one full counter-clockwise turn) together
/// with the operational combination rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticsSpec {
    pub theta: f64,
    pub op_class: OpClass,
}

impl StatisticsSpec {
    pub fn new(theta: f64, op_class: OpClass) -> Self {
        StatisticsSpec { theta, op_class }
    }

    /// θ reduced to `[0, 4π)`.
    pub fn canonical_theta(&self) -> f64 {
        let period = 4.0 * std::f64::consts::PI;
        let t = self.theta.rem_euclid(period);
        if t >= period {
            0.0
        } else {
            t
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelOptions {
    /// Maximum number of walks enumerated before giving up.
    pub budget: u64,
    /// Worker threads; results do not depend on this.
    pub workers: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            budget: DEFAULT_BUDGET,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("BudgetExceeded: {walks} walks exceed the budget of {budget}")]
    BudgetExceeded { walks: u128, budget: u64 },
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error("WorkerPool: {0}")]
    WorkerPool(String),
}

/// Partial propagators `K^w`, one per homotopy class reached by at least one walk.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedKernel {
    pub endpoints: EndpointPair,
    pub n_steps: usize,
    pub partials: BTreeMap<HomotopyClass, Amplitude>,
}

#[derive(Serialize, Deserialize)]
struct EndpointsRecord {
    start: TwoParticleConfig,
    end: TwoParticleConfig,
}

#[derive(Serialize, Deserialize)]
struct PartialRecord {
    kind: EndpointKind,
    winding: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelRecord {
    endpoints: EndpointsRecord,
    n_steps: usize,
    partials: Vec<PartialRecord>,
}

#[derive(Debug, Error)]
pub enum KernelParseError {
    #[error("ParseError: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ParseError: {0}")]
    Endpoints(#[from] LatticeError),
    #[error("ParseError: {0}")]
    Class(#[from] HomotopyError),
    #[error("ParseError: partial of kind {found} in a kernel with {expected} endpoints")]
    MixedKinds {
        expected: EndpointKind,
        found: EndpointKind,
    },
}

impl ResolvedKernel {
    pub fn kind(&self) -> Option<EndpointKind> {
        EndpointKind::of(&self.endpoints)
    }

    /// `Σ_w K^w`.
    pub fn total(&self) -> Amplitude {
        let mut acc = CompensatedSum::default();
        for z in self.partials.values() {
            acc.add(*z);
        }
        acc.value()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("kernel serialization is infallible")
    }

    fn record(&self) -> KernelRecord {
        KernelRecord {
            endpoints: EndpointsRecord {
                start: self.endpoints.start,
                end: self.endpoints.end,
            },
            n_steps: self.n_steps,
            partials: self
                .partials
                .iter()
                .map(|(class, z)| PartialRecord {
                    kind: class.kind(),
                    winding: class.winding(),
                    re: z.re,
                    im: z.im,
                })
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.record()).expect("kernel serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, KernelParseError> {
        let rec: KernelRecord = serde_json::from_str(text)?;
        let endpoints = EndpointPair::new(rec.endpoints.start, rec.endpoints.end)?;
        let expected = EndpointKind::of(&endpoints);
        let mut partials = BTreeMap::new();
        for p in rec.partials {
            let class = HomotopyClass::from_winding(p.winding)?;
            if class.kind() != p.kind || expected.is_some_and(|k| k != p.kind) {
                return Err(KernelParseError::MixedKinds {
                    expected: expected.unwrap_or(class.kind()),
                    found: p.kind,
                });
            }
            partials.insert(class, Amplitude::new(p.re, p.im));
        }
        Ok(ResolvedKernel {
            endpoints,
            n_steps: rec.n_steps,
            partials,
        })
    }
}

/// Result of one first-move partition of a lattice path sum.
#[derive(Default)]
struct PartialSums {
    by_class: BTreeMap<i64, CompensatedSum>,
    unclassified: CompensatedSum,
}

fn lattice_phase_scale(lattice: &LatticeSpec, params: &PhysicsParams) -> f64 {
    params.mass * lattice.spacing() * lattice.spacing() / (2.0 * lattice.dt() * params.hbar)
}

fn run_partitioned(
    lattice: &LatticeSpec,
    endpoints: &EndpointPair,
    n_steps: usize,
    params: &PhysicsParams,
    options: &KernelOptions,
    classify_as: Option<EndpointKind>,
) -> Result<PartialSums, KernelError> {
    let probe = WalkSearch::new(lattice, endpoints, n_steps)?;
    let walks = probe.count();
    if walks > u128::from(options.budget) {
        return Err(KernelError::BudgetExceeded {
            walks,
            budget: options.budget,
        });
    }
    let prefixes = probe.joint_move_count();
    let scale = lattice_phase_scale(lattice, params);

    let run_prefix = |j: usize| -> Result<PartialSums, KernelError> {
        let mut search =
            WalkSearch::new(lattice, endpoints, n_steps)?.restrict_first_move(j..j + 1);
        let mut out = PartialSums::default();
        while let Some(walk) = search.next_walk() {
            let amp = Amplitude::cis(scale * walk.sq_displacement() as f64);
            match classify_as {
                Some(kind) => {
                    let class = class_from_angle(kind, walk.total_angle())?;
                    out.by_class.entry(class.half_turns()).or_default().add(amp);
                }
                None => out.unclassified.add(amp),
            }
        }
        Ok(out)
    };

    let parts: Vec<Result<PartialSums, KernelError>> = if options.workers <= 1 {
        (0..prefixes).map(run_prefix).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.workers)
            .build()
            .map_err(|e| KernelError::WorkerPool(e.to_string()))?;
        pool.install(|| (0..prefixes).into_par_iter().map(run_prefix).collect())
    };

    // merge in prefix order so the result is independent of scheduling
    let mut merged = PartialSums::default();
    for part in parts {
        let part = part?;
        for (k, s) in part.by_class {
            merged.by_class.entry(k).or_default().add(s.value());
        }
        merged.unclassified.add(part.unclassified.value());
    }
    Ok(merged)
}

/// Brute-force propagator split by homotopy class. Endpoints must be closed
/// or exchanged so that every walk falls into a class of one kind.
pub fn resolved_kernel(
    lattice: &LatticeSpec,
    endpoints: &EndpointPair,
    n_steps: usize,
    params: &PhysicsParams,
    options: &KernelOptions,
) -> Result<ResolvedKernel, KernelError> {
    let kind = EndpointKind::of(endpoints).ok_or(HomotopyError::EndpointsNotClosedOrExchanged)?;
    let sums = run_partitioned(lattice, endpoints, n_steps, params, options, Some(kind))?;
    let partials = sums
        .by_class
        .into_iter()
        .map(|(half_turns, s)| {
            let class = HomotopyClass::new(kind, half_turns).expect("parity checked on rounding");
            (class, s.value())
        })
        .collect();
    Ok(ResolvedKernel {
        endpoints: *endpoints,
        n_steps,
        partials,
    })
}

/// Unrestricted coincidence-excluded walk sum, without classification.
/// Works for arbitrary lattice endpoints.
pub fn walk_sum(
    lattice: &LatticeSpec,
    endpoints: &EndpointPair,
    n_steps: usize,
    params: &PhysicsParams,
    options: &KernelOptions,
) -> Result<Amplitude, KernelError> {
    Ok(
        run_partitioned(lattice, endpoints, n_steps, params, options, None)?
            .unclassified
            .value(),
    )
}

/// `Σ_w e^{iθw} K^w`.
pub fn anyonic_kernel(resolved: &ResolvedKernel, theta: f64) -> Amplitude {
    let mut acc = CompensatedSum::default();
    for (class, z) in &resolved.partials {
        acc.add(anyonic_weight(*class, theta) * z);
    }
    acc.value()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CombineError {
    #[error("IncompleteMap: no amplitude for permutation {0}")]
    IncompleteMap(Permutation),
    #[error("NonSquare: row {row} has {len} entries, expected {n}")]
    NonSquare { row: usize, len: usize, n: usize },
    #[error("WrongSize: permutation {perm} does not act on {n} points")]
    WrongSize { perm: Permutation, n: usize },
    #[error(transparent)]
    Permutation(#[from] PermutationError),
}

/// Amplitudes `α_σ` for the transition of `n` distinguishable particles into
/// the `σ`-permuted final state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PermutationAmplitudes {
    n: usize,
    alpha: BTreeMap<Permutation, Amplitude>,
}

impl PermutationAmplitudes {
    pub fn new(n: usize) -> Self {
        PermutationAmplitudes {
            n,
            alpha: BTreeMap::new(),
        }
    }

    /// Two particles: `α_id` for the direct and `α_(12)` for the opposite transition.
    pub fn two_particle(direct: Amplitude, opposite: Amplitude) -> Self {
        let mut out = Self::new(2);
        out.alpha.insert(Permutation::identity(2), direct);
        out.alpha
            .insert(Permutation::transposition(2, 0, 1), opposite);
        out
    }

    pub fn insert(&mut self, perm: Permutation, alpha: Amplitude) -> Result<(), CombineError> {
        if perm.len() != self.n {
            return Err(CombineError::WrongSize { perm, n: self.n });
        }
        self.alpha.insert(perm, alpha);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, perm: &Permutation) -> Option<Amplitude> {
        self.alpha.get(perm).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &Amplitude)> {
        self.alpha.iter()
    }

    /// Relabels every permutation as `σ ∘ τ`.
    pub fn precompose(&self, tau: &Permutation) -> Result<Self, CombineError> {
        let mut out = Self::new(self.n);
        for (sigma, a) in &self.alpha {
            out.insert(sigma.compose(tau), *a)?;
        }
        Ok(out)
    }
}

/// `Σ_σ α_σ` for bosons, `Σ_σ sgn(σ) α_σ` for fermions, summed in lexicographic order.
pub fn operational_combine(
    perms: &PermutationAmplitudes,
    op_class: OpClass,
) -> Result<Amplitude, CombineError> {
    let mut acc = CompensatedSum::default();
    for sigma in Permutation::all(perms.n)? {
        let alpha = perms
            .get(&sigma)
            .ok_or_else(|| CombineError::IncompleteMap(sigma.clone()))?;
        let sign = match op_class {
            OpClass::Boson => 1.0,
            OpClass::Fermion => f64::from(sigma.sign()),
        };
        acc.add(alpha * sign);
    }
    Ok(acc.value())
}

/// `α_σ = Π_j M[j][σ(j)]` for independent particles with single-particle
/// amplitudes `M[j][k]` from start `j` to end `k`.
pub fn noninteracting_alpha(
    single_kernel: &[Vec<Amplitude>],
) -> Result<PermutationAmplitudes, CombineError> {
    let n = single_kernel.len();
    for (row, entries) in single_kernel.iter().enumerate() {
        if entries.len() != n {
            return Err(CombineError::NonSquare {
                row,
                len: entries.len(),
                n,
            });
        }
    }
    let mut out = PermutationAmplitudes::new(n);
    for sigma in Permutation::all(n)? {
        let alpha = (0..n)
            .map(|j| single_kernel[j][sigma.apply(j)])
            .fold(Amplitude::new(1.0, 0.0), |acc, z| acc * z);
        out.alpha.insert(sigma, alpha);
    }
    Ok(out)
}
