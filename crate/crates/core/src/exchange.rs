//! The designated exchange path of two identical particles and its
//! operational step product.
//!
//! Each step of a finely discretized exchange carries a direct transition
//! (the path continues) and an opposite one (the particles swap places within
//! one step). The opposite action grows like `m D² / dt`, so terms built from
//! it dephase as `dt → 0`, leaving the product of direct steps. Choosing a
//! fundamental domain fixes which transition is "direct"; the exchange
//! crosses its boundary once, where the roles switch and the operational sign
//! enters exactly once.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::amplitudes::{
    anyonic_kernel, anyonic_weight, path_amplitude, step_action, Amplitude, OpClass, PhysicsParams,
    ResolvedKernel, StatisticsSpec,
};
use crate::config_space::{swap, DiscretePath, PathError, TwoParticleConfig, Vec2};
use crate::homotopy::{classify, EndpointKind, HomotopyClass, HomotopyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Ccw,
    Cw,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExchangeError {
    #[error("InvalidGeometry: {0}")]
    InvalidGeometry(String),
    #[error("DegenerateGrid: {0}")]
    DegenerateGrid(String),
    #[error("NotExchangeKernel: kernel endpoints are not label-swapped")]
    NotExchangeKernel,
    #[error("NoDominantClass: no class outweighs the sum of all others")]
    NoDominantClass,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

/// Two particles on antipodal points of a circle of `radius` about `center`,
/// rotating by half a turn in `n_steps` equal increments of duration `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeGeometry {
    pub center: Vec2,
    pub radius: f64,
    pub n_steps: usize,
    pub dt: f64,
    pub direction: Direction,
}

impl Default for ExchangeGeometry {
    fn default() -> Self {
        ExchangeGeometry {
            center: Vec2::ZERO,
            radius: 1.0,
            n_steps: 16,
            dt: 0.1,
            direction: Direction::Ccw,
        }
    }
}

impl ExchangeGeometry {
    pub fn validate(&self) -> Result<(), ExchangeError> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(ExchangeError::InvalidGeometry(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if self.n_steps < 2 {
            return Err(ExchangeError::InvalidGeometry(format!(
                "n_steps must be at least 2, got {}",
                self.n_steps
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(ExchangeError::InvalidGeometry(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !self.center.is_finite() {
            return Err(ExchangeError::InvalidGeometry(
                "center must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Inter-particle distance `D`.
    pub fn separation(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Builds the semicircular exchange path. The last configuration is exactly
/// the swapped first one.
pub fn build_exchange_path(geom: &ExchangeGeometry) -> Result<DiscretePath, ExchangeError> {
    geom.validate()?;
    let sense = match geom.direction {
        Direction::Ccw => 1.0,
        Direction::Cw => -1.0,
    };
    let at = |k: usize| {
        let phi = sense * PI * k as f64 / geom.n_steps as f64;
        let u = Vec2::new(phi.cos(), phi.sin()) * geom.radius;
        TwoParticleConfig::new(geom.center + u, geom.center - u)
    };
    let start = TwoParticleConfig::new(
        geom.center + Vec2::new(geom.radius, 0.0),
        geom.center - Vec2::new(geom.radius, 0.0),
    );
    let mut configs = Vec::with_capacity(geom.n_steps + 1);
    configs.push(start);
    configs.extend((1..geom.n_steps).map(at));
    configs.push(swap(start));
    Ok(DiscretePath::new(geom.dt, configs)?)
}

type DomainRule = dyn Fn(&TwoParticleConfig) -> bool + Send + Sync;

/// A choice of one representative per unordered pair of positions.
#[derive(Clone)]
pub struct FundamentalDomain {
    rule: Arc<DomainRule>,
}

impl fmt::Debug for FundamentalDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FundamentalDomain")
    }
}

impl Default for FundamentalDomain {
    fn default() -> Self {
        Self::half_plane(0.0)
    }
}

impl FundamentalDomain {
    pub fn new(rule: impl Fn(&TwoParticleConfig) -> bool + Send + Sync + 'static) -> Self {
        FundamentalDomain {
            rule: Arc::new(rule),
        }
    }

    /// Relative polar angle in `[start, start + π)`. With `start = 0` this is
    /// the exact predicate `y > 0 || (y == 0 && x > 0)` on `p1 - p2`.
    pub fn half_plane(start: f64) -> Self {
        if start == 0.0 {
            return Self::new(|c| {
                let r = c.relative();
                r.y > 0.0 || (r.y == 0.0 && r.x > 0.0)
            });
        }
        let (s, co) = start.sin_cos();
        Self::new(move |c| {
            let r = c.relative();
            // rotate by -start
            let x = co * r.x + s * r.y;
            let y = -s * r.x + co * r.y;
            y > 0.0 || (y == 0.0 && x > 0.0)
        })
    }

    pub fn contains(&self, config: &TwoParticleConfig) -> bool {
        (self.rule)(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepFactor {
    /// One-step amplitude along the path.
    pub alpha_dir: Amplitude,
    /// One-step amplitude into the swapped target.
    pub alpha_op: Amplitude,
    /// Unwrapped `ΔS_dir / ħ`.
    pub phase_dir: f64,
    /// Unwrapped `ΔS_op / ħ`.
    pub phase_op: f64,
    /// Start and end of the step lie on opposite sides of the domain boundary.
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFactors {
    pub steps: Vec<StepFactor>,
}

impl StepFactors {
    pub fn flip_count(&self) -> usize {
        self.steps.iter().filter(|s| s.flipped).count()
    }

    /// `Π_k (α_dir ± α_op)`, with the two roles exchanged on flipped steps.
    pub fn operational_product(&self, op_class: OpClass) -> Amplitude {
        let s = op_class.sign();
        self.steps
            .iter()
            .map(|f| {
                if f.flipped {
                    f.alpha_op + s * f.alpha_dir
                } else {
                    f.alpha_dir + s * f.alpha_op
                }
            })
            .fold(Amplitude::new(1.0, 0.0), |acc, z| acc * z)
    }

    /// The surviving term of the product once opposite contributions have
    /// dephased: every followed step, with the operational sign picked up on
    /// each flipped step.
    pub fn direct_product(&self, op_class: OpClass) -> Amplitude {
        let s = op_class.sign();
        self.steps
            .iter()
            .map(|f| {
                if f.flipped {
                    s * f.alpha_dir
                } else {
                    f.alpha_dir
                }
            })
            .fold(Amplitude::new(1.0, 0.0), |acc, z| acc * z)
    }

    /// `s^(flips)`: the operational sign accumulated at domain crossings.
    pub fn boundary_sign(&self, op_class: OpClass) -> f64 {
        if self.flip_count().is_multiple_of(2) {
            1.0
        } else {
            op_class.sign()
        }
    }
}

pub fn step_factors(
    path: &DiscretePath,
    params: &PhysicsParams,
    domain: &FundamentalDomain,
) -> StepFactors {
    let dt = path.dt();
    let steps = path
        .configs()
        .windows(2)
        .map(|w| {
            let (from, to) = (&w[0], &w[1]);
            let phase_dir = step_action(from, to, dt, params) / params.hbar;
            let phase_op = step_action(from, &swap(*to), dt, params) / params.hbar;
            StepFactor {
                alpha_dir: Amplitude::cis(phase_dir),
                alpha_op: Amplitude::cis(phase_op),
                phase_dir,
                phase_op,
                flipped: domain.contains(from) != domain.contains(to),
            }
        })
        .collect();
    StepFactors { steps }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit, ExchangeError> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(ExchangeError::DegenerateGrid(
            "need at least two paired samples".into(),
        ));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(ExchangeError::DegenerateGrid(
            "abscissae are all equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        residual: (ss / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DephasingSample {
    /// Time step actually used (`duration / n_steps`).
    pub dt: f64,
    pub n_steps: usize,
    /// Mean unwrapped opposite-step phase.
    pub phase_op: f64,
    /// Mean unwrapped direct-step phase.
    pub phase_dir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DephasingFit {
    /// Opposite-step phase against `1/dt`.
    pub op_fit: LinearFit,
    /// Direct-step phase against `dt`.
    pub dir_fit: LinearFit,
    /// `m D² / ħ`.
    pub predicted: f64,
    pub relative_error: f64,
    pub samples: Vec<DephasingSample>,
}

/// Refines the exchange at fixed total duration `geom.n_steps · geom.dt`
/// down each time step of `dt_grid`, and fits the unwrapped opposite-step
/// phase against `1/dt`.
pub fn dephasing_exponent(
    geom: &ExchangeGeometry,
    params: &PhysicsParams,
    dt_grid: &[f64],
) -> Result<DephasingFit, ExchangeError> {
    geom.validate()?;
    if dt_grid.len() < 3 {
        return Err(ExchangeError::DegenerateGrid(format!(
            "need at least 3 time steps, got {}",
            dt_grid.len()
        )));
    }
    if let Some(bad) = dt_grid.iter().find(|dt| !(dt.is_finite() && **dt > 0.0)) {
        return Err(ExchangeError::DegenerateGrid(format!(
            "time steps must be positive, got {bad}"
        )));
    }
    let duration = geom.duration();
    let mut samples = Vec::with_capacity(dt_grid.len());
    for &dt in dt_grid {
        let n_steps = (duration / dt).round() as usize;
        if n_steps < 2 {
            return Err(ExchangeError::DegenerateGrid(format!(
                "time step {dt} leaves fewer than 2 steps in duration {duration}"
            )));
        }
        let refined = ExchangeGeometry {
            n_steps,
            dt: duration / n_steps as f64,
            ..*geom
        };
        let path = build_exchange_path(&refined)?;
        let factors = step_factors(&path, params, &FundamentalDomain::default());
        let n = factors.steps.len() as f64;
        samples.push(DephasingSample {
            dt: refined.dt,
            n_steps,
            phase_op: factors.steps.iter().map(|f| f.phase_op).sum::<f64>() / n,
            phase_dir: factors.steps.iter().map(|f| f.phase_dir).sum::<f64>() / n,
        });
    }
    let inv: Vec<f64> = samples.iter().map(|s| 1.0 / s.dt).collect();
    let dts: Vec<f64> = samples.iter().map(|s| s.dt).collect();
    let ops: Vec<f64> = samples.iter().map(|s| s.phase_op).collect();
    let dirs: Vec<f64> = samples.iter().map(|s| s.phase_dir).collect();
    let op_fit = least_squares(&inv, &ops)?;
    let dir_fit = least_squares(&dts, &dirs)?;
    let d = geom.separation();
    let predicted = params.mass * d * d / params.hbar;
    Ok(DephasingFit {
        op_fit,
        dir_fit,
        predicted,
        relative_error: (op_fit.slope - predicted).abs() / predicted,
        samples,
    })
}

/// Single-class kernel of the designated exchange path.
pub fn designated_kernel(
    geom: &ExchangeGeometry,
    params: &PhysicsParams,
) -> Result<ResolvedKernel, ExchangeError> {
    let path = build_exchange_path(geom)?;
    let class = classify(&path)?;
    let mut partials = BTreeMap::new();
    partials.insert(class, path_amplitude(&path, params));
    Ok(ResolvedKernel {
        endpoints: path.endpoints(),
        n_steps: path.n_steps(),
        partials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeOutcome {
    /// Exchange phase `ϕ` in `[0, 2π)`.
    pub phi: f64,
    /// The dominant class whose topological weight defines `ϕ`.
    pub class: HomotopyClass,
    /// Full interference amplitude `s · Σ_w e^{iθw} K^w`.
    pub amplitude: Amplitude,
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Exchange phase of an exchange kernel dominated by one class `w*`:
/// `ϕ = arg(e^{iθw*} · s)` with `s = ±1` for bosons/fermions.
pub fn exchange_phase(
    resolved: &ResolvedKernel,
    stats: &StatisticsSpec,
) -> Result<ExchangeOutcome, ExchangeError> {
    if resolved.kind() != Some(EndpointKind::Exchange) {
        return Err(ExchangeError::NotExchangeKernel);
    }
    let total: f64 = resolved.partials.values().map(|z| z.norm()).sum();
    let (class, _) = resolved
        .partials
        .iter()
        .find(|(_, z)| z.norm() > total - z.norm())
        .ok_or(ExchangeError::NoDominantClass)?;
    let s = stats.op_class.sign();
    let phase = anyonic_weight(*class, stats.theta) * s;
    Ok(ExchangeOutcome {
        phi: wrap_angle(phase.arg()),
        class: *class,
        amplitude: anyonic_kernel(resolved, stats.theta) * s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub op_class: OpClass,
    pub phi: f64,
    pub amplitude: Amplitude,
}

/// Exchange phase of the designated path for every entry of `grid`.
pub fn theta_sweep(
    geom: &ExchangeGeometry,
    params: &PhysicsParams,
    grid: &[StatisticsSpec],
) -> Result<Vec<SweepRow>, ExchangeError> {
    let kernel = designated_kernel(geom, params)?;
    grid.par_iter()
        .map(|stats| {
            let out = exchange_phase(&kernel, stats)?;
            Ok(SweepRow {
                theta: stats.theta,
                op_class: stats.op_class,
                phi: out.phi,
                amplitude: out.amplitude,
            })
        })
        .collect()
}
