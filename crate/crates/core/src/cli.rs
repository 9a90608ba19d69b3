//! `anyonsim` command-line interface.
//!
//! Every command renders its report to a `String` so the binary stays a thin
//! shell and the rendering is testable in-process.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::amplitudes::{
    anyonic_kernel, path_amplitude, resolved_kernel, walk_sum, Amplitude, KernelError,
    KernelOptions, OpClass, ParamsError, PhysicsParams, StatisticsSpec, DEFAULT_BUDGET,
};
use crate::config_space::{
    count_walks, EndpointPair, LatticeError, LatticeSpec, PathLoadError, TwoParticleConfig, Vec2,
};
use crate::exchange::{
    build_exchange_path, dephasing_exponent, designated_kernel, exchange_phase, step_factors,
    theta_sweep, Direction, ExchangeError, ExchangeGeometry, FundamentalDomain,
};
use crate::homotopy::{classify, total_angle, EndpointKind, HomotopyError};
use crate::report::{fmt12, sweep_csv};

#[derive(Debug, Parser)]
#[command(
    name = "anyonsim",
    version,
    about = "Winding-resolved two-particle path sums and anyonic exchange phases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpClassArg {
    Boson,
    Fermion,
    Both,
}

impl OpClassArg {
    fn classes(self) -> &'static [OpClass] {
        match self {
            OpClassArg::Boson => &[OpClass::Boson],
            OpClassArg::Fermion => &[OpClass::Fermion],
            OpClassArg::Both => &[OpClass::Boson, OpClass::Fermion],
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a path file by homotopy class.
    Winding {
        path_file: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
    },
    /// Brute-force lattice propagator, optionally resolved by winding class.
    Kernel(KernelArgs),
    /// Step factors and exchange phase of the designated exchange path.
    Exchange(ExchangeArgs),
    /// Exchange phase over a grid of topological angles.
    Sweep(SweepArgs),
    /// Fit the opposite-step phase against 1/dt.
    Dephase(DephaseArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct PhysicsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
}

impl PhysicsArgs {
    fn params(&self) -> Result<PhysicsParams, ParamsError> {
        PhysicsParams::new(self.mass, self.hbar)
    }
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Lattice half-width in sites.
    #[arg(long)]
    pub extent: i32,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long)]
    pub steps: usize,
    /// Start configuration as x1,y1,x2,y2.
    #[arg(long, value_parser = parse_config, allow_hyphen_values = true)]
    pub start: TwoParticleConfig,
    /// End configuration as x1,y1,x2,y2.
    #[arg(long, value_parser = parse_config, allow_hyphen_values = true)]
    pub end: TwoParticleConfig,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub resolve: bool,
    #[arg(long, env = "ANYONSIM_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct GeometryArgs {
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 16)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Exchange clockwise instead of counter-clockwise.
    #[arg(long)]
    pub cw: bool,
}

impl GeometryArgs {
    fn geometry(&self) -> ExchangeGeometry {
        ExchangeGeometry {
            center: Vec2::ZERO,
            radius: self.radius,
            n_steps: self.n_steps,
            dt: self.dt,
            direction: if self.cw {
                Direction::Cw
            } else {
                Direction::Ccw
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct ExchangeArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, value_enum, default_value = "boson")]
    pub op_class: OpClassArg,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 4.0 * PI, allow_negative_numbers = true)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 9)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub op_class: OpClassArg,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct DephaseArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
    pub dt_grid: Vec<f64>,
    /// Inter-particle distance D.
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    /// Total exchange duration held fixed while dt is refined.
    #[arg(long, default_value_t = 1.6)]
    pub duration: f64,
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

fn parse_config(s: &str) -> Result<TwoParticleConfig, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[x1, y1, x2, y2] => Ok(TwoParticleConfig::from_coords(x1, y1, x2, y2)),
        _ => Err(format!("expected x1,y1,x2,y2, got {} numbers", parts.len())),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("IoError: {0}")]
    Io(String),
    #[error(transparent)]
    PathLoad(#[from] PathLoadError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Exchange(#[from] ExchangeError),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("BadRange: {0}")]
    BadRange(String),
    #[error("BadArgument: {0}")]
    BadArgument(String),
}

#[derive(Serialize)]
struct AmpRecord {
    re: f64,
    im: f64,
}

impl From<Amplitude> for AmpRecord {
    fn from(z: Amplitude) -> Self {
        AmpRecord { re: z.re, im: z.im }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization is infallible");
    s.push('\n');
    s
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Winding { path_file, format } => cmd_winding(path_file, *format),
        Command::Kernel(args) => cmd_kernel(args),
        Command::Exchange(args) => cmd_exchange(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Dephase(args) => cmd_dephase(args),
    }
}

#[derive(Serialize)]
struct WindingReport {
    kind: EndpointKind,
    winding: f64,
    total_angle: f64,
}

pub fn cmd_winding(path_file: &PathBuf, format: OutputFormat) -> Result<String, CliError> {
    let text = std::fs::read_to_string(path_file)
        .map_err(|e| CliError::Io(format!("{}: {e}", path_file.display())))?;
    let path = crate::config_space::DiscretePath::from_json(&text)?;
    let class = classify(&path)?;
    let report = WindingReport {
        kind: class.kind(),
        winding: class.winding(),
        total_angle: total_angle(&path).radians(),
    };
    Ok(match format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => format!(
            "kind,winding,total_angle\n{},{},{}\n",
            report.kind,
            fmt12(report.winding),
            fmt12(report.total_angle)
        ),
    })
}

#[derive(Serialize)]
struct PartialRow {
    kind: EndpointKind,
    winding: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct KernelReport {
    endpoints: EndpointPair,
    n_steps: usize,
    walk_count: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    partials: Option<Vec<PartialRow>>,
    total: AmpRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition_total: Option<AmpRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weighted: Option<AmpRecord>,
}

pub fn cmd_kernel(args: &KernelArgs) -> Result<String, CliError> {
    if args.budget == 0 {
        return Err(CliError::BadArgument("budget must be positive".into()));
    }
    let lattice = LatticeSpec::new(args.extent, args.spacing)?.with_dt(args.dt)?;
    let endpoints = EndpointPair::new(args.start, args.end)?;
    let params = args.physics.params()?;
    let options = KernelOptions {
        budget: args.budget,
        workers: args.workers.max(1),
    };
    let walk_count = count_walks(&lattice, &endpoints, args.steps)?;
    let total = walk_sum(&lattice, &endpoints, args.steps, &params, &options)?;

    let classifiable = EndpointKind::of(&endpoints).is_some();
    let wants_classes = args.resolve || args.theta.is_some();
    let resolved = if classifiable || wants_classes {
        Some(resolved_kernel(
            &lattice, &endpoints, args.steps, &params, &options,
        )?)
    } else {
        None
    };

    let report = KernelReport {
        endpoints,
        n_steps: args.steps,
        walk_count,
        partials: resolved.as_ref().filter(|_| args.resolve).map(|k| {
            k.partials
                .iter()
                .map(|(c, z)| PartialRow {
                    kind: c.kind(),
                    winding: c.winding(),
                    re: z.re,
                    im: z.im,
                })
                .collect()
        }),
        total: total.into(),
        partition_total: resolved.as_ref().map(|k| k.total().into()),
        theta: args.theta,
        weighted: match (&resolved, args.theta) {
            (Some(k), Some(theta)) => Some(anyonic_kernel(k, theta).into()),
            _ => None,
        },
    };
    Ok(match args.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => {
            let mut out = String::from("row,kind,winding,re,im\n");
            for p in report.partials.iter().flatten() {
                out.push_str(&format!(
                    "partial,{},{},{},{}\n",
                    p.kind,
                    fmt12(p.winding),
                    fmt12(p.re),
                    fmt12(p.im)
                ));
            }
            let mut line = |name: &str, z: &AmpRecord| {
                out.push_str(&format!("{name},,,{},{}\n", fmt12(z.re), fmt12(z.im)));
            };
            line("total", &report.total);
            if let Some(z) = &report.partition_total {
                line("partition_total", z);
            }
            if let Some(z) = &report.weighted {
                line("weighted", z);
            }
            out
        }
    })
}

#[derive(Serialize)]
struct ExchangeReport {
    kind: EndpointKind,
    winding: f64,
    total_angle: f64,
    n_steps: usize,
    flips: usize,
    theta: f64,
    op_class: OpClass,
    phi: f64,
    dynamical_phase: f64,
    amplitude: AmpRecord,
    direct_product: AmpRecord,
    operational_product: AmpRecord,
}

pub fn cmd_exchange(args: &ExchangeArgs) -> Result<String, CliError> {
    let op_class = match args.op_class {
        OpClassArg::Boson => OpClass::Boson,
        OpClassArg::Fermion => OpClass::Fermion,
        OpClassArg::Both => {
            return Err(CliError::BadArgument(
                "exchange takes a single operational class".into(),
            ))
        }
    };
    let params = args.physics.params()?;
    let geom = args.geometry.geometry();
    let path = build_exchange_path(&geom)?;
    let class = classify(&path)?;
    let factors = step_factors(&path, &params, &FundamentalDomain::default());
    let kernel = designated_kernel(&geom, &params)?;
    let outcome = exchange_phase(&kernel, &StatisticsSpec::new(args.theta, op_class))?;
    let report = ExchangeReport {
        kind: class.kind(),
        winding: class.winding(),
        total_angle: total_angle(&path).radians(),
        n_steps: path.n_steps(),
        flips: factors.flip_count(),
        theta: args.theta,
        op_class,
        phi: outcome.phi,
        dynamical_phase: path_amplitude(&path, &params).arg(),
        amplitude: outcome.amplitude.into(),
        direct_product: factors.direct_product(op_class).into(),
        operational_product: factors.operational_product(op_class).into(),
    };
    Ok(match args.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => format!(
            "kind,winding,flips,theta,op_class,phi,re_amp,im_amp\n{},{},{},{},{},{},{},{}\n",
            report.kind,
            fmt12(report.winding),
            report.flips,
            fmt12(report.theta),
            report.op_class,
            fmt12(report.phi),
            fmt12(report.amplitude.re),
            fmt12(report.amplitude.im)
        ),
    })
}

/// `points` evenly spaced values from `min` to `max` inclusive.
pub fn theta_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points == 0 {
        return Err(CliError::BadRange("points must be at least 1".into()));
    }
    if !(min.is_finite() && max.is_finite()) || max < min {
        return Err(CliError::BadRange(format!(
            "theta range [{min}, {max}] is empty or not finite"
        )));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}

#[derive(Serialize)]
struct SweepRecord {
    theta: f64,
    op_class: OpClass,
    phi: f64,
    re_amp: f64,
    im_amp: f64,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String, CliError> {
    let thetas = theta_grid(args.theta_min, args.theta_max, args.points)?;
    let params = args.physics.params()?;
    let grid: Vec<StatisticsSpec> = thetas
        .iter()
        .flat_map(|&t| {
            args.op_class
                .classes()
                .iter()
                .map(move |&c| StatisticsSpec::new(t, c))
        })
        .collect();
    let rows = theta_sweep(&args.geometry.geometry(), &params, &grid)?;
    Ok(match args.format {
        OutputFormat::Csv => sweep_csv(&rows),
        OutputFormat::Json => to_json(
            &rows
                .iter()
                .map(|r| SweepRecord {
                    theta: r.theta,
                    op_class: r.op_class,
                    phi: r.phi,
                    re_amp: r.amplitude.re,
                    im_amp: r.amplitude.im,
                })
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct DephaseReport {
    slope: f64,
    intercept: f64,
    residual: f64,
    predicted: f64,
    relative_error: f64,
    direct_slope: f64,
    direct_intercept: f64,
    samples: Vec<crate::exchange::DephasingSample>,
}

pub fn cmd_dephase(args: &DephaseArgs) -> Result<String, CliError> {
    let params = args.physics.params()?;
    if !(args.separation.is_finite() && args.separation > 0.0) {
        return Err(CliError::BadArgument("separation must be positive".into()));
    }
    if !(args.duration.is_finite() && args.duration > 0.0) {
        return Err(CliError::BadArgument("duration must be positive".into()));
    }
    let n_steps = 16;
    let geom = ExchangeGeometry {
        radius: args.separation / 2.0,
        n_steps,
        dt: args.duration / n_steps as f64,
        ..ExchangeGeometry::default()
    };
    let fit = dephasing_exponent(&geom, &params, &args.dt_grid)?;
    let report = DephaseReport {
        slope: fit.op_fit.slope,
        intercept: fit.op_fit.intercept,
        residual: fit.op_fit.residual,
        predicted: fit.predicted,
        relative_error: fit.relative_error,
        direct_slope: fit.dir_fit.slope,
        direct_intercept: fit.dir_fit.intercept,
        samples: fit.samples,
    };
    Ok(match args.format {
        OutputFormat::Json => to_json(&report),
        OutputFormat::Csv => format!(
            "slope,intercept,predicted,relative_error\n{},{},{},{}\n",
            fmt12(report.slope),
            fmt12(report.intercept),
            fmt12(report.predicted),
            fmt12(report.relative_error)
        ),
    })
}
