use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use anyonsim_core::amplitudes::{self, KernelOptions, OpClass, PhysicsParams, StatisticsSpec};
use anyonsim_core::config_space::{self, EndpointPair, LatticeSpec, TwoParticleConfig, Vec2};
use anyonsim_core::exchange::{self, Direction, ExchangeGeometry, FundamentalDomain};
use anyonsim_core::homotopy;
use anyonsim_core::{Permutation, PermutationAmplitudes};

type Point = (f64, f64);
type Config = (Point, Point);

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_config(((x1, y1), (x2, y2)): Config) -> TwoParticleConfig {
    TwoParticleConfig::from_coords(x1, y1, x2, y2)
}

fn from_config(c: &TwoParticleConfig) -> Config {
    ((c.p1.x, c.p1.y), (c.p2.x, c.p2.y))
}

fn op_class(name: &str) -> PyResult<OpClass> {
    name.parse().map_err(PyValueError::new_err)
}

fn params(mass: f64, hbar: f64) -> PyResult<PhysicsParams> {
    PhysicsParams::new(mass, hbar).map_err(err)
}

#[pyclass(
    name = "HomotopyClass",
    module = "anyonsim",
    frozen,
    eq,
    skip_from_py_object
)]
#[derive(Clone, PartialEq)]
struct PyHomotopyClass(homotopy::HomotopyClass);

#[pymethods]
impl PyHomotopyClass {
    #[new]
    fn new(winding: f64) -> PyResult<Self> {
        homotopy::HomotopyClass::from_winding(winding)
            .map(PyHomotopyClass)
            .map_err(err)
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn winding(&self) -> f64 {
        self.0.winding()
    }

    fn weight(&self, theta: f64) -> Complex64 {
        amplitudes::anyonic_weight(self.0, theta)
    }

    fn __repr__(&self) -> String {
        format!(
            "HomotopyClass(kind={}, winding={})",
            self.0.kind(),
            self.0.winding()
        )
    }
}

#[pyclass(
    name = "DiscretePath",
    module = "anyonsim",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyDiscretePath(config_space::DiscretePath);

#[pymethods]
impl PyDiscretePath {
    #[new]
    fn new(dt: f64, configs: Vec<Config>) -> PyResult<Self> {
        let configs = configs.into_iter().map(to_config).collect();
        config_space::DiscretePath::new(dt, configs)
            .map(PyDiscretePath)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        config_space::DiscretePath::from_json(text)
            .map(PyDiscretePath)
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt()
    }

    #[getter]
    fn configs(&self) -> Vec<Config> {
        self.0.configs().iter().map(from_config).collect()
    }

    #[getter]
    fn n_steps(&self) -> usize {
        self.0.n_steps()
    }

    fn total_angle(&self) -> f64 {
        homotopy::total_angle(&self.0).radians()
    }

    fn classify(&self) -> PyResult<PyHomotopyClass> {
        homotopy::classify(&self.0)
            .map(PyHomotopyClass)
            .map_err(err)
    }

    fn class_relative(&self, other: &PyDiscretePath) -> PyResult<i64> {
        homotopy::class_relative(&self.0, &other.0).map_err(err)
    }

    #[pyo3(signature = (mass=1.0, hbar=1.0))]
    fn action(&self, mass: f64, hbar: f64) -> PyResult<f64> {
        Ok(amplitudes::action(&self.0, &params(mass, hbar)?))
    }

    #[pyo3(signature = (mass=1.0, hbar=1.0))]
    fn amplitude(&self, mass: f64, hbar: f64) -> PyResult<Complex64> {
        Ok(amplitudes::path_amplitude(&self.0, &params(mass, hbar)?))
    }

    fn concat(&self, next: &PyDiscretePath) -> PyResult<PyDiscretePath> {
        self.0.concat(&next.0).map(PyDiscretePath).map_err(err)
    }

    fn reversed(&self) -> PyDiscretePath {
        PyDiscretePath(self.0.reversed())
    }

    /// Per-step (alpha_dir, alpha_op, flipped) with the default fundamental domain.
    #[pyo3(signature = (mass=1.0, hbar=1.0))]
    fn step_factors(&self, mass: f64, hbar: f64) -> PyResult<Vec<(Complex64, Complex64, bool)>> {
        let f =
            exchange::step_factors(&self.0, &params(mass, hbar)?, &FundamentalDomain::default());
        Ok(f.steps
            .iter()
            .map(|s| (s.alpha_dir, s.alpha_op, s.flipped))
            .collect())
    }
}

#[pyclass(name = "ResolvedKernel", module = "anyonsim", frozen)]
struct PyResolvedKernel(amplitudes::ResolvedKernel);

#[pymethods]
impl PyResolvedKernel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        amplitudes::ResolvedKernel::from_json(text)
            .map(PyResolvedKernel)
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn n_steps(&self) -> usize {
        self.0.n_steps
    }

    /// List of (kind, winding, amplitude) sorted by winding.
    #[getter]
    fn partials(&self) -> Vec<(String, f64, Complex64)> {
        self.0
            .partials
            .iter()
            .map(|(c, z)| (c.kind().to_string(), c.winding(), *z))
            .collect()
    }

    fn total(&self) -> Complex64 {
        self.0.total()
    }

    fn anyonic_kernel(&self, theta: f64) -> Complex64 {
        amplitudes::anyonic_kernel(&self.0, theta)
    }

    /// (phi, amplitude) for an exchange kernel with a dominant class.
    fn exchange_phase(&self, theta: f64, op_class: &str) -> PyResult<(f64, Complex64)> {
        let out = exchange::exchange_phase(
            &self.0,
            &StatisticsSpec::new(theta, self::op_class(op_class)?),
        )
        .map_err(err)?;
        Ok((out.phi, out.amplitude))
    }
}

fn lattice(extent: i32, spacing: f64, dt: f64) -> PyResult<LatticeSpec> {
    LatticeSpec::new(extent, spacing)
        .and_then(|l| l.with_dt(dt))
        .map_err(err)
}

fn endpoints(start: Config, end: Config) -> PyResult<EndpointPair> {
    EndpointPair::new(to_config(start), to_config(end)).map_err(err)
}

#[pyfunction]
fn swap(config: Config) -> Config {
    from_config(&config_space::swap(to_config(config)))
}

#[pyfunction]
fn signed_angle(from: Point, to: Point) -> PyResult<f64> {
    homotopy::signed_angle(Vec2::new(from.0, from.1), Vec2::new(to.0, to.1)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (extent, steps, start, end, spacing=1.0, dt=1.0))]
fn enumerate_walks(
    extent: i32,
    steps: usize,
    start: Config,
    end: Config,
    spacing: f64,
    dt: f64,
) -> PyResult<Vec<PyDiscretePath>> {
    let walks = config_space::enumerate_walks(
        &lattice(extent, spacing, dt)?,
        &endpoints(start, end)?,
        steps,
    )
    .map_err(err)?;
    Ok(walks.map(PyDiscretePath).collect())
}

#[pyfunction]
#[pyo3(signature = (extent, steps, start, end, spacing=1.0, dt=1.0, mass=1.0, hbar=1.0, budget=amplitudes::DEFAULT_BUDGET, workers=1))]
#[allow(clippy::too_many_arguments)]
fn resolved_kernel(
    py: Python<'_>,
    extent: i32,
    steps: usize,
    start: Config,
    end: Config,
    spacing: f64,
    dt: f64,
    mass: f64,
    hbar: f64,
    budget: u64,
    workers: usize,
) -> PyResult<PyResolvedKernel> {
    let lat = lattice(extent, spacing, dt)?;
    let ends = endpoints(start, end)?;
    let p = params(mass, hbar)?;
    let opts = KernelOptions { budget, workers };
    py.detach(|| amplitudes::resolved_kernel(&lat, &ends, steps, &p, &opts))
        .map(PyResolvedKernel)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (extent, steps, start, end, spacing=1.0, dt=1.0, mass=1.0, hbar=1.0, budget=amplitudes::DEFAULT_BUDGET, workers=1))]
#[allow(clippy::too_many_arguments)]
fn walk_sum(
    py: Python<'_>,
    extent: i32,
    steps: usize,
    start: Config,
    end: Config,
    spacing: f64,
    dt: f64,
    mass: f64,
    hbar: f64,
    budget: u64,
    workers: usize,
) -> PyResult<Complex64> {
    let lat = lattice(extent, spacing, dt)?;
    let ends = endpoints(start, end)?;
    let p = params(mass, hbar)?;
    let opts = KernelOptions { budget, workers };
    py.detach(|| amplitudes::walk_sum(&lat, &ends, steps, &p, &opts))
        .map_err(err)
}

#[pyfunction]
fn feynman_product(ab: Complex64, bc: Complex64) -> Complex64 {
    amplitudes::feynman_product(ab, bc)
}

#[pyfunction]
fn feynman_sum(abd: Complex64, acd: Complex64) -> Complex64 {
    amplitudes::feynman_sum(abd, acd)
}

#[pyfunction]
fn probability(a: Complex64) -> f64 {
    amplitudes::probability(a)
}

/// Combines `{permutation tuple: amplitude}` under the boson or fermion rule.
#[pyfunction]
fn operational_combine(
    n: usize,
    alpha: Vec<(Vec<usize>, Complex64)>,
    op_class: &str,
) -> PyResult<Complex64> {
    let mut perms = PermutationAmplitudes::new(n);
    for (image, a) in alpha {
        perms
            .insert(Permutation::new(image).map_err(err)?, a)
            .map_err(err)?;
    }
    amplitudes::operational_combine(&perms, self::op_class(op_class)?).map_err(err)
}

/// Boson/fermion combination of independent single-particle kernels `M[j][k]`.
#[pyfunction]
fn noninteracting_combine(matrix: Vec<Vec<Complex64>>, op_class: &str) -> PyResult<Complex64> {
    let alpha = amplitudes::noninteracting_alpha(&matrix).map_err(err)?;
    amplitudes::operational_combine(&alpha, self::op_class(op_class)?).map_err(err)
}

fn geometry(radius: f64, n_steps: usize, dt: f64, cw: bool) -> ExchangeGeometry {
    ExchangeGeometry {
        center: Vec2::ZERO,
        radius,
        n_steps,
        dt,
        direction: if cw { Direction::Cw } else { Direction::Ccw },
    }
}

#[pyfunction]
#[pyo3(signature = (radius=1.0, n_steps=16, dt=0.1, cw=false))]
fn build_exchange_path(radius: f64, n_steps: usize, dt: f64, cw: bool) -> PyResult<PyDiscretePath> {
    exchange::build_exchange_path(&geometry(radius, n_steps, dt, cw))
        .map(PyDiscretePath)
        .map_err(err)
}

/// Rows of (theta, op_class, phi, amplitude) for the designated exchange path.
#[pyfunction]
#[pyo3(signature = (thetas, op_class, radius=1.0, n_steps=16, dt=0.1, cw=false, mass=1.0, hbar=1.0))]
#[allow(clippy::too_many_arguments)]
fn theta_sweep(
    thetas: Vec<f64>,
    op_class: &str,
    radius: f64,
    n_steps: usize,
    dt: f64,
    cw: bool,
    mass: f64,
    hbar: f64,
) -> PyResult<Vec<(f64, String, f64, Complex64)>> {
    let class = self::op_class(op_class)?;
    let grid: Vec<_> = thetas
        .iter()
        .map(|&t| StatisticsSpec::new(t, class))
        .collect();
    let rows = exchange::theta_sweep(
        &geometry(radius, n_steps, dt, cw),
        &params(mass, hbar)?,
        &grid,
    )
    .map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.theta, r.op_class.to_string(), r.phi, r.amplitude))
        .collect())
}

/// (slope, predicted, relative_error) of the opposite-step phase against 1/dt.
#[pyfunction]
#[pyo3(signature = (dt_grid, separation=2.0, duration=1.6, mass=1.0, hbar=1.0))]
fn dephasing_exponent(
    dt_grid: Vec<f64>,
    separation: f64,
    duration: f64,
    mass: f64,
    hbar: f64,
) -> PyResult<(f64, f64, f64)> {
    let geom = geometry(separation / 2.0, 16, duration / 16.0, false);
    let fit = exchange::dephasing_exponent(&geom, &params(mass, hbar)?, &dt_grid).map_err(err)?;
    Ok((fit.op_fit.slope, fit.predicted, fit.relative_error))
}

#[pymodule]
fn anyonsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHomotopyClass>()?;
    m.add_class::<PyDiscretePath>()?;
    m.add_class::<PyResolvedKernel>()?;
    m.add_function(wrap_pyfunction!(swap, m)?)?;
    m.add_function(wrap_pyfunction!(signed_angle, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_walks, m)?)?;
    m.add_function(wrap_pyfunction!(resolved_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(walk_sum, m)?)?;
    m.add_function(wrap_pyfunction!(feynman_product, m)?)?;
    m.add_function(wrap_pyfunction!(feynman_sum, m)?)?;
    m.add_function(wrap_pyfunction!(probability, m)?)?;
    m.add_function(wrap_pyfunction!(operational_combine, m)?)?;
    m.add_function(wrap_pyfunction!(noninteracting_combine, m)?)?;
    m.add_function(wrap_pyfunction!(build_exchange_path, m)?)?;
    m.add_function(wrap_pyfunction!(theta_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(dephasing_exponent, m)?)?;
    Ok(())
}
