//! Python bindings: steering vectors, the virtual manifold, covariance,
//! AOA estimation, and the Monte Carlo harness.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use irs_music::estimator::{self, GridSpec, Method};
use irs_music::geometry::{self, Angle, ArrayGeometry, CVector, Position2D};
use irs_music::harness::{self, Cell, ScenarioConfig};
use irs_music::synthesis::{self, BlockObservations};

fn py_err(e: irs_music::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_vec(v: &CVector) -> Vec<Complex64> {
    v.iter().copied().collect()
}

fn to_cvectors(rows: Vec<Vec<Complex64>>) -> Vec<CVector> {
    rows.into_iter().map(CVector::from_vec).collect()
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(py_err)
}

fn parse_config(toml_text: &str) -> PyResult<ScenarioConfig> {
    ScenarioConfig::from_toml_str(toml_text).map_err(py_err)
}

/// Response `exp(-j2π n d cos θ)` of an `num_elements`-element ULA.
#[pyfunction]
#[pyo3(signature = (num_elements, angle_deg, spacing = 0.5))]
fn steering_vector(num_elements: usize, angle_deg: f64, spacing: f64) -> PyResult<Vec<Complex64>> {
    let g = ArrayGeometry::new(num_elements, spacing).map_err(py_err)?;
    Ok(to_vec(&geometry::steering_vector(&g, Angle::from_degrees(angle_deg))))
}

/// Folded AOA in degrees, in [0, 180], at `array` of a wave from `source`.
#[pyfunction]
fn aoa_from_positions(array: (f64, f64), source: (f64, f64)) -> PyResult<f64> {
    geometry::aoa_from_positions(Position2D::new(array.0, array.1), Position2D::new(source.0, source.1))
        .map(Angle::degrees)
        .map_err(py_err)
}

/// `num_patterns` distinct random unit-modulus reflection patterns.
#[pyfunction]
fn generate_irs_patterns(num_elements: usize, num_patterns: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = irs_music::rng::from_seed(seed);
    synthesis::generate_irs_patterns(num_elements, num_patterns, &mut rng)
        .iter()
        .map(to_vec)
        .collect()
}

/// `(1/Q) Σ y yᴴ` as a list of rows.
#[pyfunction]
fn sample_covariance(snapshots: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    let s = estimator::covariance_from_snapshots(&to_cvectors(snapshots)).map_err(py_err)?;
    Ok(s.row_iter().map(|r| r.iter().copied().collect()).collect())
}

/// Minimum-total-error pairing; unmatched truths get `inf`.
#[pyfunction]
fn match_estimates(truth_deg: Vec<f64>, estimates_deg: Vec<f64>) -> Vec<f64> {
    let t: Vec<Angle> = truth_deg.into_iter().map(Angle::from_degrees).collect();
    let e: Vec<Angle> = estimates_deg.into_iter().map(Angle::from_degrees).collect();
    harness::match_estimates(&t, &e)
}

#[pyclass(name = "VirtualManifold", frozen)]
struct PyVirtualManifold {
    inner: estimator::VirtualManifold,
}

#[pymethods]
impl PyVirtualManifold {
    #[new]
    #[pyo3(signature = (gamma_deg, patterns, spacing = 0.5))]
    fn new(gamma_deg: f64, patterns: Vec<Vec<Complex64>>, spacing: f64) -> PyResult<Self> {
        let i = patterns.first().map_or(0, Vec::len);
        let g = ArrayGeometry::new(i, spacing).map_err(py_err)?;
        let inner =
            estimator::VirtualManifold::new(Angle::from_degrees(gamma_deg), &to_cvectors(patterns), g).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_samples(&self) -> usize {
        self.inner.num_samples()
    }

    /// `ā(θ)`, length L.
    fn steering(&self, theta_deg: f64) -> Vec<Complex64> {
        to_vec(&self.inner.steering(Angle::from_degrees(theta_deg)))
    }
}

#[pyclass(name = "EstimationResult", frozen, get_all)]
struct PyEstimationResult {
    method: String,
    estimates_deg: Vec<f64>,
    peak_values: Vec<f64>,
    eigenvalues: Vec<f64>,
    grid_deg: Vec<f64>,
    normalized_spectrum: Vec<f64>,
    underdetected: bool,
}

impl From<&estimator::EstimationResult> for PyEstimationResult {
    fn from(r: &estimator::EstimationResult) -> Self {
        Self {
            method: r.method.to_string(),
            estimates_deg: r.estimates.iter().map(|a| a.degrees()).collect(),
            peak_values: r.spectrum.peaks.iter().map(|p| p.value).collect(),
            eigenvalues: r.eigenvalues.clone(),
            grid_deg: r.spectrum.grid.iter().map(|a| a.degrees()).collect(),
            normalized_spectrum: r.spectrum.normalized(),
            underdetected: r.underdetected,
        }
    }
}

#[pymethods]
impl PyEstimationResult {
    fn __repr__(&self) -> String {
        format!("EstimationResult(method={:?}, estimates_deg={:?})", self.method, self.estimates_deg)
    }
}

/// Estimate `num_sources` AOAs from Q block snapshots of length L.
#[pyfunction]
#[pyo3(signature = (snapshots, gamma_deg, patterns, num_sources, method = "music", spacing = 0.5))]
fn estimate_aoas(
    py: Python<'_>,
    snapshots: Vec<Vec<Complex64>>,
    gamma_deg: f64,
    patterns: Vec<Vec<Complex64>>,
    num_sources: usize,
    method: &str,
    spacing: f64,
) -> PyResult<PyEstimationResult> {
    let method = parse_method(method)?;
    let i = patterns.first().map_or(0, Vec::len);
    let g = ArrayGeometry::new(i, spacing).map_err(py_err)?;
    let obs = BlockObservations::new(
        to_cvectors(snapshots),
        Angle::from_degrees(gamma_deg),
        to_cvectors(patterns),
        g,
        0.0,
    )
    .map_err(py_err)?;
    let r = py
        .detach(|| estimator::estimate_aoas(&obs, num_sources, method, &GridSpec::default()))
        .map_err(py_err)?;
    Ok(PyEstimationResult::from(&r))
}

/// The default scenario configuration as TOML.
#[pyfunction]
fn default_config() -> String {
    ScenarioConfig::default().to_toml_string()
}

/// Spectrum of trial 0 of the scenario described by `config_toml`.
/// Returns `(true_aoas_deg, errors_deg, result)`.
#[pyfunction]
#[pyo3(signature = (config_toml = "", method = "music"))]
fn run_spectrum(py: Python<'_>, config_toml: &str, method: &str) -> PyResult<(Vec<f64>, Vec<f64>, PyEstimationResult)> {
    let cfg = parse_config(config_toml)?;
    let method = parse_method(method)?;
    let run = py.detach(|| harness::run_spectrum(&cfg, method)).map_err(py_err)?;
    Ok((
        run.scenario.true_aoas.iter().map(|a| a.degrees()).collect(),
        run.errors_deg.clone(),
        PyEstimationResult::from(&run.estimation),
    ))
}

/// Error probability per (L, Q) cell and method. Each row is
/// `(method, L, Q, snr_db, trials, errors, error_probability)`.
#[pyfunction]
#[pyo3(signature = (config_toml = "", methods = vec!["music".to_string(), "capon".to_string()], cells = None))]
fn run_montecarlo(
    py: Python<'_>,
    config_toml: &str,
    methods: Vec<String>,
    cells: Option<Vec<(usize, usize)>>,
) -> PyResult<Vec<(String, usize, usize, f64, usize, usize, f64)>> {
    let cfg = parse_config(config_toml)?;
    let methods = methods.iter().map(|m| parse_method(m)).collect::<PyResult<Vec<_>>>()?;
    let cells: Vec<Cell> = match cells {
        Some(c) => c.into_iter().map(|(l, q)| Cell::new(l, q)).collect(),
        None => vec![Cell::new(cfg.block_len, cfg.num_blocks)],
    };
    let reports = py.detach(|| harness::run_montecarlo(&cfg, &methods, &cells)).map_err(py_err)?;
    Ok(reports
        .iter()
        .map(|r| {
            (
                r.method.to_string(),
                r.cell.block_len,
                r.cell.num_blocks,
                r.snr_db,
                r.trials,
                r.errors,
                r.error_probability,
            )
        })
        .collect())
}

#[pymodule]
fn irs_music_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(steering_vector, m)?)?;
    m.add_function(wrap_pyfunction!(aoa_from_positions, m)?)?;
    m.add_function(wrap_pyfunction!(generate_irs_patterns, m)?)?;
    m.add_function(wrap_pyfunction!(sample_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(match_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_aoas, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_montecarlo, m)?)?;
    m.add_class::<PyVirtualManifold>()?;
    m.add_class::<PyEstimationResult>()?;
    Ok(())
}
