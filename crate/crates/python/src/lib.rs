//! Python bindings for `bhdd-core`. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use bhdd_core::harness::{self, ExperimentConfig};
use bhdd_core::{pagecurve, qregression, regression, spectra, AspectRatio, Error};
use ndarray::{Array1, Array2};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Argument(_) | Error::Domain(_) | Error::Regime(_) | Error::Resource { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn ratio(alpha: f64) -> PyResult<AspectRatio> {
    AspectRatio::new(alpha).map_err(to_py)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    Array2::from_shape_vec((n, p), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Marchenko–Pastur law with aspect ratio `alpha = P/N`.
#[pyclass(name = "MPLaw", frozen)]
struct PyMPLaw(spectra::MPLaw);

#[pymethods]
impl PyMPLaw {
    #[new]
    fn new(alpha: f64) -> PyResult<Self> {
        Ok(Self(spectra::MPLaw::new(ratio(alpha)?)))
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha().get()
    }

    #[getter]
    fn lambda_minus(&self) -> f64 {
        self.0.lambda_minus()
    }

    #[getter]
    fn lambda_plus(&self) -> f64 {
        self.0.lambda_plus()
    }

    #[getter]
    fn zero_mass(&self) -> f64 {
        self.0.zero_mass()
    }

    fn bulk_density(&self, lam: f64) -> f64 {
        self.0.bulk_density(lam)
    }

    fn cdf(&self, lam: f64) -> f64 {
        self.0.cdf(lam)
    }

    fn quantile(&self, q: f64) -> f64 {
        self.0.quantile(q)
    }

    fn __repr__(&self) -> String {
        format!("MPLaw(alpha={})", self.alpha())
    }
}

#[pyfunction]
#[pyo3(signature = (z, alpha, tol = 1e-10))]
fn stieltjes_numeric(z: f64, alpha: f64, tol: f64) -> PyResult<f64> {
    spectra::stieltjes_numeric(z, ratio(alpha)?, tol).map_err(to_py)
}

#[pyfunction]
fn stieltjes_at_zero_closed(alpha: f64) -> PyResult<f64> {
    spectra::stieltjes_at_zero_closed(ratio(alpha)?).map_err(to_py)
}

/// Ascending eigenvalues of `XᵀX/N` for an `n × p` standard normal `X`.
#[pyfunction]
fn sample_wishart_spectrum(py: Python<'_>, n: usize, p: usize, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(|| spectra::sample_wishart_spectrum(n, p, seed))
        .map(|s| s.into_vec())
        .map_err(to_py)
}

/// `{"sup_cdf": .., "l1": ..}` between an empirical spectrum and `MPLaw(p/n)`.
#[pyfunction]
#[pyo3(signature = (eigenvalues, n, p, bins = 40))]
fn compare_mp<'py>(py: Python<'py>, eigenvalues: Vec<f64>, n: usize, p: usize, bins: usize) -> PyResult<Bound<'py, PyDict>> {
    let spec = spectra::EmpiricalSpectrum::new(eigenvalues, n, p).map_err(to_py)?;
    let law = spectra::MPLaw::new(spec.alpha());
    let d = spectra::compare_empirical(&spec, &law, bins).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("sup_cdf", d.sup_cdf)?;
    out.set_item("l1", d.l1_density)?;
    Ok(out)
}

#[pyfunction]
fn page_entropy_analytic(s_bh: f64, alpha: f64) -> PyResult<f64> {
    Ok(pagecurve::page_entropy_analytic(s_bh, ratio(alpha)?))
}

#[pyfunction]
#[pyo3(signature = (s_bh, alpha, tol = 1e-10))]
fn page_entropy_integral(s_bh: f64, alpha: f64, tol: f64) -> PyResult<f64> {
    pagecurve::page_entropy_integral(s_bh, ratio(alpha)?, tol).map_err(to_py)
}

#[pyfunction]
fn page_entropy_minmax(dim_a: usize, dim_b: usize) -> f64 {
    pagecurve::page_entropy_minmax(dim_a, dim_b)
}

#[pyfunction]
fn page_entropy_finite_mean(dim_a: usize, dim_b: usize) -> f64 {
    pagecurve::page_entropy_finite_mean(dim_a, dim_b)
}

#[pyfunction]
fn von_neumann_entropy(probabilities: Vec<f64>) -> PyResult<f64> {
    pagecurve::von_neumann_entropy(&probabilities).map_err(to_py)
}

/// `(mean, std_error, entropies)` over Haar-random global states.
#[pyfunction]
fn sample_random_bipartite_entropy(
    py: Python<'_>,
    dim_radiation: usize,
    dim_interior: usize,
    trials: usize,
    seed: u64,
) -> PyResult<(f64, f64, Vec<f64>)> {
    let s = py
        .detach(|| pagecurve::sample_random_bipartite_entropy(dim_radiation, dim_interior, trials, seed))
        .map_err(to_py)?;
    Ok((s.mean, s.std_error, s.entropies))
}

#[pyfunction]
fn variance_theory(alpha: f64, sigma: f64) -> PyResult<f64> {
    Ok(regression::variance_theory(ratio(alpha)?, sigma))
}

#[pyfunction]
fn variance_monte_carlo<'py>(
    py: Python<'py>,
    n: usize,
    p: usize,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let e = py
        .detach(|| regression::variance_monte_carlo(n, p, sigma, trials, seed))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("alpha", e.alpha.get())?;
    out.set_item("mean_sq_error", e.mean_sq_error)?;
    out.set_item("std_error", e.std_error)?;
    out.set_item("variance_component", e.variance_component)?;
    out.set_item("bias_component", e.bias_component)?;
    out.set_item("trials", e.trials)?;
    out.set_item("skipped", e.skipped)?;
    Ok(out)
}

#[pyfunction]
fn least_squares(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Vec<f64>> {
    let fit = regression::least_squares(matrix(x)?.view(), Array1::from(y).view()).map_err(to_py)?;
    Ok(fit.w_hat.to_vec())
}

#[pyfunction]
fn min_norm(x: Vec<Vec<f64>>, y: Vec<f64>) -> PyResult<Vec<f64>> {
    let fit = regression::min_norm(matrix(x)?.view(), Array1::from(y).view()).map_err(to_py)?;
    Ok(fit.w_hat.to_vec())
}

/// `‖(Π − I) v‖ / ‖v‖` for the row-space projection of `data`; requires `P ≥ N`.
#[pyfunction]
fn recovery_residual(data: Vec<Vec<f64>>, v: Vec<f64>) -> PyResult<f64> {
    let test = qregression::TestState::new(Array1::from(v), 0.0).map_err(to_py)?;
    qregression::recovery_projection_residual(matrix(data)?.view(), &test).map_err(to_py)
}

/// One dict per grid point with the quantum double-descent statistics.
#[pyfunction]
#[pyo3(signature = (interior_dim, n_labels, alphas, sigma = 1.0, trials = 20, mode = "centered", seed = 0))]
#[allow(clippy::too_many_arguments)]
fn quantum_double_descent_sweep<'py>(
    py: Python<'py>,
    interior_dim: usize,
    n_labels: usize,
    alphas: Vec<f64>,
    sigma: f64,
    trials: usize,
    mode: &str,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mode: qregression::GenerationMode = mode.parse().map_err(to_py)?;
    let rows = py
        .detach(|| qregression::quantum_double_descent_sweep(interior_dim, n_labels, &alphas, sigma, trials, mode, seed))
        .map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("alpha", r.alpha)?;
            d.set_item("n_features", r.n_features)?;
            d.set_item("mean_sq_error", r.mean_sq_error)?;
            d.set_item("std_error", r.std_error)?;
            d.set_item("variance_component", r.variance_component)?;
            d.set_item("bias_component", r.bias_component)?;
            d.set_item("theory", r.theory)?;
            d.set_item("recovery_rate", r.recovery_rate)?;
            d.set_item("skipped", r.skipped)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
fn derive_trial_seed(master_seed: u64, label: &str, index: u64) -> u64 {
    harness::derive_trial_seed(master_seed, label, index)
}

/// Runs a harness command and returns `(csv_path, metadata_path)`.
#[pyfunction]
#[pyo3(signature = (command, out, seed = 0, **params))]
fn run_experiment(
    py: Python<'_>,
    command: &str,
    out: PathBuf,
    seed: u64,
    params: Option<&Bound<'_, PyDict>>,
) -> PyResult<(String, String)> {
    let usage = |e: harness::HarnessError| PyValueError::new_err(e.to_string());
    let mut cfg = ExperimentConfig::new(command.parse().map_err(usage)?);
    cfg.master_seed = seed;
    cfg.output_path = out;
    if let Some(params) = params {
        for (k, v) in params.iter() {
            let key: String = k.extract()?;
            let value = match v.extract::<Vec<f64>>() {
                Ok(list) => list.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
                Err(_) => v.str()?.to_string(),
            };
            cfg.set(&key, &value).map_err(usage)?;
        }
    }
    let outcome = py.detach(|| harness::run(&cfg)).map_err(|e| match e {
        harness::HarnessError::Usage(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    })?;
    Ok((
        outcome.data_path.display().to_string(),
        outcome.metadata_path.display().to_string(),
    ))
}

#[pymodule]
fn bhdd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", harness::VERSION)?;
    m.add_class::<PyMPLaw>()?;
    m.add_function(wrap_pyfunction!(stieltjes_numeric, m)?)?;
    m.add_function(wrap_pyfunction!(stieltjes_at_zero_closed, m)?)?;
    m.add_function(wrap_pyfunction!(sample_wishart_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(compare_mp, m)?)?;
    m.add_function(wrap_pyfunction!(page_entropy_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(page_entropy_integral, m)?)?;
    m.add_function(wrap_pyfunction!(page_entropy_minmax, m)?)?;
    m.add_function(wrap_pyfunction!(page_entropy_finite_mean, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(sample_random_bipartite_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(variance_theory, m)?)?;
    m.add_function(wrap_pyfunction!(variance_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(least_squares, m)?)?;
    m.add_function(wrap_pyfunction!(min_norm, m)?)?;
    m.add_function(wrap_pyfunction!(recovery_residual, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_double_descent_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(derive_trial_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
