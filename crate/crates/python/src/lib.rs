//! Python bindings. Built as the extension module `ambc`.

use ambc_core::harness::{self, ExperimentConfig, MseParam, SweepResult, TrialRunner};
use ambc_core::{CombinerScheme, CombinerWeights};
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString, PyTuple};

fn err(e: ambc_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_toml(v: &Bound<'_, PyAny>) -> PyResult<toml::Value> {
    if v.is_instance_of::<PyBool>() {
        Ok(toml::Value::Boolean(v.extract()?))
    } else if v.is_instance_of::<PyInt>() {
        Ok(toml::Value::Integer(v.extract()?))
    } else if v.is_instance_of::<PyFloat>() {
        Ok(toml::Value::Float(v.extract()?))
    } else if v.is_instance_of::<PyString>() {
        Ok(toml::Value::String(v.extract()?))
    } else if let Ok(d) = v.cast::<PyDict>() {
        let mut t = toml::Table::new();
        for (k, x) in d.iter() {
            t.insert(k.extract()?, to_toml(&x)?);
        }
        Ok(toml::Value::Table(t))
    } else if v.is_instance_of::<PyList>() || v.is_instance_of::<PyTuple>() {
        v.try_iter()?
            .map(|x| to_toml(&x?))
            .collect::<PyResult<Vec<_>>>()
            .map(toml::Value::Array)
    } else {
        Err(PyTypeError::new_err(format!(
            "unsupported config value {v}"
        )))
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Experiment configuration. Keyword arguments use the config-file keys;
/// nested sections (`bd`, `ofdm`) take dicts.
#[pyclass(name = "Config", from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (toml = None, **kwargs))]
    fn new(toml: Option<&str>, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let parse = |s: &str| -> PyResult<toml::Table> {
            s.parse().map_err(|e| PyValueError::new_err(format!("{e}")))
        };
        let mut table = parse(&ExperimentConfig::default().to_toml_string().map_err(err)?)?;
        if let Some(s) = toml {
            merge(&mut table, parse(s)?);
        }
        if let Some(kw) = kwargs {
            if let toml::Value::Table(t) = to_toml(kw.as_any())? {
                merge(&mut table, t);
            }
        }
        let inner = ExperimentConfig::from_toml_str(&table.to_string()).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_file(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: ExperimentConfig::from_file(&path).map_err(err)?,
        })
    }

    /// Copy with the given keys changed.
    #[pyo3(signature = (**kwargs))]
    fn replace(&self, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        Self::new(Some(&self.to_toml()?), kwargs)
    }

    fn to_toml(&self) -> PyResult<String> {
        self.inner.to_toml_string().map_err(err)
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.trials
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn antennas(&self) -> usize {
        self.inner.antennas
    }

    #[getter]
    fn snr_grid(&self) -> Vec<f64> {
        self.inner.snr_grid.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(trials={}, seed={}, antennas={}, k={}, detector='{}', sync_mode='{}')",
            self.inner.trials,
            self.inner.seed,
            self.inner.antennas,
            self.inner.bd.k,
            self.inner.detector,
            self.inner.sync_mode
        )
    }
}

/// One sweep curve. Row data are exposed as parallel lists.
#[pyclass(name = "SweepResult", skip_from_py_object)]
struct PySweep {
    inner: SweepResult,
}

#[pymethods]
impl PySweep {
    #[getter]
    fn x_unit(&self) -> &str {
        &self.inner.x_unit
    }

    #[getter]
    fn metric(&self) -> &'static str {
        match self.inner.metric {
            harness::Metric::Ber => "ber",
            harness::Metric::Mse => "mse",
        }
    }

    #[getter]
    fn detector(&self) -> &str {
        &self.inner.detector
    }

    #[getter]
    fn combiner(&self) -> &str {
        &self.inner.combiner
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.x_value).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.value).collect()
    }

    #[getter]
    fn analytic(&self) -> Vec<Option<f64>> {
        self.inner.rows.iter().map(|r| r.analytic).collect()
    }

    #[getter]
    fn ci_halfwidth(&self) -> Vec<f64> {
        self.inner.rows.iter().map(|r| r.ci_halfwidth).collect()
    }

    #[getter]
    fn trials(&self) -> Vec<usize> {
        self.inner.rows.iter().map(|r| r.trials).collect()
    }

    fn to_csv(&self) -> PyResult<String> {
        harness::to_csv_string(std::slice::from_ref(&self.inner)).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SweepResult({} vs {}, {} points, detector='{}', combiner='{}')",
            self.metric(),
            self.inner.x_unit,
            self.inner.rows.len(),
            self.inner.detector,
            self.inner.combiner
        )
    }
}

fn sweep(r: SweepResult) -> PySweep {
    PySweep { inner: r }
}

fn weights(theta: Vec<f64>) -> PyResult<CombinerWeights> {
    CombinerWeights::new(theta).map_err(err)
}

fn scheme(s: &str) -> PyResult<CombinerScheme> {
    s.parse().map_err(err)
}

#[pyfunction]
fn q_function(x: f64) -> f64 {
    ambc_core::q_function(x)
}

#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    ambc_core::db_to_linear(db)
}

#[pyfunction]
fn linear_to_db(x: f64) -> f64 {
    ambc_core::linear_to_db(x)
}

/// `(mu0, var0, mu1, var1)` of the test statistic under each bit.
#[pyfunction]
fn statistic_moments(gamma: f64, j: usize) -> (f64, f64, f64, f64) {
    let m = ambc_core::statistic_moments(gamma, j);
    (m.mu0, m.var0, m.mu1, m.var1)
}

#[pyfunction]
fn optimal_threshold(gamma: f64, j: usize) -> f64 {
    ambc_core::optimal_threshold(gamma, j)
}

/// `(p_fa, p_md, p_e)` at threshold `epsilon`.
#[pyfunction]
fn ber_closed_form(gamma: f64, j: usize, epsilon: f64) -> (f64, f64, f64) {
    let b = ambc_core::ber_closed_form(gamma, j, epsilon);
    (b.p_fa, b.p_md, b.p_e)
}

#[pyfunction]
fn min_ber_single(gamma: f64, j: usize) -> f64 {
    ambc_core::min_ber_single(gamma, j).p_e
}

#[pyfunction]
fn min_ber_multi(theta: Vec<f64>, gamma: Vec<f64>, j: usize) -> PyResult<f64> {
    Ok(ambc_core::min_ber_multi(&weights(theta)?, &gamma, j)
        .map_err(err)?
        .p_e)
}

#[pyfunction]
fn multiantenna_threshold(theta: Vec<f64>, gamma: Vec<f64>, j: usize) -> PyResult<f64> {
    ambc_core::multiantenna_threshold(&weights(theta)?, &gamma, j).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (gamma, j, grid_step = 0.001))]
fn optimal_weights(gamma: Vec<f64>, j: usize, grid_step: f64) -> PyResult<Vec<f64>> {
    Ok(ambc_core::optimal_weights(&gamma, j, grid_step)
        .map_err(err)?
        .as_slice()
        .to_vec())
}

/// Weights of `"mrc"`, `"egc"` or `"sc"`.
#[pyfunction]
fn conventional_weights(scheme_name: &str, gamma: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(
        ambc_core::conventional_weights(scheme(scheme_name)?, &gamma)
            .map_err(err)?
            .as_slice()
            .to_vec(),
    )
}

#[pyfunction]
fn pathloss_gain(distance_m: f64, fc_hz: f64) -> PyResult<f64> {
    ambc_core::pathloss_gain(distance_m, fc_hz).map_err(err)
}

#[pyfunction]
fn bd_rate(fs: f64, n: usize, nc: usize, k: usize) -> PyResult<f64> {
    ambc_core::bd_rate(fs, n, nc, k).map_err(err)
}

/// `(mean, variance)` of the timing metric at offset `l`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
fn q_metric_moments(
    l: usize,
    lf: usize,
    lb: usize,
    nc: usize,
    k2: usize,
    gamma: f64,
    gamma_d: f64,
    sigma2: f64,
) -> PyResult<(f64, f64)> {
    ambc_core::q_metric_moments(l, lf, lb, nc, k2, gamma, gamma_d, sigma2).map_err(err)
}

#[pyfunction]
fn ber_sweep(py: Python<'_>, cfg: PyConfig) -> PyResult<PySweep> {
    py.detach(|| harness::run_ber_sweep(&cfg.inner))
        .map(sweep)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (cfg, distances = None))]
fn distance_sweep(py: Python<'_>, cfg: PyConfig, distances: Option<Vec<f64>>) -> PyResult<PySweep> {
    let d = distances.unwrap_or_else(|| cfg.inner.distances.clone());
    py.detach(|| harness::run_distance_sweep(&cfg.inner, &d))
        .map(sweep)
        .map_err(err)
}

/// `param` is `"dh"`, `"d"` or `"l"`.
#[pyfunction]
#[pyo3(signature = (cfg, param = "l"))]
fn mse_sweep(py: Python<'_>, cfg: PyConfig, param: &str) -> PyResult<PySweep> {
    let p: MseParam = param.parse().map_err(err)?;
    py.detach(|| harness::run_mse_sweep(&cfg.inner, p))
        .map(sweep)
        .map_err(err)
}

#[pyfunction]
fn combiner_sweep(py: Python<'_>, cfg: PyConfig) -> PyResult<Vec<PySweep>> {
    py.detach(|| harness::run_combiner_sweep(&cfg.inner))
        .map(|v| v.into_iter().map(sweep).collect())
        .map_err(err)
}

/// Fading-averaged closed-form BER at each SNR of `snr_db`.
#[pyfunction]
fn analytic_curve(py: Python<'_>, cfg: PyConfig, snr_db: Vec<f64>) -> PyResult<Vec<f64>> {
    py.detach(|| harness::analytic_curve(&cfg.inner, &snr_db))
        .map_err(err)
}

/// One trial: `(sent, detected, per-antenna SNRs)`.
#[pyfunction]
#[pyo3(signature = (cfg, snr_db, seed, trial = 0))]
fn run_trial(cfg: PyConfig, snr_db: f64, seed: u64, trial: u64) -> PyResult<(u8, u8, Vec<f64>)> {
    let runner = TrialRunner::for_snr(&cfg.inner, snr_db).map_err(err)?;
    let r = runner
        .run(&mut harness::trial_rng(seed, 0, trial))
        .map_err(err)?;
    Ok((r.sent, r.detected, r.gamma))
}

/// One synchronisation pass as a dict of true and estimated parameters.
#[pyfunction]
#[pyo3(signature = (cfg, snr_db, seed, trial = 0))]
fn run_sync<'py>(
    py: Python<'py>,
    cfg: PyConfig,
    snr_db: f64,
    seed: u64,
    trial: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let runner = TrialRunner::for_snr(&cfg.inner, snr_db).map_err(err)?;
    let s = runner
        .run_sync(&mut harness::trial_rng(seed, 0, trial))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("dh", s.dh)?;
    d.set_item("dh_hat", s.dh_hat)?;
    d.set_item("d", s.d)?;
    d.set_item("d_hat", s.d_hat)?;
    d.set_item("l", s.l)?;
    d.set_item("l_hat", s.l_hat)?;
    d.set_item("sigma_u2", s.sigma_u2)?;
    d.set_item("sigma_u2_hat", s.sigma_u2_hat)?;
    Ok(d)
}

/// List of `(name, passed, detail)`.
#[pyfunction]
#[pyo3(signature = (cfg = None))]
fn selftest(cfg: Option<PyConfig>) -> PyResult<Vec<(String, bool, String)>> {
    let cfg = cfg.map(|c| c.inner).unwrap_or_default();
    Ok(harness::selftest(&cfg)
        .map_err(err)?
        .into_iter()
        .map(|c| (c.name, c.passed, c.detail))
        .collect())
}

#[pymodule]
fn ambc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PySweep>()?;
    m.add_function(wrap_pyfunction!(q_function, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(linear_to_db, m)?)?;
    m.add_function(wrap_pyfunction!(statistic_moments, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(ber_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(min_ber_single, m)?)?;
    m.add_function(wrap_pyfunction!(min_ber_multi, m)?)?;
    m.add_function(wrap_pyfunction!(multiantenna_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_weights, m)?)?;
    m.add_function(wrap_pyfunction!(conventional_weights, m)?)?;
    m.add_function(wrap_pyfunction!(pathloss_gain, m)?)?;
    m.add_function(wrap_pyfunction!(bd_rate, m)?)?;
    m.add_function(wrap_pyfunction!(q_metric_moments, m)?)?;
    m.add_function(wrap_pyfunction!(ber_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(distance_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(mse_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(combiner_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_curve, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_sync, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
