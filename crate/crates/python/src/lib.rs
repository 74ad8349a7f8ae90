use nalgebra::{DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyString, PyTuple};

use pdestream::analysis::TruthTrack;
use pdestream::harness::{
    run_experiment as run_sweep, write_results, ExperimentConfig, MetricsRow, OnlineIdentifier, OnlineSettings,
};
use pdestream::sims::{simulate as run_sim, truth_track};
use pdestream::sparse::{self, Lambda};
use pdestream::tensor::{Field, SpatialGrid};
use pdestream::weakform::{build_library, Lhs};
use pdestream::Error;

create_exception!(pdestream, ConfigError, PyValueError);
create_exception!(pdestream, DivergenceError, PyArithmeticError);
create_exception!(pdestream, PdeStreamError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Config(_) | Error::Unstable(_) => ConfigError::new_err(msg),
        Error::Diverged(_) | Error::SimulationDiverged { .. } | Error::NonFinite(_) => DivergenceError::new_err(msg),
        _ => PdeStreamError::new_err(msg),
    }
}

// python values as config text: sequences join with commas
fn config_value(v: &Bound<'_, PyAny>) -> PyResult<String> {
    if v.is_instance_of::<PyString>() {
        return v.extract();
    }
    if v.is_instance_of::<PyList>() || v.is_instance_of::<PyTuple>() {
        let parts = v
            .try_iter()?
            .map(|x| Ok(x?.str()?.to_string()))
            .collect::<PyResult<Vec<String>>>()?;
        return Ok(parts.join(","));
    }
    Ok(v.str()?.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("G must be a non-empty rectangular list of rows"));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

fn parse_lhs(lhs: &str) -> PyResult<Lhs> {
    match lhs {
        "dt" => Ok(Lhs::Dt),
        "dtt" => Ok(Lhs::Dtt),
        _ => Err(PyValueError::new_err(format!("lhs must be 'dt' or 'dtt', got '{lhs}'"))),
    }
}

/// Experiment configuration; keyword arguments are config keys.
#[pyclass(name = "Config", module = "pdestream")]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (problem = "ks", **keys))]
    fn new(problem: &str, keys: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = ExperimentConfig::new(problem.parse().map_err(to_py)?);
        if let Some(keys) = keys {
            for (k, v) in keys.iter() {
                inner.set(&k.extract::<String>()?, &config_value(&v)?).map_err(to_py)?;
            }
        }
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ExperimentConfig::parse(text).map_err(to_py)?,
        })
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let mut next = self.inner.clone();
        next.set(key, &config_value(value)?).map_err(to_py)?;
        next.validate().map_err(to_py)?;
        self.inner = next;
        Ok(())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn problem(&self) -> String {
        self.inner.problem.to_string()
    }

    #[getter]
    fn k_mem(&self) -> usize {
        self.inner.k_mem
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.sim.shape.clone()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.sim.dx()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.sim.dt
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(problem={}, k_mem={}, shape={:?})",
            self.inner.problem, self.inner.k_mem, self.inner.sim.shape
        )
    }
}

/// Column labels of the candidate library.
#[pyfunction]
#[pyo3(signature = (dim, lhs = "dt"))]
fn library(dim: usize, lhs: &str) -> PyResult<Vec<String>> {
    Ok(build_library(dim, parse_lhs(lhs)?).map_err(to_py)?.labels())
}

#[pyfunction]
fn hard_threshold(w: Vec<f64>, lam: f64) -> Vec<f64> {
    sparse::hard_threshold(&DVector::from_vec(w), Lambda::Uniform(lam))
        .iter()
        .copied()
        .collect()
}

/// Modified sequential thresholded least squares at one threshold.
#[pyfunction]
fn mstls(g: Vec<Vec<f64>>, b: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
    let g = matrix(&g)?;
    if b.len() != g.nrows() {
        return Err(PyValueError::new_err("b must have one entry per row of G"));
    }
    Ok(sparse::mstls(&g, &DVector::from_vec(b), lam).weights.iter().copied().collect())
}

/// Threshold grid search; returns `(lambda, weights)`.
#[pyfunction]
#[pyo3(signature = (g, b, grid = None))]
fn mstls_grid_search(g: Vec<Vec<f64>>, b: Vec<f64>, grid: Option<Vec<f64>>) -> PyResult<(f64, Vec<f64>)> {
    let g = matrix(&g)?;
    if b.len() != g.nrows() {
        return Err(PyValueError::new_err("b must have one entry per row of G"));
    }
    let grid = grid.unwrap_or_else(sparse::default_lambda_grid);
    let r = sparse::mstls_grid_search(&g, &DVector::from_vec(b), &grid).map_err(to_py)?;
    Ok((r.lambda, r.weights.iter().copied().collect()))
}

/// Clean snapshots from the configured simulator, each flattened row-major.
#[pyfunction]
fn simulate(py: Python<'_>, config: PyRef<'_, PyConfig>) -> PyResult<Vec<Vec<f64>>> {
    let sim = config.inner.sim.clone();
    let fields = py.detach(|| run_sim(&sim)).map_err(to_py)?;
    Ok(fields.into_iter().map(Field::into_values).collect())
}

/// Full noise × trials sweep. Writes the CSV tables when `out` is given.
#[pyfunction]
#[pyo3(signature = (config, out = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config: PyRef<'_, PyConfig>,
    out: Option<String>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = config.inner.clone();
    let res = py
        .detach(|| {
            let res = run_sweep(&cfg)?;
            if let Some(dir) = &out {
                write_results(&cfg, &res, dir.as_ref())?;
            }
            Ok(res)
        })
        .map_err(to_py)?;
    let mut trials = Vec::with_capacity(res.trials.len());
    for t in &res.trials {
        let d = PyDict::new(py);
        d.set_item("noise", t.sigma)?;
        d.set_item("trial", t.trial)?;
        d.set_item("holds_identification", t.holds_identification())?;
        d.set_item("identified_from_step", t.identified_from().map(|i| t.rows[i].step))?;
        d.set_item("max_e2_after_identification", t.max_e2_after_identification())?;
        d.set_item("online_lstsq_calls", t.online_lstsq_calls)?;
        d.set_item("final_weights", t.rows.last().map(|r| r.weights.clone()))?;
        trials.push(d);
    }
    Ok(trials)
}

fn row_dict<'py>(py: Python<'py>, r: &MetricsRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("step", r.step)?;
    d.set_item("t", r.t)?;
    d.set_item("lambda", r.lambda)?;
    d.set_item("support_size", r.support_size)?;
    d.set_item("tpr", r.tpr)?;
    d.set_item("e2", r.e2)?;
    d.set_item("objective", r.objective)?;
    d.set_item("regret_cum", r.regret_cum)?;
    d.set_item("wall_ms", r.wall_ms)?;
    d.set_item("weights", r.weights.clone())?;
    Ok(d)
}

/// Streaming identifier: push one flattened snapshot at a time.
///
/// The first `k_mem - 1` pushes return `None`; the `k_mem`-th runs the
/// offline solve and every later push is one online update.
#[pyclass(module = "pdestream")]
struct Identifier {
    settings: OnlineSettings,
    grid: SpatialGrid,
    truth: Option<TruthTrack>,
    pending: Vec<Field>,
    online: Option<OnlineIdentifier>,
    labels: Vec<String>,
    next_step: u64,
}

#[pymethods]
impl Identifier {
    #[new]
    #[pyo3(signature = (config, truth = false))]
    fn new(config: PyRef<'_, PyConfig>, truth: bool) -> PyResult<Self> {
        let cfg = &config.inner;
        let settings = cfg.online_settings();
        let lib = build_library(cfg.problem.dim(), settings.lhs).map_err(to_py)?;
        let truth = if truth {
            Some(truth_track(cfg.problem, &lib).map_err(to_py)?)
        } else {
            None
        };
        Ok(Self {
            grid: SpatialGrid::new(&cfg.sim.shape, cfg.sim.dx(), cfg.sim.dt).map_err(to_py)?,
            settings,
            truth,
            pending: Vec::new(),
            online: None,
            labels: lib.labels(),
            next_step: 0,
        })
    }

    fn push<'py>(&mut self, py: Python<'py>, values: Vec<f64>) -> PyResult<Option<Bound<'py, PyDict>>> {
        let field = Field::new(self.grid.clone(), values, self.next_step).map_err(to_py)?;
        let row = match &mut self.online {
            Some(id) => py.detach(|| id.step(&field)).map_err(to_py)?,
            None => {
                self.pending.push(field);
                if self.pending.len() < self.settings.k_mem {
                    self.next_step += 1;
                    return Ok(None);
                }
                let (settings, pending, truth) = (&self.settings, &self.pending, self.truth.take());
                let (id, row) = py
                    .detach(|| OnlineIdentifier::offline(settings, pending, truth))
                    .map_err(to_py)?;
                self.online = Some(id);
                self.pending.clear();
                row
            }
        };
        self.next_step += 1;
        Ok(Some(row_dict(py, &row)?))
    }

    #[getter]
    fn ready(&self) -> bool {
        self.online.is_some()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    #[getter]
    fn weights(&self) -> Option<Vec<f64>> {
        self.online.as_ref().map(|id| id.weights().iter().copied().collect())
    }
}

#[pymodule(name = "pdestream")]
mod pdestream_py {
    #[pymodule_export]
    use super::{
        hard_threshold, library, mstls, mstls_grid_search, run_experiment, simulate, ConfigError, DivergenceError,
        Identifier, PdeStreamError, PyConfig,
    };
}
