//! Python bindings. Parameter points are dicts of floats, momenta and
//! h-vectors are lists, and `beta=None` means zero temperature.

use std::collections::BTreeMap;
use std::path::PathBuf;

use kfid_core::scan::{self, RunOptions};
use kfid_core::{Beta, Error, GibbsContext, HVector, ModelSpec, Momentum, ParamPoint};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

type Event = (f64, Vec<f64>, f64, usize);
type ArtifactRow = (String, String, String);

fn params(q: BTreeMap<String, f64>) -> ParamPoint {
    q.into_iter().collect()
}

fn beta(b: Option<f64>) -> PyResult<Beta> {
    match b {
        None => Ok(Beta::Infinite),
        Some(b) => Beta::finite(b).map_err(py_err),
    }
}

fn model(name: &str) -> PyResult<ModelSpec> {
    ModelSpec::lookup(name).map_err(py_err)
}

fn hvec(v: Vec<f64>) -> PyResult<HVector> {
    HVector::new(&v).map_err(py_err)
}

/// A scalar field over a rectangular momentum window, kx fastest.
#[pyclass(module = "kfid", frozen)]
struct Grid {
    inner: kfid_core::Grid2D,
}

#[pymethods]
impl Grid {
    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.ny
    }

    #[getter]
    fn bounds(&self) -> [[f64; 2]; 2] {
        self.inner.bounds
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn get(&self, ix: usize, iy: usize) -> PyResult<f64> {
        if ix >= self.inner.nx || iy >= self.inner.ny {
            return Err(PyValueError::new_err(format!(
                "index ({ix}, {iy}) out of range"
            )));
        }
        Ok(self.inner.get(ix, iy))
    }

    fn coord(&self, axis: usize, i: usize) -> PyResult<f64> {
        if axis > 1 {
            return Err(PyValueError::new_err("axis must be 0 or 1"));
        }
        Ok(self.inner.coord(axis, i))
    }

    /// `(index, value)` of the smallest non-sentinel value.
    fn min_defined(&self) -> Option<(usize, f64)> {
        self.inner.min_defined()
    }

    fn sentinel_count(&self) -> usize {
        self.inner.sentinel_count()
    }

    fn to_csv(&self) -> String {
        scan::grid_csv(&self.inner)
    }

    fn to_pgm(&self) -> PyResult<String> {
        scan::grid_pgm(&self.inner).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.values.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid({}x{})", self.inner.nx, self.inner.ny)
    }
}

/// `(name, dim_k, schema, summary)` for every model.
#[pyfunction]
fn models() -> Vec<(String, usize, Vec<String>, String)> {
    kfid_core::catalog()
        .into_iter()
        .map(|m| {
            (
                m.name().to_string(),
                m.dim_k,
                m.schema.iter().map(|s| s.to_string()).collect(),
                m.summary.to_string(),
            )
        })
        .collect()
}

/// h-vectors of every sector at `(q, k)`.
#[pyfunction]
fn eval_h(name: &str, q: BTreeMap<String, f64>, k: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let m = model(name)?;
    let k = Momentum::new(&k).map_err(py_err)?;
    let sectors = m.eval_sectors(&params(q), &k).map_err(py_err)?;
    Ok(sectors.iter().map(|h| h.components().to_vec()).collect())
}

#[pyfunction]
#[pyo3(signature = (h1, h2, beta=None))]
fn fidelity(h1: Vec<f64>, h2: Vec<f64>, beta: Option<f64>) -> PyResult<f64> {
    let b = self::beta(beta)?;
    Ok(kfid_core::fidelity_at(&hvec(h1)?, &hvec(h2)?, &b)
        .map_err(py_err)?
        .value())
}

#[pyfunction]
fn fidelity_pure(h1: Vec<f64>, h2: Vec<f64>) -> PyResult<f64> {
    Ok(kfid_core::fidelity_pure(&hvec(h1)?, &hvec(h2)?)
        .map_err(py_err)?
        .value())
}

#[pyfunction]
fn fidelity_gibbs(h1: Vec<f64>, h2: Vec<f64>, beta: f64) -> PyResult<f64> {
    let ctx = GibbsContext::new(beta).map_err(py_err)?;
    Ok(kfid_core::fidelity_gibbs(&hvec(h1)?, &hvec(h2)?, &ctx)
        .map_err(py_err)?
        .value())
}

/// Density-matrix reference value of the same fidelity.
#[pyfunction]
#[pyo3(signature = (h1, h2, beta=None))]
fn fidelity_oracle(h1: Vec<f64>, h2: Vec<f64>, beta: Option<f64>) -> PyResult<f64> {
    let b = self::beta(beta)?;
    Ok(kfid_core::fidelity_oracle(&hvec(h1)?, &hvec(h2)?, &b)
        .map_err(py_err)?
        .value())
}

#[pyfunction]
fn fidelity_ising_k(k: f64, h1: f64, h2: f64) -> PyResult<f64> {
    Ok(kfid_core::fidelity_ising_k(k, h1, h2)
        .map_err(py_err)?
        .value())
}

fn grid_for(m: &ModelSpec, n: usize, kz: f64) -> PyResult<kfid_core::GridSpec> {
    Ok(kfid_core::GridSpec::for_model(m, n, n)
        .map_err(py_err)?
        .with_kz(kz))
}

#[pyfunction]
#[pyo3(signature = (name, q1, q2, n=kfid_core::DEFAULT_GRID, beta=None, kz=0.0))]
fn fidelity_map(
    py: Python<'_>,
    name: &str,
    q1: BTreeMap<String, f64>,
    q2: BTreeMap<String, f64>,
    n: usize,
    beta: Option<f64>,
    kz: f64,
) -> PyResult<Grid> {
    let m = model(name)?;
    let g = grid_for(&m, n, kz)?;
    let b = self::beta(beta)?;
    let (q1, q2) = (params(q1), params(q2));
    let inner = py
        .detach(|| kfid_core::fidelity_map(&m, &q1, &q2, &g, &b))
        .map_err(py_err)?;
    Ok(Grid { inner })
}

#[pyfunction]
#[pyo3(signature = (name, q, n=kfid_core::DEFAULT_GRID, kz=0.0))]
fn gap_map(
    py: Python<'_>,
    name: &str,
    q: BTreeMap<String, f64>,
    n: usize,
    kz: f64,
) -> PyResult<Grid> {
    let m = model(name)?;
    let g = grid_for(&m, n, kz)?;
    let q = params(q);
    let inner = py
        .detach(|| kfid_core::gap_map(&m, &q, &g))
        .map_err(py_err)?;
    Ok(Grid { inner })
}

#[pyfunction]
fn zero_exponent(grid: &Grid, k0: Vec<f64>, radius: f64) -> PyResult<f64> {
    let k = Momentum::new(&k0).map_err(py_err)?;
    kfid_core::zero_exponent(&grid.inner, &k, radius).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (name, q, n=60))]
fn chern_number(name: &str, q: BTreeMap<String, f64>, n: usize) -> PyResult<i32> {
    kfid_core::chern_number(&model(name)?, &params(q), n).map_err(py_err)
}

#[pyfunction]
fn z2_strong(q: BTreeMap<String, f64>) -> PyResult<i32> {
    kfid_core::z2_strong(&model("dirac3d_ti")?, &params(q)).map_err(py_err)
}

/// `(k, n1 . n2)` at the eight TRI momenta.
#[pyfunction]
fn tri_antipodality(
    q1: BTreeMap<String, f64>,
    q2: BTreeMap<String, f64>,
) -> PyResult<Vec<(Vec<f64>, f64)>> {
    let list = kfid_core::tri_antipodality(&model("dirac3d_ti")?, &params(q1), &params(q2))
        .map_err(py_err)?;
    Ok(list
        .into_iter()
        .map(|(k, v)| (k.components().to_vec(), v))
        .collect())
}

/// `(s, k, gap, sector)` for every gap closing on the segment `q1 -> q2`.
#[pyfunction]
#[pyo3(signature = (name, q1, q2, n=kfid_core::DEFAULT_GRID, n_s=120, tol=1e-8))]
fn gapless_on_segment(
    py: Python<'_>,
    name: &str,
    q1: BTreeMap<String, f64>,
    q2: BTreeMap<String, f64>,
    n: usize,
    n_s: usize,
    tol: f64,
) -> PyResult<Vec<Event>> {
    let m = model(name)?;
    let g = grid_for(&m, n, 0.0)?;
    let (q1, q2) = (params(q1), params(q2));
    let r = py
        .detach(|| kfid_core::gapless_on_segment(&m, &q1, &q2, &g, n_s, tol))
        .map_err(py_err)?;
    Ok(r.events
        .into_iter()
        .map(|e| (e.s, e.k.components().to_vec(), e.gap, e.sector))
        .collect())
}

/// `(direction, lambda, verified_gap)` of the critical line through `q1`, `q2` at `k`.
#[pyfunction]
#[pyo3(signature = (name, q1, q2, k, tol=1e-8))]
fn critical_line(
    name: &str,
    q1: BTreeMap<String, f64>,
    q2: BTreeMap<String, f64>,
    k: Vec<f64>,
    tol: f64,
) -> PyResult<(BTreeMap<String, f64>, f64, f64)> {
    let k = Momentum::new(&k).map_err(py_err)?;
    let line = kfid_core::critical_line(&model(name)?, &params(q1), &params(q2), &k, tol)
        .map_err(py_err)?;
    let dir = line
        .direction
        .iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    Ok((dir, line.lambda, line.verified_gap))
}

/// `(all_passed, text report)`.
#[pyfunction]
fn counterexample_suite(py: Python<'_>) -> PyResult<(bool, String)> {
    let r = py.detach(kfid_core::counterexample_suite).map_err(py_err)?;
    Ok((r.all_passed(), r.to_text()))
}

/// Parses a job config and returns its normalized text.
#[pyfunction]
fn parse_config(text: &str) -> PyResult<String> {
    Ok(scan::parse_config(text).map_err(py_err)?.to_string())
}

/// Runs a job config; returns the report and `(kind, path, sha256)` per output.
#[pyfunction]
#[pyo3(signature = (text, out_dir=None, workers=0))]
fn run_config(
    py: Python<'_>,
    text: &str,
    out_dir: Option<PathBuf>,
    workers: usize,
) -> PyResult<(String, Vec<ArtifactRow>)> {
    let job = scan::parse_config(text).map_err(py_err)?;
    let opts = RunOptions { workers, out_dir };
    let r = py.detach(|| scan::run_job(&job, &opts)).map_err(py_err)?;
    let artifacts = r
        .artifacts
        .into_iter()
        .map(|a| {
            (
                a.kind.name().to_string(),
                a.path.display().to_string(),
                a.sha256,
            )
        })
        .collect();
    Ok((r.report, artifacts))
}

#[pymodule]
fn kfid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GAPLESS_SENTINEL", kfid_core::GAPLESS_SENTINEL)?;
    m.add_class::<Grid>()?;
    m.add_function(wrap_pyfunction!(models, m)?)?;
    m.add_function(wrap_pyfunction!(eval_h, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_pure, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_gibbs, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_ising_k, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_map, m)?)?;
    m.add_function(wrap_pyfunction!(gap_map, m)?)?;
    m.add_function(wrap_pyfunction!(zero_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(chern_number, m)?)?;
    m.add_function(wrap_pyfunction!(z2_strong, m)?)?;
    m.add_function(wrap_pyfunction!(tri_antipodality, m)?)?;
    m.add_function(wrap_pyfunction!(gapless_on_segment, m)?)?;
    m.add_function(wrap_pyfunction!(critical_line, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_suite, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
