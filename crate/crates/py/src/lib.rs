//! Python bindings. Matrices cross the boundary as nested lists of
//! `complex`; reports come back as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use projchan_core::additivity::additivity_gap as core_additivity_gap;
use projchan_core::capacity::{auto_group, capacity_weakcov, verify_weak_covariance};
use projchan_core::channels::{ChannelFile, DensityMatrix, QuantumChannel};
use projchan_core::entropy::{
    characterize as core_characterize, max_output_norm, min_output_entropy, renyi_entropy as core_renyi,
    FormSummary, OptConfig, RenyiOrder, DEFAULT_ALPHA_GRID,
};
use projchan_core::eof::{eof_upper, example9_state as core_example9, BipartiteState, EofConfig};
use projchan_core::linalg::{ComplexMatrix, C64};
use projchan_core::report::to_value;
use projchan_core::zoo::{build, ChannelSpec};
use projchan_core::Error;

const DEFAULT_SEED: u64 = 12648430;

type Rows = Vec<Vec<C64>>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(py_err)
}

fn rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn state(rows: Rows) -> PyResult<DensityMatrix> {
    DensityMatrix::new(matrix(rows)?).map_err(py_err)
}

fn alpha(a: f64) -> PyResult<RenyiOrder> {
    RenyiOrder::new(a).map_err(py_err)
}

fn config(starts: usize, seed: u64, tol: f64) -> PyResult<OptConfig> {
    let cfg = OptConfig {
        starts,
        seed,
        tol,
        ..OptConfig::default()
    };
    cfg.check().map_err(py_err)?;
    Ok(cfg)
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let items = items.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, x) in map {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn report<'py, T: serde::Serialize>(py: Python<'py>, r: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &to_value(r).map_err(py_err)?)
}

/// A completely positive trace-preserving map on `C^d`.
#[pyclass(module = "projchan", frozen)]
struct Channel {
    inner: QuantumChannel,
    spec: Option<ChannelSpec>,
}

#[pymethods]
impl Channel {
    /// Builds a zoo channel from a spec string such as `"wh:d=3"`.
    #[staticmethod]
    fn from_spec(spec: &str) -> PyResult<Self> {
        let parsed: ChannelSpec = spec.parse().map_err(py_err)?;
        let built = build(&parsed).map_err(py_err)?;
        Ok(Self {
            inner: built.channel,
            spec: Some(parsed),
        })
    }

    /// Validated channel from Kraus operators.
    #[staticmethod]
    fn from_kraus(kraus: Vec<Rows>) -> PyResult<Self> {
        let file = ChannelFile {
            dim: kraus.first().map_or(0, |k| k.len()),
            kraus: kraus.into_iter().map(matrix).collect::<PyResult<_>>()?,
        };
        Ok(Self {
            inner: file.into_channel().map_err(py_err)?,
            spec: None,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = ChannelFile::parse(text).map_err(py_err)?;
        Ok(Self {
            inner: file.into_channel().map_err(py_err)?,
            spec: None,
        })
    }

    #[staticmethod]
    fn identity(d: usize) -> Self {
        Self {
            inner: QuantumChannel::identity(d),
            spec: None,
        }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn kraus(&self) -> Vec<Rows> {
        self.inner.kraus().iter().map(rows).collect()
    }

    /// `(T (x) id)(Omega)`, trace one.
    fn choi(&self) -> Rows {
        rows(self.inner.choi())
    }

    fn apply(&self, rho: Rows) -> PyResult<Rows> {
        let out = self.inner.apply(&state(rho)?).map_err(py_err)?;
        Ok(rows(out.matrix()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&ChannelFile::from_channel(&self.inner))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.inner.validate())
    }

    fn is_ppt<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.inner.is_ppt_choi().map_err(py_err)?)
    }

    fn stinespring<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        report(py, &self.inner.stinespring())
    }

    /// `(m, d, projector)` summary for zoo channels, `None` otherwise.
    fn projective_form<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyAny>>> {
        let Some(spec) = &self.spec else {
            return Ok(None);
        };
        let built = build(spec).map_err(py_err)?;
        let Some(form) = built.form else {
            return Ok(None);
        };
        let summary = report(py, &FormSummary::new(&form, &self.inner))?;
        summary.set_item("projector", rows(&form.projector))?;
        Ok(Some(summary))
    }

    #[pyo3(signature = (alpha = 1.0, starts = 64, seed = DEFAULT_SEED, tol = 1e-12))]
    fn min_output_entropy<'py>(
        &self,
        py: Python<'py>,
        alpha: f64,
        starts: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let (a, cfg) = (self::alpha(alpha)?, config(starts, seed, tol)?);
        let r = py.detach(|| min_output_entropy(&self.inner, a, &cfg)).map_err(py_err)?;
        report(py, &r)
    }

    #[pyo3(signature = (starts = 64, seed = DEFAULT_SEED, tol = 1e-12))]
    fn max_output_norm<'py>(
        &self,
        py: Python<'py>,
        starts: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cfg = config(starts, seed, tol)?;
        let r = py.detach(|| max_output_norm(&self.inner, &cfg)).map_err(py_err)?;
        report(py, &r)
    }

    #[pyo3(signature = (alphas = None, starts = 64, seed = DEFAULT_SEED, tol = 1e-12))]
    fn characterize<'py>(
        &self,
        py: Python<'py>,
        alphas: Option<Vec<f64>>,
        starts: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let grid = alphas
            .unwrap_or_else(|| DEFAULT_ALPHA_GRID.to_vec())
            .into_iter()
            .map(alpha)
            .collect::<PyResult<Vec<_>>>()?;
        let cfg = config(starts, seed, tol)?;
        let r = py.detach(|| core_characterize(&self.inner, &grid, &cfg)).map_err(py_err)?;
        report(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("Channel(dim={}, kraus={})", self.inner.dim(), self.inner.kraus().len())
    }
}

/// Renyi entropy in bits; `alpha = float("inf")` gives the min-entropy.
#[pyfunction]
fn renyi_entropy(rho: Rows, alpha: f64) -> PyResult<f64> {
    Ok(core_renyi(&state(rho)?, self::alpha(alpha)?))
}

#[pyfunction]
#[pyo3(signature = (channels, alpha = 1.0, starts = 64, seed = DEFAULT_SEED))]
fn additivity_gap<'py>(
    py: Python<'py>,
    channels: Vec<PyRef<'py, Channel>>,
    alpha: f64,
    starts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let list: Vec<QuantumChannel> = channels.iter().map(|c| c.inner.clone()).collect();
    let (a, cfg) = (self::alpha(alpha)?, config(starts, seed, 1e-12)?);
    let r = py.detach(|| core_additivity_gap(&list, a, &cfg)).map_err(py_err)?;
    report(py, &r)
}

/// Capacity of a zoo channel under its default symmetry group.
#[pyfunction]
#[pyo3(signature = (spec, starts = 64, seed = DEFAULT_SEED))]
fn capacity<'py>(py: Python<'py>, spec: &str, starts: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let spec: ChannelSpec = spec.parse().map_err(py_err)?;
    let cfg = config(starts, seed, 1e-12)?;
    let r = py
        .detach(|| {
            let ch = build(&spec)?.channel;
            let g = auto_group(&spec, seed)?;
            capacity_weakcov(&ch, &g.rho0, &g.pi, &g.big_pi, &cfg)
        })
        .map_err(py_err)?;
    report(py, &r)
}

#[pyfunction]
#[pyo3(signature = (spec, seed = DEFAULT_SEED))]
fn covariance<'py>(py: Python<'py>, spec: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let spec: ChannelSpec = spec.parse().map_err(py_err)?;
    let r = py
        .detach(|| {
            let ch = build(&spec)?.channel;
            let g = auto_group(&spec, seed)?;
            verify_weak_covariance(&ch, &g.rho0, &g.pi, &g.big_pi)
        })
        .map_err(py_err)?;
    let out = report(py, &r)?;
    out.set_item("holds", r.holds())?;
    Ok(out)
}

/// Upper bound on the entanglement of formation of a state on `C^dim_a (x) C^dim_b`.
#[pyfunction]
#[pyo3(signature = (rho, dim_a, dim_b, starts = 8, seed = DEFAULT_SEED, ensemble_size = None))]
fn eof<'py>(
    py: Python<'py>,
    rho: Rows,
    dim_a: usize,
    dim_b: usize,
    starts: usize,
    seed: u64,
    ensemble_size: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let st = BipartiteState::new(dim_a, dim_b, state(rho)?).map_err(py_err)?;
    let cfg = EofConfig {
        ensemble_size,
        ..EofConfig::from(&config(starts, seed, 1e-12)?)
    };
    let r = py.detach(|| eof_upper(&st, &cfg)).map_err(py_err)?;
    report(py, &r)
}

/// The 16-dimensional mixed state used as the entanglement-of-formation example.
#[pyfunction]
fn example9_state() -> Rows {
    rows(core_example9().state.matrix())
}

#[pymodule]
fn projchan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Channel>()?;
    m.add_function(wrap_pyfunction!(renyi_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(additivity_gap, m)?)?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(covariance, m)?)?;
    m.add_function(wrap_pyfunction!(eof, m)?)?;
    m.add_function(wrap_pyfunction!(example9_state, m)?)?;
    Ok(())
}
