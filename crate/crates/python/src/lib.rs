//! Python bindings: channels, metrics, the polar decomposition, circuit
//! bounds and the seeded verification suites.
//!
//! Matrices cross the boundary as nested lists of Python complex numbers,
//! reports as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde::Serialize;
use serde_json::{json, Value};

use qpolar::bounds::{thm1_uni_evo, thm2_fid_evo, thm5_unitarity_decay, thm8_circuit, thm9_max_correction_multi, CircuitSpec};
use qpolar::channel::{apply, canonical, compose as compose_channels, validate_cptp};
use qpolar::genlib::{make_channel, FamilySpec};
use qpolar::io::{parse_channel, KrausJson};
use qpolar::matcore::identity;
use qpolar::metrics::{phi, unitarity, upsilon, MetricsReport};
use qpolar::polar::{channel_polar, classify, equability, infidelity_split, DEFAULT_KAPPA};
use qpolar::sweep::{fig3_configs, run_sweep, sweep_element, SweepConfig, SweepResult};
use qpolar::verify::{run_suite, to_csv, Suite, Summary};
use qpolar::{ComplexMatrix, KrausChannel, C64};

create_exception!(qpolar_py, QpolarError, PyValueError);

type Rows = Vec<Vec<C64>>;

fn err(e: qpolar::Error) -> PyErr {
    QpolarError::new_err(e.to_string())
}

fn value_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| QpolarError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn to_matrix(rows: &Rows) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(QpolarError::new_err("matrix must be square and non-empty"));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_matrix(m: &ComplexMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn target_or_identity(target: Option<Rows>, d: usize) -> PyResult<ComplexMatrix> {
    target.as_ref().map_or_else(|| Ok(identity(d)), to_matrix)
}

/// A CPTP map in Kraus form.
#[pyclass(name = "Channel", module = "qpolar_py", from_py_object)]
#[derive(Clone)]
struct PyChannel {
    inner: KrausChannel,
}

#[pymethods]
impl PyChannel {
    #[new]
    fn new(kraus: Vec<Rows>) -> PyResult<Self> {
        let ks = kraus.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        let inner = KrausChannel::new(ks).map_err(err)?;
        let rep = validate_cptp(&inner);
        if !rep.ok {
            return Err(err(qpolar::Error::NotTP(rep.tp_slack)));
        }
        Ok(Self { inner })
    }

    /// Named family, e.g. `Channel.family("depolarizing", 2, {"p": 0.9})`.
    #[staticmethod]
    #[pyo3(signature = (name, dim, params = None, seed = None))]
    fn family(name: &str, dim: usize, params: Option<std::collections::BTreeMap<String, f64>>, seed: Option<u64>) -> PyResult<Self> {
        let spec: FamilySpec = serde_json::from_value(json!({
            "family": name, "dim": dim, "params": params.unwrap_or_default(), "seed": seed,
        }))
        .map_err(|e| QpolarError::new_err(e.to_string()))?;
        Ok(Self { inner: make_channel(&spec).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_channel(text).map_err(err)?.channel })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&KrausJson::from_channel(&self.inner)).map_err(|e| QpolarError::new_err(e.to_string()))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    fn kraus(&self) -> Vec<Rows> {
        self.inner.kraus.iter().map(from_matrix).collect()
    }

    #[pyo3(signature = (target = None))]
    fn phi(&self, target: Option<Rows>) -> PyResult<f64> {
        phi(&self.inner, &target_or_identity(target, self.inner.dim)?).map_err(err)
    }

    fn upsilon(&self) -> f64 {
        upsilon(&self.inner)
    }

    fn unitarity(&self) -> f64 {
        unitarity(upsilon(&self.inner), self.inner.dim)
    }

    #[pyo3(signature = (target = None))]
    fn metrics<'py>(&self, py: Python<'py>, target: Option<Rows>) -> PyResult<Bound<'py, PyAny>> {
        let t = target_or_identity(target, self.inner.dim)?;
        to_py(py, &MetricsReport::compute(&self.inner, &t).map_err(err)?)
    }

    /// Weights, orthogonal Kraus operators and the degeneracy flag.
    fn canonical<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let can = canonical(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("weights", can.weights.clone())?;
        d.set_item("kraus", can.kraus.iter().map(from_matrix).collect::<Vec<_>>())?;
        d.set_item("degenerate_leading", can.degenerate_leading)?;
        Ok(d.into_any())
    }

    /// Polar unitary V, |A₁| and the decoherent factor D with A = V∘D.
    #[pyo3(signature = (strict = false))]
    fn polar<'py>(&self, py: Python<'py>, strict: bool) -> PyResult<Bound<'py, PyAny>> {
        let p = channel_polar(&self.inner, strict).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("v", from_matrix(&p.v))?;
        d.set_item("abs_lk", from_matrix(&p.a1_polar.psd))?;
        d.set_item("singular_values", p.a1_polar.singular_values.clone())?;
        d.set_item("unique", p.unique)?;
        d.set_item("decoherent", PyChannel { inner: p.decoherent_left.clone() })?;
        Ok(d.into_any())
    }

    #[pyo3(signature = (kappa = DEFAULT_KAPPA))]
    fn equability<'py>(&self, py: Python<'py>, kappa: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &equability(&self.inner, kappa).map_err(err)?)
    }

    #[pyo3(signature = (target = None))]
    fn infidelity_split<'py>(&self, py: Python<'py>, target: Option<Rows>) -> PyResult<Bound<'py, PyAny>> {
        let t = target_or_identity(target, self.inner.dim)?;
        to_py(py, &infidelity_split(&self.inner, &t).map_err(err)?)
    }

    #[pyo3(signature = (target = None, kappa = DEFAULT_KAPPA))]
    fn classify<'py>(&self, py: Python<'py>, target: Option<Rows>, kappa: f64) -> PyResult<Bound<'py, PyAny>> {
        let t = target_or_identity(target, self.inner.dim)?;
        to_py(py, &classify(&self.inner, &t, kappa).map_err(err)?)
    }

    /// `other` applied after this channel.
    fn then(&self, other: &PyChannel) -> PyResult<PyChannel> {
        Ok(PyChannel { inner: self.inner.then(&other.inner).map_err(err)? })
    }

    fn apply(&self, rho: Rows) -> PyResult<Rows> {
        Ok(from_matrix(&apply(&self.inner, &to_matrix(&rho)?).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Channel(dim={}, kraus_ops={})", self.inner.dim, self.inner.kraus.len())
    }
}

/// Channels composed in application order.
#[pyfunction]
fn compose(channels: Vec<PyChannel>) -> PyResult<PyChannel> {
    if channels.is_empty() {
        return Err(QpolarError::new_err("empty circuit"));
    }
    let chs: Vec<KrausChannel> = channels.into_iter().map(|c| c.inner).collect();
    Ok(PyChannel { inner: compose_channels(&chs).map_err(err)? })
}

/// Evolution bounds of a circuit; theorems outside their domain are skipped.
#[pyfunction]
#[pyo3(signature = (channels, targets = None))]
fn circuit_bounds<'py>(py: Python<'py>, channels: Vec<PyChannel>, targets: Option<Vec<Rows>>) -> PyResult<Bound<'py, PyAny>> {
    let targets = targets.map(|ts| ts.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()).transpose()?;
    let circuit = CircuitSpec::new(channels.into_iter().map(|c| c.inner).collect(), targets).map_err(err)?;
    let mut reports = Vec::new();
    let mut skipped = serde_json::Map::new();
    let mut keep = |name: &str, r: qpolar::Result<Vec<qpolar::bounds::BoundReport>>| match r {
        Ok(rs) => reports.extend(rs),
        Err(e) => {
            skipped.insert(name.into(), Value::String(e.to_string()));
        }
    };
    keep("thm1", thm1_uni_evo(&circuit).map(|r| vec![r]));
    keep("thm2", thm2_fid_evo(&circuit).map(|r| vec![r]));
    keep("thm5", thm5_unitarity_decay(&circuit, None).map(|r| vec![r.multiplicative, r.monotonicity, r.subadditivity]));
    keep("thm8", thm8_circuit(&circuit).map(|r| vec![r]));
    keep("thm9", thm9_max_correction_multi(&circuit).map(|r| vec![r]));
    to_py(py, &json!({ "bounds": reports, "skipped": skipped }))
}

/// Seeded verification suite; returns the summary and the per-case CSV.
#[pyfunction]
#[pyo3(signature = (suite, dims, trials, seed = 0))]
fn verify<'py>(py: Python<'py>, suite: &str, dims: Vec<usize>, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let suite = match suite {
        "lemmas" => Suite::Lemmas,
        "theorems" => Suite::Theorems,
        "appendix" => Suite::Appendix,
        s => return Err(QpolarError::new_err(format!("unknown suite {s}"))),
    };
    if trials == 0 {
        return Err(QpolarError::new_err("trials must be >= 1"));
    }
    let rows = py.detach(|| run_suite(suite, &dims, trials, seed)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("summary", to_py(py, &Summary::of(&rows))?)?;
    d.set_item("csv", to_csv(&rows))?;
    Ok(d.into_any())
}

fn sweep_to_py<'py>(py: Python<'py>, r: &SweepResult) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, r)
}

/// Depth sweep of a repeated family element against the identity.
#[pyfunction]
#[pyo3(signature = (name, dim, params, depth, stop = true))]
fn sweep<'py>(
    py: Python<'py>,
    name: &str,
    dim: usize,
    params: std::collections::BTreeMap<String, f64>,
    depth: usize,
    stop: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SweepConfig = serde_json::from_value(json!({
        "series": name, "element": { "family": name, "dim": dim, "params": params }, "depth": depth,
    }))
    .map_err(|e| QpolarError::new_err(e.to_string()))?;
    let r = if stop {
        run_sweep(&cfg)
    } else {
        cfg.validate().and_then(|_| sweep_element(&cfg.series, &make_channel(&cfg.element)?, depth, false))
    }
    .map_err(err)?;
    sweep_to_py(py, &r)
}

/// The three coherence-level curves, swept past the catastrophic point.
#[pyfunction]
#[pyo3(signature = (depth = 1000))]
fn fig3<'py>(py: Python<'py>, depth: usize) -> PyResult<Bound<'py, PyAny>> {
    let d = PyDict::new(py);
    for cfg in fig3_configs(depth) {
        let ch = make_channel(&cfg.element).map_err(err)?;
        let r = sweep_element(&cfg.series, &ch, depth, false).map_err(err)?;
        d.set_item(cfg.series.clone(), sweep_to_py(py, &r)?)?;
    }
    Ok(d.into_any())
}

#[pymodule]
fn qpolar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add("QpolarError", m.py().get_type::<QpolarError>())?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(circuit_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fig3, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
