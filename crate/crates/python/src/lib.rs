//! Python bindings. Channels are wrapped as a class; every report comes
//! back as plain Python data (dicts, lists, floats) decoded from the same
//! JSON the command-line tool writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use infopriv::analysis::{
    balance_profile as profile, check_basic_composition, check_equivalence, check_general_composition,
    check_group_privacy, check_monotonicity, invert_balance as invert, CouplingFamily,
};
use infopriv::capacity::{blahut_arimoto as ba, capacity_over_targets, subsets};
use infopriv::decomposition::{random_suite, Lemma};
use infopriv::io::{channel_to_json, parse_channel, to_json};
use infopriv::{
    AnalysisConfig, CapacityConfig, Error, JointDistribution, KnowledgeSet, Mechanism, Method,
    PrivacyChannel, UniverseShape,
};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Infeasible { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn decode<'py, T: serde::Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (to_json(value),))
}

fn method(name: Option<&str>, default: Method) -> PyResult<Method> {
    match name {
        None => Ok(default),
        Some("grid") => Ok(Method::Grid),
        Some("exact") => Ok(Method::ExactEnumBa),
        Some("mirror") => Ok(Method::MirrorAscent),
        Some(other) => Err(PyValueError::new_err(format!(
            "unknown method {other:?} (grid, exact, mirror)"
        ))),
    }
}

/// A privacy channel `p(y|x)` over a product universe of records.
#[pyclass(name = "Channel", frozen, skip_from_py_object)]
struct PyChannel {
    inner: PrivacyChannel,
}

fn wrap(r: infopriv::Result<PrivacyChannel>) -> PyResult<PyChannel> {
    r.map(|inner| PyChannel { inner }).map_err(py_err)
}

#[pymethods]
impl PyChannel {
    #[new]
    fn new(alphabets: Vec<usize>, rows: Vec<Vec<f64>>) -> PyResult<Self> {
        let shape = UniverseShape::new(alphabets).map_err(py_err)?;
        wrap(PrivacyChannel::from_rows(shape, rows))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        wrap(parse_channel(text))
    }

    #[staticmethod]
    fn identity(alphabets: Vec<usize>) -> PyResult<Self> {
        wrap(Mechanism::Identity { alphabets }.build())
    }

    #[staticmethod]
    fn constant(alphabets: Vec<usize>, outputs: usize) -> PyResult<Self> {
        wrap(
            Mechanism::Constant {
                alphabets,
                outputs,
                row: None,
            }
            .build(),
        )
    }

    #[staticmethod]
    fn randomized_response(alphabets: Vec<usize>, q: f64) -> PyResult<Self> {
        wrap(Mechanism::RandomizedResponse { alphabets, q }.build())
    }

    #[staticmethod]
    fn xor(records: usize) -> PyResult<Self> {
        wrap(Mechanism::Xor { records }.build())
    }

    #[staticmethod]
    fn truncated_geometric(records: usize, alpha: f64) -> PyResult<Self> {
        wrap(Mechanism::TruncatedGeometric { records, alpha }.build())
    }

    fn to_json(&self) -> String {
        channel_to_json(&self.inner)
    }

    #[getter]
    fn alphabets(&self) -> Vec<usize> {
        self.inner.input_shape().sizes().to_vec()
    }

    #[getter]
    fn outputs(&self) -> usize {
        self.inner.output_size()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().map(<[f64]>::to_vec).collect()
    }

    fn compose_same_input(&self, other: PyRef<'_, PyChannel>) -> PyResult<Self> {
        wrap(self.inner.compose_same_input(&other.inner))
    }

    fn compose_independent(&self, other: PyRef<'_, PyChannel>) -> PyResult<Self> {
        wrap(self.inner.compose_independent(&other.inner))
    }

    /// `I(X_I;Y)` in bits for the flattened input law `mass`; indices are
    /// 0-based.
    fn information(&self, indices: Vec<usize>, mass: Vec<f64>) -> PyResult<f64> {
        let law = JointDistribution::new(self.inner.input_shape().clone(), mass).map_err(py_err)?;
        infopriv::capacity::information(&self.inner, &indices, &law).map_err(py_err)
    }

    fn output_distribution(&self, mass: Vec<f64>) -> PyResult<Vec<f64>> {
        let law = JointDistribution::new(self.inner.input_shape().clone(), mass).map_err(py_err)?;
        Ok(self
            .inner
            .output_distribution(&law)
            .map_err(py_err)?
            .mass()
            .to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(alphabets={:?}, outputs={})",
            self.alphabets(),
            self.outputs()
        )
    }
}

/// Capacity over `ℙ` (when `b` is None or 0) or `ℙ_b`. `individual` is a
/// 0-based record; `group` a group size; with neither, `C_1`.
#[pyfunction]
#[pyo3(signature = (channel, b=None, individual=None, group=None, method=None, grid=None, restarts=8, seed=0))]
#[allow(clippy::too_many_arguments)]
fn capacity<'py>(
    py: Python<'py>,
    channel: PyRef<'_, PyChannel>,
    b: Option<f64>,
    individual: Option<usize>,
    group: Option<usize>,
    method: Option<&str>,
    grid: Option<usize>,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let ch = &channel.inner;
    let ks = KnowledgeSet::from_b(b.unwrap_or(0.0));
    let default = if ks.is_unconstrained() {
        Method::ExactEnumBa
    } else {
        Method::Grid
    };
    let m = self::method(method, default)?;
    let n = ch.input_shape().records();
    let targets = match (individual, group) {
        (Some(i), None) => vec![vec![i]],
        (None, Some(k)) => subsets(n, k),
        (None, None) => subsets(n, 1),
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give individual or group, not both")),
    };
    if targets.is_empty() {
        return Err(PyValueError::new_err(format!("group size not in [1, {n}]")));
    }
    let config = CapacityConfig {
        grid_resolution: grid,
        restarts,
        seed,
        ..CapacityConfig::default()
    };
    let e = py
        .detach(|| capacity_over_targets(ch, &targets, ks, m, &config))
        .map_err(py_err)?;
    decode(py, &e)
}

#[pyfunction]
fn blahut_arimoto<'py>(py: Python<'py>, channel: PyRef<'_, PyChannel>) -> PyResult<Bound<'py, PyAny>> {
    decode(py, &ba(&channel.inner).map_err(py_err)?)
}

fn analysis_config(
    method: Option<&str>,
    grid: Option<usize>,
    seed: u64,
    tol: f64,
) -> PyResult<AnalysisConfig> {
    Ok(AnalysisConfig {
        capacity: CapacityConfig {
            grid_resolution: grid,
            seed,
            ..CapacityConfig::default()
        },
        method: self::method(method, Method::Grid)?,
        tol,
    })
}

/// Balance function `δ(b)` on `points` equally spaced entropy bounds.
#[pyfunction]
#[pyo3(signature = (channel, points=33, method=None, grid=None, name="channel"))]
fn balance_profile<'py>(
    py: Python<'py>,
    channel: PyRef<'_, PyChannel>,
    points: usize,
    method: Option<&str>,
    grid: Option<usize>,
    name: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let config = analysis_config(method, grid, 0, 1e-6)?;
    let ch = &channel.inner;
    let p = py.detach(|| profile(ch, name, points, &config)).map_err(py_err)?;
    decode(py, &p)
}

/// Largest grid `b` whose `δ(b)` is certainly at most `delta`.
#[pyfunction]
#[pyo3(signature = (channel, delta, points=33, method=None, grid=None))]
fn invert_balance(
    py: Python<'_>,
    channel: PyRef<'_, PyChannel>,
    delta: f64,
    points: usize,
    method: Option<&str>,
    grid: Option<usize>,
) -> PyResult<f64> {
    let config = analysis_config(method, grid, 0, 1e-6)?;
    let ch = &channel.inner;
    py.detach(|| invert(&profile(ch, "channel", points, &config)?, delta))
        .map_err(py_err)
}

/// Runs one of the checks `equivalence`, `group`, `compose-basic`,
/// `compose-general` or `monotonicity` and returns its report.
#[pyfunction]
#[pyo3(signature = (
    theorem, channels, b=0.0, eps=vec![0.1, 0.5, 1.0], kmax=None, coupling="product",
    trials=16, points=33, seed=0, tol=1e-6, method=None, grid=None
))]
#[allow(clippy::too_many_arguments)]
fn check<'py>(
    py: Python<'py>,
    theorem: &str,
    channels: Vec<PyRef<'_, PyChannel>>,
    b: f64,
    eps: Vec<f64>,
    kmax: Option<usize>,
    coupling: &str,
    trials: usize,
    points: usize,
    seed: u64,
    tol: f64,
    method: Option<&str>,
    grid: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = analysis_config(method, grid, seed, tol)?;
    let chs: Vec<PrivacyChannel> = channels.iter().map(|c| c.inner.clone()).collect();
    let ids: Vec<String> = (0..chs.len()).map(|j| format!("channel{j}")).collect();
    let first = chs
        .first()
        .ok_or_else(|| PyValueError::new_err("at least one channel is needed"))?;
    let family = match coupling {
        "product" => CouplingFamily::Product,
        "dirichlet" => CouplingFamily::Dirichlet,
        "correlated" => CouplingFamily::Correlated,
        other => return Err(PyValueError::new_err(format!("unknown coupling {other:?}"))),
    };
    let report = py.detach(|| match theorem {
        "equivalence" => check_equivalence(first, &ids[0], b, &eps, &config).map(Some),
        "group" => {
            let k = kmax.unwrap_or(first.input_shape().records());
            check_group_privacy(first, &ids[0], b, k, &config).map(Some)
        }
        "compose-basic" => check_basic_composition(&chs, &ids, b, &config).map(Some),
        "compose-general" if chs.len() == 2 => {
            check_general_composition(&chs[0], &chs[1], &ids, family, b, trials, seed, &config).map(Some)
        }
        "monotonicity" => profile(first, &ids[0], points, &config).map(|p| Some(check_monotonicity(&p, tol))),
        _ => Ok(None),
    });
    match report.map_err(py_err)? {
        Some(r) => decode(py, &r),
        None => Err(PyValueError::new_err(format!(
            "unknown check {theorem:?} or wrong number of channels"
        ))),
    }
}

/// Seeded decomposition trials for the `group`, `basic` or `general` lemma.
#[pyfunction]
#[pyo3(signature = (lemma, trials=100, seed=0))]
fn decompose<'py>(py: Python<'py>, lemma: &str, trials: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let lemma = match lemma {
        "group" => Lemma::Group,
        "basic" => Lemma::Basic,
        "general" => Lemma::General,
        other => return Err(PyValueError::new_err(format!("unknown lemma {other:?}"))),
    };
    let reports = py
        .detach(|| {
            random_suite(lemma, trials, seed)
                .into_iter()
                .collect::<infopriv::Result<Vec<_>>>()
        })
        .map_err(py_err)?;
    decode(py, &reports)
}

#[pymodule]
#[pyo3(name = "infopriv")]
pub fn infopriv_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add_function(wrap_pyfunction!(capacity, m)?)?;
    m.add_function(wrap_pyfunction!(blahut_arimoto, m)?)?;
    m.add_function(wrap_pyfunction!(balance_profile, m)?)?;
    m.add_function(wrap_pyfunction!(invert_balance, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
