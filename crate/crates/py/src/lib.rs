//! Python bindings for the qgcmac toolkit.
//!
//! Exposes the channel model, the rate-region evaluators, the converse
//! sweeps and the Monte-Carlo experiment behind a small, flat API. Reports
//! come back as plain dicts/lists mirroring the CLI's JSON output; note that
//! non-finite floats (e.g. a vacuous packing bound of +inf) arrive as `None`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use qgcmac::channels::{
    builtin_binary_dirty, builtin_example1, channel_to_config_json, load_channel, ChannelSpec,
};
use qgcmac::modrings::{circular_convolve, RingSpec};
use qgcmac::probinfo::{Pmf, UQPair};
use qgcmac::qgcsim::{run_example1, SimConfig};
use qgcmac::regions::{builtin_assignment, load_assignment, Assignment, CondLaw, SearchConfig};
use qgcmac::{bounds, regions};

fn err(e: qgcmac::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<PyObject> {
    Ok(match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py(py)
            }
        }
        serde_json::Value::String(s) => s.into_py(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty_bound(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new_bound(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_py(py)
        }
    })
}

fn report<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let json = serde_json::to_value(value)
        .map_err(|e| PyValueError::new_err(format!("report serialization failed: {e}")))?;
    json_to_py(py, &json)
}

fn pmf(weights: Vec<f64>) -> PyResult<Pmf> {
    Pmf::new(weights).map_err(err)
}

/// Builtin name ("lemma4", "degenerate-qgc") or a JSON assignment document.
fn resolve_assignment(doc_or_name: &str, ch: &ChannelSpec) -> PyResult<Assignment> {
    let trimmed = doc_or_name.trim();
    if trimmed.starts_with('{') {
        load_assignment(doc_or_name, ch).map_err(err)
    } else {
        builtin_assignment(trimmed, ch).map_err(err)
    }
}

/// Two-user additive MAC with per-encoder non-causal state knowledge.
#[pyclass(frozen)]
#[derive(Clone)]
struct Channel {
    spec: ChannelSpec,
}

#[pymethods]
impl Channel {
    /// Quaternary doubly-dirty reference channel Y = X1+S1+X2+S2 mod 4,
    /// states uniform and independent, zero cost budgets.
    #[staticmethod]
    fn example1() -> Channel {
        Channel {
            spec: builtin_example1(),
        }
    }

    /// Binary doubly-dirty channel with Hamming-weight budgets tau1, tau2.
    #[staticmethod]
    fn binary_dirty(tau1: f64, tau2: f64) -> PyResult<Channel> {
        Ok(Channel {
            spec: builtin_binary_dirty(tau1, tau2).map_err(err)?,
        })
    }

    /// Parse a channel-config JSON document (same schema as the CLI's
    /// --channel file).
    #[staticmethod]
    fn from_json(doc: &str) -> PyResult<Channel> {
        Ok(Channel {
            spec: load_channel(doc).map_err(err)?,
        })
    }

    /// Alphabet sizes, keyed x1, x2, s1, s2, y.
    fn alphabets<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let al = self.spec.alphabets();
        let d = PyDict::new_bound(py);
        d.set_item("x1", al.x1)?;
        d.set_item("x2", al.x2)?;
        d.set_item("s1", al.s1)?;
        d.set_item("s2", al.s2)?;
        d.set_item("y", al.y)?;
        Ok(d)
    }

    /// Per-encoder cost budgets (tau1, tau2).
    fn tau(&self) -> (f64, f64) {
        (self.spec.tau1(), self.spec.tau2())
    }

    /// Serialize back to the config-JSON format (independent states only).
    fn to_json(&self) -> PyResult<String> {
        channel_to_config_json(&self.spec).map_err(err)
    }

    fn states_independent(&self) -> bool {
        self.spec.states_independent(1e-12)
    }

    fn __repr__(&self) -> String {
        let al = self.spec.alphabets();
        format!(
            "Channel(x1={}, x2={}, s1={}, s2={}, y={})",
            al.x1, al.x2, al.s1, al.s2, al.y
        )
    }
}

/// Cyclic convolution of two pmfs of equal length.
#[pyfunction]
fn convolve(pa: Vec<f64>, pb: Vec<f64>) -> PyResult<Vec<f64>> {
    let out = circular_convolve(&pmf(pa)?, &pmf(pb)?).map_err(err)?;
    Ok(out.as_slice().to_vec())
}

/// Shannon entropy of a pmf, in bits.
#[pyfunction]
fn entropy(p: Vec<f64>) -> PyResult<f64> {
    Ok(pmf(p)?.entropy())
}

/// Random-binning rate pair for a binning assignment (kind "gp"); a combined
/// assignment is accepted too and evaluated through its binning layers.
#[pyfunction]
fn gp_rates(py: Python<'_>, channel: Channel, assignment: &str) -> PyResult<PyObject> {
    let spec = channel.spec;
    let rep = match resolve_assignment(assignment, &spec)? {
        Assignment::Gp(a) => py
            .allow_threads(|| regions::gp_rates(&spec, &a))
            .map_err(err)?,
        Assignment::Combined(c) => {
            let g = c.to_gp(&spec).map_err(err)?;
            py.allow_threads(|| regions::gp_rates(&spec, &g))
                .map_err(err)?
        }
        Assignment::Qgc(_) => {
            return Err(PyValueError::new_err(
                "gp_rates needs a binning (kind \"gp\") or combined assignment",
            ))
        }
    };
    report(py, &rep)
}

/// Structured sum-rate report for a nested-code assignment (kind "qgc"),
/// including the simplified form when the assignment admits it.
#[pyfunction]
fn qgc_sum_rate(py: Python<'_>, channel: Channel, assignment: &str) -> PyResult<PyObject> {
    let spec = channel.spec;
    let Assignment::Qgc(a) = resolve_assignment(assignment, &spec)? else {
        return Err(PyValueError::new_err(
            "qgc_sum_rate needs a nested-code assignment (kind \"qgc\")",
        ));
    };
    let rep = py
        .allow_threads(|| regions::qgc_sum_rate(&spec, &a))
        .map_err(err)?;
    report(py, &rep)
}

/// Plain group-code sum-rate for a nested-code assignment.
#[pyfunction]
fn group_code_sum_rate(py: Python<'_>, channel: Channel, assignment: &str) -> PyResult<PyObject> {
    let spec = channel.spec;
    let Assignment::Qgc(a) = resolve_assignment(assignment, &spec)? else {
        return Err(PyValueError::new_err(
            "group_code_sum_rate needs a nested-code assignment (kind \"qgc\")",
        ));
    };
    let rep = py
        .allow_threads(|| regions::group_code_sum_rate(&spec, &a))
        .map_err(err)?;
    report(py, &rep)
}

/// Combined-region rate pair and audit-term report for a combined assignment.
#[pyfunction]
fn combined_rates(py: Python<'_>, channel: Channel, assignment: &str) -> PyResult<PyObject> {
    let spec = channel.spec;
    let Assignment::Combined(a) = resolve_assignment(assignment, &spec)? else {
        return Err(PyValueError::new_err(
            "combined_rates needs a combined assignment (kind \"combined\")",
        ));
    };
    let rep = py
        .allow_threads(|| regions::combined_rates(&spec, &a))
        .map_err(err)?;
    report(py, &rep)
}

/// Coordinate-ascent search over binning auxiliaries. Defaults mirror the
/// library's SearchConfig; u_size1/u_size2 default to |X_i|*|S_i|.
#[pyfunction]
#[pyo3(signature = (channel, q_size=2, u_size1=None, u_size2=None, restarts=24, iters=300, seed=0, step=1.0, weights=None))]
#[allow(clippy::too_many_arguments)]
fn search_gp_region(
    py: Python<'_>,
    channel: Channel,
    q_size: usize,
    u_size1: Option<usize>,
    u_size2: Option<usize>,
    restarts: usize,
    iters: usize,
    seed: u64,
    step: f64,
    weights: Option<Vec<f64>>,
) -> PyResult<PyObject> {
    let u_sizes = match (u_size1, u_size2) {
        (None, None) => None,
        (Some(a), Some(b)) => Some([a, b]),
        _ => {
            return Err(PyValueError::new_err(
                "u_size1 and u_size2 must be given together",
            ))
        }
    };
    let mut cfg = SearchConfig {
        q_size,
        u_sizes,
        restarts,
        iters,
        seed,
        step,
        ..SearchConfig::default()
    };
    if let Some(w) = weights {
        cfg.weights = w;
    }
    let spec = channel.spec;
    let out = py
        .allow_threads(|| regions::search_gp_region(&spec, &cfg))
        .map_err(err)?;
    report(py, &out)
}

/// Covering threshold for a nested code over Z_{p^r}: the code law `u_law`
/// must cover the target conditional `rows` given the side law `given`.
#[pyfunction]
#[pyo3(signature = (u_law, given, rows, p=2, r=2))]
fn covering_threshold(
    py: Python<'_>,
    u_law: Vec<f64>,
    given: Vec<f64>,
    rows: Vec<Vec<f64>>,
    p: u32,
    r: u32,
) -> PyResult<PyObject> {
    let ring = RingSpec::new(p, r).map_err(err)?;
    let uq = UQPair::single(pmf(u_law)?);
    let rows = rows.into_iter().map(pmf).collect::<PyResult<Vec<_>>>()?;
    let law = CondLaw::new(pmf(given)?, rows).map_err(err)?;
    let rep = regions::covering_threshold(&uq, &law, &ring).map_err(err)?;
    report(py, &rep)
}

/// Packing threshold for a nested code over Z_{p^r} against the channel law
/// `rows` = p(y|x) with input marginal `given`.
#[pyfunction]
#[pyo3(signature = (u_law, given, rows, p=2, r=2))]
fn packing_threshold(
    py: Python<'_>,
    u_law: Vec<f64>,
    given: Vec<f64>,
    rows: Vec<Vec<f64>>,
    p: u32,
    r: u32,
) -> PyResult<PyObject> {
    let ring = RingSpec::new(p, r).map_err(err)?;
    let uq = UQPair::single(pmf(u_law)?);
    let rows = rows.into_iter().map(pmf).collect::<PyResult<Vec<_>>>()?;
    let law = CondLaw::new(pmf(given)?, rows).map_err(err)?;
    let rep = regions::packing_threshold(&uq, &law, &ring).map_err(err)?;
    report(py, &rep)
}

/// Grid-plus-refinement sweep of the eight point-to-point entropy-gap
/// inequalities. `all_within` is False: two stated bounds are exceeded on a
/// verified witness state (see the README's results section).
#[pyfunction]
#[pyo3(signature = (resolution=100, refine_rounds=3, refine_scale=10))]
fn verify_ptp_table(
    py: Python<'_>,
    resolution: u32,
    refine_rounds: u32,
    refine_scale: u32,
) -> PyResult<PyObject> {
    let cfg = bounds::PtpVerifyConfig {
        resolution,
        refine_rounds,
        refine_scale,
    };
    let rep = py
        .allow_threads(|| bounds::verify_ptp_table(&cfg))
        .map_err(err)?;
    report(py, &rep)
}

/// Relaxed outer search for the binning sum-rate ceiling on the reference
/// channel (grid, stochastic and ascent phases).
#[pyfunction]
#[pyo3(signature = (channel, grid=12, budget=100_000, ascent_iters=400, seed=0))]
fn gp_outer_max(
    py: Python<'_>,
    channel: Channel,
    grid: u32,
    budget: u64,
    ascent_iters: u32,
    seed: u64,
) -> PyResult<PyObject> {
    let cfg = bounds::OuterSearchConfig {
        grid_denominator: grid,
        stochastic_budget: budget,
        ascent_iters,
        seed,
    };
    let spec = channel.spec;
    let rep = py
        .allow_threads(|| bounds::gp_outer_max(&spec, &cfg))
        .map_err(err)?;
    report(py, &rep)
}

/// Exact noise-mixture decomposition sweep over a simplex grid with the
/// given denominator; reports the worst reconstruction/weight residuals.
#[pyfunction]
#[pyo3(signature = (grid=24))]
fn verify_decompositions(py: Python<'_>, grid: u32) -> PyResult<PyObject> {
    let rep = py
        .allow_threads(|| bounds::verify_decompositions(grid))
        .map_err(err)?;
    report(py, &rep)
}

/// Run the nested-code Monte-Carlo experiment from a sim-config JSON document
/// (same schema as the CLI's --config file). Optional trials/seed overrides.
/// Returns one row dict per block length.
#[pyfunction]
#[pyo3(signature = (config, trials=None, seed=None))]
fn simulate(
    py: Python<'_>,
    config: &str,
    trials: Option<u64>,
    seed: Option<u64>,
) -> PyResult<PyObject> {
    let mut cfg: SimConfig = serde_json::from_str(config)
        .map_err(|e| PyValueError::new_err(format!("bad sim config: {e}")))?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let rows = py.allow_threads(|| run_example1(&cfg)).map_err(err)?;
    report(py, &rows)
}

#[pymodule]
fn qgcmac_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Channel>()?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(gp_rates, m)?)?;
    m.add_function(wrap_pyfunction!(qgc_sum_rate, m)?)?;
    m.add_function(wrap_pyfunction!(group_code_sum_rate, m)?)?;
    m.add_function(wrap_pyfunction!(combined_rates, m)?)?;
    m.add_function(wrap_pyfunction!(search_gp_region, m)?)?;
    m.add_function(wrap_pyfunction!(covering_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(packing_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(verify_ptp_table, m)?)?;
    m.add_function(wrap_pyfunction!(gp_outer_max, m)?)?;
    m.add_function(wrap_pyfunction!(verify_decompositions, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
