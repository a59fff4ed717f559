//! Python bindings for `mvtlab`.
//!
//! Reports are returned as plain Python dicts with the same layout as the
//! JSON written by the `mvtlab` command line.

use mvtlab::calculus::{self, Interval, QuadratureSpec};
use mvtlab::classify::{classify_pair_with, ClassifyOptions};
use mvtlab::harness::{self, GenFamily, GeneratorSpec, SuiteConfig};
use mvtlab::mvt::{self, ConstructionParams, Equation, MeanSpec, Residual};
use mvtlab::sahoo;
use mvtlab::SmoothFn;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn mean(alpha: f64) -> PyResult<MeanSpec> {
    MeanSpec::new(alpha).map_err(value_err)
}

fn interval(domain: (f64, f64)) -> PyResult<Interval> {
    Interval::try_new(domain.0, domain.1, false, false).map_err(value_err)
}

/// A closed-form function of `x` with its first three derivatives.
#[pyclass(name = "Function", module = "pymvtlab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFunction {
    inner: SmoothFn,
}

#[pymethods]
impl PyFunction {
    #[new]
    #[pyo3(signature = (source, label = None))]
    fn new(source: &str, label: Option<String>) -> PyResult<Self> {
        let label = label.unwrap_or_else(|| source.to_string());
        SmoothFn::parse(source, label).map(|inner| PyFunction { inner }).map_err(value_err)
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    /// Value of the derivative of `order` (0 to 3) at `x`.
    #[pyo3(signature = (x, order = 0))]
    fn eval(&self, x: f64, order: usize) -> PyResult<f64> {
        if order > 3 {
            return Err(PyValueError::new_err("order must be 0, 1, 2 or 3"));
        }
        self.inner.eval_layer(order, x).map_err(value_err)
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.eval(x, 0)
    }

    /// Source text of the derivative of `order`.
    #[pyo3(signature = (order = 1))]
    fn derivative_source(&self, order: usize) -> PyResult<String> {
        if order > 3 {
            return Err(PyValueError::new_err("order must be 0, 1, 2 or 3"));
        }
        Ok(self.inner.layer(order).to_string())
    }

    fn __str__(&self) -> String {
        self.inner.d0().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Function({:?})", self.inner.d0().to_string())
    }
}

/// `f = (A + K * integral of 1/g^2 from x0) * g` on a fixed interval.
#[pyclass(name = "ConstructedF", module = "pymvtlab", frozen)]
struct PyConstructedF {
    inner: mvt::ConstructedF,
}

#[pymethods]
impl PyConstructedF {
    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params;
        format!("ConstructedF(A={}, K={}, x0={})", p.a, p.k, p.x0)
    }
}

fn residual_pair(r: Residual) -> (f64, f64) {
    (r.value, r.scale)
}

/// `(residual, scale)` of the Lagrange equation on `[a, b]`.
#[pyfunction]
#[pyo3(signature = (big_f, a, b, alpha = 0.5))]
fn lagrange_residual(big_f: &PyFunction, a: f64, b: f64, alpha: f64) -> PyResult<(f64, f64)> {
    mvt::lagrange_residual(&big_f.inner, mean(alpha)?, a, b).map(residual_pair).map_err(value_err)
}

/// `(residual, scale)` of the Cauchy equation on `[a, b]`.
#[pyfunction]
#[pyo3(signature = (big_f, big_g, a, b, alpha = 0.5))]
fn cauchy_residual(big_f: &PyFunction, big_g: &PyFunction, a: f64, b: f64, alpha: f64) -> PyResult<(f64, f64)> {
    mvt::cauchy_residual(&big_f.inner, &big_g.inner, mean(alpha)?, a, b).map(residual_pair).map_err(value_err)
}

/// Sweep the Lagrange (`big_g=None`) or Cauchy residual over an `n`-point grid.
#[pyfunction]
#[pyo3(signature = (big_f, big_g = None, alpha = 0.5, domain = (-3.0, 3.0), n = 64, samples = false))]
fn sweep<'py>(
    py: Python<'py>,
    big_f: &PyFunction,
    big_g: Option<&PyFunction>,
    alpha: f64,
    domain: (f64, f64),
    n: usize,
    samples: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let eq = match big_g {
        Some(g) => Equation::Cauchy(&big_f.inner, &g.inner),
        None => Equation::Lagrange(&big_f.inner),
    };
    let (m, dom) = (mean(alpha)?, interval(domain)?);
    let mut rep = py.detach(|| mvt::sweep(eq, m, dom, n)).map_err(value_err)?;
    if !samples {
        rep.samples.clear();
    }
    let out = to_py(py, &rep)?;
    out.set_item("pass", rep.passes(mvt::TAU))?;
    Ok(out)
}

/// Classify a solution pair; returns the classification as a dict.
#[pyfunction]
#[pyo3(signature = (big_f, big_g, alpha = 0.5, domain = (-3.0, 3.0), tau = mvt::TAU, sweep_n = 40))]
fn classify<'py>(
    py: Python<'py>,
    big_f: &PyFunction,
    big_g: &PyFunction,
    alpha: f64,
    domain: (f64, f64),
    tau: f64,
    sweep_n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = ClassifyOptions { tau, sweep_n, ..ClassifyOptions::default() };
    let (m, dom) = (mean(alpha)?, interval(domain)?);
    let c = py.detach(|| classify_pair_with(&big_f.inner, &big_g.inner, m, dom, &opts));
    let out = to_py(py, &c)?;
    out.set_item("mu", c.mu())?;
    Ok(out)
}

/// Build `f` from `g` on `domain`.
#[pyfunction]
#[pyo3(signature = (g, a = 0.0, k = 1.0, x0 = 0.0, domain = (-3.0, 3.0)))]
fn construct_f(g: &PyFunction, a: f64, k: f64, x0: f64, domain: (f64, f64)) -> PyResult<PyConstructedF> {
    let params = ConstructionParams { a, k, x0 };
    mvt::construct_f(&g.inner, params, interval(domain)?, QuadratureSpec::default())
        .map(|inner| PyConstructedF { inner })
        .map_err(value_err)
}

/// `(residual, scale)` of the integral criterion at `(x, h)`.
#[pyfunction]
#[pyo3(signature = (g, x0, x, h, domain))]
fn integral_condition_residual(g: &PyFunction, x0: f64, x: f64, h: f64, domain: (f64, f64)) -> PyResult<(f64, f64)> {
    mvt::integral_condition_residual(&g.inner, x0, x, h, interval(domain)?, QuadratureSpec::default())
        .map(residual_pair)
        .map_err(value_err)
}

/// Adaptive Simpson integral of `f` over `[a, b]`.
#[pyfunction]
#[pyo3(signature = (f, a, b, abs_tol = 1e-10))]
fn integrate(f: &PyFunction, a: f64, b: f64, abs_tol: f64) -> PyResult<f64> {
    let spec = QuadratureSpec { abs_tol, ..QuadratureSpec::default() };
    calculus::integrate(|t| f.inner.value(t), a, b, &spec).map_err(value_err)
}

/// Maximal intervals of `domain` where `f` does not vanish, as `(lo, hi)` pairs.
#[pyfunction]
#[pyo3(signature = (f, domain, grid_points = 1024))]
fn zero_set(f: &PyFunction, domain: (f64, f64), grid_points: usize) -> PyResult<Vec<(f64, f64)>> {
    let z = calculus::zero_set(|x| f.inner.value(x), interval(domain)?, grid_points);
    Ok(z.nonvanishing.iter().map(|iv| (iv.lo, iv.hi)).collect())
}

/// `(residual, scale)` of the four-function equation at `(x, y)`.
#[pyfunction]
fn sr_residual(
    big_f: &PyFunction,
    big_g: &PyFunction,
    phi: &PyFunction,
    psi: &PyFunction,
    x: f64,
    y: f64,
) -> PyResult<(f64, f64)> {
    sahoo::sr_residual(&big_f.inner, &big_g.inner, &phi.inner, &psi.inner, x, y)
        .map(residual_pair)
        .map_err(value_err)
}

fn parse_family(family: &str) -> PyResult<GenFamily> {
    match family {
        "a" => Ok(GenFamily::A),
        "b" => Ok(GenFamily::B),
        "c" => Ok(GenFamily::C),
        "d" => Ok(GenFamily::D),
        other => Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    }
}

/// Seeded random pair from family `a`, `b`, `c` or `d`: `(F, G, truth)`.
#[pyfunction]
#[pyo3(signature = (family, seed, domain = (-3.0, 3.0)))]
fn generate_pair<'py>(
    py: Python<'py>,
    family: &str,
    seed: u64,
    domain: (f64, f64),
) -> PyResult<(PyFunction, PyFunction, Bound<'py, PyAny>)> {
    let spec = GeneratorSpec::new(parse_family(family)?, seed);
    let p = harness::generate_pair(&spec, interval(domain)?).map_err(value_err)?;
    Ok((PyFunction { inner: p.f }, PyFunction { inner: p.g }, to_py(py, &p.truth)?))
}

/// Run a suite. `config` is a JSON string with the keys of the CLI suite file.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn run_suite<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg: SuiteConfig = match config {
        Some(text) => serde_json::from_str(text).map_err(value_err)?,
        None => SuiteConfig::default(),
    };
    let rep = py.detach(|| harness::run_suite(&cfg)).map_err(value_err)?;
    to_py(py, &rep)
}

/// Run the exp(x) worked example; returns the list of stage results.
#[pyfunction]
fn verify_example<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let stages = py.detach(mvtlab::cli::verify_example).map_err(PyRuntimeError::new_err)?;
    to_py(py, &stages)
}

#[pymodule]
fn pymvtlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TAU", mvt::TAU)?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyConstructedF>()?;
    m.add_function(wrap_pyfunction!(lagrange_residual, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_residual, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(construct_f, m)?)?;
    m.add_function(wrap_pyfunction!(integral_condition_residual, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(zero_set, m)?)?;
    m.add_function(wrap_pyfunction!(sr_residual, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pair, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(verify_example, m)?)?;
    Ok(())
}
