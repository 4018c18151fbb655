//! Python bindings of `cw-core`.
//!
//! Fields and curves are exchanged as objects wrapping the Rust types, and
//! reports are returned as plain dictionaries decoded from their JSON form.

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cw_core::cli::{audit_field, extend_and_verify};
use cw_core::conditions::{compute_av, AuditConfig};
use cw_core::extend::{verify_extension, ExtendConfig};
use cw_core::fixtures;
use cw_core::group::{inverse, multiply, GroupElement, HorizontalCurve};
use cw_core::io::{curve_from_json, field_from_json, field_to_json, parse_component_key, to_json_string, CurveFile};
use cw_core::jets::{check_horizontal_compatibility, WhitneyField};
use cw_core::poly::{Polynomial, Side};
use cw_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::OutOfDomain { .. } => PyIndexError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = to_json_string(value).map_err(to_py)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A point of the free step-2 Carnot group 𝔾_r.
#[pyclass(name = "GroupElement", module = "carnot_whitney", from_py_object)]
#[derive(Clone)]
struct PyGroupElement {
    inner: GroupElement,
}

#[pymethods]
impl PyGroupElement {
    #[new]
    fn new(r: usize, x: Vec<f64>, xv: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: GroupElement::new(r, x, xv).map_err(to_py)?,
        })
    }

    /// The identity of 𝔾_r.
    #[staticmethod]
    fn identity(r: usize) -> Self {
        Self {
            inner: GroupElement::identity(r),
        }
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.horizontal.clone()
    }

    #[getter]
    fn xv(&self) -> Vec<f64> {
        self.inner.vertical.clone()
    }

    /// Group product `self · other`.
    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        Ok(Self {
            inner: multiply(&self.inner, &other.inner).map_err(to_py)?,
        })
    }

    /// Group inverse.
    fn inverse(&self) -> Self {
        Self {
            inner: inverse(&self.inner),
        }
    }

    /// Vertical coordinate `x_ij`, `i > j`.
    fn vertical_at(&self, i: usize, j: usize) -> PyResult<f64> {
        if !(j >= 1 && i > j && i <= self.inner.r) {
            return Err(PyIndexError::new_err(format!("({i},{j}) is not a vertical pair")));
        }
        Ok(self.inner.vertical_at(i, j))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json_string(&self.inner).map_err(to_py)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("GroupElement(r={}, x={:?}, xv={:?})", self.inner.r, self.inner.horizontal, self.inner.vertical)
    }
}

/// A real polynomial in the monomial basis.
#[pyclass(name = "Polynomial", module = "carnot_whitney", from_py_object)]
#[derive(Clone)]
struct PyPolynomial {
    inner: Polynomial,
}

#[pymethods]
impl PyPolynomial {
    #[new]
    fn new(coeffs: Vec<f64>) -> Self {
        Self {
            inner: Polynomial::new(coeffs),
        }
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.inner.coeffs().to_vec()
    }

    /// `k`-th derivative at `x` (value for `k = 0`).
    #[pyo3(signature = (x, k = 0))]
    fn eval(&self, x: f64, k: usize) -> f64 {
        self.inner.eval_derivative(k, x)
    }

    fn derivative(&self) -> Self {
        Self {
            inner: self.inner.derivative(),
        }
    }

    /// `∫_a^b p`.
    fn integrate(&self, a: f64, b: f64) -> f64 {
        self.inner.integrate(a, b)
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn __repr__(&self) -> String {
        format!("Polynomial({:?})", self.inner.coeffs())
    }
}

/// Jets of order `m` of a map into 𝔾_r on a compact subset of ℝ.
#[pyclass(name = "WhitneyField", module = "carnot_whitney", from_py_object)]
#[derive(Clone)]
struct PyWhitneyField {
    inner: WhitneyField,
}

#[pymethods]
impl PyWhitneyField {
    /// Parses the JSON field format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: field_from_json(text, "<string>").map_err(to_py)?,
        })
    }

    /// The counterexample field truncated at `levels` intervals.
    #[staticmethod]
    #[pyo3(signature = (levels, m = 2))]
    fn counterexample(levels: usize, m: usize) -> PyResult<Self> {
        Ok(Self {
            inner: fixtures::counterexample_field(levels, m).map_err(to_py)?,
        })
    }

    /// The field of a seeded random lifted polynomial curve on `points`
    /// random points of `[0, 1]`.
    #[staticmethod]
    fn lifted_polynomial(r: usize, m: usize, degree: usize, points: usize, seed: u64) -> PyResult<Self> {
        let (_, field) = fixtures::lifted_polynomial_field(r, m, degree, points, seed).map_err(to_py)?;
        Ok(Self { inner: field })
    }

    /// The zero field on the given points.
    #[staticmethod]
    fn zero(r: usize, m: usize, points: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: fixtures::zero_field(r, m, points).map_err(to_py)?,
        })
    }

    /// A copy with `F_ij` at the `n`-th point increased by `delta`.
    fn shift_vertical_value(&self, i: usize, j: usize, n: usize, delta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: fixtures::shift_vertical_value(&self.inner, i, j, n, delta).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        field_to_json(&self.inner).map_err(to_py)
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    /// Gaps `(a, b)` between consecutive elements of `K`.
    fn gaps(&self) -> Vec<(f64, f64)> {
        self.inner.k.gaps()
    }

    /// `k`-th entry of the jet of `component` ("1", "21", …) at `t ∈ K`.
    fn value(&self, component: &str, k: usize, t: f64) -> PyResult<f64> {
        let c = parse_component_key(component, self.inner.r)
            .ok_or_else(|| PyValueError::new_err(format!("unknown component {component:?}")))?;
        self.inner.value(c, k, t).map_err(to_py)
    }

    /// Horizontal compatibility report.
    fn check_compatibility<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &check_horizontal_compatibility(&self.inner).map_err(to_py)?)
    }

    /// `A_ij`, `V_ij` and their ratio on `[a, b]`.
    fn av<'py>(&self, py: Python<'py>, i: usize, j: usize, a: f64, b: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &compute_av(&self.inner, i, j, a, b).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("WhitneyField(r={}, m={}, elements={})", self.inner.r, self.inner.m, self.inner.k.len())
    }
}

/// A horizontal curve: piecewise horizontal components and their lifts.
#[pyclass(name = "Curve", module = "carnot_whitney", from_py_object)]
#[derive(Clone)]
struct PyCurve {
    inner: HorizontalCurve,
}

#[pymethods]
impl PyCurve {
    /// Parses the JSON curve format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: curve_from_json(text, "<string>").map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        to_json_string(&CurveFile::from_curve(&self.inner)).map_err(to_py)
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        self.inner.domain
    }

    /// `k`-th derivative of `component` at `t`, from the right unless
    /// `left` is set.
    #[pyo3(signature = (component, t, k = 0, left = false))]
    fn eval(&self, component: &str, t: f64, k: usize, left: bool) -> PyResult<f64> {
        let c = parse_component_key(component, self.inner.r)
            .ok_or_else(|| PyValueError::new_err(format!("unknown component {component:?}")))?;
        let side = if left { Side::Left } else { Side::Right };
        self.inner.eval(c, k, t, side).map_err(to_py)
    }

    /// The point `γ(t)`.
    fn point(&self, t: f64) -> PyResult<PyGroupElement> {
        Ok(PyGroupElement {
            inner: self.inner.point(t).map_err(to_py)?,
        })
    }
}

fn extend_config(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<ExtendConfig> {
    let mut config = ExtendConfig::default();
    if let Some(d) = overrides {
        let mut value = serde_json::to_value(&config).map_err(|e| PyValueError::new_err(e.to_string()))?;
        for (k, v) in d.iter() {
            let key: String = k.extract()?;
            let slot = value
                .get_mut(&key)
                .ok_or_else(|| PyValueError::new_err(format!("unknown option {key:?}")))?;
            *slot = serde_json::Value::from(v.extract::<f64>()?);
        }
        config = serde_json::from_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    }
    Ok(config)
}

/// Runs every audit on a field and returns the report.
#[pyfunction]
#[pyo3(signature = (field, cbound = 4.0, grid = 0.25))]
fn audit<'py>(py: Python<'py>, field: &PyWhitneyField, cbound: f64, grid: f64) -> PyResult<Bound<'py, PyAny>> {
    let config = AuditConfig {
        cbound,
        grid_step: grid,
        ..AuditConfig::default()
    };
    let report = py.detach(|| audit_field(&field.inner, &config)).map_err(to_py)?;
    to_dict(py, &report)
}

/// Extends a field and verifies the result; returns `(curve, report)`.
///
/// Keyword options override the extension tolerances, e.g.
/// `extend(field, area_tol=1e-10)`.
#[pyfunction]
#[pyo3(signature = (field, **options))]
fn extend<'py>(
    py: Python<'py>,
    field: &PyWhitneyField,
    options: Option<&Bound<'py, PyDict>>,
) -> PyResult<(PyCurve, Bound<'py, PyAny>)> {
    let config = extend_config(options)?;
    let (ext, report) = py.detach(|| extend_and_verify(&field.inner, &config)).map_err(to_py)?;
    Ok((PyCurve { inner: ext.curve }, to_dict(py, &report)?))
}

/// Verifies a curve against a field.
#[pyfunction]
#[pyo3(signature = (curve, field, **options))]
fn verify<'py>(
    py: Python<'py>,
    curve: &PyCurve,
    field: &PyWhitneyField,
    options: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let config = extend_config(options)?;
    let report = py
        .detach(|| verify_extension(&curve.inner, &field.inner, &config.tolerances()))
        .map_err(to_py)?;
    to_dict(py, &report)
}

#[pymodule]
fn carnot_whitney(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroupElement>()?;
    m.add_class::<PyPolynomial>()?;
    m.add_class::<PyWhitneyField>()?;
    m.add_class::<PyCurve>()?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(extend, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
