//! Python bindings for the controlled K-fusion frame toolkit. Frame
//! systems are wrapped as a class; bounds, certificates and operators
//! cross the boundary as plain Python structures mirroring the JSON
//! schema (complex numbers as [re, im] pairs).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde_json::Value;

use ckfusion::certificates as certs;
use ckfusion::frames::MembershipClass;
use ckfusion::instances::{self, InstanceSpec, Preset};
use ckfusion::module::ModuleVector;
use ckfusion::operators::ModuleOperator;
use ckfusion::{AlgebraElement, DEFAULT_TOL};

fn core_err(e: ckfusion::Error) -> PyErr {
    match e {
        ckfusion::Error::Parse(_) | ckfusion::Error::ValidationFailed(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn value_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    match v {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        Value::String(s) => s.into_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(value_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, value_to_py(py, v)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn py_to_value(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_none() {
        return Ok(Value::Null);
    }
    if let Ok(b) = obj.cast::<pyo3::types::PyBool>() {
        return Ok(Value::Bool(b.is_true()));
    }
    if let Ok(i) = obj.extract::<i64>() {
        return Ok(Value::from(i));
    }
    if let Ok(f) = obj.extract::<f64>() {
        return Ok(Value::from(f));
    }
    if let Ok(s) = obj.extract::<String>() {
        return Ok(Value::from(s));
    }
    if let Ok(dict) = obj.cast::<PyDict>() {
        let mut map = serde_json::Map::new();
        for (k, v) in dict.iter() {
            map.insert(k.extract::<String>()?, py_to_value(&v)?);
        }
        return Ok(Value::Object(map));
    }
    if let Ok(seq) = obj.try_iter() {
        let mut items = Vec::new();
        for item in seq {
            items.push(py_to_value(&item?)?);
        }
        return Ok(Value::Array(items));
    }
    Err(PyValueError::new_err(format!(
        "cannot convert {} to a JSON value",
        obj.get_type().name()?
    )))
}

fn serialise<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn vector_from_py(obj: &Bound<'_, PyAny>) -> PyResult<ModuleVector> {
    let v = py_to_value(obj)?;
    serde_json::from_value(v).map_err(|e| PyValueError::new_err(format!("bad vector: {e}")))
}

fn operator_from_py(obj: &Bound<'_, PyAny>) -> PyResult<ModuleOperator> {
    let v = py_to_value(obj)?;
    serde_json::from_value(v).map_err(|e| PyValueError::new_err(format!("bad operator: {e}")))
}

/// An algebra element from either a scalar (constant over components) or
/// a list of [re, im] pairs.
fn element_from_py(obj: &Bound<'_, PyAny>, d: usize) -> PyResult<AlgebraElement> {
    if let Ok(x) = obj.extract::<f64>() {
        return Ok(AlgebraElement::constant(d, x));
    }
    let v = py_to_value(obj)?;
    serde_json::from_value(v).map_err(|e| PyValueError::new_err(format!("bad element: {e}")))
}

/// A weighted family of submodules with controls and a range operator.
#[pyclass(name = "FrameSystem", module = "ckfusion_py")]
struct PyFrameSystem {
    inner: ckfusion::FrameSystem,
}

#[pymethods]
impl PyFrameSystem {
    /// Parse a frame system from its JSON representation.
    #[staticmethod]
    #[pyo3(signature = (json, tol = DEFAULT_TOL))]
    fn from_json(json: &str, tol: f64) -> PyResult<Self> {
        Ok(PyFrameSystem {
            inner: ckfusion::io::frame_system_from_json(json, tol).map_err(core_err)?,
        })
    }

    fn to_json(&self) -> String {
        ckfusion::io::frame_system_to_json(&self.inner)
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn positive_cross(&self) -> bool {
        self.inner.positive_cross()
    }

    /// Optimal algebra-valued frame bounds as a dict.
    fn bounds(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let b = self.inner.optimal_star_bounds().map_err(core_err)?;
        serialise(py, &b)
    }

    /// The assembled frame operator, one n x n block per component.
    fn frame_operator(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let s = self.inner.frame_operator().map_err(core_err)?;
        serialise(py, &s)
    }

    /// Membership certificate for one of the frame classes: "bessel",
    /// "fusion", "k_fusion", "controlled_fusion", "controlled_k_fusion";
    /// optional candidate bounds are scalars or [re, im] pair lists.
    #[pyo3(signature = (class_name, a = None, b = None))]
    fn membership(
        &self,
        py: Python<'_>,
        class_name: &str,
        a: Option<&Bound<'_, PyAny>>,
        b: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Py<PyAny>> {
        let class = MembershipClass::parse(class_name).map_err(core_err)?;
        let a = a.map(|x| element_from_py(x, self.inner.d())).transpose()?;
        let b = b.map(|x| element_from_py(x, self.inner.d())).transpose()?;
        let cert = self
            .inner
            .verify_membership(class, a.as_ref(), b.as_ref())
            .map_err(core_err)?;
        serialise(py, &cert)
    }

    /// Analysis coefficients of a vector (a list of module vectors).
    fn analysis(&self, py: Python<'_>, f: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
        let f = vector_from_py(f)?;
        let seq = self.inner.analysis(&f).map_err(core_err)?;
        serialise(py, &seq.items().to_vec())
    }

    /// Reconstruct a vector through the inverse frame operator; returns
    /// (reconstruction, residual).
    fn reconstruct(&self, py: Python<'_>, f: &Bound<'_, PyAny>) -> PyResult<(Py<PyAny>, f64)> {
        let f = vector_from_py(f)?;
        let (fhat, residual) = self.inner.reconstruct(&f).map_err(core_err)?;
        Ok((serialise(py, &fhat)?, residual))
    }

    /// Erasure certificate for a subset of submodule indices.
    fn erase_check(&self, py: Python<'_>, subset: Vec<usize>) -> PyResult<Py<PyAny>> {
        let cert = certs::erasure_subset(&self.inner, &subset).map_err(core_err)?;
        serialise(py, &cert)
    }

    /// Single-submodule removal certificate.
    fn removal_check(&self, py: Python<'_>, index: usize) -> PyResult<Py<PyAny>> {
        let cert = certs::removal_single(&self.inner, index).map_err(core_err)?;
        serialise(py, &cert)
    }

    /// Rotate every submodule by seeded random unitaries of the given
    /// size and certify stability of the frame property.
    fn perturb_check(&self, py: Python<'_>, magnitude: f64, seed: u64) -> PyResult<Py<PyAny>> {
        let perturbed =
            certs::build_perturbed_frame(&self.inner, magnitude, seed).map_err(core_err)?;
        let cert = certs::perturbation_stability(&self.inner, &perturbed.system, &perturbed.data)
            .map_err(core_err)?;
        serialise(py, &cert)
    }

    /// Equivalence certificate between the controlled and plain frame
    /// inequalities (commutation hypotheses required).
    fn uncontrolled_equivalence(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let cert = self.inner.uncontrolled_equivalence().map_err(core_err)?;
        serialise(py, &cert)
    }

    fn __repr__(&self) -> String {
        format!(
            "FrameSystem(d={}, n={}, m={}, positive_cross={})",
            self.inner.d(),
            self.inner.n(),
            self.inner.m(),
            self.inner.positive_cross()
        )
    }
}

/// Generate a seeded random frame system.
#[pyfunction]
#[pyo3(signature = (d = 1, n = 6, m = 4, rank_min = 1, rank_max = None,
                    weight_min = 0.5, weight_max = 1.5, cond = 4.0,
                    k_rank = None, seed = 0, preset = None))]
#[allow(clippy::too_many_arguments)]
fn generate(
    d: usize,
    n: usize,
    m: usize,
    rank_min: usize,
    rank_max: Option<usize>,
    weight_min: f64,
    weight_max: f64,
    cond: f64,
    k_rank: Option<usize>,
    seed: u64,
    preset: Option<&str>,
) -> PyResult<PyFrameSystem> {
    let preset = match preset {
        None => None,
        Some("parseval") => Some(Preset::Parseval),
        Some("erasure") => Some(Preset::Erasure),
        Some(other) => return Err(PyValueError::new_err(format!("unknown preset '{other}'"))),
    };
    let spec = InstanceSpec {
        d,
        n,
        m,
        rank_range: (rank_min, rank_max.unwrap_or(n.min(3))),
        weight_range: (weight_min, weight_max),
        control_condition: cond,
        k_rank: k_rank.unwrap_or(n),
        seed,
        preset,
    };
    Ok(PyFrameSystem {
        inner: instances::generate(&spec).map_err(core_err)?,
    })
}

/// The alternating-coordinate family on C^size with scalar controls.
#[pyfunction]
#[pyo3(signature = (size = 16, alpha = 1.0, beta = 1.0))]
fn example32(size: usize, alpha: f64, beta: f64) -> PyResult<PyFrameSystem> {
    Ok(PyFrameSystem {
        inner: instances::alternating_example(size, alpha, beta).map_err(core_err)?,
    })
}

/// Blockwise Moore-Penrose pseudoinverse of an operator given as one
/// n x n array of [re, im] pairs per component.
#[pyfunction]
#[pyo3(signature = (operator, tol = DEFAULT_TOL))]
fn moore_penrose(py: Python<'_>, operator: &Bound<'_, PyAny>, tol: f64) -> PyResult<Py<PyAny>> {
    let op = operator_from_py(operator)?;
    serialise(py, &op.moore_penrose(tol))
}

/// Range-inclusion test Im(T') ⊆ Im(T) with the smallest Douglas factor.
#[pyfunction]
#[pyo3(signature = (t_prime, t, tol = DEFAULT_TOL))]
fn douglas_check(
    py: Python<'_>,
    t_prime: &Bound<'_, PyAny>,
    t: &Bound<'_, PyAny>,
    tol: f64,
) -> PyResult<Py<PyAny>> {
    let t_prime = operator_from_py(t_prime)?;
    let t = operator_from_py(t)?;
    let report = ckfusion::operators::douglas_check(&t_prime, &t, tol).map_err(core_err)?;
    serialise(py, &report)
}

#[pymodule]
fn ckfusion_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrameSystem>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(example32, m)?)?;
    m.add_function(wrap_pyfunction!(moore_penrose, m)?)?;
    m.add_function(wrap_pyfunction!(douglas_check, m)?)?;
    m.add("DEFAULT_TOL", DEFAULT_TOL)?;
    Ok(())
}
