//! Python bindings for the sawtooth function algebra.
//!
//! Rationals cross the boundary as lowest-terms `"p/q"` strings in both
//! directions, so Python callers keep exactness without needing a bigint
//! rational type; integers that can exceed machine width (piece bounds,
//! mirror indices) become native Python ints. All computation stays exact
//! on the Rust side; `decimal()` is rendering only.

use num_bigint::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use sawtooth_core::{PwlFunction, Rational, RecurrentSpec};

fn parse(text: &str) -> PyResult<Rational> {
    sawtooth_core::parse_rational(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn value_err<E: std::fmt::Display>(err: E) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// A canonical piecewise-affine function on the real line.
#[pyclass(name = "PwlFunction")]
#[derive(Clone)]
struct PyPwl {
    inner: PwlFunction,
}

#[pymethods]
impl PyPwl {
    /// Build from breakpoints and per-piece (slope, intercept) pairs, all
    /// rational strings; pieces must number one more than breakpoints.
    #[new]
    fn new(breakpoints: Vec<String>, pieces: Vec<(String, String)>) -> PyResult<Self> {
        let bps = breakpoints
            .iter()
            .map(|b| parse(b))
            .collect::<PyResult<Vec<_>>>()?;
        let ps = pieces
            .iter()
            .map(|(slope, intercept)| {
                Ok(sawtooth_core::AffinePiece::new(
                    parse(slope)?,
                    parse(intercept)?,
                ))
            })
            .collect::<PyResult<Vec<_>>>()?;
        let inner = PwlFunction::new(bps, ps).map_err(value_err)?;
        Ok(PyPwl { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: PwlFunction = serde_json::from_str(text).map_err(value_err)?;
        Ok(PyPwl { inner })
    }

    #[staticmethod]
    fn identity() -> Self {
        PyPwl {
            inner: PwlFunction::identity(),
        }
    }

    #[staticmethod]
    fn relu() -> Self {
        PyPwl {
            inner: PwlFunction::relu(),
        }
    }

    #[staticmethod]
    fn constant(value: &str) -> PyResult<Self> {
        Ok(PyPwl {
            inner: PwlFunction::constant(parse(value)?),
        })
    }

    #[staticmethod]
    fn stump(threshold: &str) -> PyResult<Self> {
        Ok(PyPwl {
            inner: PwlFunction::stump(parse(threshold)?),
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serialization is infallible")
    }

    fn piece_count(&self) -> usize {
        self.inner.piece_count()
    }

    fn breakpoints(&self) -> Vec<String> {
        self.inner
            .breakpoints()
            .iter()
            .map(|b| b.to_string())
            .collect()
    }

    fn pieces(&self) -> Vec<(String, String)> {
        self.inner
            .pieces()
            .iter()
            .map(|p| (p.slope.to_string(), p.intercept.to_string()))
            .collect()
    }

    fn is_continuous(&self) -> bool {
        self.inner.is_continuous()
    }

    fn eval(&self, x: &str) -> PyResult<String> {
        Ok(self.inner.eval(&parse(x)?).to_string())
    }

    /// Decimal rendering of `eval(x)`; presentation only.
    #[pyo3(signature = (x, digits = 12))]
    fn eval_decimal(&self, x: &str, digits: usize) -> PyResult<String> {
        Ok(sawtooth_core::to_decimal(&self.inner.eval(&parse(x)?), digits))
    }

    fn add(&self, other: &PyPwl) -> Self {
        PyPwl {
            inner: self.inner.add(&other.inner),
        }
    }

    /// `self` after `inner`: x -> self(inner(x)).
    fn compose(&self, inner: &PyPwl) -> Self {
        PyPwl {
            inner: self.inner.compose(&inner.inner),
        }
    }

    fn scale_shift(&self, scale: &str, shift: &str) -> PyResult<Self> {
        Ok(PyPwl {
            inner: self.inner.scale_shift(&parse(scale)?, &parse(shift)?),
        })
    }

    fn negate(&self) -> Self {
        PyPwl {
            inner: self.inner.negate(),
        }
    }

    /// Label of the threshold classifier 1{self(x) >= 1/2}.
    fn classify(&self, x: &str) -> PyResult<bool> {
        Ok(self.inner.threshold_classifier().classify(&parse(x)?))
    }

    /// Constant-label region count of the threshold classifier.
    fn region_count(&self) -> usize {
        self.inner.threshold_classifier().region_count()
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        match other.extract::<PyRef<PyPwl>>() {
            Ok(o) => self.inner == o.inner,
            Err(_) => false,
        }
    }

    fn __repr__(&self) -> String {
        format!("PwlFunction({} pieces)", self.inner.piece_count())
    }
}

/// A 1-d network together with an iteration count (1 = plain feedforward).
#[pyclass(name = "Network")]
#[derive(Clone)]
struct PyNetwork {
    inner: RecurrentSpec,
}

#[pymethods]
impl PyNetwork {
    /// Parse the network JSON format; a plain network reads as one iteration.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: RecurrentSpec = serde_json::from_str(text).map_err(value_err)?;
        Ok(PyNetwork { inner })
    }

    /// The two-layer ReLU network computing the mirror map.
    #[staticmethod]
    fn mirror() -> Self {
        PyNetwork {
            inner: RecurrentSpec::new(sawtooth_core::mirror_network(), 1),
        }
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serialization is infallible")
    }

    fn depth(&self) -> usize {
        self.inner.base.depth()
    }

    fn width(&self) -> usize {
        self.inner.base.width()
    }

    fn iterations(&self) -> u32 {
        self.inner.iterations
    }

    /// Exact canonical compilation; `iterations` overrides the stored count.
    #[pyo3(signature = (iterations = None))]
    fn compile(&self, iterations: Option<u32>) -> PyResult<PyPwl> {
        let mut spec = self.inner.clone();
        if let Some(k) = iterations {
            spec.iterations = k;
        }
        Ok(PyPwl {
            inner: spec.compile().map_err(value_err)?,
        })
    }

    /// Numeric forward pass, independent of compilation.
    fn forward_eval(&self, x: &str) -> PyResult<String> {
        self.inner.validate().map_err(value_err)?;
        Ok(self.inner.forward_eval(&parse(x)?).to_string())
    }

    /// The `(t m)^{l k}` piece bound as a Python int.
    fn piece_bound(&self) -> BigInt {
        self.inner.piece_bound()
    }

    fn activation_pieces(&self) -> usize {
        self.inner.base.activation.piece_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(depth {}, width {}, iterations {})",
            self.inner.base.depth(),
            self.inner.base.width(),
            self.inner.iterations
        )
    }
}

/// The mirror map f_m as a 4-piece function.
#[pyfunction]
fn mirror_map() -> PyPwl {
    PyPwl {
        inner: sawtooth_core::mirror_map(),
    }
}

/// Direct closed form of the k-th mirror iterate (2^k + 2 pieces).
#[pyfunction]
fn mirror_closed_form_pwl(k: u32) -> PyResult<PyPwl> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be >= 1"));
    }
    Ok(PyPwl {
        inner: sawtooth_core::mirror_closed_form_pwl(k),
    })
}

/// f_m^k(x) via the dyadic decomposition, no composition involved.
#[pyfunction]
fn mirror_closed_form(x: &str, k: u32) -> PyResult<String> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be >= 1"));
    }
    Ok(sawtooth_core::mirror_closed_form(&parse(x)?, k).to_string())
}

/// The dyadic index/fraction pair (i, r) with x = (i + r) 2^{1-k}.
#[pyfunction]
fn mirror_decompose(x: &str, k: u32) -> PyResult<(BigInt, String)> {
    if k == 0 {
        return Err(PyValueError::new_err("k must be >= 1"));
    }
    let d = sawtooth_core::mirror_decompose(&parse(x)?, k);
    Ok((d.index, d.fraction.to_string()))
}

/// The alternating-point dataset on the uniform grid, as (x, label) pairs.
#[pyfunction]
fn n_ap(n: u64) -> PyResult<Vec<(String, u8)>> {
    let data = sawtooth_core::n_ap(n).map_err(value_err)?;
    Ok(dataset_pairs(&data))
}

/// The literal paper coordinates x_i = i 2^{-n}, i = 1..n.
#[pyfunction]
fn strict_paper_n_ap(n: u64) -> PyResult<Vec<(String, u8)>> {
    let data = sawtooth_core::strict_paper_n_ap(n).map_err(value_err)?;
    Ok(dataset_pairs(&data))
}

fn dataset_pairs(data: &sawtooth_core::LabeledDataset) -> Vec<(String, u8)> {
    data.points()
        .iter()
        .map(|(x, y)| (x.to_string(), u8::from(*y)))
        .collect()
}

/// Exact misclassification fraction of f's threshold classifier.
#[pyfunction]
fn classification_error(f: &PyPwl, points: Vec<(String, u8)>) -> PyResult<String> {
    let parsed = points
        .iter()
        .map(|(x, y)| Ok((parse(x)?, *y != 0)))
        .collect::<PyResult<Vec<_>>>()?;
    let data = sawtooth_core::LabeledDataset::new(parsed).map_err(value_err)?;
    Ok(sawtooth_core::classification_error(&f.inner, &data).to_string())
}

/// max(0, (n - 4t) / (3n)): the sawtooth classification lower bound.
#[pyfunction]
fn sawtooth_lower_bound(n: u64, t: u64) -> String {
    sawtooth_core::sawtooth_lower_bound(n, t).to_string()
}

/// The network form of the bound, as the full report JSON.
#[pyfunction]
fn network_lower_bound(n: u64, t: u64, m: u64, l: u32) -> String {
    serde_json::to_string(&sawtooth_core::network_lower_bound(n, t, m, l))
        .expect("serialization is infallible")
}

/// Runs one verification suite; returns the report JSON. Failures are
/// reported in the JSON, not raised; unknown names raise ValueError.
#[pyfunction]
#[pyo3(signature = (name, cases = None, seed = 0))]
fn run_suite(name: &str, cases: Option<u64>, seed: u64) -> PyResult<String> {
    let suite = sawtooth_core::Suite::from_name(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown suite {name:?}")))?;
    let cases = cases.unwrap_or_else(|| suite.default_cases());
    let report = sawtooth_core::run_suite(suite, cases, seed);
    Ok(serde_json::to_string(&report).expect("serialization is infallible"))
}

#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    sawtooth_core::Suite::ALL.iter().map(|s| s.name()).collect()
}

/// Decimal rendering of a rational string; presentation only.
#[pyfunction]
#[pyo3(signature = (x, digits = 12))]
fn decimal(x: &str, digits: usize) -> PyResult<String> {
    Ok(sawtooth_core::to_decimal(&parse(x)?, digits))
}

#[pymodule]
fn sawtooth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPwl>()?;
    m.add_class::<PyNetwork>()?;
    m.add_function(wrap_pyfunction!(mirror_map, m)?)?;
    m.add_function(wrap_pyfunction!(mirror_closed_form_pwl, m)?)?;
    m.add_function(wrap_pyfunction!(mirror_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(mirror_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(n_ap, m)?)?;
    m.add_function(wrap_pyfunction!(strict_paper_n_ap, m)?)?;
    m.add_function(wrap_pyfunction!(classification_error, m)?)?;
    m.add_function(wrap_pyfunction!(sawtooth_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(network_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    m.add_function(wrap_pyfunction!(decimal, m)?)?;
    Ok(())
}
