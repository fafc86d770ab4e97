//! Python bindings for the qcalc toolkit.
//!
//! Exposes the scalar q-primitives, the exact N[q] polynomials, the
//! weighted-tree model, the Gamma_{q,k}/B_{q,k} special functions, the
//! k-gamma and k-beta q-distributions, and the verification suites.
//!
//! ```python
//! import qcalc_py as qc
//!
//! p = qc.QParams(0.5, 2.0)
//! qc.gamma_qk(4.0, p)                      # Gamma_{q,k}(2k) = [k]_q
//! qc.weighted_cardinality(2, 2, 1)         # 1 + 2q + 2q^2 + q^3
//! d = qc.KGammaDist(p, 1.0)
//! d.cdf(d.upper)                           # series CDF
//! d.lattice(1e-9).sample(10, seed=42)
//! ```

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyAnyMethods, PyModule};

use qcalc::qcore::{self, ProductOrder};
use qcalc::qdist;
use qcalc::qpoly;
use qcalc::qspecial;
use qcalc::qtrees;
use qcalc::verify;
use qcalc::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::NonConvergence { .. } | Error::BudgetExceeded { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
    }
}

/// Validated (q, k) parameter pair: 0 <= q < 1, k > 0.
#[pyclass(name = "QParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyQParams {
    inner: qcore::QParams,
}

#[pymethods]
impl PyQParams {
    #[new]
    fn new(q: f64, k: f64) -> PyResult<Self> {
        Ok(PyQParams {
            inner: qcore::QParams::new(q, k).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    fn __repr__(&self) -> String {
        format!("QParams(q={}, k={})", self.inner.q(), self.inner.k())
    }
}

/// Series truncation policy: relative tolerance, consecutive small terms,
/// hard term cap.
#[pyclass(name = "SeriesControl", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeriesControl {
    inner: qcore::SeriesControl,
}

#[pymethods]
impl PySeriesControl {
    #[new]
    #[pyo3(signature = (rtol=1e-14, consecutive=3, max_terms=100_000))]
    fn new(rtol: f64, consecutive: usize, max_terms: usize) -> PyResult<Self> {
        Ok(PySeriesControl {
            inner: qcore::SeriesControl::new(rtol, consecutive, max_terms).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "SeriesControl(rtol={}, consecutive={}, max_terms={})",
            self.inner.rtol(),
            self.inner.consecutive(),
            self.inner.max_terms()
        )
    }
}

fn ctl_of(ctl: Option<&PySeriesControl>) -> qcore::SeriesControl {
    ctl.map_or_else(qcore::SeriesControl::default, |c| c.inner)
}

/// Exact polynomial in q with non-negative integer coefficients.
#[pyclass(name = "QPolynomial", skip_from_py_object)]
#[derive(Clone)]
struct PyQPolynomial {
    inner: qpoly::QPolynomial,
}

fn biguint_to_pyint<'py>(
    py: Python<'py>,
    v: &qcalc::num_bigint::BigUint,
) -> PyResult<Bound<'py, PyAny>> {
    py.import("builtins")?
        .getattr("int")?
        .call1((v.to_string(),))
}

#[pymethods]
impl PyQPolynomial {
    /// Builds from coefficients indexed by power of q (Python ints of any
    /// size; trailing zeros are trimmed).
    #[new]
    fn new(coeffs: Vec<Bound<'_, PyAny>>) -> PyResult<Self> {
        let mut parsed = Vec::with_capacity(coeffs.len());
        for c in &coeffs {
            let s = c.str()?.to_string();
            let v = s
                .parse::<qcalc::num_bigint::BigUint>()
                .map_err(|_| PyValueError::new_err(format!("bad coefficient {s:?}")))?;
            parsed.push(v);
        }
        Ok(PyQPolynomial {
            inner: qpoly::QPolynomial::from_coeffs(parsed),
        })
    }

    /// q^exponent.
    #[staticmethod]
    fn monomial(exponent: usize) -> Self {
        PyQPolynomial {
            inner: qpoly::QPolynomial::monomial(exponent),
        }
    }

    fn coeffs<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.inner
            .coeffs()
            .iter()
            .map(|c| biguint_to_pyint(py, c))
            .collect()
    }

    fn degree(&self) -> Option<usize> {
        self.inner.degree()
    }

    fn eval(&self, q: f64) -> f64 {
        self.inner.eval(q)
    }

    fn __add__(&self, other: &PyQPolynomial) -> Self {
        PyQPolynomial {
            inner: &self.inner + &other.inner,
        }
    }

    fn __mul__(&self, other: &PyQPolynomial) -> Self {
        PyQPolynomial {
            inner: &self.inner * &other.inner,
        }
    }

    fn __eq__(&self, other: &PyQPolynomial) -> bool {
        self.inner == other.inner
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("QPolynomial({})", self.inner)
    }
}

// --------------------------------------------------------------------------
// Scalar q-primitives.
// --------------------------------------------------------------------------

/// [t]_q = (1 - q^t)/(1 - q).
#[pyfunction]
fn q_bracket(t: f64, q: f64) -> PyResult<f64> {
    qcore::q_bracket(t, q).map_err(to_py_err)
}

/// [t]_{n,k} = prod_{j<n} [t+jk]_q.
#[pyfunction]
fn q_pochhammer_k(t: f64, n: u32, params: &PyQParams) -> f64 {
    qcore::q_pochhammer_k(t, n, &params.inner)
}

/// (t)_{n,k} = prod_{j<n} (t+jk), the q -> 1 reference.
#[pyfunction]
fn classical_pochhammer_k(t: f64, n: u32, k: f64) -> f64 {
    qcore::classical_pochhammer_k(t, n, k)
}

/// (x + y)_base^n; n=None gives the infinite product.
#[pyfunction]
#[pyo3(signature = (x, y, n, base, ctl=None))]
fn q_shifted_product(
    x: f64,
    y: f64,
    n: Option<u32>,
    base: f64,
    ctl: Option<&PySeriesControl>,
) -> PyResult<f64> {
    let order = n.map_or(ProductOrder::Infinite, ProductOrder::Finite);
    qcore::q_shifted_product(x, y, order, base, &ctl_of(ctl)).map_err(to_py_err)
}

/// (1 + x)_base^exponent for real exponents.
#[pyfunction]
#[pyo3(signature = (x, exponent, base, ctl=None))]
fn q_shifted_power(
    x: f64,
    exponent: f64,
    base: f64,
    ctl: Option<&PySeriesControl>,
) -> PyResult<f64> {
    qcore::q_shifted_power(x, exponent, base, &ctl_of(ctl)).map_err(to_py_err)
}

/// E_base^x = sum_n base^{n(n-1)/2} x^n / [n]_base!.
#[pyfunction]
#[pyo3(signature = (x, base, ctl=None))]
fn q_exponential(x: f64, base: f64, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
    qcore::q_exponential_e(x, base, &ctl_of(ctl)).map_err(to_py_err)
}

/// Call a Python function from numeric code, funnelling Python errors out.
struct PyCallable<'py> {
    f: &'py Bound<'py, PyAny>,
    failure: std::cell::RefCell<Option<PyErr>>,
}

impl<'py> PyCallable<'py> {
    fn new(f: &'py Bound<'py, PyAny>) -> Self {
        PyCallable {
            f,
            failure: std::cell::RefCell::new(None),
        }
    }

    fn call(&self, x: f64) -> f64 {
        match self.f.call1((x,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn surface(self, outcome: Result<f64, Error>) -> PyResult<f64> {
        if let Some(e) = self.failure.into_inner() {
            return Err(e);
        }
        outcome.map_err(to_py_err)
    }
}

/// q-derivative (f(qx) - f(x)) / ((q-1) x) of a Python callable.
#[pyfunction]
fn q_derivative(f: &Bound<'_, PyAny>, x: f64, q: f64) -> PyResult<f64> {
    let callable = PyCallable::new(f);
    let outcome = qcore::q_derivative(|v| callable.call(v), x, q);
    callable.surface(outcome)
}

/// Jackson q-integral of a Python callable from a to b.
#[pyfunction]
#[pyo3(signature = (f, a, b, q, ctl=None))]
fn jackson_integral(
    f: &Bound<'_, PyAny>,
    a: f64,
    b: f64,
    q: f64,
    ctl: Option<&PySeriesControl>,
) -> PyResult<f64> {
    let callable = PyCallable::new(f);
    let outcome = qcore::jackson_integral(|v| callable.call(v), a, b, q, &ctl_of(ctl));
    callable.surface(outcome)
}

// --------------------------------------------------------------------------
// Special functions.
// --------------------------------------------------------------------------

fn parse_gamma_method(name: &str) -> PyResult<qspecial::GammaMethod> {
    match name {
        "closed" => Ok(qspecial::GammaMethod::ClosedForm),
        "product" => Ok(qspecial::GammaMethod::InfiniteProduct),
        "series" => Ok(qspecial::GammaMethod::Series),
        "integral" => Ok(qspecial::GammaMethod::QIntegral),
        other => Err(PyValueError::new_err(format!(
            "unknown gamma method {other:?}; expected closed, product, series, or integral"
        ))),
    }
}

fn parse_beta_method(name: &str) -> PyResult<qspecial::BetaMethod> {
    match name {
        "ratio" => Ok(qspecial::BetaMethod::GammaRatio),
        "closed" => Ok(qspecial::BetaMethod::ClosedForm),
        "integral" => Ok(qspecial::BetaMethod::QIntegral),
        other => Err(PyValueError::new_err(format!(
            "unknown beta method {other:?}; expected ratio, closed, or integral"
        ))),
    }
}

fn parse_cdf_method(name: &str) -> PyResult<qdist::CdfMethod> {
    match name {
        "series" => Ok(qdist::CdfMethod::Series),
        "jackson" => Ok(qdist::CdfMethod::Jackson),
        other => Err(PyValueError::new_err(format!(
            "unknown CDF method {other:?}; expected series or jackson"
        ))),
    }
}

/// Gamma_{q,k}(t); method in {"closed", "product", "series", "integral"}.
#[pyfunction]
#[pyo3(signature = (t, params, method="closed", ctl=None))]
fn gamma_qk(
    t: f64,
    params: &PyQParams,
    method: &str,
    ctl: Option<&PySeriesControl>,
) -> PyResult<f64> {
    qspecial::gamma_qk(t, &params.inner, parse_gamma_method(method)?, &ctl_of(ctl))
        .map_err(to_py_err)
}

/// The plain q-gamma Gamma_q(t).
#[pyfunction]
#[pyo3(signature = (t, q, ctl=None))]
fn gamma_q(t: f64, q: f64, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
    qcore::QParams::new(q, 1.0).map_err(to_py_err)?;
    qspecial::gamma_q(t, q, &ctl_of(ctl)).map_err(to_py_err)
}

/// Both sides of Gamma_{q,k}(t) = [k]_q^{t/k-1} Gamma_{q^k}(t/k).
#[pyfunction]
#[pyo3(signature = (t, params, ctl=None))]
fn gamma_base_change_check(
    t: f64,
    params: &PyQParams,
    ctl: Option<&PySeriesControl>,
) -> PyResult<(f64, f64)> {
    qspecial::gamma_qk_lemma_check(t, &params.inner, &ctl_of(ctl)).map_err(to_py_err)
}

/// Both sides of the shifted-power summation identity.
#[pyfunction]
#[pyo3(signature = (t, params, ctl=None))]
fn pochhammer_sum_check(
    t: f64,
    params: &PyQParams,
    ctl: Option<&PySeriesControl>,
) -> PyResult<(f64, f64)> {
    qspecial::pochhammer_identity_corollary(t, &params.inner, &ctl_of(ctl)).map_err(to_py_err)
}

/// B_{q,k}(t, s); method in {"ratio", "closed", "integral"}.
#[pyfunction]
#[pyo3(signature = (t, s, params, method="closed", ctl=None))]
fn beta_qk(
    t: f64,
    s: f64,
    params: &PyQParams,
    method: &str,
    ctl: Option<&PySeriesControl>,
) -> PyResult<f64> {
    qspecial::beta_qk(
        t,
        s,
        &params.inner,
        parse_beta_method(method)?,
        &ctl_of(ctl),
    )
    .map_err(to_py_err)
}

// --------------------------------------------------------------------------
// Trees.
// --------------------------------------------------------------------------

fn shape_of(t: u32, n: u32, k: u32) -> PyResult<qtrees::TreeShapeParams> {
    qtrees::TreeShapeParams::new(t, n, k).map_err(to_py_err)
}

/// Exact weighted cardinality prod_{j<n} [t+jk]_q as a polynomial.
#[pyfunction]
fn weighted_cardinality(t: u32, n: u32, k: u32) -> PyResult<PyQPolynomial> {
    Ok(PyQPolynomial {
        inner: qtrees::weighted_cardinality(&shape_of(t, n, k)?),
    })
}

/// The same polynomial by brute-force tree enumeration.
#[pyfunction]
#[pyo3(signature = (t, n, k, budget=qtrees::DEFAULT_ENUMERATION_BUDGET))]
fn weighted_cardinality_enumerated(t: u32, n: u32, k: u32, budget: u64) -> PyResult<PyQPolynomial> {
    Ok(PyQPolynomial {
        inner: qtrees::weighted_cardinality_enumerated(&shape_of(t, n, k)?, budget)
            .map_err(to_py_err)?,
    })
}

/// |T(t,n,k)| as an exact integer.
#[pyfunction]
fn unweighted_count<'py>(py: Python<'py>, t: u32, n: u32, k: u32) -> PyResult<Bound<'py, PyAny>> {
    biguint_to_pyint(py, &qtrees::unweighted_count(&shape_of(t, n, k)?))
}

/// All trees of the shape as (sequence, weight_exponent, tree_json) triples,
/// in lexicographic sequence order.
#[pyfunction]
#[pyo3(signature = (t, n, k, budget=qtrees::DEFAULT_ENUMERATION_BUDGET))]
fn enumerate_trees(t: u32, n: u32, k: u32, budget: u64) -> PyResult<Vec<(Vec<u32>, u64, String)>> {
    let shape = shape_of(t, n, k)?;
    let items = qtrees::enumerate(&shape, budget).map_err(to_py_err)?;
    Ok(items
        .map(|item| {
            let json = serde_json::to_string(&item.tree).expect("trees serialize");
            (item.sequence.indices().to_vec(), item.weight_exponent, json)
        })
        .collect())
}

/// Builds the tree coded by a grafting sequence; returns its JSON form.
#[pyfunction]
fn compose_tree(seq: Vec<u32>, t: u32, k: u32) -> PyResult<String> {
    let shape = shape_of(t, seq.len() as u32, k)?;
    let code = qtrees::GraftingSequence::new(seq, &shape).map_err(to_py_err)?;
    let tree = qtrees::compose(&code, &shape).map_err(to_py_err)?;
    Ok(serde_json::to_string(&tree).expect("trees serialize"))
}

/// Recovers the grafting sequence of a tree given as JSON.
#[pyfunction]
fn decompose_tree(tree_json: &str, t: u32, n: u32, k: u32) -> PyResult<Vec<u32>> {
    let shape = shape_of(t, n, k)?;
    let tree: qtrees::PlantedTree = serde_json::from_str(tree_json)
        .map_err(|e| PyValueError::new_err(format!("bad tree JSON: {e}")))?;
    let code = qtrees::decompose(&tree, &shape).map_err(to_py_err)?;
    Ok(code.indices().to_vec())
}

/// Weight monomial q^{sum (l_i - 1)} of a grafting sequence.
#[pyfunction]
fn tree_weight(seq: Vec<u32>, t: u32, k: u32) -> PyResult<PyQPolynomial> {
    let shape = shape_of(t, seq.len() as u32, k)?;
    let code = qtrees::GraftingSequence::new(seq, &shape).map_err(to_py_err)?;
    Ok(PyQPolynomial {
        inner: qtrees::weight(&code),
    })
}

// --------------------------------------------------------------------------
// Distributions.
// --------------------------------------------------------------------------

/// k-gamma q-distribution with shape t.
#[pyclass(name = "KGammaDist", frozen)]
struct PyKGammaDist {
    inner: qdist::KGammaDist,
}

#[pymethods]
impl PyKGammaDist {
    #[new]
    fn new(params: &PyQParams, t: f64) -> PyResult<Self> {
        Ok(PyKGammaDist {
            inner: qdist::KGammaDist::new(params.inner, t).map_err(to_py_err)?,
        })
    }

    /// Upper endpoint [k]_q^{1/k}/(1-q^k)^{1/k} of the support.
    #[getter]
    fn upper(&self) -> f64 {
        self.inner.upper()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t()
    }

    #[pyo3(signature = (x, ctl=None))]
    fn density(&self, x: f64, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
        self.inner.density(x, &ctl_of(ctl)).map_err(to_py_err)
    }

    #[pyo3(signature = (x, method="series", ctl=None))]
    fn cdf(&self, x: f64, method: &str, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
        self.inner
            .cdf(x, parse_cdf_method(method)?, &ctl_of(ctl))
            .map_err(to_py_err)
    }

    /// Moment of order n*k; equals [t]_{n,k}.
    #[pyo3(signature = (n, ctl=None))]
    fn moment(&self, n: u32, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
        self.inner.moment(n, &ctl_of(ctl)).map_err(to_py_err)
    }

    #[pyo3(signature = (tail_tol=1e-9, ctl=None))]
    fn lattice(&self, tail_tol: f64, ctl: Option<&PySeriesControl>) -> PyResult<PyLatticeMeasure> {
        Ok(PyLatticeMeasure {
            inner: self
                .inner
                .lattice_measure(tail_tol, &ctl_of(ctl))
                .map_err(to_py_err)?,
        })
    }
}

/// k-beta q-distribution with shapes (t, s).
#[pyclass(name = "KBetaDist", frozen)]
struct PyKBetaDist {
    inner: qdist::KBetaDist,
}

#[pymethods]
impl PyKBetaDist {
    #[new]
    fn new(params: &PyQParams, t: f64, s: f64) -> PyResult<Self> {
        Ok(PyKBetaDist {
            inner: qdist::KBetaDist::new(params.inner, t, s).map_err(to_py_err)?,
        })
    }

    /// Upper endpoint [k]_q^{1/k} of the support.
    #[getter]
    fn upper(&self) -> f64 {
        self.inner.upper()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.inner.t()
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s()
    }

    #[pyo3(signature = (x, ctl=None))]
    fn density(&self, x: f64, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
        self.inner.density(x, &ctl_of(ctl)).map_err(to_py_err)
    }

    #[pyo3(signature = (x, method="series", ctl=None))]
    fn cdf(&self, x: f64, method: &str, ctl: Option<&PySeriesControl>) -> PyResult<f64> {
        self.inner
            .cdf(x, parse_cdf_method(method)?, &ctl_of(ctl))
            .map_err(to_py_err)
    }

    #[pyo3(signature = (tail_tol=1e-9, ctl=None))]
    fn lattice(&self, tail_tol: f64, ctl: Option<&PySeriesControl>) -> PyResult<PyLatticeMeasure> {
        Ok(PyLatticeMeasure {
            inner: self
                .inner
                .lattice_measure(tail_tol, &ctl_of(ctl))
                .map_err(to_py_err)?,
        })
    }
}

/// Discrete lattice realization {q^m b} of a q-density.
#[pyclass(name = "LatticeMeasure", frozen)]
struct PyLatticeMeasure {
    inner: qdist::LatticeMeasure,
}

#[pymethods]
impl PyLatticeMeasure {
    fn support(&self) -> Vec<f64> {
        self.inner.support().to_vec()
    }

    fn masses(&self) -> Vec<f64> {
        self.inner.masses().to_vec()
    }

    #[getter]
    fn tail_tol(&self) -> f64 {
        self.inner.tail_tol()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn cdf_at_support(&self) -> Vec<f64> {
        self.inner.cdf_at_support()
    }

    /// Deterministic inverse-CDF draws for a fixed seed.
    #[pyo3(signature = (count, seed=0))]
    fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        self.inner.sample(count, seed)
    }

    /// {"support": [...], "masses": [...], "tail_tol": ...} JSON form.
    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("measure serializes")
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

// --------------------------------------------------------------------------
// Verification.
// --------------------------------------------------------------------------

/// Runs a verification suite ("all", "qcore", "trees", "gamma", "beta",
/// "moments") and returns the JSON report string.
#[pyfunction]
#[pyo3(signature = (suite, tol=None))]
fn verify_suite(suite: &str, tol: Option<f64>) -> PyResult<String> {
    let suite = verify::Suite::from_name(suite)
        .ok_or_else(|| PyValueError::new_err(format!("unknown suite {suite:?}")))?;
    let report = verify::run_suite(suite, tol);
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[pymodule]
fn qcalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQParams>()?;
    m.add_class::<PySeriesControl>()?;
    m.add_class::<PyQPolynomial>()?;
    m.add_class::<PyKGammaDist>()?;
    m.add_class::<PyKBetaDist>()?;
    m.add_class::<PyLatticeMeasure>()?;
    m.add_function(wrap_pyfunction!(q_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(q_pochhammer_k, m)?)?;
    m.add_function(wrap_pyfunction!(classical_pochhammer_k, m)?)?;
    m.add_function(wrap_pyfunction!(q_shifted_product, m)?)?;
    m.add_function(wrap_pyfunction!(q_shifted_power, m)?)?;
    m.add_function(wrap_pyfunction!(q_exponential, m)?)?;
    m.add_function(wrap_pyfunction!(q_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(jackson_integral, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_qk, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_q, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_base_change_check, m)?)?;
    m.add_function(wrap_pyfunction!(pochhammer_sum_check, m)?)?;
    m.add_function(wrap_pyfunction!(beta_qk, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_cardinality, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_cardinality_enumerated, m)?)?;
    m.add_function(wrap_pyfunction!(unweighted_count, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_trees, m)?)?;
    m.add_function(wrap_pyfunction!(compose_tree, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_tree, m)?)?;
    m.add_function(wrap_pyfunction!(tree_weight, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    Ok(())
}
