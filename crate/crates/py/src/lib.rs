//! Python bindings. Rationals cross the boundary as `fractions.Fraction`,
//! integers as Python `int`, reports as plain dicts.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyTuple};

use permoment::aggregate::{self as agg, BruteConfig};
use permoment::closedform::{self, LinearityCase};
use permoment::factorial_basis::{self, FactorialCombination as CoreCombination};
use permoment::merge::{self, FactorialVariant};
use permoment::numbers::{self, format_rational, parse_rational};
use permoment::reproduce::{reproduce_paper as core_reproduce, ReproduceOptions};
use permoment::{clt, Integer, Limits, Rational};

create_exception!(permoment, PermomentError, PyValueError);

fn err(e: permoment::Error) -> PyErr {
    PermomentError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, q: &Rational) -> PyResult<Bound<'py, PyAny>> {
    let cls = py.import("fractions")?.getattr("Fraction")?;
    cls.call1((q.numer().clone(), q.denom().clone()))
}

fn to_rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(i) = obj.extract::<Integer>() {
        return Ok(Rational::from_integer(i));
    }
    if let Ok(s) = obj.extract::<String>() {
        return parse_rational(&s).map_err(err);
    }
    if obj.hasattr("numerator")? && obj.hasattr("denominator")? {
        let p: Integer = obj.getattr("numerator")?.extract()?;
        let q: Integer = obj.getattr("denominator")?.extract()?;
        if q == Integer::from(0) {
            return Err(PermomentError::new_err("zero denominator"));
        }
        return Ok(Rational::new(p, q));
    }
    Err(PermomentError::new_err(format!(
        "expected int, Fraction or \"p/q\" string, got {}",
        obj.get_type().name()?
    )))
}

/// Serialized form of a report as a Python object via `json.loads`.
fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PermomentError::new_err(e.to_string()))?;
    py.import("json")?.getattr("loads")?.call1((text,))
}

#[pyclass(module = "permoment", from_py_object, frozen, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation(permoment::Permutation);

#[pymethods]
impl Permutation {
    /// From a list of values or a word such as "3142".
    #[new]
    fn new(values: &Bound<'_, PyAny>) -> PyResult<Self> {
        if let Ok(s) = values.extract::<String>() {
            return s.parse().map(Permutation).map_err(err);
        }
        let v: Vec<usize> = values.extract()?;
        permoment::Permutation::new(v).map(Permutation).map_err(err)
    }

    #[staticmethod]
    fn unrank(n: usize, index: u64) -> PyResult<Self> {
        permoment::Permutation::unrank(n, index).map(Permutation).map_err(err)
    }

    #[getter]
    fn values(&self) -> Vec<usize> {
        self.0.values().to_vec()
    }

    fn rank(&self) -> u64 {
        self.0.rank()
    }

    /// Positions of the values 1..n.
    fn inverse(&self) -> Vec<usize> {
        self.0.inverse().as_slice().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Permutation({:?})", self.0.values())
    }
}

fn perm_of(obj: &Bound<'_, PyAny>) -> PyResult<permoment::Permutation> {
    if let Ok(p) = obj.extract::<Permutation>() {
        return Ok(p.0);
    }
    Permutation::new(obj).map(|p| p.0)
}

#[pyclass(module = "permoment", from_py_object, frozen, eq, hash)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pattern(permoment::Pattern);

#[pymethods]
impl Pattern {
    /// `Pattern("3[12];D={2}")`, its JSON form, or `Pattern([3,1,2], C=[2], D=[2])`.
    #[new]
    #[pyo3(signature = (spec, C=None, D=None))]
    #[allow(non_snake_case)]
    fn new(spec: &Bound<'_, PyAny>, C: Option<Vec<usize>>, D: Option<Vec<usize>>) -> PyResult<Self> {
        if let Ok(s) = spec.extract::<String>() {
            if C.is_some() || D.is_some() {
                return Err(PermomentError::new_err("C and D go with a permutation, not pattern text"));
            }
            return permoment::Pattern::parse_any(&s).map(Pattern).map_err(err);
        }
        let perm = perm_of(spec)?;
        permoment::Pattern::new(perm, C.unwrap_or_default(), D.unwrap_or_default())
            .map(Pattern)
            .map_err(err)
    }

    #[getter]
    fn perm(&self) -> Permutation {
        Permutation(self.0.perm().clone())
    }

    #[getter(C)]
    fn adj_c(&self) -> Vec<usize> {
        self.0.adj_c().to_vec()
    }

    #[getter(D)]
    fn adj_d(&self) -> Vec<usize> {
        self.0.adj_d().to_vec()
    }

    fn blocks(&self) -> Vec<usize> {
        self.0.blocks()
    }

    fn count(&self, perm: &Bound<'_, PyAny>) -> PyResult<Integer> {
        Ok(self.0.count(&perm_of(perm)?))
    }

    /// `(values, positions)` pairs.
    fn occurrences(&self, perm: &Bound<'_, PyAny>) -> PyResult<Vec<(Vec<usize>, Vec<usize>)>> {
        Ok(self
            .0
            .occurrences(&perm_of(perm)?)
            .into_iter()
            .map(|o| (o.values, o.positions))
            .collect())
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Pattern({:?})", self.0.to_string())
    }
}

fn pattern_of(obj: &Bound<'_, PyAny>) -> PyResult<permoment::Pattern> {
    if let Ok(p) = obj.extract::<Pattern>() {
        return Ok(p.0);
    }
    Pattern::new(obj, None, None).map(|p| p.0)
}

#[pyclass(module = "permoment", from_py_object, frozen)]
#[derive(Clone)]
pub struct Statistic(permoment::Statistic);

#[pymethods]
impl Statistic {
    /// A preset name, `cnt:<pattern>`, or a JSON spec document.
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        permoment::Statistic::load(spec).map(Statistic).map_err(err)
    }

    #[staticmethod]
    fn count(pattern: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Statistic(permoment::Statistic::count(pattern_of(pattern)?)))
    }

    /// One term `Q1(values)·Q2(positions)` summed over occurrences.
    #[staticmethod]
    #[pyo3(signature = (pattern, q1="1", q2="1"))]
    fn simple(pattern: &Bound<'_, PyAny>, q1: &str, q2: &str) -> PyResult<Self> {
        let p = pattern_of(pattern)?;
        let k = p.len();
        let q1 = permoment::ValuationPoly::parse(q1, k).map_err(err)?;
        let q2 = permoment::ValuationPoly::parse(q2, k).map_err(err)?;
        let s = permoment::SimpleStatistic::new(p, q1, q2).map_err(err)?;
        Ok(Statistic(permoment::Statistic::simple(s)))
    }

    #[staticmethod]
    fn presets() -> Vec<&'static str> {
        permoment::statistic::PRESETS.to_vec()
    }

    fn evaluate<'py>(&self, py: Python<'py>, perm: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.evaluate(&perm_of(perm)?))
    }

    fn degree(&self) -> u32 {
        self.0.degree()
    }

    fn __add__(&self, other: &Statistic) -> Statistic {
        Statistic(self.0.plus(&other.0))
    }

    fn __mul__(&self, c: &Bound<'_, PyAny>) -> PyResult<Statistic> {
        Ok(Statistic(self.0.scale(&to_rational(c)?)))
    }

    fn __rmul__(&self, c: &Bound<'_, PyAny>) -> PyResult<Statistic> {
        self.__mul__(c)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Statistic({})", self.0.to_json())
    }
}

#[pyclass(module = "permoment", from_py_object, frozen, eq)]
#[derive(Clone, PartialEq, Eq)]
pub struct FactorialCombination(CoreCombination);

#[pymethods]
impl FactorialCombination {
    /// From formula text such as "-1/2*(n+1)! + 1/6*(n+2)!" or a dict
    /// `{offset: coefficient}`.
    #[new]
    #[pyo3(signature = (spec, valid_from=0))]
    fn new(spec: &Bound<'_, PyAny>, valid_from: i64) -> PyResult<Self> {
        if let Ok(s) = spec.extract::<String>() {
            let fc = factorial_basis::parse_formula(&s).map_err(err)?;
            return Ok(FactorialCombination(fc.with_valid_from(valid_from)));
        }
        let dict = spec.cast::<PyDict>()?;
        let mut coeffs = Vec::new();
        for (k, v) in dict.iter() {
            coeffs.push((k.extract::<i64>()?, to_rational(&v)?));
        }
        Ok(FactorialCombination(CoreCombination::new(coeffs, valid_from)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(FactorialCombination)
            .map_err(|e| PermomentError::new_err(e.to_string()))
    }

    #[getter]
    fn coeffs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (i, c) in self.0.coeffs() {
            d.set_item(*i, fraction(py, c)?)?;
        }
        Ok(d)
    }

    #[getter]
    fn valid_from(&self) -> i64 {
        self.0.valid_from
    }

    fn evaluate<'py>(&self, py: Python<'py>, n: i64) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.evaluate(n).map_err(err)?)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("FactorialCombination({:?}, valid_from={})", self.0.to_string(), self.0.valid_from)
    }
}

fn limits(max_n: Option<usize>) -> Limits {
    let mut l = Limits::from_env();
    if let Some(n) = max_n {
        l.max_n = n;
    }
    l
}

fn brute(max_n: Option<usize>, threads: usize) -> BruteConfig {
    BruteConfig {
        max_n: limits(max_n).max_n,
        threads,
        ..BruteConfig::default()
    }
}

/// `M(f^r, n)`; `method` is "auto", "brute" or "fast".
#[pyfunction]
#[pyo3(signature = (stat, n, r=1, method="auto", threads=0, max_n=None))]
fn aggregate<'py>(
    py: Python<'py>,
    stat: &Statistic,
    n: usize,
    r: u32,
    method: &str,
    threads: usize,
    max_n: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = brute(max_n, threads);
    let s = stat.0.clone();
    let value = match method {
        "auto" => py.detach(|| agg::aggregate(&s, n, r, &cfg)).map_err(err)?.value,
        "brute" => py.detach(|| agg::aggregate_brute(&s, n, r, &cfg)).map_err(err)?.value,
        "fast" if r == 1 => agg::aggregate_fast(&s, n).value,
        "fast" => return Err(PermomentError::new_err("the fast method computes first moments only")),
        other => return Err(PermomentError::new_err(format!("unknown method {other:?}"))),
    };
    fraction(py, &value)
}

#[pyfunction]
#[pyo3(signature = (stat, n, r=1, threads=0, max_n=None))]
fn expectation<'py>(
    py: Python<'py>,
    stat: &Statistic,
    n: usize,
    r: u32,
    threads: usize,
    max_n: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = brute(max_n, threads);
    let s = stat.0.clone();
    let v = py.detach(|| agg::expectation(&s, n, r, &cfg)).map_err(err)?;
    fraction(py, &v)
}

#[pyfunction]
#[pyo3(signature = (stat, n, threads=0, max_n=None))]
fn variance<'py>(
    py: Python<'py>,
    stat: &Statistic,
    n: usize,
    threads: usize,
    max_n: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = brute(max_n, threads);
    let s = stat.0.clone();
    let v = py.detach(|| agg::variance(&s, n, &cfg)).map_err(err)?;
    fraction(py, &v)
}

/// Exact fit of `(n, value)` pairs on the given offsets, verified on every
/// point beyond the square system.
#[pyfunction]
fn fit(data: &Bound<'_, PyList>, offsets: Vec<i64>) -> PyResult<FactorialCombination> {
    let mut points = Vec::with_capacity(data.len());
    for item in data.iter() {
        let t = item.cast::<PyTuple>()?;
        points.push((t.get_item(0)?.extract::<i64>()?, to_rational(&t.get_item(1)?)?));
    }
    factorial_basis::fit(&points, &offsets)
        .map(FactorialCombination)
        .map_err(err)
}

/// `(lo, hi, valid_from)` guaranteed for `M(f^r, n)`.
#[pyfunction]
#[pyo3(signature = (stat, r=1))]
fn default_offsets(stat: &Statistic, r: u32) -> (i64, i64, i64) {
    let w = factorial_basis::default_offsets(&stat.0, r);
    (w.lo, w.hi, w.valid_from)
}

/// Samples `M(f^r, n)` from the validity threshold and fits the narrowest
/// offset window with two held-out points.
#[pyfunction]
#[pyo3(signature = (stat, r=1, max_n=None))]
fn fit_statistic(py: Python<'_>, stat: &Statistic, r: u32, max_n: Option<usize>) -> PyResult<FactorialCombination> {
    let cfg = brute(max_n, 0);
    let s = stat.0.clone();
    py.detach(|| {
        let w = factorial_basis::default_offsets(&s, r);
        let data = w
            .sample_points(2)
            .into_iter()
            .map(|n| Ok((n, agg::aggregate(&s, n as usize, r, &cfg)?.value)))
            .collect::<permoment::Result<Vec<_>>>()?;
        factorial_basis::minimal_window(&data, (w.lo, w.hi))
            .map(|(_, fc)| fc)
            .ok_or_else(|| permoment::Error::InsufficientData("no sub-window fits".into()))
    })
    .map(FactorialCombination)
    .map_err(err)
}

/// Merges of the given patterns onto targets of length `target_len`, as
/// `(maps, target)` with 1-based target ranks.
#[pyfunction]
fn enumerate_merges(patterns: Vec<Pattern>, target_len: usize) -> PyResult<Vec<(Vec<Vec<usize>>, Pattern)>> {
    let pats: Vec<_> = patterns.into_iter().map(|p| p.0).collect();
    Ok(merge::enumerate_merges(&pats, target_len)
        .map_err(err)?
        .into_iter()
        .map(|m| (m.maps, Pattern(m.target)))
        .collect())
}

/// Census rows `{k, c, d, blocks?, count}` for `r` copies of a pattern.
#[pyfunction]
#[pyo3(signature = (pattern, r))]
fn merge_census<'py>(py: Python<'py>, pattern: &Bound<'py, PyAny>, r: usize) -> PyResult<Bound<'py, PyAny>> {
    let p = pattern_of(pattern)?;
    let census = py.detach(|| merge::merge_census(&p, r)).map_err(err)?;
    to_py_json(py, &census.rows())
}

#[pyfunction]
#[pyo3(signature = (pattern, r, n, literal_factorial=false))]
fn corollary_moment<'py>(
    py: Python<'py>,
    pattern: &Bound<'py, PyAny>,
    r: usize,
    n: usize,
    literal_factorial: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let p = pattern_of(pattern)?;
    let census = py.detach(|| merge::merge_census(&p, r)).map_err(err)?;
    let variant = if literal_factorial {
        FactorialVariant::PatternLength
    } else {
        FactorialVariant::TargetLength
    };
    fraction(py, &merge::corollary_from_census(&census, p.len(), n, variant))
}

/// `M(cnt_P^r, n)` as a shifted-factorial combination from the census.
#[pyfunction]
fn corollary_combination(py: Python<'_>, pattern: &Bound<'_, PyAny>, r: usize) -> PyResult<FactorialCombination> {
    let p = pattern_of(pattern)?;
    let census = py.detach(|| merge::merge_census(&p, r)).map_err(err)?;
    Ok(FactorialCombination(merge::corollary_combination(&census)))
}

#[pyfunction]
fn sigma_pair_count(sigma: &Bound<'_, PyAny>, sigma2: &Bound<'_, PyAny>, r: usize) -> PyResult<Integer> {
    merge::sigma_pair_count(&perm_of(sigma)?, &perm_of(sigma2)?, r).map_err(err)
}

#[pyfunction]
fn expected_count<'py>(py: Python<'py>, pattern: &Bound<'py, PyAny>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &closedform::expected_count(&pattern_of(pattern)?, n))
}

#[pyfunction]
fn euler_moment(py: Python<'_>, r: u32, n: usize) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &closedform::euler_moment(r, n))
}

#[pyfunction]
fn adjacency_moment(py: Python<'_>, r: u32, n: usize) -> PyResult<Bound<'_, PyAny>> {
    fraction(py, &closedform::adjacency_moment(r, n))
}

/// Closed form for `Q₁ = a₀ + Σ aᵢyᵢ`, `Q₂ = b₀ + Σ bⱼyⱼ`.
#[pyfunction]
fn linearity_aggregate<'py>(
    py: Python<'py>,
    case: u8,
    pattern: &Bound<'py, PyAny>,
    a: Vec<Bound<'py, PyAny>>,
    b: Vec<Bound<'py, PyAny>>,
    n: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let case = LinearityCase::from_index(case).map_err(err)?;
    let a: Vec<Rational> = a.iter().map(to_rational).collect::<PyResult<_>>()?;
    let b: Vec<Rational> = b.iter().map(to_rational).collect::<PyResult<_>>()?;
    let v = closedform::linearity_aggregate(case, &pattern_of(pattern)?, &a, &b, n).map_err(err)?;
    fraction(py, &v)
}

#[pyfunction]
fn burstein_check<'py>(py: Python<'py>, sigma: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let s = perm_of(sigma)?;
    let rep = py.detach(|| clt::burstein_check(&s)).map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
fn interpretation_mean<'py>(py: Python<'py>, sigma: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let s = perm_of(sigma)?;
    let rep = py.detach(|| clt::interpretation_mean(&s)).map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
fn variance_leading<'py>(py: Python<'py>, pattern: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let p = pattern_of(pattern)?;
    let rep = py.detach(|| clt::variance_leading(&p)).map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
fn vincular_inequality_check<'py>(py: Python<'py>, pattern: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let p = pattern_of(pattern)?;
    let rep = py.detach(|| clt::vincular_inequality_check(&p)).map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
fn configuration_census<'py>(py: Python<'py>, pattern: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let p = pattern_of(pattern)?;
    let rep = py.detach(|| clt::configuration_census(&p)).map_err(err)?;
    to_py_json(py, &rep)
}

#[pyfunction]
#[pyo3(signature = (r, n_values, tolerance=clt::DEFAULT_POISSON_TOLERANCE))]
fn poisson_convergence(py: Python<'_>, r: u32, n_values: Vec<usize>, tolerance: f64) -> PyResult<Bound<'_, PyAny>> {
    let rep = clt::poisson_convergence(r, &n_values, tolerance).map_err(err)?;
    to_py_json(py, &rep)
}

/// The golden suite as a dict with `rows`, `passed`, `failed`, `skipped`.
#[pyfunction]
#[pyo3(signature = (max_n=None, literal_factorial=false, threads=0))]
fn reproduce_paper(py: Python<'_>, max_n: Option<usize>, literal_factorial: bool, threads: usize) -> PyResult<Bound<'_, PyAny>> {
    let opts = ReproduceOptions {
        max_n: limits(max_n).max_n,
        factorial: if literal_factorial {
            FactorialVariant::PatternLength
        } else {
            FactorialVariant::TargetLength
        },
        threads,
    };
    let rep = py.detach(|| core_reproduce(&opts));
    to_py_json(py, &rep)
}

#[pyfunction]
fn factorial(n: u64) -> Integer {
    numbers::factorial(n)
}

#[pyfunction]
fn binomial(n: i64, k: i64) -> Integer {
    numbers::binomial(n, k)
}

#[pyfunction]
fn stirling_first(k: usize, i: usize) -> Integer {
    numbers::stirling_first_unsigned(k, i)
}

#[pyfunction]
fn stirling_second(r: usize, k: usize) -> Integer {
    numbers::stirling_second(r, k)
}

#[pyfunction]
fn bell(r: usize) -> Integer {
    numbers::bell(r)
}

#[pyfunction]
fn lah(k: u64, j: u64) -> PyResult<Integer> {
    numbers::lah(k, j).map_err(err)
}

/// `"p/q"` text of a rational.
#[pyfunction]
fn format_fraction(q: &Bound<'_, PyAny>) -> PyResult<String> {
    Ok(format_rational(&to_rational(q)?))
}

#[pymodule]
#[pyo3(name = "permoment")]
pub fn permoment_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PermomentError", m.py().get_type::<PermomentError>())?;
    m.add_class::<Permutation>()?;
    m.add_class::<Pattern>()?;
    m.add_class::<Statistic>()?;
    m.add_class::<FactorialCombination>()?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(expectation, m)?)?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(default_offsets, m)?)?;
    m.add_function(wrap_pyfunction!(fit_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_merges, m)?)?;
    m.add_function(wrap_pyfunction!(merge_census, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_moment, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_combination, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_pair_count, m)?)?;
    m.add_function(wrap_pyfunction!(expected_count, m)?)?;
    m.add_function(wrap_pyfunction!(euler_moment, m)?)?;
    m.add_function(wrap_pyfunction!(adjacency_moment, m)?)?;
    m.add_function(wrap_pyfunction!(linearity_aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(burstein_check, m)?)?;
    m.add_function(wrap_pyfunction!(interpretation_mean, m)?)?;
    m.add_function(wrap_pyfunction!(variance_leading, m)?)?;
    m.add_function(wrap_pyfunction!(vincular_inequality_check, m)?)?;
    m.add_function(wrap_pyfunction!(configuration_census, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_paper, m)?)?;
    m.add_function(wrap_pyfunction!(factorial, m)?)?;
    m.add_function(wrap_pyfunction!(binomial, m)?)?;
    m.add_function(wrap_pyfunction!(stirling_first, m)?)?;
    m.add_function(wrap_pyfunction!(stirling_second, m)?)?;
    m.add_function(wrap_pyfunction!(bell, m)?)?;
    m.add_function(wrap_pyfunction!(lah, m)?)?;
    m.add_function(wrap_pyfunction!(format_fraction, m)?)?;
    Ok(())
}
