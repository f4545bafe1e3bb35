//! Python bindings for the cvwit core crate.

use cvwit::combin::PartitionFamily;
use cvwit::ghzcert::{self, SeparabilityClass, WitnessChoice};
use cvwit::model::{self, SymmetricCm};
use cvwit::signcrit::{self, OptConfig, SamplingConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: cvwit::Error) -> PyErr {
    match e {
        cvwit::Error::Capacity { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn class_of(s: &str) -> PyResult<SeparabilityClass> {
    s.parse().map_err(err)
}

#[pyclass(name = "GhzParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGhzParams {
    inner: model::GhzParams,
}

#[pymethods]
impl PyGhzParams {
    #[new]
    #[pyo3(signature = (n, r, eta = 1.0, noise_n = 0.0))]
    fn new(n: usize, r: f64, eta: f64, noise_n: f64) -> PyResult<Self> {
        Ok(Self { inner: model::GhzParams::new(n, r, eta, noise_n).map_err(err)? })
    }

    /// Build from v = N/(N+1) instead of N.
    #[staticmethod]
    #[pyo3(signature = (n, r, eta = 1.0, v = 0.0))]
    fn with_v(n: usize, r: f64, eta: f64, v: f64) -> PyResult<Self> {
        Ok(Self { inner: model::GhzParams::with_v(n, r, eta, v).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn noise_n(&self) -> f64 {
        self.inner.noise_n
    }

    /// (a, b, c) of the permutation-symmetric covariance matrix.
    fn cm(&self) -> (f64, f64, f64) {
        let c = self.inner.cm();
        (c.a, c.b, c.c)
    }

    /// Full 2n x 2n matrix as nested lists, xx block then pp block.
    fn full_cm(&self) -> PyResult<Vec<Vec<f64>>> {
        let full = self.inner.cm().expand().map_err(err)?;
        let m = full.matrix();
        Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("GhzParams(n={}, r={}, eta={}, noise_n={})", p.n, p.r, p.eta, p.noise_n)
    }
}

#[pyclass(name = "Witness", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWitness {
    inner: WitnessChoice,
}

#[pymethods]
impl PyWitness {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn layout(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn sizes(&self) -> Vec<usize> {
        self.inner.sizes.clone()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa.value()
    }

    #[getter]
    fn score(&self) -> f64 {
        self.inner.score
    }

    fn __repr__(&self) -> String {
        let w = &self.inner;
        format!("Witness(n={}, m={}, layout={}, sizes={:?}, kappa={})", w.n, w.m, w.kind, w.sizes, w.kappa.value())
    }
}

#[pyclass(name = "Threshold", frozen, get_all)]
struct PyThreshold {
    /// Violation interval in r, None if the condition is never violated.
    violation: Option<(f64, f64)>,
    additional_cap: f64,
    certified: Option<(f64, f64)>,
    eigen_consistent: bool,
    witness: PyWitness,
}

#[pyclass(name = "PointVerdict", frozen, get_all)]
struct PyPointVerdict {
    certified: bool,
    det: f64,
    det_quadratic: f64,
    lambda_min: f64,
    additional_ratio: f64,
    additional_holds: bool,
    routes_agree: bool,
    witness: PyWitness,
}

#[pyclass(name = "CertVerdict", frozen, get_all)]
struct PyCertVerdict {
    certified: bool,
    best_value: f64,
    upper_bound: f64,
    q: Vec<f64>,
    sign_matrix: Vec<Vec<i8>>,
    converged: bool,
    sign_matrices: usize,
}

fn witness(n: usize, class: &str, m: Option<usize>) -> PyResult<WitnessChoice> {
    let class = class_of(class)?;
    match m {
        Some(m) => ghzcert::witness_for_m(n, m, class),
        None => ghzcert::optimal_witness(n, class),
    }
    .map_err(err)
}

/// kappa for witness size m and block sizes (two sizes: any bipartition).
#[pyfunction]
fn kappa(n: usize, m: usize, sizes: Vec<usize>) -> PyResult<f64> {
    let k = if sizes.len() == 2 {
        ghzcert::kappa_bisep(n, m, sizes[1])
    } else {
        ghzcert::kappa_layout(n, m, &sizes)
    };
    Ok(k.map_err(err)?.value())
}

/// Exact kappa as (numerator, denominator) strings.
#[pyfunction]
fn kappa_exact(n: usize, m: usize, sizes: Vec<usize>) -> PyResult<(String, String)> {
    let xi = ghzcert::xi_layout_exact(n, m, &sizes).map_err(err)?;
    let k = num_rational::BigRational::from_integer(1.into()) - xi * num_rational::BigRational::from_integer(2.into());
    Ok((k.numer().to_string(), k.denom().to_string()))
}

#[pyfunction]
#[pyo3(signature = (n, class_ = "genuine", m = None))]
fn optimal_witness(n: usize, class_: &str, m: Option<usize>) -> PyResult<PyWitness> {
    Ok(PyWitness { inner: witness(n, class_, m)? })
}

#[pyfunction]
#[pyo3(signature = (n, class_ = "genuine", eta = 1.0, noise_n = 0.0, m = None))]
fn threshold(n: usize, class_: &str, eta: f64, noise_n: f64, m: Option<usize>) -> PyResult<PyThreshold> {
    let w = witness(n, class_, m)?;
    let t = ghzcert::threshold_for(&w, eta, noise_n).map_err(err)?;
    Ok(PyThreshold {
        violation: t.violation.map(|iv| (iv.lo, iv.hi)),
        additional_cap: t.r_additional_cap,
        certified: t.certified().map(|iv| (iv.lo, iv.hi)),
        eigen_consistent: t.eigen_consistent,
        witness: PyWitness { inner: w },
    })
}

#[pyfunction]
#[pyo3(signature = (params, class_ = "genuine", m = None))]
fn certify_point(params: &PyGhzParams, class_: &str, m: Option<usize>) -> PyResult<PyPointVerdict> {
    let p = ghzcert::certify_point(&params.inner, class_of(class_)?, m).map_err(err)?;
    Ok(PyPointVerdict {
        certified: p.certified,
        det: p.y,
        det_quadratic: p.y_quadratic,
        lambda_min: p.lambda_min,
        additional_ratio: p.additional.ratio,
        additional_holds: p.additional.holds,
        routes_agree: p.routes_agree,
        witness: PyWitness { inner: p.witness },
    })
}

/// Rows (m, layout, n_start, n_end) of the optimal-witness table.
#[pyfunction]
#[pyo3(signature = (n_lo, n_hi, class_ = "genuine"))]
fn optimal_table(n_lo: u64, n_hi: u64, class_: &str) -> PyResult<Vec<(usize, String, u64, u64)>> {
    let rows = ghzcert::optimal_table(class_of(class_)?, n_lo, n_hi).map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.m, r.kind.to_string(), r.n_start, r.n_end)).collect())
}

fn family(class: SeparabilityClass) -> PartitionFamily {
    match class {
        SeparabilityClass::KSeparable(2) => PartitionFamily::AllBipartitions,
        SeparabilityClass::KSeparable(k) => PartitionFamily::KSeparable { k },
        SeparabilityClass::Producible(j) => PartitionFamily::JProducible { j },
    }
}

fn run_certify(py: Python<'_>, full: &model::FullCm, class: &str, seed: u64, draws: usize) -> PyResult<PyCertVerdict> {
    let class = class_of(class)?;
    let cfg = OptConfig { seed, sampling: SamplingConfig { random_draws: draws, seed }, ..OptConfig::default() };
    let v = py
        .detach(|| {
            let set = signcrit::generate_for_family(full.n(), &family(class), &cfg.sampling)?;
            signcrit::certify_with(full, &set, &cfg)
        })
        .map_err(err)?;
    Ok(PyCertVerdict {
        certified: v.certified,
        best_value: v.best_value,
        upper_bound: v.upper_bound,
        q: v.q,
        sign_matrix: v.sign_matrix.rows().map(|r| r.to_vec()).collect(),
        converged: v.converged,
        sign_matrices: v.sign_matrices,
    })
}

/// Generic sign-matrix test on a symmetric (a, b, c) covariance matrix.
#[pyfunction]
#[pyo3(signature = (n, a, b, c, class_ = "genuine", seed = 7, draws = 200_000))]
#[allow(clippy::too_many_arguments)]
fn check_symmetric_cm(py: Python<'_>, n: usize, a: f64, b: f64, c: f64, class_: &str, seed: u64, draws: usize) -> PyResult<PyCertVerdict> {
    let full = SymmetricCm::new(n, a, b, c).and_then(|s| s.expand()).map_err(err)?;
    run_certify(py, &full, class_, seed, draws)
}

/// Generic sign-matrix test on a covariance-matrix JSON document.
#[pyfunction]
#[pyo3(signature = (text, class_ = "genuine", seed = 7, draws = 200_000))]
fn check_cm_json(py: Python<'_>, text: &str, class_: &str, seed: u64, draws: usize) -> PyResult<PyCertVerdict> {
    let full = model::parse_cm_document(text).and_then(|d| d.to_full()).map_err(err)?;
    run_certify(py, &full, class_, seed, draws)
}

/// Oracle suite as a list of (quantity, closed_form, brute_force, pass).
#[pyfunction]
fn run_oracle(py: Python<'_>, suite: &str) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let reports = py.detach(|| cvwit::oracle::run_suite(suite)).map_err(err)?;
    Ok(reports.into_iter().map(|r| (r.quantity, r.closed_form, r.brute_force, r.pass)).collect())
}

#[pyfunction]
fn noise_from_v(v: f64) -> PyResult<f64> {
    model::noise_from_v(v).map_err(err)
}

#[pymodule]
fn cvwit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGhzParams>()?;
    m.add_class::<PyWitness>()?;
    m.add_class::<PyThreshold>()?;
    m.add_class::<PyPointVerdict>()?;
    m.add_class::<PyCertVerdict>()?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(kappa_exact, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_witness, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(certify_point, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_table, m)?)?;
    m.add_function(wrap_pyfunction!(check_symmetric_cm, m)?)?;
    m.add_function(wrap_pyfunction!(check_cm_json, m)?)?;
    m.add_function(wrap_pyfunction!(run_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(noise_from_v, m)?)?;
    Ok(())
}
