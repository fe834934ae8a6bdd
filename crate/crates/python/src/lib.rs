//! Python bindings. Tensors cross the boundary as `(dims, flat row-major
//! data)`; numpy users can `np.asarray(t.data).reshape(t.dims)`.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ttcone::io;
use ttcone::linalg::DEFAULT_RANK_TOL;
use ttcone::verify::DEFAULT_M_LIST;

create_exception!(ttcone_py, TtConeError, PyException);
create_exception!(ttcone_py, NotInConeError, TtConeError);

fn err(e: ttcone::Error) -> PyErr {
    match e {
        ttcone::Error::NotInCone { .. } => NotInConeError::new_err(e.to_string()),
        ttcone::Error::Io(_) | ttcone::Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => TtConeError::new_err(e.to_string()),
    }
}

fn tolerance(tol: f64) -> PyResult<ttcone::Tolerance> {
    if tol.is_finite() && tol > 0.0 {
        Ok(ttcone::Tolerance::with_rank(tol))
    } else {
        Err(PyValueError::new_err(format!("tolerance must be positive, got {tol}")))
    }
}

#[pyclass(name = "DenseTensor", module = "ttcone_py", frozen)]
pub struct PyDense(ttcone::DenseTensor);

#[pymethods]
impl PyDense {
    #[new]
    fn new(dims: Vec<usize>, data: Vec<f64>) -> PyResult<Self> {
        ttcone::DenseTensor::new(dims, data).map(PyDense).map_err(err)
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims().to_vec()
    }

    #[getter]
    fn data(&self) -> Vec<f64> {
        self.0.data().to_vec()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn get(&self, index: Vec<usize>) -> PyResult<f64> {
        let dims = self.0.dims();
        if index.len() != dims.len() || index.iter().zip(dims).any(|(i, n)| i >= n) {
            return Err(PyValueError::new_err(format!("index {index:?} out of range for {dims:?}")));
        }
        Ok(self.0.get(&index))
    }

    fn distance(&self, other: &PyDense) -> PyResult<f64> {
        self.0.distance(&other.0).map_err(err)
    }

    fn relative_error(&self, reference: &PyDense) -> PyResult<f64> {
        self.0.relative_error(&reference.0).map_err(err)
    }

    fn axpy(&self, alpha: f64, other: &PyDense) -> PyResult<Self> {
        self.0.axpy(alpha, &other.0).map(PyDense).map_err(err)
    }

    fn scaled(&self, alpha: f64) -> Self {
        PyDense(self.0.scaled(alpha))
    }

    fn to_json(&self) -> PyResult<String> {
        io::dense_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        io::dense_from_json(s).map(PyDense).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DenseTensor(dims={:?}, norm={:.6e})", self.0.dims(), self.0.norm())
    }
}

#[pyclass(name = "TTTensor", module = "ttcone_py", frozen)]
pub struct PyTT(ttcone::TTTensor);

#[pymethods]
impl PyTT {
    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims()
    }

    #[getter]
    fn ranks(&self) -> Vec<usize> {
        self.0.ranks()
    }

    #[getter]
    fn left_orthogonal(&self) -> bool {
        self.0.flag() == ttcone::Orthogonality::Left
    }

    /// Cores as `(left, mode, right)` shapes with flat data.
    fn cores(&self) -> Vec<([usize; 3], Vec<f64>)> {
        self.0.cores().iter().map(|c| (c.shape(), c.data().to_vec())).collect()
    }

    fn full(&self) -> PyDense {
        PyDense(ttcone::tt_evaluate(&self.0))
    }

    fn left_orthogonalize(&self) -> Self {
        PyTT(ttcone::left_orthogonalize(&self.0))
    }

    fn to_json(&self) -> PyResult<String> {
        io::tt_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        io::tt_from_json(s).map(PyTT).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("TTTensor(dims={:?}, ranks={:?})", self.0.dims(), self.0.ranks())
    }
}

#[pyclass(name = "TangentConeVector", module = "ttcone_py", frozen)]
pub struct PyCone(ttcone::TangentConeVector);

#[pymethods]
impl PyCone {
    #[getter]
    fn base(&self) -> PyTT {
        PyTT(self.0.base().clone())
    }

    #[getter]
    fn slack(&self) -> Vec<usize> {
        self.0.slack().to_vec()
    }

    #[getter]
    fn effective_slack(&self) -> Vec<usize> {
        self.0.effective_slack()
    }

    /// Block shapes and data keyed by `"X"`, `"U"`, `"V"`, `"Z"`.
    fn blocks<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        let conv = |bs: &[ttcone::Core]| -> Vec<([usize; 3], Vec<f64>)> {
            bs.iter().map(|c| (c.shape(), c.data().to_vec())).collect()
        };
        dict.set_item("X", conv(self.0.x_blocks()))?;
        dict.set_item("U", conv(self.0.u_blocks()))?;
        dict.set_item("V", conv(self.0.v_blocks()))?;
        dict.set_item("Z", conv(self.0.z_blocks()))?;
        Ok(dict)
    }

    fn evaluate(&self) -> PyDense {
        PyDense(ttcone::tc_evaluate(&self.0))
    }

    fn scaled(&self, lam: f64) -> Self {
        PyCone(ttcone::scale(&self.0, lam))
    }

    /// Largest normalized residual of the block orthogonality constraints.
    fn invariant_residual(&self) -> f64 {
        self.0.invariant_residuals().max()
    }

    fn to_json(&self) -> PyResult<String> {
        io::cone_to_json(&self.0).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        io::cone_from_json(s).map(PyCone).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "TangentConeVector(dims={:?}, ranks={:?}, slack={:?})",
            self.0.base().dims(),
            self.0.base().ranks(),
            self.0.slack()
        )
    }
}

#[pyfunction]
fn random_base(dims: Vec<usize>, ranks: Vec<usize>, seed: u64) -> PyResult<PyTT> {
    ttcone::random_base(&dims, &ranks, seed).map(PyTT).map_err(err)
}

#[pyfunction]
fn random_dense(dims: Vec<usize>, seed: u64) -> PyResult<PyDense> {
    ttcone::random_dense(&dims, seed).map(PyDense).map_err(err)
}

#[pyfunction]
fn random_cone_vector(base: &PyTT, slack: Vec<usize>, seed: u64) -> PyResult<PyCone> {
    ttcone::random_cone_vector(&base.0, &slack, seed).map(PyCone).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (t, max_ranks, tol = DEFAULT_RANK_TOL))]
fn tt_svd(t: &PyDense, max_ranks: Vec<usize>, tol: f64) -> PyResult<PyTT> {
    ttcone::tt_svd(&t.0, &max_ranks, tol).map(|r| PyTT(r.tensor)).map_err(err)
}

#[pyfunction]
fn tc_evaluate(v: &PyCone) -> PyDense {
    PyDense(ttcone::tc_evaluate(&v.0))
}

#[pyfunction]
#[pyo3(signature = (base, x, slack, tol = DEFAULT_RANK_TOL))]
fn tc_extract(base: &PyTT, x: &PyDense, slack: Vec<usize>, tol: f64) -> PyResult<PyCone> {
    ttcone::tc_extract(&base.0, &x.0, &slack, &tolerance(tol)?)
        .map(PyCone)
        .map_err(err)
}

/// Returns `(member, splits)`; each split is a dict with the residual rank,
/// threshold and spectrum.
#[pyfunction]
#[pyo3(signature = (base, x, slack, tol = DEFAULT_RANK_TOL))]
fn tc_membership<'py>(
    py: Python<'py>,
    base: &PyTT,
    x: &PyDense,
    slack: Vec<usize>,
    tol: f64,
) -> PyResult<(bool, Vec<Bound<'py, PyDict>>)> {
    let m = ttcone::tc_membership(&base.0, &x.0, &slack, &tolerance(tol)?).map_err(err)?;
    let splits = m
        .splits
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("split", c.split)?;
            d.set_item("slack", c.slack)?;
            d.set_item("rank", c.rank)?;
            d.set_item("threshold", c.threshold)?;
            d.set_item("spectrum", c.spectrum.clone())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok((m.member(), splits))
}

#[pyfunction]
fn gamma(v: &PyCone, t: f64) -> PyDense {
    PyDense(ttcone::gamma(&v.0, t))
}

#[pyfunction]
fn retract(v: &PyCone) -> PyTT {
    PyTT(ttcone::retract(&v.0))
}

/// Returns `(verdict, [(m, error), ...])`.
#[pyfunction]
#[pyo3(signature = (v, m_list = None))]
fn secant_limit_check(v: &PyCone, m_list: Option<Vec<u64>>) -> PyResult<(bool, Vec<(u64, f64)>)> {
    let m_list = m_list.unwrap_or_else(|| DEFAULT_M_LIST.to_vec());
    let r = ttcone::secant_limit_check(&v.0, &m_list).map_err(err)?;
    Ok((r.verdict, r.errors))
}

/// Returns `(t_grid, errors, slope)`; `slope` is `None` when the curve is
/// exact to roundoff.
#[pyfunction]
#[pyo3(signature = (v, t_grid = None))]
fn retraction_order(v: &PyCone, t_grid: Option<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>, Option<f64>)> {
    let grid = t_grid.unwrap_or_else(|| ttcone::verify::DEFAULT_T_GRID.to_vec());
    let r = ttcone::retraction_order(&v.0, &grid).map_err(err)?;
    Ok((r.t_grid, r.errors, r.slope))
}

#[pymodule]
fn ttcone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDense>()?;
    m.add_class::<PyTT>()?;
    m.add_class::<PyCone>()?;
    m.add("TtConeError", m.py().get_type::<TtConeError>())?;
    m.add("NotInConeError", m.py().get_type::<NotInConeError>())?;
    m.add_function(wrap_pyfunction!(random_base, m)?)?;
    m.add_function(wrap_pyfunction!(random_dense, m)?)?;
    m.add_function(wrap_pyfunction!(random_cone_vector, m)?)?;
    m.add_function(wrap_pyfunction!(tt_svd, m)?)?;
    m.add_function(wrap_pyfunction!(tc_evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(tc_extract, m)?)?;
    m.add_function(wrap_pyfunction!(tc_membership, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(retract, m)?)?;
    m.add_function(wrap_pyfunction!(secant_limit_check, m)?)?;
    m.add_function(wrap_pyfunction!(retraction_order, m)?)?;
    Ok(())
}
