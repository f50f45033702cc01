//! Python bindings: `import dgtime`.

use std::collections::BTreeMap;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dgtime_core as core;
use core::basis::{local_matrices_l, local_matrices_n};
use core::metrics::{l2_final_error, seminorm_a, seminorm_b, ErrorField, Weight};
use core::model::{make_fd_acoustic, make_oscillator, make_poroelastic_like, CaseTag, Side};
use core::{DenseMatrix, ManufacturedProblem, Norm, SecondOrderSystem, SlabBasis, TimeMesh};

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::SingularMatrix { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(err)
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "left" => Ok(Side::Left),
        "right" => Ok(Side::Right),
        _ => Err(PyValueError::new_err("side must be 'left' or 'right'")),
    }
}

fn case(s: &str) -> PyResult<CaseTag> {
    match s {
        "case_a" => Ok(CaseTag::CaseA),
        "case_b" => Ok(CaseTag::CaseB),
        "custom" => Ok(CaseTag::Custom),
        _ => Err(PyValueError::new_err("case must be 'case_a', 'case_b' or 'custom'")),
    }
}

/// `M ü + D u̇ + A u = f` with initial data.
///
/// `forcing` is a callable `t -> list[float]`; omitted means `f ≡ 0`.
#[pyclass(name = "System", module = "dgtime", skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: SecondOrderSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (m, d, a, u0, v0, case = "case_b", forcing = None))]
    fn new(
        m: Vec<Vec<f64>>,
        d: Vec<Vec<f64>>,
        a: Vec<Vec<f64>>,
        u0: Vec<f64>,
        v0: Vec<f64>,
        case: &str,
        forcing: Option<Py<PyAny>>,
    ) -> PyResult<Self> {
        let n = u0.len();
        let f: core::TimeFn = match forcing {
            None => SecondOrderSystem::zero_forcing(n),
            Some(cb) => Arc::new(move |t| {
                Python::attach(|py| {
                    cb.call1(py, (t,))
                        .and_then(|r| r.extract::<Vec<f64>>(py))
                        .unwrap_or_else(|e| {
                            e.print(py);
                            vec![f64::NAN; n]
                        })
                })
            }),
        };
        let inner = SecondOrderSystem::new(matrix(m)?, matrix(d)?, matrix(a)?, f, u0, v0, self::case(case)?)
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn force(&self, t: f64) -> PyResult<Vec<f64>> {
        self.inner.force(t).map_err(err)
    }
}

/// A system together with its exact solution.
#[pyclass(name = "Problem", module = "dgtime")]
struct PyProblem {
    inner: ManufacturedProblem,
}

#[pymethods]
impl PyProblem {
    #[getter]
    fn system(&self) -> PySystem {
        PySystem {
            inner: self.inner.system.clone(),
        }
    }

    fn exact_u(&self, t: f64) -> Vec<f64> {
        (self.inner.u_exact)(t)
    }

    fn exact_v(&self, t: f64) -> Vec<f64> {
        (self.inner.v_exact)(t)
    }

    /// `|u_ex − u|_A` for a dG2 solution.
    fn seminorm_error_dg2(&self, u: &PyTrajectory) -> PyResult<f64> {
        let p = &self.inner;
        seminorm_a(&ErrorField::new(&u.inner, p.u_exact.clone(), p.v_exact.clone()), &p.system).map_err(err)
    }

    /// `|(u_ex − u, v_ex − v)|_B` for a dG1 solution.
    fn seminorm_error_dg1(&self, u: &PyTrajectory, v: &PyTrajectory) -> PyResult<f64> {
        let p = &self.inner;
        let eu = ErrorField::new(&u.inner, p.u_exact.clone(), p.v_exact.clone());
        let ev = ErrorField::new(&v.inner, p.v_exact.clone(), p.a_exact.clone());
        seminorm_b(&eu, &ev, &p.system).map_err(err)
    }

    /// Euclidean `‖u_ex(T) − u(T⁻)‖` at the final time.
    fn l2_final_error(&self, u: &PyTrajectory) -> PyResult<f64> {
        let t = u.inner.mesh().final_time();
        l2_final_error(&u.inner, &self.inner.u_exact, t, &Weight::Euclidean).map_err(err)
    }
}

#[pyclass(name = "Trajectory", module = "dgtime")]
struct PyTrajectory {
    inner: core::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.mesh().breakpoints().to_vec()
    }

    #[getter]
    fn degrees(&self) -> Vec<usize> {
        self.inner.mesh().degrees().to_vec()
    }

    /// Nodal coefficients of every slab, system index outer.
    #[getter]
    fn blocks(&self) -> Vec<Vec<f64>> {
        self.inner.blocks().to_vec()
    }

    #[pyo3(signature = (t, side = "left"))]
    fn evaluate(&self, t: f64, side: &str) -> PyResult<Vec<f64>> {
        self.inner.evaluate(t, self::side(side)?).map_err(err)
    }

    #[pyo3(signature = (t, side = "left"))]
    fn derivative(&self, t: f64, side: &str) -> PyResult<Vec<f64>> {
        self.inner.evaluate_derivative(t, self::side(side)?).map_err(err)
    }

    fn final_value(&self) -> Vec<f64> {
        self.inner.right_trace(self.inner.mesh().num_slabs() - 1)
    }
}

fn mesh(final_time: f64, dt: f64, degree: usize) -> PyResult<TimeMesh> {
    TimeMesh::with_step(final_time, dt, degree).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (omega, dims, damping = 0.0))]
fn oscillator(omega: f64, dims: usize, damping: f64) -> PyResult<PyProblem> {
    make_oscillator(omega, dims, damping).map(|inner| PyProblem { inner }).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (cells, speed = 1.0, length = 1.0))]
fn fd_acoustic(cells: usize, speed: f64, length: f64) -> PyResult<PyProblem> {
    make_fd_acoustic(cells, speed, length).map(|inner| PyProblem { inner }).map_err(err)
}

#[pyfunction]
fn poroelastic_like(dims: usize, null_dim: usize, seed: u64) -> PyResult<PyProblem> {
    make_poroelastic_like(dims, null_dim, seed)
        .map(|p| PyProblem { inner: p.problem })
        .map_err(err)
}

/// Returns `(u, v)` on a uniform mesh of step `dt`.
#[pyfunction]
fn solve_dg1(system: &PySystem, final_time: f64, dt: f64, degree: usize) -> PyResult<(PyTrajectory, PyTrajectory)> {
    let (u, v) = core::march_dg1(&system.inner, &mesh(final_time, dt, degree)?).map_err(err)?;
    Ok((PyTrajectory { inner: u }, PyTrajectory { inner: v }))
}

#[pyfunction]
fn solve_dg2(system: &PySystem, final_time: f64, dt: f64, degree: usize) -> PyResult<PyTrajectory> {
    core::march_dg2(&system.inner, &mesh(final_time, dt, degree)?)
        .map(|inner| PyTrajectory { inner })
        .map_err(err)
}

/// `{"n1": ..., "n5": ...}` on the slab `(t_start, t_start + dt]`; needs `degree >= 1`.
#[pyfunction]
fn local_matrices_second_order(degree: usize, t_start: f64, dt: f64) -> PyResult<BTreeMap<String, Vec<Vec<f64>>>> {
    let n = local_matrices_n(&SlabBasis::with_step(degree, t_start, dt).map_err(err)?).map_err(err)?;
    Ok([("n1", n.n1), ("n2", n.n2), ("n3", n.n3), ("n4", n.n4), ("n5", n.n5)]
        .into_iter()
        .map(|(k, m)| (k.to_string(), m.to_rows()))
        .collect())
}

/// `{"l1": ..., "l7": ...}` on the slab `(t_start, t_start + dt]`.
#[pyfunction]
fn local_matrices_first_order(degree: usize, t_start: f64, dt: f64) -> PyResult<BTreeMap<String, Vec<Vec<f64>>>> {
    let l = local_matrices_l(&SlabBasis::with_step(degree, t_start, dt).map_err(err)?).map_err(err)?;
    Ok([("l1", l.l1), ("l2", l.l2), ("l3", l.l3), ("l4", l.l4), ("l5", l.l5), ("l6", l.l6), ("l7", l.l7)]
        .into_iter()
        .map(|(k, m)| (k.to_string(), m.to_rows()))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (m, norm = "one"))]
fn condition_number(m: Vec<Vec<f64>>, norm: &str) -> PyResult<f64> {
    let norm = match norm {
        "one" => Norm::One,
        "inf" => Norm::Infinity,
        _ => return Err(PyValueError::new_err("norm must be 'one' or 'inf'")),
    };
    core::condition_number(&matrix(m)?, norm).map_err(err)
}

/// Least-squares slope of `log err` against `log dt`; returns `(slope, intercept)`.
#[pyfunction]
fn fit_slope(points: Vec<(f64, f64)>) -> PyResult<(f64, f64)> {
    core::fit_slope(&points).map(|f| (f.slope, f.intercept)).map_err(err)
}

#[pymodule]
fn dgtime(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(oscillator, m)?)?;
    m.add_function(wrap_pyfunction!(fd_acoustic, m)?)?;
    m.add_function(wrap_pyfunction!(poroelastic_like, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dg1, m)?)?;
    m.add_function(wrap_pyfunction!(solve_dg2, m)?)?;
    m.add_function(wrap_pyfunction!(local_matrices_second_order, m)?)?;
    m.add_function(wrap_pyfunction!(local_matrices_first_order, m)?)?;
    m.add_function(wrap_pyfunction!(condition_number, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    Ok(())
}
