//! Python module `due_py`: the constructions and certificates of `due-core`.
//! Reports come back as plain dicts and lists.

use std::sync::Arc;

use due_core::certify::{self, CompactGrid};
use due_core::compactgroup::{self, CompactPoint, QuotientSpec, Spin};
use due_core::equiloops::{
    self, find_zero_config, shift_path, synthesize_loop, FunctionSpaceBasis, LoopManifest, PathOptions,
    ZeroSearchOptions,
};
use due_core::nilconstruct::{self, EtaParams, NilGrid};
use due_core::nilgroup::{NilPoint, NilStructure};
use due_core::rationals::{self, AkSequenceParams};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: due_core::Error) -> PyErr {
    match e {
        due_core::Error::SolverFailure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn spins_of(spins: &[String]) -> PyResult<Vec<Spin>> {
    spins.iter().map(|s| Spin::parse(s).map_err(err)).collect()
}

/// The step profile `eta` with `q0` steps and flat margin `delta`.
#[pyfunction]
#[pyo3(signature = (t, q0, delta = 0.1))]
fn eta(t: f64, q0: u64, delta: f64) -> PyResult<f64> {
    Ok(nilconstruct::eta(t, &EtaParams::new(q0, delta).map_err(err)?))
}

/// `sum_{l < 2 q0} exp(2 pi i m eta(t + l / (2 q0)))`.
#[pyfunction]
#[pyo3(signature = (m, t, q0, delta = 0.1))]
fn eta_exponential_sum(m: i64, t: f64, q0: u64, delta: f64) -> PyResult<Complex64> {
    Ok(nilconstruct::eta_exponential_sum(m, t, &EtaParams::new(q0, delta).map_err(err)?))
}

/// `(p_ell, q_ell)` approximating `p0 / q0` with `qbar | q_ell`.
#[pyfunction]
fn ak_rationals(p0: i64, q0: u64, qbar: u64, ell: u64) -> PyResult<(i128, i128)> {
    let params = AkSequenceParams::new(p0, q0, qbar).map_err(err)?;
    let f = rationals::ak_rationals(&params, ell).map_err(err)?;
    Ok((f.numer(), f.denom()))
}

#[pyfunction]
fn torus_norm(v: Vec<f64>) -> f64 {
    rationals::torus_norm(&v)
}

/// A simply connected nilpotent group with its standard lattice, in
/// exponential coordinates.
#[pyclass(name = "NilGroup", frozen)]
struct PyNilGroup {
    inner: NilStructure,
}

#[pymethods]
impl PyNilGroup {
    #[staticmethod]
    fn heisenberg3() -> Self {
        PyNilGroup { inner: NilStructure::heisenberg3() }
    }

    #[staticmethod]
    fn abelian(d: usize) -> Self {
        PyNilGroup { inner: NilStructure::abelian(d) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn mul(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.mul(&NilPoint(a), &NilPoint(b)).map_err(err)?.0)
    }

    fn inv(&self, a: Vec<f64>) -> Vec<f64> {
        self.inner.inv(&NilPoint(a)).0
    }

    /// `(x0, lattice)` with `x = x0 * lattice` and `x0` in the fundamental domain.
    fn reduce(&self, a: Vec<f64>) -> PyResult<(Vec<f64>, Vec<i64>)> {
        let (p, g) = self.inner.reduce_mod_lattice(&NilPoint(a)).map_err(err)?;
        Ok((p.0, g.0))
    }

    fn to_second_kind(&self, a: Vec<f64>) -> Vec<f64> {
        self.inner.to_second_kind(&NilPoint(a))
    }

    fn from_second_kind(&self, y: Vec<f64>) -> Vec<f64> {
        self.inner.from_second_kind(&y).0
    }
}

/// Spin-`j` Wigner matrix at the unit quaternion `(w, x, y, z)`.
#[pyfunction]
fn wigner(spin: &str, q: [f64; 4]) -> PyResult<Vec<Vec<Complex64>>> {
    let j = Spin::parse(spin).map_err(err)?;
    let m = compactgroup::wigner(j, &CompactPoint(q).normalized());
    Ok((0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect())
}

/// Level identities, full-level sums and the coboundary over the `V_n` family.
#[pyfunction]
#[pyo3(signature = (n = 1, q0 = 2, p = 1, nt = 8, nx = 4, tol = 1e-8, structure = "heisenberg"))]
#[allow(clippy::too_many_arguments)]
fn nil_certificate<'py>(
    py: Python<'py>,
    n: usize,
    q0: u64,
    p: i64,
    nt: usize,
    nx: usize,
    tol: f64,
    structure: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let s = match structure {
        "heisenberg" => NilStructure::heisenberg3(),
        "abelian2" => NilStructure::abelian(2),
        "abelian3" => NilStructure::abelian(3),
        other => return Err(PyValueError::new_err(format!("unknown structure {other:?}"))),
    };
    let cons = nilconstruct::build_construction(&s, n, q0).map_err(err)?;
    let cert = certify::nil_certificate(&cons, p, NilGrid { nt, nx }, tol).map_err(err)?;
    to_py(py, &cert)
}

/// An `E`-equidistributed loop in SU(2).
#[pyclass(name = "EquidistributedLoop", frozen)]
struct PyLoop {
    inner: Arc<equiloops::EquidistributedLoop>,
}

#[pymethods]
impl PyLoop {
    /// Solves for a zero configuration with `m` points, continues it to its
    /// cyclic shift and reparametrizes the path into a loop.
    #[staticmethod]
    #[pyo3(signature = (spins, m, seed = 1, require_surjective = false))]
    fn build(spins: Vec<String>, m: usize, seed: u64, require_surjective: bool) -> PyResult<Self> {
        let basis = FunctionSpaceBasis::from_spins(&spins_of(&spins)?).map_err(err)?;
        let opts = ZeroSearchOptions { require_surjective, ..Default::default() };
        let zero = find_zero_config(&basis, m, seed, &opts).map_err(err)?;
        let path = shift_path(&basis, &zero.config.nearest_neighbor_order(), &PathOptions::default()).map_err(err)?;
        Ok(PyLoop { inner: Arc::new(synthesize_loop(&basis, path, 0.1, Some(seed))) })
    }

    #[staticmethod]
    fn from_manifest(text: &str) -> PyResult<Self> {
        let man: LoopManifest = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyLoop { inner: Arc::new(equiloops::EquidistributedLoop::from_manifest(&man).map_err(err)?) })
    }

    fn manifest(&self) -> String {
        serde_json::to_string(&self.inner.manifest()).expect("manifest serializes")
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn spins(&self) -> Vec<String> {
        self.inner.basis.spins().iter().map(|s| s.to_string()).collect()
    }

    fn theta(&self, t: f64) -> [f64; 4] {
        self.inner.theta(t).0
    }

    fn samples(&self, n: usize) -> Vec<(f64, [f64; 4])> {
        self.inner.samples(n).into_iter().map(|(t, g)| (t, g.0)).collect()
    }

    #[pyo3(signature = (grid = 256, translates = 10, seed = 0, tol = 1e-8))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        grid: usize,
        translates: usize,
        seed: u64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let rep = equiloops::verify_equidistribution(&self.inner, &self.inner.basis, translates, grid, seed, tol);
        to_py(py, &rep)
    }

    /// Projection to `S^2 = SU(2)/U(1)` with the given band limit.
    #[pyo3(signature = (band = "1", grid = 64, tol = 1e-8))]
    fn project_to_sphere<'py>(&self, py: Python<'py>, band: &str, grid: usize, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        let spec = QuotientSpec::sphere(Spin::parse(band).map_err(err)?);
        let lp = &self.inner;
        let rep = equiloops::project_loop_to_quotient(|t| lp.theta(t), lp.m, &lp.basis, spec, grid, tol);
        to_py(py, &rep)
    }
}

/// Full cancellation over `qbar = q0' m` iterates for the compact `V_n` family;
/// `loop = None` runs the trivial loop.
#[pyfunction]
#[pyo3(signature = (r#loop, spins, m, n = 1, q0 = 2, p = 1, nt = 8, ng = 16, seed = 0, tol = 1e-6))]
#[allow(clippy::too_many_arguments)]
fn compact_certificate<'py>(
    py: Python<'py>,
    r#loop: Option<&PyLoop>,
    spins: Vec<String>,
    m: usize,
    n: usize,
    q0: u64,
    p: i64,
    nt: usize,
    ng: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let spins = spins_of(&spins)?;
    let gamma = r#loop.map(|l| l.inner.as_group_loop());
    let m = r#loop.map_or(m, |l| l.inner.m);
    let grid = CompactGrid { nt, ng, seed };
    let cert = certify::compact_certificate(gamma.as_ref(), m, &spins, n, q0, p, grid, tol).map_err(err)?;
    to_py(py, &cert)
}

/// Residual curve for the parabolic map with `phi = e^{2 pi i y}`.
#[pyfunction]
#[pyo3(signature = (alpha, truncations, zero_phi = false))]
fn parabolic_diagnostic<'py>(
    py: Python<'py>,
    alpha: f64,
    truncations: Vec<usize>,
    zero_phi: bool,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &certify::parabolic_diagnostic(alpha, &truncations, zero_phi))
}

/// Residual curve for the constructed Heisenberg map with `phi` the given
/// `V_n` element (`None` for zero).
#[pyfunction]
#[pyo3(signature = (truncations, element = Some(0), n = 1, q0 = 2, p = 1, nt = 8, nx = 4))]
#[allow(clippy::too_many_arguments)]
fn constructed_diagnostic<'py>(
    py: Python<'py>,
    truncations: Vec<usize>,
    element: Option<usize>,
    n: usize,
    q0: u64,
    p: i64,
    nt: usize,
    nx: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let cons = nilconstruct::build_construction(&NilStructure::heisenberg3(), n, q0).map_err(err)?;
    let rows = certify::constructed_diagnostic(&cons, p, element, &truncations, NilGrid { nt, nx }).map_err(err)?;
    to_py(py, &rows)
}

#[pymodule]
fn due_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(eta_exponential_sum, m)?)?;
    m.add_function(wrap_pyfunction!(ak_rationals, m)?)?;
    m.add_function(wrap_pyfunction!(torus_norm, m)?)?;
    m.add_function(wrap_pyfunction!(wigner, m)?)?;
    m.add_function(wrap_pyfunction!(nil_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(compact_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(parabolic_diagnostic, m)?)?;
    m.add_function(wrap_pyfunction!(constructed_diagnostic, m)?)?;
    m.add_class::<PyNilGroup>()?;
    m.add_class::<PyLoop>()?;
    Ok(())
}
