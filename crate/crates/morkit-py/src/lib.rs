//! Python bindings: build or load second-order models, run the
//! structure-preserving reduction, and evaluate sigma sweeps and H2 errors
//! with numpy arrays on both sides of the boundary.

use numpy::{IntoPyArray, PyReadonlyArray1, PyReadonlyArray2};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use morkit::h2norm::{h2_error_report, h2_norm_full, linearize_reduced};
use morkit::irka_fo::IrkaOptions;
use morkit::irka_so::{spmor_mimo, spmor_siso};
use morkit::models::{build_som, load_dataset, DatasetManifest, SomParams};
use morkit::numkernel::{Mat, SparseMatrix};
use morkit::sysmodel::{
    linearize, sigma_sweep, FrequencyGrid, Level, LtiSystem, ReducedSecondOrderSystem,
};
use morkit::Limits;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A second-order model M x'' + D x' + K x = H u, y = L x.
#[pyclass(name = "SecondOrderSystem")]
struct PySecondOrderSystem {
    inner: morkit::sysmodel::SecondOrderSystem,
}

#[pymethods]
impl PySecondOrderSystem {
    /// Builds a system from dense M, D, K, H, L arrays.
    #[new]
    fn new(
        m: PyReadonlyArray2<f64>,
        d: PyReadonlyArray2<f64>,
        k: PyReadonlyArray2<f64>,
        h: PyReadonlyArray2<f64>,
        l: PyReadonlyArray2<f64>,
    ) -> PyResult<Self> {
        let sp = |a: PyReadonlyArray2<f64>| SparseMatrix::from_dense(&a.as_array().to_owned());
        let inner = morkit::sysmodel::SecondOrderSystem::new(
            sp(m),
            sp(d),
            sp(k),
            h.as_array().to_owned(),
            l.as_array().to_owned(),
        )
        .map_err(err)?;
        Ok(PySecondOrderSystem { inner })
    }

    /// Oscillator-chain benchmark with n1 masses per chain (n = 3 n1 + 1).
    #[staticmethod]
    fn som(n1: usize) -> PyResult<Self> {
        Ok(PySecondOrderSystem { inner: build_som(&SomParams::new(n1)).map_err(err)? })
    }

    /// Loads a model from a JSON manifest of five Matrix Market files.
    #[staticmethod]
    fn from_manifest(path: &str) -> PyResult<Self> {
        let manifest = DatasetManifest::from_file(std::path::Path::new(path)).map_err(err)?;
        Ok(PySecondOrderSystem { inner: load_dataset(&manifest).map_err(err)? })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn num_inputs(&self) -> usize {
        self.inner.num_inputs()
    }

    #[getter]
    fn num_outputs(&self) -> usize {
        self.inner.num_outputs()
    }

    /// Largest singular value of the transfer function on a frequency grid.
    fn sigma<'py>(
        &self,
        py: Python<'py>,
        omega: PyReadonlyArray1<f64>,
    ) -> PyResult<Bound<'py, numpy::PyArray1<f64>>> {
        sweep(py, &self.inner, omega)
    }

    /// H2 norm via the Gramian trace formula.
    fn h2_norm(&self) -> PyResult<f64> {
        let fo = linearize(&self.inner).map_err(err)?;
        let (norm, _) = h2_norm_full(&fo, &Limits::from_env()).map_err(err)?;
        Ok(norm)
    }

    /// Runs the structure-preserving reduction to order r.
    #[pyo3(signature = (r, tol=1e-6, max_iter=100, seed=0))]
    fn reduce(&self, r: usize, tol: f64, max_iter: usize, seed: u64) -> PyResult<PySpmorResult> {
        let mut opts = IrkaOptions::new(r);
        opts.tol = tol;
        opts.max_iter = max_iter;
        opts.seed = seed;
        if seed != 0 {
            opts.init = morkit::irka_fo::ShiftInit::SeededRandom;
        }
        opts.limits = Limits::from_env();
        let res = if self.inner.is_siso() {
            spmor_siso(&self.inner, &opts)
        } else {
            spmor_mimo(&self.inner, &opts)
        }
        .map_err(err)?;
        Ok(PySpmorResult { inner: res })
    }

    /// Relative H2 error of a reduced model against this system.
    fn h2_error(&self, rom: &PyReducedSystem) -> PyResult<f64> {
        let fo = linearize(&self.inner).map_err(err)?;
        let rom1 = linearize_reduced(&rom.inner).map_err(err)?;
        let rep = h2_error_report(&fo, &rom1, &Limits::from_env()).map_err(err)?;
        Ok(rep.rel_error)
    }
}

fn sweep<'py>(
    py: Python<'py>,
    sys: &dyn LtiSystem,
    omega: PyReadonlyArray1<f64>,
) -> PyResult<Bound<'py, numpy::PyArray1<f64>>> {
    let grid = FrequencyGrid::new(omega.as_array().to_vec()).map_err(err)?;
    let rows = sigma_sweep(sys, &grid).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|p| p.sigma)
        .collect::<Vec<_>>()
        .into_pyarray(py))
}

/// A reduced second-order model at the position or velocity level.
#[pyclass(name = "ReducedSystem")]
struct PyReducedSystem {
    inner: ReducedSecondOrderSystem,
}

#[pymethods]
impl PyReducedSystem {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn level(&self) -> &'static str {
        match self.inner.level {
            Level::Position => "position",
            Level::Velocity => "velocity",
        }
    }

    /// Dense reduced matrices as numpy arrays (M, D, K, H, L).
    fn matrices<'py>(
        &self,
        py: Python<'py>,
    ) -> PyResult<(
        Bound<'py, numpy::PyArray2<f64>>,
        Bound<'py, numpy::PyArray2<f64>>,
        Bound<'py, numpy::PyArray2<f64>>,
        Bound<'py, numpy::PyArray2<f64>>,
        Bound<'py, numpy::PyArray2<f64>>,
    )> {
        let out = |a: &Mat| a.clone().into_pyarray(py);
        Ok((
            out(&self.inner.mhat),
            out(&self.inner.dhat),
            out(&self.inner.khat),
            out(&self.inner.hhat),
            out(&self.inner.lhat),
        ))
    }

    fn sigma<'py>(
        &self,
        py: Python<'py>,
        omega: PyReadonlyArray1<f64>,
    ) -> PyResult<Bound<'py, numpy::PyArray1<f64>>> {
        sweep(py, &self.inner, omega)
    }

    fn is_stable(&self) -> PyResult<bool> {
        Ok(morkit::sysmodel::is_stable_rom_so(&self.inner)
            .map_err(err)?
            .stable)
    }
}

/// Outcome of one reduction run: both reduced models plus the iteration report.
#[pyclass(name = "SpmorResult")]
struct PySpmorResult {
    inner: morkit::irka_so::SpmorResult,
}

#[pymethods]
impl PySpmorResult {
    #[getter]
    fn converged(&self) -> bool {
        self.inner.report.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.report.iterations
    }

    #[getter]
    fn position(&self) -> PyReducedSystem {
        PyReducedSystem { inner: self.inner.rom_position.clone() }
    }

    #[getter]
    fn velocity(&self) -> PyReducedSystem {
        PyReducedSystem { inner: self.inner.rom_velocity.clone() }
    }

    /// Convergence report as a JSON string.
    fn report_json(&self) -> PyResult<String> {
        self.inner.report.to_json().map_err(err)
    }

    /// Writes both reduced models and the report into a directory.
    fn save(&self, dir: &str) -> PyResult<()> {
        self.inner.save(std::path::Path::new(dir)).map_err(err)
    }
}

#[pymodule]
fn morkit_py(m: &Bound<PyModule>) -> PyResult<()> {
    m.add_class::<PySecondOrderSystem>()?;
    m.add_class::<PyReducedSystem>()?;
    m.add_class::<PySpmorResult>()?;
    Ok(())
}
