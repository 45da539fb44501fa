use incoherence::channels::{
    expm_unitary, make_synthetic_profile, rf_incoherent_channel, rud_superoperator, Hamiltonian, ProfileKind,
    ProfilePoint, RfProfile, UnitaryEnsemble,
};
use incoherence::fixtures::SpinFixture;
use incoherence::liouville::{
    choi_to_kraus, eigenvalues_general, is_cp, superop_to_choi, DensityMatrix, Superoperator, STATE_TOL,
};
use incoherence::nonuniform_ft::{InverseMethod, RecoveryGrid};
use incoherence::spectral::{profile_metrics, recover_profile, ProfileMetrics, RecoveryOptions};
use incoherence::tomography::{run_qpt_scenario, QptScenario};
use incoherence::{ComplexMatrix, Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::EigenNonConvergence(_) | Error::IllConditioned { .. } | Error::DegenerateSpectrum { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

fn from_rows(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(&rows).map_err(to_py)
}

fn hamiltonian(expr: &str) -> PyResult<Hamiltonian> {
    Hamiltonian::from_pauli_sum(expr).map_err(to_py)
}

fn metrics_dict<'py>(py: Python<'py>, m: &ProfileMetrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mean", m.mean)?;
    d.set_item("std", m.std)?;
    d.set_item("skewness", m.skewness)?;
    d.set_item("clipped_mass", m.clipped_mass)?;
    Ok(d)
}

/// Liouville-space superoperator acting on column-stacked density matrices.
#[pyclass(name = "Channel", module = "incoherence_py", frozen)]
struct PyChannel {
    inner: Superoperator,
}

#[pymethods]
impl PyChannel {
    #[staticmethod]
    fn from_matrix(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(Self {
            inner: Superoperator::new(from_rows(rows)?).map_err(to_py)?,
        })
    }

    /// Weighted mixture of `exp(−i·angle·generator)` conjugations.
    #[staticmethod]
    fn from_ensemble(members: Vec<(f64, String, f64)>) -> PyResult<Self> {
        let members = members
            .iter()
            .map(|(w, g, a)| Ok((*w, expm_unitary(&hamiltonian(g)?, *a).map_err(to_py)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: rud_superoperator(&UnitaryEnsemble::new(members).map_err(to_py)?),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        rows(self.inner.matrix())
    }

    fn eigenvalues(&self) -> PyResult<Vec<C64>> {
        eigenvalues_general(self.inner.matrix()).map_err(to_py)
    }

    /// Descending.
    fn choi_eigenvalues(&self) -> PyResult<Vec<f64>> {
        superop_to_choi(&self.inner).eigenvalues().map_err(to_py)
    }

    #[pyo3(signature = (tol = incoherence::liouville::DEFAULT_CP_TOL))]
    fn is_cp(&self, tol: f64) -> PyResult<bool> {
        Ok(is_cp(&self.inner, tol).map_err(to_py)?.is_cp)
    }

    fn kraus(&self) -> PyResult<Vec<Vec<Vec<C64>>>> {
        let k = choi_to_kraus(&superop_to_choi(&self.inner), None).map_err(to_py)?;
        Ok(k.operators().iter().map(rows).collect())
    }

    fn apply(&self, rho: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
        let rho = DensityMatrix::new(from_rows(rho)?, STATE_TOL).map_err(to_py)?;
        Ok(rows(&self.inner.apply_to_operator(rho.matrix()).map_err(to_py)?))
    }

    fn unitality_defect(&self) -> f64 {
        self.inner.unitality_defect()
    }

    fn trace_preservation_defect(&self) -> f64 {
        self.inner.trace_preservation_defect()
    }

    fn __repr__(&self) -> String {
        format!("Channel(dim={})", self.inner.dim())
    }
}

/// Discrete distribution over the control deviation Δω.
#[pyclass(name = "Profile", module = "incoherence_py", frozen)]
struct PyProfile {
    inner: RfProfile,
}

#[pymethods]
impl PyProfile {
    #[new]
    fn new(points: Vec<(f64, f64)>) -> PyResult<Self> {
        let points = points
            .into_iter()
            .map(|(delta_omega, weight)| ProfilePoint { delta_omega, weight })
            .collect();
        Ok(Self {
            inner: RfProfile::new(points).map_err(to_py)?,
        })
    }

    /// `kind` is `uniform`, `gaussian` or `skewed`.
    #[staticmethod]
    #[pyo3(signature = (kind, center, width, skew = 0.0, n_points = 41))]
    fn synthetic(kind: &str, center: f64, width: f64, skew: f64, n_points: usize) -> PyResult<Self> {
        let kind = match kind {
            "uniform" => ProfileKind::Uniform { center, width },
            "gaussian" => ProfileKind::Gaussian { center, width },
            "skewed" => ProfileKind::Skewed { center, width, skew },
            other => return Err(PyValueError::new_err(format!("unknown profile kind '{other}'"))),
        };
        Ok(Self {
            inner: make_synthetic_profile(kind, n_points).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: RfProfile::read_csv(text.as_bytes()).map_err(to_py)?,
        })
    }

    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.points().iter().map(|p| (p.delta_omega, p.weight)).collect()
    }

    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        metrics_dict(py, &profile_metrics(self.inner.points()).map_err(to_py)?)
    }

    fn to_csv(&self) -> PyResult<String> {
        self.inner.to_csv_string().map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Diagonal `H0·t` with a perturbation `K`.
#[pyclass(name = "SpinSystem", module = "incoherence_py", frozen)]
struct PySpinSystem {
    h0t: Hamiltonian,
    k: Hamiltonian,
}

#[pymethods]
impl PySpinSystem {
    #[new]
    fn new(h0t: &str, k: &str) -> PyResult<Self> {
        Ok(Self {
            h0t: hamiltonian(h0t)?,
            k: hamiltonian(k)?,
        })
    }

    /// `"3q"` or `"4q"`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let f = SpinFixture::by_name(name).map_err(to_py)?;
        Ok(Self { h0t: f.h0t, k: f.k })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.h0t.dim()
    }

    /// Incoherent channel for `profile`, simulated with `H0·t + offset·K`.
    #[pyo3(signature = (profile, offset = 0.0))]
    fn channel(&self, profile: &PyProfile, offset: f64) -> PyResult<PyChannel> {
        let h0 = self.h0t.plus(&self.k.scaled(offset)).map_err(to_py)?;
        Ok(PyChannel {
            inner: rf_incoherent_channel(&h0, &self.k, &profile.inner, 1.0).map_err(to_py)?,
        })
    }

    /// Recovers the profile from `channel`'s spectrum. Returns a dict with
    /// `profile`, `metrics`, `offset`, `samples` and `quality`.
    #[pyo3(signature = (channel, method = "weighted_riemann", grid = None))]
    fn recover<'py>(
        &self,
        py: Python<'py>,
        channel: &PyChannel,
        method: &str,
        grid: Option<(f64, f64, usize)>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let method: InverseMethod = method.parse().map_err(to_py)?;
        let grid = match grid {
            Some((lo, hi, n)) => RecoveryGrid::new(lo, hi, n).map_err(to_py)?,
            None => RecoveryGrid::default(),
        };
        let options = RecoveryOptions {
            method,
            grid,
            ..Default::default()
        };
        let r = recover_profile(&channel.inner, &self.h0t, &self.k, &options).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("profile", PyProfile { inner: r.inverse.profile.clone() })?;
        d.set_item("metrics", metrics_dict(py, &r.metrics)?)?;
        d.set_item("offset", r.offset)?;
        let samples: Vec<(f64, C64)> = r.samples.samples().iter().map(|s| (s.k, s.f)).collect();
        d.set_item("samples", samples)?;
        let q = PyDict::new(py);
        q.set_item("imag_residual", r.inverse.quality.imag_residual)?;
        q.set_item("clipped_mass", r.inverse.quality.clipped_mass)?;
        q.set_item("condition_number", r.inverse.quality.condition_number)?;
        q.set_item("warnings", r.inverse.quality.warnings.clone())?;
        d.set_item("quality", q)?;
        Ok(d)
    }
}

/// Simulated single-qubit tomography with a correlated environment qubit.
#[pyfunction]
#[pyo3(signature = (alpha, beta, gamma, correlated = true, cp_filter = false, generator = "ZZ", angle = std::f64::consts::FRAC_PI_4, cp_tol = incoherence::liouville::DEFAULT_CP_TOL))]
#[allow(clippy::too_many_arguments)]
fn qpt_scenario<'py>(
    py: Python<'py>,
    alpha: f64,
    beta: f64,
    gamma: f64,
    correlated: bool,
    cp_filter: bool,
    generator: &str,
    angle: f64,
    cp_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let u = expm_unitary(&hamiltonian(generator)?, angle).map_err(to_py)?;
    let scenario = QptScenario {
        cp_tol,
        ..QptScenario::new(alpha, beta, gamma, correlated, cp_filter)
    };
    let r = run_qpt_scenario(&u, scenario).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("channel", PyChannel { inner: r.s_obs.clone() })?;
    d.set_item("choi_eigenvalues", r.choi_eigenvalues.clone())?;
    d.set_item("is_cp", r.is_cp)?;
    d.set_item("kraus_count", r.kraus_count())?;
    d.set_item("kraus_unitary", r.kraus_unitary())?;
    d.set_item("removed_weight", r.removed_weight)?;
    d.set_item("condition_number", r.condition_number)?;
    Ok(d)
}

#[pymodule]
fn incoherence_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add_class::<PyProfile>()?;
    m.add_class::<PySpinSystem>()?;
    m.add_function(wrap_pyfunction!(qpt_scenario, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
