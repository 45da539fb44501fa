//! Process tomography with system–environment correlated inputs.
//!
//! A qubit `A` is prepared jointly with an environment qubit `B` in one of
//! four states sharing the same environment marginal. The pair evolves under
//! a global unitary, `B` is traced out, and the map on `A` is obtained by
//! inverting the matrix of columnized inputs. Correlations in the inputs can
//! make that map non-completely-positive.

use crate::error::{Error, Result};
use crate::liouville::{
    choi_to_kraus, columnize, cp_filter, superop_to_choi, uncolumnize_slice, DensityMatrix,
    KrausSet, LiouvilleVector, Superoperator, DEFAULT_CP_TOL, STATE_TOL, UNITARY_TOL,
};
use crate::matrix::{ComplexMatrix, C64};
use crate::pauli::{identity2, pauli_string, sigma_x, sigma_y, sigma_z};

/// Largest input-matrix condition number accepted by [`qpt_solve`].
pub const CONDITION_LIMIT: f64 = 1e8;

/// Largest `‖S·In − Out‖_max` accepted by [`qpt_solve`].
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;

/// The four joint inputs and their reduced system states.
#[derive(Clone, Debug)]
pub struct CorrelatedInputSet {
    pub joint_states: Vec<DensityMatrix>,
    pub reduced_inputs: Vec<DensityMatrix>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CorrelatedInputSet {
    /// Environment marginal `(I + β σ_z)/2`.
    pub fn environment(&self) -> ComplexMatrix {
        identity2().try_add(&sigma_z().scale_real(self.beta)).expect("2x2").scale_real(0.5)
    }

    /// Replaces each joint state by the product of its marginals.
    pub fn decorrelated(&self) -> Result<Self> {
        let rho_b = self.environment();
        let joint_states = self
            .reduced_inputs
            .iter()
            .map(|rho_a| DensityMatrix::new(rho_a.matrix().kron(&rho_b), STATE_TOL))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            joint_states,
            reduced_inputs: self.reduced_inputs.clone(),
            alpha: self.alpha,
            beta: self.beta,
            gamma: 0.0,
        })
    }
}

/// Builds `ρ_AB^1..4 = (I + α σ_i⊗I + β I⊗σ_z + γ σ_i⊗σ_z)/4` with
/// `σ_i ∈ {0, σ_x, σ_y, σ_z}`.
pub fn prepare_correlated_inputs(alpha: f64, beta: f64, gamma: f64) -> Result<CorrelatedInputSet> {
    if ![alpha, beta, gamma].iter().all(|v| v.is_finite()) {
        return Err(Error::Validation("input parameters must be finite".into()));
    }
    let id = pauli_string("II")?;
    let env = pauli_string("IZ")?.scale_real(beta);
    let axes: [Option<ComplexMatrix>; 4] = [None, Some(sigma_x()), Some(sigma_y()), Some(sigma_z())];

    let mut joint_states = Vec::with_capacity(4);
    let mut reduced_inputs = Vec::with_capacity(4);
    for (index, axis) in axes.iter().enumerate() {
        let mut m = id.try_add(&env)?;
        if let Some(s) = axis {
            m = m
                .try_add(&s.kron(&identity2()).scale_real(alpha))?
                .try_add(&s.kron(&sigma_z()).scale_real(gamma))?;
        }
        let m = m.scale_real(0.25);
        let joint = DensityMatrix::new(m, STATE_TOL).map_err(|_| Error::NonPhysicalState {
            index: index + 1,
            min_eigenvalue: min_joint_eigenvalue(axis.is_some(), alpha, beta, gamma),
        })?;
        reduced_inputs.push(partial_trace_b(&joint)?);
        joint_states.push(joint);
    }
    Ok(CorrelatedInputSet {
        joint_states,
        reduced_inputs,
        alpha,
        beta,
        gamma,
    })
}

/// `σ_i⊗I`, `I⊗σ_z` and `σ_i⊗σ_z` commute, so the joint spectrum is
/// `(1 + a·s + β·t + g·s·t)/4` over `s, t = ±1`.
fn min_joint_eigenvalue(has_axis: bool, alpha: f64, beta: f64, gamma: f64) -> f64 {
    let (a, g) = if has_axis { (alpha, gamma) } else { (0.0, 0.0) };
    [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .map(|(s, t)| (1.0 + a * s + beta * t + g * s * t) / 4.0)
        .fold(f64::INFINITY, f64::min)
}

fn check_even(rho: &DensityMatrix) -> Result<usize> {
    let n = rho.dim();
    if !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "partial trace over a qubit needs even dimension, got {n}"
        )));
    }
    Ok(n / 2)
}

/// Traces out the trailing qubit: `ρ_A[i][j] = Σ_k ρ[2i+k][2j+k]`.
pub fn partial_trace_b(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = check_even(rho)?;
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(d, d, |i, j| m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)]);
    Ok(DensityMatrix::new_unchecked(out))
}

/// Traces out the leading factor, leaving the trailing qubit.
pub fn partial_trace_a(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let d = check_even(rho)?;
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(2, 2, |i, j| (0..d).map(|k| m[(2 * k + i, 2 * k + j)]).sum());
    Ok(DensityMatrix::new_unchecked(out))
}

/// `Tr_B(U ρ_AB U†)`.
pub fn evolve_and_reduce(u_ab: &ComplexMatrix, rho_ab: &DensityMatrix) -> Result<DensityMatrix> {
    if u_ab.rows() != rho_ab.dim() || !u_ab.is_square() {
        return Err(Error::Dimension(format!(
            "unitary is {}x{} but state is {}x{}",
            u_ab.rows(),
            u_ab.cols(),
            rho_ab.dim(),
            rho_ab.dim()
        )));
    }
    let defect = u_ab.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::Validation(format!("U_AB is not unitary (defect {defect:.3e})")));
    }
    let evolved = u_ab.matmul(rho_ab.matrix())?.matmul(&u_ab.adjoint())?;
    partial_trace_b(&DensityMatrix::new_unchecked(evolved))
}

/// The tomographic superoperator together with the input-matrix condition.
#[derive(Clone, Debug)]
pub struct QptSolution {
    pub superoperator: Superoperator,
    pub condition_number: f64,
    pub residual: f64,
}

/// `S = Out · In⁻¹` where the columns of `In`/`Out` are columnized states.
pub fn qpt_solve(inputs: &[LiouvilleVector], outputs: &[LiouvilleVector]) -> Result<QptSolution> {
    if inputs.is_empty() || inputs.len() != outputs.len() {
        return Err(Error::Dimension(format!(
            "need equally many inputs and outputs, got {} and {}",
            inputs.len(),
            outputs.len()
        )));
    }
    let n2 = inputs[0].entries().len();
    if inputs.len() != n2 {
        return Err(Error::Dimension(format!(
            "{n2}-dimensional Liouville space needs {n2} inputs, got {}",
            inputs.len()
        )));
    }
    let to_cols = |vs: &[LiouvilleVector]| -> Result<ComplexMatrix> {
        if vs.iter().any(|v| v.entries().len() != n2) {
            return Err(Error::Dimension("Liouville vectors of unequal length".into()));
        }
        ComplexMatrix::from_columns(&vs.iter().map(|v| v.entries().to_vec()).collect::<Vec<_>>())
    };
    let input = to_cols(inputs)?;
    let output = to_cols(outputs)?;

    let condition = input.condition_number()?;
    if condition.is_nan() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    // S·In = Out  ⇔  Inᵀ·Sᵀ = Outᵀ
    let s = input.transpose().solve(&output.transpose())?.transpose();
    let residual = s.matmul(&input)?.max_abs_diff(&output);
    if residual > SOLVE_RESIDUAL_TOL {
        return Err(Error::Validation(format!(
            "tomography residual {residual:.3e} exceeds {SOLVE_RESIDUAL_TOL:.1e}"
        )));
    }
    Ok(QptSolution {
        superoperator: Superoperator::new(s)?,
        condition_number: condition,
        residual,
    })
}

/// Kraus operators `√p_ν ⟨μ|U_AB|ν⟩` of the uncorrelated reduced dynamics,
/// with `ρ_B = Σ_ν p_ν |ν⟩⟨ν|`.
pub fn uncorrelated_kraus(u_ab: &ComplexMatrix, rho_b: &DensityMatrix) -> Result<KrausSet> {
    if u_ab.rows() != 4 || rho_b.dim() != 2 {
        return Err(Error::Dimension("expected a two-qubit unitary and a qubit environment".into()));
    }
    let env = crate::liouville::eig_hermitian(rho_b.matrix())?;
    let mut ops = Vec::new();
    for nu in &env {
        if nu.value <= 0.0 {
            continue;
        }
        for mu in 0..2 {
            // ⟨μ|U|ν⟩ as an operator on A
            let block = ComplexMatrix::from_fn(2, 2, |i, j| {
                (0..2).map(|k| u_ab[(2 * i + mu, 2 * j + k)] * nu.vector[k]).sum::<C64>()
            });
            ops.push(block.scale_real(nu.value.sqrt()));
        }
    }
    KrausSet::new(ops)
}

/// Outcome of one tomography run.
#[derive(Clone, Debug)]
pub struct QptReport {
    pub s_obs: Superoperator,
    /// Choi eigenvalues, descending.
    pub choi_eigenvalues: Vec<f64>,
    pub is_cp: bool,
    /// Present iff `is_cp`.
    pub kraus: Option<KrausSet>,
    /// Present iff CP filtering was requested.
    pub removed_weight: Option<f64>,
    pub condition_number: f64,
}

impl QptReport {
    pub fn kraus_count(&self) -> Option<usize> {
        self.kraus.as_ref().map(KrausSet::len)
    }

    /// Whether every Kraus operator is proportional to a unitary.
    pub fn kraus_unitary(&self) -> Option<bool> {
        self.kraus.as_ref().map(|k| {
            k.operators().iter().all(|a| {
                let aa = a.adjoint().matmul(a).expect("square");
                let scale = aa.trace().re / a.rows() as f64;
                scale > 0.0 && aa.approx_eq(&ComplexMatrix::identity(a.rows()).scale_real(scale), 1e-10)
            })
        })
    }
}

/// Parameters of a tomography scenario.
#[derive(Clone, Copy, Debug)]
pub struct QptScenario {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub correlated: bool,
    pub apply_cp_filter: bool,
    /// Smallest Choi eigenvalue still counted as non-negative is `−cp_tol`.
    pub cp_tol: f64,
}

impl QptScenario {
    /// Scenario with the default CP tolerance.
    pub fn new(alpha: f64, beta: f64, gamma: f64, correlated: bool, apply_cp_filter: bool) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            correlated,
            apply_cp_filter,
            cp_tol: DEFAULT_CP_TOL,
        }
    }
}

/// Prepares inputs, evolves, reduces, solves and diagnoses.
pub fn run_qpt_scenario(u_ab: &ComplexMatrix, scenario: QptScenario) -> Result<QptReport> {
    let mut inputs = prepare_correlated_inputs(scenario.alpha, scenario.beta, scenario.gamma)?;
    if !scenario.correlated {
        inputs = inputs.decorrelated()?;
    }
    let outputs = inputs
        .joint_states
        .iter()
        .map(|rho| evolve_and_reduce(u_ab, rho).map(|r| columnize(&r)))
        .collect::<Result<Vec<_>>>()?;
    let ins: Vec<LiouvilleVector> = inputs.reduced_inputs.iter().map(columnize).collect();
    let solution = qpt_solve(&ins, &outputs)?;

    let (s_obs, removed_weight) = if scenario.apply_cp_filter {
        let filtered = cp_filter(&solution.superoperator)?;
        (filtered.superoperator, Some(filtered.removed_weight))
    } else {
        (solution.superoperator, None)
    };
    let choi = superop_to_choi(&s_obs);
    let choi_eigenvalues = choi.eigenvalues()?;
    let is_cp = choi_eigenvalues.last().is_none_or(|&v| v >= -scenario.cp_tol);
    let kraus = if is_cp { Some(choi_to_kraus(&choi, None)?) } else { None };
    Ok(QptReport {
        s_obs,
        choi_eigenvalues,
        is_cp,
        kraus,
        removed_weight,
        condition_number: solution.condition_number,
    })
}

/// Maps a columnized 2×2 output back to a density matrix, for reporting.
pub fn reduced_output(v: &LiouvilleVector) -> Result<ComplexMatrix> {
    uncolumnize_slice(v.entries())
}
