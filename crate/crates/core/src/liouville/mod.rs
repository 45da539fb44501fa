//! Liouville-space algebra.
//!
//! Density matrices are columnized by stacking columns left to right, so
//! entry `i + j·N` of the Liouville vector holds `ρ[i][j]`. With that
//! convention `columnize(A ρ B) = (Bᵀ ⊗ A) columnize(ρ)` and a unitary
//! conjugation `ρ ↦ U ρ U†` is the superoperator `conj(U) ⊗ U`.

mod choi;
mod eigen;

pub use choi::{
    choi_to_kraus, choi_to_superop, cp_filter, is_cp, kraus_to_superop, superop_to_choi,
    ChoiMatrix, CpCheck, CpFiltered, KrausSet, DEFAULT_CP_TOL, DEFAULT_RANK_TOL_REL,
};
pub use eigen::{
    eig_general, eig_hermitian, eigenvalues_general, eigenvalues_hermitian,
    reconstruct_hermitian, EigenPair, RealEigenPair, EIG_RESIDUAL_TOL, HERMITIAN_TOL,
};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Default tolerance for density-matrix validation.
pub const STATE_TOL: f64 = 1e-10;

/// Default tolerance for unitarity checks on user-supplied operators.
pub const UNITARY_TOL: f64 = 1e-10;

fn exact_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol {
            return Err(Error::Validation(format!(
                "density matrix not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > tol {
            return Err(Error::Validation(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -tol {
            return Err(Error::Validation(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix known to be a valid state by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Expectation value `Tr(ρ P)` of an observable.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        Ok(self.matrix.matmul(op)?.trace())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.matrix)
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues_hermitian(m)?.last().copied().unwrap_or(0.0))
}

/// A columnized operator of Hilbert dimension `dim`.
#[derive(Clone, Debug)]
pub struct LiouvilleVector {
    dim: usize,
    entries: Vec<C64>,
}

impl LiouvilleVector {
    pub fn from_entries(entries: Vec<C64>) -> Result<Self> {
        let dim = exact_sqrt(entries.len())
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                Error::Dimension(format!(
                    "Liouville vector length {} is not a perfect square",
                    entries.len()
                ))
            })?;
        Ok(Self { dim, entries })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }
}

/// Columnizes an arbitrary square operator.
pub fn columnize_matrix(m: &ComplexMatrix) -> Result<LiouvilleVector> {
    if !m.is_square() {
        return Err(Error::Dimension("only square operators can be columnized".into()));
    }
    let n = m.rows();
    let mut entries = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            entries.push(m[(i, j)]);
        }
    }
    Ok(LiouvilleVector { dim: n, entries })
}

/// `|ρ⟩`: the columns of `ρ` stacked left to right.
pub fn columnize(rho: &DensityMatrix) -> LiouvilleVector {
    columnize_matrix(rho.matrix()).expect("density matrices are square")
}

/// Inverse of [`columnize`]; pure reordering.
pub fn uncolumnize(v: &LiouvilleVector) -> ComplexMatrix {
    let n = v.dim;
    ComplexMatrix::from_fn(n, n, |i, j| v.entries[i + j * n])
}

/// Reads a raw slice as a Liouville vector and uncolumnizes it.
pub fn uncolumnize_slice(v: &[C64]) -> Result<ComplexMatrix> {
    let lv = LiouvilleVector::from_entries(v.to_vec())?;
    Ok(uncolumnize(&lv))
}

/// A linear map on columnized operators, stored as an `N² × N²` matrix.
#[derive(Clone, Debug)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("superoperator matrix must be square".into()));
        }
        let dim = exact_sqrt(matrix.rows()).ok_or_else(|| {
            Error::Dimension(format!(
                "superoperator side {} is not a perfect square",
                matrix.rows()
            ))
        })?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
        }
    }

    /// Hilbert-space dimension `N`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &LiouvilleVector) -> Result<LiouvilleVector> {
        if v.dim != self.dim {
            return Err(Error::Dimension(format!(
                "superoperator of dim {} cannot act on Liouville vector of dim {}",
                self.dim, v.dim
            )));
        }
        Ok(LiouvilleVector {
            dim: self.dim,
            entries: self.matrix.mul_vec(&v.entries)?,
        })
    }

    /// Applies the map to an operator and returns the output operator.
    pub fn apply_to_operator(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(uncolumnize(&self.apply(&columnize_matrix(op)?)?))
    }

    /// `max |S|I⟩ − |I⟩|`.
    pub fn unitality_defect(&self) -> f64 {
        let id = columnize_matrix(&ComplexMatrix::identity(self.dim)).expect("square");
        let out = self.matrix.mul_vec(id.entries()).expect("dims match");
        out.iter()
            .zip(id.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |⟨⟨I|S − ⟨⟨I||`, with `⟨⟨I|` the columnized identity as a row.
    pub fn trace_preservation_defect(&self) -> f64 {
        let n2 = self.dim * self.dim;
        let diag_idx: Vec<usize> = (0..self.dim).map(|i| i + i * self.dim).collect();
        let mut worst = 0.0f64;
        for col in 0..n2 {
            let s: C64 = diag_idx.iter().map(|&r| self.matrix[(r, col)]).sum();
            let target = if diag_idx.contains(&col) { ONE } else { ZERO };
            worst = worst.max((s - target).norm());
        }
        worst
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_defect() <= tol
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_preservation_defect() <= tol
    }

    /// `other` followed by `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("cannot compose maps of different dims".into()));
        }
        Ok(Self {
            dim: self.dim,
            matrix: self.matrix.matmul(&other.matrix)?,
        })
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.matrix.approx_eq(&other.matrix, tol)
    }
}

/// `conj(U) ⊗ U`: the Liouville form of `ρ ↦ U ρ U†`.
pub fn unitary_superoperator(u: &ComplexMatrix) -> Result<Superoperator> {
    unitary_superoperator_tol(u, UNITARY_TOL)
}

pub fn unitary_superoperator_tol(u: &ComplexMatrix, tol: f64) -> Result<Superoperator> {
    if !u.is_square() {
        return Err(Error::Dimension("unitary must be square".into()));
    }
    let defect = u.unitarity_defect();
    if defect > tol {
        return Err(Error::Validation(format!(
            "operator is not unitary: max |U†U − I| = {defect:.3e} > {tol:.1e}"
        )));
    }
    Ok(Superoperator {
        dim: u.rows(),
        matrix: u.conj().kron(u),
    })
}
