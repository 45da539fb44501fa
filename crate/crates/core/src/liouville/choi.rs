//! Choi matrices, Kraus decompositions and CP filtering.

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

use super::eigen::{eig_hermitian, eigenvalues_hermitian, RealEigenPair, HERMITIAN_TOL};
use super::{uncolumnize_slice, Superoperator};

/// Absolute tolerance on Choi eigenvalues for the CP test.
pub const DEFAULT_CP_TOL: f64 = 1e-9;

/// Kraus rank cutoff, relative to the largest Choi eigenvalue.
pub const DEFAULT_RANK_TOL_REL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Validates shape (`N² × N²`) and Hermiticity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = Superoperator::new(matrix.clone())?.dim();
        let defect = matrix.hermiticity_defect();
        let limit = HERMITIAN_TOL * matrix.max_abs().max(1.0);
        if defect > limit {
            return Err(Error::Validation(format!(
                "Choi matrix not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self { dim, matrix })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_hermitian(&self.matrix)
    }
}

/// `C[p·N+q, r·N+s] = S[s·N+q, r·N+p]`, i.e. `Σ_ij (E_ij ⊗ I) S (I ⊗ E_ij)`.
fn reshuffle(m: &ComplexMatrix, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (p, q) = (row / n, row % n);
        let (r, s) = (col / n, col % n);
        m[(s * n + q, r * n + p)]
    })
}

/// Choi matrix `Σ_ij (E_ij ⊗ I) S (I ⊗ E_ij)`. Pure index permutation.
pub fn superop_to_choi(s: &Superoperator) -> ChoiMatrix {
    ChoiMatrix {
        dim: s.dim(),
        matrix: reshuffle(s.matrix(), s.dim()),
    }
}

/// Inverse of [`superop_to_choi`]. The reshuffle is an involution.
pub fn choi_to_superop(c: &ChoiMatrix) -> Superoperator {
    Superoperator::new(reshuffle(&c.matrix, c.dim)).expect("reshuffle preserves shape")
}

#[derive(Clone, Copy, Debug)]
pub struct CpCheck {
    pub is_cp: bool,
    pub min_eigenvalue: f64,
}

/// Complete positivity via the Choi spectrum: CP iff `min eig ≥ −tol`.
pub fn is_cp(s: &Superoperator, tol: f64) -> Result<CpCheck> {
    let values = superop_to_choi(s).eigenvalues()?;
    let min_eigenvalue = values.last().copied().unwrap_or(0.0);
    Ok(CpCheck {
        is_cp: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// A list of Kraus operators `{A_i}` with weights absorbed into the operators.
#[derive(Clone, Debug)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = operators
            .first()
            .ok_or_else(|| Error::Dimension("Kraus set must not be empty".into()))?
            .rows();
        if operators.iter().any(|a| a.rows() != dim || a.cols() != dim) {
            return Err(Error::Dimension(format!(
                "all Kraus operators must be {dim}x{dim}"
            )));
        }
        Ok(Self { dim, operators })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `max |Σ A_i†A_i − I|`; zero for a trace-preserving set.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for a in &self.operators {
            sum = &sum + &(&a.adjoint() * a);
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim))
    }
}

/// `S = Σ_i conj(A_i) ⊗ A_i`, summed in list order.
pub fn kraus_to_superop(k: &KrausSet) -> Superoperator {
    let n2 = k.dim * k.dim;
    let mut m = ComplexMatrix::zeros(n2, n2);
    for a in &k.operators {
        m.add_scaled_assign(C64::new(1.0, 0.0), &a.conj().kron(a))
            .expect("uniform dims");
    }
    Superoperator::new(m).expect("square of Hilbert dim")
}

/// Kraus operators `√λ_i · uncolumnize(v_i)` for Choi eigenvalues above the
/// rank cutoff. `rank_tol` defaults to `1e-10 · λ_max`.
pub fn choi_to_kraus(c: &ChoiMatrix, rank_tol: Option<f64>) -> Result<KrausSet> {
    let pairs = eig_hermitian(&c.matrix)?;
    let lambda_max = pairs.first().map_or(0.0, |p| p.value);
    let tol = rank_tol.unwrap_or(DEFAULT_RANK_TOL_REL * lambda_max.abs());
    if let Some(neg) = pairs.iter().map(|p| p.value).find(|&v| v < -tol) {
        return Err(Error::NotCompletelyPositive { eigenvalue: neg, tol });
    }
    let operators = pairs
        .iter()
        .filter(|p| p.value > tol)
        .map(|p| {
            uncolumnize_slice(&p.vector).map(|a| a.scale_real(p.value.sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    if operators.is_empty() {
        return Err(Error::Validation("Choi matrix has no eigenvalue above the rank cutoff".into()));
    }
    KrausSet::new(operators)
}

#[derive(Clone, Debug)]
pub struct CpFiltered {
    pub superoperator: Superoperator,
    /// Sum of the magnitudes of the discarded negative Choi eigenvalues.
    pub removed_weight: f64,
}

/// Zeroes the negative Choi eigenvalues and rescales the rest to trace `N`.
///
/// Maps that already pass [`is_cp`] at [`DEFAULT_CP_TOL`] are returned
/// unchanged with zero removed weight.
pub fn cp_filter(s: &Superoperator) -> Result<CpFiltered> {
    let choi = superop_to_choi(s);
    let pairs = eig_hermitian(choi.matrix())?;
    let min = pairs.last().map_or(0.0, |p| p.value);
    if min >= -DEFAULT_CP_TOL {
        return Ok(CpFiltered {
            superoperator: s.clone(),
            removed_weight: 0.0,
        });
    }
    let removed_weight: f64 = pairs.iter().filter(|p| p.value < 0.0).map(|p| -p.value).sum();
    let kept: f64 = pairs.iter().filter(|p| p.value > 0.0).map(|p| p.value).sum();
    if kept <= 0.0 {
        return Err(Error::Validation(
            "CP filtering impossible: Choi matrix has no positive eigenvalue".into(),
        ));
    }
    let scale = s.dim() as f64 / kept;
    let filtered: Vec<RealEigenPair> = pairs
        .into_iter()
        .filter(|p| p.value > 0.0)
        .map(|p| RealEigenPair {
            value: p.value * scale,
            vector: p.vector,
        })
        .collect();
    let matrix = super::reconstruct_hermitian(&filtered)?;
    let choi = ChoiMatrix {
        dim: s.dim(),
        matrix,
    };
    Ok(CpFiltered {
        superoperator: choi_to_superop(&choi),
        removed_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{I, ONE};
    use crate::liouville::{columnize_matrix, unitary_superoperator};
    use crate::pauli::{identity2, sigma_x, sigma_y};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rank_one_choi(a: &ComplexMatrix) -> ComplexMatrix {
        let v = columnize_matrix(a).unwrap();
        let e = v.entries();
        ComplexMatrix::from_fn(e.len(), e.len(), |i, j| e[i] * e[j].conj())
    }

    fn diag_superop(b: f64) -> Superoperator {
        Superoperator::new(ComplexMatrix::diagonal(&[ONE, c(0.0, b), c(0.0, -b), ONE])).unwrap()
    }

    #[test]
    fn identity_channel_choi_is_maximally_entangled() {
        let choi = superop_to_choi(&Superoperator::identity(2));
        let vals = choi.eigenvalues().unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14);
        assert!(vals[1..].iter().all(|v| v.abs() < 1e-14));
        assert!((choi.matrix().trace().re - 2.0).abs() < 1e-15);
        assert!(choi.matrix().is_hermitian(0.0));
    }

    #[test]
    fn correlated_map_choi_spectrum() {
        let vals = superop_to_choi(&diag_superop(1.2)).eigenvalues().unwrap();
        let expected = [2.2, 0.0, 0.0, -0.2];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14, "{vals:?}");
        }
        let vals = superop_to_choi(&diag_superop(0.5)).eigenvalues().unwrap();
        let expected = [1.5, 0.5, 0.0, 0.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-14, "{vals:?}");
        }
    }

    #[test]
    fn reshuffle_round_trip_is_bit_exact() {
        for s in [diag_superop(1.2), Superoperator::identity(2)] {
            let back = choi_to_superop(&superop_to_choi(&s));
            assert_eq!(back.matrix().entries(), s.matrix().entries());
        }
    }

    #[test]
    fn cp_checks() {
        let ncp = is_cp(&diag_superop(1.2), DEFAULT_CP_TOL).unwrap();
        assert!(!ncp.is_cp);
        assert!((ncp.min_eigenvalue + 0.2).abs() < 1e-14);

        let cp = is_cp(&diag_superop(0.5), DEFAULT_CP_TOL).unwrap();
        assert!(cp.is_cp);
        assert!(cp.min_eigenvalue.abs() < 1e-14);

        let id = is_cp(&Superoperator::identity(2), DEFAULT_CP_TOL).unwrap();
        assert!(id.is_cp && id.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn kraus_counts() {
        let k = choi_to_kraus(&superop_to_choi(&diag_superop(0.5)), None).unwrap();
        assert_eq!(k.len(), 2);
        assert!(k.completeness_defect() < 1e-14);
        assert!(kraus_to_superop(&k).approx_eq(&diag_superop(0.5), 1e-14));

        let k = choi_to_kraus(&superop_to_choi(&Superoperator::identity(2)), None).unwrap();
        assert_eq!(k.len(), 1);
        assert!(k.operators()[0].approx_eq(&identity2(), 1e-14));
    }

    #[test]
    fn kraus_rejects_ncp() {
        let err = choi_to_kraus(&superop_to_choi(&diag_superop(1.2)), None).unwrap_err();
        match err {
            Error::NotCompletelyPositive { eigenvalue, .. } => {
                assert!((eigenvalue + 0.2).abs() < 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kraus_to_superop_examples() {
        let k = KrausSet::new(vec![identity2()]).unwrap();
        assert!(kraus_to_superop(&k).matrix().approx_eq(&ComplexMatrix::identity(4), 0.0));

        // √0.75 e^{-iπ/4 σz}, √0.25 e^{+iπ/4 σz}
        let a = std::f64::consts::FRAC_PI_4;
        let u = |s: f64| ComplexMatrix::diagonal(&[C64::from_polar(1.0, -s * a), C64::from_polar(1.0, s * a)]);
        let k = KrausSet::new(vec![u(1.0).scale_real(0.75f64.sqrt()), u(-1.0).scale_real(0.5)]).unwrap();
        assert!(kraus_to_superop(&k).approx_eq(&diag_superop(0.5), 1e-15));

        assert!(KrausSet::new(vec![]).is_err());
        assert!(KrausSet::new(vec![identity2(), ComplexMatrix::identity(3)]).is_err());
    }

    #[test]
    fn cp_filter_correlated_demo_map() {
        let out = cp_filter(&diag_superop(1.2)).unwrap();
        assert!((out.removed_weight - 0.2).abs() < 1e-14);
        let choi = superop_to_choi(&out.superoperator);
        let vals = choi.eigenvalues().unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-13);
        assert!(vals[1..].iter().all(|v| v.abs() < 1e-13));
        let k = choi_to_kraus(&choi, None).unwrap();
        assert_eq!(k.len(), 1);
        assert!(k.operators()[0].is_unitary(1e-10));
        assert!(out.superoperator.matrix().max_abs_diff(diag_superop(0.5).matrix()) > 0.1);
    }

    #[test]
    fn cp_filter_passes_cp_maps_through() {
        let s = unitary_superoperator(&sigma_y()).unwrap();
        let out = cp_filter(&s).unwrap();
        assert_eq!(out.removed_weight, 0.0);
        assert_eq!(out.superoperator.matrix().entries(), s.matrix().entries());
    }

    #[test]
    fn cp_filter_degenerate_input() {
        let neg = Superoperator::new(ComplexMatrix::identity(4).scale_real(-1.0)).unwrap();
        assert!(cp_filter(&neg).is_err());
    }

    #[test]
    fn rank_one_term_matches_reshuffle() {
        let u = sigma_x().scale(I);
        let direct = rank_one_choi(&u);
        let via = superop_to_choi(&unitary_superoperator(&u).unwrap());
        assert!(direct.approx_eq(via.matrix(), 1e-15));
    }
}
