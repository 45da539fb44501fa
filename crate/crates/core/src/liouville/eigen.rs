//! Dense eigendecompositions backed by faer.
//!
//! Both routines normalize eigenvectors to unit length and rotate each so
//! that its first non-negligible entry is real and positive, which makes
//! downstream Kraus operators reproducible.

use std::cmp::Ordering;

use faer::Side;

use crate::error::{Error, Result};
use crate::matrix::{vec_norm, ComplexMatrix, C64};

/// Relative residual `‖Mv − λv‖ / ‖M‖_F` accepted from the general solver.
pub const EIG_RESIDUAL_TOL: f64 = 1e-8;

/// Relative Hermiticity defect accepted by [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: C64,
    pub vector: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct RealEigenPair {
    pub value: f64,
    pub vector: Vec<C64>,
}

fn fix_phase(v: &mut [C64]) {
    let norm = vec_norm(v);
    if norm == 0.0 {
        return;
    }
    for z in v.iter_mut() {
        *z /= norm;
    }
    let biggest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(lead) = v.iter().copied().find(|z| z.norm() > 1e-8 * biggest) {
        let phase = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Order by real part descending, then imaginary part descending.
fn cmp_desc(a: &C64, b: &C64) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

fn require_square(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Eigenvalues and unit eigenvectors of a general square matrix, listed with
/// multiplicity and ordered by (real part desc, imaginary part desc).
pub fn eig_general(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    require_square(m)?;
    let n = m.rows();
    let evd = m
        .to_faer()
        .eigen()
        .map_err(|e| Error::EigenNonConvergence(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();

    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for k in 0..n {
        let value = values[k];
        let mut vector: Vec<C64> = (0..n).map(|i| vectors[(i, k)]).collect();
        fix_phase(&mut vector);
        let mv = m.mul_vec(&vector)?;
        let residual = mv
            .iter()
            .zip(&vector)
            .map(|(a, b)| (a - value * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(residual / scale);
        pairs.push(EigenPair { value, vector });
    }
    if !worst.is_finite() || worst > EIG_RESIDUAL_TOL {
        return Err(Error::EigenNonConvergence(format!(
            "worst relative residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.1e}"
        )));
    }
    pairs.sort_by(|a, b| cmp_desc(&a.value, &b.value));
    Ok(pairs)
}

/// Eigenvalues only, same ordering as [`eig_general`].
pub fn eigenvalues_general(m: &ComplexMatrix) -> Result<Vec<C64>> {
    require_square(m)?;
    let mut values = m
        .to_faer()
        .eigenvalues()
        .map_err(|e| Error::EigenNonConvergence(format!("{e:?}")))?;
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenNonConvergence("non-finite eigenvalue".into()));
    }
    values.sort_by(cmp_desc);
    Ok(values)
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    require_square(m)?;
    let defect = m.hermiticity_defect();
    let limit = HERMITIAN_TOL * m.max_abs().max(1.0);
    if defect > limit {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian: max |M - M†| = {defect:.3e} > {limit:.1e}"
        )));
    }
    Ok(())
}

/// Real eigenvalues (descending) and orthonormal eigenvectors of a
/// Hermitian matrix.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Vec<RealEigenPair>> {
    check_hermitian(m)?;
    let n = m.rows();
    let evd = m
        .hermitian_part()
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenNonConvergence(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    // faer returns ascending order
    let mut pairs: Vec<RealEigenPair> = (0..n)
        .rev()
        .map(|k| {
            let mut vector: Vec<C64> = (0..n).map(|i| vectors[(i, k)]).collect();
            fix_phase(&mut vector);
            RealEigenPair {
                value: values[k].re,
                vector,
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    Ok(pairs)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    let mut values: Vec<f64> = m
        .hermitian_part()
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenNonConvergence(format!("{e:?}")))?;
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `Σ λ_i v_i v_i†`.
pub fn reconstruct_hermitian(pairs: &[RealEigenPair]) -> Result<ComplexMatrix> {
    let n = pairs
        .first()
        .map(|p| p.vector.len())
        .ok_or_else(|| Error::Dimension("no eigenpairs to reconstruct from".into()))?;
    let mut out = ComplexMatrix::zeros(n, n);
    for p in pairs {
        if p.vector.len() != n {
            return Err(Error::Dimension("eigenvectors of unequal length".into()));
        }
        for i in 0..n {
            let a = p.vector[i] * p.value;
            for j in 0..n {
                out[(i, j)] += a * p.vector[j].conj();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{I, ONE, ZERO};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_spectrum_with_multiplicity() {
        let m = ComplexMatrix::diagonal(&[ONE, c(0.0, 1.2), c(0.0, -1.2), ONE]);
        let pairs = eig_general(&m).unwrap();
        let values: Vec<C64> = pairs.iter().map(|p| p.value).collect();
        let expected = [ONE, ONE, c(0.0, 1.2), c(0.0, -1.2)];
        for (v, e) in values.iter().zip(expected) {
            assert!((v - e).norm() < 1e-14, "{values:?}");
        }
    }

    #[test]
    fn identity_spectrum() {
        let pairs = eig_general(&ComplexMatrix::identity(5)).unwrap();
        assert!(pairs.iter().all(|p| (p.value - ONE).norm() < 1e-14));
        let herm = eig_hermitian(&ComplexMatrix::identity(4)).unwrap();
        assert!(herm.iter().all(|p| (p.value - 1.0).abs() < 1e-14));
    }

    #[test]
    fn rotation_eigenvalues_on_unit_circle() {
        let t = std::f64::consts::FRAC_PI_3;
        let rot = ComplexMatrix::from_real_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]).unwrap();
        let pairs = eig_general(&rot).unwrap();
        let e = C64::from_polar(1.0, t);
        assert!((pairs[0].value - e).norm() < 1e-14);
        assert!((pairs[1].value - e.conj()).norm() < 1e-14);
        for p in &pairs {
            let mv = rot.mul_vec(&p.vector).unwrap();
            for (a, b) in mv.iter().zip(&p.vector) {
                assert!((a - p.value * b).norm() < 1e-13);
            }
            // phase convention
            assert!(p.vector[0].im.abs() < 1e-15 && p.vector[0].re > 0.0);
        }
    }

    #[test]
    fn hermitian_reconstruction_and_order() {
        let m = ComplexMatrix::new(
            3,
            3,
            vec![c(2.0, 0.0), c(0.5, 0.5), ZERO, c(0.5, -0.5), c(-1.0, 0.0), I, ZERO, -I, c(0.3, 0.0)],
        )
        .unwrap();
        let pairs = eig_hermitian(&m).unwrap();
        assert!(pairs.windows(2).all(|w| w[0].value >= w[1].value));
        let back = reconstruct_hermitian(&pairs).unwrap();
        assert!(back.approx_eq(&m, 1e-13));
        let values = eigenvalues_hermitian(&m).unwrap();
        for (a, b) in values.iter().zip(&pairs) {
            assert!((a - b.value).abs() < 1e-13);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::new(2, 2, vec![ONE, ONE, ZERO, ONE]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::Validation(_))));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(eig_general(&rect), Err(Error::Dimension(_))));
    }
}
