//! Reference spin systems for spectral recovery.
//!
//! `H0·t = Σ_q ω_q σ_z^(q)/2 + Σ_{q<r} J_qr σ_z^(q)σ_z^(r)/2` is diagonal
//! with all eigenphase differences distinct. The perturbation is
//! `K = 0.3·H0·t + ε·Σ_q σ_x^(q)`: the first term spreads the `K_jm` over a
//! wide window, the second breaks `[H0, K] = 0` by a controlled amount.

use crate::channels::{make_synthetic_profile, Hamiltonian, ProfileKind, RfProfile};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::pauli::single_site;
use crate::spectral::{EigenBasis, DEFAULT_DEGENERACY_TOL};

/// Scale of the commuting part of `K` relative to `H0·t`.
pub const K_DIAGONAL_SCALE: f64 = 0.3;

/// Default transverse coupling `ε`.
pub const DEFAULT_TRANSVERSE: f64 = 5e-3;

const THREE_QUBIT_OMEGAS: [f64; 3] = [53.1, 97.7, 149.3];
const THREE_QUBIT_COUPLINGS: [(usize, usize, f64); 3] = [(0, 1, 1.3), (0, 2, 2.9), (1, 2, 4.1)];

const FOUR_QUBIT_OMEGAS: [f64; 4] = [41.3, 67.9, 101.7, 131.1];
const FOUR_QUBIT_COUPLINGS: [(usize, usize, f64); 6] = [
    (0, 1, 4.26),
    (0, 2, 4.59),
    (0, 3, 2.28),
    (1, 2, 5.23),
    (1, 3, 2.72),
    (2, 3, 4.47),
];

#[derive(Clone, Debug)]
pub struct SpinFixture {
    pub n_qubits: usize,
    pub h0t: Hamiltonian,
    pub k: Hamiltonian,
    pub transverse: f64,
}

fn zz_chain(n: usize, omegas: &[f64], couplings: &[(usize, usize, f64)]) -> Result<ComplexMatrix> {
    let dim = 1 << n;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (q, &w) in omegas.iter().enumerate() {
        h = h.try_add(&single_site('Z', q, n)?.scale_real(w / 2.0))?;
    }
    for &(a, b, j) in couplings {
        let zz = single_site('Z', a, n)?.matmul(&single_site('Z', b, n)?)?;
        h = h.try_add(&zz.scale_real(j / 2.0))?;
    }
    Ok(h)
}

fn transverse_field(n: usize) -> Result<ComplexMatrix> {
    let dim = 1 << n;
    (0..n).try_fold(ComplexMatrix::zeros(dim, dim), |acc, q| acc.try_add(&single_site('X', q, n)?))
}

impl SpinFixture {
    /// The 3-qubit system: 64 eigenvalues, 57 Fourier samples.
    pub fn three_qubit() -> Self {
        Self::build(3, &THREE_QUBIT_OMEGAS, &THREE_QUBIT_COUPLINGS, DEFAULT_TRANSVERSE).expect("static fixture")
    }

    /// The 4-qubit system: 256 eigenvalues, 241 Fourier samples.
    pub fn four_qubit() -> Self {
        Self::build(4, &FOUR_QUBIT_OMEGAS, &FOUR_QUBIT_COUPLINGS, DEFAULT_TRANSVERSE).expect("static fixture")
    }

    /// Looks up `"3q"` or `"4q"`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "3q" => Ok(Self::three_qubit()),
            "4q" => Ok(Self::four_qubit()),
            other => Err(Error::Validation(format!("unknown fixture '{other}' (expected 3q or 4q)"))),
        }
    }

    fn build(n: usize, omegas: &[f64], couplings: &[(usize, usize, f64)], eps: f64) -> Result<Self> {
        let h0t = Hamiltonian::new(zz_chain(n, omegas, couplings)?)?;
        let k = Hamiltonian::new(
            h0t.matrix()
                .scale_real(K_DIAGONAL_SCALE)
                .try_add(&transverse_field(n)?.scale_real(eps))?,
        )?;
        Ok(Self {
            n_qubits: n,
            h0t,
            k,
            transverse: eps,
        })
    }

    /// Same system with transverse coupling `eps`.
    pub fn with_transverse(&self, eps: f64) -> Result<Self> {
        let v = transverse_field(self.n_qubits)?;
        let old = v.scale_real(self.transverse);
        let k = self.k.matrix().try_sub(&old)?.try_add(&v.scale_real(eps))?;
        Ok(Self {
            n_qubits: self.n_qubits,
            h0t: self.h0t.clone(),
            k: Hamiltonian::new(k)?,
            transverse: eps,
        })
    }

    /// Same system with `ε` chosen so that the largest
    /// `|⟨φ_l|K|φ_n⟩/(φ_l − φ_n)|` equals `ratio`.
    pub fn with_off_diagonal_ratio(&self, ratio: f64) -> Result<Self> {
        let unit = self.with_transverse(1.0)?;
        let per_unit = unit.off_diagonal_ratio()?;
        self.with_transverse(ratio / per_unit)
    }

    pub fn commuting(&self) -> Result<Self> {
        self.with_transverse(0.0)
    }

    pub fn off_diagonal_ratio(&self) -> Result<f64> {
        EigenBasis::new(&self.h0t, DEFAULT_DEGENERACY_TOL)?.off_diagonal_ratio(&self.k)
    }

    /// `K` scaled by `s`, everything else unchanged.
    pub fn with_k_scaled(&self, s: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            h0t: self.h0t.clone(),
            k: self.k.scaled(s),
            transverse: self.transverse * s,
        }
    }
}

/// Right-skewed triangular profile used as recovery ground truth.
pub fn skewed_profile() -> RfProfile {
    make_synthetic_profile(
        ProfileKind::Skewed {
            center: 0.0,
            width: 0.07,
            skew: 0.4,
        },
        41,
    )
    .expect("static profile")
}

/// Symmetric gaussian profile of standard deviation `sigma`, 41 points.
pub fn gaussian_profile(sigma: f64) -> Result<RfProfile> {
    make_synthetic_profile(
        ProfileKind::Gaussian {
            center: 0.0,
            width: sigma,
        },
        41,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_commute_up_to_transverse_term() {
        for f in [SpinFixture::three_qubit(), SpinFixture::four_qubit()] {
            let c = f.commuting().unwrap();
            assert!(c.h0t.commutator_norm(&c.k).unwrap() < 1e-12);
            assert!(f.h0t.commutator_norm(&f.k).unwrap() > 0.0);
            let r = f.off_diagonal_ratio().unwrap();
            assert!(r > 0.0 && r < 2e-4, "{r}");
        }
    }

    #[test]
    fn ratio_targeting() {
        let f = SpinFixture::three_qubit().with_off_diagonal_ratio(0.1).unwrap();
        assert!((f.off_diagonal_ratio().unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_fixture_name() {
        assert!(SpinFixture::by_name("5q").is_err());
        assert_eq!(SpinFixture::by_name("4q").unwrap().n_qubits, 4);
    }
}
