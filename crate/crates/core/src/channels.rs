//! Hamiltonians, unitary ensembles and incoherent (random-unitary) channels.
//!
//! Inhomogeneous control is modelled by a discrete profile of normalized
//! deviations `Δω` with probabilities `p`. Each deviation produces the
//! unitary `exp(−i(H0·t + Δω·K))`; the channel is the probability-weighted
//! sum of the corresponding `conj(U) ⊗ U`.
//!
//! Convention: the perturbation `K` is dimensionless and already contains
//! the pulse duration, so `K_jm` is directly the Fourier conjugate of `Δω`.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{eig_hermitian, Superoperator};
use crate::matrix::{inner, vec_norm, ComplexMatrix, C64};
use crate::pauli::parse_pauli_sum;

/// Hermiticity tolerance for Hamiltonians (absolute, scaled by `max(1, |H|)`).
pub const HAMILTONIAN_TOL: f64 = 1e-12;

/// Tolerance on probability normalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Unitarity tolerance for ensemble members.
pub const ENSEMBLE_UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
}

impl Hamiltonian {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("Hamiltonian must be square".into()));
        }
        let defect = matrix.hermiticity_defect();
        if defect > HAMILTONIAN_TOL * matrix.max_abs().max(1.0) {
            return Err(Error::Validation(format!(
                "Hamiltonian is not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Parses a Pauli-string sum such as `"0.785398 * ZZ"`.
    pub fn from_pauli_sum(expr: &str) -> Result<Self> {
        Self::new(parse_pauli_sum(expr)?)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
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

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale_real(s),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.try_add(&other.matrix)?,
        })
    }

    /// `‖[self, other]‖_max`.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        let ab = self.matrix.matmul(&other.matrix)?;
        let ba = other.matrix.matmul(&self.matrix)?;
        Ok(ab.max_abs_diff(&ba))
    }
}

/// `exp(−i H t)` through the Hermitian eigendecomposition of `H`.
pub fn expm_unitary(h: &Hamiltonian, t: f64) -> Result<ComplexMatrix> {
    let n = h.dim();
    let pairs = eig_hermitian(h.matrix())?;
    let mut u = ComplexMatrix::zeros(n, n);
    for p in &pairs {
        let phase = C64::from_polar(1.0, -p.value * t);
        for i in 0..n {
            let a = p.vector[i] * phase;
            for j in 0..n {
                u[(i, j)] += a * p.vector[j].conj();
            }
        }
    }
    Ok(u)
}

/// Probability-weighted unitaries.
#[derive(Clone, Debug)]
pub struct UnitaryEnsemble {
    members: Vec<(f64, ComplexMatrix)>,
}

impl UnitaryEnsemble {
    pub fn new(members: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let dim = members
            .first()
            .ok_or_else(|| Error::Validation("unitary ensemble must not be empty".into()))?
            .1
            .rows();
        let mut total = 0.0;
        for (idx, (w, u)) in members.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::Validation(format!("member {idx} has invalid weight {w}")));
            }
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::Dimension(format!("member {idx} is not {dim}x{dim}")));
            }
            let defect = u.unitarity_defect();
            if defect > ENSEMBLE_UNITARY_TOL {
                return Err(Error::Validation(format!(
                    "member {idx} is not unitary (defect {defect:.3e})"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Validation(format!("ensemble weights sum to {total}, not 1")));
        }
        Ok(Self { members })
    }

    #[inline]
    pub fn members(&self) -> &[(f64, ComplexMatrix)] {
        &self.members
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.members[0].1.rows()
    }
}

/// `S = Σ_k p_k conj(U_k) ⊗ U_k`, accumulated in list order.
pub fn rud_superoperator(ensemble: &UnitaryEnsemble) -> Superoperator {
    let n = ensemble.dim();
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    for (w, u) in &ensemble.members {
        m.add_scaled_assign(C64::new(*w, 0.0), &u.conj().kron(u))
            .expect("uniform member dims");
    }
    Superoperator::new(m).expect("square of Hilbert dim")
}

/// One bin of a control-deviation distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub delta_omega: f64,
    pub weight: f64,
}

/// Discrete probability distribution over normalized deviations `Δω`.
#[derive(Clone, Debug)]
pub struct RfProfile {
    points: Vec<ProfilePoint>,
}

impl RfProfile {
    /// Validates non-negative weights summing to one and strictly increasing
    /// deviations.
    pub fn new(points: Vec<ProfilePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Profile("profile has no points".into()));
        }
        let mut total = 0.0;
        for (idx, p) in points.iter().enumerate() {
            if !p.delta_omega.is_finite() || !p.weight.is_finite() {
                return Err(Error::Profile(format!("point {idx} is not finite")));
            }
            if p.weight < 0.0 {
                return Err(Error::Profile(format!("point {idx} has negative weight {}", p.weight)));
            }
            total += p.weight;
        }
        if points.windows(2).any(|w| w[1].delta_omega <= w[0].delta_omega) {
            return Err(Error::Profile("delta_omega values must be strictly increasing".into()));
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Profile(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { points })
    }

    /// Rescales non-negative weights to unit mass before validating.
    pub fn normalized(points: Vec<ProfilePoint>) -> Result<Self> {
        let total: f64 = points.iter().map(|p| p.weight).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Profile(format!("cannot normalize profile of mass {total}")));
        }
        Self::new(
            points
                .into_iter()
                .map(|p| ProfilePoint {
                    delta_omega: p.delta_omega,
                    weight: p.weight / total,
                })
                .collect(),
        )
    }

    /// A single point of unit mass.
    pub fn delta(delta_omega: f64) -> Self {
        Self {
            points: vec![ProfilePoint {
                delta_omega,
                weight: 1.0,
            }],
        }
    }

    #[inline]
    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same weights, deviations shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| ProfilePoint {
                    delta_omega: p.delta_omega + offset,
                    weight: p.weight,
                })
                .collect(),
        }
    }

    /// CSV with header `delta_omega,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["delta_omega", "weight"] {
            return Err(Error::Parse(format!(
                "expected header 'delta_omega,weight', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let points = rdr
            .deserialize::<ProfilePoint>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(points)
    }
}

/// Shape of a synthetic control-deviation profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileKind {
    /// Flat on `[center − width, center + width]`.
    Uniform { center: f64, width: f64 },
    /// Gaussian of standard deviation `width`, truncated at `±3·width`.
    Gaussian { center: f64, width: f64 },
    /// Triangular with its mode at `center`, extending `width·(1 − skew)` to
    /// the left and `width·(1 + skew)` to the right; `skew ∈ (−1, 1)`.
    Skewed { center: f64, width: f64, skew: f64 },
}

/// Samples a synthetic profile on `n_points` deviations.
pub fn make_synthetic_profile(kind: ProfileKind, n_points: usize) -> Result<RfProfile> {
    if n_points < 3 {
        return Err(Error::Profile(format!("need at least 3 points, got {n_points}")));
    }
    let (center, width) = match kind {
        ProfileKind::Uniform { center, width }
        | ProfileKind::Gaussian { center, width }
        | ProfileKind::Skewed { center, width, .. } => (center, width),
    };
    if !(width.is_finite() && width > 0.0) || !center.is_finite() {
        return Err(Error::Profile(format!("invalid center/width ({center}, {width})")));
    }
    let linspace = |lo: f64, hi: f64| -> Vec<f64> {
        let step = (hi - lo) / (n_points - 1) as f64;
        (0..n_points).map(|i| lo + step * i as f64).collect()
    };
    let points: Vec<ProfilePoint> = match kind {
        ProfileKind::Uniform { .. } => linspace(center - width, center + width)
            .into_iter()
            .map(|x| ProfilePoint {
                delta_omega: x,
                weight: 1.0,
            })
            .collect(),
        ProfileKind::Gaussian { .. } => {
            let step = 6.0 * width / (n_points - 1) as f64;
            let half = (n_points - 1) as f64 / 2.0;
            (0..n_points)
                .map(|i| {
                    // symmetric offsets so the sampled profile is exactly symmetric
                    let u = (i as f64 - half) * step;
                    ProfilePoint {
                        delta_omega: center + u,
                        weight: (-0.5 * (u / width).powi(2)).exp(),
                    }
                })
                .collect()
        }
        ProfileKind::Skewed { skew, .. } => {
            if !(skew.is_finite() && skew.abs() < 1.0) {
                return Err(Error::Profile(format!("skew must lie in (-1, 1), got {skew}")));
            }
            let left = width * (1.0 - skew);
            let right = width * (1.0 + skew);
            let (lo, hi) = (center - left, center + right);
            let cell = (hi - lo) / n_points as f64;
            (0..n_points)
                .map(|i| {
                    let x = lo + (i as f64 + 0.5) * cell;
                    let density = if x <= center {
                        (x - lo) / left
                    } else {
                        (hi - x) / right
                    };
                    ProfilePoint {
                        delta_omega: x,
                        weight: density.max(0.0),
                    }
                })
                .collect()
        }
    };
    RfProfile::normalized(points)
}

/// The incoherent channel `Σ p(Δω) conj(U(Δω)) ⊗ U(Δω)` with
/// `U(Δω) = exp(−i(H0·t + Δω·K))`.
///
/// `k` is dimensionless: it already includes the pulse duration.
pub fn rf_incoherent_channel(
    h0: &Hamiltonian,
    k: &Hamiltonian,
    profile: &RfProfile,
    t: f64,
) -> Result<Superoperator> {
    if h0.dim() != k.dim() {
        return Err(Error::Dimension(format!(
            "H0 is {0}x{0} but K is {1}x{1}",
            h0.dim(),
            k.dim()
        )));
    }
    let h0t = h0.scaled(t);
    let members = profile
        .points()
        .iter()
        .map(|p| {
            let generator = h0t.plus(&k.scaled(p.delta_omega))?;
            Ok((p.weight, expm_unitary(&generator, 1.0)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rud_superoperator(&UnitaryEnsemble::new(members)?))
}

/// Haar-random unitary via Gram–Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        for q in &cols {
            let proj = inner(q, &v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = vec_norm(&v);
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    ComplexMatrix::from_columns(&cols).unwrap_or_else(|_| ComplexMatrix::identity(dim))
}

/// Random ensemble of `members` Haar unitaries with random weights.
pub fn random_ensemble<R: Rng + ?Sized>(dim: usize, members: usize, rng: &mut R) -> UnitaryEnsemble {
    let raw: Vec<f64> = (0..members.max(1)).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // put the rounding residue on the last weight so the sum is 1 to the ulp
    let head: f64 = weights[..weights.len() - 1].iter().sum();
    *weights.last_mut().expect("non-empty") = 1.0 - head;
    let members = weights
        .into_iter()
        .map(|w| (w, random_unitary(dim, rng)))
        .collect();
    UnitaryEnsemble::new(members).expect("valid by construction")
}

/// The diagonal unitary `exp(−i·angle·σ_z)` on one qubit.
pub fn z_rotation(angle: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[C64::from_polar(1.0, -angle), C64::from_polar(1.0, angle)])
}
