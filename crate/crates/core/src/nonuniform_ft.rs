//! Fourier transforms between a deviation profile and its samples at
//! unequally spaced frequencies.
//!
//! The forward direction is `f(k) = Σ_b p_b e^{−i k Δω_b}`. The inverse maps
//! samples `(k_s, f_s)` back onto a uniform `Δω` grid, either by a
//! gap-weighted Riemann sum or by ridge-regularized least squares.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{ProfilePoint, RfProfile};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::spectral::SpectralSampleSet;

/// Minimum number of samples accepted by [`inverse_nudft`].
pub const MIN_SAMPLES: usize = 5;

/// Conjugate-symmetry defect above which a warning is recorded.
pub const SYMMETRY_WARN_TOL: f64 = 1e-6;

/// Ridge strength per sample for the least-squares method.
pub const DEFAULT_RIDGE_PER_SAMPLE: f64 = 1e-6;

/// Largest normal-matrix condition number accepted by least squares.
pub const NORMAL_CONDITION_LIMIT: f64 = 1e12;

/// Uniform grid of `n_bins` deviations from `delta_omega_min` to
/// `delta_omega_max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoveryGrid {
    pub delta_omega_min: f64,
    pub delta_omega_max: f64,
    pub n_bins: usize,
}

impl Default for RecoveryGrid {
    fn default() -> Self {
        Self {
            delta_omega_min: -0.15,
            delta_omega_max: 0.15,
            n_bins: 61,
        }
    }
}

impl RecoveryGrid {
    pub fn new(delta_omega_min: f64, delta_omega_max: f64, n_bins: usize) -> Result<Self> {
        let grid = Self {
            delta_omega_min,
            delta_omega_max,
            n_bins,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_omega_min.is_finite() && self.delta_omega_max.is_finite())
            || self.delta_omega_min >= self.delta_omega_max
        {
            return Err(Error::Validation(format!(
                "grid bounds must satisfy min < max, got [{}, {}]",
                self.delta_omega_min, self.delta_omega_max
            )));
        }
        if self.n_bins < 8 {
            return Err(Error::Validation(format!("grid needs at least 8 bins, got {}", self.n_bins)));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.delta_omega_max - self.delta_omega_min) / (self.n_bins - 1) as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let h = self.bin_width();
        (0..self.n_bins)
            .map(|b| {
                if b + 1 == self.n_bins {
                    self.delta_omega_max
                } else {
                    self.delta_omega_min + h * b as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseMethod {
    #[default]
    WeightedRiemann,
    LeastSquares,
}

impl InverseMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::WeightedRiemann => "weighted_riemann",
            Self::LeastSquares => "least_squares",
        }
    }
}

impl fmt::Display for InverseMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InverseMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted_riemann" => Ok(Self::WeightedRiemann),
            "least_squares" => Ok(Self::LeastSquares),
            other => Err(Error::Parse(format!(
                "unknown method '{other}' (expected weighted_riemann or least_squares)"
            ))),
        }
    }
}

/// Diagnostics attached to a recovered profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformQuality {
    pub method: InverseMethod,
    /// `‖Im p‖ / ‖Re p‖` before clipping.
    pub imag_residual: f64,
    /// Negative mass over positive mass of the raw real estimate.
    pub clipped_mass: f64,
    /// Condition number of the regularized normal matrix (least squares only).
    pub condition_number: Option<f64>,
    pub conjugate_symmetry_defect: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct InverseResult {
    pub profile: RfProfile,
    /// Real part of the estimate before clipping, one entry per bin.
    pub raw: Vec<f64>,
    pub quality: TransformQuality,
}

/// Half-gap weights on a sorted axis; each end sample gets only the half-gap
/// to its single neighbour.
pub fn voronoi_weights(ks: &[f64]) -> Vec<f64> {
    let n = ks.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { (ks[i] - ks[i - 1]) / 2.0 } else { 0.0 };
            let right = if i + 1 < n { (ks[i + 1] - ks[i]) / 2.0 } else { 0.0 };
            left + right
        })
        .collect()
}

fn norm2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Clips negatives, renormalizes and reports the clipped mass ratio.
fn clip_to_profile(centers: &[f64], raw: &[f64]) -> Result<(RfProfile, f64)> {
    let positive: f64 = raw.iter().filter(|&&x| x > 0.0).sum();
    let negative: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    if !(positive.is_finite() && positive > 0.0) {
        return Err(Error::Transform("recovered profile has no positive mass".into()));
    }
    let points = centers
        .iter()
        .zip(raw)
        .map(|(&delta_omega, &w)| ProfilePoint {
            delta_omega,
            weight: w.max(0.0),
        })
        .collect();
    Ok((RfProfile::normalized(points)?, negative / positive))
}

/// Inverse transform with the default ridge strength.
pub fn inverse_nudft(
    samples: &SpectralSampleSet,
    grid: &RecoveryGrid,
    method: InverseMethod,
) -> Result<InverseResult> {
    inverse_nudft_with_ridge(samples, grid, method, None)
}

/// Inverse transform; `ridge` overrides `μ = 1e−6 · n_samples` for least
/// squares and is ignored by the Riemann sum.
pub fn inverse_nudft_with_ridge(
    samples: &SpectralSampleSet,
    grid: &RecoveryGrid,
    method: InverseMethod,
    ridge: Option<f64>,
) -> Result<InverseResult> {
    grid.validate()?;
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::Transform(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    let ks: Vec<f64> = samples.samples().iter().map(|s| s.k).collect();
    let fs: Vec<C64> = samples.samples().iter().map(|s| s.f).collect();
    let centers = grid.centers();

    let mut warnings = Vec::new();
    let symmetry = samples.conjugate_symmetry_defect();
    if symmetry > SYMMETRY_WARN_TOL {
        warnings.push(format!(
            "samples are not conjugate symmetric (defect {symmetry:.3e} > {SYMMETRY_WARN_TOL:.0e})"
        ));
    }

    let (estimate, condition_number): (Vec<C64>, Option<f64>) = match method {
        InverseMethod::WeightedRiemann => {
            let w = voronoi_weights(&ks);
            let est = centers
                .iter()
                .map(|&x| {
                    ks.iter()
                        .zip(&fs)
                        .zip(&w)
                        .map(|((&k, &f), &ws)| f * C64::from_polar(ws, k * x))
                        .sum()
                })
                .collect();
            (est, None)
        }
        InverseMethod::LeastSquares => {
            let mu = ridge.unwrap_or(DEFAULT_RIDGE_PER_SAMPLE * n as f64);
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::Transform(format!("invalid ridge strength {mu}")));
            }
            let a = ComplexMatrix::from_fn(n, centers.len(), |s, b| C64::from_polar(1.0, -ks[s] * centers[b]));
            let ah = a.adjoint();
            let mut normal = ah.matmul(&a)?;
            for b in 0..centers.len() {
                normal[(b, b)] += mu;
            }
            let condition = normal.condition_number()?;
            if condition.is_nan() || condition > NORMAL_CONDITION_LIMIT {
                return Err(Error::Transform(format!(
                    "least-squares normal matrix condition {condition:.3e} exceeds {NORMAL_CONDITION_LIMIT:.0e}; \
                     increase the ridge strength or use a coarser grid"
                )));
            }
            let rhs = ComplexMatrix::from_columns(&[ah.mul_vec(&fs)?])?;
            let p = normal.solve(&rhs)?;
            (p.column(0), Some(condition))
        }
    };

    let raw: Vec<f64> = estimate.iter().map(|z| z.re).collect();
    let re_norm = norm2(raw.iter().copied());
    let imag_residual = if re_norm > 0.0 {
        norm2(estimate.iter().map(|z| z.im)) / re_norm
    } else {
        f64::INFINITY
    };
    let (profile, clipped_mass) = clip_to_profile(&centers, &raw)?;
    Ok(InverseResult {
        profile,
        raw,
        quality: TransformQuality {
            method,
            imag_residual,
            clipped_mass,
            condition_number,
            conjugate_symmetry_defect: symmetry,
            warnings,
        },
    })
}

/// `f(k) = Σ_b p_b e^{−i k Δω_b} / Σ_b p_b`, so `f(0) = 1` exactly.
pub fn forward_nudft(profile: &RfProfile, ks: &[f64]) -> Vec<C64> {
    let total: f64 = profile.points().iter().map(|p| p.weight).sum();
    ks.iter()
        .map(|&k| {
            let s: C64 = profile
                .points()
                .iter()
                .map(|p| C64::from_polar(p.weight, -k * p.delta_omega))
                .sum();
            s / total
        })
        .collect()
}
