//! Reading a deviation profile off a superoperator's eigenvalues.
//!
//! For `U(Δω) = exp(−i(H0·t + Δω·K))` with `[H0, K] ≈ 0`, the eigenvalue of
//! the incoherent channel associated with the pair `(j, m)` of eigenstates
//! of `H0·t` is, to first order,
//!
//! ```text
//! λ_jm = e^{−i(φ_j − φ_m)} · Σ_k p_k e^{−i K_jm Δω_k},
//! K_jm = ⟨φ_j|K|φ_j⟩ − ⟨φ_m|K|φ_m⟩,
//! ```
//!
//! so `f(K_jm) = λ_jm e^{i(φ_j − φ_m)}` samples the characteristic function of
//! the profile at unequally spaced points. Its eigenvector is
//! `conj(φ_m) ⊗ φ_j` in the column-stacking convention.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::channels::{Hamiltonian, ProfilePoint, RfProfile};
use crate::error::{Error, Result};
use crate::liouville::{eig_hermitian, eigenvalues_general, Superoperator};
use crate::matrix::{inner, kron_vec, C64, ONE};
use crate::nonuniform_ft::{inverse_nudft_with_ridge, InverseMethod, InverseResult, RecoveryGrid};

/// Minimum eigenphase gap of `H0·t` for the first-order formulas.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-6;

/// Match distance above which a pairing is reported as suspect.
pub const DEFAULT_MATCH_TOL: f64 = 0.2;

/// Relative tolerance for treating two `K_jm` as the same frequency.
pub const K_MERGE_TOL: f64 = 1e-9;

/// Spread of merged duplicate samples above which a warning is recorded.
pub const DUPLICATE_DISAGREEMENT_TOL: f64 = 0.05;

/// Eigenphases and eigenvectors of the unperturbed generator `H0·t`.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    phis: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

impl EigenBasis {
    /// Diagonalizes `h0t`, rejecting spectra with a gap `≤ degeneracy_tol`.
    pub fn new(h0t: &Hamiltonian, degeneracy_tol: f64) -> Result<Self> {
        let pairs = eig_hermitian(h0t.matrix())?;
        let gap = pairs
            .windows(2)
            .map(|w| (w[0].value - w[1].value).abs())
            .fold(f64::INFINITY, f64::min);
        if gap <= degeneracy_tol {
            return Err(Error::DegenerateSpectrum {
                gap,
                tol: degeneracy_tol,
            });
        }
        let (phis, vectors) = pairs.into_iter().map(|p| (p.value, p.vector)).unzip();
        Ok(Self { phis, vectors })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.phis.len()
    }

    #[inline]
    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    #[inline]
    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// `⟨φ_j|K|φ_j⟩` for every `j`.
    pub fn diagonal_elements(&self, k: &Hamiltonian) -> Result<Vec<f64>> {
        if k.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "K is {0}x{0} but H0 is {1}x{1}",
                k.dim(),
                self.dim()
            )));
        }
        self.vectors
            .iter()
            .map(|v| Ok(inner(v, &k.matrix().mul_vec(v)?).re))
            .collect()
    }

    /// Largest `|⟨φ_l|K|φ_n⟩ / (φ_l − φ_n)|` over `l ≠ n`.
    pub fn off_diagonal_ratio(&self, k: &Hamiltonian) -> Result<f64> {
        let kv = self
            .vectors
            .iter()
            .map(|v| k.matrix().mul_vec(v))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for (l, vl) in self.vectors.iter().enumerate() {
            for (n, kn) in kv.iter().enumerate() {
                if l != n {
                    let r = inner(vl, kn).norm() / (self.phis[l] - self.phis[n]).abs();
                    worst = worst.max(r);
                }
            }
        }
        Ok(worst)
    }

    /// Liouville vector `conj(φ_m) ⊗ φ_j`, the unperturbed eigenvector with
    /// eigenvalue `e^{−i(φ_j − φ_m)}`.
    pub fn pair_vector(&self, j: usize, m: usize) -> Vec<C64> {
        let bra: Vec<C64> = self.vectors[m].iter().map(|z| z.conj()).collect();
        kron_vec(&bra, &self.vectors[j])
    }

    pub fn unperturbed_eigenvalue(&self, j: usize, m: usize) -> C64 {
        C64::from_polar(1.0, -(self.phis[j] - self.phis[m]))
    }
}

/// A first-order eigenvalue prediction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub j: usize,
    pub m: usize,
    pub k_jm: f64,
    pub lambda: C64,
}

/// First-order eigenvalues of the incoherent channel, `N²` of them, ordered
/// by `j·N + m`.
pub fn predict_eigenvalues(h0t: &Hamiltonian, k: &Hamiltonian, profile: &RfProfile) -> Result<Vec<Prediction>> {
    predict_with_basis(&EigenBasis::new(h0t, DEFAULT_DEGENERACY_TOL)?, k, profile)
}

pub fn predict_with_basis(basis: &EigenBasis, k: &Hamiltonian, profile: &RfProfile) -> Result<Vec<Prediction>> {
    let kd = basis.diagonal_elements(k)?;
    let n = basis.dim();
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for m in 0..n {
            let k_jm = kd[j] - kd[m];
            let attenuation: C64 = profile
                .points()
                .iter()
                .map(|p| C64::from_polar(p.weight, -k_jm * p.delta_omega))
                .sum();
            out.push(Prediction {
                j,
                m,
                k_jm,
                lambda: basis.unperturbed_eigenvalue(j, m) * attenuation,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairingOptions {
    pub degeneracy_tol: f64,
    pub match_tol: f64,
}

impl Default for PairingOptions {
    fn default() -> Self {
        Self {
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            match_tol: DEFAULT_MATCH_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairingEntry {
    pub j: usize,
    pub m: usize,
    #[serde(serialize_with = "ser_complex")]
    pub lambda_measured: C64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda_unperturbed: C64,
    /// Rayleigh quotient of `S` on the unperturbed eigenvector.
    #[serde(serialize_with = "ser_complex")]
    pub seed: C64,
    pub k_jm: f64,
    /// `|seed − λ_measured|`.
    pub distance: f64,
    /// `j = m`; carries only normalization.
    pub degenerate: bool,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenPairing {
    pub dim: usize,
    pub phis: Vec<f64>,
    pub entries: Vec<PairingEntry>,
    pub warnings: Vec<String>,
}

impl EigenPairing {
    pub fn max_distance(&self) -> f64 {
        self.entries.iter().map(|e| e.distance).fold(0.0, f64::max)
    }
}

/// Matches every unperturbed pair `(j, m)` to a distinct eigenvalue of `s`.
///
/// Seeds are the Rayleigh quotients `⟨v_jm|S|v_jm⟩` with
/// `v_jm = conj(φ_m) ⊗ φ_j`. All seed/eigenvalue distances are ranked
/// globally and accepted greedily; ties go to the smaller `j·N + m`.
pub fn pair_eigenvalues(
    s: &Superoperator,
    h0t: &Hamiltonian,
    k: &Hamiltonian,
    options: &PairingOptions,
) -> Result<EigenPairing> {
    let basis = EigenBasis::new(h0t, options.degeneracy_tol)?;
    let n = basis.dim();
    if s.dim() != n {
        return Err(Error::Dimension(format!(
            "superoperator acts on dimension {} but H0 has dimension {n}",
            s.dim()
        )));
    }
    let kd = basis.diagonal_elements(k)?;
    let eigenvalues = eigenvalues_general(s.matrix())?;

    let seeds: Vec<C64> = (0..n * n)
        .map(|idx| {
            let v = basis.pair_vector(idx / n, idx % n);
            Ok(inner(&v, &s.matrix().mul_vec(&v)?))
        })
        .collect::<Result<_>>()?;

    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(seeds.len() * eigenvalues.len());
    for (si, seed) in seeds.iter().enumerate() {
        for (ei, ev) in eigenvalues.iter().enumerate() {
            candidates.push(((seed - ev).norm(), si, ei));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut seed_match: Vec<Option<(usize, f64)>> = vec![None; seeds.len()];
    let mut used = vec![false; eigenvalues.len()];
    let mut remaining = seeds.len();
    for (d, si, ei) in candidates {
        if remaining == 0 {
            break;
        }
        if seed_match[si].is_some() || used[ei] {
            continue;
        }
        seed_match[si] = Some((ei, d));
        used[ei] = true;
        remaining -= 1;
    }

    let mut warnings = Vec::new();
    let mut entries = Vec::with_capacity(seeds.len());
    for (idx, found) in seed_match.into_iter().enumerate() {
        let (ei, distance) = found.expect("square matrix has N² eigenvalues");
        let (j, m) = (idx / n, idx % n);
        if distance > options.match_tol {
            warnings.push(format!(
                "pair ({j}, {m}) matched at distance {distance:.3e} > {:.2}",
                options.match_tol
            ));
        }
        entries.push(PairingEntry {
            j,
            m,
            lambda_measured: eigenvalues[ei],
            lambda_unperturbed: basis.unperturbed_eigenvalue(j, m),
            seed: seeds[idx],
            k_jm: kd[j] - kd[m],
            distance,
            degenerate: j == m,
        });
    }
    if entries.iter().all(|e| e.distance > options.match_tol) {
        return Err(Error::Pairing(format!(
            "every match exceeds the tolerance {:.2}; the perturbation is too large for first-order pairing",
            options.match_tol
        )));
    }
    Ok(EigenPairing {
        dim: n,
        phis: basis.phis,
        entries,
        warnings,
    })
}

/// One Fourier sample `f(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub k: f64,
    pub f: C64,
}

#[derive(Serialize, Deserialize)]
struct SampleRow {
    k: f64,
    f_real: f64,
    f_imag: f64,
}

/// Samples sorted by strictly increasing `k`.
#[derive(Clone, Debug)]
pub struct SpectralSampleSet {
    samples: Vec<Sample>,
    warnings: Vec<String>,
}

impl SpectralSampleSet {
    /// Sorts by `k`; rejects non-finite values and repeated `k`.
    pub fn new(mut samples: Vec<Sample>) -> Result<Self> {
        if samples
            .iter()
            .any(|s| !(s.k.is_finite() && s.f.re.is_finite() && s.f.im.is_finite()))
        {
            return Err(Error::Validation("samples must be finite".into()));
        }
        samples.sort_by(|a, b| a.k.total_cmp(&b.k));
        if samples.windows(2).any(|w| w[0].k == w[1].k) {
            return Err(Error::Validation("sample frequencies must be distinct".into()));
        }
        Ok(Self {
            samples,
            warnings: Vec::new(),
        })
    }

    #[inline]
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Diagnostics gathered while building the set.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Number of samples exactly at `k = 0`.
    pub fn dc_count(&self) -> usize {
        self.samples.iter().filter(|s| s.k == 0.0).count()
    }

    /// Largest mismatch between each sample `(k, f)` and its mirror partner,
    /// measured as `max(|k + k'|, |f − conj(f')|)` with `k'` the sample
    /// nearest to `−k`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in &self.samples {
            let partner = self
                .samples
                .iter()
                .min_by(|a, b| (a.k + s.k).abs().total_cmp(&(b.k + s.k).abs()))
                .expect("non-empty");
            worst = worst
                .max((partner.k + s.k).abs())
                .max((s.f - partner.f.conj()).norm());
        }
        worst
    }

    /// CSV with header `k,f_real,f_imag`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.samples {
            w.serialize(SampleRow {
                k: s.k,
                f_real: s.f.re,
                f_imag: s.f.im,
            })?;
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
        if headers.iter().collect::<Vec<_>>() != ["k", "f_real", "f_imag"] {
            return Err(Error::Parse("expected header 'k,f_real,f_imag'".into()));
        }
        let samples = rdr
            .deserialize::<SampleRow>()
            .map(|r| {
                r.map(|r| Sample {
                    k: r.k,
                    f: C64::new(r.f_real, r.f_imag),
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(samples)
    }
}

fn same_k(a: f64, b: f64) -> bool {
    (a - b).abs() <= K_MERGE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Turns a pairing into Fourier samples.
///
/// Degenerate `j = m` entries are dropped, `f = λ_measured · e^{i(φ_j − φ_m)}`
/// is formed, entries sharing a `K_jm` are averaged, and the single point
/// `(0, 1)` is inserted. Entries with `K_jm ≈ 0` but `j ≠ m` are absorbed by
/// that point.
pub fn build_samples(pairing: &EigenPairing) -> Result<SpectralSampleSet> {
    let mut raw: Vec<(f64, usize, usize, C64)> = pairing
        .entries
        .iter()
        .filter(|e| !e.degenerate)
        .map(|e| (e.k_jm, e.j, e.m, e.lambda_measured * e.lambda_unperturbed.conj()))
        .collect();
    if raw.is_empty() {
        return Err(Error::Validation("pairing has no non-degenerate entries".into()));
    }
    if raw.iter().all(|r| same_k(r.0, 0.0)) {
        return Err(Error::Validation(
            "every K_jm vanishes (K has no diagonal spread in the H0 eigenbasis); \
             the spectrum carries no information about the profile"
                .into(),
        ));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut warnings = Vec::new();
    let mut samples = vec![Sample { k: 0.0, f: ONE }];
    let mut start = 0;
    while start < raw.len() {
        let mut end = start + 1;
        while end < raw.len() && same_k(raw[end].0, raw[start].0) {
            end += 1;
        }
        let group = &raw[start..end];
        let count = group.len() as f64;
        let k = group.iter().map(|r| r.0).sum::<f64>() / count;
        let f = group.iter().map(|r| r.3).sum::<C64>() / count;
        let spread = group.iter().map(|r| (r.3 - f).norm()).fold(0.0, f64::max);
        if spread > DUPLICATE_DISAGREEMENT_TOL {
            warnings.push(format!(
                "{} pairs share K = {k:.6} but disagree by {spread:.3e}",
                group.len()
            ));
        }
        if same_k(k, 0.0) {
            if (f - ONE).norm() > DUPLICATE_DISAGREEMENT_TOL {
                warnings.push(format!("pairs at K = 0 give f = {f:.4}, replaced by the DC point"));
            }
        } else {
            samples.push(Sample { k, f });
        }
        start = end;
    }
    let mut set = SpectralSampleSet::new(samples)?;
    set.warnings = warnings;
    Ok(set)
}

/// Moments of a discrete distribution after clipping negative weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileMetrics {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    /// Negative mass over positive mass before clipping.
    pub clipped_mass: f64,
}

/// Mean, standard deviation and skewness. Negative weights are clipped to
/// zero and the rest renormalized first.
pub fn profile_metrics(points: &[ProfilePoint]) -> Result<ProfileMetrics> {
    let positive: f64 = points.iter().map(|p| p.weight.max(0.0)).sum();
    let negative: f64 = points.iter().map(|p| (-p.weight).max(0.0)).sum();
    if !(positive.is_finite() && positive > 0.0) {
        return Err(Error::Profile("profile has no positive mass after clipping".into()));
    }
    let w = |p: &ProfilePoint| p.weight.max(0.0) / positive;
    let mean: f64 = points.iter().map(|p| w(p) * p.delta_omega).sum();
    let central = |order: i32| -> f64 { points.iter().map(|p| w(p) * (p.delta_omega - mean).powi(order)).sum() };
    let var = central(2);
    let std = var.sqrt();
    let skewness = if std > 0.0 { central(3) / (var * std) } else { 0.0 };
    Ok(ProfileMetrics {
        mean,
        std,
        skewness,
        clipped_mass: negative / positive,
    })
}

/// Estimated offset `β` of the true unperturbed generator `H0 + β·K`.
pub fn detect_offset(recovered: &RfProfile) -> Result<f64> {
    Ok(profile_metrics(recovered.points())?.mean)
}

/// Coverage of the `k` axis by a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowReport {
    pub n_samples: usize,
    pub k_max: f64,
    pub k_min_positive: f64,
    pub max_gap: f64,
    /// `π / k_max`: finest resolvable `Δω` structure.
    pub resolution: f64,
    /// `2π / max_gap`: widest `Δω` support sampled without aliasing.
    pub alias_free_extent: f64,
}

pub fn window_report(set: &SpectralSampleSet) -> WindowReport {
    let ks: Vec<f64> = set.samples().iter().map(|s| s.k).collect();
    let k_max = ks.iter().map(|k| k.abs()).fold(0.0, f64::max);
    let k_min_positive = ks.iter().copied().filter(|&k| k > 0.0).fold(f64::INFINITY, f64::min);
    let max_gap = ks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    WindowReport {
        n_samples: ks.len(),
        k_max,
        k_min_positive,
        max_gap,
        resolution: if k_max > 0.0 { std::f64::consts::PI / k_max } else { f64::INFINITY },
        alias_free_extent: if max_gap > 0.0 {
            2.0 * std::f64::consts::PI / max_gap
        } else {
            f64::INFINITY
        },
    }
}

/// Everything produced by one spectral recovery.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub pairing: EigenPairing,
    pub samples: SpectralSampleSet,
    pub inverse: InverseResult,
    pub metrics: ProfileMetrics,
    pub offset: f64,
    pub window: WindowReport,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RecoveryOptions {
    pub pairing: PairingOptions,
    pub grid: RecoveryGrid,
    pub method: InverseMethod,
    pub ridge: Option<f64>,
}

/// Pair, sample, invert and summarize.
pub fn recover_profile(
    s: &Superoperator,
    h0t: &Hamiltonian,
    k: &Hamiltonian,
    options: &RecoveryOptions,
) -> Result<Recovery> {
    let pairing = pair_eigenvalues(s, h0t, k, &options.pairing)?;
    let samples = build_samples(&pairing)?;
    let inverse = inverse_nudft_with_ridge(&samples, &options.grid, options.method, options.ridge)?;
    let mut metrics = profile_metrics(inverse.profile.points())?;
    metrics.clipped_mass = inverse.quality.clipped_mass;
    let window = window_report(&samples);
    Ok(Recovery {
        offset: metrics.mean,
        pairing,
        samples,
        inverse,
        metrics,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{expm_unitary, make_synthetic_profile, rf_incoherent_channel, ProfileKind};
    use crate::liouville::unitary_superoperator;
    use crate::pauli::sigma_x;
    use std::f64::consts::FRAC_PI_2;

    fn two_qubit() -> (Hamiltonian, Hamiltonian) {
        let h0t = Hamiltonian::from_pauli_sum("11.3*ZI + 17.9*IZ + 0.7*ZZ").unwrap();
        let k = h0t.scaled(0.3);
        (h0t, k)
    }

    #[test]
    fn degenerate_spectrum_rejected() {
        let h = Hamiltonian::from_pauli_sum("ZI + IZ").unwrap();
        assert!(matches!(
            EigenBasis::new(&h, DEFAULT_DEGENERACY_TOL),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn predictions_without_perturbation_are_phases() {
        let (h0t, _) = two_qubit();
        let k = Hamiltonian::zero(4);
        let profile = make_synthetic_profile(ProfileKind::Uniform { center: 0.0, width: 0.1 }, 11).unwrap();
        let preds = predict_eigenvalues(&h0t, &k, &profile).unwrap();
        assert_eq!(preds.len(), 16);
        assert!(preds.iter().all(|p| (p.lambda.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn single_qubit_attenuation() {
        let h0t = Hamiltonian::new(sigma_x().scale_real(FRAC_PI_2 / 2.0)).unwrap();
        let profile = make_synthetic_profile(ProfileKind::Uniform { center: 0.0, width: 0.1 }, 41).unwrap();
        let preds = predict_eigenvalues(&h0t, &h0t, &profile).unwrap();
        let oracle: f64 = profile
            .points()
            .iter()
            .map(|p| p.weight * (FRAC_PI_2 * p.delta_omega).cos())
            .sum();
        let off: Vec<_> = preds.iter().filter(|p| p.j != p.m).collect();
        assert_eq!(off.len(), 2);
        for p in off {
            assert!((p.k_jm.abs() - FRAC_PI_2).abs() < 1e-14);
            assert!((p.lambda.norm() - oracle).abs() < 1e-14);
        }
    }

    #[test]
    fn unitary_channel_pairs_exactly() {
        let (h0t, k) = two_qubit();
        let s = unitary_superoperator(&expm_unitary(&h0t, 1.0).unwrap()).unwrap();
        let pairing = pair_eigenvalues(&s, &h0t, &k, &PairingOptions::default()).unwrap();
        assert_eq!(pairing.entries.len(), 16);
        assert_eq!(pairing.entries.iter().filter(|e| e.degenerate).count(), 4);
        for e in &pairing.entries {
            assert!(e.distance < 1e-10);
            assert!((e.lambda_measured - e.lambda_unperturbed).norm() < 1e-10);
        }
        let set = build_samples(&pairing).unwrap();
        assert_eq!(set.len(), 16 - 4 + 1);
        assert_eq!(set.dc_count(), 1);
        assert!(set.samples().iter().all(|s| (s.f - ONE).norm() < 1e-10));
    }

    #[test]
    fn commuting_channel_matches_prediction() {
        let (h0t, k) = two_qubit();
        let profile = make_synthetic_profile(ProfileKind::Skewed { center: 0.0, width: 0.06, skew: 0.3 }, 31).unwrap();
        let s = rf_incoherent_channel(&h0t, &k, &profile, 1.0).unwrap();
        let pairing = pair_eigenvalues(&s, &h0t, &k, &PairingOptions::default()).unwrap();
        let preds = predict_eigenvalues(&h0t, &k, &profile).unwrap();
        for (e, p) in pairing.entries.iter().zip(&preds) {
            assert_eq!((e.j, e.m), (p.j, p.m));
            assert!((e.lambda_measured - p.lambda).norm() < 1e-10);
        }
        let set = build_samples(&pairing).unwrap();
        assert!(set.conjugate_symmetry_defect() < 1e-9);
        assert!(set.warnings().is_empty());
    }

    #[test]
    fn anticommuting_perturbation_is_an_error() {
        let h0t = Hamiltonian::from_pauli_sum("1.1*Z").unwrap();
        let k = Hamiltonian::from_pauli_sum("0.01*X").unwrap();
        let s = rf_incoherent_channel(&h0t, &k, &RfProfile::delta(0.0), 1.0).unwrap();
        let pairing = pair_eigenvalues(&s, &h0t, &k, &PairingOptions::default()).unwrap();
        assert!(matches!(build_samples(&pairing), Err(Error::Validation(_))));
    }

    #[test]
    fn duplicates_are_averaged() {
        // ZI + IZ with no coupling gives repeated single-flip frequencies
        let h0t = Hamiltonian::from_pauli_sum("5.1*ZI + 7.3*IZ + 0.2*ZZ").unwrap();
        let k = Hamiltonian::from_pauli_sum("1.5*ZI + 2.2*IZ").unwrap();
        let s = rf_incoherent_channel(&h0t, &k, &RfProfile::delta(0.0), 1.0).unwrap();
        let pairing = pair_eigenvalues(&s, &h0t, &k, &PairingOptions::default()).unwrap();
        let set = build_samples(&pairing).unwrap();
        // K_jm ∈ {±3, ±4.4, ±7.4, ±1.4}, each twice except the double flips
        assert_eq!(set.len(), 9);
    }

    #[test]
    fn sample_csv_round_trip() {
        let set = SpectralSampleSet::new(vec![
            Sample { k: 1.5, f: C64::new(0.25, -0.125) },
            Sample { k: 0.0, f: ONE },
            Sample { k: -1.5, f: C64::new(0.25, 0.125) },
        ])
        .unwrap();
        assert_eq!(set.conjugate_symmetry_defect(), 0.0);
        let text = set.to_csv_string().unwrap();
        assert!(text.starts_with("k,f_real,f_imag\n-1.5,"));
        let back = SpectralSampleSet::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.samples(), set.samples());
        assert!(SpectralSampleSet::new(vec![Sample { k: 1.0, f: ONE }, Sample { k: 1.0, f: ONE }]).is_err());
    }

    #[test]
    fn metrics_examples() {
        let g = make_synthetic_profile(ProfileKind::Gaussian { center: 0.0, width: 0.05 }, 61).unwrap();
        assert!(profile_metrics(g.points()).unwrap().skewness.abs() < 1e-10);

        let d = RfProfile::delta(0.05);
        let m = profile_metrics(d.points()).unwrap();
        assert_eq!(m.mean, 0.05);
        assert_eq!(m.std, 0.0);
        assert_eq!(detect_offset(&d).unwrap(), 0.05);

        let skewed = make_synthetic_profile(ProfileKind::Skewed { center: 0.0, width: 0.07, skew: 0.4 }, 41).unwrap();
        assert!(profile_metrics(skewed.points()).unwrap().skewness > 0.0);
        let left = make_synthetic_profile(ProfileKind::Skewed { center: 0.0, width: 0.07, skew: -0.4 }, 41).unwrap();
        assert!(profile_metrics(left.points()).unwrap().skewness < 0.0);

        let raw = [
            ProfilePoint { delta_omega: -0.1, weight: -0.1 },
            ProfilePoint { delta_omega: 0.0, weight: 0.6 },
            ProfilePoint { delta_omega: 0.1, weight: 0.4 },
        ];
        let m = profile_metrics(&raw).unwrap();
        assert!((m.clipped_mass - 0.1).abs() < 1e-15);
        assert!((m.mean - 0.04).abs() < 1e-15);
        let empty = [ProfilePoint { delta_omega: 0.0, weight: -1.0 }];
        assert!(profile_metrics(&empty).is_err());
    }

    #[test]
    fn window_of_symmetric_set() {
        let set = SpectralSampleSet::new(
            [-4.0, -1.0, 0.0, 1.0, 4.0].iter().map(|&k| Sample { k, f: ONE }).collect(),
        )
        .unwrap();
        let w = window_report(&set);
        assert_eq!(w.k_max, 4.0);
        assert_eq!(w.k_min_positive, 1.0);
        assert_eq!(w.max_gap, 3.0);
    }
}
