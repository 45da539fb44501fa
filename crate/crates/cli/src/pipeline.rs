//! Config → plan (validation, exit 1) → artifacts (numerics, exit 2).

use std::fmt::Write as _;
use std::path::Path;

use incoherence::channels::{
    expm_unitary, random_ensemble, rf_incoherent_channel, rud_superoperator, Hamiltonian, RfProfile, UnitaryEnsemble,
};
use incoherence::liouville::{
    choi_to_kraus, choi_to_superop, eigenvalues_general, superop_to_choi, ChoiMatrix, Superoperator,
};
use incoherence::nonuniform_ft::{InverseMethod, TransformQuality};
use incoherence::spectral::{profile_metrics, recover_profile, ProfileMetrics, RecoveryOptions, WindowReport};
use incoherence::tomography::{prepare_correlated_inputs, run_qpt_scenario, QptScenario, CONDITION_LIMIT};
use incoherence::{ComplexMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::artifacts::Artifact;
use crate::config::{config_err, finite, parse_hamiltonian, QptScenarioSpec, RudSource, ScenarioConfig};
use crate::CliError;

/// Distance from 1 within which an eigenvalue counts as unit.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-9;
/// Imaginary part above which an eigenvalue counts as one half of a conjugate pair.
pub const CONJUGATE_TOL: f64 = 1e-9;
/// Bound on unitality, trace-preservation and `|λ| − 1` for built channels.
pub const CHANNEL_PROPERTY_TOL: f64 = 1e-10;
/// Recovered mean must lie within this many grid bins of the truth.
pub const MEAN_TOL_BINS: f64 = 1.0;
/// Offset must be detected within this many grid bins.
pub const OFFSET_TOL_BINS: f64 = 1.5;
pub const STD_REL_TOL: f64 = 0.3;
pub const CLIPPED_MASS_TOL: f64 = 0.1;
/// Tolerance of the unitarity check on filtered Kraus operators.
pub const KRAUS_UNITARY_TOL: f64 = 1e-10;

/// A measured number with the bound it was checked against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checked {
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Checked {
    fn at_most(value: f64, tol: f64) -> Self {
        Self {
            value,
            tol,
            pass: value <= tol,
        }
    }

    /// `value ≥ −tol`.
    fn not_below(value: f64, tol: f64) -> Self {
        Self {
            value,
            tol,
            pass: value >= -tol,
        }
    }
}

pub enum Plan {
    Qpt(QptPlan),
    Rud(RudPlan),
    Recover(RecoverPlan),
}

pub struct QptPlan {
    u_ab: ComplexMatrix,
    cp_tol: f64,
    scenarios: Vec<QptScenarioSpec>,
}

pub struct RudPlan {
    cp_tol: f64,
    source: RudPlanSource,
}

enum RudPlanSource {
    Explicit(UnitaryEnsemble),
    Random { dim: usize, members: usize, seed: u64 },
    Rf {
        h0t: Hamiltonian,
        k: Hamiltonian,
        profile: RfProfile,
        duration: f64,
    },
}

pub struct RecoverPlan {
    h0t: Hamiltonian,
    k: Hamiltonian,
    true_h0t: Hamiltonian,
    truth: RfProfile,
    offset: f64,
    noise: Option<(f64, u64)>,
    seed: Option<u64>,
    options: RecoveryOptions,
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Plan {
    pub fn prepare(config: &ScenarioConfig, base: &Path) -> Result<Self, CliError> {
        match config {
            ScenarioConfig::QptDemo(c) => {
                positive("cp_tol", c.cp_tol)?;
                let u_ab = c.u_ab.build()?;
                if u_ab.rows() != 4 {
                    return Err(CliError::Config(format!(
                        "u_ab must act on two qubits, generator is {}-dimensional",
                        u_ab.rows()
                    )));
                }
                if c.scenarios.is_empty() {
                    return Err(CliError::Config("scenarios must not be empty".into()));
                }
                for s in &c.scenarios {
                    prepare_correlated_inputs(s.alpha, s.beta, s.gamma)
                        .map_err(|e| CliError::Config(format!("scenario '{}': {e}", s.label)))?;
                }
                Ok(Self::Qpt(QptPlan {
                    u_ab,
                    cp_tol: c.cp_tol,
                    scenarios: c.scenarios.clone(),
                }))
            }
            ScenarioConfig::RudBuild(c) => {
                positive("cp_tol", c.cp_tol)?;
                let source = match &c.source {
                    RudSource::Explicit { members } => {
                        let members = members
                            .iter()
                            .map(|m| {
                                finite("angle", m.angle)?;
                                let h = parse_hamiltonian(&m.generator)?;
                                Ok((m.weight, expm_unitary(&h, m.angle).map_err(config_err("member"))?))
                            })
                            .collect::<Result<Vec<_>, CliError>>()?;
                        RudPlanSource::Explicit(UnitaryEnsemble::new(members).map_err(config_err("ensemble"))?)
                    }
                    &RudSource::Random { qubits, members } => {
                        if !(1..=4).contains(&qubits) || members == 0 {
                            return Err(CliError::Config(format!(
                                "random source needs 1-4 qubits and at least one member, got {qubits} and {members}"
                            )));
                        }
                        let seed = c
                            .seed
                            .ok_or_else(|| CliError::Config("random source requires a seed".into()))?;
                        RudPlanSource::Random {
                            dim: 1 << qubits,
                            members,
                            seed,
                        }
                    }
                    RudSource::Rf {
                        system,
                        profile,
                        duration,
                    } => {
                        finite("duration", *duration)?;
                        let (h0t, k) = system.build()?;
                        RudPlanSource::Rf {
                            h0t,
                            k,
                            profile: profile.build(base)?,
                            duration: *duration,
                        }
                    }
                };
                Ok(Self::Rud(RudPlan {
                    cp_tol: c.cp_tol,
                    source,
                }))
            }
            ScenarioConfig::RecoverProfile(c) => {
                let (h0t, k) = c.system.build()?;
                let truth = c.truth.build(base)?;
                finite("offset", c.offset)?;
                c.grid.validate().map_err(config_err("grid"))?;
                positive("pairing.match_tol", c.pairing.match_tol)?;
                positive("pairing.degeneracy_tol", c.pairing.degeneracy_tol)?;
                if let Some(r) = c.ridge {
                    positive("ridge", r)?;
                }
                if !(c.measurement_noise.is_finite() && c.measurement_noise >= 0.0) {
                    return Err(CliError::Config(format!(
                        "measurement_noise must be non-negative, got {}",
                        c.measurement_noise
                    )));
                }
                let noise = if c.measurement_noise > 0.0 {
                    let seed = c
                        .seed
                        .ok_or_else(|| CliError::Config("measurement_noise > 0 requires a seed".into()))?;
                    Some((c.measurement_noise, seed))
                } else {
                    None
                };
                let true_h0t = h0t.plus(&k.scaled(c.offset)).map_err(config_err("system"))?;
                Ok(Self::Recover(RecoverPlan {
                    h0t,
                    k,
                    true_h0t,
                    truth,
                    offset: c.offset,
                    noise,
                    seed: c.seed,
                    options: RecoveryOptions {
                        pairing: c.pairing,
                        grid: c.grid,
                        method: c.method,
                        ridge: c.ridge,
                    },
                }))
            }
        }
    }

    /// One-line summary for `validate`.
    pub fn describe(&self) -> String {
        match self {
            Self::Qpt(p) => format!("qpt_demo: {} scenario(s), cp_tol {:e}", p.scenarios.len(), p.cp_tol),
            Self::Rud(p) => {
                let what = match &p.source {
                    RudPlanSource::Explicit(e) => format!("{} explicit member(s), dim {}", e.members().len(), e.dim()),
                    RudPlanSource::Random { dim, members, seed } => {
                        format!("{members} random member(s), dim {dim}, seed {seed}")
                    }
                    RudPlanSource::Rf { h0t, profile, .. } => {
                        format!("rf ensemble of {} point(s), dim {}", profile.len(), h0t.dim())
                    }
                };
                format!("rud_build: {what}")
            }
            Self::Recover(p) => format!(
                "recover_profile: dim {}, {} truth point(s), {} grid bins, {}",
                p.h0t.dim(),
                p.truth.len(),
                p.options.grid.n_bins,
                p.options.method
            ),
        }
    }

    pub fn execute(&self) -> Result<Vec<Artifact>, CliError> {
        match self {
            Self::Qpt(p) => p.execute(),
            Self::Rud(p) => p.execute(),
            Self::Recover(p) => p.execute(),
        }
    }
}

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn json_matrix(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_csv(m: &ComplexMatrix) -> Vec<u8> {
    let mut s = String::from("row,col,re,im\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            writeln!(s, "{i},{j},{},{}", z.re, z.im).expect("string write");
        }
    }
    s.into_bytes()
}

fn sorted_spectrum(s: &Superoperator) -> Result<Vec<C64>, CliError> {
    let mut values = eigenvalues_general(s.matrix())?;
    values.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
    Ok(values)
}

fn spectrum_csv(values: &[C64]) -> Vec<u8> {
    let mut s = String::from("re,im,modulus\n");
    for v in values {
        writeln!(s, "{},{},{}", v.re, v.im, v.norm()).expect("string write");
    }
    s.into_bytes()
}

/// Largest distance from any eigenvalue's conjugate to the spectrum.
fn conjugate_pair_defect(values: &[C64]) -> f64 {
    values
        .iter()
        .map(|v| values.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[derive(Serialize)]
struct QptTolerances {
    cp_tol: f64,
    condition_limit: f64,
    kraus_unitary_tol: f64,
}

#[derive(Serialize)]
struct TableRow {
    cpf: bool,
    corr: bool,
    cp: bool,
    kraus: Option<usize>,
}

#[derive(Serialize)]
struct QptScenarioJson {
    label: String,
    alpha: f64,
    beta: f64,
    gamma: f64,
    correlated: bool,
    cp_filter: bool,
    superoperator: JsonMatrix,
    choi_eigenvalues: Vec<f64>,
    min_choi_eigenvalue: Checked,
    cp: bool,
    kraus_count: Option<usize>,
    kraus_unitary: Option<bool>,
    removed_weight: Option<f64>,
    condition_number: Checked,
    table_row: TableRow,
}

#[derive(Serialize)]
struct QptReportJson {
    mode: &'static str,
    u_ab: JsonMatrix,
    tolerances: QptTolerances,
    scenarios: Vec<QptScenarioJson>,
}

impl QptPlan {
    fn execute(&self) -> Result<Vec<Artifact>, CliError> {
        let mut rows = Vec::with_capacity(self.scenarios.len());
        let mut table = String::from("label,cpf,corr,cp,kraus\n");
        for spec in &self.scenarios {
            let scenario = QptScenario {
                cp_tol: self.cp_tol,
                ..QptScenario::new(spec.alpha, spec.beta, spec.gamma, spec.correlated, spec.cp_filter)
            };
            let report = run_qpt_scenario(&self.u_ab, scenario)
                .map_err(|e| CliError::Numerical(format!("scenario '{}': {e}", spec.label)))?;
            let min = report.choi_eigenvalues.last().copied().unwrap_or(0.0);
            let row = TableRow {
                cpf: spec.cp_filter,
                corr: spec.correlated,
                cp: report.is_cp,
                kraus: report.kraus_count(),
            };
            writeln!(
                table,
                "{},{},{},{},{}",
                spec.label,
                row.cpf,
                row.corr,
                row.cp,
                row.kraus.map(|k| k.to_string()).unwrap_or_default()
            )
            .expect("string write");
            rows.push(QptScenarioJson {
                label: spec.label.clone(),
                alpha: spec.alpha,
                beta: spec.beta,
                gamma: spec.gamma,
                correlated: spec.correlated,
                cp_filter: spec.cp_filter,
                superoperator: json_matrix(report.s_obs.matrix()),
                choi_eigenvalues: report.choi_eigenvalues.clone(),
                min_choi_eigenvalue: Checked::not_below(min, self.cp_tol),
                cp: report.is_cp,
                kraus_count: report.kraus_count(),
                kraus_unitary: report.kraus_unitary(),
                removed_weight: report.removed_weight,
                condition_number: Checked::at_most(report.condition_number, CONDITION_LIMIT),
                table_row: row,
            });
        }
        let report = QptReportJson {
            mode: "qpt_demo",
            u_ab: json_matrix(&self.u_ab),
            tolerances: QptTolerances {
                cp_tol: self.cp_tol,
                condition_limit: CONDITION_LIMIT,
                kraus_unitary_tol: KRAUS_UNITARY_TOL,
            },
            scenarios: rows,
        };
        Ok(vec![
            Artifact::json("report.json", "report", &report)?,
            Artifact::new("table.csv", "table", table.into_bytes()),
        ])
    }
}

#[derive(Serialize)]
struct RudReportJson {
    mode: &'static str,
    source: &'static str,
    dim: usize,
    members: usize,
    unitality_defect: Checked,
    trace_preservation_defect: Checked,
    min_choi_eigenvalue: Checked,
    max_eigenvalue_modulus_excess: Checked,
    conjugate_pair_defect: Checked,
    choi_eigenvalues: Vec<f64>,
    kraus_count: Option<usize>,
}

impl RudPlan {
    fn execute(&self) -> Result<Vec<Artifact>, CliError> {
        let (s, source, members) = match &self.source {
            RudPlanSource::Explicit(e) => (rud_superoperator(e), "explicit", e.members().len()),
            &RudPlanSource::Random { dim, members, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (rud_superoperator(&random_ensemble(dim, members, &mut rng)), "random", members)
            }
            RudPlanSource::Rf {
                h0t,
                k,
                profile,
                duration,
            } => (rf_incoherent_channel(h0t, k, profile, *duration)?, "rf", profile.len()),
        };
        let choi = superop_to_choi(&s);
        let choi_eigenvalues = choi.eigenvalues()?;
        let min = choi_eigenvalues.last().copied().unwrap_or(0.0);
        let kraus_count = if min >= -self.cp_tol {
            Some(choi_to_kraus(&choi, None)?.len())
        } else {
            None
        };
        let spectrum = sorted_spectrum(&s)?;
        let max_modulus = spectrum.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let report = RudReportJson {
            mode: "rud_build",
            source,
            dim: s.dim(),
            members,
            unitality_defect: Checked::at_most(s.unitality_defect(), CHANNEL_PROPERTY_TOL),
            trace_preservation_defect: Checked::at_most(s.trace_preservation_defect(), CHANNEL_PROPERTY_TOL),
            min_choi_eigenvalue: Checked::not_below(min, self.cp_tol),
            max_eigenvalue_modulus_excess: Checked::at_most(max_modulus - 1.0, CHANNEL_PROPERTY_TOL),
            conjugate_pair_defect: Checked::at_most(conjugate_pair_defect(&spectrum), CHANNEL_PROPERTY_TOL),
            choi_eigenvalues,
            kraus_count,
        };
        Ok(vec![
            Artifact::json("report.json", "report", &report)?,
            Artifact::new("superoperator.csv", "superoperator", matrix_csv(s.matrix())),
            Artifact::new("spectrum.csv", "spectrum", spectrum_csv(&spectrum)),
        ])
    }
}

#[derive(Serialize)]
struct RecoverTolerances {
    unit_eigenvalue_tol: f64,
    conjugate_tol: f64,
    degeneracy_tol: f64,
    match_tol: f64,
    bin_width: f64,
    mean_tol: f64,
    offset_tol: f64,
    std_rel_tol: f64,
    clipped_mass_tol: f64,
}

#[derive(Serialize)]
struct SpectrumSummary {
    n_eigenvalues: usize,
    unit_eigenvalues: usize,
    conjugate_pairs: usize,
}

impl SpectrumSummary {
    fn of(values: &[C64]) -> Self {
        Self {
            n_eigenvalues: values.len(),
            unit_eigenvalues: values
                .iter()
                .filter(|v| (*v - C64::new(1.0, 0.0)).norm() < UNIT_EIGENVALUE_TOL)
                .count(),
            conjugate_pairs: values.iter().filter(|v| v.im > CONJUGATE_TOL).count(),
        }
    }
}

#[derive(Serialize)]
struct SampleSummary {
    count: usize,
    dc_count: usize,
    conjugate_symmetry_defect: Checked,
}

#[derive(Serialize)]
struct Comparison {
    expected_mean: f64,
    mean_error: Checked,
    std_relative_error: Checked,
    skewness_sign_matches: bool,
    clipped_mass: Checked,
    offset_error: Checked,
}

#[derive(Serialize)]
struct RecoverReportJson {
    mode: &'static str,
    dim: usize,
    seed: Option<u64>,
    method: InverseMethod,
    injected_offset: f64,
    measurement_noise: f64,
    tolerances: RecoverTolerances,
    /// Noise-free channel.
    model_spectrum: SpectrumSummary,
    /// Channel handed to the recovery, noise included.
    measured_spectrum: SpectrumSummary,
    pairing_max_distance: Checked,
    samples: SampleSummary,
    window: WindowReport,
    transform: TransformQuality,
    truth: ProfileMetrics,
    recovered: ProfileMetrics,
    detected_offset: f64,
    comparison: Comparison,
    warnings: Vec<String>,
}

/// Adds `σ·(G + G†)/2`, `G` complex standard normal, to the Choi matrix.
fn add_choi_noise(s: &Superoperator, sigma: f64, seed: u64) -> incoherence::Result<Superoperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = superop_to_choi(s);
    let n = c.matrix().rows();
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    let h = g.try_add(&g.adjoint())?.scale_real(sigma / 2.0);
    Ok(choi_to_superop(&ChoiMatrix::new(c.matrix().try_add(&h)?)?))
}

impl RecoverPlan {
    fn execute(&self) -> Result<Vec<Artifact>, CliError> {
        let model = rf_incoherent_channel(&self.true_h0t, &self.k, &self.truth, 1.0)?;
        let model_spectrum = sorted_spectrum(&model)?;
        let (s, spectrum) = match self.noise {
            Some((sigma, seed)) => {
                let s = add_choi_noise(&model, sigma, seed)?;
                let spectrum = sorted_spectrum(&s)?;
                (s, spectrum)
            }
            None => (model, model_spectrum.clone()),
        };
        let r = recover_profile(&s, &self.h0t, &self.k, &self.options)?;
        let truth = profile_metrics(self.truth.points())?;

        let bin = self.options.grid.bin_width();
        let expected_mean = truth.mean + self.offset;
        let mut warnings = r.pairing.warnings.clone();
        warnings.extend(r.samples.warnings().iter().cloned());
        warnings.extend(r.inverse.quality.warnings.iter().cloned());
        let report = RecoverReportJson {
            mode: "recover_profile",
            dim: self.h0t.dim(),
            seed: self.seed,
            method: self.options.method,
            injected_offset: self.offset,
            measurement_noise: self.noise.map_or(0.0, |n| n.0),
            tolerances: RecoverTolerances {
                unit_eigenvalue_tol: UNIT_EIGENVALUE_TOL,
                conjugate_tol: CONJUGATE_TOL,
                degeneracy_tol: self.options.pairing.degeneracy_tol,
                match_tol: self.options.pairing.match_tol,
                bin_width: bin,
                mean_tol: MEAN_TOL_BINS * bin,
                offset_tol: OFFSET_TOL_BINS * bin,
                std_rel_tol: STD_REL_TOL,
                clipped_mass_tol: CLIPPED_MASS_TOL,
            },
            model_spectrum: SpectrumSummary::of(&model_spectrum),
            measured_spectrum: SpectrumSummary::of(&spectrum),
            pairing_max_distance: Checked::at_most(r.pairing.max_distance(), self.options.pairing.match_tol),
            samples: SampleSummary {
                count: r.samples.len(),
                dc_count: r.samples.dc_count(),
                conjugate_symmetry_defect: Checked::at_most(r.samples.conjugate_symmetry_defect(), CONJUGATE_TOL),
            },
            window: r.window,
            transform: r.inverse.quality.clone(),
            truth,
            recovered: r.metrics,
            detected_offset: r.offset,
            comparison: Comparison {
                expected_mean,
                mean_error: Checked::at_most((r.metrics.mean - expected_mean).abs(), MEAN_TOL_BINS * bin),
                std_relative_error: Checked::at_most((r.metrics.std - truth.std).abs() / truth.std, STD_REL_TOL),
                skewness_sign_matches: r.metrics.skewness.signum() == truth.skewness.signum(),
                clipped_mass: Checked::at_most(r.metrics.clipped_mass, CLIPPED_MASS_TOL),
                offset_error: Checked::at_most((r.offset - expected_mean).abs(), OFFSET_TOL_BINS * bin),
            },
            warnings,
        };
        Ok(vec![
            Artifact::json("report.json", "report", &report)?,
            Artifact::json("pairing.json", "pairing", &r.pairing)?,
            Artifact::new("samples.csv", "samples", r.samples.to_csv_string()?.into_bytes()),
            Artifact::new(
                "recovered_profile.csv",
                "recovered_profile",
                r.inverse.profile.to_csv_string()?.into_bytes(),
            ),
            Artifact::new("truth_profile.csv", "truth_profile", self.truth.to_csv_string()?.into_bytes()),
            Artifact::new("spectrum.csv", "spectrum", spectrum_csv(&spectrum)),
        ])
    }
}
