//! Scenario configuration schema.
//!
//! Every struct rejects unknown fields. Operators are Pauli-string sums such
//! as `"0.7853981633974483 * ZZ"`.

use std::path::{Path, PathBuf};

use incoherence::channels::{expm_unitary, make_synthetic_profile, Hamiltonian, ProfileKind, ProfilePoint, RfProfile};
use incoherence::fixtures::SpinFixture;
use incoherence::nonuniform_ft::{InverseMethod, RecoveryGrid};
use incoherence::spectral::PairingOptions;
use incoherence::ComplexMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScenarioConfig {
    QptDemo(QptDemoConfig),
    RudBuild(RudBuildConfig),
    RecoverProfile(RecoverConfig),
}

impl ScenarioConfig {
    pub fn mode(&self) -> &'static str {
        match self {
            Self::QptDemo(_) => "qpt_demo",
            Self::RudBuild(_) => "rud_build",
            Self::RecoverProfile(_) => "recover_profile",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::QptDemo(c) => c.seed,
            Self::RudBuild(c) => c.seed,
            Self::RecoverProfile(c) => c.seed,
        }
    }

    fn seed_mut(&mut self) -> &mut Option<u64> {
        match self {
            Self::QptDemo(c) => &mut c.seed,
            Self::RudBuild(c) => &mut c.seed,
            Self::RecoverProfile(c) => &mut c.seed,
        }
    }

    /// Parses JSON text strictly.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Folds command-line overrides into the config.
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = o.seed {
            *self.seed_mut() = Some(seed);
        }
        if let Some(tol) = o.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(CliError::Config(format!("--tol must be positive and finite, got {tol}")));
            }
            match self {
                Self::QptDemo(c) => c.cp_tol = tol,
                Self::RudBuild(c) => c.cp_tol = tol,
                Self::RecoverProfile(c) => c.pairing.match_tol = tol,
            }
        }
        if let Some(method) = o.method {
            match self {
                Self::RecoverProfile(c) => c.method = method,
                other => {
                    return Err(CliError::Config(format!(
                        "--method only applies to recover_profile, config mode is {}",
                        other.mode()
                    )))
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub method: Option<InverseMethod>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

fn default_cp_tol() -> f64 {
    incoherence::liouville::DEFAULT_CP_TOL
}

fn default_duration() -> f64 {
    1.0
}

/// `U = exp(−i·angle·generator)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitarySpec {
    pub generator: String,
    pub angle: f64,
}

impl UnitarySpec {
    pub fn build(&self) -> Result<ComplexMatrix, CliError> {
        let h = parse_hamiltonian(&self.generator)?;
        finite("angle", self.angle)?;
        expm_unitary(&h, self.angle).map_err(config_err("unitary"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QptDemoConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_cp_tol")]
    pub cp_tol: f64,
    pub u_ab: UnitarySpec,
    pub scenarios: Vec<QptScenarioSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QptScenarioSpec {
    pub label: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub correlated: bool,
    #[serde(default)]
    pub cp_filter: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RudBuildConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_cp_tol")]
    pub cp_tol: f64,
    pub source: RudSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSpec {
    pub weight: f64,
    pub generator: String,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RudSource {
    /// Explicit weighted unitaries.
    Explicit { members: Vec<MemberSpec> },
    /// Haar-random members with uniform weights; needs a seed.
    Random { qubits: usize, members: usize },
    /// Control-deviation ensemble `exp(−i(H0·t + Δω·K))`.
    Rf {
        system: SystemSpec,
        profile: ProfileSpec,
        #[serde(default = "default_duration")]
        duration: f64,
    },
}

/// Either a named fixture or explicit `H0·t` and `K`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    /// Replaces the fixture's transverse coupling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transverse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0t: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<(Hamiltonian, Hamiltonian), CliError> {
        match (&self.fixture, &self.h0t, &self.k) {
            (Some(name), None, None) => {
                let mut f = SpinFixture::by_name(name).map_err(config_err("system"))?;
                if let Some(eps) = self.transverse {
                    finite("transverse", eps)?;
                    f = f.with_transverse(eps).map_err(config_err("system"))?;
                }
                Ok((f.h0t, f.k))
            }
            (None, Some(h0t), Some(k)) => {
                if self.transverse.is_some() {
                    return Err(CliError::Config("system: transverse only applies to fixtures".into()));
                }
                let h0t = parse_hamiltonian(h0t)?;
                let k = parse_hamiltonian(k)?;
                if h0t.dim() != k.dim() {
                    return Err(CliError::Config(format!(
                        "system: h0t is {}-dimensional but k is {}-dimensional",
                        h0t.dim(),
                        k.dim()
                    )));
                }
                Ok((h0t, k))
            }
            _ => Err(CliError::Config(
                "system: give either `fixture` or both `h0t` and `k`".into(),
            )),
        }
    }
}

fn default_n_points() -> usize {
    41
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Uniform {
        center: f64,
        width: f64,
        #[serde(default = "default_n_points")]
        n_points: usize,
    },
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default = "default_n_points")]
        n_points: usize,
    },
    Skewed {
        center: f64,
        width: f64,
        skew: f64,
        #[serde(default = "default_n_points")]
        n_points: usize,
    },
    /// CSV with header `delta_omega,weight`, relative to the config file.
    Csv { path: PathBuf },
    Points { points: Vec<ProfilePoint> },
}

impl ProfileSpec {
    pub fn build(&self, base: &Path) -> Result<RfProfile, CliError> {
        let synthetic = |kind, n| make_synthetic_profile(kind, n).map_err(config_err("profile"));
        match self {
            &Self::Uniform { center, width, n_points } => synthetic(ProfileKind::Uniform { center, width }, n_points),
            &Self::Gaussian { center, width, n_points } => synthetic(ProfileKind::Gaussian { center, width }, n_points),
            &Self::Skewed {
                center,
                width,
                skew,
                n_points,
            } => synthetic(ProfileKind::Skewed { center, width, skew }, n_points),
            Self::Csv { path } => {
                let full = base.join(path);
                let file = std::fs::File::open(&full)
                    .map_err(|e| CliError::Config(format!("profile: cannot open {}: {e}", full.display())))?;
                RfProfile::read_csv(file).map_err(config_err("profile"))
            }
            Self::Points { points } => RfProfile::new(points.clone()).map_err(config_err("profile")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    pub system: SystemSpec,
    /// Ground-truth profile used to synthesize the measured channel.
    pub truth: ProfileSpec,
    /// The channel is simulated with `H0·t + offset·K` and analyzed against `H0·t`.
    #[serde(default)]
    pub offset: f64,
    /// Standard deviation of Hermitian noise added to the Choi matrix; needs a seed when positive.
    #[serde(default)]
    pub measurement_noise: f64,
    #[serde(default)]
    pub grid: RecoveryGrid,
    #[serde(default)]
    pub method: InverseMethod,
    #[serde(default)]
    pub ridge: Option<f64>,
    #[serde(default)]
    pub pairing: PairingOptions,
}

pub(crate) fn parse_hamiltonian(expr: &str) -> Result<Hamiltonian, CliError> {
    Hamiltonian::from_pauli_sum(expr).map_err(|e| CliError::Config(format!("operator '{expr}': {e}")))
}

pub(crate) fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn config_err(context: &'static str) -> impl Fn(incoherence::Error) -> CliError {
    move |e| CliError::Config(format!("{context}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const QPT: &str = r#"{
        "mode": "qpt_demo",
        "u_ab": {"generator": "ZZ", "angle": 0.7853981633974483},
        "scenarios": [{"label": "a", "alpha": 0.5, "beta": 0.5, "gamma": 0.6, "correlated": true}]
    }"#;

    #[test]
    fn parses_minimal_qpt() {
        let c = ScenarioConfig::from_json(QPT).unwrap();
        let ScenarioConfig::QptDemo(q) = &c else { panic!() };
        assert_eq!(q.scenarios.len(), 1);
        assert!(!q.scenarios[0].cp_filter);
        assert_eq!(q.cp_tol, default_cp_tol());
        assert_eq!(c.seed(), None);
    }

    #[test]
    fn rejects_unknown_fields_at_every_level() {
        let top = QPT.replacen("\"mode\"", "\"colour\": 1, \"mode\"", 1);
        assert!(ScenarioConfig::from_json(&top).is_err());
        let nested = QPT.replacen("\"correlated\"", "\"corelated\": true, \"correlated\"", 1);
        assert!(ScenarioConfig::from_json(&nested).is_err());
        let unitary = QPT.replacen("\"angle\"", "\"time\": 1, \"angle\"", 1);
        assert!(ScenarioConfig::from_json(&unitary).is_err());
        let mode = QPT.replacen("qpt_demo", "qpt", 1);
        assert!(ScenarioConfig::from_json(&mode).is_err());
    }

    #[test]
    fn recover_defaults() {
        let c = ScenarioConfig::from_json(
            r#"{"mode": "recover_profile", "seed": 3, "system": {"fixture": "3q"},
                "truth": {"kind": "skewed", "center": 0, "width": 0.07, "skew": 0.4}}"#,
        )
        .unwrap();
        let ScenarioConfig::RecoverProfile(r) = c else { panic!() };
        assert_eq!(r.grid, RecoveryGrid::default());
        assert_eq!(r.method, InverseMethod::WeightedRiemann);
        let ProfileSpec::Skewed { n_points, .. } = r.truth else { panic!() };
        assert_eq!(n_points, 41);
    }

    #[test]
    fn overrides() {
        let mut c = ScenarioConfig::from_json(QPT).unwrap();
        c.apply_overrides(&Overrides {
            tol: Some(1e-6),
            seed: Some(9),
            method: None,
        })
        .unwrap();
        let ScenarioConfig::QptDemo(q) = &c else { panic!() };
        assert_eq!(q.cp_tol, 1e-6);
        assert_eq!(q.seed, Some(9));
        let method = Overrides {
            method: Some(InverseMethod::LeastSquares),
            ..Default::default()
        };
        assert!(c.apply_overrides(&method).is_err());
        let bad_tol = Overrides {
            tol: Some(-1.0),
            ..Default::default()
        };
        assert!(c.apply_overrides(&bad_tol).is_err());
    }

    #[test]
    fn system_spec_is_exclusive() {
        let both = SystemSpec {
            fixture: Some("3q".into()),
            h0t: Some("ZI".into()),
            k: Some("IZ".into()),
            ..Default::default()
        };
        assert!(both.build().is_err());
        let explicit = SystemSpec {
            h0t: Some("0.5*ZI + 1.3*IZ".into()),
            k: Some("0.1*ZI".into()),
            ..Default::default()
        };
        assert_eq!(explicit.build().unwrap().0.dim(), 4);
        assert!(SystemSpec::default().build().is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = ScenarioConfig::from_json(QPT).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), c);
    }
}
