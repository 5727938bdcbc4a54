//! Experiment configuration (JSON, versioned, unknown keys rejected).

use std::fs;
use std::path::{Path, PathBuf};

use gaussian_tomo_core::bounds::{DisplacementVariant, Problem, SymplecticVariant};
use gaussian_tomo_core::tomography::Accounting;
use gaussian_tomo_core::GaussianUnitary;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::instance::read_instance;
use crate::tolerances;

pub const SCHEMA_VERSION: u32 = 1;

/// Where hidden unitaries come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSource {
    /// A fresh random instance per trial. Seeds derive from `seed`, or from
    /// the master seed when absent.
    Random {
        #[serde(default)]
        seed: Option<u64>,
        /// Draw `S` with `‖S‖∞ = z` exactly (otherwise `‖S‖∞` is uniform in `[1, z]`).
        #[serde(default = "yes")]
        z_pinned: bool,
        #[serde(default = "unit")]
        r_scale: f64,
    },
    /// One instance file shared by all trials; relative paths resolve
    /// against the config file's directory.
    Explicit { path: PathBuf },
}

fn yes() -> bool {
    true
}

fn unit() -> f64 {
    1.0
}

fn default_sym() -> SymplecticVariant {
    SymplecticVariant::VacuumShared
}

fn default_disp() -> DisplacementVariant {
    DisplacementVariant::Tmsv
}

fn default_sigmas() -> f64 {
    tolerances::BINOMIAL_SIGMAS
}

/// Overrides for statistical acceptance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default = "default_sigmas")]
    pub binomial_sigmas: f64,
}

impl Default for ToleranceOverrides {
    fn default() -> Self {
        ToleranceOverrides {
            binomial_sigmas: default_sigmas(),
        }
    }
}

/// Forces shot counts instead of the planned ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotOverride {
    pub n_s: u64,
    pub n_r: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub problem: Problem,
    pub instance: InstanceSource,
    #[serde(default = "default_sym")]
    pub sym_variant: SymplecticVariant,
    #[serde(default = "default_disp")]
    pub disp_variant: DisplacementVariant,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub accounting: Accounting,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    #[serde(default)]
    pub shots: Option<ShotOverride>,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            problem,
            instance: InstanceSource::Random {
                seed: None,
                z_pinned: true,
                r_scale: 1.0,
            },
            sym_variant: default_sym(),
            disp_variant: default_disp(),
            trials,
            master_seed,
            output_dir: None,
            accounting: Accounting::Paper,
            tolerances: ToleranceOverrides::default(),
            shots: None,
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            HarnessError::Config(format!("{origin}: {e}"))
        })?;
        cfg.validate().map_err(|e| HarnessError::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        if let InstanceSource::Explicit { path: p } = &mut cfg.instance {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.load_instance()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        let p = &self.problem;
        if p.m == 0 {
            return Err("problem.m must be at least 1".into());
        }
        if !(p.z >= 1.0 && p.z.is_finite()) {
            return Err(format!("problem.z must be >= 1, got {}", p.z));
        }
        if !(p.n_bar > 0.0) || !(p.n_bar_in > 0.0) {
            return Err("problem.n_bar and problem.n_bar_in must be positive".into());
        }
        for (name, v) in [("epsilon", p.epsilon), ("delta", p.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("problem.{name} must lie in (0, 1), got {v}"));
            }
        }
        if let InstanceSource::Random { r_scale, .. } = self.instance {
            if !(r_scale >= 0.0 && r_scale.is_finite()) {
                return Err(format!("instance.r_scale must be finite and >= 0, got {r_scale}"));
            }
        }
        if let Some(s) = self.shots {
            if s.n_s == 0 || s.n_r == 0 {
                return Err("shots.n_s and shots.n_r must be at least 1".into());
            }
        }
        if !(self.tolerances.binomial_sigmas >= 0.0) {
            return Err("tolerances.binomial_sigmas must be >= 0".into());
        }
        Ok(())
    }

    /// Loads and checks an explicit instance; `None` for random sources.
    pub fn load_instance(&self) -> Result<Option<GaussianUnitary>> {
        let InstanceSource::Explicit { path } = &self.instance else {
            return Ok(None);
        };
        let file = read_instance(path).map_err(|e| HarnessError::Config(e.to_string()))?;
        let g = file
            .to_unitary()
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        if g.modes() != self.problem.m {
            return Err(HarnessError::Config(format!(
                "{}: instance has {} modes, problem.m is {}",
                path.display(),
                g.modes(),
                self.problem.m
            )));
        }
        let norm = g.symplectic().operator_norm();
        if norm > self.problem.z * (1.0 + 1e-9) {
            return Err(HarnessError::Config(format!(
                "{}: ||S|| = {norm} exceeds problem.z = {}",
                path.display(),
                self.problem.z
            )));
        }
        Ok(Some(g))
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
  "schema_version": 1,
  "problem": {"m": 2, "z": 2.0, "n_bar": 1.0, "n_bar_in": 1e6, "epsilon": 0.5, "delta": 0.1},
  "instance": {"kind": "random"},
  "trials": 4,
  "master_seed": 7
}"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(BASE, "inline").unwrap();
        assert_eq!(cfg.sym_variant, SymplecticVariant::VacuumShared);
        assert_eq!(cfg.accounting, Accounting::Paper);
        assert_eq!(
            cfg.instance,
            InstanceSource::Random {
                seed: None,
                z_pinned: true,
                r_scale: 1.0
            }
        );
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = BASE.replace("\"trials\": 4,", "\"trials\": 4,\n  \"trails\": 5,");
        let err = ExperimentConfig::from_json(&text, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("unknown field `trails`"), "{err}");
        assert!(err.contains("line 6"), "{err}");
    }

    #[test]
    fn rejects_zero_trials_and_bad_schema() {
        let text = BASE.replace("\"trials\": 4", "\"trials\": 0");
        assert!(ExperimentConfig::from_json(&text, "x").is_err());
        let text = BASE.replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(ExperimentConfig::from_json(&text, "x").is_err());
    }

    #[test]
    fn hash_is_stable() {
        let a = ExperimentConfig::from_json(BASE, "a").unwrap();
        let b = ExperimentConfig::from_json(BASE, "b").unwrap();
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.master_seed += 1;
        assert_ne!(a.hash(), c.hash());
    }
}
