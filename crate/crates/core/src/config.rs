//! TOML run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    parse_eng, tune_vehicle, ControlGains, DisturbanceConfig, Environment, MotorError, SimConfig,
    SimError, SimSettings, TuneResult, TuneSettings, VehicleParams,
};
use crate::fsm::FsmConfig;
use crate::GimbalGeometry;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("motor file {path}: {source}")]
    Motor { path: PathBuf, source: MotorError },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorSection {
    /// `.eng` file; relative paths are taken from the config file's directory.
    pub path: PathBuf,
}

/// `gains = "auto"` or explicit per-axis gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainsSpec {
    Explicit(ControlGains),
    Keyword(String),
}

impl Default for GainsSpec {
    fn default() -> Self {
        GainsSpec::Keyword("auto".into())
    }
}

impl GainsSpec {
    pub fn explicit(&self) -> Option<ControlGains> {
        match self {
            GainsSpec::Explicit(g) => Some(*g),
            GainsSpec::Keyword(_) => None,
        }
    }

    pub fn is_auto(&self) -> bool {
        matches!(self, GainsSpec::Keyword(k) if k == "auto")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    #[serde(default)]
    pub gains: GainsSpec,
    #[serde(default = "default_kp_min")]
    pub kp_min: f64,
    #[serde(default = "default_kp_max")]
    pub kp_max: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_kp_min() -> f64 {
    TuneSettings::default().kp_min
}

fn default_kp_max() -> f64 {
    TuneSettings::default().kp_max
}

fn default_tolerance() -> f64 {
    TuneSettings::default().tolerance
}

impl Default for ControlSection {
    fn default() -> Self {
        let t = TuneSettings::default();
        Self {
            gains: GainsSpec::default(),
            kp_min: t.kp_min,
            kp_max: t.kp_max,
            tolerance: t.tolerance,
        }
    }
}

impl ControlSection {
    pub fn tune_settings(&self) -> TuneSettings {
        TuneSettings {
            kp_min: self.kp_min,
            kp_max: self.kp_max,
            tolerance: self.tolerance,
        }
    }
}

/// Contents of a run configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub environment: Environment,
    pub motor: MotorSection,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default)]
    pub geometry: GimbalGeometry,
    #[serde(default)]
    pub fsm: FsmConfig,
    pub disturbances: DisturbanceConfig,
    #[serde(default)]
    pub sim: SimSettings,
}

impl RunConfig {
    /// Parses TOML text; `base_dir` anchors a relative motor path.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let has_seed = raw
            .get("disturbances")
            .and_then(|d| d.get("seed"))
            .is_some();
        if !has_seed {
            return Err(ConfigError::Invalid("disturbances.seed is required".into()));
        }
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if cfg.motor.path.is_relative() {
            cfg.motor.path = base_dir.join(&cfg.motor.path);
        }
        if let GainsSpec::Keyword(k) = &cfg.control.gains {
            if k != "auto" {
                return Err(ConfigError::Invalid(format!(
                    "control.gains must be \"auto\" or a table, got {k:?}"
                )));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads the motor file and builds a validated simulator config.
    ///
    /// With `gains = "auto"` the returned gains are zero; use [`RunConfig::prepare`] to tune.
    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let path = &self.motor.path;
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        let motor = parse_eng(&text).map_err(|source| ConfigError::Motor {
            path: path.clone(),
            source,
        })?;
        let cfg = SimConfig {
            vehicle: self.vehicle,
            environment: self.environment,
            motor,
            geometry: self.geometry,
            fsm: self.fsm,
            gains: self.control.gains.explicit().unwrap_or_else(ControlGains::zero),
            disturbances: self.disturbances,
            sim: self.sim,
        };
        cfg.validate()?;
        let t = self.control.tune_settings();
        if !(t.kp_min > 0.0) || !(t.kp_max > t.kp_min) || !(t.tolerance > 0.0) {
            return Err(ConfigError::Invalid(
                "control needs 0 < kp_min < kp_max and tolerance > 0".into(),
            ));
        }
        Ok(cfg)
    }

    /// Resolves the config, tuning first when gains are `auto`.
    ///
    /// Returns the sim config, the config as actually run (explicit gains, absolute motor
    /// path) and the tuning result if tuning happened.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let mut sim = self.sim_config()?;
        let tune = if self.control.gains.is_auto() {
            let r = tune_vehicle(&sim, &self.control.tune_settings())?;
            sim.gains = ControlGains::both(r.gains);
            Some(r)
        } else {
            None
        };
        let mut resolved = self.clone();
        resolved.control.gains = GainsSpec::Explicit(sim.gains);
        if let Ok(abs) = fs::canonicalize(&resolved.motor.path) {
            resolved.motor.path = abs;
        }
        Ok(Prepared {
            sim,
            resolved,
            tune,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub sim: SimConfig,
    pub resolved: RunConfig,
    pub tune: Option<TuneResult>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[motor]\npath = \"m.eng\"\n[disturbances]\nseed = 7\n";

    #[test]
    fn defaults_fill_missing_sections() {
        let c = RunConfig::from_toml_str(MINIMAL, Path::new("/cfg")).unwrap();
        assert_eq!(c.motor.path, PathBuf::from("/cfg/m.eng"));
        assert_eq!(c.disturbances.seed, 7);
        assert_eq!(c.disturbances.launch_tilt_deg, 5.0);
        assert!(c.control.gains.is_auto());
        assert_eq!(c.sim.control_rate_hz, 100.0);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = "[motor]\npath = \"m.eng\"\n[disturbances]\nlaunch_tilt_deg = 3.0\n";
        assert!(matches!(
            RunConfig::from_toml_str(text, Path::new(".")),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn explicit_gains_and_round_trip() {
        let text = format!(
            "{MINIMAL}[control]\ngains = {{ pitch = {{ kp = 1.0, ki = 0.5, kd = 0.1 }}, yaw = {{ kp = 2.0, ki = 0.0, kd = 0.0 }} }}\n"
        );
        let c = RunConfig::from_toml_str(&text, Path::new("/x")).unwrap();
        let g = c.control.gains.explicit().unwrap();
        assert_eq!((g.pitch.ki, g.yaw.kp), (0.5, 2.0));
        let again = RunConfig::from_toml_str(&c.to_toml_string().unwrap(), Path::new("/y")).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_unknown_keyword_and_fields() {
        let text = format!("{MINIMAL}[control]\ngains = \"manual\"\n");
        assert!(RunConfig::from_toml_str(&text, Path::new(".")).is_err());
        let text = format!("{MINIMAL}[sim]\nrate = 3\n");
        assert!(matches!(
            RunConfig::from_toml_str(&text, Path::new(".")),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn slow_control_rate_is_invalid() {
        let dir = std::env::temp_dir();
        let text = format!(
            "[motor]\npath = \"{}\"\n[disturbances]\nseed = 1\n[sim]\ncontrol_rate_hz = 20.0\n",
            concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/motors/e12_reference.eng")
        );
        let c = RunConfig::from_toml_str(&text, &dir).unwrap();
        assert!(matches!(
            c.sim_config(),
            Err(ConfigError::Sim(SimError::ConfigInvalid(_)))
        ));
    }
}
