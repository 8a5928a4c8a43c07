//! TOML run configuration. Model and grid keys sit at the top level; scan
//! and run settings live in `[scan]` and `[run]`. Every key has a default.

use std::path::Path;

use serde::{Deserialize, Serialize};
use socwell_core::{ModelParams, SpatialGrid};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gamma: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub omega: f64,
    pub well_depth: f64,
    pub well_width: f64,
    pub well_separation: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub scan: ScanSection,
    pub run: RunSection,
}

impl Default for Config {
    fn default() -> Self {
        let p = ModelParams::default();
        let g = SpatialGrid::default();
        Self {
            gamma: p.gamma,
            omega0: p.omega0,
            omega1: p.omega1,
            omega: p.omega,
            well_depth: p.well_depth,
            well_width: p.well_width,
            well_separation: p.well_separation,
            x_min: g.x_min(),
            x_max: g.x_max(),
            n: g.n(),
            scan: ScanSection::default(),
            run: RunSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    /// Must match the subcommand when given.
    pub kind: Option<String>,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Sweep axis of a quasienergy scan: "gamma" or "omega".
    pub axis: String,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            kind: None,
            start: 1.7,
            stop: 2.0,
            count: 200,
            axis: "gamma".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Propagation length; per-point averaging window when absent.
    pub t_final: Option<f64>,
    pub dt: f64,
    pub sample_stride: usize,
    /// Also integrate the four-state model (single/spectrum).
    pub four_state: bool,
    /// Also compute the beat spectrum of P_L (single).
    pub spectrum: bool,
    /// Requested spectral resolution; checked against the window.
    pub spectrum_resolution: Option<f64>,
    /// Dump the four eigenstates (eigen).
    pub wavefunctions: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_final: None,
            dt: 1e-3,
            sample_stride: 100,
            four_state: false,
            spectrum: false,
            spectrum_resolution: None,
            wavefunctions: false,
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            gamma: self.gamma,
            omega0: self.omega0,
            omega1: self.omega1,
            omega: self.omega,
            well_depth: self.well_depth,
            well_width: self.well_width,
            well_separation: self.well_separation,
        }
    }

    pub fn grid(&self) -> Result<SpatialGrid, HarnessError> {
        Ok(SpatialGrid::new(self.x_min, self.x_max, self.n)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.params().validate()?;
        self.grid()?;
        if !(self.run.dt > 0.0) {
            return Err(HarnessError::Config(format!("run.dt must be positive, got {}", self.run.dt)));
        }
        if self.run.sample_stride == 0 {
            return Err(HarnessError::Config("run.sample_stride must be at least 1".into()));
        }
        if let Some(t) = self.run.t_final {
            if !(t > 0.0) {
                return Err(HarnessError::Config(format!("run.t_final must be positive, got {t}")));
            }
        }
        if !matches!(self.scan.axis.as_str(), "gamma" | "omega") {
            return Err(HarnessError::Config(format!(
                "scan.axis must be \"gamma\" or \"omega\", got {:?}",
                self.scan.axis
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = Config::from_toml_str("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.params(), ModelParams::default());
        assert_eq!(cfg.n, 1024);
        assert_eq!(cfg.run.dt, 1e-3);
    }

    #[test]
    fn keys_are_read() {
        let cfg = Config::from_toml_str(
            "gamma = 1.112\nwell_separation = 1.7\nn = 512\n[scan]\nkind = \"omega-scan\"\nstart = 1.55\nstop = 1.78\ncount = 24\n[run]\nt_final = 300.0\nfour_state = true\n",
        )
        .unwrap();
        assert_eq!(cfg.gamma, 1.112);
        assert_eq!(cfg.n, 512);
        assert_eq!(cfg.scan.kind.as_deref(), Some("omega-scan"));
        assert_eq!(cfg.scan.count, 24);
        assert_eq!(cfg.run.t_final, Some(300.0));
        assert!(cfg.run.four_state && !cfg.run.spectrum);
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(Config::from_toml_str("gammma = 1.0").is_err());
        assert!(Config::from_toml_str("n = 1000").is_err());
        assert!(Config::from_toml_str("well_depth = -1.0").is_err());
        assert!(Config::from_toml_str("[run]\ndt = 0.0").is_err());
        assert!(Config::from_toml_str("[scan]\naxis = \"x\"").is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = Config {
            gamma: 3.42,
            ..Config::default()
        };
        let back = Config::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
