//! Per-run manifest written next to the outputs as `manifest.toml`.

use std::path::Path;

use serde::Serialize;

use crate::config::Config;
use crate::HarnessError;

pub const MANIFEST_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridInfo {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub value: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub dt: f64,
    pub sample_stride: usize,
    pub wall_clock_seconds: f64,
    pub grid: GridInfo,
    pub config: Config,
    pub points: Vec<PointRecord>,
    pub files: Vec<FileRecord>,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config) -> Self {
        let dx = (config.x_max - config.x_min) / config.n as f64;
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            dt: config.run.dt,
            sample_stride: config.run.sample_stride,
            wall_clock_seconds: 0.0,
            grid: GridInfo {
                x_min: config.x_min,
                x_max: config.x_max,
                n: config.n,
                dx,
            },
            config: config.clone(),
            points: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn point(&mut self, index: usize, value: f64, result: Result<(), &str>) {
        self.points.push(PointRecord {
            index,
            value,
            status: if result.is_ok() { "ok" } else { "failed" }.into(),
            message: result.err().map(str::to_string),
        });
    }

    pub fn file(&mut self, name: &str) {
        self.files.push(FileRecord {
            name: name.to_string(),
            status: "written".into(),
        });
    }

    pub fn failed_points(&self) -> usize {
        self.points.iter().filter(|p| p.status != "ok").count()
    }

    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let text = toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))?;
        std::fs::write(dir.join(MANIFEST_NAME), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_points_and_files() {
        let mut m = RunManifest::new("scan-omega", &Config::default());
        m.point(0, 1.6, Ok(()));
        m.point(1, 1.7, Err("non-finite amplitude"));
        m.file("omega_scan.csv");
        assert_eq!(m.failed_points(), 1);
        let text = toml::to_string(&m).unwrap();
        assert!(text.contains("command = \"scan-omega\""));
        assert!(text.contains("[[points]]"));
        assert!(text.contains("status = \"failed\""));
        assert!(text.contains("name = \"omega_scan.csv\""));
        assert!(text.contains("[config]"));
    }
}
