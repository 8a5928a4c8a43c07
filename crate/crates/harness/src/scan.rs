//! Scan specification, per-point computations and the parallel point runner.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use socwell_core::dynamics::{evolve, PropagationPlan};
use socwell_core::floquet::{
    averaging_window, build_four_state, multiphoton_order, quasienergies, resonance_catalog,
    Quasienergies, ResonanceCatalog,
};
use socwell_core::observables::{Averages, Probes, TrajectoryRecord};
use socwell_core::stationary::{localized_basis, solve};
use socwell_core::{EigenSolution, ModelParams, SpatialGrid};

use crate::config::Config;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    OmegaScan,
    GammaScan,
    CouplingScan,
    QuasienergyScan,
    SingleRun,
    Spectrum,
}

impl ScanKind {
    pub fn label(self) -> &'static str {
        match self {
            ScanKind::OmegaScan => "omega-scan",
            ScanKind::GammaScan => "gamma-scan",
            ScanKind::CouplingScan => "coupling-scan",
            ScanKind::QuasienergyScan => "quasienergy-scan",
            ScanKind::SingleRun => "single-run",
            ScanKind::Spectrum => "spectrum",
        }
    }

    fn is_ranged(self) -> bool {
        !matches!(self, ScanKind::SingleRun | ScanKind::Spectrum)
    }
}

impl fmt::Display for ScanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScanKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            ScanKind::OmegaScan,
            ScanKind::GammaScan,
            ScanKind::CouplingScan,
            ScanKind::QuasienergyScan,
            ScanKind::SingleRun,
            ScanKind::Spectrum,
        ]
        .into_iter()
        .find(|k| k.label() == s)
        .ok_or_else(|| HarnessError::Config(format!("unknown scan kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Gamma,
    Omega,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub axis: SweepAxis,
    pub config: Config,
}

impl ScanSpec {
    /// Builds the spec for `kind`; a `scan.kind` in the config must agree.
    pub fn from_config(kind: ScanKind, config: &Config) -> Result<Self, HarnessError> {
        if let Some(declared) = &config.scan.kind {
            let declared: ScanKind = declared.parse()?;
            if declared != kind {
                return Err(HarnessError::Config(format!(
                    "config declares scan.kind = {declared} but {kind} was requested"
                )));
            }
        }
        let axis = match kind {
            ScanKind::OmegaScan => SweepAxis::Omega,
            ScanKind::GammaScan | ScanKind::CouplingScan => SweepAxis::Gamma,
            _ if config.scan.axis == "omega" => SweepAxis::Omega,
            _ => SweepAxis::Gamma,
        };
        let spec = Self {
            kind,
            start: config.scan.start,
            stop: config.scan.stop,
            count: config.scan.count,
            axis,
            config: config.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if !self.kind.is_ranged() {
            return Ok(());
        }
        if self.count == 0 {
            return Err(HarnessError::Config("scan.count must be at least 1".into()));
        }
        if self.count > 1 && !(self.start < self.stop) {
            return Err(HarnessError::Config(format!(
                "scan.start = {} must be below scan.stop = {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Evenly spaced sweep values, `start` alone when `count = 1`.
    pub fn values(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }
}

/// Result of one sweep point; failures carry the error text.
#[derive(Debug, Clone)]
pub struct PointOutcome<T> {
    pub index: usize,
    pub value: f64,
    pub result: Result<T, String>,
}

/// Evaluates `f` on every value using `workers` threads (0 means one per
/// core). Outcomes come back in sweep order.
pub fn run_points<T, F>(values: &[f64], workers: usize, f: F) -> Result<Vec<PointOutcome<T>>, HarnessError>
where
    T: Send,
    F: Fn(f64) -> Result<T, HarnessError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(index, &value)| PointOutcome {
                index,
                value,
                result: f(value).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

/// Averages of one driven run started from `|1->`.
#[derive(Debug, Clone)]
pub struct DynamicsPoint {
    pub window: f64,
    pub averages: Averages,
    pub min_p_all: f64,
    pub record: TrajectoryRecord,
}

/// Propagation length: `run.t_final` if set, otherwise the averaging window
/// for the drive frequency in `params`.
pub fn run_length(config: &Config, catalog: &ResonanceCatalog, params: &ModelParams) -> f64 {
    config
        .run
        .t_final
        .unwrap_or_else(|| averaging_window(catalog, params.omega))
}

pub fn driven_run(
    config: &Config,
    grid: &SpatialGrid,
    params: &ModelParams,
    solution: &EigenSolution,
) -> Result<DynamicsPoint, HarnessError> {
    let catalog = resonance_catalog(solution, params.omega1)?;
    let window = run_length(config, &catalog, params);
    let plan = PropagationPlan::new(config.run.dt, window, config.run.sample_stride);
    let initial = localized_basis(solution).left_lower().clone();
    let record = evolve(&initial, &plan, params, grid, &Probes::new(solution))?;
    let averages = record.averages()?;
    let min_p_all = record
        .samples
        .iter()
        .map(|s| s.projections.all)
        .fold(f64::INFINITY, f64::min);
    Ok(DynamicsPoint {
        window,
        averages,
        min_p_all,
        record,
    })
}

/// One point of an omega scan; the eigen-solution is shared by all points.
pub fn omega_point(
    config: &Config,
    grid: &SpatialGrid,
    solution: &EigenSolution,
    omega: f64,
) -> Result<DynamicsPoint, HarnessError> {
    let params = ModelParams {
        omega,
        ..config.params()
    };
    params.validate()?;
    driven_run(config, grid, &params, solution)
}

/// One point of a gamma scan: re-solve, then propagate.
pub fn gamma_point(config: &Config, grid: &SpatialGrid, gamma: f64) -> Result<DynamicsPoint, HarnessError> {
    let params = ModelParams {
        gamma,
        ..config.params()
    };
    let solution = solve(grid, &params)?;
    driven_run(config, grid, &params, &solution)
}

#[derive(Debug, Clone)]
pub struct CouplingPoint {
    pub delta_e_lower: f64,
    pub delta_e_upper: f64,
    pub catalog: ResonanceCatalog,
}

pub fn coupling_point(config: &Config, grid: &SpatialGrid, gamma: f64) -> Result<CouplingPoint, HarnessError> {
    let params = ModelParams {
        gamma,
        ..config.params()
    };
    let solution = solve(grid, &params)?;
    Ok(CouplingPoint {
        delta_e_lower: solution.lower_splitting(),
        delta_e_upper: solution.upper_splitting(),
        catalog: resonance_catalog(&solution, params.omega1)?,
    })
}

#[derive(Debug, Clone)]
pub struct QuasienergyPoint {
    pub quasienergies: Quasienergies,
    pub photon_order: u32,
    pub photon_residual: f64,
}

/// Quasienergies at one sweep value; `solution` is reused along an omega axis.
pub fn quasienergy_point(
    params: &ModelParams,
    grid: &SpatialGrid,
    solution: Option<&EigenSolution>,
) -> Result<QuasienergyPoint, HarnessError> {
    let owned;
    let solution = match solution {
        Some(s) => s,
        None => {
            owned = solve(grid, params)?;
            &owned
        }
    };
    let model = build_four_state(solution, params)?;
    let (photon_order, photon_residual) = multiphoton_order(solution, params.omega)?;
    Ok(QuasienergyPoint {
        quasienergies: quasienergies(&model)?,
        photon_order,
        photon_residual,
    })
}
