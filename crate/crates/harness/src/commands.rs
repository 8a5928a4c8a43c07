//! Subcommand drivers: compute, then write CSV files and the manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use socwell_core::floquet::{
    build_four_state, integrate_four_state, recommended_dt, resonance_catalog,
    FourStateAmplitudes, QuasienergySpectrum,
};
use socwell_core::io::fmt_num;
use socwell_core::observables::beat_spectrum;
use socwell_core::stationary::solve;
use socwell_core::{Level, ModelParams};

use crate::config::Config;
use crate::manifest::RunManifest;
use crate::scan::{
    coupling_point, driven_run, gamma_point, omega_point, quasienergy_point, run_points,
    DynamicsPoint, PointOutcome, ScanKind, ScanSpec, SweepAxis,
};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eigen,
    Single,
    Spectrum,
    ScanOmega,
    ScanGamma,
    Coupling,
    Quasienergy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Single => "single",
            Command::Spectrum => "spectrum",
            Command::ScanOmega => "scan-omega",
            Command::ScanGamma => "scan-gamma",
            Command::Coupling => "coupling",
            Command::Quasienergy => "quasienergy",
        }
    }
}

/// Runs one subcommand and writes its outputs plus `manifest.toml` to `out`.
pub fn execute(
    command: Command,
    config: &Config,
    out: &Path,
    workers: usize,
) -> Result<RunManifest, HarnessError> {
    config.validate()?;
    fs::create_dir_all(out)?;
    let started = Instant::now();
    let mut manifest = RunManifest::new(command.name(), config);
    match command {
        Command::Eigen => run_eigen(config, out, &mut manifest)?,
        Command::Single => run_single(config, out, false, &mut manifest)?,
        Command::Spectrum => run_single(config, out, true, &mut manifest)?,
        Command::ScanOmega => run_omega_scan(config, out, workers, &mut manifest)?,
        Command::ScanGamma => run_gamma_scan(config, out, workers, &mut manifest)?,
        Command::Coupling => run_coupling_scan(config, out, workers, &mut manifest)?,
        Command::Quasienergy => run_quasienergy_scan(config, out, workers, &mut manifest)?,
    }
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    manifest.write(out)?;
    Ok(manifest)
}

fn create(out: &Path, name: &str, manifest: &mut RunManifest) -> Result<BufWriter<File>, HarnessError> {
    manifest.file(name);
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",")
}

fn run_eigen(config: &Config, out: &Path, manifest: &mut RunManifest) -> Result<(), HarnessError> {
    let grid = config.grid()?;
    let params = config.params();
    let solution = solve(&grid, &params)?;
    solution.write_csv(create(out, "eigen.csv", manifest)?)?;
    resonance_catalog(&solution, params.omega1)?
        .write_csv(create(out, "resonance_catalog.csv", manifest)?)?;
    if config.run.wavefunctions {
        for level in Level::ALL {
            let name = format!("wavefunction_{}.csv", level.label());
            solution.write_wavefunction_csv(level, create(out, &name, manifest)?)?;
        }
    }
    manifest.point(0, params.gamma, Ok(()));
    Ok(())
}

fn run_single(
    config: &Config,
    out: &Path,
    force_spectrum: bool,
    manifest: &mut RunManifest,
) -> Result<(), HarnessError> {
    let kind = if force_spectrum { ScanKind::Spectrum } else { ScanKind::SingleRun };
    ScanSpec::from_config(kind, config)?;
    let grid = config.grid()?;
    let params = config.params();
    let solution = solve(&grid, &params)?;
    let catalog = resonance_catalog(&solution, params.omega1)?;
    let point = driven_run(config, &grid, &params, &solution)?;
    point.record.write_csv(create(out, "trajectory.csv", manifest)?)?;
    catalog.write_csv(create(out, "resonance_catalog.csv", manifest)?)?;

    if config.run.four_state {
        let model = build_four_state(&solution, &params)?;
        let interval = config.run.dt * config.run.sample_stride as f64;
        let traj = integrate_four_state(
            &model,
            &FourStateAmplitudes::left_lower(),
            point.window,
            recommended_dt(&model),
            interval,
        )?;
        traj.write_csv(create(out, "four_state.csv", manifest)?)?;
    }
    if config.run.spectrum || force_spectrum {
        let mut spectrum = beat_spectrum(
            &point.record.p_left(),
            &point.record.times(),
            config.run.spectrum_resolution,
        )?;
        spectrum.label_peaks(&catalog.beat_frequencies(params.omega));
        spectrum.write_csv(create(out, "spectrum.csv", manifest)?)?;
        spectrum.write_peaks_csv(create(out, "spectrum_peaks.csv", manifest)?)?;
    }
    manifest.point(0, params.omega, Ok(()));
    Ok(())
}

const AVERAGES_COLUMNS: &str = "window,p_left,p_right,sx,sy,sz,p11,p12,p21,p22,min_p_all";

fn averages_row(value: f64, p: &DynamicsPoint) -> String {
    let a = &p.averages;
    join(&[
        value, p.window, a.p_left, a.p_right, a.sx, a.sy, a.sz, a.p[0], a.p[1], a.p[2], a.p[3],
        p.min_p_all,
    ])
}

/// Records every outcome in the manifest and writes the successful rows in
/// sweep order.
fn write_rows<T, W: Write>(
    mut w: W,
    header: &str,
    outcomes: &[PointOutcome<T>],
    manifest: &mut RunManifest,
    row: impl Fn(f64, &T) -> String,
) -> Result<(), HarnessError> {
    writeln!(w, "{header}")?;
    for o in outcomes {
        match &o.result {
            Ok(v) => {
                writeln!(w, "{}", row(o.value, v))?;
                manifest.point(o.index, o.value, Ok(()));
            }
            Err(e) => manifest.point(o.index, o.value, Err(e)),
        }
    }
    w.flush()?;
    Ok(())
}

fn run_omega_scan(
    config: &Config,
    out: &Path,
    workers: usize,
    manifest: &mut RunManifest,
) -> Result<(), HarnessError> {
    let spec = ScanSpec::from_config(ScanKind::OmegaScan, config)?;
    let grid = config.grid()?;
    let solution = solve(&grid, &config.params())?;
    let outcomes = run_points(&spec.values(), workers, |omega| {
        omega_point(config, &grid, &solution, omega).map(|mut p| {
            p.record = Default::default();
            p
        })
    })?;
    let w = create(out, "omega_scan.csv", manifest)?;
    write_rows(w, &format!("omega,{AVERAGES_COLUMNS}"), &outcomes, manifest, averages_row)
}

fn run_gamma_scan(
    config: &Config,
    out: &Path,
    workers: usize,
    manifest: &mut RunManifest,
) -> Result<(), HarnessError> {
    let spec = ScanSpec::from_config(ScanKind::GammaScan, config)?;
    let grid = config.grid()?;
    let outcomes = run_points(&spec.values(), workers, |gamma| {
        gamma_point(config, &grid, gamma).map(|mut p| {
            p.record = Default::default();
            p
        })
    })?;
    let w = create(out, "gamma_scan.csv", manifest)?;
    write_rows(w, &format!("gamma,{AVERAGES_COLUMNS}"), &outcomes, manifest, averages_row)
}

fn run_coupling_scan(
    config: &Config,
    out: &Path,
    workers: usize,
    manifest: &mut RunManifest,
) -> Result<(), HarnessError> {
    let spec = ScanSpec::from_config(ScanKind::CouplingScan, config)?;
    let grid = config.grid()?;
    let outcomes = run_points(&spec.values(), workers, |gamma| coupling_point(config, &grid, gamma))?;
    let header = "gamma,delta_e_lower,delta_e_upper,omega_11_21,v_11_21,omega_11_22,v_11_22,omega_12_21,v_12_21,omega_12_22,v_12_22,scenario";
    let w = create(out, "coupling_scan.csv", manifest)?;
    write_rows(w, header, &outcomes, manifest, |gamma, p| {
        let mut cells = vec![gamma, p.delta_e_lower, p.delta_e_upper];
        for e in &p.catalog.entries {
            cells.push(e.omega_res);
            cells.push(e.coupling);
        }
        format!("{},{}", join(&cells), p.catalog.scenario)
    })
}

fn run_quasienergy_scan(
    config: &Config,
    out: &Path,
    workers: usize,
    manifest: &mut RunManifest,
) -> Result<(), HarnessError> {
    let spec = ScanSpec::from_config(ScanKind::QuasienergyScan, config)?;
    let grid = config.grid()?;
    let base = config.params();
    let shared = match spec.axis {
        SweepAxis::Omega => Some(solve(&grid, &base)?),
        SweepAxis::Gamma => None,
    };
    let outcomes = run_points(&spec.values(), workers, |value| {
        let params = match spec.axis {
            SweepAxis::Omega => ModelParams { omega: value, ..base },
            SweepAxis::Gamma => ModelParams { gamma: value, ..base },
        };
        quasienergy_point(&params, &grid, shared.as_ref())
    })?;
    let mut tracked = Vec::with_capacity(outcomes.len());
    let mut orders = create(out, "multiphoton.csv", manifest)?;
    writeln!(orders, "sweep_value,photon_order,residual")?;
    for o in &outcomes {
        match &o.result {
            Ok(p) => {
                tracked.push((o.value, p.quasienergies.clone()));
                writeln!(
                    orders,
                    "{},{},{}",
                    fmt_num(o.value),
                    p.photon_order,
                    fmt_num(p.photon_residual)
                )?;
                manifest.point(o.index, o.value, Ok(()));
            }
            Err(e) => manifest.point(o.index, o.value, Err(e)),
        }
    }
    orders.flush()?;
    QuasienergySpectrum::track(&tracked).write_csv(create(out, "quasienergy.csv", manifest)?)?;
    Ok(())
}
