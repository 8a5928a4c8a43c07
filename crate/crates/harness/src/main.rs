use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};
use socwell::{execute, Command, Config};

#[derive(Parser)]
#[command(name = "socwell", version, about = "Driven spin-orbit-coupled double well: eigenstructure, dynamics and scans")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML config file; defaults are used for missing keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for scans (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Accepted for compatibility; every computation is deterministic
    #[arg(long, global = true)]
    seedless: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Four lowest eigenstates, symmetry table and resonance catalog
    Eigen,
    /// One driven run from |1->
    Single,
    /// One driven run plus the beat spectrum of P_L
    Spectrum,
    /// Time averages against the drive frequency
    ScanOmega,
    /// Time averages against the SOC strength
    ScanGamma,
    /// Effective couplings against the SOC strength
    Coupling,
    /// Folded four-state quasienergies against gamma or omega
    Quasienergy,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Eigen => Command::Eigen,
            Cmd::Single => Command::Single,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::ScanOmega => Command::ScanOmega,
            Cmd::ScanGamma => Command::ScanGamma,
            Cmd::Coupling => Command::Coupling,
            Cmd::Quasienergy => Command::Quasienergy,
        }
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => Config::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => Config::default(),
    };
    let command = Command::from(cli.command);
    let manifest = execute(command, &config, &cli.out, cli.workers)
        .with_context(|| format!("running {}", command.name()))?;
    for f in &manifest.files {
        println!("{}", cli.out.join(&f.name).display());
    }
    let failed = manifest.failed_points();
    if failed > 0 {
        eprintln!("{failed} of {} points failed; see manifest.toml", manifest.points.len());
    }
    Ok(())
}
