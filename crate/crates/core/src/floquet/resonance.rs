//! First-order effective two-level description of one-photon resonances
//! between the lower and the upper doublet.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::stationary::{EigenSolution, Level};

/// Couplings below this are treated as symmetry-forbidden.
const FORBIDDEN_COUPLING: f64 = 1e-6;
/// Doublets split by less than this count as degenerate.
const DEGENERATE_SPLITTING: f64 = 1e-3;
/// Two resonances closer than this many couplings overlap.
const OVERLAP_FACTOR: f64 = 5.0;
const MAX_WINDOW: f64 = 5000.0;
const DEFAULT_WINDOW: f64 = 2000.0;
const WINDOW_PERIODS: f64 = 6.0;
const NEAR_RESONANCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveTwoLevel {
    pub alpha: Level,
    pub beta: Level,
    /// `V = Omega1 <alpha|sigma_x|beta> / 2`.
    pub coupling: f64,
    /// `E12 - E11`.
    pub delta_e: f64,
    /// `E22 - E21`.
    pub delta_e_upper: f64,
    /// `E_beta - E_alpha`.
    pub omega_res: f64,
    /// `E_alpha - E0` and `E_beta - E0`.
    pub epsilon_alpha: f64,
    pub epsilon_beta: f64,
    pub photon_order: u32,
    pub allowed: bool,
}

pub fn effective_coupling(
    solution: &EigenSolution,
    alpha: Level,
    beta: Level,
    omega1: f64,
) -> Result<EffectiveTwoLevel> {
    if !alpha.is_lower() || beta.is_lower() {
        return Err(Error::InvalidParameter {
            name: "alpha/beta",
            reason: format!("expected a lower-doublet alpha and an upper-doublet beta, got {alpha} and {beta}"),
        });
    }
    let gamma = solution.sigma_x_matrix()[alpha.index()][beta.index()].re;
    let coupling = 0.5 * omega1 * gamma;
    Ok(EffectiveTwoLevel {
        alpha,
        beta,
        coupling,
        delta_e: solution.lower_splitting(),
        delta_e_upper: solution.upper_splitting(),
        omega_res: solution.energy(beta) - solution.energy(alpha),
        epsilon_alpha: solution.energy(alpha) - solution.e0,
        epsilon_beta: solution.energy(beta) - solution.e0,
        photon_order: 1,
        allowed: coupling.abs() >= FORBIDDEN_COUPLING,
    })
}

/// Resonant Rabi amplitudes `(c_alpha, c_beta)` starting from `alpha`.
pub fn rabi_solution(two_level: &EffectiveTwoLevel, t: f64) -> [Complex64; 2] {
    let v = two_level.coupling.abs();
    [
        Complex64::from_polar((v * t).cos(), -two_level.epsilon_alpha * t),
        Complex64::new(0.0, (v * t).sin()) * Complex64::from_polar(1.0, -two_level.epsilon_beta * t),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Degenerate lower doublet, one resonance addressed at a time.
    DegenerateSingle,
    /// Split doublets, isolated resonances.
    NondegenerateSingle,
    /// Split doublets, two resonances at the same frequency.
    NondegenerateDouble,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::DegenerateSingle => "degenerate-single",
            Scenario::NondegenerateSingle => "nondegenerate-single",
            Scenario::NondegenerateDouble => "nondegenerate-double",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelData {
    /// `|V|`.
    pub coupling: f64,
    /// `E12 - E11`.
    pub delta_e: f64,
}

/// Closed-form left-well probability for an initial `|1->`.
pub fn analytic_p_left(scenario: Scenario, data: &TwoLevelData, t: f64) -> Result<f64> {
    let v = data.coupling.abs();
    let de = data.delta_e.abs();
    if !v.is_finite() || !de.is_finite() {
        return Err(Error::ScenarioMismatch("non-finite two-level data".into()));
    }
    let degenerate = de < DEGENERATE_SPLITTING;
    match scenario {
        Scenario::DegenerateSingle if !degenerate => Err(Error::ScenarioMismatch(format!(
            "degenerate scenario with splitting {de:e}"
        ))),
        Scenario::NondegenerateSingle | Scenario::NondegenerateDouble if degenerate => {
            Err(Error::ScenarioMismatch(format!(
                "{scenario} scenario with splitting {de:e}"
            )))
        }
        Scenario::DegenerateSingle => Ok(0.5 + 0.5 * (v * t).cos()),
        Scenario::NondegenerateSingle => {
            Ok(0.5 + 0.25 * (((v + de) * t).cos() + ((v - de) * t).cos()))
        }
        Scenario::NondegenerateDouble => {
            Ok(0.5 + 0.25 * (((2.0 * v + de) * t).cos() + ((2.0 * v - de) * t).cos()))
        }
    }
}

/// Which lower/upper pairs share a `sigma_x P` label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pathways {
    /// `11 <-> 21` and `12 <-> 22`.
    Parallel,
    /// `11 <-> 22` and `12 <-> 21`.
    Crossed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceCatalog {
    /// `11->21, 11->22, 12->21, 12->22`.
    pub entries: [EffectiveTwoLevel; 4],
    pub scenario: Scenario,
    pub pathways: Pathways,
}

pub fn resonance_catalog(solution: &EigenSolution, omega1: f64) -> Result<ResonanceCatalog> {
    let pairs = [
        (Level::L11, Level::L21),
        (Level::L11, Level::L22),
        (Level::L12, Level::L21),
        (Level::L12, Level::L22),
    ];
    let mut entries = Vec::with_capacity(4);
    for (a, b) in pairs {
        entries.push(effective_coupling(solution, a, b, omega1)?);
    }
    let entries: [EffectiveTwoLevel; 4] = entries.try_into().expect("four pairs");
    let pathways = if solution.sxp_labels[0] == solution.sxp_labels[2] {
        Pathways::Parallel
    } else {
        Pathways::Crossed
    };
    let scenario = if solution.lower_splitting().abs() < DEGENERATE_SPLITTING {
        Scenario::DegenerateSingle
    } else {
        let allowed: Vec<&EffectiveTwoLevel> = entries.iter().filter(|e| e.allowed).collect();
        let overlapping = allowed.iter().enumerate().any(|(i, a)| {
            allowed[..i].iter().any(|b| {
                let vmax = a.coupling.abs().max(b.coupling.abs());
                (a.omega_res - b.omega_res).abs() < OVERLAP_FACTOR * vmax
            })
        });
        if overlapping {
            Scenario::NondegenerateDouble
        } else {
            Scenario::NondegenerateSingle
        }
    };
    Ok(ResonanceCatalog {
        entries,
        scenario,
        pathways,
    })
}

impl ResonanceCatalog {
    pub fn allowed(&self) -> impl Iterator<Item = &EffectiveTwoLevel> {
        self.entries.iter().filter(|e| e.allowed)
    }

    pub fn entry(&self, alpha: Level, beta: Level) -> Option<&EffectiveTwoLevel> {
        self.entries
            .iter()
            .find(|e| e.alpha == alpha && e.beta == beta)
    }

    /// Allowed resonance with `omega_res` closest to `omega`.
    pub fn resonance_near(&self, omega: f64) -> Option<&EffectiveTwoLevel> {
        self.allowed().min_by(|a, b| {
            (a.omega_res - omega)
                .abs()
                .total_cmp(&(b.omega_res - omega).abs())
        })
    }

    /// Two-level parameters for the closed forms at drive frequency `omega`.
    /// In the overlapping case the two couplings are averaged.
    pub fn two_level_data(&self, omega: f64) -> Option<TwoLevelData> {
        let near = self.resonance_near(omega)?;
        let coupling = match self.scenario {
            Scenario::NondegenerateDouble => {
                let close: Vec<f64> = self
                    .allowed()
                    .filter(|e| {
                        (e.omega_res - near.omega_res).abs()
                            < OVERLAP_FACTOR * e.coupling.abs().max(near.coupling.abs())
                    })
                    .map(|e| e.coupling.abs())
                    .collect();
                close.iter().sum::<f64>() / close.len() as f64
            }
            _ => near.coupling.abs(),
        };
        Some(TwoLevelData {
            coupling,
            delta_e: near.delta_e,
        })
    }

    /// Frequencies present in the closed-form `P_L(t)` at drive `omega`:
    /// `|V|` (degenerate), `f1, f2 = |V| +- dE` (single) or
    /// `f3, f4 = 2|V| +- dE` (double), all taken as magnitudes.
    pub fn beat_frequencies(&self, omega: f64) -> Vec<(String, f64)> {
        let Some(d) = self.two_level_data(omega) else {
            return Vec::new();
        };
        let (v, de) = (d.coupling.abs(), d.delta_e.abs());
        match self.scenario {
            Scenario::DegenerateSingle => vec![("V".into(), v)],
            Scenario::NondegenerateSingle => {
                vec![("f1".into(), v + de), ("f2".into(), (v - de).abs())]
            }
            Scenario::NondegenerateDouble => vec![
                ("f3".into(), 2.0 * v + de),
                ("f4".into(), (2.0 * v - de).abs()),
            ],
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,beta,omega_res,coupling,allowed,scenario")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                e.alpha.label(),
                e.beta.label(),
                fmt_num(e.omega_res),
                fmt_num(e.coupling),
                e.allowed,
                self.scenario
            )?;
        }
        Ok(())
    }
}

/// Averaging window for a drive at `omega`: six Rabi periods `2 pi/|V|` of
/// the nearest allowed resonance, capped at 5000, when the drive lies within
/// ten couplings of it; 2000 otherwise.
pub fn averaging_window(catalog: &ResonanceCatalog, omega: f64) -> f64 {
    match catalog.resonance_near(omega) {
        Some(e) if (omega - e.omega_res).abs() <= NEAR_RESONANCE * e.coupling.abs() => {
            (WINDOW_PERIODS * 2.0 * PI / e.coupling.abs()).min(MAX_WINDOW)
        }
        _ => DEFAULT_WINDOW,
    }
}

/// Integer `m >= 1` minimizing `|m omega - (E22 - E11)|`, with the signed
/// residual `m omega - (E22 - E11)`.
pub fn multiphoton_order(solution: &EigenSolution, omega: f64) -> Result<(u32, f64)> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: format!("must be positive, got {omega}"),
        });
    }
    let gap = solution.energy(Level::L22) - solution.energy(Level::L11);
    Ok(order_for_gap(gap, omega))
}

pub(crate) fn order_for_gap(gap: f64, omega: f64) -> (u32, f64) {
    let m = (gap / omega).round().max(1.0);
    (m as u32, m * omega - gap)
}
