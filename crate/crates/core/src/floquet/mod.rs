//! Four-state reduction of the driven problem and its Floquet spectrum.
//!
//! Amplitudes `c = [c11, c12, c21, c22]` obey
//! `i dc/dt = (diag(E_ij - E0) + Omega1 cos(omega t) Gamma) c` with
//! `Gamma_mn = <m|sigma_x|n>`.

pub mod resonance;

pub use resonance::{
    analytic_p_left, averaging_window, effective_coupling, multiphoton_order, rabi_solution,
    resonance_catalog, EffectiveTwoLevel, Pathways, ResonanceCatalog, Scenario, TwoLevelData,
};

use std::f64::consts::PI;
use std::io::Write;

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::model::ModelParams;
use crate::stationary::{EigenSolution, Level};

const GAMMA_TOL: f64 = 1e-8;
const UNITARITY_TOL: f64 = 1e-8;
/// Target `|H| dt` for RK4; keeps the per-step norm defect near 1e-16.
const RK4_PHASE_STEP: f64 = 0.005;

type C4 = [Complex64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourStateModel {
    /// `E_ij - E0`.
    pub h0_diag: [f64; 4],
    pub gamma_matrix: [[f64; 4]; 4],
    pub omega1: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourStateAmplitudes {
    pub c: C4,
    pub t: f64,
}

impl FourStateAmplitudes {
    pub fn new(c: C4) -> Self {
        Self { c, t: 0.0 }
    }

    /// `|1->` expressed in the eigenbasis.
    pub fn left_lower() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::new([
            Complex64::new(-h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::default(),
            Complex64::default(),
        ])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> [f64; 4] {
        self.c.map(|z| z.norm_sqr())
    }
}

/// Builds the reduced model, rejecting a `Gamma` that is not real symmetric.
pub fn build_four_state(solution: &EigenSolution, params: &ModelParams) -> Result<FourStateModel> {
    let raw = solution.sigma_x_matrix();
    let mut deviation = 0.0f64;
    for m in 0..4 {
        for n in 0..4 {
            deviation = deviation
                .max(raw[m][n].im.abs())
                .max((raw[m][n] - raw[n][m]).norm());
        }
    }
    if deviation > GAMMA_TOL {
        return Err(Error::GammaNotReal { deviation });
    }
    let gamma_matrix = std::array::from_fn(|m| std::array::from_fn(|n| raw[m][n].re));
    Ok(FourStateModel {
        h0_diag: solution.energies.map(|e| e - solution.e0),
        gamma_matrix,
        omega1: params.omega1,
        omega: params.omega,
    })
}

impl FourStateModel {
    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    pub fn gamma(&self, a: Level, b: Level) -> f64 {
        self.gamma_matrix[a.index()][b.index()]
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// Upper bound on `max_t |H(t)|`.
    pub fn norm_bound(&self) -> f64 {
        let diag = self.h0_diag.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        let row = self
            .gamma_matrix
            .iter()
            .map(|r| r.iter().map(|g| g.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        diag + self.omega1 * row
    }

    fn derivative(&self, t: f64, c: &C4) -> C4 {
        let drive = self.omega1 * (self.omega * t).cos();
        std::array::from_fn(|m| {
            let mut acc = c[m] * self.h0_diag[m];
            for n in 0..4 {
                acc += c[n] * (drive * self.gamma_matrix[m][n]);
            }
            Complex64::new(acc.im, -acc.re)
        })
    }

    fn rk4(&self, t: f64, dt: f64, c: &C4) -> C4 {
        let axpy = |a: &C4, s: f64, b: &C4| -> C4 { std::array::from_fn(|i| a[i] + b[i] * s) };
        let k1 = self.derivative(t, c);
        let k2 = self.derivative(t + 0.5 * dt, &axpy(c, 0.5 * dt, &k1));
        let k3 = self.derivative(t + 0.5 * dt, &axpy(c, 0.5 * dt, &k2));
        let k4 = self.derivative(t + dt, &axpy(c, dt, &k3));
        std::array::from_fn(|i| c[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
    }
}

/// `min(T/200, 0.005/|H|)`.
pub fn recommended_dt(model: &FourStateModel) -> f64 {
    let by_norm = RK4_PHASE_STEP / model.norm_bound().max(1e-12);
    if model.omega > 0.0 {
        by_norm.min(model.period() / 200.0)
    } else {
        by_norm
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FourStateTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<C4>,
}

impl FourStateTrajectory {
    pub fn population(&self, level: Level) -> Vec<f64> {
        self.amplitudes
            .iter()
            .map(|c| c[level.index()].norm_sqr())
            .collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|c| (c.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,p11,p12,p21,p22")?;
        for (t, c) in self.times.iter().zip(&self.amplitudes) {
            let cells: Vec<String> = c.iter().map(|z| fmt_num(z.norm_sqr())).collect();
            writeln!(w, "{},{}", fmt_num(*t), cells.join(","))?;
        }
        Ok(())
    }
}

/// RK4 integration from `c0.t` to `t_final`, sampled every `sample_interval`
/// (sample times `c0.t + k * sample_interval`). Each interval is split into
/// equal substeps no longer than `dt`.
pub fn integrate_four_state(
    model: &FourStateModel,
    c0: &FourStateAmplitudes,
    t_final: f64,
    dt: f64,
    sample_interval: f64,
) -> Result<FourStateTrajectory> {
    if !(dt > 0.0) || !(sample_interval > 0.0) || !(t_final >= c0.t) {
        return Err(Error::InvalidPlan(format!(
            "need dt > 0, sample_interval > 0 and t_final >= t0 (dt = {dt}, interval = {sample_interval}, t_final = {t_final})"
        )));
    }
    if model.omega > 0.0 && model.omega1 != 0.0 && dt > model.period() / 200.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidPlan(format!(
            "dt = {dt} exceeds 1/200 of the drive period"
        )));
    }
    let intervals = ((t_final - c0.t) / sample_interval + 1e-9).floor() as usize;
    let substeps = (sample_interval / dt).ceil().max(1.0) as usize;
    let h = sample_interval / substeps as f64;
    let mut out = FourStateTrajectory {
        times: Vec::with_capacity(intervals + 1),
        amplitudes: Vec::with_capacity(intervals + 1),
    };
    let mut c = c0.c;
    out.times.push(c0.t);
    out.amplitudes.push(c);
    for k in 0..intervals {
        let start = c0.t + k as f64 * sample_interval;
        for s in 0..substeps {
            c = model.rk4(start + s as f64 * h, h, &c);
        }
        let t = c0.t + (k + 1) as f64 * sample_interval;
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        out.times.push(t);
        out.amplitudes.push(c);
    }
    Ok(out)
}

/// Folded quasienergies `lambda / (omega/2)` in `(-1, 1]`, sorted ascending,
/// with the matching Floquet vectors at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quasienergies {
    pub folded: [f64; 4],
    pub vectors: [C4; 4],
    pub omega: f64,
}

impl Quasienergies {
    /// Distance between two quasienergies on the zone circle, in energy units.
    pub fn gap(&self, i: usize, j: usize) -> f64 {
        let d = (self.folded[i] - self.folded[j]).abs().rem_euclid(2.0);
        d.min(2.0 - d) * 0.5 * self.omega
    }
}

fn fold(x: f64) -> f64 {
    let y = (x + 1.0).rem_euclid(2.0) - 1.0;
    if y <= -1.0 {
        y + 2.0
    } else {
        y
    }
}

/// One-period evolution operator, integrated with a whole number of RK4
/// steps, as `u[row][col]`.
pub fn monodromy(model: &FourStateModel) -> Result<[C4; 4]> {
    if !(model.omega > 0.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            reason: "the drive frequency must be positive".into(),
        });
    }
    let period = model.period();
    let steps = ((period * model.norm_bound() / RK4_PHASE_STEP).ceil() as usize).max(200);
    let h = period / steps as f64;
    let mut cols: [C4; 4] = std::array::from_fn(|j| {
        std::array::from_fn(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
    });
    for s in 0..steps {
        let t = s as f64 * h;
        for col in cols.iter_mut() {
            *col = model.rk4(t, h, col);
        }
    }
    let mut deviation = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let z: Complex64 = (0..4).map(|i| cols[a][i].conj() * cols[b][i]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            deviation = deviation.max((z - want).norm());
        }
    }
    if deviation > UNITARITY_TOL {
        return Err(Error::NonUnitary { deviation });
    }
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| cols[j][i])))
}

pub fn quasienergies(model: &FourStateModel) -> Result<Quasienergies> {
    let u = monodromy(model)?;
    let mat = Mat::<Complex64>::from_fn(4, 4, |i, j| u[i][j]);
    let evd = mat
        .eigen()
        .map_err(|e| Error::LinearAlgebra(format!("{e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    let mut pairs: Vec<(f64, C4)> = (0..4)
        .map(|k| {
            let mu: Complex64 = values[k];
            let mut v: C4 = std::array::from_fn(|i| vectors[(i, k)]);
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            (fold(-mu.arg() / PI), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Quasienergies {
        folded: std::array::from_fn(|i| pairs[i].0),
        vectors: std::array::from_fn(|i| pairs[i].1),
        omega: model.omega,
    })
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|i| (0..i).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Quasienergies along a sweep; `lambdas[p]` is sorted ascending and
/// `branch_ids[p][i]` names the continuous branch through `lambdas[p][i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuasienergySpectrum {
    pub sweep_values: Vec<f64>,
    pub lambdas: Vec<[f64; 4]>,
    pub branch_ids: Vec<[usize; 4]>,
}

impl QuasienergySpectrum {
    /// Links neighbouring points by the slot assignment with the largest
    /// total squared eigenvector overlap.
    pub fn track(points: &[(f64, Quasienergies)]) -> Self {
        let perms = permutations4();
        let mut out = Self::default();
        let mut prev: Option<(&Quasienergies, [usize; 4])> = None;
        for (value, q) in points {
            let ids = match prev {
                None => [0, 1, 2, 3],
                Some((pq, pids)) => {
                    let overlap = |a: &C4, b: &C4| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| x.conj() * y)
                            .sum::<Complex64>()
                            .norm_sqr()
                    };
                    let best = perms
                        .iter()
                        .max_by(|p1, p2| {
                            let score = |p: &[usize; 4]| -> f64 {
                                (0..4).map(|i| overlap(&pq.vectors[i], &q.vectors[p[i]])).sum()
                            };
                            score(p1).total_cmp(&score(p2))
                        })
                        .expect("24 permutations");
                    let mut ids = [0; 4];
                    for i in 0..4 {
                        ids[best[i]] = pids[i];
                    }
                    ids
                }
            };
            out.sweep_values.push(*value);
            out.lambdas.push(q.folded);
            out.branch_ids.push(ids);
            prev = Some((q, ids));
        }
        out
    }

    /// Values of one tracked branch along the sweep.
    pub fn branch(&self, id: usize) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(&self.branch_ids)
            .map(|(l, ids)| {
                let slot = ids.iter().position(|b| *b == id).expect("branch present");
                l[slot]
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "sweep_value,lambda1,lambda2,lambda3,lambda4,branch_id1,branch_id2,branch_id3,branch_id4"
        )?;
        for ((v, l), ids) in self.sweep_values.iter().zip(&self.lambdas).zip(&self.branch_ids) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_num(*v),
                fmt_num(l[0]),
                fmt_num(l[1]),
                fmt_num(l[2]),
                fmt_num(l[3]),
                ids[0] + 1,
                ids[1] + 1,
                ids[2] + 1,
                ids[3] + 1
            )?;
        }
        Ok(())
    }
}

/// Minimum quasienergy splitting near a one-photon resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvoidedCrossing {
    pub omega: f64,
    pub gap: f64,
}

/// Gap between the two Floquet states carrying the most weight on `alpha` and
/// `beta`, as a function of `omega`.
pub fn resonance_gap(model: &FourStateModel, alpha: Level, beta: Level, omega: f64) -> Result<f64> {
    let q = quasienergies(&model.with_omega(omega))?;
    let mut weights: Vec<(usize, f64)> = (0..4)
        .map(|i| {
            let v = &q.vectors[i];
            (i, v[alpha.index()].norm_sqr() + v[beta.index()].norm_sqr())
        })
        .collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(q.gap(weights[0].0, weights[1].0))
}

/// Golden-section search for the minimum of [`resonance_gap`] over
/// `[omega_lo, omega_hi]`.
pub fn avoided_crossing(
    model: &FourStateModel,
    alpha: Level,
    beta: Level,
    omega_lo: f64,
    omega_hi: f64,
    tol: f64,
) -> Result<AvoidedCrossing> {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (omega_lo, omega_hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = resonance_gap(model, alpha, beta, c)?;
    let mut fd = resonance_gap(model, alpha, beta, d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = resonance_gap(model, alpha, beta, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = resonance_gap(model, alpha, beta, d)?;
        }
    }
    let (omega, gap) = if fc < fd { (c, fc) } else { (d, fd) };
    Ok(AvoidedCrossing { omega, gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FourStateModel {
        FourStateModel {
            h0_diag: [-0.9, -0.85, 0.85, 0.9],
            gamma_matrix: [
                [0.3, 0.0, 0.05, 0.0],
                [0.0, -0.2, 0.0, 0.04],
                [0.05, 0.0, 0.1, 0.0],
                [0.0, 0.04, 0.0, -0.1],
            ],
            omega1: 0.1,
            omega: 1.75,
        }
    }

    #[test]
    fn fold_range() {
        assert_eq!(fold(-1.0), 1.0);
        assert_eq!(fold(1.0), 1.0);
        assert!((fold(2.5) - 0.5).abs() < 1e-15);
        assert!((fold(-2.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn undriven_populations_are_constant() {
        let model = FourStateModel {
            omega1: 0.0,
            ..toy()
        };
        let c0 = FourStateAmplitudes::new([
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]);
        let traj = integrate_four_state(&model, &c0, 200.0, 0.01, 1.0).unwrap();
        assert_eq!(traj.times.len(), 201);
        for c in &traj.amplitudes {
            for z in c {
                assert!((z.norm() - 0.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn norm_is_conserved_under_drive() {
        let model = toy();
        let dt = recommended_dt(&model);
        let traj =
            integrate_four_state(&model, &FourStateAmplitudes::left_lower(), 2000.0, dt, 5.0).unwrap();
        assert!(traj.max_norm_drift() < 1e-9);
    }

    #[test]
    fn integrator_rejects_coarse_step() {
        let model = toy();
        let err = integrate_four_state(&model, &FourStateAmplitudes::left_lower(), 1.0, 0.1, 0.5);
        assert!(matches!(err, Err(Error::InvalidPlan(_))));
    }

    #[test]
    fn undriven_quasienergies_are_folded_energies() {
        let model = FourStateModel {
            omega1: 0.0,
            ..toy()
        };
        let q = quasienergies(&model).unwrap();
        let mut want: Vec<f64> = model.h0_diag.iter().map(|h| fold(h / (0.5 * model.omega))).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in q.folded.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn monodromy_is_unitary() {
        let u = monodromy(&toy()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let z: Complex64 = (0..4).map(|i| u[i][a].conj() * u[i][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((z - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn two_level_gap_is_twice_coupling() {
        // pure two-level resonance, rotating-wave regime
        let model = FourStateModel {
            h0_diag: [-0.5, -10.0, 0.5, 10.0],
            gamma_matrix: [
                [0.0, 0.0, 0.02, 0.0],
                [0.0, 0.0, 0.0, 0.0],
                [0.02, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ],
            omega1: 0.1,
            omega: 1.0,
        };
        let v = 0.1 * 0.02 / 2.0;
        let ac = avoided_crossing(&model, Level::L11, Level::L21, 0.99, 1.01, 1e-7).unwrap();
        assert!((ac.gap - 2.0 * v).abs() < 0.02 * 2.0 * v, "gap {}", ac.gap);
        assert!((ac.omega - 1.0).abs() < 1e-4);
    }

    #[test]
    fn branch_tracking_follows_crossing_levels() {
        // two undriven levels crossing as the sweep value changes
        let points: Vec<(f64, Quasienergies)> = (0..20)
            .map(|i| {
                let s = -0.19 + 0.02 * i as f64;
                let model = FourStateModel {
                    h0_diag: [s, -s, 0.6, -0.6],
                    gamma_matrix: [[0.0; 4]; 4],
                    omega1: 0.0,
                    omega: 2.0,
                };
                (s, quasienergies(&model).unwrap())
            })
            .collect();
        let spec = QuasienergySpectrum::track(&points);
        let ids0 = spec.branch_ids[0];
        // branch on slot holding +s at the start keeps following +s
        let slot = (0..4).find(|&i| (spec.lambdas[0][i] - (-0.19)).abs() < 1e-9).unwrap();
        let series = spec.branch(ids0[slot]);
        for (v, l) in spec.sweep_values.iter().zip(series) {
            assert!((l - v).abs() < 1e-8);
        }
        let mut buf = Vec::new();
        spec.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 21);
    }

    #[test]
    fn permutations_are_distinct() {
        let p = permutations4();
        assert_eq!(p.len(), 24);
        for i in 0..24 {
            for j in 0..i {
                assert_ne!(p[i], p[j]);
            }
        }
    }
}
