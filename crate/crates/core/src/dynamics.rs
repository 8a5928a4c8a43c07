//! Split-step Fourier propagation of the driven spinor equation
//! `i dPsi/dt = [H0 + Omega1 cos(omega t) sigma_x] Psi`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{sample_potential, ModelParams, SpatialGrid, SpinorField};
use crate::observables::{Probes, TrajectoryRecord};
use crate::stationary::odd_momentum;

/// `Omega(t) = Omega0 + Omega1 cos(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveProtocol {
    pub omega0: f64,
    pub omega1: f64,
    pub omega: f64,
}

impl DriveProtocol {
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            omega0: params.omega0,
            omega1: params.omega1,
            omega: params.omega,
        }
    }

    pub fn rabi(&self, t: f64) -> f64 {
        self.omega0 + self.omega1 * (self.omega * t).cos()
    }

    /// Drive period, or `None` when the modulation is off.
    pub fn period(&self) -> Option<f64> {
        (self.omega1 != 0.0 && self.omega > 0.0).then(|| 2.0 * PI / self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between recorded samples.
    pub sample_stride: usize,
}

impl PropagationPlan {
    pub fn new(dt: f64, t_final: f64, sample_stride: usize) -> Self {
        Self {
            dt,
            t_final,
            sample_stride,
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidPlan(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= self.dt) || !self.t_final.is_finite() {
            return Err(Error::InvalidPlan(format!(
                "t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidPlan("sample_stride must be at least 1".into()));
        }
        if let Some(period) = DriveProtocol::from_params(params).period() {
            if self.dt > period / 100.0 {
                return Err(Error::InvalidPlan(format!(
                    "dt = {} exceeds one hundredth of the drive period {period}",
                    self.dt
                )));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

/// Strang splitting with precomputed phase tables. Consecutive position
/// half-steps are fused, so a step costs four FFTs.
pub struct SplitStepPropagator {
    drive: DriveProtocol,
    dt: f64,
    half_phase: Vec<Complex64>,
    full_phase: Vec<Complex64>,
    kinetic_up: Vec<Complex64>,
    kinetic_down: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl fmt::Debug for SplitStepPropagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitStepPropagator")
            .field("drive", &self.drive)
            .field("dt", &self.dt)
            .field("n", &self.half_phase.len())
            .finish()
    }
}

impl SplitStepPropagator {
    /// `dt` may be negative to run backwards in time.
    pub fn new(grid: &SpatialGrid, params: &ModelParams, dt: f64) -> Result<Self> {
        params.validate()?;
        if dt == 0.0 || !dt.is_finite() {
            return Err(Error::InvalidPlan(format!("invalid time step {dt}")));
        }
        let n = grid.n();
        let potential = sample_potential(grid, params);
        let phase = |angle: f64| Complex64::from_polar(1.0, angle);
        let inv_n = 1.0 / n as f64;
        let kinetic = |sign: f64| -> Vec<Complex64> {
            grid.k()
                .iter()
                .zip(odd_momentum(grid))
                .map(|(k, q)| phase(-dt * (0.5 * k * k - sign * params.gamma * q)) * inv_n)
                .collect()
        };
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Ok(Self {
            drive: DriveProtocol::from_params(params),
            dt,
            half_phase: potential.iter().map(|v| phase(-0.5 * dt * v)).collect(),
            full_phase: potential.iter().map(|v| phase(-dt * v)).collect(),
            kinetic_up: kinetic(1.0),
            kinetic_down: kinetic(-1.0),
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn half_angle(&self, t: f64) -> f64 {
        0.5 * self.drive.rabi(t + 0.5 * self.dt) * self.dt
    }

    /// `diag(phase) [cos(theta) - i sin(theta) sigma_x]`.
    fn position_factor(field: &mut SpinorField, phase: &[Complex64], theta: f64) {
        let (s, c) = theta.sin_cos();
        let mis = Complex64::new(0.0, -s);
        for ((u, d), p) in field.up.iter_mut().zip(field.down.iter_mut()).zip(phase) {
            let (u0, d0) = (*u, *d);
            *u = p * (c * u0 + mis * d0);
            *d = p * (c * d0 + mis * u0);
        }
    }

    fn momentum_factor(&mut self, field: &mut SpinorField) {
        for (comp, mult) in [
            (&mut field.up, &self.kinetic_up),
            (&mut field.down, &self.kinetic_down),
        ] {
            self.forward.process_with_scratch(comp, &mut self.scratch);
            for (z, m) in comp.iter_mut().zip(mult.iter()) {
                *z *= m;
            }
            self.inverse.process_with_scratch(comp, &mut self.scratch);
        }
    }

    /// One Strang step from `t` to `t + dt`.
    pub fn step(&mut self, field: &mut SpinorField, t: f64) {
        self.advance(field, t, 1);
    }

    /// `steps` Strang steps starting at `t0`, with adjacent position
    /// half-steps merged into one exact factor.
    pub fn advance(&mut self, field: &mut SpinorField, t0: f64, steps: usize) {
        if steps == 0 {
            return;
        }
        let mut theta = self.half_angle(t0);
        Self::position_factor(field, &self.half_phase, theta);
        for s in 0..steps {
            self.momentum_factor(field);
            if s + 1 == steps {
                Self::position_factor(field, &self.half_phase, theta);
            } else {
                let next = self.half_angle(t0 + (s + 1) as f64 * self.dt);
                Self::position_factor(field, &self.full_phase, theta + next);
                theta = next;
            }
        }
    }
}

/// Single Strang step without reusing a propagator.
pub fn step(
    field: &SpinorField,
    t: f64,
    dt: f64,
    params: &ModelParams,
    grid: &SpatialGrid,
) -> Result<SpinorField> {
    field.check_grid(grid)?;
    let mut prop = SplitStepPropagator::new(grid, params, dt)?;
    let mut out = field.clone();
    prop.step(&mut out, t);
    Ok(out)
}

/// Propagates `initial` from `t = 0` and samples the probes every
/// `plan.sample_stride` steps, including `t = 0`.
pub fn evolve(
    initial: &SpinorField,
    plan: &PropagationPlan,
    params: &ModelParams,
    grid: &SpatialGrid,
    probes: &Probes,
) -> Result<TrajectoryRecord> {
    plan.validate(params)?;
    initial.check_grid(grid)?;
    let mut prop = SplitStepPropagator::new(grid, params, plan.dt)?;
    let total = plan.steps();
    let mut field = initial.clone();
    let mut record = TrajectoryRecord::with_capacity(total / plan.sample_stride + 1);
    record.push(probes.measure(&field, 0.0));
    let mut done = 0;
    while done < total {
        let chunk = plan.sample_stride.min(total - done);
        prop.advance(&mut field, done as f64 * plan.dt, chunk);
        done += chunk;
        let t = done as f64 * plan.dt;
        if !field.is_finite() {
            return Err(Error::NonFinite { time: t });
        }
        if chunk == plan.sample_stride {
            record.push(probes.measure(&field, t));
        }
    }
    record.final_state = field;
    record.final_time = total as f64 * plan.dt;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::solve;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(-8.0, 8.0, 256).unwrap()
    }

    #[test]
    fn drive_protocol_bounds_and_period() {
        let d = DriveProtocol {
            omega0: 1.0,
            omega1: 0.1,
            omega: 2.0,
        };
        assert!((d.rabi(0.0) - 1.1).abs() < 1e-15);
        assert!((d.rabi(PI / 2.0) - 0.9).abs() < 1e-15);
        let t = d.period().unwrap();
        assert!((d.rabi(0.3 + t) - d.rabi(0.3)).abs() < 1e-12);
        assert_eq!(DriveProtocol { omega1: 0.0, ..d }.period(), None);
    }

    #[test]
    fn plan_validation() {
        let params = ModelParams::default();
        assert!(PropagationPlan::new(1e-3, 1.0, 10).validate(&params).is_ok());
        assert!(PropagationPlan::new(0.0, 1.0, 10).validate(&params).is_err());
        assert!(PropagationPlan::new(1e-3, 1e-4, 10).validate(&params).is_err());
        assert!(PropagationPlan::new(1e-3, 1.0, 0).validate(&params).is_err());
        // more than 1/100 of the 3.4 period
        assert!(PropagationPlan::new(0.05, 1.0, 1).validate(&params).is_err());
        assert!(PropagationPlan::new(0.05, 1.0, 1)
            .validate(&params.undriven())
            .is_ok());
    }

    #[test]
    fn fused_steps_equal_single_steps() {
        let g = grid();
        let params = ModelParams::default();
        let sol = solve(&g, &params).unwrap();
        let mut a = sol.states[0].clone();
        let mut b = a.clone();
        let mut prop = SplitStepPropagator::new(&g, &params, 0.01).unwrap();
        prop.advance(&mut a, 0.3, 25);
        for s in 0..25 {
            prop.step(&mut b, 0.3 + s as f64 * 0.01);
        }
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn norm_is_preserved() {
        let g = grid();
        let params = ModelParams::default();
        let mut field = SpinorField::from_fn(
            &g,
            |x| Complex64::from_polar((-(x + 1.0).powi(2)).exp(), 0.7 * x),
            |x| Complex64::new(0.3 * (-(x - 1.0).powi(2)).exp(), 0.0),
        );
        field = crate::model::normalize(&field, &g).unwrap();
        let mut prop = SplitStepPropagator::new(&g, &params, 1e-3).unwrap();
        prop.advance(&mut field, 0.0, 2000);
        assert!((field.norm_sqr(g.dx()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_step_undoes_forward_step() {
        let g = grid();
        let params = ModelParams::default();
        let start = solve(&g, &params).unwrap().states[1].clone();
        let mut field = start.clone();
        SplitStepPropagator::new(&g, &params, 1e-3)
            .unwrap()
            .advance(&mut field, 0.0, 500);
        // the reversed sequence evaluates the drive at the same midpoints
        let mut back = SplitStepPropagator::new(&g, &params, -1e-3).unwrap();
        back.advance(&mut field, 0.5, 500);
        assert!(field.max_abs_diff(&start) < 1e-10);
    }

    #[test]
    fn undriven_eigenstate_is_stationary() {
        let g = grid();
        let params = ModelParams::default().undriven();
        let sol = solve(&g, &params).unwrap();
        let mut field = sol.states[0].clone();
        SplitStepPropagator::new(&g, &params, 1e-3)
            .unwrap()
            .advance(&mut field, 0.0, 3000);
        let overlap = sol.states[0].inner(&field, g.dx()).norm_sqr();
        assert!((overlap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn free_soc_drift() {
        let g = SpatialGrid::new(-40.0, 40.0, 1024).unwrap();
        let params = ModelParams {
            omega0: 0.0,
            omega1: 0.0,
            well_depth: 1e-300,
            gamma: 0.8,
            ..ModelParams::default()
        };
        let p0 = 1.3;
        let field = SpinorField::from_fn(
            &g,
            |x| Complex64::from_polar((-(x * x) / 4.0).exp(), p0 * x),
            |_| Complex64::default(),
        );
        let field = crate::model::normalize(&field, &g).unwrap();
        let x0 = field.mean_position(&g);
        let mut prop = SplitStepPropagator::new(&g, &params, 1e-2).unwrap();
        let mut moved = field.clone();
        prop.advance(&mut moved, 0.0, 500);
        let t = 5.0;
        let x1 = moved.mean_position(&g);
        assert!((x1 - x0 - (p0 - params.gamma) * t).abs() < 1e-6, "{x1}");
    }

    #[test]
    fn convenience_step_matches_propagator() {
        let g = grid();
        let params = ModelParams::default();
        let start = solve(&g, &params).unwrap().states[2].clone();
        let a = step(&start, 0.2, 1e-2, &params, &g).unwrap();
        let mut b = start.clone();
        SplitStepPropagator::new(&g, &params, 1e-2)
            .unwrap()
            .step(&mut b, 0.2);
        assert!(a.max_abs_diff(&b) < 1e-15);
    }
}
