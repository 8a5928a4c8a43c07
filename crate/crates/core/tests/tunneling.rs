//! Undriven tunneling of the left-localized state, checked against the
//! doublet splitting.

use std::f64::consts::PI;

use socwell_core::dynamics::{evolve, PropagationPlan};
use socwell_core::observables::Probes;
use socwell_core::stationary::{localized_basis, solve, tunneling_period, TunnelingPeriod};
use socwell_core::{ModelParams, SpatialGrid};

fn undriven(d: f64, gamma: f64) -> ModelParams {
    ModelParams {
        omega1: 0.0,
        ..ModelParams::with(d, gamma, 1.0)
    }
}

#[test]
fn split_doublet_tunnels_with_its_splitting() {
    let grid = SpatialGrid::default();
    let params = undriven(2.0, 0.725);
    let sol = solve(&grid, &params).unwrap();
    let TunnelingPeriod::Finite(period) = tunneling_period(&sol) else {
        panic!("lower doublet unexpectedly degenerate");
    };
    let de = sol.lower_splitting();
    let initial = localized_basis(&sol).left_lower().clone();
    let plan = PropagationPlan::new(2e-3, 0.5 * period + 1.0, 50);
    let record = evolve(&initial, &plan, &params, &grid, &Probes::new(&sol)).unwrap();
    let p0 = record.samples[0].p_left;
    for s in &record.samples {
        // two-state tunneling, with the small weight the initial state leaves
        // in the wrong well carried along unchanged
        let expected = 0.5 + (p0 - 0.5) * (de * s.t).cos();
        assert!(
            (s.p_left - expected).abs() < 0.01,
            "t = {}: P_L = {}, expected {expected}",
            s.t,
            s.p_left
        );
    }
    let (t_min, min) = record
        .samples
        .iter()
        .map(|s| (s.t, s.p_left))
        .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    assert!(min < 0.01, "min P_L = {min}");
    assert!((t_min - PI / de).abs() < 0.01 * period, "t_min = {t_min}, pi/dE = {}", PI / de);
}

#[test]
fn degenerate_doublet_stays_localized() {
    let grid = SpatialGrid::default();
    let params = undriven(1.7, 1.112);
    let sol = solve(&grid, &params).unwrap();
    assert!(sol.lower_splitting() < 1e-3);
    let initial = localized_basis(&sol).left_lower().clone();
    let plan = PropagationPlan::new(2e-3, 1000.0, 500);
    let record = evolve(&initial, &plan, &params, &grid, &Probes::new(&sol)).unwrap();
    let p0 = record.samples[0].p_left;
    let drop = record
        .samples
        .iter()
        .map(|s| p0 - s.p_left)
        .fold(0.0f64, f64::max);
    assert!(drop < 0.02, "P_L fell by {drop}");
}

#[test]
fn eigenpairs_converge_at_reference_parameters() {
    let grid = SpatialGrid::default();
    let sol = solve(&grid, &ModelParams::default()).unwrap();
    assert!(sol.residuals.iter().all(|r| *r < 1e-8), "{:?}", sol.residuals);
}
