//! Property tests for the invariants of the model, the propagators and the
//! spectral tools.

use num_complex::Complex64;
use proptest::prelude::*;

use socwell_core::dynamics::SplitStepPropagator;
use socwell_core::floquet::{quasienergies, rabi_solution, EffectiveTwoLevel, FourStateModel};
use socwell_core::observables::{beat_spectrum, spin_polarization, well_probability, Axis, Side};
use socwell_core::stationary::{apply_sxp, build_h0};
use socwell_core::{normalize, potential, Level, ModelParams, SpatialGrid, SpinorField};

const N: usize = 128;

fn small_grid() -> SpatialGrid {
    SpatialGrid::new(-8.0, 8.0, N).unwrap()
}

fn params() -> impl Strategy<Value = ModelParams> {
    (1.0f64..2.5, 0.0f64..4.0, 0.2f64..3.0, 0.0f64..0.3).prop_map(|(d, gamma, omega, omega1)| {
        ModelParams {
            omega1,
            ..ModelParams::with(d, gamma, omega)
        }
    })
}

fn field() -> impl Strategy<Value = SpinorField> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * N).prop_map(|v| {
        let c: Vec<Complex64> = v.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
        SpinorField::new(c[..N].to_vec(), c[N..].to_vec()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn potential_is_even_and_bounded(p in params(), x in -10.0f64..10.0) {
        let v = potential(x, &p);
        prop_assert!((v - potential(-x, &p)).abs() < 1e-12);
        prop_assert!(v <= 0.0 && v >= -2.0 * p.well_depth);
    }

    #[test]
    fn normalize_is_idempotent_and_scale_invariant(f in field(), s in 0.1f64..10.0, phase in 0.0f64..6.3) {
        let grid = small_grid();
        let a = normalize(&f, &grid).unwrap();
        prop_assert!((a.norm_sqr(grid.dx()) - 1.0).abs() < 1e-12);
        prop_assert!(normalize(&a, &grid).unwrap().max_abs_diff(&a) < 1e-12);
        let b = normalize(&f.scaled(Complex64::from_polar(s, 0.0)), &grid).unwrap();
        prop_assert!(b.max_abs_diff(&a) < 1e-12);
        // a global phase survives normalization
        let c = normalize(&f.scaled(Complex64::from_polar(s, phase)), &grid).unwrap();
        prop_assert!((c.inner(&a, grid.dx()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn well_probabilities_sum_to_one(f in field()) {
        let grid = small_grid();
        let f = normalize(&f, &grid).unwrap();
        let total = well_probability(&f, &grid, Side::Left) + well_probability(&f, &grid, Side::Right);
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_vector_is_bounded(f in field()) {
        let grid = small_grid();
        let f = normalize(&f, &grid).unwrap();
        let s: f64 = [Axis::X, Axis::Y, Axis::Z]
            .iter()
            .map(|a| spin_polarization(&f, &grid, *a).powi(2))
            .sum();
        prop_assert!(s.sqrt() <= 0.5 + 1e-12);
    }

    #[test]
    fn split_step_preserves_norm(f in field(), p in params(), dt in prop_oneof![Just(1e-3), Just(-1e-3), Just(5e-3)]) {
        let grid = small_grid();
        let mut f = normalize(&f, &grid).unwrap();
        SplitStepPropagator::new(&grid, &p, dt).unwrap().advance(&mut f, 0.3, 200);
        prop_assert!((f.norm_sqr(grid.dx()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn h0_is_hermitian_and_commutes_with_sxp(p in params(), f in field()) {
        let grid = small_grid();
        let h = build_h0(&grid, &p).unwrap();
        let dense = h.to_dense();
        let mut worst = 0.0f64;
        for i in 0..2 * N {
            for j in 0..2 * N {
                worst = worst.max((dense[(i, j)] - dense[(j, i)].conj()).norm());
            }
        }
        prop_assert!(worst < 1e-10);
        let lhs = h.apply(&apply_sxp(&f, &grid));
        let rhs = apply_sxp(&h.apply(&f), &grid);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn rabi_amplitudes_stay_normalized(v in -0.1f64..0.1, t in 0.0f64..5000.0, ea in -1.0f64..1.0, eb in 0.5f64..3.0) {
        let two = EffectiveTwoLevel {
            alpha: Level::L11,
            beta: Level::L22,
            coupling: v,
            delta_e: 0.0,
            delta_e_upper: 0.0,
            omega_res: eb - ea,
            epsilon_alpha: ea,
            epsilon_beta: eb,
            photon_order: 1,
            allowed: true,
        };
        let [a, b] = rabi_solution(&two, t);
        prop_assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_satisfies_parseval(series in proptest::collection::vec(-1.0f64..1.0, 16..300)) {
        let times: Vec<f64> = (0..series.len()).map(|k| 0.1 * k as f64).collect();
        let spec = beat_spectrum(&series, &times, None).unwrap();
        let mean = series.iter().sum::<f64>() / series.len() as f64;
        let variance = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / series.len() as f64;
        prop_assert!((spec.total_power() - variance).abs() < 1e-10 * (1.0 + variance));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn folded_quasienergies_lie_in_the_zone(
        e in proptest::array::uniform4(-1.0f64..3.0),
        g in proptest::array::uniform4(-0.5f64..0.5),
        omega in 0.3f64..3.0,
    ) {
        let gamma_matrix = [
            [0.0, 0.0, g[0], g[1]],
            [0.0, 0.0, g[2], g[3]],
            [g[0], g[2], 0.0, 0.0],
            [g[1], g[3], 0.0, 0.0],
        ];
        let model = FourStateModel { h0_diag: e, gamma_matrix, omega1: 0.1, omega };
        let q = quasienergies(&model).unwrap();
        for w in q.folded.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        prop_assert!(q.folded.iter().all(|l| *l > -1.0 && *l <= 1.0));
    }
}
