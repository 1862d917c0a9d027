//! Thermodynamic properties of simulated cycles over random parameters.

use proptest::prelude::*;
use qotto::occupation::class_cycle;
use qotto::{
    diagonal_cycle, efficiency_decomposition, run_cycle, second_law_check, HamiltonianSchedule, PulseMode, QutritParams,
    StepControl, StrokeMode,
};

/// Qutrit parameters with `E1` moving between two interior values.
fn params() -> impl Strategy<Value = QutritParams<f64>> {
    (0.05..0.95f64, 0.05..0.95f64)
        .prop_filter("E1 must move", |(a, b)| (a - b).abs() > 1e-3)
        .prop_map(|(a, b)| QutritParams::new(0.0, a, b - a, 1.0).unwrap())
}

/// `(β_c, β_h)` with `β_c > β_h`.
fn betas() -> impl Strategy<Value = (f64, f64)> {
    (0.2..5.0f64, 0.05..5.0f64).prop_map(|(bh, gap)| (bh + gap, bh))
}

fn mode() -> impl Strategy<Value = StrokeMode> {
    prop_oneof![Just(StrokeMode::QuantumAdiabatic), Just(StrokeMode::PerfectSwap)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_law_carnot_and_second_law(p in params(), (bc, bh) in betas(), n in 1usize..=6, mode in mode()) {
        let r = diagonal_cycle(&p, n, bc, bh, mode).unwrap();
        prop_assert!(r.first_law_defect() < 1e-10);
        if let Some(eta) = r.eta {
            prop_assert!(eta <= r.eta_carnot + 1e-12, "eta {} above Carnot {}", eta, r.eta_carnot);
        }
        let s = second_law_check(&r);
        prop_assert!(s.margin_hot >= -1e-9 && s.margin_cold >= -1e-9, "{:?}", s);
    }

    #[test]
    fn reference_heats_are_optimal(p in params(), (bc, bh) in betas(), n in 1usize..=6, mode in mode()) {
        let r = diagonal_cycle(&p, n, bc, bh, mode).unwrap();
        // D >= 0: the reference state has the least energy at its entropy
        prop_assert!(r.q_h_ref >= r.q_h - 1e-12);
        prop_assert!(r.q_c_ref >= r.q_c - 1e-12);
        if r.q_c_ref <= 0.0 {
            prop_assert!(r.q_c_ref.abs() <= r.q_c.abs() + 1e-12);
        }
        prop_assert!(r.d_b >= -1e-12 && r.d_d >= -1e-12);
    }

    #[test]
    fn perfect_swaps_never_lower_an_engine_efficiency(p in params(), (bc, bh) in betas(), n in 2usize..=6) {
        let qa = diagonal_cycle(&p, n, bc, bh, StrokeMode::QuantumAdiabatic).unwrap();
        let perfect = diagonal_cycle(&p, n, bc, bh, StrokeMode::PerfectSwap).unwrap();
        prop_assert!(perfect.w <= qa.w + 1e-12);
        if let Some(eta_qa) = qa.eta {
            let eta = perfect.eta.expect("perfect swap keeps the engine regime");
            prop_assert!(eta >= eta_qa - 1e-12);
        }
    }

    #[test]
    fn class_path_matches_level_path(p in params(), (bc, bh) in betas(), n in 1usize..=5, mode in mode()) {
        let a = class_cycle(&p, n, bc, bh, mode).unwrap();
        let b = diagonal_cycle(&p, n, bc, bh, mode).unwrap();
        prop_assert!(a.max_deviation(&b) < 1e-10, "deviation {}", a.max_deviation(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_reproduces_the_direct_efficiency(p in params(), (bc, bh) in betas(), perfect in any::<bool>()) {
        let pulse = if perfect { PulseMode::Perfect } else { PulseMode::None };
        let schedule = HamiltonianSchedule::with_default_swaps(p, 2, 1.0, pulse).unwrap();
        let out = run_cycle(&schedule, bc, bh, StepControl::default()).unwrap();
        let d = efficiency_decomposition(&out.points).unwrap();
        if d.series_valid {
            let direct = -out.result.w / out.result.q_h;
            prop_assert!((d.eta_closed - direct).abs() < 1e-9, "closed {} direct {}", d.eta_closed, direct);
        }
    }
}

#[test]
fn equal_temperatures_give_no_engine() {
    let p = QutritParams::new(0.0, 0.3, 0.4, 1.0).unwrap();
    for mode in [StrokeMode::QuantumAdiabatic, StrokeMode::PerfectSwap] {
        let r = diagonal_cycle(&p, 3, 2.0, 2.0, mode).unwrap();
        assert!(!r.engine && r.w >= -1e-12, "{mode:?}: W = {}", r.w);
    }
    assert!(diagonal_cycle(&p, 3, 1.0, 2.0, StrokeMode::PerfectSwap).is_err());
}
