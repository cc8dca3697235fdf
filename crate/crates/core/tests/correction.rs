use lpweights::correction::{correct, fit_log_rate, sweep, verify_result, Strategy, SweepRow};
use lpweights::trials::{maximal_scenario, unit_scenario};
use lpweights::WeightSpec;
use proptest::prelude::*;

fn strategy() -> impl proptest::strategy::Strategy<Value = Strategy> {
    prop_oneof![Just(Strategy::ZeroOffenders), Just(Strategy::Damp)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_result_verifies(seed in any::<u64>(), b in 0.2f64..1.2, s in strategy()) {
        let sc = unit_scenario(64, seed).unwrap();
        let r = correct(&sc.f, &sc.w, &sc.a, &sc.partition, b, s).unwrap();
        let v = verify_result(&r, &sc.f, &sc.w, &sc.a, &sc.partition).unwrap();
        prop_assert!(v.modulus_defect <= 1e-14);
        prop_assert!(v.pass, "{v:?}");
    }

    #[test]
    fn sweeps_are_monotone(seed in any::<u64>(), s in strategy()) {
        let sc = maximal_scenario(64, 0.3, &WeightSpec::Unit, seed).unwrap();
        let grid: Vec<f64> = (1..=8).map(|i| 0.15 * i as f64).collect();
        let sw = sweep(&sc.f, &sc.w, &sc.a, &sc.partition, &grid, s).unwrap();
        prop_assert!(sw.rows.windows(2).all(|x| x[1].epsilon <= x[0].epsilon));
        for r in &sw.results {
            prop_assert!(verify_result(r, &sc.f, &sc.w, &sc.a, &sc.partition).unwrap().pass);
        }
    }
}

#[test]
fn huge_target_needs_no_correction() {
    let sc = unit_scenario(128, 1).unwrap();
    let sw = sweep(&sc.f, &sc.w, &sc.a, &sc.partition, &[50.0, 60.0], Strategy::ZeroOffenders).unwrap();
    assert!(sw.rows.iter().all(|r| r.epsilon == 0.0 && r.iterations == 0));
    assert!(sw.fit.is_none());
}

#[test]
fn fit_recovers_an_exact_line() {
    let rows: Vec<SweepRow> = [0.5f64, 0.1, 0.01]
        .iter()
        .map(|&eps| SweepRow {
            b_target: 0.0,
            epsilon: eps,
            b_achieved: 3.0 * (1.0 + eps.ln().abs()) - 1.0,
            iterations: 1,
            converged: true,
        })
        .collect();
    let fit = fit_log_rate(&rows).unwrap();
    assert!((fit.slope - 3.0).abs() < 1e-12 && (fit.intercept + 1.0).abs() < 1e-12);
    assert!(fit.rms_residual < 1e-12);
}

#[test]
fn unsorted_grid_is_rejected() {
    let sc = unit_scenario(32, 2).unwrap();
    assert!(sweep(&sc.f, &sc.w, &sc.a, &sc.partition, &[0.8, 0.5], Strategy::Damp).is_err());
}
