use lpweights::auxops::{
    build_beta_family, build_phi_family, default_a, execute_plan, execute_signed, regularize_partition,
    regularize_signed, DecompositionPlan, DEFAULT_XI, MAX_COLORS,
};
use lpweights::multipliers::op_t_u;
use lpweights::trials::{gaussian_function, random_partition, random_positive_partition, rng, rng_stream};
use lpweights::{FreqInterval, FunctionSequence, Partition, WeightSpec};
use proptest::prelude::*;
use rand::Rng;

fn sequence(n: usize, len: usize, seed: u64) -> FunctionSequence {
    let mut r = rng(seed);
    FunctionSequence::new((0..len).map(|_| gaussian_function(n, &mut r).unwrap()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn positive_plans_validate_and_execute(seed in any::<u64>(), count in 1usize..20) {
        let n = 256;
        let p = random_positive_partition(n, count, &mut rng(seed)).unwrap();
        let plan = regularize_partition(&p, default_a()).unwrap();
        let rep = plan.validate(n);
        prop_assert!(rep.pass(), "{:?}", rep.failures);
        prop_assert!(rep.colors <= MAX_COLORS);
        let fs = sequence(n, p.len(), seed ^ 1);
        let u = WeightSpec::Cosine { c: 2.0, x0: 0.3 }.build(n).unwrap();
        let got = execute_plan(&plan, &fs, &u).unwrap();
        let want = op_t_u(&fs, &p, &u).unwrap();
        prop_assert!(got.max_abs_diff(&want) <= 1e-9 * want.sup_norm().max(1.0));
    }

    #[test]
    fn signed_plans_execute(seed in any::<u64>(), count in 1usize..14) {
        let n = 128;
        let p = random_partition(n, count, &mut rng(seed)).unwrap();
        let plan = regularize_signed(&p, default_a(), DEFAULT_XI).unwrap();
        prop_assert!(plan.positive.validate(n).pass());
        prop_assert!(plan.negative_mirrored.validate(n).pass());
        let fs = sequence(n, p.len(), seed ^ 2);
        let u = WeightSpec::power(0.25).build(n).unwrap();
        let got = execute_signed(&plan, &fs, &u).unwrap();
        let want = op_t_u(&fs, &p, &u).unwrap();
        prop_assert!(got.max_abs_diff(&want) <= 1e-9 * want.sup_norm().max(1.0));
    }

    #[test]
    fn beta_hats_partition_unity(a in 1.01f64..4.0, hi in 1i64..3000) {
        let beta = build_beta_family(a, FreqInterval::new(1, hi).unwrap()).unwrap();
        for k in 1..=hi {
            let alive = beta.alive_at(k);
            prop_assert!(alive.len() <= 2);
            prop_assert_eq!(alive.iter().map(|(_, v)| v).sum::<f64>(), 1.0);
            for (j, v) in alive {
                prop_assert!(v > 0.0);
                let (lo, up) = beta.support_bounds(j);
                prop_assert!(k as f64 >= lo * (1.0 - 1e-12) && k as f64 <= up * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn phi_decay_constant_is_stable() {
    let phi = build_phi_family(8, DEFAULT_XI, 1024).unwrap();
    let probe = phi.decay_probe(&[4, 5, 6, 7, 8], 4096).unwrap();
    assert!(probe.spread <= 2.0, "{probe:?}");
}

#[test]
fn phi_passband_and_support() {
    let phi = build_phi_family(6, DEFAULT_XI, 256).unwrap();
    for m in 1..=6u32 {
        assert_eq!(phi.coefficient(m, 1 << (m - 1)), 1.0);
        assert_eq!(phi.coefficient(m, -1), 0.0);
        assert_eq!(phi.coefficient(m, (1 << m) + 1), 0.0);
    }
    assert!(build_phi_family(8, DEFAULT_XI, 256).is_err());
}

#[test]
fn beta_support_example() {
    let beta = build_beta_family(2.0, FreqInterval::new(1, 100).unwrap()).unwrap();
    // β̂_j vanishes above 2^{j+1}
    for j in 1..=beta.max_index() {
        for k in (1i64 << (j + 1)) + 1..=100 {
            assert_eq!(beta.coefficient(j, k), 0.0, "j = {j}, k = {k}");
        }
    }
    assert_eq!(beta.coefficient(1, 1), 1.0);
}

#[test]
fn plans_roundtrip_through_json() {
    let p = random_positive_partition(512, 12, &mut rng_stream(4, 4)).unwrap();
    let plan = regularize_partition(&p, default_a()).unwrap();
    let text = serde_json::to_string(&plan).unwrap();
    let back: DecompositionPlan = serde_json::from_str(&text).unwrap();
    assert_eq!(back, plan);
}

#[test]
fn long_interval_spanning_half_the_window() {
    let n = 1024;
    let p = Partition::from_pairs(&[(0, 511)]).unwrap();
    let plan = regularize_partition(&p, default_a()).unwrap();
    assert!(plan.validate(n).pass());
    let fs = sequence(n, 1, 77);
    let u = WeightSpec::Unit.build(n).unwrap();
    let got = execute_plan(&plan, &fs, &u).unwrap();
    let want = op_t_u(&fs, &p, &u).unwrap();
    assert!(got.max_abs_diff(&want) <= 1e-9 * want.sup_norm());
}

#[test]
fn many_short_intervals_fit_the_color_budget() {
    let n = 1024;
    let mut r = rng(12);
    let mut pairs = vec![];
    let mut pos = 0i64;
    while pos < 500 {
        let len = r.gen_range(1..=11);
        pairs.push((pos, pos + len - 1));
        pos += len + r.gen_range(0..3);
    }
    let p = Partition::from_pairs(&pairs).unwrap();
    let plan = regularize_partition(&p, default_a()).unwrap();
    let rep = plan.validate(n);
    assert!(rep.pass(), "{:?}", rep.failures);
    assert!(rep.colors <= MAX_COLORS);
}
