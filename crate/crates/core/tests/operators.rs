use lpweights::circle::{from_spectrum, to_spectrum, window};
use lpweights::multipliers::{
    apply_multiplier, inner, op_p_u, op_t, op_t_u, riesz_projection, riesz_representation, square_function,
    theorem2_ratio,
};
use lpweights::trials::{gaussian_function, random_interval, random_partition, random_sequence, rng};
use lpweights::weights::{weak_quasinorm, weighted_lp_norm};
use lpweights::{FreqInterval, FunctionSequence, Partition, SampledFunction, Weight, WeightSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn grid() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![8usize, 16, 32, 64, 128])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplier_is_idempotent(n in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = gaussian_function(n, &mut r).unwrap();
        let iv = random_interval(n, &mut r);
        let once = apply_multiplier(&f, &iv).unwrap();
        let twice = apply_multiplier(&once, &iv).unwrap();
        prop_assert!(twice.max_abs_diff(&once) <= 1e-13 * f.sup_norm().max(1.0));
        let spec = to_spectrum(&once);
        for (k, c) in spec.iter() {
            if !iv.contains(k) {
                prop_assert!(c.norm() <= 1e-14 * f.sup_norm().max(1.0));
            }
        }
    }

    #[test]
    fn disjoint_pieces_are_orthogonal(n in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_partition(n, r.gen_range(2..8), &mut r).unwrap();
        let f = gaussian_function(n, &mut r).unwrap();
        let g = gaussian_function(n, &mut r).unwrap();
        let ivs = p.intervals();
        for i in 0..ivs.len() {
            for j in 0..ivs.len() {
                if i != j {
                    let x = inner(&apply_multiplier(&f, &ivs[i]).unwrap(), &apply_multiplier(&g, &ivs[j]).unwrap());
                    prop_assert!(x.norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn riesz_identity_matches_the_mask(n in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = gaussian_function(n, &mut r).unwrap();
        let iv = random_interval(n, &mut r);
        let a = apply_multiplier(&f, &iv).unwrap();
        let b = riesz_representation(&f, &iv).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn square_function_parseval(n in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = gaussian_function(n, &mut r).unwrap();
        let full = Partition::dyadic_window(n).unwrap();
        let s = square_function(&f, &full).unwrap();
        let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((l2(&s.re()) - l2(&f.abs())).abs() <= 1e-12 * l2(&f.abs()));
        let partial = random_partition(n, r.gen_range(1..6), &mut r).unwrap();
        let s = square_function(&f, &partial).unwrap();
        prop_assert!(l2(&s.re()) <= l2(&f.abs()) * (1.0 + 1e-12));
    }

    #[test]
    fn pieces_of_p_u_sum_to_t_u(n in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_partition(n, r.gen_range(1..6), &mut r).unwrap();
        let fs = random_sequence(n, p.len(), &mut r).unwrap();
        let u = WeightSpec::Cosine { c: 1.5, x0: r.gen_range(0.0..6.0) }.build(n).unwrap();
        let pieces = op_p_u(&fs, &p, &u).unwrap();
        let mut sum = SampledFunction::zeros(n).unwrap();
        for e in pieces.entries() {
            sum = sum.add(e).unwrap();
        }
        let t = op_t_u(&fs, &p, &u).unwrap();
        prop_assert!(sum.max_abs_diff(&t) <= 1e-12 * t.sup_norm().max(1.0));
    }

    #[test]
    fn chebyshev_bounds_the_weak_norm(n in grid(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = gaussian_function(n, &mut r).unwrap();
        let a = WeightSpec::power(r.gen_range(-0.5..0.5)).build(n).unwrap();
        prop_assert!(weak_quasinorm(&f, &a).unwrap() <= weighted_lp_norm(&f, 1.0, &a).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn riesz_projection_keeps_nonnegative_frequencies() {
    let n = 32;
    let mut s = lpweights::Spectrum::zeros(n).unwrap();
    for k in window(n).0..window(n).1 {
        s.set(k, Complex64::new(1.0 + k as f64, 0.5));
    }
    let p = to_spectrum(&riesz_projection(&from_spectrum(&s)));
    for (k, c) in p.iter() {
        let want = if k >= 0 { s.get(k) } else { Complex64::new(0.0, 0.0) };
        assert!((c - want).norm() < 1e-12, "k = {k}");
    }
}

#[test]
fn unit_weight_t_u_is_t() {
    let n = 64;
    let mut r = rng(5);
    let p = random_partition(n, 5, &mut r).unwrap();
    let fs = random_sequence(n, p.len(), &mut r).unwrap();
    let u = Weight::unit(n).unwrap();
    assert!(op_t_u(&fs, &p, &u).unwrap().max_abs_diff(&op_t(&fs, &p).unwrap()) < 1e-15);
}

#[test]
fn ratio_of_a_whole_window_interval_is_at_most_one() {
    let n = 64;
    let a = Weight::unit(n).unwrap();
    let p = Partition::from_pairs(&[(-32, 31)]).unwrap();
    for seed in 0..20 {
        let f = gaussian_function(n, &mut rng(seed)).unwrap();
        let fs = FunctionSequence::new(vec![f]).unwrap();
        assert!(theorem2_ratio(&fs, &p, &a, &a).unwrap() <= 1.0 + 1e-12);
    }
    let zero = FunctionSequence::new(vec![SampledFunction::zeros(n).unwrap()]).unwrap();
    assert_eq!(theorem2_ratio(&zero, &p, &a, &a).unwrap(), 0.0);
}

#[test]
fn exponential_in_its_own_interval_has_unit_square_function() {
    let f = SampledFunction::exponential(32, 3, Complex64::new(1.0, 0.0)).unwrap();
    let p = Partition::new(vec![FreqInterval::new(3, 3).unwrap()]).unwrap();
    let s = square_function(&f, &p).unwrap();
    assert!(s.re().iter().all(|v| (v - 1.0).abs() < 1e-14));
}
