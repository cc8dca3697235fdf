//! Seeded random inputs and the Monte-Carlo experiments built on them.
//!
//! All generators draw from ChaCha8 streams derived from a `u64` seed, so a
//! seed reproduces the same inputs on every platform.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{from_spectrum, window, FreqInterval, Partition, SampledFunction, Spectrum};
use crate::error::Result;
use crate::multipliers::{theorem2_ratio, FunctionSequence};
use crate::weights::{maximal_values, Weight, WeightSpec};

pub type TrialRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> TrialRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normal(rng: &mut TrialRng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_normal(rng: &mut TrialRng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

/// Independent complex Gaussian samples.
pub fn gaussian_function(n: usize, rng: &mut TrialRng) -> Result<SampledFunction> {
    SampledFunction::new((0..n).map(|_| complex_normal(rng)).collect())
}

/// Zero except at `spikes` distinct random samples.
pub fn spike_function(n: usize, spikes: usize, rng: &mut TrialRng) -> Result<SampledFunction> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for m in sample(rng, n, spikes.min(n)) {
        v[m] = complex_normal(rng);
    }
    SampledFunction::new(v)
}

/// Random coefficients on `[0, top]`.
pub fn analytic_function(n: usize, top: i64, rng: &mut TrialRng) -> Result<SampledFunction> {
    let mut s = Spectrum::zeros(n)?;
    for k in 0..=top {
        s.set(k, complex_normal(rng));
    }
    Ok(from_spectrum(&s))
}

/// Random `f` with `|f| ≤ bound` pointwise.
pub fn bounded_function(bound: &[f64], rng: &mut TrialRng) -> Result<SampledFunction> {
    SampledFunction::new(
        bound
            .iter()
            .map(|&b| Complex64::from_polar(b * rng.gen::<f64>(), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect(),
    )
}

/// Uniformly placed interval inside the window.
pub fn random_interval(n: usize, rng: &mut TrialRng) -> FreqInterval {
    let (lo, hi) = window(n);
    let a = rng.gen_range(lo..hi);
    let b = rng.gen_range(lo..hi);
    FreqInterval::new(a.min(b), a.max(b)).expect("ordered")
}

/// `count` disjoint intervals cut from the window at random points; a
/// random subset is dropped, so the result is usually partial.
pub fn random_partition(n: usize, count: usize, rng: &mut TrialRng) -> Result<Partition> {
    let (lo, hi) = window(n);
    let count = count.clamp(1, n);
    let mut cuts: Vec<i64> = sample(rng, n - 1, count - 1)
        .into_iter()
        .map(|c| lo + 1 + c as i64)
        .collect();
    cuts.sort_unstable();
    let mut bounds = vec![lo];
    bounds.extend(cuts);
    bounds.push(hi);
    let keep_all = rng.gen_bool(0.3);
    let mut out = vec![];
    for w in bounds.windows(2) {
        if keep_all || rng.gen_bool(0.7) {
            out.push(FreqInterval::new(w[0], w[1] - 1)?);
        }
    }
    if out.is_empty() {
        out.push(FreqInterval::new(bounds[0], bounds[1] - 1)?);
    }
    Partition::new(out)
}

/// Disjoint intervals in `[0, N/2)`, mixing lengths up to eleven with long
/// ones and leaving random gaps.
pub fn random_positive_partition(n: usize, count: usize, rng: &mut TrialRng) -> Result<Partition> {
    let top = (n / 2) as i64;
    let count = count.clamp(1, (top / 2) as usize);
    let mut cuts: Vec<i64> = sample(rng, top as usize - 1, count - 1)
        .into_iter()
        .map(|c| 1 + c as i64)
        .collect();
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(top);
    let mut out = vec![];
    for w in bounds.windows(2) {
        let (mut a, mut b) = (w[0], w[1] - 1);
        if rng.gen_bool(0.15) {
            continue;
        }
        if rng.gen_bool(0.4) && b - a + 1 > 11 {
            let len = rng.gen_range(1..=11);
            a = rng.gen_range(a..=b + 1 - len);
            b = a + len - 1;
        } else if rng.gen_bool(0.3) && b > a {
            // trim a random margin on either side
            a += rng.gen_range(0..=(b - a) / 4);
            b -= rng.gen_range(0..=(b - a) / 4);
        }
        out.push(FreqInterval::new(a, b)?);
    }
    if out.is_empty() {
        out.push(FreqInterval::new(0, top - 1)?);
    }
    Partition::new(out)
}

/// `len` functions, all Gaussian or all sparse spikes.
pub fn random_sequence(n: usize, len: usize, rng: &mut TrialRng) -> Result<FunctionSequence> {
    let spiky = rng.gen_bool(0.5);
    FunctionSequence::new(
        (0..len)
            .map(|_| {
                if spiky {
                    let spikes = rng.gen_range(1..=3);
                    spike_function(n, spikes, rng)
                } else {
                    gaussian_function(n, rng)
                }
            })
            .collect::<Result<_>>()?,
    )
}

/// Catalog `(a, w)` pairs with `w ∈ α_1` and `a ∈ A_∞`.
pub fn theorem2_pairs() -> Vec<(WeightSpec, WeightSpec)> {
    vec![
        (WeightSpec::Unit, WeightSpec::Unit),
        (WeightSpec::Cosine { c: 1.5, x0: 0.0 }, WeightSpec::power(-0.2)),
        (
            WeightSpec::power(0.5),
            WeightSpec::MaximalPower {
                gamma: 0.3,
                start: 0.0,
                len: 0.25,
            },
        ),
        (WeightSpec::power(-0.5), WeightSpec::Cosine { c: 2.0, x0: 1.0 }),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Row {
    pub a: String,
    pub w: String,
    pub n: usize,
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Largest and mean `theorem2_ratio` over `trials` random partitions and
/// sequences for every pair and grid size.
pub fn theorem2_sweep(
    pairs: &[(WeightSpec, WeightSpec)],
    ns: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<Theorem2Row>> {
    let jobs: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|p| ns.iter().map(move |&n| (p, n))).collect();
    jobs.par_iter()
        .map(|&(pi, n)| {
            let (a_spec, w_spec) = &pairs[pi];
            let a = a_spec.build(n)?;
            let w = w_spec.build(n)?;
            let mut r = rng_stream(seed, ((pi as u64) << 32) | n as u64);
            let mut max_ratio = 0.0f64;
            let mut total = 0.0;
            for _ in 0..trials {
                let count = r.gen_range(1..=12);
                let p = random_partition(n, count, &mut r)?;
                let fs = random_sequence(n, p.len(), &mut r)?;
                let ratio = theorem2_ratio(&fs, &p, &a, &w)?;
                max_ratio = max_ratio.max(ratio);
                total += ratio;
            }
            Ok(Theorem2Row {
                a: a_spec.to_string(),
                w: w_spec.to_string(),
                n,
                trials,
                max_ratio,
                mean_ratio: if trials > 0 { total / trials as f64 } else { 0.0 },
            })
        })
        .collect()
}

/// `max_ratio(2N) / max_ratio(N)` for consecutive sizes of each pair.
pub fn theorem2_growth(rows: &[Theorem2Row]) -> Vec<(String, String, usize, f64)> {
    let mut out = vec![];
    for x in rows {
        if let Some(y) = rows.iter().find(|y| y.a == x.a && y.w == x.w && y.n == 2 * x.n) {
            out.push((x.a.clone(), x.w.clone(), x.n, y.max_ratio / x.max_ratio));
        }
    }
    out
}

/// Inputs for a correction experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub f: SampledFunction,
    pub w: Weight,
    pub a: Weight,
    pub partition: Partition,
}

/// `w = a = 1`, random `|f| ≤ 1`, dyadic blocks.
pub fn unit_scenario(n: usize, seed: u64) -> Result<Scenario> {
    let w = Weight::unit(n)?;
    let f = bounded_function(w.values(), &mut rng(seed))?;
    Ok(Scenario {
        f,
        a: w.clone(),
        w,
        partition: Partition::dyadic_window(n)?,
    })
}

/// Random `|f| ≤ 1` supported on a random arc, `w = (M|f|)^γ`, `a` given.
pub fn maximal_scenario(n: usize, gamma: f64, a: &WeightSpec, seed: u64) -> Result<Scenario> {
    let mut r = rng(seed);
    let start = r.gen_range(0..n);
    let len = r.gen_range(n / 8..=n / 2);
    let mask: Vec<f64> = (0..n)
        .map(|m| if (m + n - start) % n < len { 1.0 } else { 0.0 })
        .collect();
    let f = bounded_function(&mask, &mut r)?;
    let mf = maximal_values(&f.abs());
    let w = Weight::new(mf.iter().map(|v| v.powf(gamma)).collect())?;
    Ok(Scenario {
        f,
        w,
        a: a.build(n)?,
        partition: Partition::dyadic_window(n)?,
    })
}
