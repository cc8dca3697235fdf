//! Weights on the grid and the arc functionals behind the Muckenhoupt `A_p`
//! and Kislyakov `α_p` classes.
//!
//! An arc is any contiguous run of grid samples, wrapping around the circle;
//! there are `N·N` of them (start, length). Every class constant below is an
//! exact supremum over that finite family, computed by direct enumeration
//! with per-arc running sums taken in sample order.

mod catalog;
mod probes;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{check_grid_size, SampledFunction};
use crate::error::{Error, Result};

pub use catalog::{catalog, WeightSpec};
pub use probes::{
    a1_implied_by_alpha1, ainf_certificate, alpha_dual_probe, bootstrap_alpha_index,
    lemma1_probe, lemma4_certificate, lemma4_constants, reverse_holder_probe, A1Report,
    AinfCertificate, AlphaDualReport, AlphaDualRow, Lemma4Constants, Lemma4Report, MixingReport,
    MixingRow, ReverseHolderReport, ReverseHolderRow, AINF_P_GRID, DEFAULT_GROWTH_THRESHOLD,
};

/// Smallest admissible weight value.
pub const MIN_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ConstantKind {
    Ap,
    Alpha,
}

/// Strictly positive sampled function with memoized class constants.
#[derive(Debug)]
pub struct Weight {
    values: Vec<f64>,
    cache: Mutex<BTreeMap<(ConstantKind, u64), f64>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Self {
            values: self.values.clone(),
            cache: Mutex::new(self.cache.lock().expect("weight cache poisoned").clone()),
        }
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_grid_size(values.len())?;
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > MIN_WEIGHT) || !v.is_finite())
        {
            return Err(Error::NonpositiveWeight { index, value });
        }
        Ok(Self {
            values,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::constant(n, 1.0)
    }

    /// Real part of `f` as a weight.
    pub fn from_function(f: &SampledFunction) -> Result<Self> {
        Self::new(f.re())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_function(&self) -> SampledFunction {
        SampledFunction::from_real(&self.values).expect("weight grid is valid")
    }

    /// `w^e`.
    pub fn powf(&self, e: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v.powf(e)).collect())
    }

    /// `1/w`.
    pub fn recip(&self) -> Result<Self> {
        Self::new(self.values.iter().map(|v| 1.0 / v).collect())
    }

    /// `a/w`, the intertwining density `u`.
    pub fn ratio(a: &Weight, w: &Weight) -> Result<Self> {
        same_grid(a, w)?;
        Self::new(a.values.iter().zip(&w.values).map(|(x, y)| x / y).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `∫ w` with the `2π/N` quadrature.
    pub fn total(&self) -> f64 {
        2.0 * PI / self.len() as f64 * self.values.iter().sum::<f64>()
    }

    fn cached(&self, kind: ConstantKind, p: f64, compute: impl FnOnce() -> f64) -> f64 {
        let key = (kind, p.to_bits());
        if let Some(&v) = self.cache.lock().expect("weight cache poisoned").get(&key) {
            return v;
        }
        let v = compute();
        self.cache
            .lock()
            .expect("weight cache poisoned")
            .insert(key, v);
        v
    }
}

pub(crate) fn same_grid(a: &Weight, b: &Weight) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            expected: a.len(),
            got: b.len(),
        })
    }
}

/// Contiguous run of `len` samples starting at `start`, modulo N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub start: usize,
    pub len: usize,
}

impl Arc {
    pub fn new(start: usize, len: usize, n: usize) -> Result<Self> {
        if start >= n || len == 0 || len > n {
            return Err(Error::InvalidParameter(format!(
                "arc (start {start}, length {len}) invalid for N = {n}"
            )));
        }
        Ok(Self { start, len })
    }

    pub fn contains(&self, m: usize, n: usize) -> bool {
        (m + n - self.start) % n < self.len
    }

    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> {
        let (start, len) = (self.start, self.len);
        (0..len).map(move |d| (start + d) % n)
    }
}

/// Per-arc statistics handed to arc functionals.
pub struct ArcStats<'a> {
    pub arc: Arc,
    /// Arc average of each input series.
    pub means: &'a [f64],
    /// Arc minimum of each input series.
    pub mins: &'a [f64],
}

/// Extremal value of an arc functional and one arc attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArcExtremum {
    pub value: f64,
    pub arc: Arc,
}

fn better(a: ArcExtremum, b: ArcExtremum) -> ArcExtremum {
    // Ties go to the lexicographically first arc so parallel scans are
    // reproducible.
    if b.value > a.value
        || (b.value == a.value && (b.arc.start, b.arc.len) < (a.arc.start, a.arc.len))
    {
        b
    } else {
        a
    }
}

/// Suprema of `k` arc functionals over all `N·N` arcs.
///
/// `eval` writes the `k` functional values for one arc into its output
/// slice. Series must share one grid.
pub fn arc_sup_many<F>(series: &[&[f64]], k: usize, eval: F) -> Vec<ArcExtremum>
where
    F: Fn(&ArcStats, &mut [f64]) + Sync,
{
    let n = series.first().map_or(0, |s| s.len());
    assert!(n > 0 && series.iter().all(|s| s.len() == n), "series grid mismatch");
    let init = ArcExtremum {
        value: f64::NEG_INFINITY,
        arc: Arc { start: 0, len: 1 },
    };
    (0..n)
        .into_par_iter()
        .map(|start| {
            let mut best = vec![init; k];
            let mut sums = vec![0.0; series.len()];
            let mut mins = vec![f64::INFINITY; series.len()];
            let mut means = vec![0.0; series.len()];
            let mut out = vec![0.0; k];
            for len in 1..=n {
                let m = (start + len - 1) % n;
                for (i, s) in series.iter().enumerate() {
                    sums[i] += s[m];
                    mins[i] = mins[i].min(s[m]);
                    means[i] = sums[i] / len as f64;
                }
                let arc = Arc { start, len };
                eval(
                    &ArcStats {
                        arc,
                        means: &means,
                        mins: &mins,
                    },
                    &mut out,
                );
                for (b, &v) in best.iter_mut().zip(&out) {
                    *b = better(*b, ArcExtremum { value: v, arc });
                }
            }
            best
        })
        .reduce(
            || vec![init; k],
            |a, b| a.into_iter().zip(b).map(|(x, y)| better(x, y)).collect(),
        )
}

/// Supremum of one arc functional over all arcs.
pub fn arc_sup<F>(series: &[&[f64]], eval: F) -> ArcExtremum
where
    F: Fn(&ArcStats) -> f64 + Sync,
{
    arc_sup_many(series, 1, |st, out| out[0] = eval(st))[0]
}

/// Uncentred maximal function over arcs: `(Mw)(x_m)` is the largest arc
/// average among arcs containing `x_m`.
pub fn maximal_function(w: &Weight) -> Vec<f64> {
    maximal_values(w.values())
}

pub(crate) fn maximal_values(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .into_par_iter()
        .fold(
            || vec![f64::NEG_INFINITY; n],
            |mut acc, start| {
                // avg[len-1] for arcs starting here, then suffix maxima: the
                // point at offset d lies in exactly the arcs with len > d.
                let mut avg = Vec::with_capacity(n);
                let mut sum = 0.0;
                for len in 1..=n {
                    sum += values[(start + len - 1) % n];
                    avg.push(sum / len as f64);
                }
                for i in (0..n - 1).rev() {
                    avg[i] = avg[i].max(avg[i + 1]);
                }
                for (d, &v) in avg.iter().enumerate() {
                    let m = (start + d) % n;
                    acc[m] = acc[m].max(v);
                }
                acc
            },
        )
        .reduce(
            || vec![f64::NEG_INFINITY; n],
            |a, b| a.into_iter().zip(b).map(|(x, y)| x.max(y)).collect(),
        )
}

/// `A_p` constant. For `p = 1` this is `max (Mw)/w`; for `p > 1` the
/// supremum over arcs of `⟨w⟩_I ⟨w^{-1/(p-1)}⟩_I^{p-1}`.
pub fn ap_constant(w: &Weight, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("A_p index must be in [1, ∞), got {p}")));
    }
    Ok(w.cached(ConstantKind::Ap, p, || ap_extremum(w, p).value))
}

/// `A_p` constant together with an extremal arc (`p > 1`) or the extremal
/// point as a length-1 arc (`p = 1`).
pub fn ap_extremum(w: &Weight, p: f64) -> ArcExtremum {
    if p == 1.0 {
        let mw = maximal_function(w);
        let mut best = ArcExtremum {
            value: f64::NEG_INFINITY,
            arc: Arc { start: 0, len: 1 },
        };
        for (m, (mv, wv)) in mw.iter().zip(w.values()).enumerate() {
            best = better(
                best,
                ArcExtremum {
                    value: mv / wv,
                    arc: Arc { start: m, len: 1 },
                },
            );
        }
        return best;
    }
    let dual: Vec<f64> = w.values().iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    arc_sup(&[w.values(), &dual], |st| st.means[0] * st.means[1].powf(p - 1.0))
}

/// `α_p` constant, `1 ≤ p ≤ 2`. The endpoints are `[w²]_{A_1}` and
/// `[w^{-1}]_{A_1}`.
pub fn alpha_p_constant(w: &Weight, p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("α_p index must be in [1, 2], got {p}")));
    }
    Ok(w.cached(ConstantKind::Alpha, p, || alpha_extremum(w, p).value))
}

pub fn alpha_extremum(w: &Weight, p: f64) -> ArcExtremum {
    if p == 1.0 {
        let sq = w.powf(2.0).expect("square of a weight is a weight");
        return ap_extremum(&sq, 1.0);
    }
    if p == 2.0 {
        return ap_extremum(&w.recip().expect("reciprocal of a weight is a weight"), 1.0);
    }
    let low: Vec<f64> = w.values().iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    let high: Vec<f64> = w.values().iter().map(|v| v.powf(2.0 / (2.0 - p))).collect();
    arc_sup(&[&low, &high], |st| {
        st.means[0].powf(p - 1.0) * st.means[1].powf((2.0 - p) / 2.0)
    })
}

/// `((2π/N) Σ |f|^p w)^{1/p}`.
pub fn weighted_lp_norm(f: &SampledFunction, p: f64, w: &Weight) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent must be positive, got {p}")));
    }
    if f.len() != w.len() {
        return Err(Error::GridMismatch {
            expected: w.len(),
            got: f.len(),
        });
    }
    let sum: f64 = f
        .samples()
        .iter()
        .zip(w.values())
        .map(|(z, wv)| z.norm().powf(p) * wv)
        .sum();
    Ok((2.0 * PI / f.len() as f64 * sum).powf(1.0 / p))
}

/// `sup_{t>0} t · a({|f| > t})`, evaluated exactly: the supremum is approached
/// from below each sample level `v`, giving `v · a({|f| ≥ v})`.
pub fn weak_quasinorm(f: &SampledFunction, a: &Weight) -> Result<f64> {
    if f.len() != a.len() {
        return Err(Error::GridMismatch {
            expected: a.len(),
            got: f.len(),
        });
    }
    weak_quasinorm_of_moduli(&f.abs(), a.values())
}

pub(crate) fn weak_quasinorm_of_moduli(moduli: &[f64], a: &[f64]) -> Result<f64> {
    let n = moduli.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| moduli[j].total_cmp(&moduli[i]));
    let h = 2.0 * PI / n as f64;
    let mut best = 0.0f64;
    let mut mass = 0.0;
    let mut i = 0;
    while i < n {
        let level = moduli[order[i]];
        // Absorb every sample tied at this level before evaluating it.
        while i < n && moduli[order[i]] == level {
            mass += a[order[i]];
            i += 1;
        }
        if level > 0.0 {
            best = best.max(level * h * mass);
        }
    }
    Ok(best)
}

/// Pointwise `w^t a^{1-t}`.
pub fn mix(w: &Weight, a: &Weight, t: f64) -> Result<Weight> {
    same_grid(w, a)?;
    if t == 1.0 {
        return Ok(Weight::new(w.values.clone())?);
    }
    if t == 0.0 {
        return Ok(Weight::new(a.values.clone())?);
    }
    Weight::new(
        w.values
            .iter()
            .zip(&a.values)
            .map(|(x, y)| x.powf(t) * y.powf(1.0 - t))
            .collect(),
    )
}
