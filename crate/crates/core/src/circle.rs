//! Functions on the uniform N-point grid of the circle.
//!
//! Grid points are `x_m = 2πm/N`. Spectra use the convention
//! `f(x_m) = Σ_n c_n e^{i n x_m}` with `n` ranging over the half-open window
//! `[-N/2, N/2)`, so the analysis transform carries the `1/N` and every
//! Fourier multiplier is a literal mask on coefficients. Integrals over the
//! circle are quadratures with weight `2π/N`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest coefficient are treated as
/// absent when deciding spectral support.
pub const SUPPORT_TOL: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Checks the grid-size invariant: a power of two, at least 8.
pub fn check_grid_size(n: usize) -> Result<()> {
    if n >= 8 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidGridSize(n))
    }
}

/// `x_m = 2πm/N`.
pub fn grid_point(n: usize, m: usize) -> f64 {
    2.0 * PI * m as f64 / n as f64
}

/// `e^{i k x_m}`, with the phase reduced modulo N before the trig call.
pub fn grid_exp(n: usize, k: i64, m: usize) -> Complex64 {
    let j = (k.rem_euclid(n as i64) as u128 * m as u128 % n as u128) as f64;
    let (s, c) = (2.0 * PI * j / n as f64).sin_cos();
    Complex64::new(c, s)
}

/// Half-open frequency window `[-N/2, N/2)`.
pub fn window(n: usize) -> (i64, i64) {
    (-(n as i64) / 2, n as i64 / 2)
}

pub fn in_window(n: usize, freq: i64) -> bool {
    let (lo, hi) = window(n);
    freq >= lo && freq < hi
}

/// Samples of a complex function on the uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct SampledFunction {
    samples: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        check_grid_size(samples.len())?;
        Ok(Self { samples })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_grid_size(n)?;
        Ok(Self {
            samples: (0..n).map(|m| f(grid_point(n, m))).collect(),
        })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn constant(n: usize, c: Complex64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// `c · e^{ikx}` sampled exactly on the grid.
    pub fn exponential(n: usize, k: i64, c: Complex64) -> Result<Self> {
        check_grid_size(n)?;
        Ok(Self {
            samples: (0..n).map(|m| c * grid_exp(n, k, m)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn abs(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    pub fn re(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            samples: self.samples.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Pointwise product with a real function on the same grid.
    pub fn scale_by(&self, factor: &[f64]) -> Self {
        assert_eq!(factor.len(), self.len(), "grid mismatch");
        Self {
            samples: self
                .samples
                .iter()
                .zip(factor)
                .map(|(z, &s)| z * s)
                .collect(),
        }
    }

    /// Pointwise quotient by a real function on the same grid.
    pub fn divide_by(&self, divisor: &[f64]) -> Self {
        assert_eq!(divisor.len(), self.len(), "grid mismatch");
        Self {
            samples: self
                .samples
                .iter()
                .zip(divisor)
                .map(|(z, &s)| z / s)
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.len(),
                got: other.len(),
            })
        }
    }

    /// Largest pointwise modulus difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Mean value `(1/N) Σ f(x_m)`, i.e. the zeroth coefficient.
    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }
}

impl TryFrom<Vec<[f64; 2]>> for SampledFunction {
    type Error = Error;

    fn try_from(pairs: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<SampledFunction> for Vec<[f64; 2]> {
    fn from(f: SampledFunction) -> Self {
        f.samples.into_iter().map(|z| [z.re, z.im]).collect()
    }
}

/// Fourier coefficients indexed by integer frequency in `[-N/2, N/2)`.
///
/// Stored in FFT order: slot `i` holds frequency `i` for `i < N/2` and
/// `i - N` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(n: usize) -> Result<Self> {
        check_grid_size(n)?;
        Ok(Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Builds a spectrum from `(frequency, coefficient)` pairs.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut s = Self::zeros(n)?;
        for (freq, c) in pairs {
            if !in_window(n, freq) {
                return Err(Error::WindowOverflow { freq, n });
            }
            s.set(freq, c);
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn slot(&self, freq: i64) -> usize {
        freq.rem_euclid(self.len() as i64) as usize
    }

    pub fn freq_of_slot(&self, slot: usize) -> i64 {
        let n = self.len();
        if slot < n / 2 {
            slot as i64
        } else {
            slot as i64 - n as i64
        }
    }

    /// Coefficient at `freq`; zero outside the window.
    pub fn get(&self, freq: i64) -> Complex64 {
        if in_window(self.len(), freq) {
            self.coeffs[self.slot(freq)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Panics if `freq` is outside the window.
    pub fn set(&mut self, freq: i64, c: Complex64) {
        assert!(in_window(self.len(), freq), "frequency {freq} outside window");
        let slot = self.slot(freq);
        self.coeffs[slot] = c;
    }

    pub fn add_at(&mut self, freq: i64, c: Complex64) {
        assert!(in_window(self.len(), freq), "frequency {freq} outside window");
        let slot = self.slot(freq);
        self.coeffs[slot] += c;
    }

    /// `(frequency, coefficient)` pairs in increasing frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let (lo, hi) = window(self.len());
        (lo..hi).map(move |f| (f, self.get(f)))
    }

    /// Raw FFT-ordered storage.
    pub fn raw(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Frequencies whose coefficient is not negligible relative to the
    /// largest one.
    pub fn support(&self) -> Vec<i64> {
        let cut = SUPPORT_TOL * self.max_abs();
        self.iter()
            .filter(|(_, c)| c.norm() > cut && c.norm() > 0.0)
            .map(|(f, _)| f)
            .collect()
    }

    /// Smallest and largest frequency in the support, if any.
    pub fn support_hull(&self) -> Option<(i64, i64)> {
        let s = self.support();
        Some((*s.first()?, *s.last()?))
    }

    /// Coefficientwise product with a real mask given per frequency.
    pub fn masked(&self, mask: impl Fn(i64) -> f64) -> Self {
        let mut out = self.clone();
        for slot in 0..out.len() {
            let f = out.freq_of_slot(slot);
            out.coeffs[slot] *= mask(f);
        }
        out
    }

    /// Coefficientwise product with another spectrum (spectral convolution).
    pub fn product(&self, other: &Spectrum) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Spectrum) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn add_assign(&mut self, other: &Spectrum) {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// Moves every coefficient from `n` to `n + k`. Non-negligible mass that
    /// would leave the window is an error.
    pub fn shifted(&self, k: i64) -> Result<Self> {
        let n = self.len();
        let cut = SUPPORT_TOL * self.max_abs();
        let mut out = Self::zeros(n)?;
        for (f, c) in self.iter() {
            if c.norm() <= cut || c.norm() == 0.0 {
                continue;
            }
            if !in_window(n, f + k) {
                return Err(Error::SpectrumOverflow { shift: k, n });
            }
            out.set(f + k, c);
        }
        Ok(out)
    }

    /// Mirror `n ↦ -n` with conjugation, the spectrum of `conj(f)`.
    /// The Nyquist slot has no mirror inside the window and must be empty.
    pub fn reflected(&self) -> Result<Self> {
        let n = self.len();
        let (lo, _) = window(n);
        let cut = SUPPORT_TOL * self.max_abs();
        if self.get(lo).norm() > cut && self.get(lo).norm() > 0.0 {
            return Err(Error::WindowOverflow { freq: -lo, n });
        }
        let mut out = Self::zeros(n)?;
        for (f, c) in self.iter() {
            if f != lo {
                out.set(-f, c.conj());
            }
        }
        Ok(out)
    }
}

/// Discrete Fourier coefficients of `f`.
pub fn to_spectrum(f: &SampledFunction) -> Spectrum {
    let n = f.len();
    let mut buf = f.samples.clone();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    Spectrum { coeffs: buf }
}

/// Synthesis `f(x_m) = Σ_n c_n e^{i n x_m}`.
pub fn from_spectrum(s: &Spectrum) -> SampledFunction {
    let mut buf = s.coeffs.clone();
    fft_in_place(&mut buf, true);
    SampledFunction { samples: buf }
}

/// `e^{ikx} f(x)` on the grid. Errors if the spectrum would leave the window.
pub fn modulate(f: &SampledFunction, k: i64) -> Result<SampledFunction> {
    let n = f.len();
    if k.unsigned_abs() > n as u64 / 2 {
        return Err(Error::SpectrumOverflow { shift: k, n });
    }
    if k == 0 {
        return Ok(f.clone());
    }
    to_spectrum(f).shifted(k)?;
    Ok(SampledFunction {
        samples: f
            .samples
            .iter()
            .enumerate()
            .map(|(m, &z)| z * grid_exp(n, k, m))
            .collect(),
    })
}

/// `((2π/N) Σ |f(x_m)|^p)^{1/p}`, or the max modulus for `p = ∞`.
/// A quasinorm for `0 < p < 1`.
pub fn lp_norm(f: &SampledFunction, p: f64) -> f64 {
    assert!(p > 0.0, "exponent must be positive, got {p}");
    if p.is_infinite() {
        return f.sup_norm();
    }
    let n = f.len() as f64;
    let sum: f64 = f.samples.iter().map(|z| z.norm().powf(p)).sum();
    (2.0 * PI / n * sum).powf(1.0 / p)
}

/// Band-limited interpolation onto a grid `factor` times finer.
pub fn upsample(f: &SampledFunction, factor: usize) -> Result<SampledFunction> {
    if factor == 0 || !factor.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "upsampling factor {factor} must be a power of two"
        )));
    }
    let s = to_spectrum(f);
    let n = f.len();
    let (lo, _) = window(n);
    let mut fine = Spectrum::zeros(n * factor)?;
    for (freq, c) in s.iter() {
        if freq == lo {
            // Nyquist: split symmetrically so real inputs stay real.
            fine.set(freq, c * 0.5);
            fine.set(-freq, c * 0.5);
        } else {
            fine.set(freq, c);
        }
    }
    Ok(from_spectrum(&fine))
}

/// Inverse of [`upsample`]: keeps the coarse window, erroring if the fine
/// spectrum has mass outside it.
pub fn downsample(f: &SampledFunction, factor: usize) -> Result<SampledFunction> {
    let n = f.len() / factor;
    check_grid_size(n)?;
    let s = to_spectrum(f);
    let (lo, hi) = window(n);
    let cut = SUPPORT_TOL * s.max_abs();
    let mut coarse = Spectrum::zeros(n)?;
    for (freq, c) in s.iter() {
        if (lo..hi).contains(&freq) {
            coarse.set(freq, c);
        } else if freq == hi {
            coarse.add_at(lo, c);
        } else if c.norm() > cut && c.norm() > 0.0 {
            return Err(Error::WindowOverflow { freq, n });
        }
    }
    Ok(from_spectrum(&coarse))
}

/// Integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[i64; 2]", into = "[i64; 2]")]
pub struct FreqInterval {
    lo: i64,
    hi: i64,
}

impl FreqInterval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn contains_interval(&self, other: &FreqInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &FreqInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn shifted(&self, k: i64) -> FreqInterval {
        FreqInterval {
            lo: self.lo + k,
            hi: self.hi + k,
        }
    }

    /// Integers within `k·len/2` of the centre: the `k`-fold concentric
    /// dilation (`3Δ`, `9Δ`).
    pub fn dilate(&self, k: u64) -> FreqInterval {
        let twice_center = self.lo + self.hi;
        let width = (k * self.len()) as i64;
        FreqInterval {
            lo: (twice_center - width).div_euclid(2) + (twice_center - width).rem_euclid(2),
            hi: (twice_center + width).div_euclid(2),
        }
    }

    pub fn in_window(&self, n: usize) -> bool {
        in_window(n, self.lo) && in_window(n, self.hi)
    }

    pub fn check_window(&self, n: usize) -> Result<()> {
        if self.in_window(n) {
            Ok(())
        } else {
            Err(Error::IntervalOutOfWindow {
                lo: self.lo,
                hi: self.hi,
                n,
            })
        }
    }

    pub fn dyadic_class(&self) -> Option<u32> {
        let len = self.len();
        len.is_power_of_two().then(|| len.trailing_zeros())
    }
}

impl fmt::Display for FreqInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl TryFrom<[i64; 2]> for FreqInterval {
    type Error = Error;

    fn try_from([lo, hi]: [i64; 2]) -> Result<Self> {
        Self::new(lo, hi)
    }
}

impl From<FreqInterval> for [i64; 2] {
    fn from(i: FreqInterval) -> Self {
        [i.lo, i.hi]
    }
}

/// Ordered family of pairwise disjoint frequency intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FreqInterval>", into = "Vec<FreqInterval>")]
pub struct Partition {
    intervals: Vec<FreqInterval>,
}

impl Partition {
    pub fn new(intervals: Vec<FreqInterval>) -> Result<Self> {
        let mut sorted = intervals.clone();
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0].intersects(&pair[1]) {
                return Err(Error::OverlappingIntervals(pair[0].into(), pair[1].into()));
            }
        }
        Ok(Self { intervals })
    }

    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(lo, hi)| FreqInterval::new(lo, hi))
                .collect::<Result<_>>()?,
        )
    }

    pub fn intervals(&self) -> &[FreqInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn left_endpoints(&self) -> Vec<i64> {
        self.intervals.iter().map(|i| i.lo).collect()
    }

    pub fn check_window(&self, n: usize) -> Result<()> {
        self.intervals.iter().try_for_each(|i| i.check_window(n))
    }

    /// Whether the intervals cover the whole window of `n`.
    pub fn covers_window(&self, n: usize) -> bool {
        let total: u64 = self.intervals.iter().map(|i| i.len()).sum();
        total == n as u64 && self.intervals.iter().all(|i| i.in_window(n))
    }

    /// `B_k = { j : len(Δ_j) = 2^k }`; intervals of non-dyadic length are
    /// omitted.
    pub fn dyadic_classes(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut classes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (j, iv) in self.intervals.iter().enumerate() {
            if let Some(k) = iv.dyadic_class() {
                classes.entry(k).or_default().push(j);
            }
        }
        classes
    }

    pub fn is_nonnegative(&self) -> bool {
        self.intervals.iter().all(|i| i.lo >= 0)
    }

    /// Splits into the parts below zero and at or above zero. Each part comes
    /// with the index of the original interval every piece was cut from.
    pub fn split_by_sign(&self) -> (Partition, Vec<usize>, Partition, Vec<usize>) {
        let (mut neg, mut neg_src, mut pos, mut pos_src) = (vec![], vec![], vec![], vec![]);
        for (j, iv) in self.intervals.iter().enumerate() {
            if iv.lo < 0 {
                neg.push(FreqInterval {
                    lo: iv.lo,
                    hi: iv.hi.min(-1),
                });
                neg_src.push(j);
            }
            if iv.hi >= 0 {
                pos.push(FreqInterval {
                    lo: iv.lo.max(0),
                    hi: iv.hi,
                });
                pos_src.push(j);
            }
        }
        (
            Partition { intervals: neg },
            neg_src,
            Partition { intervals: pos },
            pos_src,
        )
    }

    /// Dyadic blocks of the window: `{0}`, `{-1}`, and `±[2^k, 2^{k+1})`
    /// (the negative side mirrored around `-1/2`).
    pub fn dyadic_window(n: usize) -> Result<Self> {
        check_grid_size(n)?;
        let half = n as i64 / 2;
        let mut iv = vec![FreqInterval { lo: 0, hi: 0 }, FreqInterval { lo: -1, hi: -1 }];
        let mut k = 1i64;
        while k < half {
            iv.push(FreqInterval { lo: k, hi: 2 * k - 1 });
            iv.push(FreqInterval {
                lo: -2 * k,
                hi: -k - 1,
            });
            k *= 2;
        }
        Ok(Self { intervals: iv })
    }

    /// Consecutive blocks of `width` frequencies tiling the whole window.
    pub fn uniform_window(n: usize, width: usize) -> Result<Self> {
        check_grid_size(n)?;
        if width == 0 {
            return Err(Error::InvalidParameter("block width must be positive".into()));
        }
        let (lo, hi) = window(n);
        let mut iv = vec![];
        let mut a = lo;
        while a < hi {
            let b = (a + width as i64 - 1).min(hi - 1);
            iv.push(FreqInterval { lo: a, hi: b });
            a = b + 1;
        }
        Ok(Self { intervals: iv })
    }
}

impl TryFrom<Vec<FreqInterval>> for Partition {
    type Error = Error;

    fn try_from(v: Vec<FreqInterval>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Partition> for Vec<FreqInterval> {
    fn from(p: Partition) -> Self {
        p.intervals
    }
}

impl From<FreqInterval> for (i64, i64) {
    fn from(i: FreqInterval) -> Self {
        (i.lo, i.hi)
    }
}
