//! Interval multipliers, the square function, and the composite operators
//! `T`, `T_u` and `P_u` acting on finite sequences of functions.

use num_complex::Complex64;

use crate::circle::{
    downsample, from_spectrum, grid_exp, to_spectrum, FreqInterval, Partition,
    SampledFunction, Spectrum,
};
use crate::error::{Error, Result};
use crate::weights::{weak_quasinorm, weighted_lp_norm, Weight};

/// Finite sequence of functions on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSequence {
    entries: Vec<SampledFunction>,
}

impl FunctionSequence {
    pub fn new(entries: Vec<SampledFunction>) -> Result<Self> {
        if let Some(first) = entries.first() {
            for f in &entries[1..] {
                first.same_grid(f)?;
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[SampledFunction] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Grid size, if the sequence is nonempty.
    pub fn grid(&self) -> Option<usize> {
        self.entries.first().map(SampledFunction::len)
    }

    /// Pointwise `(Σ_j |f_j|²)^{1/2}`.
    pub fn l2_modulus(&self) -> Vec<f64> {
        let n = self.grid().unwrap_or(0);
        let mut acc = vec![0.0; n];
        for f in &self.entries {
            for (a, z) in acc.iter_mut().zip(f.samples()) {
                *a += z.norm_sqr();
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }

    fn check_against(&self, p: &Partition) -> Result<usize> {
        if self.len() != p.len() {
            return Err(Error::LengthMismatch {
                expected: p.len(),
                got: self.len(),
            });
        }
        let n = self
            .grid()
            .ok_or(Error::LengthMismatch { expected: 1, got: 0 })?;
        p.check_window(n)?;
        Ok(n)
    }
}

fn mask_interval(s: &Spectrum, iv: &FreqInterval) -> Spectrum {
    s.masked(|k| if iv.contains(k) { 1.0 } else { 0.0 })
}

/// `M_Δ f`: keeps the coefficients with frequency in `Δ`.
pub fn apply_multiplier(f: &SampledFunction, iv: &FreqInterval) -> Result<SampledFunction> {
    iv.check_window(f.len())?;
    Ok(from_spectrum(&mask_interval(&to_spectrum(f), iv)))
}

/// `P_+`: keeps the coefficients with `n ≥ 0`.
pub fn riesz_projection(f: &SampledFunction) -> SampledFunction {
    from_spectrum(&to_spectrum(f).masked(|k| if k >= 0 { 1.0 } else { 0.0 }))
}

/// `M_Δ f` assembled from two conjugated Riesz projections,
/// `e^{iax} P_+(e^{-iax} f) - e^{ibx} P_+(e^{-ibx} f)` for `Δ = [a, b-1]`.
///
/// The shifts are carried out on a grid twice as fine so that no frequency
/// wraps around the window; the result is brought back to the input grid.
pub fn riesz_representation(f: &SampledFunction, iv: &FreqInterval) -> Result<SampledFunction> {
    iv.check_window(f.len())?;
    // Plain zero-padding keeps the spectrum inside [-N/2, N/2), so every
    // shift below stays inside the fine window.
    let mut padded = Spectrum::zeros(2 * f.len())?;
    for (freq, c) in to_spectrum(f).iter() {
        padded.set(freq, c);
    }
    let fine = from_spectrum(&padded);
    // |a|, |b| ≤ N/2 and the padded spectrum sits in [-N/2, N/2), so the
    // shifted spectra stay inside [-N, N). The unchecked modulation also
    // avoids misreading roundoff as overflow when a projection vanishes.
    let a = iv.lo();
    let b = iv.hi() + 1;
    let left = raw_modulate(&riesz_projection(&raw_modulate(&fine, -a)), a);
    let right = raw_modulate(&riesz_projection(&raw_modulate(&fine, -b)), b);
    downsample(&left.sub(&right)?, 2)
}

fn raw_modulate(f: &SampledFunction, k: i64) -> SampledFunction {
    let n = f.len();
    SampledFunction::new(
        f.samples()
            .iter()
            .enumerate()
            .map(|(m, z)| z * grid_exp(n, k, m))
            .collect(),
    )
    .expect("length preserved")
}

/// Pointwise `σf = (Σ_j |M_{Δ_j} f|²)^{1/2}`, returned as a real function.
pub fn square_function(f: &SampledFunction, p: &Partition) -> Result<SampledFunction> {
    SampledFunction::from_real(&square_function_values(f, p)?)
}

pub(crate) fn square_function_values(f: &SampledFunction, p: &Partition) -> Result<Vec<f64>> {
    p.check_window(f.len())?;
    let s = to_spectrum(f);
    let mut acc = vec![0.0; f.len()];
    for iv in p.intervals() {
        let piece = from_spectrum(&mask_interval(&s, iv));
        for (a, z) in acc.iter_mut().zip(piece.samples()) {
            *a += z.norm_sqr();
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// `T({f_j}) = Σ_j M_{Δ_j} f_j`.
pub fn op_t(fs: &FunctionSequence, p: &Partition) -> Result<SampledFunction> {
    let n = fs.check_against(p)?;
    let mut total = Spectrum::zeros(n)?;
    for (f, iv) in fs.entries().iter().zip(p.intervals()) {
        total.add_assign(&mask_interval(&to_spectrum(f), iv));
    }
    Ok(from_spectrum(&total))
}

fn check_weight(fs: &FunctionSequence, u: &Weight) -> Result<()> {
    match fs.grid() {
        Some(n) if n != u.len() => Err(Error::GridMismatch {
            expected: u.len(),
            got: n,
        }),
        _ => Ok(()),
    }
}

/// `T_u({f_j}) = u^{-1} T({u f_j})`.
pub fn op_t_u(fs: &FunctionSequence, p: &Partition, u: &Weight) -> Result<SampledFunction> {
    check_weight(fs, u)?;
    let weighted = FunctionSequence::new(fs.entries().iter().map(|f| f.scale_by(u.values())).collect())?;
    Ok(op_t(&weighted, p)?.divide_by(u.values()))
}

/// `P_u({f_j}) = {u^{-1} M_{Δ_j}(u f_j)}`.
pub fn op_p_u(fs: &FunctionSequence, p: &Partition, u: &Weight) -> Result<FunctionSequence> {
    check_weight(fs, u)?;
    fs.check_against(p)?;
    FunctionSequence::new(
        fs.entries()
            .iter()
            .zip(p.intervals())
            .map(|(f, iv)| Ok(apply_multiplier(&f.scale_by(u.values()), iv)?.divide_by(u.values())))
            .collect::<Result<_>>()?,
    )
}

/// `‖T_u{f_j}‖_{L^{1,∞}(a)} / ‖(Σ|f_j|²)^{1/2}‖_{L^1(a)}` with `u = a/w`.
/// A vanishing input gives `0`.
pub fn theorem2_ratio(fs: &FunctionSequence, p: &Partition, a: &Weight, w: &Weight) -> Result<f64> {
    let u = Weight::ratio(a, w)?;
    let numerator = weak_quasinorm(&op_t_u(fs, p, &u)?, a)?;
    let modulus = SampledFunction::from_real(&fs.l2_modulus())?;
    let denominator = weighted_lp_norm(&modulus, 1.0, a)?;
    if denominator == 0.0 {
        return if numerator == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::ZeroDenominator)
        };
    }
    Ok(numerator / denominator)
}

/// `Σ_n c_n conj(d_n)`-style inner product `(1/N) Σ f conj(g)`.
pub fn inner(f: &SampledFunction, g: &SampledFunction) -> Complex64 {
    f.samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        / f.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::{lp_norm, window};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn noise(n: usize, seed: u64) -> SampledFunction {
        let mut s = seed.wrapping_mul(0x2545F4914F6CDD1D).wrapping_add(17);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        SampledFunction::new((0..n).map(|_| Complex64::new(next(), next())).collect()).unwrap()
    }

    /// Mask-then-invert through the O(N²) transform.
    fn naive_multiplier(f: &SampledFunction, iv: &FreqInterval) -> SampledFunction {
        let n = f.len();
        let (lo, hi) = window(n);
        let coeffs: Vec<(i64, Complex64)> = (lo..hi)
            .filter(|k| iv.contains(*k))
            .map(|k| {
                let s: Complex64 = f
                    .samples()
                    .iter()
                    .enumerate()
                    .map(|(m, z)| z * grid_exp(n, -k, m))
                    .sum();
                (k, s / n as f64)
            })
            .collect();
        SampledFunction::new(
            (0..n)
                .map(|m| coeffs.iter().map(|(k, ck)| ck * grid_exp(n, *k, m)).sum())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn multiplier_on_exponentials() {
        let f = SampledFunction::exponential(32, 3, c(1.0)).unwrap();
        let own = apply_multiplier(&f, &FreqInterval::new(3, 3).unwrap()).unwrap();
        assert!(own.max_abs_diff(&f) < 1e-14);
        let off = apply_multiplier(&f, &FreqInterval::new(4, 7).unwrap()).unwrap();
        assert!(off.sup_norm() < 1e-14);
    }

    #[test]
    fn multiplier_matches_naive() {
        let f = noise(32, 1);
        let iv = FreqInterval::new(-5, 9).unwrap();
        let got = apply_multiplier(&f, &iv).unwrap();
        let want = naive_multiplier(&f, &iv);
        assert!(got.max_abs_diff(&want) <= 1e-10 * want.sup_norm());
    }

    #[test]
    fn multiplier_window_checked() {
        let f = noise(16, 2);
        assert!(matches!(
            apply_multiplier(&f, &FreqInterval::new(0, 8).unwrap()),
            Err(Error::IntervalOutOfWindow { .. })
        ));
    }

    #[test]
    fn multiplier_idempotent_and_orthogonal() {
        let f = noise(64, 3);
        let g = noise(64, 4);
        let d1 = FreqInterval::new(-7, 2).unwrap();
        let d2 = FreqInterval::new(3, 20).unwrap();
        let once = apply_multiplier(&f, &d1).unwrap();
        let twice = apply_multiplier(&once, &d1).unwrap();
        assert!(twice.max_abs_diff(&once) < 1e-15);
        let ip = inner(&once, &apply_multiplier(&g, &d2).unwrap());
        assert!(ip.norm() < 1e-12);
    }

    #[test]
    fn riesz_projection_examples() {
        let n = 16;
        let f = SampledFunction::exponential(n, -1, c(1.0))
            .unwrap()
            .add(&SampledFunction::constant(n, c(1.0)).unwrap())
            .unwrap()
            .add(&SampledFunction::exponential(n, 1, c(1.0)).unwrap())
            .unwrap();
        let want = SampledFunction::constant(n, c(1.0))
            .unwrap()
            .add(&SampledFunction::exponential(n, 1, c(1.0)).unwrap())
            .unwrap();
        assert!(riesz_projection(&f).max_abs_diff(&want) < 1e-14);
        assert!(riesz_projection(&want).max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn riesz_representation_matches_multiplier() {
        let n = 64;
        let f = noise(n, 5);
        for (lo, hi) in [(-32, 31), (-32, -32), (31, 31), (0, 0), (-10, 4), (5, 30)] {
            let iv = FreqInterval::new(lo, hi).unwrap();
            let direct = apply_multiplier(&f, &iv).unwrap();
            let rep = riesz_representation(&f, &iv).unwrap();
            assert!(rep.max_abs_diff(&direct) < 1e-10 * f.sup_norm(), "{iv}");
        }
    }

    #[test]
    fn square_function_examples() {
        let n = 32;
        let f = SampledFunction::exponential(n, 5, Complex64::new(0.0, -2.0)).unwrap();
        let p = Partition::from_pairs(&[(3, 8)]).unwrap();
        let s = square_function(&f, &p).unwrap();
        assert!(s.samples().iter().all(|z| (z.re - 2.0).abs() < 1e-14 && z.im == 0.0));

        let g = SampledFunction::exponential(n, 1, c(1.0))
            .unwrap()
            .add(&SampledFunction::exponential(n, 2, c(1.0)).unwrap())
            .unwrap();
        let p = Partition::from_pairs(&[(1, 1), (2, 2)]).unwrap();
        let s = square_function(&g, &p).unwrap();
        assert!(s.samples().iter().all(|z| (z.re - 2f64.sqrt()).abs() < 1e-14));
    }

    #[test]
    fn square_function_parseval_and_bessel() {
        let n = 128;
        let f = noise(n, 6);
        let full = Partition::dyadic_window(n).unwrap();
        let s = square_function(&f, &full).unwrap();
        let (a, b) = (lp_norm(&s, 2.0), lp_norm(&f, 2.0));
        assert!((a - b).abs() <= 1e-10 * b);
        let partial = Partition::from_pairs(&[(-3, 0), (5, 17), (40, 40)]).unwrap();
        assert!(lp_norm(&square_function(&f, &partial).unwrap(), 2.0) <= b + 1e-10);
    }

    #[test]
    fn op_t_examples() {
        let n = 32;
        let f = noise(n, 7);
        let iv = FreqInterval::new(-4, 6).unwrap();
        let p = Partition::new(vec![iv]).unwrap();
        let fs = FunctionSequence::new(vec![f.clone()]).unwrap();
        assert!(op_t(&fs, &p).unwrap().max_abs_diff(&apply_multiplier(&f, &iv).unwrap()) < 1e-14);

        let p = Partition::from_pairs(&[(1, 3), (5, 9)]).unwrap();
        let f1 = apply_multiplier(&noise(n, 8), &p.intervals()[0]).unwrap();
        let f2 = apply_multiplier(&noise(n, 9), &p.intervals()[1]).unwrap();
        let fs = FunctionSequence::new(vec![f1.clone(), f2.clone()]).unwrap();
        let sum = f1.add(&f2).unwrap();
        assert!(op_t(&fs, &p).unwrap().max_abs_diff(&sum) < 1e-14);

        let short = FunctionSequence::new(vec![f1]).unwrap();
        assert!(matches!(op_t(&short, &p), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn op_t_u_constant_weights_cancel() {
        let n = 32;
        let p = Partition::from_pairs(&[(-6, -1), (0, 4), (9, 12)]).unwrap();
        let fs = FunctionSequence::new((0..3).map(|s| noise(n, 20 + s)).collect()).unwrap();
        let base = op_t(&fs, &p).unwrap();
        for cst in [1.0, 3.5] {
            let u = Weight::constant(n, cst).unwrap();
            assert!(op_t_u(&fs, &p, &u).unwrap().max_abs_diff(&base) < 1e-13);
        }
    }

    #[test]
    fn op_p_u_sums_to_op_t_u() {
        let n = 64;
        let p = Partition::from_pairs(&[(-20, -3), (0, 4), (9, 30)]).unwrap();
        let fs = FunctionSequence::new((0..3).map(|s| noise(n, 30 + s)).collect()).unwrap();
        let u = Weight::new((0..n).map(|m| 1.5 + (m as f64 * 0.3).sin()).collect()).unwrap();
        let parts = op_p_u(&fs, &p, &u).unwrap();
        let mut sum = SampledFunction::zeros(n).unwrap();
        for e in parts.entries() {
            sum = sum.add(e).unwrap();
        }
        assert!(sum.max_abs_diff(&op_t_u(&fs, &p, &u).unwrap()) < 1e-12);

        let unit = Weight::unit(n).unwrap();
        let banded = FunctionSequence::new(
            fs.entries()
                .iter()
                .zip(p.intervals())
                .map(|(f, iv)| apply_multiplier(f, iv).unwrap())
                .collect(),
        )
        .unwrap();
        let same = op_p_u(&banded, &p, &unit).unwrap();
        for (x, y) in same.entries().iter().zip(banded.entries()) {
            assert!(x.max_abs_diff(y) < 1e-14);
        }
    }

    #[test]
    fn theorem2_ratio_edge_cases() {
        let n = 32;
        let a = Weight::new((0..n).map(|m| 1.0 + 0.5 * (m as f64).cos()).collect()).unwrap();
        let w = Weight::unit(n).unwrap();
        let p = Partition::from_pairs(&[(-16, 15)]).unwrap();
        let zero = FunctionSequence::new(vec![SampledFunction::zeros(n).unwrap()]).unwrap();
        assert_eq!(theorem2_ratio(&zero, &p, &a, &w).unwrap(), 0.0);
        // whole-window interval with u = a: T_u is the identity, Chebyshev gives ≤ 1
        let fs = FunctionSequence::new(vec![noise(n, 40)]).unwrap();
        let r = theorem2_ratio(&fs, &p, &a, &a).unwrap();
        assert!(r <= 1.0 + 1e-12, "{r}");
    }
}
