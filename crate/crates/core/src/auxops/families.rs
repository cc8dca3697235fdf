//! The trigonometric polynomial families behind `S` and `R`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::{in_window, FreqInterval, Spectrum};
use crate::error::{Error, Result};

/// Default pass-band parameter.
pub const DEFAULT_XI: f64 = 0.9;

/// Quintic smoothstep `6s⁵ − 15s⁴ + 10s³`, C² at both ends.
fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * s * (s * (6.0 * s - 15.0) + 10.0)
    }
}

/// Bump profile on `[0, 1]`: zero at both ends, one on
/// `[(1−ξ)/2, (1+ξ)/2]`, quintic ramps in between.
pub fn eta(t: f64, xi: f64) -> f64 {
    let edge = (1.0 - xi) * 0.5;
    let top = (1.0 + xi) * 0.5;
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else if t >= edge && t <= top {
        1.0
    } else if t < edge {
        smoothstep(t / edge)
    } else {
        smoothstep((1.0 - t) / edge)
    }
}

/// `φ_m` for `m = 0..=m_max`, with `φ̂_m(n) = η(n/2^m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiFamily {
    xi: f64,
    polys: Vec<Spectrum>,
}

pub fn build_phi_family(m_max: u32, xi: f64, n: usize) -> Result<PhiFamily> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParameter(format!("ξ must lie in (0, 1), got {xi}")));
    }
    // φ̂_m vanishes at 2^m, so the top coefficient may sit just outside.
    let top = 1i64.checked_shl(m_max).unwrap_or(i64::MAX);
    if m_max >= 62 || !in_window(n, top - 1) {
        return Err(Error::WindowOverflow { freq: top, n });
    }
    let polys = (0..=m_max)
        .map(|m| {
            let len = 1i64 << m;
            Spectrum::from_pairs(
                n,
                (1..len).map(|k| (k, Complex64::new(eta(k as f64 / len as f64, xi), 0.0))),
            )
        })
        .collect::<Result<_>>()?;
    Ok(PhiFamily { xi, polys })
}

/// `C_m = 2^m max_σ |φ_m(e^{iσ})| σ²` for each probed `m`, and the spread
/// `max C / min C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProbe {
    pub ms: Vec<u32>,
    pub constants: Vec<f64>,
    pub fitted_c: f64,
    pub spread: f64,
}

impl PhiFamily {
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn m_max(&self) -> u32 {
        self.polys.len() as u32 - 1
    }

    pub fn grid(&self) -> usize {
        self.polys[0].len()
    }

    pub fn spectrum(&self, m: u32) -> Option<&Spectrum> {
        self.polys.get(m as usize)
    }

    pub fn coefficient(&self, m: u32, k: i64) -> f64 {
        self.spectrum(m).map_or(0.0, |s| s.get(k).re)
    }

    /// Integers in `[(1−ξ)2^{m−1}, (1+ξ)2^{m−1}]`, if any.
    pub fn passband(&self, m: u32) -> Option<FreqInterval> {
        passband(m, self.xi)
    }

    /// Evaluates `|φ_m(e^{iσ})|` directly on `samples` points of `(0, π]`
    /// and reports the `(r, u) = (0, 2)` decay constants.
    pub fn decay_probe(&self, ms: &[u32], samples: usize) -> Result<DecayProbe> {
        let mut constants = Vec::with_capacity(ms.len());
        for &m in ms {
            let s = self
                .spectrum(m)
                .ok_or_else(|| Error::InvalidParameter(format!("family has no φ_{m}")))?;
            let coeffs: Vec<(i64, f64)> = s
                .iter()
                .filter(|(_, c)| c.re != 0.0)
                .map(|(k, c)| (k, c.re))
                .collect();
            let worst = (1..=samples)
                .map(|i| {
                    let sigma = std::f64::consts::PI * i as f64 / samples as f64;
                    let value: Complex64 = coeffs
                        .iter()
                        .map(|&(k, c)| Complex64::from_polar(c, k as f64 * sigma))
                        .sum();
                    value.norm() * sigma * sigma
                })
                .fold(0.0, f64::max);
            constants.push(worst * (1u64 << m) as f64);
        }
        let hi = constants.iter().cloned().fold(0.0, f64::max);
        let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(DecayProbe {
            ms: ms.to_vec(),
            fitted_c: hi,
            spread: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            constants,
        })
    }
}

pub(crate) fn passband(m: u32, xi: f64) -> Option<FreqInterval> {
    let half = (1u64 << m) as f64 * 0.5;
    let lo = ((1.0 - xi) * half).ceil() as i64;
    let hi = ((1.0 + xi) * half).floor() as i64;
    FreqInterval::new(lo, hi).ok()
}

/// Log-scale hats: `β̂_j` rises on `[A^{j−1}, A^j]` and falls on
/// `[A^j, A^{j+1}]` in the variable `log_A n`, so each `n ≥ 1` is shared by
/// at most two neighbours whose values sum to exactly one.
///
/// A mirrored family acts on `n ≤ −1` through `n ↦ −n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaFamily {
    a: f64,
    covered: FreqInterval,
    mirrored: bool,
    polys: Vec<BetaPoly>,
}

/// Nonzero coefficients of one `β_j`, starting at frequency `lo`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaPoly {
    pub j: usize,
    pub lo: i64,
    pub coeffs: Vec<f64>,
}

const THETA_QUANTUM: f64 = 4294967296.0; // 2^32

/// Largest `j ≥ 0` with `A^j ≤ n` (via `powi`) and the quantized position
/// `θ ∈ [0, 1)` of `log_A n` above `j`.
pub(crate) fn hat_position(a: f64, n: u64) -> (usize, f64) {
    debug_assert!(n >= 1);
    let x = n as f64;
    let mut j = (x.ln() / a.ln()).floor().max(0.0) as i32;
    while a.powi(j + 1) <= x {
        j += 1;
    }
    while j > 0 && a.powi(j) > x {
        j -= 1;
    }
    let raw = (x.ln() / a.ln() - j as f64).clamp(0.0, 1.0);
    // Dyadic quantization keeps 1 − θ exact.
    let theta = ((raw * THETA_QUANTUM).floor() / THETA_QUANTUM).min(1.0 - 1.0 / THETA_QUANTUM);
    (j as usize, theta)
}

/// The (at most two) hats alive at `n ≥ 1`, as `(j, β̂_j(n))`.
pub(crate) fn hats_at(a: f64, n: u64) -> [(usize, f64); 2] {
    let (j, theta) = hat_position(a, n);
    if j == 0 {
        // Below A the first hat is held at one.
        [(1, 1.0), (2, 0.0)]
    } else {
        [(j, 1.0 - theta), (j + 1, theta)]
    }
}

pub fn build_beta_family(a: f64, window: FreqInterval) -> Result<BetaFamily> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("A must exceed 1, got {a}")));
    }
    let covered = FreqInterval::new(window.lo().max(1), window.hi())
        .map_err(|_| Error::InvalidParameter(format!("window {window} has no positive frequency")))?;
    let mut polys: Vec<BetaPoly> = Vec::new();
    for n in covered.lo()..=covered.hi() {
        for (j, v) in hats_at(a, n as u64) {
            if v == 0.0 {
                continue;
            }
            match polys.iter_mut().rev().find(|p| p.j == j) {
                Some(p) => {
                    debug_assert_eq!(p.lo + p.coeffs.len() as i64, n);
                    p.coeffs.push(v);
                }
                None => polys.push(BetaPoly { j, lo: n, coeffs: vec![v] }),
            }
        }
    }
    polys.sort_by_key(|p| p.j);
    Ok(BetaFamily {
        a,
        covered,
        mirrored: false,
        polys,
    })
}

impl BetaFamily {
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Frequencies on which the hats sum to one.
    pub fn covered(&self) -> FreqInterval {
        self.covered
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    /// The family `β̂_j(−n)`, covering the reflected range.
    pub fn mirrored(&self) -> BetaFamily {
        BetaFamily {
            a: self.a,
            covered: FreqInterval::new(-self.covered.hi(), -self.covered.lo()).expect("nonempty"),
            mirrored: !self.mirrored,
            polys: self
                .polys
                .iter()
                .map(|p| BetaPoly {
                    j: p.j,
                    lo: -(p.lo + p.coeffs.len() as i64 - 1),
                    coeffs: p.coeffs.iter().rev().cloned().collect(),
                })
                .collect(),
        }
    }

    pub fn polys(&self) -> &[BetaPoly] {
        &self.polys
    }

    /// Largest index with a nonzero hat on the covered range.
    pub fn max_index(&self) -> usize {
        self.polys.last().map_or(0, |p| p.j)
    }

    /// `β̂_j(n)`; zero off the covered range.
    pub fn coefficient(&self, j: usize, n: i64) -> f64 {
        if !self.covered.contains(n) {
            return 0.0;
        }
        let m = if self.mirrored { -n } else { n };
        hats_at(self.a, m as u64)
            .iter()
            .find(|(i, _)| *i == j)
            .map_or(0.0, |&(_, v)| v)
    }

    /// The hats alive at `n` as `(j, β̂_j(n))` pairs with nonzero value.
    pub fn alive_at(&self, n: i64) -> Vec<(usize, f64)> {
        if !self.covered.contains(n) {
            return vec![];
        }
        let m = if self.mirrored { -n } else { n };
        hats_at(self.a, m as u64)
            .into_iter()
            .filter(|&(_, v)| v != 0.0)
            .collect()
    }

    /// Real support `[A^{j−1}, A^{j+1}]` of `β_j`, signed for mirrored
    /// families.
    pub fn support_bounds(&self, j: usize) -> (f64, f64) {
        let (lo, hi) = (self.a.powi(j as i32 - 1), self.a.powi(j as i32 + 1));
        if self.mirrored {
            (-hi, -lo)
        } else {
            (lo, hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_shape() {
        assert_eq!(eta(0.0, 0.9), 0.0);
        assert_eq!(eta(1.0, 0.9), 0.0);
        assert_eq!(eta(0.5, 0.9), 1.0);
        assert_eq!(eta(0.05, 0.9), 1.0);
        assert_eq!(eta(0.95, 0.9), 1.0);
        assert!(eta(0.025, 0.9) > 0.0 && eta(0.025, 0.9) < 1.0);
        assert!((eta(0.3, 0.2) - eta(0.7, 0.2)).abs() < 1e-15);
    }

    #[test]
    fn phi_invariants_exact() {
        let xi = 0.9;
        let fam = build_phi_family(8, xi, 1024).unwrap();
        for m in 0..=8u32 {
            let s = fam.spectrum(m).unwrap();
            let len = 1i64 << m;
            let half = (1i64 << m) as f64 * 0.5;
            for (k, c) in s.iter() {
                assert_eq!(c.im, 0.0);
                assert!(c.re.abs() <= 1.0);
                if !(0..=len).contains(&k) {
                    assert_eq!(c.re, 0.0, "m={m} k={k}");
                }
                let kf = k as f64;
                if kf >= (1.0 - xi) * half && kf <= (1.0 + xi) * half {
                    assert_eq!(c.re, 1.0, "m={m} k={k}");
                }
            }
        }
        assert_eq!(fam.coefficient(5, 16), 1.0);
        assert_eq!(fam.coefficient(5, -1), 0.0);
    }

    #[test]
    fn phi_window_checked() {
        assert!(build_phi_family(5, 0.9, 64).is_ok());
        assert!(matches!(build_phi_family(6, 0.9, 64), Err(Error::WindowOverflow { .. })));
        assert!(build_phi_family(3, 1.0, 64).is_err());
    }

    #[test]
    fn passband_counts() {
        let counts: Vec<u64> = (0..6).map(|m| passband(m, 0.9).map_or(0, |p| p.len())).collect();
        assert_eq!(counts, vec![0, 1, 3, 7, 15, 29]);
    }

    #[test]
    fn decay_constants_are_finite() {
        let fam = build_phi_family(8, 0.9, 1024).unwrap();
        let probe = fam.decay_probe(&[4, 5, 6, 7, 8], 2048).unwrap();
        assert!(probe.constants.iter().all(|c| c.is_finite() && *c > 0.0));
    }

    #[test]
    fn beta_partition_of_unity() {
        for a in [2.0, 2f64.powf(0.1), 1.5] {
            let fam = build_beta_family(a, FreqInterval::new(1, 2000).unwrap()).unwrap();
            for n in 1..=2000i64 {
                let alive = fam.alive_at(n);
                assert!(alive.len() <= 2);
                assert_eq!(alive.iter().map(|(_, v)| v).sum::<f64>(), 1.0, "A={a} n={n}");
                for (j, v) in alive {
                    assert!(v > 0.0);
                    let (lo, hi) = fam.support_bounds(j);
                    assert!(lo <= n as f64 && n as f64 <= hi, "A={a} j={j} n={n}");
                }
            }
        }
    }

    #[test]
    fn beta_polys_match_coefficients() {
        let a = 2f64.powf(0.1);
        let fam = build_beta_family(a, FreqInterval::new(-5, 300).unwrap()).unwrap();
        assert_eq!(fam.covered(), FreqInterval::new(1, 300).unwrap());
        for p in fam.polys() {
            for (i, &c) in p.coeffs.iter().enumerate() {
                assert_eq!(fam.coefficient(p.j, p.lo + i as i64), c);
            }
            assert_eq!(fam.coefficient(p.j, p.lo - 1), 0.0);
        }
        assert_eq!(fam.coefficient(1, 0), 0.0);
    }

    #[test]
    fn beta_at_a_equals_two() {
        let fam = build_beta_family(2.0, FreqInterval::new(1, 64).unwrap()).unwrap();
        assert_eq!(fam.alive_at(1), vec![(1, 1.0)]);
        assert_eq!(fam.alive_at(2), vec![(1, 1.0)]);
        assert_eq!(fam.alive_at(4), vec![(2, 1.0)]);
        let three = fam.alive_at(3);
        assert_eq!(three.len(), 2);
        assert!((three[1].1 - (3f64.log2() - 1.0)).abs() < 1e-9);
        // β_j vanishes above A^{j+1}
        assert_eq!(fam.coefficient(2, 9), 0.0);
        assert_eq!(fam.coefficient(3, 17), 0.0);
    }

    #[test]
    fn mirrored_family() {
        let fam = build_beta_family(1.3, FreqInterval::new(1, 100).unwrap()).unwrap();
        let mir = fam.mirrored();
        assert_eq!(mir.covered(), FreqInterval::new(-100, -1).unwrap());
        for n in 1..=100 {
            assert_eq!(mir.alive_at(-n), fam.alive_at(n));
        }
        for p in mir.polys() {
            for (i, &c) in p.coeffs.iter().enumerate() {
                assert_eq!(mir.coefficient(p.j, p.lo + i as i64), c);
            }
        }
        assert_eq!(mir.mirrored(), fam);
    }
}
