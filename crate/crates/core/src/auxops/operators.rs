use super::families::{BetaFamily, PhiFamily};
use crate::circle::{from_spectrum, in_window, to_spectrum, Partition, SampledFunction, Spectrum, SUPPORT_TOL};
use crate::error::{Error, Result};
use crate::multipliers::FunctionSequence;

/// `S(h) = Σ_k Σ_{j∈B_k} e^{i a_j x} (h_j * φ_k)`, where `B_k` collects the
/// intervals of length `2^k` and `a_j` are their left ends.
pub fn op_s(hs: &FunctionSequence, p: &Partition, phi: &PhiFamily) -> Result<SampledFunction> {
    if hs.len() != p.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            got: hs.len(),
        });
    }
    let n = match hs.grid() {
        Some(n) => n,
        None => return Ok(SampledFunction::zeros(phi.grid())?),
    };
    if n != phi.grid() {
        return Err(Error::GridMismatch {
            expected: phi.grid(),
            got: n,
        });
    }
    let mut total = Spectrum::zeros(n)?;
    for (h, iv) in hs.entries().iter().zip(p.intervals()) {
        total.add_assign(&s_term(&to_spectrum(h), iv.lo(), iv.len(), phi)?);
    }
    Ok(from_spectrum(&total))
}

/// One summand `e^{iax}(h * φ_k)` in spectral form, `len = 2^k`.
pub(crate) fn s_term(h: &Spectrum, a: i64, len: u64, phi: &PhiFamily) -> Result<Spectrum> {
    if !len.is_power_of_two() {
        return Err(Error::NonDyadicLength(len));
    }
    let k = len.trailing_zeros();
    let poly = phi.spectrum(k).ok_or(Error::WindowOverflow {
        freq: len as i64,
        n: phi.grid(),
    })?;
    let n = h.len();
    let mut out = Spectrum::zeros(n)?;
    // φ̂_k lives on 1..2^k − 1; all of that must land inside the window.
    for edge in [a + 1, a + len as i64 - 1] {
        if len > 1 && !in_window(n, edge) {
            return Err(Error::WindowOverflow { freq: edge, n });
        }
    }
    for freq in 1..len as i64 {
        out.set(freq + a, h.get(freq) * poly.get(freq));
    }
    Ok(out)
}

/// `R({f_k}) = {f_k * β_j}_{k,j}`; entry `[k][j-1]` holds `f_k * β_j` for
/// `j = 1..=J`.
pub fn op_r(fs: &FunctionSequence, beta: &BetaFamily) -> Result<Vec<Vec<SampledFunction>>> {
    fs.entries()
        .iter()
        .map(|f| {
            let pieces = r_cut(&to_spectrum(f), beta)?;
            Ok(pieces.iter().map(from_spectrum).collect())
        })
        .collect()
}

/// Spectral form of one row of `R`. Frequency zero is dropped
/// (`β̂_j(0) = 0`); any other mass outside the covered range is an error.
pub(crate) fn r_cut(s: &Spectrum, beta: &BetaFamily) -> Result<Vec<Spectrum>> {
    let covered = beta.covered();
    let cut = SUPPORT_TOL * s.max_abs();
    let mut pieces = vec![Spectrum::zeros(s.len())?; beta.max_index()];
    for (freq, c) in s.iter() {
        if freq == 0 || c.norm() == 0.0 {
            continue;
        }
        if !covered.contains(freq) {
            if c.norm() > cut {
                return Err(Error::CoverageGap {
                    freq,
                    lo: covered.lo(),
                    hi: covered.hi(),
                });
            }
            continue;
        }
        for (j, v) in beta.alive_at(freq) {
            pieces[j - 1].set(freq, c * v);
        }
    }
    Ok(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxops::families::{build_beta_family, build_phi_family};
    use crate::circle::{FreqInterval, SampledFunction};
    use num_complex::Complex64;

    fn analytic(n: usize, top: i64, seed: u64) -> SampledFunction {
        let mut s = Spectrum::zeros(n).unwrap();
        for k in 0..=top {
            let x = ((k as u64 + 1) * 2654435761 ^ seed) % 1000;
            s.set(k, Complex64::new(x as f64 / 500.0 - 1.0, (x % 7) as f64 / 7.0));
        }
        from_spectrum(&s)
    }

    #[test]
    fn s_passes_through_inside_the_band() {
        let n = 64;
        let phi = build_phi_family(5, 0.9, n).unwrap();
        let h = SampledFunction::exponential(n, 8, Complex64::new(1.0, 0.0)).unwrap();
        let p = Partition::from_pairs(&[(3, 18)]).unwrap();
        let out = op_s(&FunctionSequence::new(vec![h.clone()]).unwrap(), &p, &phi).unwrap();
        let want = SampledFunction::exponential(n, 11, Complex64::new(1.0, 0.0)).unwrap();
        assert!(out.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn s_kills_mass_outside_zero_to_len() {
        let n = 64;
        let phi = build_phi_family(5, 0.9, n).unwrap();
        let h = SampledFunction::exponential(n, -3, Complex64::new(1.0, 0.0))
            .unwrap()
            .add(&SampledFunction::exponential(n, 20, Complex64::new(1.0, 0.0)).unwrap())
            .unwrap();
        let p = Partition::from_pairs(&[(0, 15)]).unwrap();
        let out = op_s(&FunctionSequence::new(vec![h]).unwrap(), &p, &phi).unwrap();
        assert!(out.sup_norm() < 1e-14);
    }

    #[test]
    fn s_rejects_non_dyadic_lengths() {
        let n = 32;
        let phi = build_phi_family(4, 0.9, n).unwrap();
        let fs = FunctionSequence::new(vec![SampledFunction::zeros(n).unwrap()]).unwrap();
        let p = Partition::from_pairs(&[(0, 2)]).unwrap();
        assert!(matches!(op_s(&fs, &p, &phi), Err(Error::NonDyadicLength(3))));
        let p = Partition::from_pairs(&[(10, 17)]).unwrap();
        let fs = FunctionSequence::new(vec![analytic(n, 7, 1)]).unwrap();
        assert!(matches!(op_s(&fs, &p, &phi), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn r_reconstructs_analytic_functions() {
        let n = 256;
        let beta = build_beta_family(2f64.powf(0.1), FreqInterval::new(1, 127).unwrap()).unwrap();
        let f = analytic(n, 127, 9);
        let rows = op_r(&FunctionSequence::new(vec![f.clone()]).unwrap(), &beta).unwrap();
        let mut sum = SampledFunction::zeros(n).unwrap();
        for piece in &rows[0] {
            sum = sum.add(piece).unwrap();
        }
        let want = f.sub(&SampledFunction::constant(n, f.mean()).unwrap()).unwrap();
        assert!(sum.max_abs_diff(&want) <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn r_examples() {
        let n = 32;
        let beta = build_beta_family(2.0, FreqInterval::new(1, 15).unwrap()).unwrap();
        let e1 = SampledFunction::exponential(n, 1, Complex64::new(1.0, 0.0)).unwrap();
        let rows = op_r(&FunctionSequence::new(vec![e1.clone()]).unwrap(), &beta).unwrap();
        assert!(rows[0][0].max_abs_diff(&e1) < 1e-15);
        assert!(rows[0][1..].iter().all(|p| p.sup_norm() < 1e-15));

        let c = SampledFunction::constant(n, Complex64::new(2.0, 0.0)).unwrap();
        let rows = op_r(&FunctionSequence::new(vec![c]).unwrap(), &beta).unwrap();
        assert!(rows[0].iter().all(|p| p.sup_norm() < 1e-15));

        let neg = SampledFunction::exponential(n, -2, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            op_r(&FunctionSequence::new(vec![neg]).unwrap(), &beta),
            Err(Error::CoverageGap { freq: -2, .. })
        ));
    }
}
