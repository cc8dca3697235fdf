//! Empirical certificates for weight-class statements.
//!
//! On a fixed grid every class constant is finite, so membership is read off
//! as stability of the constant under grid refinement (`N → 2N`), never as a
//! yes/no fact.

use serde::Serialize;

use super::{
    alpha_p_constant, ap_constant, arc_sup, arc_sup_many, mix, ArcExtremum, Weight, WeightSpec,
};
use crate::error::{Error, Result};

/// Exponents scanned when certifying `A_∞` membership.
pub const AINF_P_GRID: [f64; 6] = [1.0, 1.25, 1.5, 2.0, 4.0, 8.0];

/// Largest `N → 2N` growth of a class constant still read as "stable".
pub const DEFAULT_GROWTH_THRESHOLD: f64 = 1.1;

/// Relative slack allowed in per-arc inequalities that are tight on some
/// arcs (single-sample arcs turn Hölder into equality).
const ARC_ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct A1Report {
    pub a1: f64,
    pub alpha1: f64,
    pub sqrt_alpha1: f64,
    pub pass: bool,
}

/// `[w]_{A_1} ≤ sqrt([w]_{α_1})` by Cauchy–Schwarz on arc averages.
pub fn a1_implied_by_alpha1(w: &Weight) -> A1Report {
    let a1 = ap_constant(w, 1.0).expect("p = 1 is valid");
    let alpha1 = alpha_p_constant(w, 1.0).expect("p = 1 is valid");
    let sqrt_alpha1 = alpha1.sqrt();
    A1Report {
        a1,
        alpha1,
        sqrt_alpha1,
        pass: a1 <= sqrt_alpha1 * (1.0 + ARC_ROUNDING),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AinfCertificate {
    pub cap: f64,
    /// `(p, [w]_{A_p})` for every scanned exponent.
    pub constants: Vec<(f64, f64)>,
    /// Smallest scanned `p` whose constant is below the cap.
    pub certified_at: Option<f64>,
}

/// Operational `A_∞` test over [`AINF_P_GRID`].
pub fn ainf_certificate(w: &Weight, cap: f64) -> AinfCertificate {
    let constants: Vec<(f64, f64)> = AINF_P_GRID
        .iter()
        .map(|&p| (p, ap_constant(w, p).expect("grid exponents are valid")))
        .collect();
    let certified_at = constants.iter().find(|(_, c)| *c <= cap).map(|(p, _)| *p);
    AinfCertificate {
        cap,
        constants,
        certified_at,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReverseHolderRow {
    pub s: f64,
    pub constant: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReverseHolderReport {
    pub cap: f64,
    pub rows: Vec<ReverseHolderRow>,
    /// Largest `s` whose constant stays below the cap.
    pub best: Option<ReverseHolderRow>,
}

/// Scans `sup_I ⟨w^s⟩_I^{1/s} / ⟨w⟩_I` over `s_grid`.
pub fn reverse_holder_probe(w: &Weight, s_grid: &[f64], cap: f64) -> Result<ReverseHolderReport> {
    if let Some(s) = s_grid.iter().find(|&&s| !(s > 1.0)) {
        return Err(Error::InvalidParameter(format!("reverse Hölder exponent must exceed 1, got {s}")));
    }
    let rows: Vec<ReverseHolderRow> = s_grid
        .iter()
        .map(|&s| {
            let ws: Vec<f64> = w.values().iter().map(|v| v.powf(s)).collect();
            let constant = arc_sup(&[w.values(), &ws], |st| st.means[1].powf(1.0 / s) / st.means[0]).value;
            ReverseHolderRow {
                s,
                constant,
                passes: constant <= cap,
            }
        })
        .collect();
    let best = rows
        .iter()
        .filter(|r| r.passes)
        .max_by(|a, b| a.s.total_cmp(&b.s))
        .cloned();
    Ok(ReverseHolderReport { cap, rows, best })
}

/// Self-improvement of `α_1`: if `w²` satisfies a reverse Hölder inequality
/// with exponent `s`, then `w^{2s} ∈ A_1` and `w ∈ α_q` with `q = 2 - 1/s`.
pub fn bootstrap_alpha_index(w: &Weight, s_grid: &[f64], cap: f64) -> Result<Option<f64>> {
    let sq = w.powf(2.0)?;
    let report = reverse_holder_probe(&sq, s_grid, cap)?;
    Ok(report.best.map(|row| 2.0 - 1.0 / row.s))
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingRow {
    pub t: f64,
    pub r: f64,
    pub constant_n: Option<f64>,
    pub constant_2n: Option<f64>,
    pub growth: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub w: String,
    pub a: String,
    /// Requested `q`.
    pub q: f64,
    /// `q` actually used; differs from `q` only for `q = 1`, which is lifted
    /// to `α_{1+δ}` first.
    pub q_effective: f64,
    pub n: usize,
    pub threshold: f64,
    pub w_alpha_q: f64,
    pub a_ainf: AinfCertificate,
    pub rows: Vec<MixingRow>,
}

impl MixingReport {
    pub fn all_stable(&self) -> bool {
        self.rows.iter().all(|r| r.stable)
    }

    pub fn max_growth(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.growth).reduce(f64::max)
    }
}

/// Reverse Hölder exponents tried when lifting `q = 1`.
const BOOTSTRAP_S_GRID: [f64; 8] = [1.05, 1.1, 1.15, 1.2, 1.3, 1.4, 1.5, 2.0];
const BOOTSTRAP_CAP: f64 = 4.0;
const AINF_CAP: f64 = 100.0;

/// Weight-mixing probe: for each `t`, the `α_{tq}` constant of
/// `w^t a^{1-t}` at `N` and `2N` and its growth. Values of `t` below one
/// probe the first mixing lemma, values above one its mirror.
pub fn lemma1_probe(
    w: &WeightSpec,
    a: &WeightSpec,
    q: f64,
    t_grid: &[f64],
    n: usize,
) -> Result<MixingReport> {
    if !(1.0..2.0).contains(&q) {
        return Err(Error::InvalidParameter(format!("q must lie in [1, 2), got {q}")));
    }
    let (w_n, a_n) = (w.build(n)?, a.build(n)?);
    let (w_2n, a_2n) = (w.build(2 * n)?, a.build(2 * n)?);
    let q_effective = if q == 1.0 {
        bootstrap_alpha_index(&w_n, &BOOTSTRAP_S_GRID, BOOTSTRAP_CAP)?.ok_or_else(|| {
            Error::PreconditionViolated("no reverse Hölder exponent found for w²".into())
        })?
    } else {
        q
    };
    let mut rows = vec![];
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("t must be positive, got {t}")));
        }
        let r = t * q_effective;
        if !(r > 1.0 && r < 2.0) {
            rows.push(MixingRow {
                t,
                r,
                constant_n: None,
                constant_2n: None,
                growth: None,
                stable: false,
            });
            continue;
        }
        let c_n = alpha_p_constant(&mix(&w_n, &a_n, t)?, r)?;
        let c_2n = alpha_p_constant(&mix(&w_2n, &a_2n, t)?, r)?;
        let growth = c_2n / c_n;
        rows.push(MixingRow {
            t,
            r,
            constant_n: Some(c_n),
            constant_2n: Some(c_2n),
            growth: Some(growth),
            stable: growth <= DEFAULT_GROWTH_THRESHOLD,
        });
    }
    Ok(MixingReport {
        w: w.to_string(),
        a: a.to_string(),
        q,
        q_effective,
        n,
        threshold: DEFAULT_GROWTH_THRESHOLD,
        w_alpha_q: alpha_p_constant(&w_n, q_effective)?,
        a_ainf: ainf_certificate(&a_n, AINF_CAP),
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaDualRow {
    pub n: usize,
    pub alpha: f64,
    /// `[w^{-1/(p-1)}]_{A_{p'/2}}`.
    pub dual_ap: f64,
    /// `|dual_ap - alpha^{1/(p-1)}| / dual_ap`; the two are equal arc by arc.
    pub identity_residual: f64,
    pub alpha_growth: Option<f64>,
    pub dual_growth: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaDualReport {
    pub w: String,
    pub p: f64,
    pub rows: Vec<AlphaDualRow>,
}

impl AlphaDualReport {
    /// Whether both constants are read as stable (or both as growing) at
    /// every refinement step.
    pub fn verdicts_agree(&self, threshold: f64) -> bool {
        self.rows.iter().all(|r| match (r.alpha_growth, r.dual_growth) {
            (Some(a), Some(d)) => (a <= threshold) == (d <= threshold),
            _ => true,
        })
    }
}

/// Compares `α_p` against `A_{p'/2}` of `w^{-1/(p-1)}` across resolutions.
pub fn alpha_dual_probe(w: &WeightSpec, p: f64, ns: &[usize]) -> Result<AlphaDualReport> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (1, 2), got {p}")));
    }
    let s = p / (2.0 * (p - 1.0));
    let mut rows: Vec<AlphaDualRow> = vec![];
    for &n in ns {
        let wn = w.build(n)?;
        let alpha = alpha_p_constant(&wn, p)?;
        let dual_ap = ap_constant(&wn.powf(-1.0 / (p - 1.0))?, s)?;
        let identity_residual = (dual_ap - alpha.powf(1.0 / (p - 1.0))).abs() / dual_ap;
        let (alpha_growth, dual_growth) = match rows.last() {
            Some(prev) => (Some(alpha / prev.alpha), Some(dual_ap / prev.dual_ap)),
            None => (None, None),
        };
        rows.push(AlphaDualRow {
            n,
            alpha,
            dual_ap,
            identity_residual,
            alpha_growth,
            dual_growth,
        });
    }
    Ok(AlphaDualReport {
        w: w.to_string(),
        p,
        rows,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Lemma4Constants {
    pub p: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// `|b - 2c|`.
    pub b_minus_2c: f64,
    /// `|(1 - a)/c - 2|`.
    pub second_identity: f64,
    /// Hölder exponents `c/(a(p-1))` and `2c/(2-p)`.
    pub holder_exponents: (f64, f64),
    /// `|1/e₁ + 1/e₂ - 1|`.
    pub conjugacy_residual: f64,
}

/// Exponent bookkeeping for upgrading `α_p ∩ A_1` to `α_1`.
pub fn lemma4_constants(p: f64) -> Result<Lemma4Constants> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (1, 2), got {p}")));
    }
    let ratio = (p - 1.0) / (p - 1.0 + (2.0 - p) / 2.0);
    let c = 1.0 / (ratio + 2.0);
    let a = ratio * c;
    let b = 1.0 - a;
    let e1 = c / (a * (p - 1.0));
    let e2 = 2.0 * c / (2.0 - p);
    Ok(Lemma4Constants {
        p,
        c,
        a,
        b,
        b_minus_2c: (b - 2.0 * c).abs(),
        second_identity: ((1.0 - a) / c - 2.0).abs(),
        holder_exponents: (e1, e2),
        conjugacy_residual: (1.0 / e1 + 1.0 / e2 - 1.0).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma4Report {
    pub constants: Lemma4Constants,
    pub alpha_p: f64,
    pub a1: f64,
    /// Smallest relative margin `(R - L)/R` of
    /// `⟨w²⟩^c ≤ [w]_{α_p} [w]_{A_1} min(w)^b` over all arcs.
    pub worst_margin: ArcExtremum,
    /// Smallest relative slack of the first Hölder step.
    pub holder_first: ArcExtremum,
    /// Smallest slack of the second Hölder step (`≥ 1`).
    pub holder_second: ArcExtremum,
    /// Smallest relative slack of the product of the two class inequalities.
    pub class_product: ArcExtremum,
    pub identities_hold: bool,
    pub pass: bool,
}

/// Arc-by-arc check of the chain showing that `α_p` and `A_1` together give
/// `α_1`.
pub fn lemma4_certificate(w: &Weight, p: f64) -> Result<Lemma4Report> {
    let k = lemma4_constants(p)?;
    let alpha_p = alpha_p_constant(w, p)?;
    let a1 = ap_constant(w, 1.0)?;
    let (c, a, b) = (k.c, k.a, k.b);
    let low: Vec<f64> = w.values().iter().map(|v| v.powf(-1.0 / (p - 1.0))).collect();
    let high: Vec<f64> = w.values().iter().map(|v| v.powf(2.0 / (2.0 - p))).collect();
    let sq: Vec<f64> = w.values().iter().map(|v| v * v).collect();
    // Scan maximizes, so each slack is negated.
    let worst = arc_sup_many(&[w.values(), &low, &high, &sq], 4, |st, out| {
        let (mean_w, x, y, mean_sq) = (st.means[0], st.means[1], st.means[2], st.means[3]);
        let lhs = mean_sq.powf(c);
        let rhs = alpha_p * a1 * st.mins[0].powf(b);
        out[0] = -(rhs - lhs) / rhs;
        let h1 = x.powf((p - 1.0) * a) * y.powf((2.0 - p) / 2.0);
        out[1] = -(h1 - lhs) / h1;
        out[2] = -(x.powf((p - 1.0) * (1.0 - a)) * mean_w.powf(1.0 - a) - 1.0);
        let product = x.powf(p - 1.0) * y.powf((2.0 - p) / 2.0) * mean_w.powf(b);
        out[3] = -(rhs - product) / rhs;
    });
    let flip = |e: ArcExtremum| ArcExtremum {
        value: -e.value,
        arc: e.arc,
    };
    let (worst_margin, holder_first, holder_second, class_product) =
        (flip(worst[0]), flip(worst[1]), flip(worst[2]), flip(worst[3]));
    let identities_hold = k.b_minus_2c <= 1e-12 && k.second_identity <= 1e-12;
    let pass = identities_hold
        && [worst_margin, holder_first, holder_second, class_product]
            .iter()
            .all(|e| e.value >= -ARC_ROUNDING);
    Ok(Lemma4Report {
        constants: k,
        alpha_p,
        a1,
        worst_margin,
        holder_first,
        holder_second,
        class_product,
        identities_hold,
        pass,
    })
}
