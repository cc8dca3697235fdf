//! Correcting `f` (with `|f| ≤ w`) into `g = φ f`, `0 ≤ φ ≤ 1`, so that
//! `σg ≤ B w` pointwise, and measuring how much `a`-mass that costs.
//!
//! Both strategies are heuristics; the results are checked, not proved.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{Partition, SampledFunction};
use crate::error::{Error, Result};
use crate::multipliers::square_function_values;
use crate::weights::Weight;

/// Damped factors below this are snapped to zero.
pub const DAMP_FLOOR: f64 = 1e-3;
/// Extra shrink per damping step. Dividing by the bare excess ratio only
/// approaches the bound asymptotically.
pub const DAMP_MARGIN: f64 = 0.02;
/// Iteration cap per grid point.
pub const ITERATIONS_PER_POINT: usize = 10;
/// Slack for the modulus identity, relative to `max(1, |f|)`.
pub const MODULUS_TOL: f64 = 1e-14;
/// Slack when recomputing `ε` and `B`.
pub const RECOMPUTE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// `φ ∈ {0, 1}`: zero the samples where the bound fails.
    ZeroOffenders,
    /// `φ ∈ [0, 1]`: shrink `φ` by the local excess.
    Damp,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-offenders" => Ok(Strategy::ZeroOffenders),
            "damp" => Ok(Strategy::Damp),
            other => Err(Error::Parse(format!("unknown strategy `{other}`"))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ZeroOffenders => "zero-offenders",
            Strategy::Damp => "damp",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub g: SampledFunction,
    pub phi: Vec<f64>,
    pub b_target: f64,
    pub epsilon_achieved: f64,
    pub bound_achieved: f64,
    pub iterations: usize,
    pub converged: bool,
    pub strategy: Strategy,
}

/// `(∫_{g≠f} a) / (∫|f/w| a)`, zero when `f = 0`.
pub fn corrected_mass(f: &SampledFunction, g: &SampledFunction, w: &Weight, a: &Weight) -> f64 {
    let mut changed = 0.0;
    let mut total = 0.0;
    for m in 0..f.len() {
        let (fm, am) = (f.samples()[m], a.values()[m]);
        if g.samples()[m] != fm {
            changed += am;
        }
        total += fm.norm() / w.values()[m] * am;
    }
    if total == 0.0 {
        0.0
    } else {
        changed / total
    }
}

/// `max_m σg(x_m) / w(x_m)`.
pub fn bound_of(sigma: &[f64], w: &Weight) -> f64 {
    sigma
        .iter()
        .zip(w.values())
        .map(|(s, wv)| s / wv)
        .fold(0.0, f64::max)
}

fn check_inputs(f: &SampledFunction, w: &Weight, a: &Weight, p: &Partition) -> Result<()> {
    for len in [w.len(), a.len()] {
        if len != f.len() {
            return Err(Error::GridMismatch {
                expected: f.len(),
                got: len,
            });
        }
    }
    p.check_window(f.len())?;
    if let Some(m) = (0..f.len()).find(|&m| f.samples()[m].norm() > w.values()[m]) {
        return Err(Error::PreconditionViolated(format!(
            "|f| = {} exceeds w = {} at sample {m}",
            f.samples()[m].norm(),
            w.values()[m]
        )));
    }
    Ok(())
}

fn apply(phi: &[f64], f: &SampledFunction) -> SampledFunction {
    SampledFunction::new(f.samples().iter().zip(phi).map(|(z, p)| z * p).collect()).expect("same grid")
}

pub fn correct(
    f: &SampledFunction,
    w: &Weight,
    a: &Weight,
    p: &Partition,
    b_target: f64,
    strategy: Strategy,
) -> Result<CorrectionResult> {
    check_inputs(f, w, a, p)?;
    if !(b_target > 0.0) || !b_target.is_finite() {
        return Err(Error::InvalidParameter(format!("B must be positive, got {b_target}")));
    }
    let n = f.len();
    let cap = ITERATIONS_PER_POINT * n;
    let mut phi = vec![1.0; n];
    let mut g = f.clone();
    let mut sigma = square_function_values(&g, p)?;
    let mut iterations = 0;
    let over = |sigma: &[f64]| -> Vec<usize> {
        (0..n)
            .filter(|&m| sigma[m] > b_target * w.values()[m])
            .collect()
    };
    let mut offenders = over(&sigma);
    while !offenders.is_empty() && iterations < cap {
        match strategy {
            Strategy::ZeroOffenders => zero_step(&mut phi, &g, &sigma, w, &offenders),
            Strategy::Damp if offenders.iter().all(|&m| g.samples()[m].norm() == 0.0) => {
                // Nothing left to shrink where the bound fails.
                zero_step(&mut phi, &g, &sigma, w, &offenders)
            }
            Strategy::Damp => {
                for &m in &offenders {
                    phi[m] /= sigma[m] / (b_target * w.values()[m]) * (1.0 + DAMP_MARGIN);
                    if phi[m] < DAMP_FLOOR {
                        phi[m] = 0.0;
                    }
                }
            }
        }
        g = apply(&phi, f);
        sigma = square_function_values(&g, p)?;
        offenders = over(&sigma);
        iterations += 1;
    }
    Ok(CorrectionResult {
        epsilon_achieved: corrected_mass(f, &g, w, a),
        bound_achieved: bound_of(&sigma, w),
        g,
        phi,
        b_target,
        iterations,
        converged: offenders.is_empty(),
        strategy,
    })
}

/// Zeros `g` at every offender where it is still nonzero. If all offenders
/// already vanish, the excess is caused elsewhere: zero the nonzero sample
/// nearest to the worst offender instead. Either way one sample is removed,
/// so the iteration ends within `N` steps.
fn zero_step(phi: &mut [f64], g: &SampledFunction, sigma: &[f64], w: &Weight, offenders: &[usize]) {
    let n = phi.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut hit = false;
    for &m in offenders {
        if g.samples()[m] != zero {
            phi[m] = 0.0;
            hit = true;
        }
    }
    if hit {
        return;
    }
    let worst = *offenders
        .iter()
        .max_by(|&&x, &&y| (sigma[x] / w.values()[x]).total_cmp(&(sigma[y] / w.values()[y])))
        .expect("nonempty");
    let nearest = (0..n)
        .filter(|&m| g.samples()[m] != zero)
        .min_by_key(|&m| {
            let d = m.abs_diff(worst);
            (d.min(n - d), m)
        });
    if let Some(m) = nearest {
        phi[m] = 0.0;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub b_target: f64,
    pub epsilon: f64,
    pub b_achieved: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Least-squares line `B ≈ slope·(1 + |log ε|) + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub strategy: Strategy,
    pub rows: Vec<SweepRow>,
    pub results: Vec<CorrectionResult>,
    pub fit: Option<SweepFit>,
}

impl Sweep {
    pub const CSV_HEADER: &'static str = "B_target,epsilon,B_achieved,iterations,converged";
}

/// Runs [`correct`] for every entry of an increasing `B` grid.
///
/// A converged result for a smaller `B` also satisfies every larger target,
/// so it is carried forward whenever it corrected less mass. This keeps `ε`
/// nonincreasing along the grid.
pub fn sweep(
    f: &SampledFunction,
    w: &Weight,
    a: &Weight,
    p: &Partition,
    b_grid: &[f64],
    strategy: Strategy,
) -> Result<Sweep> {
    if b_grid.windows(2).any(|x| !(x[0] < x[1])) {
        return Err(Error::InvalidParameter("B grid must be strictly increasing".into()));
    }
    let raw: Vec<CorrectionResult> = b_grid
        .par_iter()
        .map(|&b| correct(f, w, a, p, b, strategy))
        .collect::<Result<_>>()?;
    let mut results: Vec<CorrectionResult> = Vec::with_capacity(raw.len());
    for r in raw {
        let chosen = match results.last() {
            Some(prev) if prev.converged && prev.epsilon_achieved < r.epsilon_achieved => CorrectionResult {
                b_target: r.b_target,
                iterations: 0,
                ..prev.clone()
            },
            _ => r,
        };
        results.push(chosen);
    }
    let rows: Vec<SweepRow> = results
        .iter()
        .map(|r| SweepRow {
            b_target: r.b_target,
            epsilon: r.epsilon_achieved,
            b_achieved: r.bound_achieved,
            iterations: r.iterations,
            converged: r.converged,
        })
        .collect();
    Ok(Sweep {
        strategy,
        fit: fit_log_rate(&rows),
        rows,
        results,
    })
}

/// Fits `B_achieved` against `1 + |log ε|` over rows with `ε > 0`. Needs two
/// distinct abscissae.
pub fn fit_log_rate(rows: &[SweepRow]) -> Option<SweepFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.epsilon > 0.0)
        .map(|r| (1.0 + r.epsilon.ln().abs(), r.b_achieved))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / k).sqrt();
    Some(SweepFit {
        slope,
        intercept,
        rms_residual: rms,
        points: pts.len(),
    })
}

/// Independent recomputation of everything a [`CorrectionResult`] claims.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    /// `max_m (|g| + |f − g| − |f|) / max(1, |f|)`.
    pub modulus_defect: f64,
    pub modulus_identity: bool,
    /// `φ` real in `[0, 1]` and `g = φ f` sample by sample.
    pub phi_consistent: bool,
    pub epsilon: f64,
    pub epsilon_matches: bool,
    pub bound: f64,
    pub bound_matches: bool,
    /// `σg ≤ B_target·w` everywhere (required only of converged results).
    pub bound_holds: bool,
    /// `∫_{f≠g} a ≤ ε ∫|f/w| a`.
    pub mass_inequality: bool,
    pub pass: bool,
}

pub fn verify_result(
    r: &CorrectionResult,
    f: &SampledFunction,
    w: &Weight,
    a: &Weight,
    p: &Partition,
) -> Result<Verification> {
    check_inputs(f, w, a, p)?;
    if r.g.len() != f.len() || r.phi.len() != f.len() {
        return Err(Error::GridMismatch {
            expected: f.len(),
            got: r.g.len(),
        });
    }
    let mut defect = 0.0f64;
    let mut phi_consistent = true;
    for m in 0..f.len() {
        let (fm, gm) = (f.samples()[m], r.g.samples()[m]);
        let d = (gm.norm() + (fm - gm).norm() - fm.norm()).abs() / fm.norm().max(1.0);
        defect = defect.max(d);
        let ph = r.phi[m];
        if !(0.0..=1.0).contains(&ph) || gm != fm * ph {
            phi_consistent = false;
        }
    }
    let sigma = square_function_values(&r.g, p)?;
    let epsilon = corrected_mass(f, &r.g, w, a);
    let bound = bound_of(&sigma, w);
    let close = |x: f64, y: f64| (x - y).abs() <= RECOMPUTE_TOL * x.abs().max(y.abs()).max(1.0);
    let bound_holds = sigma
        .iter()
        .zip(w.values())
        .all(|(s, wv)| *s <= r.b_target * wv * (1.0 + RECOMPUTE_TOL));
    let mut changed = 0.0;
    let mut total = 0.0;
    for m in 0..f.len() {
        if f.samples()[m] != r.g.samples()[m] {
            changed += a.values()[m];
        }
        total += f.samples()[m].norm() / w.values()[m] * a.values()[m];
    }
    let mass_inequality = changed <= r.epsilon_achieved * total * (1.0 + RECOMPUTE_TOL) + f64::MIN_POSITIVE;
    let modulus_identity = defect <= MODULUS_TOL;
    let epsilon_matches = close(epsilon, r.epsilon_achieved);
    let bound_matches = close(bound, r.bound_achieved);
    let pass = modulus_identity
        && phi_consistent
        && epsilon_matches
        && bound_matches
        && mass_inequality
        && (bound_holds || !r.converged);
    Ok(Verification {
        modulus_defect: defect,
        modulus_identity,
        phi_consistent,
        epsilon,
        epsilon_matches,
        bound,
        bound_matches,
        bound_holds,
        mass_inequality,
        pass,
    })
}
