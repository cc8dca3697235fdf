//! Named weight families, constructible at any grid size and addressable as
//! `name:key=value,...` strings.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{maximal_values, Weight};
use crate::circle::{check_grid_size, grid_point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum WeightSpec {
    /// `w ≡ 1`.
    Unit,
    /// `w(x) = max(dist(x, x0), 1/N)^δ`.
    Power { delta: f64, x0: f64 },
    /// `w(x) = c + cos(x - x0)`, `c > 1`.
    Cosine { c: f64, x0: f64 },
    /// `w = (Mχ_E)^γ` for the arc `E = [2π·start, 2π·(start + len))`.
    MaximalPower { gamma: f64, start: f64, len: f64 },
    /// `high` on `[0, 2π·frac)`, `low` elsewhere.
    Step { low: f64, high: f64, frac: f64 },
}

impl WeightSpec {
    pub fn name(&self) -> &'static str {
        match self {
            WeightSpec::Unit => "unit",
            WeightSpec::Power { .. } => "power",
            WeightSpec::Cosine { .. } => "cosine",
            WeightSpec::MaximalPower { .. } => "maximal-power",
            WeightSpec::Step { .. } => "step",
        }
    }

    pub fn power(delta: f64) -> Self {
        WeightSpec::Power { delta, x0: 0.0 }
    }

    pub fn build(&self, n: usize) -> Result<Weight> {
        check_grid_size(n)?;
        let values: Vec<f64> = match *self {
            WeightSpec::Unit => vec![1.0; n],
            WeightSpec::Power { delta, x0 } => {
                let floor = 1.0 / n as f64;
                (0..n)
                    .map(|m| circle_distance(grid_point(n, m), x0).max(floor).powf(delta))
                    .collect()
            }
            WeightSpec::Cosine { c, x0 } => {
                if !(c > 1.0) {
                    return Err(Error::InvalidParameter(format!("cosine weight needs c > 1, got {c}")));
                }
                (0..n).map(|m| c + (grid_point(n, m) - x0).cos()).collect()
            }
            WeightSpec::MaximalPower { gamma, start, len } => {
                if !(gamma > 0.0 && gamma < 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "maximal-power weight needs γ in (0, 1/2), got {gamma}"
                    )));
                }
                if !(len > 0.0 && len <= 1.0) {
                    return Err(Error::InvalidParameter(format!("arc length fraction {len} not in (0, 1]")));
                }
                let indicator: Vec<f64> = (0..n)
                    .map(|m| {
                        let frac = (m as f64 / n as f64 - start).rem_euclid(1.0);
                        if frac < len {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                if indicator.iter().all(|&v| v == 0.0) {
                    return Err(Error::InvalidParameter("indicator arc contains no grid point".into()));
                }
                maximal_values(&indicator)
                    .into_iter()
                    .map(|v| v.powf(gamma))
                    .collect()
            }
            WeightSpec::Step { low, high, frac } => (0..n)
                .map(|m| if (m as f64) < frac * n as f64 { high } else { low })
                .collect(),
        };
        Weight::new(values)
    }
}

/// Geodesic distance on the circle of length 2π.
pub(crate) fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Builds a catalog weight by name.
pub fn catalog(name: &str, params: &[(&str, f64)], n: usize) -> Result<Weight> {
    let mut text = name.to_string();
    if !params.is_empty() {
        text.push(':');
        text.push_str(
            &params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    text.parse::<WeightSpec>()?.build(n)
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params: Vec<(String, f64)> = vec![];
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{kv}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{v}` for `{k}`")))?;
            params.push((k.trim().to_string(), v));
        }
        let mut take = |key: &str, default: Option<f64>| -> Result<f64> {
            match params.iter().position(|(k, _)| k == key) {
                Some(i) => Ok(params.remove(i).1),
                None => default.ok_or_else(|| Error::Parse(format!("`{name}` requires `{key}`"))),
            }
        };
        let spec = match name.trim() {
            "unit" => WeightSpec::Unit,
            "power" => WeightSpec::Power {
                delta: take("delta", None)?,
                x0: take("x0", Some(0.0))?,
            },
            "cosine" => WeightSpec::Cosine {
                c: take("c", Some(2.0))?,
                x0: take("x0", Some(0.0))?,
            },
            "maximal-power" => WeightSpec::MaximalPower {
                gamma: take("gamma", None)?,
                start: take("start", Some(0.0))?,
                len: take("len", Some(0.25))?,
            },
            "step" => WeightSpec::Step {
                low: take("low", Some(1.0))?,
                high: take("high", Some(2.0))?,
                frac: take("frac", Some(0.5))?,
            },
            other => return Err(Error::UnknownCatalogEntry(other.to_string())),
        };
        if let Some((k, _)) = params.first() {
            return Err(Error::Parse(format!("unknown parameter `{k}` for `{name}`")));
        }
        Ok(spec)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Unit => write!(f, "unit"),
            WeightSpec::Power { delta, x0 } => write!(f, "power:delta={delta},x0={x0}"),
            WeightSpec::Cosine { c, x0 } => write!(f, "cosine:c={c},x0={x0}"),
            WeightSpec::MaximalPower { gamma, start, len } => {
                write!(f, "maximal-power:gamma={gamma},start={start},len={len}")
            }
            WeightSpec::Step { low, high, frac } => write!(f, "step:low={low},high={high},frac={frac}"),
        }
    }
}

impl TryFrom<String> for WeightSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<WeightSpec> for String {
    fn from(w: WeightSpec) -> Self {
        w.to_string()
    }
}
