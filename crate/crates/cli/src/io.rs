//! Function specs and CSV encoding.

use std::path::Path;

use lpweights::circle::grid_point;
use num_complex::Complex64;
use lpweights::trials::{analytic_function, gaussian_function, rng, spike_function};
use lpweights::SampledFunction;
use serde::Serialize;

use crate::CliError;

/// Builds a function from its spec string.
///
/// `exp:k=3[,re=..,im=..]` is `c e^{ikx}`; `gaussian`, `spikes:count=..` and
/// `analytic:top=..` draw from `seed`; anything else is read as a CSV path.
pub fn load_function(spec: &str, n: usize, seed: Option<u64>) -> Result<SampledFunction, CliError> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = parse_params(rest)?;
    let get = |key: &str, default: Option<f64>| -> Result<f64, CliError> {
        params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .or(default)
            .ok_or_else(|| CliError::Config(format!("function `{name}` needs `{key}`")))
    };
    let seeded = || seed.map(rng).ok_or_else(|| CliError::Config(format!("function `{name}` needs --seed")));
    let f = match name {
        "exp" => {
            let c = num_complex(get("re", Some(1.0))?, get("im", Some(0.0))?);
            SampledFunction::exponential(n, get("k", None)? as i64, c)
        }
        "gaussian" => gaussian_function(n, &mut seeded()?),
        "spikes" => spike_function(n, get("count", Some(3.0))? as usize, &mut seeded()?),
        "analytic" => analytic_function(n, get("top", Some((n / 4) as f64))? as i64, &mut seeded()?),
        _ => return read_function_csv(Path::new(spec), n),
    };
    f.map_err(|e| CliError::Config(e.to_string()))
}

fn num_complex(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn parse_params(rest: &str) -> Result<Vec<(String, f64)>, CliError> {
    rest.split(',')
        .map(str::trim)
        .filter(|kv| !kv.is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("expected key=value, got `{kv}`")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad number `{v}`")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

#[derive(Debug, serde::Deserialize)]
struct SampleRow {
    index: usize,
    re: f64,
    im: f64,
}

/// Reads `index,re,im` rows; every index in `0..n` must appear once.
pub fn read_function_csv(path: &Path, n: usize) -> Result<SampledFunction, CliError> {
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut slots = vec![None; n];
    for row in reader.deserialize::<SampleRow>() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        match slots.get_mut(row.index) {
            Some(slot @ None) => *slot = Some(num_complex(row.re, row.im)),
            Some(Some(_)) => return Err(CliError::Config(format!("duplicate index {}", row.index))),
            None => return Err(CliError::Config(format!("index {} outside 0..{n}", row.index))),
        }
    }
    let samples = slots
        .into_iter()
        .enumerate()
        .map(|(m, z)| z.ok_or_else(|| CliError::Config(format!("missing index {m}"))))
        .collect::<Result<Vec<_>, _>>()?;
    SampledFunction::new(samples).map_err(|e| CliError::Config(e.to_string()))
}

/// `index,re,im` rows for `f`.
pub fn function_csv(f: &SampledFunction) -> Result<Vec<u8>, CliError> {
    let rows = f.samples().iter().enumerate().map(|(index, z)| SampleRowOut {
        index,
        re: z.re,
        im: z.im,
    });
    to_csv(rows)
}

#[derive(Serialize)]
struct SampleRowOut {
    index: usize,
    re: f64,
    im: f64,
}

/// `index,x,<name>` rows for a real sequence on the grid.
pub fn grid_csv(name: &str, values: &[f64]) -> Result<Vec<u8>, CliError> {
    let n = values.len();
    let mut w = writer();
    w.write_record(["index", "x", name])?;
    for (m, v) in values.iter().enumerate() {
        w.write_record([m.to_string(), grid_point(n, m).to_string(), v.to_string()])?;
    }
    finish(w)
}

/// Header row from the field names, one row per item.
pub fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>, CliError> {
    let mut w = writer();
    for r in rows {
        w.serialize(r)?;
    }
    finish(w)
}

/// Explicit header and pre-formatted records. A header is written even when
/// there are no rows.
pub fn records_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = writer();
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    finish(w)
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(vec![])
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Io(e.into()))?;
    bytes.push(b'\n');
    Ok(bytes)
}
