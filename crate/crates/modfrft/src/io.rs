//! File formats: signal/spectrum CSV, spike-train JSON, run configuration.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::frft::{ComplexSignal, TimeAxis};
use crate::spectral::SpikeTrain;
use crate::testbench::SignalModel;

/// Relative tolerance for checking that a time column is a uniform period grid.
pub const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FormatError {
    Io(String),
    Schema(String),
}

impl std::fmt::Display for FormatError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FormatError::Io(m) => write!(f, "I/O error: {m}"),
            FormatError::Schema(m) => write!(f, "schema error: {m}"),
        }
    }
}

impl std::error::Error for FormatError {}

fn schema(msg: impl Into<String>) -> FormatError {
    FormatError::Schema(msg.into())
}

/// A four-column table `index,<coord>,re,im`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub coord: Vec<f64>,
    pub values: Vec<Complex64>,
}

pub fn format_table(coord_name: &str, coord: &[f64], values: &[Complex64]) -> String {
    let mut out = format!("index,{coord_name},re,im\n");
    for (k, (c, v)) in coord.iter().zip(values).enumerate() {
        out.push_str(&format!("{k},{c:.16e},{:.16e},{:.16e}\n", v.re, v.im));
    }
    out
}

pub fn format_signal(x: &ComplexSignal<f64>) -> String {
    format_table("t", &x.times(), &x.samples)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    std::fs::write(path, text).map_err(|e| FormatError::Io(format!("{}: {e}", path.display())))
}

/// Parses a table whose header must be exactly `index,<coord_name>,re,im`.
pub fn parse_table(text: &str, coord_name: &str) -> Result<Table, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| schema(format!("unreadable header: {e}")))?.clone();
    let expected = ["index", coord_name, "re", "im"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(schema(format!("header must be `{}`", expected.join(","))));
    }
    let mut coord = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| schema(format!("row {}: {e}", row + 1)))?;
        if rec.len() != 4 {
            return Err(schema(format!("row {}: expected 4 fields, found {}", row + 1, rec.len())));
        }
        let idx: usize = rec[0].trim().parse().map_err(|_| schema(format!("row {}: bad index `{}`", row + 1, &rec[0])))?;
        if idx != row {
            return Err(schema(format!("row {}: index {idx} out of sequence", row + 1)));
        }
        let num = |i: usize, name: &str| -> Result<f64, FormatError> {
            let v: f64 = rec[i].trim().parse().map_err(|_| schema(format!("row {}: bad {name} `{}`", row + 1, &rec[i])))?;
            if !v.is_finite() {
                return Err(schema(format!("row {}: non-finite {name}", row + 1)));
            }
            Ok(v)
        };
        coord.push(num(1, coord_name)?);
        values.push(Complex64::new(num(2, "re")?, num(3, "im")?));
    }
    if values.is_empty() {
        return Err(schema("no data rows"));
    }
    Ok(Table { coord, values })
}

pub fn read_table(path: &Path, coord_name: &str) -> Result<Table, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io(format!("{}: {e}", path.display())))?;
    parse_table(&text, coord_name)
}

/// Checks that `t` is the grid −σ/2 + kT with σ = N·T and returns the signal.
pub fn table_to_signal(table: Table) -> Result<ComplexSignal<f64>, FormatError> {
    let n = table.coord.len();
    let step = if n >= 2 { table.coord[1] - table.coord[0] } else { -2.0 * table.coord[0] };
    if !(step > 0.0) {
        return Err(schema("time column must be increasing with t_0 = -sigma/2"));
    }
    let sigma = step * n as f64;
    let axis = TimeAxis::period(sigma, n);
    for (k, &t) in table.coord.iter().enumerate() {
        if (t - axis.t(k)).abs() > GRID_TOL * sigma {
            return Err(schema(format!("row {}: t = {t} is off the grid -sigma/2 + k*T", k + 1)));
        }
    }
    Ok(ComplexSignal { samples: table.values, axis, sigma })
}

pub fn read_signal(path: &Path) -> Result<ComplexSignal<f64>, FormatError> {
    table_to_signal(read_table(path, "t")?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeRecord {
    pub k: usize,
    pub t: f64,
    pub c_re: f64,
    pub c_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpikeFile {
    pub lambda: f64,
    pub spikes: Vec<SpikeRecord>,
}

impl SpikeFile {
    pub fn new(train: &SpikeTrain<f64>, axis: TimeAxis<f64>, lambda: f64) -> Self {
        let spikes =
            train.instants.iter().zip(&train.weights).map(|(&k, c)| SpikeRecord { k, t: axis.t(k), c_re: c.re, c_im: c.im }).collect();
        SpikeFile { lambda, spikes }
    }
}

pub fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Grid axes of a sweep. Missing axes fall back to the scalar run values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub amplitude_scales: Option<Vec<f64>>,
    pub qs: Option<Vec<usize>>,
    /// `null` entries use the realized fold count.
    pub m_budgets: Option<Vec<Option<usize>>>,
    pub alphas: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
}

/// One experiment: signal model, ADC threshold, sampling density, budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub sigma: f64,
    pub band_index: Option<usize>,
    pub omega_alpha: Option<f64>,
    pub lambda: f64,
    pub q: usize,
    /// Fold budget; when absent `reconstruct` selects M automatically and
    /// `simulate`/`sweep` use the realized fold count.
    pub m_budget: Option<usize>,
    pub amplitude_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: SignalModel,
    pub sweep: Option<SweepConfig>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_round_trips_bit_exactly() {
        let samples: Vec<Complex64> = (0..7).map(|k| Complex64::new((k as f64).sin() * 1e3, 1.0 / (k as f64 + 3.0))).collect();
        let x = ComplexSignal::on_period(samples, 0.7).unwrap();
        let text = format_signal(&x);
        assert!(text.starts_with("index,t,re,im\n0,-3.4999999999999998e-1,"));
        let back = table_to_signal(parse_table(&text, "t").unwrap()).unwrap();
        assert_eq!(back.samples, x.samples);
        assert!((back.sigma - 0.7).abs() < 1e-15);
    }

    #[test]
    fn schema_violations() {
        assert!(matches!(parse_table("index,x,re,im\n0,0,0,0\n", "t"), Err(FormatError::Schema(_))));
        assert!(matches!(parse_table("index,t,re,im\n", "t"), Err(FormatError::Schema(_))));
        assert!(matches!(parse_table("index,t,re,im\n0,0,1\n", "t"), Err(FormatError::Schema(_))));
        assert!(matches!(parse_table("index,t,re,im\n1,0,1,1\n", "t"), Err(FormatError::Schema(_))));
        assert!(matches!(parse_table("index,t,re,im\n0,0,abc,1\n", "t"), Err(FormatError::Schema(_))));
        let skewed = parse_table("index,t,re,im\n0,-0.5,0,0\n1,0.0,0,0\n2,0.2,0,0\n", "t").unwrap();
        assert!(matches!(table_to_signal(skewed), Err(FormatError::Schema(_))));
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let ok = r#"{"alpha":0.7,"sigma":1,"band_index":2,"lambda":1,"q":12,"amplitude_scale":3}"#;
        let c = parse_config(ok).unwrap();
        assert_eq!(c.model, SignalModel::Frfs);
        assert_eq!(c.m_budget, None);
        let bad = r#"{"alpha":0.7,"sigma":1,"band_index":2,"lambda":1,"q":12,"amplitude_scale":3,"lamda":2}"#;
        assert!(parse_config(bad).unwrap_err().contains("lamda"));
        let missing = r#"{"sigma":1,"band_index":2,"lambda":1,"q":12,"amplitude_scale":3}"#;
        assert!(parse_config(missing).unwrap_err().contains("alpha"));
    }

    #[test]
    fn spike_file_layout() {
        let train = SpikeTrain::new(vec![3], vec![Complex64::new(2.0, -4.0)]).unwrap();
        let f = SpikeFile::new(&train, TimeAxis::period(1.0, 10), 1.0);
        let json = to_json(&f);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["spikes"][0]["k"], 3);
        assert_eq!(v["spikes"][0]["c_im"], -4.0);
        assert!((v["spikes"][0]["t"].as_f64().unwrap() + 0.2).abs() < 1e-15);
    }
}
