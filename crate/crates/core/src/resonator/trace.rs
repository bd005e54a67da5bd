use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    NotchS21,
    ReflectionS11,
}

/// A measured or synthesized complex spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    frequencies: Vec<f64>,
    s_values: Vec<Complex64>,
    pub input_power: f64,
    pub kind: TraceKind,
    pub noise_sigma: Option<f64>,
    pub temperature_k: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceSidecar {
    #[serde(rename = "type")]
    kind: TraceKind,
    #[serde(rename = "power_W")]
    power_w: f64,
    #[serde(rename = "temperature_K", default, skip_serializing_if = "Option::is_none")]
    temperature_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_sigma: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    #[serde(rename = "frequency_Hz")]
    f: f64,
    re: f64,
    im: f64,
}

impl SpectrumTrace {
    pub fn new(frequencies: Vec<f64>, s_values: Vec<Complex64>, input_power: f64, kind: TraceKind) -> Result<Self> {
        if frequencies.len() != s_values.len() {
            return Err(Error::Configuration(format!(
                "trace has {} frequencies but {} samples",
                frequencies.len(),
                s_values.len()
            )));
        }
        if frequencies.len() < 8 {
            return Err(Error::Configuration("trace needs at least 8 points".into()));
        }
        if !frequencies.windows(2).all(|w| w[1] > w[0]) || !frequencies.iter().all(|f| f.is_finite()) {
            return Err(Error::Configuration("trace frequencies must be finite and strictly increasing".into()));
        }
        if !s_values.iter().all(|s| s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::Configuration("trace contains non-finite samples".into()));
        }
        if !(input_power >= 0.0 && input_power.is_finite()) {
            return Err(Error::Configuration(format!("invalid input power {input_power}")));
        }
        Ok(Self { frequencies, s_values, input_power, kind, noise_sigma: None, temperature_k: None })
    }

    /// Evaluates `model` on a grid.
    pub fn synthesize(frequencies: Vec<f64>, kind: TraceKind, model: impl Fn(f64) -> Complex64) -> Result<Self> {
        let s = frequencies.iter().map(|&f| model(f)).collect();
        Self::new(frequencies, s, 0.0, kind)
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn s_values(&self) -> &[Complex64] {
        &self.s_values
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Copy with complex Gaussian noise (σ on each quadrature) from `rng`.
    pub fn with_noise(&self, sigma: f64, rng: &mut impl rand::Rng) -> Self {
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(0.0, sigma).expect("noise sigma must be finite and non-negative");
        let s_values = self
            .s_values
            .iter()
            .map(|s| s + Complex64::new(normal.sample(rng), normal.sample(rng)))
            .collect();
        Self { s_values, noise_sigma: Some(sigma), ..self.clone() }
    }

    /// Writes `<stem>.csv` and `<stem>.json`, returning both paths.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<[PathBuf; 2]> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&csv_path)?;
        for (f, s) in self.frequencies.iter().zip(&self.s_values) {
            w.serialize(Row { f: *f, re: s.re, im: s.im })?;
        }
        w.flush().map_err(|e| Error::io(&csv_path, e))?;
        let json_path = dir.join(format!("{stem}.json"));
        let side = TraceSidecar {
            kind: self.kind,
            power_w: self.input_power,
            temperature_k: self.temperature_k,
            noise_sigma: self.noise_sigma,
        };
        fs::write(&json_path, serde_json::to_string_pretty(&side)? + "\n").map_err(|e| Error::io(&json_path, e))?;
        Ok([csv_path, json_path])
    }

    /// Reads a trace CSV. The sidecar is looked up next to it (same stem,
    /// `.json`); without one, `default_kind` and zero power are assumed.
    pub fn read(csv_path: &Path, default_kind: Option<TraceKind>) -> Result<Self> {
        let mut r = csv::Reader::from_path(csv_path)?;
        let (mut f, mut s) = (Vec::new(), Vec::new());
        for row in r.deserialize() {
            let row: Row = row?;
            f.push(row.f);
            s.push(Complex64::new(row.re, row.im));
        }
        let side_path = csv_path.with_extension("json");
        let side: Option<TraceSidecar> = if side_path.exists() {
            let text = fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
            Some(serde_json::from_str(&text)?)
        } else {
            None
        };
        let kind = side
            .as_ref()
            .map(|s| s.kind)
            .or(default_kind)
            .ok_or_else(|| Error::Configuration(format!("{} has no sidecar and no trace type was given", csv_path.display())))?;
        let mut t = Self::new(f, s, side.as_ref().map_or(0.0, |s| s.power_w), kind)?;
        if let Some(side) = side {
            t.temperature_k = side.temperature_k;
            t.noise_sigma = side.noise_sigma;
        }
        Ok(t)
    }
}
