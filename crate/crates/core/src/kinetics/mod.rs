//! Atom-number decay data, lifetime fits, rf-spectroscopy extrapolation of
//! the spin-flip frequency, and lifetime-versus-height tables.

mod fit;
mod rf;
mod scan;

pub use fit::{fit_exponential, fit_exponential_with, FitMethod, FitResult};
pub use rf::{extract_f0, F0Estimate, RfSpectroscopySeries};
pub use scan::{lifetime_height_scan, loglog_slope, ScanOptions, ScanRow, ScanTable, SCAN_HEADER};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DECAY_HEADER: [&str; 3] = ["t_s", "N", "sigma_N"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("data do not determine a lifetime: {0}")]
    NotIdentifiable(String),
    #[error("fit did not converge: {0}")]
    NoConvergence(String),
    #[error("zero slope: the line has no frequency intercept")]
    ZeroSlope,
    #[error("cannot parse decay data: {0}")]
    Parse(String),
    #[error(transparent)]
    Noise(#[from] crate::noise::NoiseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub t: f64,
    pub n: f64,
    pub sigma_n: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecayMetadata {
    pub height: Option<f64>,
    pub f0: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayDataset {
    pub samples: Vec<DecaySample>,
    pub metadata: DecayMetadata,
}

impl DecayDataset {
    pub fn new(samples: Vec<DecaySample>, metadata: DecayMetadata) -> Result<Self, KineticsError> {
        let d = DecayDataset { samples, metadata };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), KineticsError> {
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.t >= 0.0 && s.t.is_finite()) {
                return Err(KineticsError::InvalidInput(format!("sample {i}: time {} must be non-negative", s.t)));
            }
            if !(s.n >= 0.0 && s.n.is_finite()) {
                return Err(KineticsError::InvalidInput(format!("sample {i}: count {} must be non-negative", s.n)));
            }
            if let Some(sig) = s.sigma_n {
                if !(sig > 0.0 && sig.is_finite()) {
                    return Err(KineticsError::InvalidInput(format!("sample {i}: sigma_N {sig} must be positive")));
                }
            }
        }
        if self.samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(KineticsError::InvalidInput("times must be strictly increasing".into()));
        }
        Ok(())
    }

    /// CSV body with header `t_s,N,sigma_N`; comment lines are the caller's.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(DECAY_HEADER).expect("in-memory write");
        for s in &self.samples {
            let sigma = s.sigma_n.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([s.t.to_string(), s.n.to_string(), sigma]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Parses `t_s,N,sigma_N` CSV; lines starting with `#` are ignored and an
    /// empty `sigma_N` field means no uncertainty was given.
    pub fn from_csv(text: &str) -> Result<Self, KineticsError> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| KineticsError::Parse(e.to_string()))?.clone();
        let found: Vec<&str> = headers.iter().collect();
        if found != DECAY_HEADER && found != DECAY_HEADER[..2] {
            return Err(KineticsError::Parse(format!("expected header t_s,N,sigma_N, got {}", found.join(","))));
        }
        let mut samples = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| KineticsError::Parse(e.to_string()))?;
            let field = |i: usize| -> Result<Option<f64>, KineticsError> {
                match record.get(i).map(str::trim) {
                    None | Some("") => Ok(None),
                    Some(v) => v
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| KineticsError::Parse(format!("row {}: bad number {v:?}", line + 1))),
                }
            };
            let t = field(0)?.ok_or_else(|| KineticsError::Parse(format!("row {}: missing t_s", line + 1)))?;
            let n = field(1)?.ok_or_else(|| KineticsError::Parse(format!("row {}: missing N", line + 1)))?;
            samples.push(DecaySample { t, n, sigma_n: field(2)? });
        }
        if samples.is_empty() {
            return Err(KineticsError::Parse("no data rows".into()));
        }
        DecayDataset::new(samples, DecayMetadata::default())
    }
}

/// Poisson-sampled counts with mean N0·exp(−t/τ); σ_N = √max(N, 1).
pub fn simulate_decay(n0: f64, tau: f64, times: &[f64], seed: u64) -> Result<DecayDataset, KineticsError> {
    if !(n0 >= 0.0 && n0.is_finite()) {
        return Err(KineticsError::InvalidInput(format!("N0 {n0} must be non-negative")));
    }
    if !(tau > 0.0) {
        return Err(KineticsError::InvalidInput(format!("lifetime {tau} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let mean = n0 * (-t / tau).exp();
        let n = if mean > 0.0 {
            Poisson::new(mean).map_err(|e| KineticsError::InvalidInput(e.to_string()))?.sample(&mut rng)
        } else {
            0.0
        };
        samples.push(DecaySample { t, n, sigma_n: Some(n.max(1.0).sqrt()) });
    }
    DecayDataset::new(samples, DecayMetadata { seed: Some(seed), ..Default::default() })
}

/// `count` times evenly spaced over [0, t_max].
pub fn linear_times(t_max: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}
