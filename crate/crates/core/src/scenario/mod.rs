//! Config-driven runs behind the `atomchip` binary.
//!
//! Every subcommand turns a [`ScenarioConfig`] into a list of [`Artifact`]s
//! (file name plus contents). Rendering is deterministic: the same config,
//! seed and crate version give byte-identical artifacts on any thread count.

mod config;
mod run;

pub use config::{
    AtomSection, CalibrateSection, ConductorSection, DecaySection, FieldMapSection, FragmentsSection, GeometryKind,
    LayoutKind, LayoutSection, LifetimeScanSection, RampEnd, RampSection, RunSection, ScenarioConfig, TrapSection,
};
pub use run::run;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("config error: {0}")]
    Config(String),
    #[error("physics error: {0}")]
    Physics(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("input data error: {0}")]
    Data(String),
}

impl ScenarioError {
    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Config(_) => "config",
            ScenarioError::Physics(_) => "physics",
            ScenarioError::Calibration(_) => "calibration",
            ScenarioError::Data(_) => "data",
        }
    }

    /// Process exit code; 1 and 2 are left to I/O and usage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 3,
            ScenarioError::Physics(_) => 4,
            ScenarioError::Calibration(_) => 5,
            ScenarioError::Data(_) => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    FieldMap,
    Trap,
    Ramp,
    LifetimeScan,
    Fragments,
    /// Simulate a dataset from `[decay]`, or fit `input` when given.
    Decay { fit: bool },
    Calibrate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FieldMap => "field-map",
            Command::Trap => "trap",
            Command::Ramp => "ramp",
            Command::LifetimeScan => "lifetime-scan",
            Command::Fragments => "fragments",
            Command::Decay { .. } => "decay",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Units of table columns: SI throughout, or μm / G / μK.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    Si,
    Lab,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub mc_budget: Option<usize>,
    pub format: Format,
    pub units: Units,
    /// Decay CSV text to fit instead of simulating.
    pub decay_input: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: &Command, config_text: &str, seed: u64) -> Self {
        Provenance {
            tool: "atomchip",
            version: VERSION,
            command: command.name(),
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            seed,
        }
    }

    /// `#`-prefixed header lines for CSV and TOML outputs.
    pub fn comment_lines(&self) -> String {
        format!(
            "# {} {}\n# command: {}\n# config_sha256: {}\n# seed: {}\n",
            self.tool, self.version, self.command, self.config_sha256, self.seed
        )
    }
}

/// Parses the config and runs one subcommand.
pub fn run_text(command: Command, config_text: &str, options: &RunOptions) -> Result<Vec<Artifact>, ScenarioError> {
    let config = ScenarioConfig::from_toml(config_text)?;
    run(command, &config, config_text, options)
}

/// Formats a number compactly and reproducibly: plain notation for
/// magnitudes in [1e-4, 1e9), exponent notation otherwise.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e9).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
