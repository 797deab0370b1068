//! Spin-flip losses near conductors.
//!
//! Thermal (Johnson–Nyquist) current fluctuations in a warm metal radiate a
//! magnetic near field whose spectrum at the Larmor frequency drives
//! |2,2⟩→|2,1⟩ transitions. Two routes are provided and tied together by a
//! single normalization constant:
//!
//! * a closed-form lifetime law for a thick slab, valid at any h/δ
//!   ([`flip_lifetime_slab`]), known only up to a constant factor;
//! * a Monte Carlo Biot–Savart integral of white current-density noise over
//!   the conductor volume ([`quasistatic_noise_tensor`]), absolute but valid
//!   only for h ≪ δ.
//!
//! [`calibrate_quasistatic`] matches the two in their common regime.

mod calibration;
mod lifetime;
mod quasistatic;

pub use calibration::{calibrate_quasistatic, CalibrationError, CalibrationRecord, CalibrationSettings, MAX_RESIDUAL};
pub use lifetime::{flip_lifetime_slab, LifetimeModel, C_NORM_DEFAULT, REFERENCE_TEMPERATURE};
pub use quasistatic::{flip_rate_from_spectrum, quasistatic_noise_tensor, McBudget, NoiseSpectrum};

use serde::Serialize;
use thiserror::Error;

use crate::units::MU0;

/// Room-temperature aluminum (S/m).
pub const SIGMA_ALUMINUM: f64 = 3.77e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("the thick-slab lifetime law does not apply to {0}")]
    UnsupportedGeometry(&'static str),
    #[error("no loss channels given")]
    NoChannels,
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64, NoiseError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(NoiseError::NonPositive { name, value })
    }
}

/// Conductor shape in the chip frame: the metal surface nearest the atom is
/// the plane y = 0 and the metal lies below it. The atom sits at (0, h, 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    HalfSpace,
    Slab { thickness: f64 },
    Film { thickness: f64 },
    /// Cylinder with axis along z through (0, −radius, 0). The volume is cut
    /// at |z| ≤ cutoff/2; `None` uses 50 × the atom height.
    Cylinder { radius: f64, axial_cutoff: Option<f64> },
}

impl Geometry {
    pub fn label(&self) -> &'static str {
        match self {
            Geometry::HalfSpace => "half-space",
            Geometry::Slab { .. } => "slab",
            Geometry::Film { .. } => "film",
            Geometry::Cylinder { .. } => "cylinder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conductor {
    pub geometry: Geometry,
    /// S/m.
    pub conductivity: f64,
    /// K.
    pub temperature: f64,
}

impl Conductor {
    pub fn new(geometry: Geometry, conductivity: f64, temperature: f64) -> Result<Self, NoiseError> {
        let c = Conductor { geometry, conductivity, temperature };
        c.validate()?;
        Ok(c)
    }

    /// Aluminum at 300 K.
    pub fn aluminum(geometry: Geometry) -> Self {
        Conductor { geometry, conductivity: SIGMA_ALUMINUM, temperature: 300.0 }
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        positive("conductivity", self.conductivity)?;
        positive("temperature", self.temperature)?;
        match self.geometry {
            Geometry::HalfSpace => {}
            Geometry::Slab { thickness } | Geometry::Film { thickness } => {
                positive("thickness", thickness)?;
            }
            Geometry::Cylinder { radius, axial_cutoff } => {
                positive("radius", radius)?;
                if let Some(l) = axial_cutoff {
                    positive("axial cutoff", l)?;
                }
            }
        }
        Ok(())
    }
}

/// δ = 1/sqrt(π·μ0·σ·f).
pub fn skin_depth(frequency: f64, conductivity: f64) -> Result<f64, NoiseError> {
    positive("frequency", frequency)?;
    positive("conductivity", conductivity)?;
    Ok(1.0 / (std::f64::consts::PI * MU0 * conductivity * frequency).sqrt())
}

/// Noise-power reduction of a film of `thickness` relative to a thick slab,
/// taking the relevant fluctuations of a thick slab to live within one skin
/// depth of its surface: δ/thickness, or 1 when the film is not thinner than δ.
pub fn film_suppression(thickness: f64, frequency: f64, conductivity: f64) -> Result<f64, NoiseError> {
    film_suppression_for_skin_depth(thickness, skin_depth(frequency, conductivity)?)
}

pub fn film_suppression_for_skin_depth(thickness: f64, skin_depth: f64) -> Result<f64, NoiseError> {
    positive("thickness", thickness)?;
    positive("skin depth", skin_depth)?;
    Ok(if thickness >= skin_depth { 1.0 } else { skin_depth / thickness })
}

/// Anchor point of the technical-noise power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TechnicalReference {
    /// Distance from the wire centre (m).
    pub r_ref: f64,
    pub tau_ref: f64,
}

/// Lifetime limited by rf current noise in the wire: the field falls as 1/r,
/// the loss rate as 1/r², so τ = τ_ref·(r/r_ref)².
pub fn technical_noise_lifetime(r: f64, reference: &TechnicalReference) -> Result<f64, NoiseError> {
    positive("distance", r)?;
    positive("reference distance", reference.r_ref)?;
    positive("reference lifetime", reference.tau_ref)?;
    Ok(reference.tau_ref * (r / reference.r_ref).powi(2))
}

/// Harmonic combination 1/τ = Σ 1/τᵢ. Infinite lifetimes are absent channels.
pub fn combine_losses(channels: &[f64]) -> Result<f64, NoiseError> {
    if channels.is_empty() {
        return Err(NoiseError::NoChannels);
    }
    let mut rate = 0.0;
    for &tau in channels {
        if !(tau > 0.0) {
            return Err(NoiseError::NonPositive { name: "lifetime", value: tau });
        }
        rate += 1.0 / tau;
    }
    Ok(1.0 / rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LossPrediction {
    pub tau_thermal: f64,
    pub tau_technical: Option<f64>,
    /// Infinite when no background loss is modelled.
    pub tau_background: f64,
    pub tau_total: f64,
}

impl LossPrediction {
    pub fn new(tau_thermal: f64, tau_technical: Option<f64>, tau_background: f64) -> Result<Self, NoiseError> {
        let mut channels = vec![tau_thermal, tau_background];
        channels.extend(tau_technical);
        let tau_total = combine_losses(&channels)?;
        Ok(LossPrediction { tau_thermal, tau_technical, tau_background, tau_total })
    }
}
