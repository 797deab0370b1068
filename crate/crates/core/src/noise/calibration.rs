use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::lifetime::REFERENCE_TEMPERATURE;
use super::quasistatic::{flip_rate_from_spectrum, quasistatic_noise_tensor, McBudget};
use super::{Conductor, Geometry, NoiseError};
use crate::field::Vec3;
use crate::units::{AtomSpecies, MU0};

/// Largest accepted spread of Γ·h across the calibration heights.
pub const MAX_RESIDUAL: f64 = 0.02;

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("calibration needs a half-space conductor, got {0}")]
    NotHalfSpace(&'static str),
    #[error("calibration needs at least one height")]
    NoHeights,
    #[error("fit residual {residual:.4} exceeds {limit}")]
    Residual { residual: f64, limit: f64 },
    #[error("cannot parse calibration record: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    /// Heights (m) at which Γ·h is sampled; all should satisfy h ≪ δ.
    pub heights: Vec<f64>,
    pub budget: McBudget,
    pub seed: u64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        CalibrationSettings {
            heights: vec![1e-6, 2e-6, 4e-6],
            budget: McBudget { samples: 4_000_000, tolerance: 1e-3 },
            seed: 1,
        }
    }
}

/// Persisted outcome of a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    /// s²/m³.
    pub c_norm: f64,
    pub seed: u64,
    pub mc_samples: usize,
    /// Largest relative deviation of Γ·h from its mean.
    pub residual: f64,
    pub heights_m: Vec<f64>,
    pub conductivity_s_per_m: f64,
    pub temperature_k: f64,
    pub flip_amplitude_factor: f64,
    /// Mean Γ·h (m/s).
    pub rate_times_height: f64,
}

impl CalibrationRecord {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("calibration record serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, CalibrationError> {
        let record: CalibrationRecord = toml::from_str(text).map_err(|e| CalibrationError::Parse(e.to_string()))?;
        if !(record.c_norm > 0.0 && record.c_norm.is_finite()) {
            return Err(CalibrationError::Parse(format!("c_norm must be positive, got {}", record.c_norm)));
        }
        Ok(record)
    }
}

/// Fixes the slab-law constant from the quasi-static Monte Carlo.
///
/// For h ≪ δ the slab law reduces to τ = 3·C·h·(300 K/T)/(π·μ0·σ·A²), so
/// matching 1/τ to Γ_qs gives C = π·μ0·σ·(T/300 K)·A²/(3·Γ_qs·h). The
/// trap-bottom field is taken along z.
pub fn calibrate_quasistatic(
    conductor: &Conductor,
    atom: &AtomSpecies,
    settings: &CalibrationSettings,
) -> Result<CalibrationRecord, CalibrationError> {
    conductor.validate()?;
    if conductor.geometry != Geometry::HalfSpace {
        return Err(CalibrationError::NotHalfSpace(conductor.geometry.label()));
    }
    if settings.heights.is_empty() {
        return Err(CalibrationError::NoHeights);
    }
    let mut products = Vec::with_capacity(settings.heights.len());
    for (i, &h) in settings.heights.iter().enumerate() {
        let spectrum = quasistatic_noise_tensor(h, conductor, &settings.budget, settings.seed.wrapping_add(i as u64))?;
        products.push(flip_rate_from_spectrum(&spectrum, atom, &Vec3::z()) * h);
    }
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    let residual = products.iter().map(|p| (p / mean - 1.0).abs()).fold(0.0, f64::max);
    if residual > MAX_RESIDUAL {
        return Err(CalibrationError::Residual { residual, limit: MAX_RESIDUAL });
    }
    let a2 = atom.flip_amplitude_factor * atom.flip_amplitude_factor;
    let c_norm = PI * MU0 * conductor.conductivity * (conductor.temperature / REFERENCE_TEMPERATURE) * a2 / (3.0 * mean);
    Ok(CalibrationRecord {
        c_norm,
        seed: settings.seed,
        mc_samples: settings.budget.samples,
        residual,
        heights_m: settings.heights.clone(),
        conductivity_s_per_m: conductor.conductivity,
        temperature_k: conductor.temperature,
        flip_amplitude_factor: atom.flip_amplitude_factor,
        rate_times_height: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{flip_lifetime_slab, skin_depth, LifetimeModel, C_NORM_DEFAULT, SIGMA_ALUMINUM};

    const BUNDLED: &str = include_str!("../../../../configs/calibration.toml");

    fn quick() -> CalibrationSettings {
        CalibrationSettings { budget: McBudget { samples: 400_000, tolerance: 1e-2 }, ..Default::default() }
    }

    #[test]
    fn lifetime_matches_quasistatic_rate_near_surface() {
        let c = Conductor::aluminum(Geometry::HalfSpace);
        let atom = AtomSpecies::default();
        let record = calibrate_quasistatic(&c, &atom, &quick()).unwrap();
        let f0 = 560e3;
        let h = skin_depth(f0, SIGMA_ALUMINUM).unwrap() / 100.0;
        let model = LifetimeModel { c_norm: record.c_norm };
        let tau = flip_lifetime_slab(h, f0, &c, &atom, &model).unwrap();
        let s = quasistatic_noise_tensor(h, &c, &quick().budget, 99).unwrap();
        let gamma = flip_rate_from_spectrum(&s, &atom, &Vec3::z());
        assert!((tau * gamma - 1.0).abs() < 0.02, "{}", tau * gamma);
    }

    #[test]
    fn independent_of_calibration_height() {
        let c = Conductor::aluminum(Geometry::HalfSpace);
        let atom = AtomSpecies::default();
        let low = calibrate_quasistatic(&c, &atom, &CalibrationSettings { heights: vec![0.5e-6], ..quick() }).unwrap();
        let high = calibrate_quasistatic(&c, &atom, &CalibrationSettings { heights: vec![5e-6], seed: 2, ..quick() }).unwrap();
        assert!((low.c_norm / high.c_norm - 1.0).abs() < 2e-3);
    }

    #[test]
    fn independent_of_conductor_temperature() {
        // Γ ∝ T is absorbed by the explicit 300 K/T factor of the slab law
        let atom = AtomSpecies::default();
        let warm = calibrate_quasistatic(&Conductor::aluminum(Geometry::HalfSpace), &atom, &quick()).unwrap();
        let cold = Conductor { temperature: 150.0, ..Conductor::aluminum(Geometry::HalfSpace) };
        let cold = calibrate_quasistatic(&cold, &atom, &quick()).unwrap();
        assert!((warm.c_norm / cold.c_norm - 1.0).abs() < 1e-12);
        assert!((cold.rate_times_height / warm.rate_times_height - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bundled_record_is_reproducible() {
        let record = CalibrationRecord::from_toml(BUNDLED).unwrap();
        assert_eq!(record.c_norm, C_NORM_DEFAULT);
        let settings = CalibrationSettings {
            heights: record.heights_m.clone(),
            budget: McBudget { samples: record.mc_samples, tolerance: 1e-3 },
            seed: record.seed,
        };
        let c = Conductor::new(Geometry::HalfSpace, record.conductivity_s_per_m, record.temperature_k).unwrap();
        let atom = AtomSpecies { flip_amplitude_factor: record.flip_amplitude_factor, ..AtomSpecies::default() };
        let fresh = calibrate_quasistatic(&c, &atom, &settings).unwrap();
        assert!((fresh.c_norm / record.c_norm - 1.0).abs() < 1e-4, "{}", fresh.c_norm);
    }

    #[test]
    fn record_round_trip() {
        let record = calibrate_quasistatic(&Conductor::aluminum(Geometry::HalfSpace), &AtomSpecies::default(), &quick()).unwrap();
        assert_eq!(CalibrationRecord::from_toml(&record.to_toml()).unwrap(), record);
        assert!(CalibrationRecord::from_toml("c_norm = 1").is_err());
        assert!(CalibrationRecord::from_toml(&record.to_toml().replace("c_norm =", "c_norm = -")).is_err());
    }

    #[test]
    fn rejects_other_geometries() {
        let wire = Conductor::aluminum(Geometry::Cylinder { radius: 1e-4, axial_cutoff: None });
        assert_eq!(
            calibrate_quasistatic(&wire, &AtomSpecies::default(), &quick()),
            Err(CalibrationError::NotHalfSpace("cylinder"))
        );
        let none = CalibrationSettings { heights: vec![], ..quick() };
        assert_eq!(
            calibrate_quasistatic(&Conductor::aluminum(Geometry::HalfSpace), &AtomSpecies::default(), &none),
            Err(CalibrationError::NoHeights)
        );
    }
}
