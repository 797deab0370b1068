use serde::Serialize;

use super::{positive, skin_depth, Conductor, Geometry, NoiseError};
use crate::units::AtomSpecies;

/// Temperature at which the normalization constant is quoted (K).
pub const REFERENCE_TEMPERATURE: f64 = 300.0;

/// Normalization of the slab lifetime law (s²/m³), frozen from
/// `atomchip calibrate` on a 300 K aluminum half-space (seed 1, 4×10⁶
/// samples); see `configs/calibration.toml`.
pub const C_NORM_DEFAULT: f64 = 523_059.521_895_235_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeModel {
    /// s²/m³.
    pub c_norm: f64,
}

impl Default for LifetimeModel {
    fn default() -> Self {
        LifetimeModel { c_norm: C_NORM_DEFAULT }
    }
}

impl LifetimeModel {
    pub fn lifetime(&self, height: f64, f0: f64, conductor: &Conductor, atom: &AtomSpecies) -> Result<f64, NoiseError> {
        flip_lifetime_slab(height, f0, conductor, atom, self)
    }
}

/// Thermal spin-flip lifetime above a thick slab:
///
/// τ = C·f0·(h/δ)·(2h³ + 3δ³) · (300 K/T) / A²
///
/// with δ the skin depth at f0 and A the atom's flip amplitude factor. Close
/// to the surface τ ∝ h independent of f0; far away τ ∝ h⁴·f0^{3/2}.
pub fn flip_lifetime_slab(
    height: f64,
    f0: f64,
    conductor: &Conductor,
    atom: &AtomSpecies,
    model: &LifetimeModel,
) -> Result<f64, NoiseError> {
    positive("height", height)?;
    positive("spin-flip frequency", f0)?;
    conductor.validate()?;
    match conductor.geometry {
        Geometry::HalfSpace | Geometry::Slab { .. } => {}
        other => return Err(NoiseError::UnsupportedGeometry(other.label())),
    }
    let delta = skin_depth(f0, conductor.conductivity)?;
    let shape = (height / delta) * (2.0 * height.powi(3) + 3.0 * delta.powi(3));
    let amplitude2 = atom.flip_amplitude_factor * atom.flip_amplitude_factor;
    Ok(model.c_norm * f0 * shape * (REFERENCE_TEMPERATURE / conductor.temperature) / amplitude2)
}
