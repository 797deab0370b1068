//! Thermal-cloud thermodynamics in a harmonic trap.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use super::TrapError;
use crate::units::{AtomSpecies, HBAR, H_PLANCK, K_B, SCATTERING_LENGTH_RB87};

/// Riemann ζ(3).
const ZETA_3: f64 = 1.202_056_903_159_594_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionModel {
    /// s-wave scattering length (m); σ = 8π·a² for identical bosons.
    pub scattering_length: f64,
}

impl Default for CollisionModel {
    fn default() -> Self {
        CollisionModel { scattering_length: SCATTERING_LENGTH_RB87 }
    }
}

impl CollisionModel {
    pub fn cross_section(&self) -> f64 {
        8.0 * PI * self.scattering_length * self.scattering_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CloudProperties {
    /// Peak density (m⁻³).
    pub peak_density: f64,
    pub phase_space_density: f64,
    /// √2·n0·σ·v̄ (s⁻¹).
    pub collision_rate: f64,
    /// 1/e density radii along the three trap axes (m).
    pub radii: [f64; 3],
}

fn geometric_mean_angular(frequencies: &[f64; 3]) -> f64 {
    2.0 * PI * (frequencies[0] * frequencies[1] * frequencies[2]).cbrt()
}

fn check_frequencies(frequencies: &[f64; 3]) -> Result<(), TrapError> {
    if frequencies.iter().all(|f| f.is_finite() && *f > 0.0) {
        Ok(())
    } else {
        Err(TrapError::InvalidInput(format!("trap frequencies {frequencies:?} must be positive")))
    }
}

pub fn cloud_properties(
    atoms: f64,
    temperature: f64,
    frequencies: [f64; 3],
    atom: &AtomSpecies,
    collisions: &CollisionModel,
) -> Result<CloudProperties, TrapError> {
    if !(atoms >= 1.0 && atoms.is_finite()) {
        return Err(TrapError::InvalidInput(format!("atom number {atoms} must be at least 1")));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(TrapError::InvalidInput(format!("temperature {temperature} K must be positive")));
    }
    check_frequencies(&frequencies)?;
    let m = atom.mass;
    let kt = K_B * temperature;
    let omega_bar = geometric_mean_angular(&frequencies);
    let peak_density = atoms * omega_bar.powi(3) * (m / (2.0 * PI * kt)).powf(1.5);
    let mean_speed = (8.0 * kt / (PI * m)).sqrt();
    let de_broglie = H_PLANCK / (2.0 * PI * m * kt).sqrt();
    let radii = frequencies.map(|f| {
        let omega = 2.0 * PI * f;
        (2.0 * kt / (m * omega * omega)).sqrt()
    });
    Ok(CloudProperties {
        peak_density,
        phase_space_density: peak_density * de_broglie.powi(3),
        collision_rate: SQRT_2 * peak_density * collisions.cross_section() * mean_speed,
        radii,
    })
}

/// Temperature at which the cloud has the requested elastic collision rate.
/// The rate scales exactly as 1/T at fixed N and ω̄.
pub fn temperature_for_collision_rate(
    rate: f64,
    atoms: f64,
    frequencies: [f64; 3],
    atom: &AtomSpecies,
    collisions: &CollisionModel,
) -> Result<f64, TrapError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(TrapError::InvalidInput(format!("collision rate {rate} must be positive")));
    }
    let reference = 1e-6;
    let at_ref = cloud_properties(atoms, reference, frequencies, atom, collisions)?.collision_rate;
    Ok(reference * at_ref / rate)
}

/// kB·Tc = ħ·ω̄·(N/ζ(3))^{1/3}.
pub fn critical_temperature(atoms: f64, frequencies: [f64; 3]) -> Result<f64, TrapError> {
    if !(atoms >= 1.0 && atoms.is_finite()) {
        return Err(TrapError::InvalidInput(format!("atom number {atoms} must be at least 1")));
    }
    check_frequencies(&frequencies)?;
    Ok(HBAR * geometric_mean_angular(&frequencies) * (atoms / ZETA_3).cbrt() / K_B)
}
