//! Axial fragmentation of a thermal cloud by a corrugated parallel field.
//!
//! A small field B∥(z) along the wire adds directly to the axial trap-bottom
//! field, so the Zeeman energy acquires a modulation μ·(|B0 + B∥| − B0) on top
//! of the harmonic axial confinement. A thermal cloud samples it through the
//! Boltzmann factor.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::units::{AtomSpecies, K_B};

/// Default corrugation period (m). Illustrative: the fragments are visible
/// but their spacing is not quoted.
pub const DEFAULT_PERIOD: f64 = 300e-6;

/// Fraction of the envelope peak that bounds the region used for contrast.
pub const CONTRAST_REGION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FragmentationError {
    #[error("{name} must be {requirement}, got {value}")]
    Invalid { name: &'static str, requirement: &'static str, value: f64 },
    #[error("sampled field needs at least two points with strictly increasing z")]
    BadSamples,
    #[error("grid and values differ in length ({grid} vs {values})")]
    LengthMismatch { grid: usize, values: usize },
    #[error("the z grid must have at least two strictly increasing points")]
    BadGrid,
}

fn check(name: &'static str, requirement: &'static str, value: f64, ok: bool) -> Result<(), FragmentationError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(FragmentationError::Invalid { name, requirement, value })
    }
}

fn check_grid(z: &[f64]) -> Result<(), FragmentationError> {
    if z.len() < 2 || z.iter().any(|v| !v.is_finite()) || z.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FragmentationError::BadGrid);
    }
    Ok(())
}

/// Uniform grid of `points` values over [−half_width, half_width].
pub fn symmetric_grid(half_width: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrugationModel {
    /// B∥ = β·B_wire·sin(2πz/Λ + phase).
    Sinusoid { relative_amplitude: f64, period: f64, phase: f64 },
    /// Measured B∥ (T) at strictly increasing z (m); linear interpolation,
    /// held constant beyond the ends.
    Sampled { z: Vec<f64>, field: Vec<f64> },
}

impl CorrugationModel {
    pub fn sinusoid(relative_amplitude: f64) -> Self {
        CorrugationModel::Sinusoid { relative_amplitude, period: DEFAULT_PERIOD, phase: 0.0 }
    }

    pub fn validate(&self) -> Result<(), FragmentationError> {
        match self {
            CorrugationModel::Sinusoid { relative_amplitude, period, phase } => {
                check("relative amplitude", "non-negative", *relative_amplitude, *relative_amplitude >= 0.0)?;
                check("period", "positive", *period, *period > 0.0)?;
                check("phase", "finite", *phase, true)
            }
            CorrugationModel::Sampled { z, field } => {
                if z.len() != field.len() {
                    return Err(FragmentationError::LengthMismatch { grid: z.len(), values: field.len() });
                }
                check_grid(z).map_err(|_| FragmentationError::BadSamples)?;
                if field.iter().any(|b| !b.is_finite()) {
                    return Err(FragmentationError::BadSamples);
                }
                Ok(())
            }
        }
    }
}

fn interpolate(zs: &[f64], values: &[f64], z: f64) -> f64 {
    let last = zs.len() - 1;
    if z <= zs[0] {
        return values[0];
    }
    if z >= zs[last] {
        return values[last];
    }
    let i = zs.partition_point(|&v| v <= z) - 1;
    let t = (z - zs[i]) / (zs[i + 1] - zs[i]);
    values[i] + t * (values[i + 1] - values[i])
}

/// Parallel anomaly field (T) on `z`.
pub fn corrugation_field(z: &[f64], model: &CorrugationModel, wire_field: f64) -> Result<Vec<f64>, FragmentationError> {
    model.validate()?;
    check("wire field", "finite", wire_field, true)?;
    Ok(match model {
        CorrugationModel::Sinusoid { relative_amplitude, period, phase } => z
            .iter()
            .map(|&zi| relative_amplitude * wire_field * (2.0 * PI * zi / period + phase).sin())
            .collect(),
        CorrugationModel::Sampled { z: zs, field } => z.iter().map(|&zi| interpolate(zs, field, zi)).collect(),
    })
}

/// Height dependence of the anomaly amplitude. A field component of period Λ
/// that satisfies Laplace's equation outside its sources decays as
/// exp(−2π·Δh/Λ) away from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnomalyHeightLaw {
    pub reference_height: f64,
    /// Amplitude of B∥ at the reference height (T).
    pub reference_amplitude: f64,
    pub period: f64,
}

impl Default for AnomalyHeightLaw {
    /// ±10 mG at 27 μm above the surface.
    fn default() -> Self {
        AnomalyHeightLaw { reference_height: 27e-6, reference_amplitude: 1e-6, period: DEFAULT_PERIOD }
    }
}

impl AnomalyHeightLaw {
    pub fn amplitude_at(&self, height: f64) -> Result<f64, FragmentationError> {
        check("height", "positive", height, height > 0.0)?;
        check("period", "positive", self.period, self.period > 0.0)?;
        Ok(self.reference_amplitude * (-2.0 * PI * (height - self.reference_height) / self.period).exp())
    }

    /// Sinusoidal model at `height` expressed relative to `wire_field`.
    pub fn model_at(&self, height: f64, wire_field: f64) -> Result<CorrugationModel, FragmentationError> {
        check("wire field", "positive", wire_field, wire_field > 0.0)?;
        Ok(CorrugationModel::Sinusoid {
            relative_amplitude: self.amplitude_at(height)? / wire_field,
            period: self.period,
            phase: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrugatedPotential {
    /// Total axial potential (J).
    pub potential: Vec<f64>,
    /// Harmonic part alone (J).
    pub envelope: Vec<f64>,
    /// B0 + B∥ changes sign somewhere on the grid.
    pub zero_crossing: bool,
}

impl CorrugatedPotential {
    /// Peak-to-peak of the corrugation term (J).
    pub fn modulation_peak_to_peak(&self) -> f64 {
        let diffs = self.potential.iter().zip(&self.envelope).map(|(u, e)| u - e);
        let (lo, hi) = diffs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
        hi - lo
    }
}

/// U(z) = ½·m·ω_z²·z² + μ·(|B0 + B∥(z)| − B0).
pub fn corrugated_potential(
    z: &[f64],
    b0: f64,
    axial_frequency: f64,
    parallel_field: &[f64],
    atom: &AtomSpecies,
) -> Result<CorrugatedPotential, FragmentationError> {
    check_grid(z)?;
    check("trap-bottom field", "positive", b0, b0 > 0.0)?;
    check("axial frequency", "non-negative", axial_frequency, axial_frequency >= 0.0)?;
    if parallel_field.len() != z.len() {
        return Err(FragmentationError::LengthMismatch { grid: z.len(), values: parallel_field.len() });
    }
    let omega = 2.0 * PI * axial_frequency;
    let moment = atom.effective_moment();
    let envelope: Vec<f64> = z.iter().map(|&zi| 0.5 * atom.mass * omega * omega * zi * zi).collect();
    let mut zero_crossing = false;
    let potential = envelope
        .iter()
        .zip(parallel_field)
        .map(|(e, &b)| {
            if b0 + b <= 0.0 {
                zero_crossing = true;
            }
            e + moment * ((b0 + b).abs() - b0)
        })
        .collect();
    Ok(CorrugatedPotential { potential, envelope, zero_crossing })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AxialProfile {
    pub z: Vec<f64>,
    pub potential: Vec<f64>,
    /// Normalized so that ∫n dz = 1 by the trapezoid rule (m⁻¹).
    pub density: Vec<f64>,
    /// Same shape as the density in this 1D model, scaled to unit peak.
    pub optical_thickness: Vec<f64>,
}

fn trapezoid(z: &[f64], y: &[f64]) -> f64 {
    z.windows(2).zip(y.windows(2)).map(|(zw, yw)| 0.5 * (zw[1] - zw[0]) * (yw[0] + yw[1])).sum()
}

/// Boltzmann line density n(z) ∝ exp(−U/kB·T).
pub fn density_profile(z: &[f64], potential: &[f64], temperature: f64) -> Result<AxialProfile, FragmentationError> {
    check_grid(z)?;
    check("temperature", "positive", temperature, temperature > 0.0)?;
    if potential.len() != z.len() {
        return Err(FragmentationError::LengthMismatch { grid: z.len(), values: potential.len() });
    }
    if potential.iter().any(|u| !u.is_finite()) {
        return Err(FragmentationError::Invalid { name: "potential", requirement: "finite", value: f64::NAN });
    }
    let kt = K_B * temperature;
    let u_min = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = potential.iter().map(|u| (-(u - u_min) / kt).exp()).collect();
    let norm = trapezoid(z, &weights);
    let density: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    let peak = density.iter().copied().fold(0.0, f64::max);
    Ok(AxialProfile {
        z: z.to_vec(),
        potential: potential.to_vec(),
        optical_thickness: density.iter().map(|n| n / peak).collect(),
        density,
    })
}

/// (max − min)/(max + min) of n/n_envelope over the region where the
/// envelope density is at least [`CONTRAST_REGION`] of its peak.
pub fn fragment_contrast(profile: &AxialProfile, envelope: &AxialProfile) -> Result<f64, FragmentationError> {
    if profile.z != envelope.z {
        return Err(FragmentationError::LengthMismatch { grid: profile.z.len(), values: envelope.z.len() });
    }
    let peak = envelope.density.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = profile
        .density
        .iter()
        .zip(&envelope.density)
        .filter(|(_, &e)| e >= CONTRAST_REGION * peak)
        .map(|(n, e)| n / e)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    if !(hi > lo) {
        return Ok(0.0);
    }
    Ok((hi - lo) / (hi + lo))
}

/// Everything needed for one fragmentation snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FragmentScenario {
    pub z: Vec<f64>,
    pub model: CorrugationModel,
    /// Field of the guide wire at the cloud (T).
    pub wire_field: f64,
    pub b0: f64,
    pub axial_frequency: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FragmentReport {
    pub profile: AxialProfile,
    pub contrast: f64,
    /// Peak-to-peak corrugation of the potential (K).
    pub modulation_kelvin: f64,
    pub zero_crossing: bool,
}

pub fn fragment_report(scenario: &FragmentScenario, atom: &AtomSpecies) -> Result<FragmentReport, FragmentationError> {
    let field = corrugation_field(&scenario.z, &scenario.model, scenario.wire_field)?;
    let pot = corrugated_potential(&scenario.z, scenario.b0, scenario.axial_frequency, &field, atom)?;
    let profile = density_profile(&scenario.z, &pot.potential, scenario.temperature)?;
    let envelope = density_profile(&scenario.z, &pot.envelope, scenario.temperature)?;
    Ok(FragmentReport {
        contrast: fragment_contrast(&profile, &envelope)?,
        modulation_kelvin: pot.modulation_peak_to_peak() / K_B,
        zero_crossing: pot.zero_crossing,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::MU_B;
    use approx::assert_relative_eq;

    const GAUSS: f64 = 1e-4;

    fn scenario(beta: f64, temperature: f64) -> FragmentScenario {
        FragmentScenario {
            z: symmetric_grid(600e-6, 4001),
            model: CorrugationModel::sinusoid(beta),
            wire_field: 33.0 * GAUSS,
            b0: 0.8 * GAUSS,
            axial_frequency: 26.0,
            temperature,
        }
    }

    #[test]
    fn anomaly_amplitude() {
        let z = symmetric_grid(150e-6, 3001);
        let b = corrugation_field(&z, &CorrugationModel::sinusoid(3e-4), 33.0 * GAUSS).unwrap();
        let amp = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((amp - 1e-6).abs() / 1e-6 < 0.05, "{amp}");
        assert!(corrugation_field(&z, &CorrugationModel::sinusoid(0.0), 33.0 * GAUSS).unwrap().iter().all(|&v| v == 0.0));
        let shifted = CorrugationModel::Sinusoid { relative_amplitude: 3e-4, period: DEFAULT_PERIOD, phase: PI };
        let c = corrugation_field(&z, &shifted, 33.0 * GAUSS).unwrap();
        for (x, y) in b.iter().zip(&c) {
            assert!((x + y).abs() < 1e-18);
        }
    }

    #[test]
    fn sampled_field_interpolates() {
        let model = CorrugationModel::Sampled { z: vec![0.0, 1.0, 3.0], field: vec![0.0, 2.0, 0.0] };
        let b = corrugation_field(&[-1.0, 0.5, 2.0, 5.0], &model, 1.0).unwrap();
        assert_eq!(b, vec![0.0, 1.0, 1.0, 0.0]);
        let bad = CorrugationModel::Sampled { z: vec![0.0, 0.0], field: vec![1.0, 1.0] };
        assert_eq!(bad.validate(), Err(FragmentationError::BadSamples));
    }

    #[test]
    fn modulation_depth() {
        let z = symmetric_grid(300e-6, 6001);
        let b: Vec<f64> = z.iter().map(|&zi| 10e-3 * GAUSS * (2.0 * PI * zi / DEFAULT_PERIOD).sin()).collect();
        let pot = corrugated_potential(&z, 0.8 * GAUSS, 26.0, &b, &AtomSpecies::default()).unwrap();
        let pp = pot.modulation_peak_to_peak() / K_B;
        assert_relative_eq!(pp, MU_B * 20e-3 * GAUSS / K_B, max_relative = 1e-9);
        assert!((pp - 1.34e-6).abs() / 1.34e-6 < 0.01);
        assert!(!pot.zero_crossing);
    }

    #[test]
    fn flat_without_confinement_or_anomaly() {
        let z = symmetric_grid(1e-4, 11);
        let pot = corrugated_potential(&z, 1e-4, 0.0, &[0.0; 11], &AtomSpecies::default()).unwrap();
        assert!(pot.potential.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn offset_keeps_minima() {
        let z = symmetric_grid(300e-6, 601);
        let atom = AtomSpecies::default();
        let b = corrugation_field(&z, &CorrugationModel::sinusoid(3e-4), 33.0 * GAUSS).unwrap();
        let shifted: Vec<f64> = b.iter().map(|v| v + 5e-3 * GAUSS).collect();
        let argmin = |u: &[f64]| (1..u.len() - 1).filter(|&i| u[i] < u[i - 1] && u[i] < u[i + 1]).collect::<Vec<_>>();
        let a = corrugated_potential(&z, GAUSS, 26.0, &b, &atom).unwrap();
        let c = corrugated_potential(&z, GAUSS, 26.0, &shifted, &atom).unwrap();
        assert_eq!(argmin(&a.potential), argmin(&c.potential));
    }

    #[test]
    fn zero_crossing_flagged() {
        let z = symmetric_grid(1e-4, 5);
        let pot = corrugated_potential(&z, 1e-6, 26.0, &[0.0, -2e-6, 0.0, 0.0, 0.0], &AtomSpecies::default()).unwrap();
        assert!(pot.zero_crossing);
    }

    #[test]
    fn density_normalized_and_offset_invariant() {
        let z = symmetric_grid(400e-6, 2001);
        let u: Vec<f64> = z.iter().map(|&zi| 1e-29 * (zi * 1e4).powi(2) + 1e-30 * (zi * 2e4).sin()).collect();
        let p = density_profile(&z, &u, 2e-6).unwrap();
        assert!((trapezoid(&z, &p.density) - 1.0).abs() < 1e-9);
        assert!(p.density.iter().all(|&n| n >= 0.0));
        let lifted: Vec<f64> = u.iter().map(|v| v + 3e-29).collect();
        let q = density_profile(&z, &lifted, 2e-6).unwrap();
        for (a, b) in p.density.iter().zip(&q.density) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn contrast_matches_boltzmann() {
        let atom = AtomSpecies::default();
        let r = fragment_report(&scenario(3e-4, 2e-6), &atom).unwrap();
        let du = r.modulation_kelvin;
        let oracle = (du / (2.0 * 2e-6)).tanh();
        assert!((r.contrast - oracle).abs() / oracle < 0.01, "{} vs {oracle}", r.contrast);
        assert!((r.contrast - 0.32).abs() / 0.32 < 0.1);
    }

    #[test]
    fn contrast_limits_and_monotonicity() {
        let atom = AtomSpecies::default();
        assert_eq!(fragment_report(&scenario(0.0, 2e-6), &atom).unwrap().contrast, 0.0);
        let mut last = 0.0;
        for beta in [1e-5, 5e-5, 1e-4, 3e-4, 6e-4] {
            let c = fragment_report(&scenario(beta, 2e-6), &atom).unwrap().contrast;
            assert!(c >= last);
            last = c;
        }
        let hot = fragment_report(&scenario(3e-4, 2e-3), &atom).unwrap().contrast;
        assert!(hot < 1e-3, "{hot}");
    }

    #[test]
    fn height_law_fades_far_from_surface() {
        let law = AnomalyHeightLaw::default();
        assert_relative_eq!(law.amplitude_at(27e-6).unwrap(), 1e-6, max_relative = 1e-12);
        let atom = AtomSpecies::default();
        let contrast = |h: f64| {
            let s = FragmentScenario { model: law.model_at(h, 33.0 * GAUSS).unwrap(), ..scenario(0.0, 2e-6) };
            fragment_report(&s, &atom).unwrap().contrast
        };
        let near = contrast(27e-6);
        let far = contrast(100e-6);
        assert!(far < 0.1 && far < near / 3.0, "{near} {far}");
        assert!(contrast(60e-6) > far);
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = symmetric_grid(1e-4, 5);
        assert!(corrugated_potential(&z, 0.0, 1.0, &[0.0; 5], &AtomSpecies::default()).is_err());
        assert!(density_profile(&z, &[0.0; 5], 0.0).is_err());
        assert!(density_profile(&[0.0, 0.0], &[0.0; 2], 1.0).is_err());
        assert!(CorrugationModel::sinusoid(-1.0).validate().is_err());
    }
}
