//! Quasi-static Johnson-noise field spectrum by Monte Carlo Biot–Savart.
//!
//! A point current element j at r′ gives δB = (μ0/4π)·j × R/R³ with R the
//! vector from r′ to the atom. For white, spatially uncorrelated current noise
//! with one-sided density 4·kB·T·σ per component, summing over the three
//! current directions gives
//!
//! S_ij = (μ0/4π)²·4kB·T·σ·∫_V (δ_ij·R² − R_i·R_j)/R⁶ d³r′.
//!
//! In spherical coordinates around the atom, with s = 1/R, the integrand
//! becomes (δ_ij − Ω_iΩ_j) ds dΩ. Every conductor here lies in y ≤ 0, so only
//! the lower hemisphere and s ≤ 1/h contribute, and the integral is a bounded
//! indicator average over the unit cube.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{positive, skin_depth, Conductor, Geometry, NoiseError};
use crate::field::Vec3;
use crate::units::{AtomSpecies, HBAR, K_B, MU0};

/// Strata handled by one independently seeded random stream. Fixed so that
/// results do not depend on the number of worker threads.
const STRATA_PER_CHUNK: usize = 4096;

/// Axial cutoff of cylinder integrals in units of the atom height.
const CYLINDER_CUTOFF_HEIGHTS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct McBudget {
    /// Total samples; rounded down to 2·K³ (two per stratum of a K³ grid).
    pub samples: usize,
    /// Requested relative standard error on the trace of the tensor.
    pub tolerance: f64,
}

impl Default for McBudget {
    fn default() -> Self {
        McBudget { samples: 2_000_000, tolerance: 1e-3 }
    }
}

impl McBudget {
    fn strata_per_axis(&self) -> usize {
        ((self.samples / 2) as f64).cbrt().floor().max(1.0) as usize
    }
}

/// One-sided magnetic noise spectrum at the atom (T²/Hz).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NoiseSpectrum {
    pub height: f64,
    pub components: [[f64; 3]; 3],
    pub std_errors: [[f64; 3]; 3],
    pub convention: &'static str,
    pub samples: usize,
    /// Standard error of the trace is within the requested tolerance.
    pub converged: bool,
    /// Relative change of the trace when the cylinder cutoff is doubled.
    pub cutoff_change: Option<f64>,
    /// Set by [`NoiseSpectrum::check_quasistatic`] when h > δ/10.
    pub quasistatic_warning: bool,
}

impl NoiseSpectrum {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.components[i][j])
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.components[i][i]).sum()
    }

    /// Sum of the two components perpendicular to `direction`.
    pub fn perpendicular_sum(&self, direction: &Vec3) -> f64 {
        let n = direction.normalize();
        self.trace() - (n.transpose() * self.matrix() * n)[(0, 0)]
    }

    /// Flags results that are outside the quasi-static regime at `f0`.
    pub fn check_quasistatic(&mut self, f0: f64, conductivity: f64) -> Result<bool, NoiseError> {
        self.quasistatic_warning = self.height > skin_depth(f0, conductivity)? / 10.0;
        Ok(self.quasistatic_warning)
    }
}

/// Γ = (A·μB)²/(2ħ²)·(S⊥₁ + S⊥₂) for trap-bottom field along `bottom_field`.
pub fn flip_rate_from_spectrum(spectrum: &NoiseSpectrum, atom: &AtomSpecies, bottom_field: &Vec3) -> f64 {
    let moment = atom.transition_moment();
    moment * moment / (2.0 * HBAR * HBAR) * spectrum.perpendicular_sum(bottom_field)
}

struct Sample {
    omega: Vec3,
    /// Distance from the atom; infinite when u3 = 0.
    distance: f64,
    u1: f64,
    u3: f64,
}

/// Indicator of the conductor volume, expressed where possible directly in
/// the unit-cube variables to stay exact at the domain edges.
fn inside(geometry: &Geometry, h: f64, cutoff: f64, p: &Sample) -> bool {
    match *geometry {
        Geometry::HalfSpace => p.u3 <= p.u1,
        Geometry::Slab { thickness } | Geometry::Film { thickness } => {
            p.u3 <= p.u1 && h * p.u1 <= (h + thickness) * p.u3
        }
        Geometry::Cylinder { radius, .. } => {
            if !p.distance.is_finite() {
                return false;
            }
            let r = Vec3::new(0.0, h, 0.0) + p.omega * p.distance;
            let dy = r.y + radius;
            r.x * r.x + dy * dy <= radius * radius && r.z.abs() <= 0.5 * cutoff
        }
    }
}

#[derive(Clone, Copy)]
struct Partial {
    sum: [f64; 6],
    var: [f64; 6],
    doubled: f64,
}

impl Partial {
    fn zero() -> Self {
        Partial { sum: [0.0; 6], var: [0.0; 6], doubled: 0.0 }
    }
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

fn kernel(omega: &Vec3) -> [f64; 6] {
    PAIRS.map(|(i, j)| if i == j { 1.0 - omega[i] * omega[i] } else { -omega[i] * omega[j] })
}

fn chunk_sum(geometry: &Geometry, h: f64, cutoff: f64, k: usize, chunk: usize, seed: u64) -> Partial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let total = k * k * k;
    let kf = k as f64;
    let mut out = Partial::zero();
    let doubled_geometry = match *geometry {
        Geometry::Cylinder { .. } => Some(2.0 * cutoff),
        _ => None,
    };
    for stratum in chunk * STRATA_PER_CHUNK..((chunk + 1) * STRATA_PER_CHUNK).min(total) {
        let (a, b, c) = (stratum / (k * k), (stratum / k) % k, stratum % k);
        let mut values = [[0.0; 6]; 2];
        let mut doubled = [0.0; 2];
        for (slot, value) in values.iter_mut().enumerate() {
            let u1 = (a as f64 + rng.random::<f64>()) / kf;
            let u2 = (b as f64 + rng.random::<f64>()) / kf;
            let u3 = (c as f64 + rng.random::<f64>()) / kf;
            let sin_t = (1.0 - u1 * u1).max(0.0).sqrt();
            let phi = 2.0 * PI * u2;
            let omega = Vec3::new(sin_t * phi.cos(), -u1, sin_t * phi.sin());
            let sample = Sample { omega, distance: h / u3, u1, u3 };
            let kern = kernel(&omega);
            if inside(geometry, h, cutoff, &sample) {
                *value = kern;
            }
            if let Some(long) = doubled_geometry {
                if inside(geometry, h, long, &sample) {
                    doubled[slot] = kern[0] + kern[1] + kern[2];
                }
            }
        }
        for (m, (a, b)) in values[0].iter().zip(&values[1]).enumerate() {
            out.sum[m] += 0.5 * (a + b);
            out.var[m] += 0.25 * (a - b) * (a - b);
        }
        out.doubled += 0.5 * (doubled[0] + doubled[1]);
    }
    out
}

/// Quasi-static noise tensor at height `h` above `conductor`.
///
/// Deterministic for a given `seed` and budget regardless of thread count.
/// The result is returned even when the error target is missed, with
/// `converged` cleared.
pub fn quasistatic_noise_tensor(
    h: f64,
    conductor: &Conductor,
    budget: &McBudget,
    seed: u64,
) -> Result<NoiseSpectrum, NoiseError> {
    positive("height", h)?;
    conductor.validate()?;
    positive("tolerance", budget.tolerance)?;
    let cutoff = match conductor.geometry {
        Geometry::Cylinder { axial_cutoff, .. } => axial_cutoff.unwrap_or(CYLINDER_CUTOFF_HEIGHTS * h),
        _ => f64::INFINITY,
    };
    let k = budget.strata_per_axis();
    let strata = k * k * k;
    let chunks = strata.div_ceil(STRATA_PER_CHUNK);
    let partials: Vec<Partial> = (0..chunks)
        .into_par_iter()
        .map(|chunk| chunk_sum(&conductor.geometry, h, cutoff, k, chunk, seed))
        .collect();
    let mut total = Partial::zero();
    for p in &partials {
        for m in 0..6 {
            total.sum[m] += p.sum[m];
            total.var[m] += p.var[m];
        }
        total.doubled += p.doubled;
    }

    // volume of the (Ω, s) domain: 2π steradians × 1/h
    let volume = 2.0 * PI / h;
    let n = strata as f64;
    let prefactor = (MU0 / (4.0 * PI)).powi(2) * 4.0 * K_B * conductor.temperature * conductor.conductivity;
    let scale = prefactor * volume / n;
    let mut components = [[0.0; 3]; 3];
    let mut std_errors = [[0.0; 3]; 3];
    for (m, &(i, j)) in PAIRS.iter().enumerate() {
        components[i][j] = scale * total.sum[m];
        components[j][i] = components[i][j];
        std_errors[i][j] = scale * total.var[m].sqrt();
        std_errors[j][i] = std_errors[i][j];
    }
    let trace = components[0][0] + components[1][1] + components[2][2];
    // the trace error is bounded by the sum of the diagonal errors
    let trace_error = std_errors[0][0] + std_errors[1][1] + std_errors[2][2];
    let converged = trace > 0.0 && trace_error <= budget.tolerance * trace;
    let cutoff_change = match conductor.geometry {
        Geometry::Cylinder { .. } if trace > 0.0 => Some((scale * total.doubled - trace) / trace),
        Geometry::Cylinder { .. } => Some(0.0),
        _ => None,
    };
    Ok(NoiseSpectrum {
        height: h,
        components,
        std_errors,
        convention: "one-sided",
        samples: 2 * strata,
        converged,
        cutoff_change,
        quasistatic_warning: false,
    })
}

/// Closed-form half-space tensor, used as a test oracle.
#[cfg(test)]
pub(crate) fn half_space_exact(h: f64, conductor: &Conductor) -> [f64; 3] {
    let prefactor = (MU0 / (4.0 * PI)).powi(2) * 4.0 * K_B * conductor.temperature * conductor.conductivity;
    // tangential x, normal y, tangential z
    [prefactor * 3.0 * PI / (4.0 * h), prefactor * PI / (2.0 * h), prefactor * 3.0 * PI / (4.0 * h)]
}
