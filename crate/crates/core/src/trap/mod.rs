//! Trap minima and their characterization.
//!
//! The trapping potential of a weak-field seeker is U = gF·mF·μB·|B|, so the
//! minimizer works on |B| directly (plus an optional gravity term converted to
//! field units). Minima are found by saddle-free damped Newton iteration with
//! a gradient-descent fallback, using finite-difference gradients and Hessians.

mod cloud;
mod depth;
mod ramp;

pub use cloud::{
    cloud_properties, critical_temperature, temperature_for_collision_rate, CloudProperties, CollisionModel,
};
pub use depth::{depth_along_rays, trap_depth, DepthOptions};
pub use ramp::{ramp_trajectory, RampFailure, RampOutcome, RampSpec};

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use serde::Serialize;
use thiserror::Error;

use crate::field::{magnitude_gradient, ChipLayout, FieldError, FieldSource, LayoutError, Mat3, Stencil, Vec3};
use crate::units::{AtomSpecies, G_STANDARD, H_PLANCK, MU0};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("minimizer did not converge after {iterations} iterations (|grad| = {gradient:e} T/m): {reason}")]
    NoConvergence { iterations: usize, gradient: f64, reason: String },
    #[error("stationary point at {position:?} is a saddle (curvatures {curvatures:?} T/m²)")]
    Saddle { position: [f64; 3], curvatures: [f64; 3] },
    #[error("minimum at {position:?} lies inside a conductor")]
    InsideConductor { position: [f64; 3] },
    #[error("no escape ray could be sampled around the minimum")]
    NoDepthRays,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Tuning for [`find_minimum`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrapOptions {
    pub stencil: Stencil,
    /// Convergence threshold on |∇|B|| (T/m).
    pub gradient_tolerance: f64,
    /// Also converged once a Newton step in a positive-definite region is
    /// shorter than this (m); finite-difference gradient noise near the
    /// minimum of a many-segment layout can sit above `gradient_tolerance`.
    pub step_tolerance: f64,
    pub max_iterations: usize,
    /// Longest step the minimizer takes in one iteration (m).
    pub max_step: f64,
    /// Curvatures with magnitude below this are treated as flat (T/m²).
    pub flat_curvature: f64,
    /// Trap bottoms below this field are flagged as Majorana-unsafe (T).
    pub near_zero_field: f64,
    /// Add m·g·y to the potential (y up).
    pub gravity: bool,
    pub depth: DepthOptions,
}

impl Default for TrapOptions {
    fn default() -> Self {
        TrapOptions {
            stencil: Stencil::default(),
            gradient_tolerance: 1e-9,
            step_tolerance: 1e-11,
            max_iterations: 200,
            max_step: 100e-6,
            flat_curvature: 1e-3,
            near_zero_field: 10e-7,
            gravity: false,
            depth: DepthOptions::default(),
        }
    }
}

/// Everything reported about a trap minimum. Principal quantities are sorted
/// by ascending curvature.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrapCharacterization {
    pub position: Vec3,
    #[serde(rename = "B0")]
    pub b0: f64,
    pub f0: f64,
    pub principal_curvatures: [f64; 3],
    /// Unit eigenvectors matching `principal_curvatures`.
    pub principal_axes: [Vec3; 3],
    pub trap_frequencies: [f64; 3],
    pub height_above_surface: f64,
    pub height_above_conductor: f64,
    /// Energy barrier to the lowest escape route (J).
    pub depth: f64,
    /// B0 below the Majorana-safety floor.
    pub near_zero: bool,
    /// Number of directions with no confinement (a guide rather than a trap).
    pub flat_directions: usize,
    pub gradient_norm: f64,
    pub iterations: usize,
}

impl TrapCharacterization {
    /// Largest of the trap frequencies, the radial one for an elongated trap.
    pub fn radial_frequency(&self) -> f64 {
        self.trap_frequencies[2]
    }

    /// Smallest trap frequency, the axial one for an elongated trap.
    pub fn axial_frequency(&self) -> f64 {
        self.trap_frequencies[0]
    }
}

/// f0 = |gF|·μB·B0/h, the splitting between adjacent Zeeman sublevels.
pub fn spin_flip_frequency(b0: f64, atom: &AtomSpecies) -> Result<f64, TrapError> {
    if !(b0 >= 0.0 && b0.is_finite()) {
        return Err(TrapError::InvalidInput(format!("bottom field {b0} T must be non-negative")));
    }
    Ok(atom.g_f.abs() * crate::units::MU_B * b0 / H_PLANCK)
}

/// Inverse of [`spin_flip_frequency`].
pub fn bottom_field_for_frequency(f0: f64, atom: &AtomSpecies) -> Result<f64, TrapError> {
    if !(f0 >= 0.0 && f0.is_finite()) {
        return Err(TrapError::InvalidInput(format!("spin-flip frequency {f0} Hz must be non-negative")));
    }
    Ok(f0 * H_PLANCK / (atom.g_f.abs() * crate::units::MU_B))
}

/// Distance from the wire axis where the wire field cancels a transverse
/// bias: μ0·I/(2π·Bx).
pub fn trap_height_side_guide(current: f64, bias: f64) -> Result<f64, TrapError> {
    if !(current > 0.0 && bias > 0.0 && current.is_finite() && bias.is_finite()) {
        return Err(TrapError::InvalidInput(format!(
            "current {current} A and bias {bias} T must be positive"
        )));
    }
    Ok(MU0 * current / (2.0 * PI * bias))
}

/// Wire current that puts the side-guide zero at distance `rho` from the axis.
pub fn side_guide_current(rho: f64, bias: f64) -> Result<f64, TrapError> {
    if !(rho > 0.0 && bias > 0.0 && rho.is_finite() && bias.is_finite()) {
        return Err(TrapError::InvalidInput(format!("distance {rho} m and bias {bias} T must be positive")));
    }
    Ok(2.0 * PI * rho * bias / MU0)
}

/// Radial frequency of a side guide with bottom field `b0`:
/// (Bx/ρ)·sqrt(μ/(m·B0))/2π.
pub fn side_guide_radial_frequency(bias: f64, rho: f64, b0: f64, atom: &AtomSpecies) -> f64 {
    (bias / rho) * (atom.effective_moment() / (atom.mass * b0)).sqrt() / (2.0 * PI)
}

/// Trap potential expressed in field units (T).
struct FieldPotential<'a> {
    layout: &'a ChipLayout,
    /// m·g/μ_eff (T/m), zero without gravity.
    gravity_gradient: f64,
}

impl FieldPotential<'_> {
    fn value(&self, p: &Vec3) -> Result<f64, FieldError> {
        Ok(self.layout.field_magnitude(p)? + self.gravity_gradient * p.y)
    }

    fn gradient(&self, p: &Vec3, stencil: Stencil) -> Result<Vec3, FieldError> {
        let mut g = magnitude_gradient(p, self.layout, stencil)?;
        g.y += self.gravity_gradient;
        Ok(g)
    }

    fn hessian(&self, p: &Vec3, stencil: Stencil) -> Result<Mat3, FieldError> {
        // gravity is linear and drops out
        crate::field::field_magnitude_hessian(p, self.layout, stencil)
    }
}

struct Eigen {
    values: [f64; 3],
    vectors: [Vec3; 3],
}

fn sorted_eigen(h: &Mat3) -> Eigen {
    let eig = SymmetricEigen::new(*h);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Eigen {
        values: idx.map(|i| eig.eigenvalues[i]),
        vectors: idx.map(|i| eig.eigenvectors.column(i).into_owned()),
    }
}

/// Saddle-free Newton direction: curvatures replaced by their magnitude,
/// flat directions left to the gradient fallback.
fn newton_direction(eig: &Eigen, g: &Vec3, flat: f64) -> Vec3 {
    let mut d = Vec3::zeros();
    for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
        if lambda.abs() > flat {
            d -= v * (v.dot(g) / lambda.abs());
        }
    }
    d
}

fn cap(d: Vec3, max_step: f64) -> Vec3 {
    let n = d.norm();
    if n > max_step {
        d * (max_step / n)
    } else {
        d
    }
}

/// Backtracking line search along `d`; returns the accepted point.
fn line_search(pot: &FieldPotential, x: &Vec3, f0: f64, g: &Vec3, d: &Vec3) -> Option<(Vec3, f64)> {
    let slope = g.dot(d);
    if slope >= 0.0 {
        return None;
    }
    let mut t = 1.0;
    for _ in 0..60 {
        let trial = x + d * t;
        if let Ok(f) = pot.value(&trial) {
            if f <= f0 + 1e-4 * t * slope {
                return Some((trial, f));
            }
        }
        t *= 0.5;
    }
    None
}

/// Locates the |B| minimum reachable from `seed` and characterizes it.
pub fn find_minimum(
    layout: &ChipLayout,
    seed: Vec3,
    atom: &AtomSpecies,
    options: &TrapOptions,
) -> Result<TrapCharacterization, TrapError> {
    layout.validate()?;
    if !seed.iter().all(|c| c.is_finite()) {
        return Err(TrapError::InvalidInput("seed position is not finite".into()));
    }
    let gravity_gradient = if options.gravity {
        atom.mass * G_STANDARD / atom.effective_moment()
    } else {
        0.0
    };
    let pot = FieldPotential { layout, gravity_gradient };
    let stencil = options.stencil;

    let mut x = seed;
    let mut fx = pot.value(&x)?;
    let mut g = pot.gradient(&x, stencil)?;
    let mut iterations = 0;
    while g.norm() > options.gradient_tolerance {
        if iterations == options.max_iterations {
            return Err(TrapError::NoConvergence {
                iterations,
                gradient: g.norm(),
                reason: "iteration limit reached".into(),
            });
        }
        iterations += 1;
        let eig = sorted_eigen(&pot.hessian(&x, stencil)?);
        let newton = cap(newton_direction(&eig, &g, options.flat_curvature), options.max_step);
        let positive_definite = eig.values.iter().all(|&l| l > options.flat_curvature);
        if positive_definite && newton.norm() < options.step_tolerance {
            break;
        }

        let mut next = line_search(&pot, &x, fx, &g, &newton);
        if next.is_none() && positive_definite && newton.norm() < 1e-6 {
            // quadratic regime: the decrease is below rounding of |B|
            let trial = x + newton;
            next = pot.value(&trial).ok().map(|f| (trial, f));
        }
        if next.is_none() {
            let lambda_max = eig.values[2].abs().max(options.flat_curvature);
            let descent = cap(-g / lambda_max, options.max_step);
            next = line_search(&pot, &x, fx, &g, &descent).or_else(|| {
                let steepest = -g.normalize() * options.max_step;
                line_search(&pot, &x, fx, &g, &steepest)
            });
        }
        let Some((xn, fxn)) = next else {
            return Err(TrapError::NoConvergence {
                iterations,
                gradient: g.norm(),
                reason: "no descent step found".into(),
            });
        };
        x = xn;
        fx = fxn;
        g = pot.gradient(&x, stencil)?;
    }

    let eig = sorted_eigen(&pot.hessian(&x, stencil)?);
    let flat = options.flat_curvature;
    if eig.values[0] < -flat {
        return Err(TrapError::Saddle { position: x.into(), curvatures: eig.values });
    }
    let flat_directions = eig.values.iter().filter(|l| l.abs() <= flat).count();
    if flat_directions >= 2 {
        return Err(TrapError::NoConvergence {
            iterations,
            gradient: g.norm(),
            reason: format!("potential is flat in {flat_directions} directions; no minimum"),
        });
    }
    if !layout.is_outside_conductors(&x) {
        return Err(TrapError::InsideConductor { position: x.into() });
    }

    let b0 = layout.field_magnitude(&x)?;
    let moment = atom.effective_moment();
    let trap_frequencies = eig
        .values
        .map(|l| if l > flat { (moment * l / atom.mass).sqrt() / (2.0 * PI) } else { 0.0 });
    let depth = depth::depth_along_rays(
        |p| pot.value(p).map(|v| v * moment),
        |p| layout.is_outside_conductors(p),
        &x,
        &options.depth,
    )?;

    Ok(TrapCharacterization {
        position: x,
        b0,
        f0: spin_flip_frequency(b0, atom)?,
        principal_curvatures: eig.values,
        principal_axes: eig.vectors,
        trap_frequencies,
        height_above_surface: layout.height_above_surface(&x),
        height_above_conductor: layout.height_above_conductor(&x),
        depth,
        near_zero: b0 < options.near_zero_field,
        flat_directions,
        gradient_norm: g.norm(),
        iterations,
    })
}

/// Seed just above the side-guide zero of `layout`'s guide wire and bias, or
/// 500 μm above the axis when the layout has no side-guide zero.
pub fn default_seed(layout: &ChipLayout) -> Vec3 {
    let rho = trap_height_side_guide(layout.guide.current, layout.bias_x).unwrap_or(500e-6);
    Vec3::new(0.0, rho * 1.02, 0.0)
}
