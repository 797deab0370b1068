use log::warn;

use super::TrapError;
use crate::field::{ChipLayout, FieldError, FieldSource, Vec3};
use crate::units::AtomSpecies;

/// Escape-ray sampling used for trap depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthOptions {
    /// Number of points sampled along the spherical Fibonacci lattice of
    /// ray directions, in addition to the six coordinate directions.
    pub lattice_rays: usize,
    /// Ray length (m).
    pub extent: f64,
    pub samples_per_ray: usize,
}

impl Default for DepthOptions {
    fn default() -> Self {
        DepthOptions { lattice_rays: 20, extent: 8e-3, samples_per_ray: 1600 }
    }
}

impl DepthOptions {
    pub fn directions(&self) -> Vec<Vec3> {
        let mut dirs: Vec<Vec3> = (0..3)
            .flat_map(|i| {
                let mut e = Vec3::zeros();
                e[i] = 1.0;
                [e, -e]
            })
            .collect();
        let n = self.lattice_rays;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for k in 0..n {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            dirs.push(Vec3::new(r * phi.cos(), r * phi.sin(), z));
        }
        dirs
    }
}

/// Lowest barrier max(U) − U(centre) over the escape rays.
///
/// A ray stops where `inside_region` turns false (an atom reaching a surface
/// is lost there). Rays that hit a field singularity are skipped.
pub fn depth_along_rays<U, R>(potential: U, inside_region: R, centre: &Vec3, options: &DepthOptions) -> Result<f64, TrapError>
where
    U: Fn(&Vec3) -> Result<f64, FieldError>,
    R: Fn(&Vec3) -> bool,
{
    if !(options.extent > 0.0) || options.samples_per_ray == 0 {
        return Err(TrapError::InvalidInput("depth rays need positive extent and samples".into()));
    }
    let u0 = potential(centre)?;
    let mut best: Option<f64> = None;
    'rays: for dir in options.directions() {
        let mut barrier = f64::NEG_INFINITY;
        for k in 1..=options.samples_per_ray {
            let p = centre + dir * (options.extent * k as f64 / options.samples_per_ray as f64);
            if !inside_region(&p) {
                break;
            }
            match potential(&p) {
                Ok(u) => barrier = barrier.max(u),
                Err(e) => {
                    warn!("skipping escape ray {dir:?}: {e}");
                    continue 'rays;
                }
            }
        }
        if barrier.is_finite() {
            let d = (barrier - u0).max(0.0);
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        } else {
            // ray left the region before its first sample: no barrier at all
            best = Some(0.0);
        }
    }
    best.ok_or(TrapError::NoDepthRays)
}

/// Depth (J) of the trap at `position` in `layout`.
pub fn trap_depth(position: &Vec3, layout: &ChipLayout, atom: &AtomSpecies, options: &DepthOptions) -> Result<f64, TrapError> {
    let moment = atom.effective_moment();
    depth_along_rays(
        |p| layout.field_magnitude(p).map(|b| b * moment),
        |p| layout.is_outside_conductors(p),
        position,
        options,
    )
}
