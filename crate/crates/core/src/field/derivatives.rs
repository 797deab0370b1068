//! Central finite differences of B and |B|.

use super::{FieldError, FieldSource, Mat3, Vec3};

/// Default stencil step (m).
pub const DEFAULT_STEP: f64 = 0.1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub step: f64,
    /// Combine steps h and h/2 to cancel the O(h²) truncation term.
    pub richardson: bool,
}

impl Default for Stencil {
    fn default() -> Self {
        Stencil { step: DEFAULT_STEP, richardson: false }
    }
}

impl Stencil {
    pub fn with_step(step: f64) -> Self {
        Stencil { step, richardson: false }
    }

    fn check(&self) -> Result<(), FieldError> {
        if self.step > 0.0 && self.step.is_finite() {
            Ok(())
        } else {
            Err(FieldError::BadStep(self.step))
        }
    }

    fn extrapolate<T, F>(&self, mut at_step: F) -> Result<T, FieldError>
    where
        T: std::ops::Mul<f64, Output = T> + std::ops::Sub<Output = T>,
        F: FnMut(f64) -> Result<T, FieldError>,
    {
        self.check()?;
        let coarse = at_step(self.step)?;
        if !self.richardson {
            return Ok(coarse);
        }
        let fine = at_step(0.5 * self.step)?;
        Ok(fine * (4.0 / 3.0) - coarse * (1.0 / 3.0))
    }
}

fn axis(i: usize) -> Vec3 {
    let mut e = Vec3::zeros();
    e[i] = 1.0;
    e
}

/// J[(i, j)] = ∂B_i/∂x_j (T/m).
pub fn field_jacobian<S: FieldSource + ?Sized>(p: &Vec3, source: &S, stencil: Stencil) -> Result<Mat3, FieldError> {
    stencil.extrapolate(|h| {
        let mut jac = Mat3::zeros();
        for j in 0..3 {
            let e = axis(j) * h;
            let diff = (source.field(&(p + e))? - source.field(&(p - e))?) / (2.0 * h);
            jac.set_column(j, &diff);
        }
        Ok(jac)
    })
}

/// ∇|B| = Jᵀ·B/|B|. Falls back to differencing |B| directly where B vanishes.
pub fn magnitude_gradient<S: FieldSource + ?Sized>(p: &Vec3, source: &S, stencil: Stencil) -> Result<Vec3, FieldError> {
    let b = source.field(p)?;
    let norm = b.norm();
    if norm > 0.0 {
        let jac = field_jacobian(p, source, stencil)?;
        Ok(jac.transpose() * b / norm)
    } else {
        scalar_gradient(p, |q| source.field_magnitude(q), stencil)
    }
}

/// Hessian of |B| (T/m²), symmetric by construction.
pub fn field_magnitude_hessian<S: FieldSource + ?Sized>(
    p: &Vec3,
    source: &S,
    stencil: Stencil,
) -> Result<Mat3, FieldError> {
    scalar_hessian(p, |q| source.field_magnitude(q), stencil)
}

pub(crate) fn scalar_gradient<F>(p: &Vec3, f: F, stencil: Stencil) -> Result<Vec3, FieldError>
where
    F: Fn(&Vec3) -> Result<f64, FieldError>,
{
    stencil.extrapolate(|h| {
        let mut g = Vec3::zeros();
        for i in 0..3 {
            let e = axis(i) * h;
            g[i] = (f(&(p + e))? - f(&(p - e))?) / (2.0 * h);
        }
        Ok(g)
    })
}

pub(crate) fn scalar_hessian<F>(p: &Vec3, f: F, stencil: Stencil) -> Result<Mat3, FieldError>
where
    F: Fn(&Vec3) -> Result<f64, FieldError>,
{
    let centre = f(p)?;
    stencil.extrapolate(|h| {
        let mut hess = Mat3::zeros();
        for i in 0..3 {
            let ei = axis(i) * h;
            hess[(i, i)] = (f(&(p + ei))? - 2.0 * centre + f(&(p - ei))?) / (h * h);
            for j in 0..i {
                let ej = axis(j) * h;
                let mixed = (f(&(p + ei + ej))? - f(&(p + ei - ej))? - f(&(p - ei + ej))? + f(&(p - ei - ej))?)
                    / (4.0 * h * h);
                hess[(i, j)] = mixed;
                hess[(j, i)] = mixed;
            }
        }
        Ok(hess)
    })
}
