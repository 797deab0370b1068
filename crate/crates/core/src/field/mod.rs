//! Static magnetic fields of filamentary wires and uniform bias fields.

mod derivatives;
mod layout;
mod wire;

pub use derivatives::{field_jacobian, field_magnitude_hessian, magnitude_gradient, Stencil, DEFAULT_STEP};
pub use layout::{
    total_field, ChipLayout, GuideWire, LayoutError, TransverseWire, TRANSVERSE_DEPTH, TRANSVERSE_DIAMETER,
    TRANSVERSE_INNER_Z, TRANSVERSE_LENGTH, TRANSVERSE_OUTER_Z,
};
pub use wire::{
    field_finite_segment, field_infinite_wire, CurrentElement, FiniteSegment, InfiniteWire,
    DEFAULT_SINGULAR_EPS,
};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Positions in meters, fields in tesla.
pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("point {point:?} lies within {distance:e} m of a current filament")]
    Singular { point: [f64; 3], distance: f64 },
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("stencil step {0:e} m must be positive and finite")]
    BadStep(f64),
}

/// Anything that produces a magnetic field at a point.
pub trait FieldSource {
    fn field(&self, p: &Vec3) -> Result<Vec3, FieldError>;

    fn field_magnitude(&self, p: &Vec3) -> Result<f64, FieldError> {
        self.field(p).map(|b| b.norm())
    }
}

impl<F> FieldSource for F
where
    F: Fn(&Vec3) -> Result<Vec3, FieldError>,
{
    fn field(&self, p: &Vec3) -> Result<Vec3, FieldError> {
        self(p)
    }
}

pub(crate) fn ensure_finite(v: &Vec3, what: &'static str) -> Result<(), FieldError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(FieldError::NonFinite { what })
    }
}
