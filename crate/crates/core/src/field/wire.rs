use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ensure_finite, FieldError, FieldSource, Vec3};
use crate::units::MU0;

/// Distance from a filament below which the field is treated as singular (m).
pub const DEFAULT_SINGULAR_EPS: f64 = 1e-9;

const MU0_OVER_2PI: f64 = MU0 / (2.0 * PI);
const MU0_OVER_4PI: f64 = MU0 / (4.0 * PI);

/// Infinitely long straight filament.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfiniteWire {
    pub axis_point: Vec3,
    /// Unit vector along the positive current direction.
    pub direction: Vec3,
    /// Current in amperes; negative flows against `direction`.
    pub current: f64,
}

impl InfiniteWire {
    /// Builds a wire, normalizing `direction`.
    pub fn new(axis_point: Vec3, direction: Vec3, current: f64) -> Result<Self, FieldError> {
        ensure_finite(&axis_point, "wire axis point")?;
        ensure_finite(&direction, "wire direction")?;
        if !current.is_finite() {
            return Err(FieldError::NonFinite { what: "wire current" });
        }
        let n = direction.norm();
        if n == 0.0 {
            return Err(FieldError::NonFinite { what: "wire direction (zero length)" });
        }
        Ok(InfiniteWire { axis_point, direction: direction / n, current })
    }

    /// Wire through the origin along +z.
    pub fn along_z(current: f64) -> Self {
        InfiniteWire { axis_point: Vec3::zeros(), direction: Vec3::z(), current }
    }

    /// Perpendicular offset from the axis to `p`.
    pub fn radial_vector(&self, p: &Vec3) -> Vec3 {
        let r = p - self.axis_point;
        r - self.direction * r.dot(&self.direction)
    }

    pub fn distance(&self, p: &Vec3) -> f64 {
        self.radial_vector(p).norm()
    }
}

/// Field of an infinite filament: |B| = μ0·I/(2πρ), azimuthal.
pub fn field_infinite_wire(p: &Vec3, wire: &InfiniteWire, eps: f64) -> Result<Vec3, FieldError> {
    let rho_vec = wire.radial_vector(p);
    let rho2 = rho_vec.norm_squared();
    if rho2.sqrt() < eps {
        return Err(FieldError::Singular { point: [p.x, p.y, p.z], distance: rho2.sqrt() });
    }
    // d × ρ̂ / ρ == d × ρ_vec / ρ²
    Ok(wire.direction.cross(&rho_vec) * (MU0_OVER_2PI * wire.current / rho2))
}

/// Straight filament between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteSegment {
    pub start: Vec3,
    pub end: Vec3,
    /// Current in amperes flowing from `start` to `end`.
    pub current: f64,
}

impl FiniteSegment {
    pub fn new(start: Vec3, end: Vec3, current: f64) -> Result<Self, FieldError> {
        ensure_finite(&start, "segment start")?;
        ensure_finite(&end, "segment end")?;
        if !current.is_finite() {
            return Err(FieldError::NonFinite { what: "segment current" });
        }
        if start == end {
            return Err(FieldError::NonFinite { what: "segment direction (start == end)" });
        }
        Ok(FiniteSegment { start, end, current })
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn direction(&self) -> Vec3 {
        (self.end - self.start).normalize()
    }

    /// Distance from `p` to the supporting line of the segment.
    pub fn line_distance(&self, p: &Vec3) -> f64 {
        let u = self.direction();
        let r = p - self.start;
        (r - u * r.dot(&u)).norm()
    }
}

/// Closed-form Biot–Savart field of a finite straight segment:
/// B = μ0·I/(4πρ)·(s₁/|r₁| − s₂/|r₂|) along u × ρ̂, where s₁, s₂ are the
/// axial coordinates of `p` relative to the two ends.
pub fn field_finite_segment(p: &Vec3, seg: &FiniteSegment, eps: f64) -> Result<Vec3, FieldError> {
    let u = seg.direction();
    let r1 = p - seg.start;
    let r2 = p - seg.end;
    let s1 = r1.dot(&u);
    let s2 = r2.dot(&u);
    let rho_vec = r1 - u * s1;
    let rho2 = rho_vec.norm_squared();
    let rho = rho2.sqrt();
    if rho < eps {
        return Err(FieldError::Singular { point: [p.x, p.y, p.z], distance: rho });
    }
    let geometric = s1 / r1.norm() - s2 / r2.norm();
    Ok(u.cross(&rho_vec) * (MU0_OVER_4PI * seg.current * geometric / rho2))
}

/// One field source on the chip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurrentElement {
    InfiniteStraightWire(InfiniteWire),
    FiniteSegment(FiniteSegment),
    UniformField { b: Vec3 },
}

impl CurrentElement {
    pub fn field_at(&self, p: &Vec3, eps: f64) -> Result<Vec3, FieldError> {
        match self {
            CurrentElement::InfiniteStraightWire(w) => field_infinite_wire(p, w, eps),
            CurrentElement::FiniteSegment(s) => field_finite_segment(p, s, eps),
            CurrentElement::UniformField { b } => Ok(*b),
        }
    }

    /// Same element with its current (or field) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> CurrentElement {
        match *self {
            CurrentElement::InfiniteStraightWire(w) => {
                CurrentElement::InfiniteStraightWire(InfiniteWire { current: w.current * factor, ..w })
            }
            CurrentElement::FiniteSegment(s) => {
                CurrentElement::FiniteSegment(FiniteSegment { current: s.current * factor, ..s })
            }
            CurrentElement::UniformField { b } => CurrentElement::UniformField { b: b * factor },
        }
    }
}

impl FieldSource for CurrentElement {
    fn field(&self, p: &Vec3) -> Result<Vec3, FieldError> {
        self.field_at(p, DEFAULT_SINGULAR_EPS)
    }
}
