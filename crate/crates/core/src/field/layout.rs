use serde::Serialize;
use thiserror::Error;

use super::wire::{field_finite_segment, field_infinite_wire, CurrentElement, FiniteSegment, InfiniteWire};
use super::{FieldError, FieldSource, Vec3, DEFAULT_SINGULAR_EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("guide wire layers ({layers:e} m) do not sum to the outer radius ({outer:e} m)")]
    LayerMismatch { layers: f64, outer: f64 },
    #[error("guide wire dimension `{0}` must be positive")]
    NonPositive(&'static str),
    #[error("transverse wire {index} is not below the guide wire")]
    NotBelow { index: usize },
    #[error("transverse wire {index} intersects the guide wire (clearance {clearance:e} m)")]
    Intersects { index: usize, clearance: f64 },
    #[error("layouts differ in {0}; only currents and bias fields may be interpolated")]
    GeometryMismatch(&'static str),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// The clad guide wire running along z through the origin.
///
/// Radial build-up from the axis: copper core, aluminum layer, ceramic sheath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuideWire {
    pub current: f64,
    pub copper_radius: f64,
    pub aluminum_thickness: f64,
    pub ceramic_thickness: f64,
    pub outer_radius: f64,
}

impl GuideWire {
    /// 185 μm copper, 55 μm aluminum, 10 μm ceramic: 250 μm outer radius.
    pub fn clad(current: f64) -> Self {
        GuideWire {
            current,
            copper_radius: 185e-6,
            aluminum_thickness: 55e-6,
            ceramic_thickness: 10e-6,
            outer_radius: 250e-6,
        }
    }

    pub fn filament(&self) -> InfiniteWire {
        InfiniteWire::along_z(self.current)
    }

    /// Radius of the outer metal (aluminum) surface.
    pub fn conductor_radius(&self) -> f64 {
        self.outer_radius - self.ceramic_thickness
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        for (name, v) in [
            ("copper_radius", self.copper_radius),
            ("outer_radius", self.outer_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LayoutError::NonPositive(name));
            }
        }
        for (name, v) in [
            ("aluminum_thickness", self.aluminum_thickness),
            ("ceramic_thickness", self.ceramic_thickness),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LayoutError::NonPositive(name));
            }
        }
        if !self.current.is_finite() {
            return Err(FieldError::NonFinite { what: "guide current" }.into());
        }
        let layers = self.copper_radius + self.aluminum_thickness + self.ceramic_thickness;
        if (layers - self.outer_radius).abs() > 1e-12 * self.outer_radius {
            return Err(LayoutError::LayerMismatch { layers, outer: self.outer_radius });
        }
        Ok(())
    }
}

/// A finite wire of nonzero diameter under the guide wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransverseWire {
    pub segment: FiniteSegment,
    pub diameter: f64,
}

impl TransverseWire {
    /// Wire parallel to x, centred on x = 0 at axial position `z` and
    /// `depth` below the guide-wire axis. Positive current flows along +x.
    pub fn along_x(z: f64, depth: f64, length: f64, current: f64, diameter: f64) -> Result<Self, FieldError> {
        let half = 0.5 * length;
        let segment = FiniteSegment::new(Vec3::new(-half, -depth, z), Vec3::new(half, -depth, z), current)?;
        Ok(TransverseWire { segment, diameter })
    }
}

/// Everything that makes field on the chip: guide wire, transverse wires and
/// uniform bias fields along x and z.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChipLayout {
    pub guide: GuideWire,
    pub transverse: Vec<TransverseWire>,
    pub bias_x: f64,
    pub bias_z: f64,
    /// Filament exclusion radius (m).
    pub singular_eps: f64,
}

/// Axial positions and depth of the transverse wires in the bundled chip.
/// Fitted so that the compressed trap (6.9 A, 29 G, 11 G) has ~27 Hz axial
/// frequency with a positive bottom field; they are not measured values.
pub const TRANSVERSE_INNER_Z: f64 = 2.0e-3;
pub const TRANSVERSE_OUTER_Z: f64 = 6.0e-3;
pub const TRANSVERSE_DEPTH: f64 = 1.42e-3;
pub const TRANSVERSE_LENGTH: f64 = 20e-3;
pub const TRANSVERSE_DIAMETER: f64 = 800e-6;

impl ChipLayout {
    pub fn new(guide: GuideWire, transverse: Vec<TransverseWire>, bias_x: f64, bias_z: f64) -> Result<Self, LayoutError> {
        let layout = ChipLayout { guide, transverse, bias_x, bias_z, singular_eps: DEFAULT_SINGULAR_EPS };
        layout.validate()?;
        Ok(layout)
    }

    /// Guide wire plus bias fields only; the axial bias stands in for the
    /// bottom field of the transverse wires.
    pub fn side_guide(current: f64, bias_x: f64, bias_z: f64) -> Self {
        ChipLayout {
            guide: GuideWire::clad(current),
            transverse: Vec::new(),
            bias_x,
            bias_z,
            singular_eps: DEFAULT_SINGULAR_EPS,
        }
    }

    /// The full chip: inner transverse pair carries `transverse_current`
    /// along −x, outer pair along +x.
    pub fn full_chip(current: f64, bias_x: f64, bias_z: f64, transverse_current: f64) -> Self {
        let wire = |z: f64, i: f64| {
            TransverseWire::along_x(z, TRANSVERSE_DEPTH, TRANSVERSE_LENGTH, i, TRANSVERSE_DIAMETER)
                .expect("constant geometry is valid")
        };
        let transverse = vec![
            wire(-TRANSVERSE_OUTER_Z, transverse_current),
            wire(-TRANSVERSE_INNER_Z, -transverse_current),
            wire(TRANSVERSE_INNER_Z, -transverse_current),
            wire(TRANSVERSE_OUTER_Z, transverse_current),
        ];
        ChipLayout {
            guide: GuideWire::clad(current),
            transverse,
            bias_x,
            bias_z,
            singular_eps: DEFAULT_SINGULAR_EPS,
        }
    }

    /// Compressed trap: 6.9 A guide, Bx = 29 G, Bz = 11 G, 15 A transverse wires.
    pub fn compressed() -> Self {
        Self::full_chip(6.9, 29e-4, 11e-4, 15.0)
    }

    /// Initial magnetic trap: 8 A guide, Bx = 10 G, Bz = 6 G.
    pub fn loading() -> Self {
        Self::full_chip(8.0, 10e-4, 6e-4, 15.0)
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        self.guide.validate()?;
        if !(self.bias_x.is_finite() && self.bias_z.is_finite()) {
            return Err(FieldError::NonFinite { what: "bias field" }.into());
        }
        for (index, t) in self.transverse.iter().enumerate() {
            if !(t.diameter > 0.0 && t.diameter.is_finite()) {
                return Err(LayoutError::NonPositive("transverse diameter"));
            }
            let s = &t.segment;
            if !(s.start.y < 0.0 && s.end.y < 0.0) {
                return Err(LayoutError::NotBelow { index });
            }
            let clearance = segment_distance_to_z_axis(s) - self.guide.outer_radius - 0.5 * t.diameter;
            if clearance < 0.0 {
                return Err(LayoutError::Intersects { index, clearance });
            }
        }
        Ok(())
    }

    pub fn elements(&self) -> Vec<CurrentElement> {
        let mut out = Vec::with_capacity(self.transverse.len() + 2);
        out.push(CurrentElement::InfiniteStraightWire(self.guide.filament()));
        out.extend(self.transverse.iter().map(|t| CurrentElement::FiniteSegment(t.segment)));
        out.push(CurrentElement::UniformField { b: Vec3::new(self.bias_x, 0.0, self.bias_z) });
        out
    }

    /// All currents and bias fields multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> ChipLayout {
        let mut out = self.clone();
        out.guide.current *= alpha;
        for t in &mut out.transverse {
            t.segment.current *= alpha;
        }
        out.bias_x *= alpha;
        out.bias_z *= alpha;
        out
    }

    /// Linear interpolation of currents and biases; `t` = 0 gives `self`.
    pub fn lerp(&self, other: &ChipLayout, t: f64) -> Result<ChipLayout, LayoutError> {
        if self.transverse.len() != other.transverse.len() {
            return Err(LayoutError::GeometryMismatch("transverse wire count"));
        }
        let same_guide = GuideWire { current: other.guide.current, ..self.guide } == other.guide;
        if !same_guide {
            return Err(LayoutError::GeometryMismatch("guide wire dimensions"));
        }
        let mix = |a: f64, b: f64| a + (b - a) * t;
        let mut out = self.clone();
        out.guide.current = mix(self.guide.current, other.guide.current);
        for (mine, theirs) in out.transverse.iter_mut().zip(&other.transverse) {
            if mine.segment.start != theirs.segment.start
                || mine.segment.end != theirs.segment.end
                || mine.diameter != theirs.diameter
            {
                return Err(LayoutError::GeometryMismatch("transverse wire placement"));
            }
            mine.segment.current = mix(mine.segment.current, theirs.segment.current);
        }
        out.bias_x = mix(self.bias_x, other.bias_x);
        out.bias_z = mix(self.bias_z, other.bias_z);
        Ok(out)
    }

    /// Distance from `p` to the outer (ceramic) surface of the guide wire.
    pub fn height_above_surface(&self, p: &Vec3) -> f64 {
        self.guide.filament().distance(p) - self.guide.outer_radius
    }

    /// Distance from `p` to the aluminum surface under the ceramic sheath.
    pub fn height_above_conductor(&self, p: &Vec3) -> f64 {
        self.height_above_surface(p) + self.guide.ceramic_thickness
    }

    pub fn is_outside_conductors(&self, p: &Vec3) -> bool {
        self.height_above_surface(p) > 0.0
            && self
                .transverse
                .iter()
                .all(|t| t.segment.line_distance(p) > 0.5 * t.diameter)
    }
}

/// Vector sum of every source in the layout at `p`.
pub fn total_field(p: &Vec3, layout: &ChipLayout) -> Result<Vec3, FieldError> {
    let eps = layout.singular_eps;
    let mut b = field_infinite_wire(p, &layout.guide.filament(), eps)?;
    for t in &layout.transverse {
        b += field_finite_segment(p, &t.segment, eps)?;
    }
    b.x += layout.bias_x;
    b.z += layout.bias_z;
    Ok(b)
}

impl FieldSource for ChipLayout {
    fn field(&self, p: &Vec3) -> Result<Vec3, FieldError> {
        total_field(p, self)
    }
}

/// Minimum distance between a segment and the z axis.
fn segment_distance_to_z_axis(s: &FiniteSegment) -> f64 {
    // minimise |a_xy + t d_xy|² over t ∈ [0, 1]
    let a = nalgebra::Vector2::new(s.start.x, s.start.y);
    let d = nalgebra::Vector2::new(s.end.x - s.start.x, s.end.y - s.start.y);
    let dd = d.norm_squared();
    let t = if dd == 0.0 { 0.0 } else { (-a.dot(&d) / dd).clamp(0.0, 1.0) };
    (a + d * t).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_guide_layers_sum() {
        let g = GuideWire::clad(1.0);
        g.validate().unwrap();
        assert_relative_eq!(g.copper_radius + g.aluminum_thickness + g.ceramic_thickness, 250e-6);
        let bad = GuideWire { aluminum_thickness: 60e-6, ..g };
        assert!(matches!(bad.validate(), Err(LayoutError::LayerMismatch { .. })));
    }

    #[test]
    fn uniform_bias_only() {
        let layout = ChipLayout::side_guide(0.0, 10e-4, 0.0);
        for p in [Vec3::new(0.0, 1e-3, 0.0), Vec3::new(-2e-3, 5e-4, 7e-3)] {
            let b = total_field(&p, &layout).unwrap();
            assert_eq!(b, Vec3::new(10e-4, 0.0, 0.0));
        }
    }

    #[test]
    fn side_guide_cancels_at_trap_height() {
        let layout = ChipLayout::side_guide(6.9, 29e-4, 0.0);
        // root of μ0 I / (2π ρ) = Bx
        let rho = 2e-7 * 6.9 / 29e-4;
        let b = total_field(&Vec3::new(0.0, rho, 0.0), &layout).unwrap();
        assert!(b.norm() < 1e-15, "{b:?}");
        assert!((rho - 476e-6).abs() / 476e-6 < 1e-3);
    }

    #[test]
    fn full_chip_is_valid() {
        ChipLayout::compressed().validate().unwrap();
        ChipLayout::loading().validate().unwrap();
    }

    #[test]
    fn transverse_wire_checks() {
        let above = TransverseWire::along_x(0.0, -1e-3, 1e-2, 1.0, 8e-4).unwrap();
        let layout = ChipLayout { transverse: vec![above], ..ChipLayout::side_guide(1.0, 0.0, 0.0) };
        assert!(matches!(layout.validate(), Err(LayoutError::NotBelow { index: 0 })));

        let touching = TransverseWire::along_x(0.0, 500e-6, 1e-2, 1.0, 8e-4).unwrap();
        let layout = ChipLayout { transverse: vec![touching], ..ChipLayout::side_guide(1.0, 0.0, 0.0) };
        assert!(matches!(layout.validate(), Err(LayoutError::Intersects { .. })));
    }

    #[test]
    fn lerp_endpoints_and_mismatch() {
        let a = ChipLayout::compressed();
        let b = ChipLayout::full_chip(4.6, 29e-4, 11e-4, 15.0);
        assert_eq!(a.lerp(&b, 0.0).unwrap(), a);
        assert_eq!(a.lerp(&b, 1.0).unwrap(), b);
        let mid = a.lerp(&b, 0.5).unwrap();
        assert_relative_eq!(mid.guide.current, 5.75);
        let guide_only = ChipLayout::side_guide(4.6, 29e-4, 11e-4);
        assert!(a.lerp(&guide_only, 0.5).is_err());
    }

    #[test]
    fn heights() {
        let layout = ChipLayout::side_guide(1.0, 0.0, 0.0);
        let p = Vec3::new(0.0, 476e-6, 3e-3);
        assert_relative_eq!(layout.height_above_surface(&p), 226e-6, max_relative = 1e-12);
        assert_relative_eq!(layout.height_above_conductor(&p), 236e-6, max_relative = 1e-12);
        assert!(layout.is_outside_conductors(&p));
        assert!(!layout.is_outside_conductors(&Vec3::new(0.0, 100e-6, 0.0)));
    }
}
