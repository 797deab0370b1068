//! Scenario files: TOML with every physical quantity written as a string
//! carrying its unit, e.g. `guide_current = "6.9 A"`.

use serde::Deserialize;

use super::ScenarioError;
use crate::field::ChipLayout;
use crate::noise::{Conductor, Geometry};
use crate::units::{parse_si, AtomSpecies, Dimension};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub layout: LayoutSection,
    #[serde(default)]
    pub atom: AtomSection,
    pub conductor: Option<ConductorSection>,
    #[serde(default)]
    pub run: RunSection,
    pub field_map: Option<FieldMapSection>,
    pub trap: Option<TrapSection>,
    pub ramp: Option<RampSection>,
    pub lifetime_scan: Option<LifetimeScanSection>,
    pub fragments: Option<FragmentsSection>,
    pub decay: Option<DecaySection>,
    pub calibrate: Option<CalibrateSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    SideGuide,
    FullChip,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    pub kind: LayoutKind,
    pub guide_current: String,
    pub bias_x: String,
    pub bias_z: String,
    /// Required for `full-chip`.
    pub transverse_current: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    /// Only "rb87-f2-m2" is built in.
    pub species: Option<String>,
    pub flip_amplitude_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    HalfSpace,
    Slab,
    Film,
    Cylinder,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductorSection {
    pub geometry: GeometryKind,
    pub thickness: Option<String>,
    pub radius: Option<String>,
    pub axial_cutoff: Option<String>,
    pub conductivity: String,
    pub temperature: String,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub mc_budget: Option<usize>,
    /// Relative standard-error target of Monte Carlo integrals.
    pub mc_tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldMapSection {
    pub x: [String; 2],
    pub y: [String; 2],
    pub z: Option<String>,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    /// Starting height of the minimizer above the wire axis.
    pub seed_height: Option<String>,
    pub gravity: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampSection {
    pub steps: usize,
    pub end: RampEnd,
}

/// Values at the end of the ramp; omitted entries keep their start value.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RampEnd {
    pub guide_current: Option<String>,
    pub bias_x: Option<String>,
    pub bias_z: Option<String>,
    pub transverse_current: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifetimeScanSection {
    pub height_start: String,
    pub height_stop: String,
    pub height_count: usize,
    pub f0: Vec<String>,
    pub background: Option<String>,
    pub wire_radius: Option<String>,
    pub anchor_height: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentsSection {
    pub temperature: String,
    pub b0: String,
    pub axial_frequency: String,
    pub wire_field: String,
    pub relative_amplitude: f64,
    pub period: Option<String>,
    pub phase: Option<f64>,
    pub half_width: String,
    pub points: usize,
    /// Heights for a contrast-versus-height table using the anomaly decay law.
    pub contrast_heights: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub n0: f64,
    pub tau: String,
    pub t_max: String,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub heights: Vec<String>,
}

/// Parses `value` found under `key` as a quantity of dimension `dim` in SI.
pub(crate) fn quantity(key: &str, value: &str, dim: Dimension) -> Result<f64, ScenarioError> {
    parse_si(value, dim).map_err(|e| ScenarioError::Config(format!("{key}: {e}")))
}

pub(crate) fn optional(key: &str, value: &Option<String>, dim: Dimension) -> Result<Option<f64>, ScenarioError> {
    value.as_deref().map(|v| quantity(key, v, dim)).transpose()
}

pub(crate) fn required<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, ScenarioError> {
    section.as_ref().ok_or_else(|| ScenarioError::Config(format!("missing [{name}] section")))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| ScenarioError::Config(e.message().to_string()))?;
        // resolve the always-present sections eagerly so that unit mistakes
        // surface before any subcommand runs
        config.chip_layout()?;
        config.atom_species()?;
        if config.conductor.is_some() {
            config.conductor()?;
        }
        Ok(config)
    }

    fn layout_from(
        &self,
        guide_current: f64,
        bias_x: f64,
        bias_z: f64,
        transverse_current: Option<f64>,
    ) -> Result<ChipLayout, ScenarioError> {
        let layout = match self.layout.kind {
            LayoutKind::SideGuide => {
                if transverse_current.is_some() {
                    return Err(ScenarioError::Config("layout.transverse_current is only valid for full-chip".into()));
                }
                ChipLayout::side_guide(guide_current, bias_x, bias_z)
            }
            LayoutKind::FullChip => {
                let it = transverse_current
                    .ok_or_else(|| ScenarioError::Config("layout.transverse_current is required for full-chip".into()))?;
                ChipLayout::full_chip(guide_current, bias_x, bias_z, it)
            }
        };
        layout.validate().map_err(|e| ScenarioError::Physics(e.to_string()))?;
        Ok(layout)
    }

    pub fn chip_layout(&self) -> Result<ChipLayout, ScenarioError> {
        let l = &self.layout;
        self.layout_from(
            quantity("layout.guide_current", &l.guide_current, Dimension::Current)?,
            quantity("layout.bias_x", &l.bias_x, Dimension::MagneticField)?,
            quantity("layout.bias_z", &l.bias_z, Dimension::MagneticField)?,
            optional("layout.transverse_current", &l.transverse_current, Dimension::Current)?,
        )
    }

    pub fn ramp_end_layout(&self, end: &RampEnd) -> Result<ChipLayout, ScenarioError> {
        let l = &self.layout;
        let pick = |key: &str, over: &Option<String>, base: &str, dim| match over {
            Some(v) => quantity(key, v, dim),
            None => quantity(key, base, dim),
        };
        let transverse = match (&end.transverse_current, &l.transverse_current) {
            (Some(v), _) => Some(quantity("ramp.end.transverse_current", v, Dimension::Current)?),
            (None, base) => optional("layout.transverse_current", base, Dimension::Current)?,
        };
        self.layout_from(
            pick("ramp.end.guide_current", &end.guide_current, &l.guide_current, Dimension::Current)?,
            pick("ramp.end.bias_x", &end.bias_x, &l.bias_x, Dimension::MagneticField)?,
            pick("ramp.end.bias_z", &end.bias_z, &l.bias_z, Dimension::MagneticField)?,
            transverse,
        )
    }

    pub fn atom_species(&self) -> Result<AtomSpecies, ScenarioError> {
        match self.atom.species.as_deref() {
            None | Some("rb87-f2-m2") => {}
            Some(other) => return Err(ScenarioError::Config(format!("atom.species: unknown species {other:?}"))),
        }
        let mut atom = AtomSpecies::rb87_f2_m2();
        if let Some(a) = self.atom.flip_amplitude_factor {
            atom.flip_amplitude_factor = a;
        }
        atom.validate().map_err(|e| ScenarioError::Config(format!("atom: {e}")))?;
        Ok(atom)
    }

    pub fn conductor(&self) -> Result<Conductor, ScenarioError> {
        let c = required(&self.conductor, "conductor")?;
        let need = |key: &str, v: &Option<String>| {
            optional(key, v, Dimension::Length)?
                .ok_or_else(|| ScenarioError::Config(format!("{key} is required for this geometry")))
        };
        let geometry = match c.geometry {
            GeometryKind::HalfSpace => Geometry::HalfSpace,
            GeometryKind::Slab => Geometry::Slab { thickness: need("conductor.thickness", &c.thickness)? },
            GeometryKind::Film => Geometry::Film { thickness: need("conductor.thickness", &c.thickness)? },
            GeometryKind::Cylinder => Geometry::Cylinder {
                radius: need("conductor.radius", &c.radius)?,
                axial_cutoff: optional("conductor.axial_cutoff", &c.axial_cutoff, Dimension::Length)?,
            },
        };
        Conductor::new(
            geometry,
            quantity("conductor.conductivity", &c.conductivity, Dimension::Conductivity)?,
            quantity("conductor.temperature", &c.temperature, Dimension::Temperature)?,
        )
        .map_err(|e| ScenarioError::Config(format!("conductor: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[layout]
kind = "side-guide"
guide_current = "6.9 A"
bias_x = "29 G"
bias_z = "0.8 G"
"#;

    #[test]
    fn parses_minimal() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        let l = c.chip_layout().unwrap();
        assert_eq!(l.guide.current, 6.9);
        assert!((l.bias_x - 29e-4).abs() < 1e-15);
        assert!(c.conductor().is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("{MINIMAL}colour = \"red\"\n");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(ScenarioError::Config(_))));
        let text = MINIMAL.replace("[layout]", "[layout]\nextra = 1");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn rejects_missing_or_wrong_units() {
        let bare = MINIMAL.replace("\"6.9 A\"", "\"6.9\"");
        let err = ScenarioConfig::from_toml(&bare).unwrap_err();
        assert!(err.to_string().contains("layout.guide_current"), "{err}");
        let wrong = MINIMAL.replace("\"29 G\"", "\"29 A\"");
        assert!(ScenarioConfig::from_toml(&wrong).is_err());
    }

    #[test]
    fn full_chip_needs_transverse_current() {
        let text = MINIMAL.replace("side-guide", "full-chip");
        assert!(ScenarioConfig::from_toml(&text).is_err());
        let ok = format!("{}transverse_current = \"15 A\"\n", text);
        assert_eq!(ScenarioConfig::from_toml(&ok).unwrap().chip_layout().unwrap().transverse.len(), 4);
    }

    #[test]
    fn conductor_geometries() {
        let text = format!(
            "{MINIMAL}[conductor]\ngeometry = \"cylinder\"\nradius = \"250 um\"\nconductivity = \"3.77e7 S/m\"\ntemperature = \"300 K\"\n"
        );
        let c = ScenarioConfig::from_toml(&text).unwrap().conductor().unwrap();
        assert_eq!(c.geometry, Geometry::Cylinder { radius: 250e-6, axial_cutoff: None });
        let slab = text.replace("cylinder", "slab");
        assert!(ScenarioConfig::from_toml(&slab).is_err());
    }
}
