//! Physical constants, unit handling and the trapped-atom description.
//!
//! Everything inside the library is SI. Lab units (gauss, micrometers,
//! kilohertz, ...) are accepted only where text enters the program, through
//! [`UnitValue`] and [`parse_quantity`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum permeability (T·m/A).
pub const MU0: f64 = 4.0 * PI * 1e-7;
/// Bohr magneton (J/T).
pub const MU_B: f64 = 9.2740e-24;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.3807e-23;
/// Planck constant (J·s).
pub const H_PLANCK: f64 = 6.6261e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = H_PLANCK / (2.0 * PI);
/// Mass of ⁸⁷Rb (kg).
pub const MASS_RB87: f64 = 1.4432e-25;
/// s-wave scattering length of ⁸⁷Rb (m).
pub const SCATTERING_LENGTH_RB87: f64 = 5.31e-9;
/// Standard gravity (m/s²).
pub const G_STANDARD: f64 = 9.80665;

/// The constant set used throughout the crate, bundled for callers that want
/// to pass it around or print it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    pub mu0: f64,
    pub mu_b: f64,
    pub k_b: f64,
    pub h_planck: f64,
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        mu0: MU0,
        mu_b: MU_B,
        k_b: K_B,
        h_planck: H_PLANCK,
        hbar: HBAR,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AtomError {
    #[error("|mF| = {m_f} exceeds F = {f}")]
    ProjectionOutOfRange { f: f64, m_f: f64 },
    #[error("gF·mF = {0} is not positive; state is not weak-field seeking")]
    NotTrappable(f64),
    #[error("flip amplitude factor {0} outside (0, 1]")]
    FlipAmplitude(f64),
    #[error("mass {0} kg must be positive and finite")]
    Mass(f64),
}

/// A trapped atomic state in the linear Zeeman regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    pub mass: f64,
    pub f: f64,
    pub m_f: f64,
    pub g_f: f64,
    /// Matrix element of the rate-limiting spin-flip transition relative to
    /// the spin-½ reference.
    pub flip_amplitude_factor: f64,
}

impl AtomSpecies {
    pub fn new(mass: f64, f: f64, m_f: f64, g_f: f64, flip_amplitude_factor: f64) -> Result<Self, AtomError> {
        let atom = AtomSpecies { mass, f, m_f, g_f, flip_amplitude_factor };
        atom.validate()?;
        Ok(atom)
    }

    /// ⁸⁷Rb in |F=2, mF=2⟩ with the 1/√5 amplitude factor for |2,2⟩→|2,1⟩.
    pub fn rb87_f2_m2() -> Self {
        AtomSpecies {
            mass: MASS_RB87,
            f: 2.0,
            m_f: 2.0,
            g_f: 0.5,
            flip_amplitude_factor: 1.0 / 5f64.sqrt(),
        }
    }

    pub fn validate(&self) -> Result<(), AtomError> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(AtomError::Mass(self.mass));
        }
        if self.m_f.abs() > self.f {
            return Err(AtomError::ProjectionOutOfRange { f: self.f, m_f: self.m_f });
        }
        let gm = self.g_f * self.m_f;
        if !(gm > 0.0) {
            return Err(AtomError::NotTrappable(gm));
        }
        let a = self.flip_amplitude_factor;
        if !(a > 0.0 && a <= 1.0) {
            return Err(AtomError::FlipAmplitude(a));
        }
        Ok(())
    }

    /// Magnetic moment gF·mF·μB (J/T) seen by a weak-field seeker.
    pub fn effective_moment(&self) -> f64 {
        self.g_f * self.m_f * MU_B
    }

    /// Transition moment of the rate-limiting flip (J/T).
    pub fn transition_moment(&self) -> f64 {
        self.flip_amplitude_factor * MU_B
    }
}

impl Default for AtomSpecies {
    fn default() -> Self {
        Self::rb87_f2_m2()
    }
}

/// Free-function form used by callers that do not hold an `AtomSpecies` method in scope.
pub fn effective_moment(atom: &AtomSpecies) -> f64 {
    atom.effective_moment()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    MagneticField,
    Length,
    Frequency,
    Time,
    Temperature,
    Current,
    Conductivity,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::MagneticField => "magnetic field",
            Dimension::Length => "length",
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Temperature => "temperature",
            Dimension::Current => "current",
            Dimension::Conductivity => "conductivity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Tesla,
    Gauss,
    Milligauss,
    Meter,
    Millimeter,
    Micrometer,
    Nanometer,
    Hertz,
    Kilohertz,
    Megahertz,
    Second,
    Millisecond,
    Kelvin,
    Millikelvin,
    Microkelvin,
    Nanokelvin,
    Ampere,
    Milliampere,
    SiemensPerMeter,
}

impl Unit {
    const ALL: [Unit; 19] = [
        Unit::Tesla,
        Unit::Gauss,
        Unit::Milligauss,
        Unit::Meter,
        Unit::Millimeter,
        Unit::Micrometer,
        Unit::Nanometer,
        Unit::Hertz,
        Unit::Kilohertz,
        Unit::Megahertz,
        Unit::Second,
        Unit::Millisecond,
        Unit::Kelvin,
        Unit::Millikelvin,
        Unit::Microkelvin,
        Unit::Nanokelvin,
        Unit::Ampere,
        Unit::Milliampere,
        Unit::SiemensPerMeter,
    ];

    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            Tesla | Gauss | Milligauss => Dimension::MagneticField,
            Meter | Millimeter | Micrometer | Nanometer => Dimension::Length,
            Hertz | Kilohertz | Megahertz => Dimension::Frequency,
            Second | Millisecond => Dimension::Time,
            Kelvin | Millikelvin | Microkelvin | Nanokelvin => Dimension::Temperature,
            Ampere | Milliampere => Dimension::Current,
            SiemensPerMeter => Dimension::Conductivity,
        }
    }

    /// Size of one unit in the SI base unit of its dimension.
    pub fn si_factor(self) -> f64 {
        use Unit::*;
        match self {
            Tesla | Meter | Hertz | Second | Kelvin | Ampere | SiemensPerMeter => 1.0,
            Gauss => 1e-4,
            Milligauss => 1e-7,
            Millimeter | Millisecond | Millikelvin | Milliampere => 1e-3,
            Micrometer | Microkelvin => 1e-6,
            Nanometer | Nanokelvin => 1e-9,
            Kilohertz => 1e3,
            Megahertz => 1e6,
        }
    }

    pub fn si_unit(dim: Dimension) -> Unit {
        match dim {
            Dimension::MagneticField => Unit::Tesla,
            Dimension::Length => Unit::Meter,
            Dimension::Frequency => Unit::Hertz,
            Dimension::Time => Unit::Second,
            Dimension::Temperature => Unit::Kelvin,
            Dimension::Current => Unit::Ampere,
            Dimension::Conductivity => Unit::SiemensPerMeter,
        }
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            Tesla => "T",
            Gauss => "G",
            Milligauss => "mG",
            Meter => "m",
            Millimeter => "mm",
            Micrometer => "um",
            Nanometer => "nm",
            Hertz => "Hz",
            Kilohertz => "kHz",
            Megahertz => "MHz",
            Second => "s",
            Millisecond => "ms",
            Kelvin => "K",
            Millikelvin => "mK",
            Microkelvin => "uK",
            Nanokelvin => "nK",
            Ampere => "A",
            Milliampere => "mA",
            SiemensPerMeter => "S/m",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Unit> {
        // accept the micro sign and Greek mu as aliases of 'u'
        let normalized = s.replacen(['µ', 'μ'], "u", 1);
        Unit::ALL.into_iter().find(|u| u.symbol() == normalized)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("cannot convert {from} ({from_dim}) to {to} ({to_dim})")]
    Incompatible {
        from: Unit,
        from_dim: Dimension,
        to: Unit,
        to_dim: Dimension,
    },
    #[error("quantity `{0}` is missing a unit suffix")]
    MissingUnit(String),
    #[error("unknown unit `{0}`")]
    UnknownUnit(String),
    #[error("invalid number in quantity `{0}`")]
    BadNumber(String),
    #[error("expected a {expected} quantity, got `{got}`")]
    WrongDimension { expected: Dimension, got: String },
}

/// A magnitude tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitValue {
    pub magnitude: f64,
    pub unit: Unit,
}

impl UnitValue {
    pub fn new(magnitude: f64, unit: Unit) -> Self {
        UnitValue { magnitude, unit }
    }

    pub fn convert(self, target: Unit) -> Result<UnitValue, UnitError> {
        convert(self, target)
    }

    /// Magnitude expressed in the SI base unit.
    pub fn to_si(self) -> f64 {
        self.magnitude * self.unit.si_factor()
    }

    pub fn dimension(self) -> Dimension {
        self.unit.dimension()
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.magnitude, self.unit)
    }
}

impl FromStr for UnitValue {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_quantity(s)
    }
}

pub fn convert(value: UnitValue, target: Unit) -> Result<UnitValue, UnitError> {
    let (from_dim, to_dim) = (value.unit.dimension(), target.dimension());
    if from_dim != to_dim {
        return Err(UnitError::Incompatible {
            from: value.unit,
            from_dim,
            to: target,
            to_dim,
        });
    }
    if value.unit == target {
        return Ok(value);
    }
    // Divide by the exact ratio when the target is the larger unit so that
    // e.g. 225 um -> m is 225 / 1e6 rather than 225 * 1e-6.
    let (fa, fb) = (value.unit.si_factor(), target.si_factor());
    let magnitude = if fa >= fb {
        value.magnitude * (fa / fb)
    } else {
        value.magnitude / (fb / fa)
    };
    Ok(UnitValue { magnitude, unit: target })
}

/// Parses `"<number> <unit>"`, e.g. `"6.9 A"`, `"-15 A"`, `"29 G"`, `"3.77e7 S/m"`.
/// Whitespace between the number and the unit is optional.
pub fn parse_quantity(text: &str) -> Result<UnitValue, UnitError> {
    let s = text.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            let is_numeric = c.is_ascii_digit() || matches!(c, '+' | '-' | '.');
            // an exponent marker belongs to the number only when followed by a sign or digit
            let is_exponent = (c == 'e' || c == 'E')
                && s[i + 1..]
                    .chars()
                    .next()
                    .is_some_and(|n| n.is_ascii_digit() || n == '+' || n == '-');
            !(is_numeric || is_exponent)
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (number, unit) = (s[..split].trim(), s[split..].trim());
    if unit.is_empty() {
        return Err(UnitError::MissingUnit(text.to_string()));
    }
    let magnitude: f64 = number.parse().map_err(|_| UnitError::BadNumber(text.to_string()))?;
    if !magnitude.is_finite() {
        return Err(UnitError::BadNumber(text.to_string()));
    }
    let unit = Unit::from_symbol(unit).ok_or_else(|| UnitError::UnknownUnit(unit.to_string()))?;
    Ok(UnitValue { magnitude, unit })
}

/// Parses a quantity and returns its SI magnitude, checking the dimension.
pub fn parse_si(text: &str, expected: Dimension) -> Result<f64, UnitError> {
    let q = parse_quantity(text)?;
    if q.dimension() != expected {
        return Err(UnitError::WrongDimension {
            expected,
            got: text.to_string(),
        });
    }
    Ok(q.to_si())
}
