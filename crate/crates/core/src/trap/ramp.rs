use serde::Serialize;

use super::{find_minimum, TrapCharacterization, TrapError, TrapOptions};
use crate::field::{ChipLayout, Vec3};
use crate::units::AtomSpecies;

/// Linear ramp of currents and bias fields between two layouts of the same
/// geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct RampSpec {
    pub start: ChipLayout,
    pub end: ChipLayout,
    /// Number of intervals; the trajectory has `steps + 1` points.
    pub steps: usize,
}

impl RampSpec {
    pub fn layout_at(&self, index: usize) -> Result<ChipLayout, TrapError> {
        let t = index as f64 / self.steps as f64;
        let layout = self.start.lerp(&self.end, t)?;
        layout.validate()?;
        Ok(layout)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampFailure {
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampOutcome {
    pub points: Vec<TrapCharacterization>,
    /// Set when the trap was lost; `points` then stops before `index`.
    pub failure: Option<RampFailure>,
}

impl RampOutcome {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Follows the minimum through the ramp, seeding each step with the previous
/// minimum.
pub fn ramp_trajectory(
    spec: &RampSpec,
    seed: Vec3,
    atom: &AtomSpecies,
    options: &TrapOptions,
) -> Result<RampOutcome, TrapError> {
    if spec.steps == 0 {
        return Err(TrapError::InvalidInput("a ramp needs at least one step".into()));
    }
    // both ends must be well formed before any work is done
    spec.start.validate()?;
    spec.start.lerp(&spec.end, 1.0)?;

    let mut points = Vec::with_capacity(spec.steps + 1);
    let mut seed = seed;
    for index in 0..=spec.steps {
        let step = spec.layout_at(index).and_then(|layout| find_minimum(&layout, seed, atom, options));
        match step {
            Ok(trap) => {
                seed = trap.position;
                points.push(trap);
            }
            Err(e) => {
                return Ok(RampOutcome {
                    points,
                    failure: Some(RampFailure { index, error: e.to_string() }),
                })
            }
        }
    }
    Ok(RampOutcome { points, failure: None })
}
