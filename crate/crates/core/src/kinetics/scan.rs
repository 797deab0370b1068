use serde::Serialize;

use super::KineticsError;
use crate::noise::{flip_lifetime_slab, technical_noise_lifetime, Conductor, LifetimeModel, LossPrediction, TechnicalReference};
use crate::units::AtomSpecies;

pub const SCAN_HEADER: [&str; 4] = ["height_um", "tau_thermal_s", "tau_total_s", "tau_r2law_s"];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanOptions {
    pub model: LifetimeModel,
    /// Radius of the current-carrying conductor (m); the r² law uses the
    /// distance r = h + radius from the wire axis.
    pub wire_radius: f64,
    /// Height through which the r² companion is drawn; defaults to the first.
    pub anchor_height: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { model: LifetimeModel::default(), wire_radius: 240e-6, anchor_height: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanRow {
    pub height: f64,
    pub tau_thermal: f64,
    pub tau_total: f64,
    pub tau_r2law: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanTable {
    pub f0: f64,
    pub background: f64,
    pub anchor_height: f64,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SCAN_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                // rounded to picometres so that e.g. 30e-6 m prints as 30
                format!("{}", (r.height * 1e12).round() / 1e6),
                format!("{}", r.tau_thermal),
                format!("{}", r.tau_total),
                format!("{}", r.tau_r2law),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Slope of the straight line through two points in log-log coordinates.
pub fn loglog_slope(x1: f64, y1: f64, x2: f64, y2: f64) -> f64 {
    (y2 / y1).ln() / (x2 / x1).ln()
}

/// Lifetime against height for one spin-flip frequency: thermal slab channel,
/// its combination with a height-independent background, and an r² curve
/// through the total lifetime at the anchor height.
pub fn lifetime_height_scan(
    heights: &[f64],
    f0: f64,
    conductor: &Conductor,
    atom: &AtomSpecies,
    background: f64,
    options: &ScanOptions,
) -> Result<ScanTable, KineticsError> {
    if heights.is_empty() {
        return Err(KineticsError::InvalidInput("no heights to scan".into()));
    }
    if !(background > 0.0) {
        return Err(KineticsError::InvalidInput(format!("background lifetime {background} must be positive")));
    }
    if !(options.wire_radius >= 0.0 && options.wire_radius.is_finite()) {
        return Err(KineticsError::InvalidInput(format!("wire radius {} must be non-negative", options.wire_radius)));
    }
    let total = |h: f64| -> Result<LossPrediction, KineticsError> {
        let thermal = flip_lifetime_slab(h, f0, conductor, atom, &options.model)?;
        Ok(LossPrediction::new(thermal, None, background)?)
    };
    let anchor_height = options.anchor_height.unwrap_or(heights[0]);
    let reference = TechnicalReference {
        r_ref: anchor_height + options.wire_radius,
        tau_ref: total(anchor_height)?.tau_total,
    };
    let rows = heights
        .iter()
        .map(|&h| {
            let p = total(h)?;
            Ok(ScanRow {
                height: h,
                tau_thermal: p.tau_thermal,
                tau_total: p.tau_total,
                tau_r2law: technical_noise_lifetime(h + options.wire_radius, &reference)?,
            })
        })
        .collect::<Result<Vec<_>, KineticsError>>()?;
    Ok(ScanTable { f0, background, anchor_height, rows })
}
