use serde::Serialize;
use serde_json::{json, Value};

use super::config::{optional, quantity, required};
use super::{format_number, Artifact, Command, Format, Provenance, RunOptions, ScenarioConfig, ScenarioError, Units};
use crate::field::{ChipLayout, FieldSource, Vec3};
use crate::fragmentation::{
    fragment_report, symmetric_grid, AnomalyHeightLaw, CorrugationModel, FragmentScenario, DEFAULT_PERIOD,
};
use crate::kinetics::{
    fit_exponential, lifetime_height_scan, linear_times, simulate_decay, DecayDataset, ScanOptions,
};
use crate::noise::{calibrate_quasistatic, CalibrationSettings, LifetimeModel, McBudget};
use crate::trap::{default_seed, find_minimum, ramp_trajectory, RampSpec, TrapCharacterization, TrapOptions};
use crate::units::{Dimension, K_B};

const DEFAULT_SEED: u64 = 1;

/// Runs `command` on a parsed config. `config_text` is hashed into the
/// provenance header.
pub fn run(
    command: Command,
    config: &ScenarioConfig,
    config_text: &str,
    options: &RunOptions,
) -> Result<Vec<Artifact>, ScenarioError> {
    let seed = options.seed.or(config.run.seed).unwrap_or(DEFAULT_SEED);
    let ctx = Context { config, options, provenance: Provenance::new(&command, config_text, seed), seed };
    match command {
        Command::FieldMap => ctx.field_map(),
        Command::Trap => ctx.trap(),
        Command::Ramp => ctx.ramp(),
        Command::LifetimeScan => ctx.lifetime_scan(),
        Command::Fragments => ctx.fragments(),
        Command::Decay { fit } => ctx.decay(fit),
        Command::Calibrate => ctx.calibrate(),
    }
}

/// Metres to micrometres, rounded to the picometre so that grid values
/// such as 50e-6 print as 50.
fn micrometres(x: f64) -> f64 {
    (x * 1e12).round() / 1e6
}

fn physics(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Physics(e.to_string())
}

/// Column-oriented table rendered as CSV with comment header or as JSON.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
    /// Extra `#` lines after the provenance block.
    notes: Vec<String>,
}

struct Context<'a> {
    config: &'a ScenarioConfig,
    options: &'a RunOptions,
    provenance: Provenance,
    seed: u64,
}

impl Context<'_> {
    fn lab(&self) -> bool {
        self.options.units == Units::Lab
    }

    /// (suffix, factor) for lengths, fields and energies-as-temperature.
    fn length_unit(&self) -> (&'static str, f64) {
        if self.lab() { ("um", 1e6) } else { ("m", 1.0) }
    }

    fn field_unit(&self) -> (&'static str, f64) {
        if self.lab() { ("G", 1e4) } else { ("T", 1.0) }
    }

    fn table(&self, stem: &str, table: Table) -> Artifact {
        match self.options.format {
            Format::Csv => {
                let mut out = self.provenance.comment_lines();
                for n in &table.notes {
                    out.push_str(&format!("# {n}\n"));
                }
                out.push_str(&table.columns.join(","));
                out.push('\n');
                for row in &table.rows {
                    let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                Artifact { name: format!("{stem}.csv"), contents: out }
            }
            Format::Json => {
                let rows: Vec<Value> = table
                    .rows
                    .iter()
                    .map(|r| Value::Object(table.columns.iter().cloned().zip(r.iter().map(|&v| json!(v))).collect()))
                    .collect();
                self.json(stem, json!({ "notes": table.notes, "columns": table.columns, "rows": rows }))
            }
        }
    }

    fn json(&self, stem: &str, result: Value) -> Artifact {
        let doc = json!({ "provenance": self.provenance, "result": result });
        let mut contents = serde_json::to_string_pretty(&doc).expect("json values serialize");
        contents.push('\n');
        Artifact { name: format!("{stem}.json"), contents }
    }

    fn trap_options(&self) -> TrapOptions {
        let gravity = self.config.trap.as_ref().and_then(|t| t.gravity).unwrap_or(false);
        TrapOptions { gravity, ..TrapOptions::default() }
    }

    fn trap_seed(&self, layout: &ChipLayout) -> Result<Vec3, ScenarioError> {
        let height = match &self.config.trap {
            Some(t) => optional("trap.seed_height", &t.seed_height, Dimension::Length)?,
            None => None,
        };
        Ok(height.map_or_else(|| default_seed(layout), |h| Vec3::new(0.0, h, 0.0)))
    }

    fn field_map(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let s = required(&self.config.field_map, "field_map")?;
        let layout = self.config.chip_layout()?;
        let x0 = quantity("field_map.x[0]", &s.x[0], Dimension::Length)?;
        let x1 = quantity("field_map.x[1]", &s.x[1], Dimension::Length)?;
        let y0 = quantity("field_map.y[0]", &s.y[0], Dimension::Length)?;
        let y1 = quantity("field_map.y[1]", &s.y[1], Dimension::Length)?;
        let z = optional("field_map.z", &s.z, Dimension::Length)?.unwrap_or(0.0);
        if s.nx < 1 || s.ny < 1 || s.nx.saturating_mul(s.ny) > 10_000_000 {
            return Err(ScenarioError::Config("field_map.nx and ny must be at least 1 (at most 10⁷ points)".into()));
        }
        let axis = |a: f64, b: f64, n: usize| -> Vec<f64> {
            if n == 1 { vec![a] } else { (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect() }
        };
        let (lu, lf) = self.length_unit();
        let (fu, ff) = self.field_unit();
        let mut rows = Vec::with_capacity(s.nx * s.ny);
        for &y in &axis(y0, y1, s.ny) {
            for &x in &axis(x0, x1, s.nx) {
                let p = Vec3::new(x, y, z);
                let b = layout.field(&p).unwrap_or_else(|_| Vec3::repeat(f64::NAN));
                let inside = if layout.is_outside_conductors(&p) { 0.0 } else { 1.0 };
                rows.push(vec![x * lf, y * lf, z * lf, b.x * ff, b.y * ff, b.z * ff, b.norm() * ff, inside]);
            }
        }
        let columns = ["x", "y", "z"]
            .iter()
            .map(|c| format!("{c}_{lu}"))
            .chain(["Bx", "By", "Bz", "B"].iter().map(|c| format!("{c}_{fu}")))
            .chain(["inside_conductor".to_string()])
            .collect();
        Ok(vec![self.table("field_map", Table { columns, rows, notes: vec![] })])
    }

    fn trap_value(&self, t: &TrapCharacterization) -> Value {
        let mut v = serde_json::to_value(t).expect("trap serializes");
        let units = if self.lab() {
            let (_, lf) = self.length_unit();
            let (_, ff) = self.field_unit();
            let scale = |v: &mut Value, key: &str, k: f64| {
                if let Some(x) = v.get_mut(key) {
                    let scaled = match &*x {
                        Value::Array(a) => Value::Array(a.iter().map(|e| json!(e.as_f64().unwrap_or(f64::NAN) * k)).collect()),
                        other => json!(other.as_f64().unwrap_or(f64::NAN) * k),
                    };
                    *x = scaled;
                }
            };
            scale(&mut v, "position", lf);
            scale(&mut v, "heightAboveSurface", lf);
            scale(&mut v, "heightAboveConductor", lf);
            scale(&mut v, "B0", ff);
            scale(&mut v, "depth", 1e6 / K_B);
            // T/m → G/cm is ×100; T/m² and G/cm² coincide
            scale(&mut v, "gradientNorm", 100.0);
            json!({ "length": "um", "field": "G", "frequency": "Hz", "curvature": "G/cm^2", "gradient": "G/cm", "depth": "uK" })
        } else {
            json!({ "length": "m", "field": "T", "frequency": "Hz", "curvature": "T/m^2", "gradient": "T/m", "depth": "J" })
        };
        json!({ "units": units, "trap": v })
    }

    fn trap(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let layout = self.config.chip_layout()?;
        let atom = self.config.atom_species()?;
        let t = find_minimum(&layout, self.trap_seed(&layout)?, &atom, &self.trap_options()).map_err(physics)?;
        Ok(vec![self.json("trap", self.trap_value(&t))])
    }

    fn ramp(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let s = required(&self.config.ramp, "ramp")?;
        if s.steps == 0 || s.steps > 100_000 {
            return Err(ScenarioError::Config("ramp.steps must be in 1..=100000".into()));
        }
        let start = self.config.chip_layout()?;
        let end = self.config.ramp_end_layout(&s.end)?;
        let atom = self.config.atom_species()?;
        let spec = RampSpec { start: start.clone(), end, steps: s.steps };
        let outcome = ramp_trajectory(&spec, self.trap_seed(&start)?, &atom, &self.trap_options()).map_err(physics)?;
        let (lu, lf) = self.length_unit();
        let (fu, ff) = self.field_unit();
        let rows = outcome
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let layout = spec.layout_at(i).expect("ramp layouts were validated while tracing");
                vec![
                    i as f64,
                    i as f64 / s.steps as f64,
                    layout.guide.current,
                    p.height_above_surface * lf,
                    p.b0 * ff,
                    p.f0,
                    p.axial_frequency(),
                    p.radial_frequency(),
                ]
            })
            .collect();
        let columns = vec![
            "step".into(),
            "fraction".into(),
            "guide_current_A".into(),
            format!("height_{lu}"),
            format!("B0_{fu}"),
            "f0_Hz".into(),
            "axial_Hz".into(),
            "radial_Hz".into(),
        ];
        let notes = outcome
            .failure
            .iter()
            .map(|f| format!("trap lost at step {}: {}", f.index, f.error))
            .collect();
        Ok(vec![self.table("ramp", Table { columns, rows, notes })])
    }

    fn lifetime_scan(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let s = required(&self.config.lifetime_scan, "lifetime_scan")?;
        let conductor = self.config.conductor()?;
        let atom = self.config.atom_species()?;
        let h0 = quantity("lifetime_scan.height_start", &s.height_start, Dimension::Length)?;
        let h1 = quantity("lifetime_scan.height_stop", &s.height_stop, Dimension::Length)?;
        if s.height_count < 1 || s.height_count > 1_000_000 {
            return Err(ScenarioError::Config("lifetime_scan.height_count must be in 1..=1000000".into()));
        }
        let heights: Vec<f64> = if s.height_count == 1 {
            vec![h0]
        } else {
            (0..s.height_count).map(|i| h0 + (h1 - h0) * i as f64 / (s.height_count - 1) as f64).collect()
        };
        let background = optional("lifetime_scan.background", &s.background, Dimension::Time)?.unwrap_or(f64::INFINITY);
        let defaults = ScanOptions::default();
        let scan_options = ScanOptions {
            model: LifetimeModel::default(),
            wire_radius: optional("lifetime_scan.wire_radius", &s.wire_radius, Dimension::Length)?
                .unwrap_or(defaults.wire_radius),
            anchor_height: optional("lifetime_scan.anchor_height", &s.anchor_height, Dimension::Length)?,
        };
        if s.f0.is_empty() {
            return Err(ScenarioError::Config("lifetime_scan.f0 needs at least one frequency".into()));
        }
        let mut out = Vec::new();
        for (i, f) in s.f0.iter().enumerate() {
            let f0 = quantity(&format!("lifetime_scan.f0[{i}]"), f, Dimension::Frequency)?;
            let table = lifetime_height_scan(&heights, f0, &conductor, &atom, background, &scan_options).map_err(physics)?;
            let stem = format!("lifetime_scan_{}kHz", format_number(f0 / 1e3));
            out.push(match self.options.format {
                Format::Csv => Artifact {
                    name: format!("{stem}.csv"),
                    contents: format!(
                        "{}# f0_Hz: {}\n# background_s: {}\n# anchor_height_um: {}\n{}",
                        self.provenance.comment_lines(),
                        format_number(f0),
                        format_number(background),
                        format_number(micrometres(table.anchor_height)),
                        table.to_csv()
                    ),
                },
                Format::Json => self.json(&stem, serde_json::to_value(&table).expect("scan serializes")),
            });
        }
        Ok(out)
    }

    fn fragments(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let s = required(&self.config.fragments, "fragments")?;
        let atom = self.config.atom_species()?;
        let temperature = quantity("fragments.temperature", &s.temperature, Dimension::Temperature)?;
        let b0 = quantity("fragments.b0", &s.b0, Dimension::MagneticField)?;
        let axial = quantity("fragments.axial_frequency", &s.axial_frequency, Dimension::Frequency)?;
        let wire_field = quantity("fragments.wire_field", &s.wire_field, Dimension::MagneticField)?;
        let period = optional("fragments.period", &s.period, Dimension::Length)?.unwrap_or(DEFAULT_PERIOD);
        let half_width = quantity("fragments.half_width", &s.half_width, Dimension::Length)?;
        if s.points < 3 || s.points > 10_000_000 {
            return Err(ScenarioError::Config("fragments.points must be in 3..=10000000".into()));
        }
        let base = FragmentScenario {
            z: symmetric_grid(half_width, s.points),
            model: CorrugationModel::Sinusoid {
                relative_amplitude: s.relative_amplitude,
                period,
                phase: s.phase.unwrap_or(0.0),
            },
            wire_field,
            b0,
            axial_frequency: axial,
            temperature,
        };
        let report = fragment_report(&base, &atom).map_err(physics)?;
        let rows = report
            .profile
            .z
            .iter()
            .zip(&report.profile.optical_thickness)
            .map(|(z, od)| vec![micrometres(*z), *od])
            .collect();
        let notes = vec![
            format!("contrast: {}", format_number(report.contrast)),
            format!("modulation_uK: {}", format_number(report.modulation_kelvin * 1e6)),
            format!("zero_crossing: {}", report.zero_crossing),
        ];
        let mut out = vec![self.table(
            "fragments",
            Table { columns: vec!["z_um".into(), "optical_thickness".into()], rows, notes },
        )];
        if let Some(heights) = &s.contrast_heights {
            let law = AnomalyHeightLaw { reference_amplitude: s.relative_amplitude * wire_field, period, ..Default::default() };
            let mut rows = Vec::with_capacity(heights.len());
            for (i, h) in heights.iter().enumerate() {
                let h = quantity(&format!("fragments.contrast_heights[{i}]"), h, Dimension::Length)?;
                let scenario = FragmentScenario { model: law.model_at(h, wire_field).map_err(physics)?, ..base.clone() };
                let r = fragment_report(&scenario, &atom).map_err(physics)?;
                rows.push(vec![micrometres(h), r.contrast, r.modulation_kelvin * 1e6]);
            }
            let notes = vec![format!(
                "anomaly amplitude {} G at {} um, decaying as exp(-2 pi dh / {} um)",
                format_number((law.reference_amplitude * 1e16).round() / 1e12),
                format_number(micrometres(law.reference_height)),
                format_number(micrometres(period))
            )];
            let columns = vec!["height_um".into(), "contrast".into(), "modulation_uK".into()];
            out.push(self.table("fragments_contrast", Table { columns, rows, notes }));
        }
        Ok(out)
    }

    fn decay(&self, fit: bool) -> Result<Vec<Artifact>, ScenarioError> {
        let mut out = Vec::new();
        let data = match &self.options.decay_input {
            Some(text) => DecayDataset::from_csv(text).map_err(|e| ScenarioError::Data(e.to_string()))?,
            None => {
                let s = required(&self.config.decay, "decay")?;
                let tau = quantity("decay.tau", &s.tau, Dimension::Time)?;
                let t_max = quantity("decay.t_max", &s.t_max, Dimension::Time)?;
                if s.points < 2 || s.points > 1_000_000 {
                    return Err(ScenarioError::Config("decay.points must be in 2..=1000000".into()));
                }
                let data = simulate_decay(s.n0, tau, &linear_times(t_max, s.points), self.seed).map_err(physics)?;
                out.push(Artifact {
                    name: "decay.csv".into(),
                    contents: format!(
                        "{}# tau_s: {}\n# n0: {}\n{}",
                        self.provenance.comment_lines(),
                        format_number(tau),
                        format_number(s.n0),
                        data.to_csv()
                    ),
                });
                data
            }
        };
        if fit || self.options.decay_input.is_some() {
            let result = fit_exponential(&data).map_err(physics)?;
            out.push(self.json("decay_fit", serde_json::to_value(result).expect("fit serializes")));
        }
        Ok(out)
    }

    fn calibrate(&self) -> Result<Vec<Artifact>, ScenarioError> {
        let conductor = self.config.conductor()?;
        let atom = self.config.atom_species()?;
        let defaults = CalibrationSettings::default();
        let heights = match &self.config.calibrate {
            Some(c) => c
                .heights
                .iter()
                .enumerate()
                .map(|(i, h)| quantity(&format!("calibrate.heights[{i}]"), h, Dimension::Length))
                .collect::<Result<Vec<_>, _>>()?,
            None => defaults.heights,
        };
        let budget = McBudget {
            samples: self.options.mc_budget.or(self.config.run.mc_budget).unwrap_or(defaults.budget.samples),
            tolerance: self.config.run.mc_tolerance.unwrap_or(defaults.budget.tolerance),
        };
        let settings = CalibrationSettings { heights, budget, seed: self.seed };
        let record = calibrate_quasistatic(&conductor, &atom, &settings).map_err(|e| match e {
            crate::noise::CalibrationError::Residual { .. } => ScenarioError::Calibration(e.to_string()),
            other => ScenarioError::Config(other.to_string()),
        })?;
        Ok(vec![match self.options.format {
            Format::Csv => Artifact {
                name: "calibration.toml".into(),
                contents: format!("{}{}", self.provenance.comment_lines(), record.to_toml()),
            },
            Format::Json => self.json("calibration", to_value(&record)),
        }])
    }
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("record serializes")
}
