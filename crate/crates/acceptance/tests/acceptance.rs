//! Thirteen end-to-end acceptance checks. Each prints one PASS/FAIL line;
//! the process exits non-zero if any check fails.

use std::path::Path;
use std::time::Instant;

use atomchip::field::{ChipLayout, Vec3};
use atomchip::fragmentation::{
    corrugated_potential, corrugation_field, fragment_report, symmetric_grid, AnomalyHeightLaw, CorrugationModel,
    FragmentScenario, CONTRAST_REGION, DEFAULT_PERIOD,
};
use atomchip::kinetics::{
    extract_f0, fit_exponential, lifetime_height_scan, linear_times, loglog_slope, simulate_decay, DecayDataset,
    DecayMetadata, DecaySample, RfSpectroscopySeries, ScanOptions,
};
use atomchip::noise::{
    calibrate_quasistatic, film_suppression_for_skin_depth, flip_lifetime_slab, quasistatic_noise_tensor, skin_depth,
    CalibrationSettings, Conductor, Geometry, LifetimeModel, McBudget, NoiseSpectrum, MAX_RESIDUAL, SIGMA_ALUMINUM,
};
use atomchip::scenario::{run_text, Artifact, Command, Format, RunOptions};
use atomchip::trap::{
    bottom_field_for_frequency, default_seed, find_minimum, side_guide_radial_frequency, spin_flip_frequency,
    TrapOptions,
};
use atomchip::units::{AtomSpecies, K_B};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn atom() -> AtomSpecies {
    AtomSpecies::rb87_f2_m2()
}

fn aluminum() -> Conductor {
    Conductor::aluminum(Geometry::HalfSpace)
}

fn c01_trap_height() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, layout) in [
        ("side guide", ChipLayout::side_guide(6.9, 29e-4, 0.8e-4)),
        ("full chip", ChipLayout::compressed()),
    ] {
        let trap = find_minimum(&layout, default_seed(&layout), &atom(), &TrapOptions::default())
            .map_err(|e| format!("{name}: {e}"))?;
        let h = trap.height_above_surface;
        ok &= rel(h, 225e-6) <= 0.02;
        detail.push(format!("{name} {:.1} um", h * 1e6));
    }
    check(ok, format!("{} (target 225 um +- 2%)", detail.join(", ")))
}

fn c02_skin_depths() -> Outcome {
    let d1 = skin_depth(560e3, SIGMA_ALUMINUM).map_err(|e| e.to_string())?;
    let d2 = skin_depth(1.8e6, SIGMA_ALUMINUM).map_err(|e| e.to_string())?;
    check(
        rel(d1, 110e-6) <= 0.05 && rel(d2, 61e-6) <= 0.05,
        format!("delta(560 kHz) = {:.1} um, delta(1.8 MHz) = {:.1} um", d1 * 1e6, d2 * 1e6),
    )
}

fn c03_spin_flip_frequency() -> Outcome {
    let f0 = spin_flip_frequency(2.6e-4, &atom()).map_err(|e| e.to_string())?;
    let b0 = bottom_field_for_frequency(1.8e6, &atom()).map_err(|e| e.to_string())?;
    check(
        rel(f0, 1.8e6) <= 0.02 && rel(b0, 2.6e-4) <= 0.02,
        format!("2.6 G -> {:.4} MHz; 1.8 MHz -> {:.4} G", f0 / 1e6, b0 * 1e4),
    )
}

fn c04_radial_frequencies() -> Outcome {
    // distance from the wire axis: height above the aluminum plus its radius
    let r = |h: f64| h + 240e-6;
    let b0 = bottom_field_for_frequency(560e3, &atom()).map_err(|e| e.to_string())?;
    let f = |h: f64| side_guide_radial_frequency(29e-4, r(h), b0, &atom());
    let range = f(30e-6) / f(80e-6);
    let b0_hi = bottom_field_for_frequency(1.8e6, &atom()).map_err(|e| e.to_string())?;
    let series = (b0_hi / b0).sqrt();
    check(
        rel(range, 865.0 / 735.0) <= 0.01 && rel(series, 1560.0 / 865.0) <= 0.02,
        format!(
            "range ratio {range:.4} vs {:.4}; series ratio {series:.4} vs {:.4}",
            865.0 / 735.0,
            1560.0 / 865.0
        ),
    )
}

fn c05_lifetime_law() -> Outcome {
    let conductor = aluminum();
    let model = LifetimeModel::default();
    let tau = |h: f64, f0: f64| flip_lifetime_slab(h, f0, &conductor, &atom(), &model).map_err(|e| e.to_string());
    let mut worst: f64 = 0.0;
    for f0 in [560e3, 1.8e6] {
        let d = skin_depth(f0, SIGMA_ALUMINUM).map_err(|e| e.to_string())?;
        let k = |h: f64| tau(h, f0).map(|t| t * d / (f0 * h * (2.0 * h.powi(3) + 3.0 * d.powi(3))));
        let k0 = k(1e-6)?;
        for i in 0..=60 {
            let h = 1e-6 * 10f64.powf(3.0 * i as f64 / 60.0);
            worst = worst.max(rel(k(h)?, k0));
        }
    }
    let d = skin_depth(560e3, SIGMA_ALUMINUM).map_err(|e| e.to_string())?;
    let near = loglog_slope(d / 1000.0, tau(d / 1000.0, 560e3)?, d / 100.0, tau(d / 100.0, 560e3)?);
    let far = loglog_slope(100.0 * d, tau(100.0 * d, 560e3)?, 1000.0 * d, tau(1000.0 * d, 560e3)?);
    let far_ratio = tau(100.0 * d, 1.8e6)? / tau(100.0 * d, 560e3)?;
    let d_hi = skin_depth(1.8e6, SIGMA_ALUMINUM).map_err(|e| e.to_string())?;
    let near_ratio = tau(d_hi / 100.0, 1.8e6)? / tau(d_hi / 100.0, 560e3)?;
    check(
        worst <= 1e-10
            && (near - 1.0).abs() <= 0.01
            && (far - 4.0).abs() <= 0.01
            && rel(far_ratio, 5.8) <= 0.05
            && (near_ratio - 1.0).abs() <= 0.02,
        format!(
            "identity spread {worst:.1e}; slopes {near:.4} / {far:.4}; far ratio {far_ratio:.3} (measured ~5); near ratio {near_ratio:.4}"
        ),
    )
}

fn calibrated_model() -> Result<(LifetimeModel, f64), String> {
    let record = calibrate_quasistatic(&aluminum(), &atom(), &CalibrationSettings::default()).map_err(|e| e.to_string())?;
    Ok((LifetimeModel { c_norm: record.c_norm }, record.residual))
}

fn c06_absolute_band() -> Outcome {
    let (model, _) = calibrated_model()?;
    let tau = flip_lifetime_slab(29e-6, 1.8e6, &aluminum(), &atom(), &model).map_err(|e| e.to_string())?;
    check((1.0..=5.1).contains(&tau), format!("tau(29 um, 1.8 MHz) = {tau:.3} s, band [1.0, 5.1] s"))
}

fn tensor(h: f64, geometry: Geometry, samples: usize) -> Result<NoiseSpectrum, String> {
    let conductor = Conductor::aluminum(geometry);
    quasistatic_noise_tensor(h, &conductor, &McBudget { samples, tolerance: 1e-3 }, 7).map_err(|e| e.to_string())
}

fn c07_oracles() -> Outcome {
    let samples = 2_000_000;
    let a = tensor(10e-6, Geometry::HalfSpace, samples)?;
    let b = tensor(20e-6, Geometry::HalfSpace, samples)?;
    let ratio = a.trace() / b.trace();
    let ratio_err = ratio * (se_trace(&a).powi(2) + se_trace(&b).powi(2)).sqrt();
    let scaling_ok = (ratio - 2.0).abs() <= (3.0 * ratio_err).max(1e-12) && (ratio - 2.0).abs() / 2.0 <= 0.02;

    let h = 1e-6;
    let half = tensor(h, Geometry::HalfSpace, samples)?;
    let slab = tensor(h, Geometry::Slab { thickness: 1e4 * h }, samples)?;
    let slab_gap = (slab.trace() - half.trace()).abs();
    let slab_ok = slab_gap <= 3.0 * se_trace_abs(&half);

    let z = Vec3::z();
    let h_cyl = 30e-6;
    let flat = tensor(h_cyl, Geometry::HalfSpace, samples)?.perpendicular_sum(&z);
    let cyl = tensor(h_cyl, Geometry::Cylinder { radius: 250e-6, axial_cutoff: None }, samples)?.perpendicular_sum(&z);

    let (_, residual) = calibrated_model()?;
    check(
        scaling_ok && slab_ok && cyl < flat && residual <= MAX_RESIDUAL,
        format!(
            "S(h)/S(2h) = {ratio:.4} +- {ratio_err:.4}; slab-halfspace gap {:.1e} rel; cylinder/halfspace {:.4}; calibration residual {residual:.1e}",
            slab_gap / half.trace(),
            cyl / flat
        ),
    )
}

fn se_trace_abs(s: &NoiseSpectrum) -> f64 {
    (0..3).map(|i| s.std_errors[i][i].powi(2)).sum::<f64>().sqrt()
}

fn se_trace(s: &NoiseSpectrum) -> f64 {
    se_trace_abs(s) / s.trace()
}

fn scan_heights() -> Vec<f64> {
    (0..=10).map(|i| (30.0 + 5.0 * i as f64) * 1e-6).collect()
}

fn c08_technical_noise() -> Outcome {
    let options = ScanOptions::default();
    let mut detail = Vec::new();
    let mut ok = true;
    for f0 in [560e3, 1.8e6] {
        let t = lifetime_height_scan(&scan_heights(), f0, &aluminum(), &atom(), 100.0, &options).map_err(|e| e.to_string())?;
        let (a, b) = (t.rows[0], t.rows[t.rows.len() - 1]);
        let r = |h: f64| h + options.wire_radius;
        let thermal = loglog_slope(r(a.height), a.tau_thermal, r(b.height), b.tau_thermal);
        let r2 = loglog_slope(r(a.height), a.tau_r2law, r(b.height), b.tau_r2law);
        ok &= thermal > 3.0 && (r2 - 2.0).abs() <= 1e-9;
        detail.push(format!("{:.0} kHz thermal {thermal:.2} vs r^2 {r2:.6}", f0 / 1e3));
    }
    check(ok, format!("{} (log-log in distance from wire axis)", detail.join("; ")))
}

fn c09_thin_film() -> Outcome {
    // The band [20, 33] is δ/t for δ = 100 um and t = 5..3 um, quoted to
    // two significant figures.
    let values: Vec<f64> = [3e-6, 4e-6, 5e-6]
        .iter()
        .map(|&t| film_suppression_for_skin_depth(t, 100e-6).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let in_band = values.iter().all(|v| (20.0..=33.0).contains(&v.round()));
    let (lo, hi) = (values[2], values[0]);
    let at_110: Vec<String> = [3e-6, 5e-6]
        .iter()
        .map(|&t| film_suppression_for_skin_depth(t, 110e-6).map(|v| format!("{v:.1}")).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    check(
        in_band && lo <= 20.0 && hi >= 30.0,
        format!("delta 100 um: {lo:.1}..{hi:.1}; delta 110 um: {}..{}", at_110[1], at_110[0]),
    )
}

fn c10_fragmentation() -> Outcome {
    let wire_field = 33e-4;
    let z = symmetric_grid(1.5e-3, 3001);
    let model = CorrugationModel::Sinusoid { relative_amplitude: 1e-6 / wire_field, period: DEFAULT_PERIOD, phase: 0.0 };
    let field = corrugation_field(&z, &model, wire_field).map_err(|e| e.to_string())?;
    let pot = corrugated_potential(&z, 0.8e-4, 26.0, &field, &atom()).map_err(|e| e.to_string())?;
    let modulation = pot.modulation_peak_to_peak() / K_B;

    let beta_field = corrugation_field(&z, &CorrugationModel::sinusoid(3e-4), wire_field).map_err(|e| e.to_string())?;
    let amplitude = beta_field.iter().fold(0.0f64, |m, b| m.max(b.abs()));

    let scenario = FragmentScenario { z, model, wire_field, b0: 0.8e-4, axial_frequency: 26.0, temperature: 2e-6 };
    let report = fragment_report(&scenario, &atom()).map_err(|e| e.to_string())?;
    let oracle = (report.modulation_kelvin / (2.0 * scenario.temperature)).tanh();

    let law = AnomalyHeightLaw::default();
    let mut contrasts = Vec::new();
    for h in [27e-6, 50e-6, 75e-6, 100e-6, 150e-6, 200e-6] {
        let s = FragmentScenario { model: law.model_at(h, wire_field).map_err(|e| e.to_string())?, ..scenario.clone() };
        contrasts.push((h, fragment_report(&s, &atom()).map_err(|e| e.to_string())?.contrast));
    }
    let decreasing = contrasts.windows(2).all(|w| w[1].1 < w[0].1);
    let far_flat = contrasts.iter().filter(|(h, _)| *h >= 100e-6).all(|(_, c)| *c < CONTRAST_REGION);
    check(
        rel(modulation, 1.34e-6) <= 0.01
            && rel(amplitude, 1e-6) <= 0.05
            && rel(report.contrast, oracle) <= 0.10
            && decreasing
            && far_flat,
        format!(
            "modulation {:.4} uK; 3e-4 x 33 G = {:.2} mG; contrast {:.4} vs oracle {oracle:.4}; contrast at 100/200 um {:.3}/{:.3}",
            modulation * 1e6,
            amplitude * 1e7,
            report.contrast,
            contrasts[3].1,
            contrasts[5].1
        ),
    )
}

fn c11_kinetics() -> Outcome {
    let times = linear_times(15.0, 16);
    let clean = DecayDataset::new(
        times.iter().map(|&t| DecaySample { t, n: 1000.0 * (-t / 5.1).exp(), sigma_n: None }).collect(),
        DecayMetadata::default(),
    )
    .map_err(|e| e.to_string())?;
    let exact = fit_exponential(&clean).map_err(|e| e.to_string())?;

    let runs = 400;
    let mut covered = 0;
    for seed in 0..runs {
        let data = simulate_decay(1000.0, 5.1, &times, seed).map_err(|e| e.to_string())?;
        let fit = fit_exponential(&data).map_err(|e| e.to_string())?;
        if (fit.tau - 5.1).abs() <= fit.tau_sigma {
            covered += 1;
        }
    }
    let coverage = covered as f64 / runs as f64;

    let f0 = 1.8e6;
    let line = |f: f64| 2e-15 * (f - f0);
    let freqs: Vec<f64> = (0..8).map(|i| 1.9e6 + 0.1e6 * i as f64).collect();
    let constructed = extract_f0(&RfSpectroscopySeries { points: freqs.iter().map(|&f| (f, line(f))).collect() })
        .map_err(|e| e.to_string())?;
    let mut worst_pull: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 2e-11).expect("valid normal");
        let points = freqs.iter().map(|&f| (f, line(f) + noise.sample(&mut rng))).collect();
        let est = extract_f0(&RfSpectroscopySeries { points }).map_err(|e| e.to_string())?;
        worst_pull = worst_pull.max((est.f0 - f0).abs() / est.sigma);
    }
    check(
        rel(exact.tau, 5.1) <= 1e-6 && coverage >= 0.6 && rel(constructed.f0, f0) <= 1e-9 && worst_pull <= 3.0,
        format!(
            "noiseless tau rel err {:.1e}; 1-sigma coverage {:.1}% over {runs}; f0 exact err {:.1e}; worst noisy pull {worst_pull:.2} sigma",
            rel(exact.tau, 5.1),
            100.0 * coverage,
            rel(constructed.f0, f0)
        ),
    )
}

fn c12_order_of_magnitude() -> Outcome {
    let t = lifetime_height_scan(&scan_heights(), 560e3, &aluminum(), &atom(), 100.0, &ScanOptions::default())
        .map_err(|e| e.to_string())?;
    let (near, far) = (t.rows[0].tau_total, t.rows[t.rows.len() - 1].tau_total);
    check(
        far / near >= 10.0,
        format!("tau_total(80 um) / tau_total(30 um) = {:.3} / {:.3} s = {:.2}x (need >= 10x)", far, near, far / near),
    )
}

fn all_artifacts(config: &str) -> Result<Vec<Artifact>, String> {
    let options = RunOptions::default();
    let json = RunOptions { format: Format::Json, ..RunOptions::default() };
    let mut out = Vec::new();
    for (command, opts) in [
        (Command::FieldMap, &options),
        (Command::Trap, &json),
        (Command::Ramp, &options),
        (Command::LifetimeScan, &options),
        (Command::Fragments, &options),
        (Command::Decay { fit: true }, &options),
        (Command::Calibrate, &options),
    ] {
        out.extend(run_text(command, config, opts).map_err(|e| format!("{}: {e}", command.name()))?);
    }
    Ok(out)
}

fn c13_determinism() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/paper.cfg");
    let config = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let in_pool = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
        pool.install(|| all_artifacts(&config))
    };
    let single = in_pool(1)?;
    let again = in_pool(1)?;
    let four = in_pool(4)?;
    let bytes: usize = single.iter().map(|a| a.contents.len()).sum();
    check(
        single == again && single == four,
        format!("{} artifacts ({bytes} bytes) identical across reruns and 1 vs 4 workers", single.len()),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("trap height", c01_trap_height),
        ("skin depths", c02_skin_depths),
        ("spin-flip frequency", c03_spin_flip_frequency),
        ("radial-frequency consistency", c04_radial_frequencies),
        ("lifetime law", c05_lifetime_law),
        ("absolute normalization band", c06_absolute_band),
        ("oracle equivalence", c07_oracles),
        ("technical-noise discrimination", c08_technical_noise),
        ("thin-film estimate", c09_thin_film),
        ("fragmentation", c10_fragmentation),
        ("kinetics", c11_kinetics),
        ("order-of-magnitude drop", c12_order_of_magnitude),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("{tag} {:>2} {name}: {detail} [{secs:.1} s]", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
