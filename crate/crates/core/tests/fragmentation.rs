use atomchip::fragmentation::{fragment_report, symmetric_grid, AnomalyHeightLaw, CorrugationModel, FragmentScenario};
use atomchip::units::AtomSpecies;
use proptest::prelude::*;

fn scenario(temperature: f64, relative_amplitude: f64) -> FragmentScenario {
    FragmentScenario {
        z: symmetric_grid(1.5e-3, 1201),
        model: CorrugationModel::sinusoid(relative_amplitude),
        wire_field: 33e-4,
        b0: 0.8e-4,
        axial_frequency: 26.0,
        temperature,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contrast_falls_with_temperature(t in 0.5e-6..20e-6f64) {
        let atom = AtomSpecies::default();
        let cold = fragment_report(&scenario(t, 3e-4), &atom).unwrap().contrast;
        let warm = fragment_report(&scenario(2.0 * t, 3e-4), &atom).unwrap().contrast;
        prop_assert!(warm < cold);
    }

    #[test]
    fn profile_is_normalized(t in 0.5e-6..20e-6f64, beta in 0.0..5e-4f64) {
        let r = fragment_report(&scenario(t, beta), &AtomSpecies::default()).unwrap();
        let z = &r.profile.z;
        let n = &r.profile.density;
        let integral: f64 = z.windows(2).zip(n.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum();
        prop_assert!((integral - 1.0).abs() < 1e-9);
        let peak = r.profile.optical_thickness.iter().cloned().fold(0.0, f64::max);
        prop_assert!((peak - 1.0).abs() < 1e-12);
    }
}

#[test]
fn no_corrugation_no_contrast() {
    let r = fragment_report(&scenario(2e-6, 0.0), &AtomSpecies::default()).unwrap();
    assert!(r.contrast.abs() < 1e-12);
    assert_eq!(r.modulation_kelvin, 0.0);
}

#[test]
fn anomaly_fades_with_height() {
    let law = AnomalyHeightLaw::default();
    let near = law.amplitude_at(27e-6).unwrap();
    let far = law.amplitude_at(127e-6).unwrap();
    assert_eq!(near, 1e-6);
    assert!((far / near - (-2.0 * std::f64::consts::PI / 3.0).exp()).abs() < 1e-12);
}
