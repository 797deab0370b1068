use serde::Serialize;

use super::KineticsError;

/// Final evaporation frequency against cloud size (mean-square length or
/// temperature; any quantity linear in the final frequency).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfSpectroscopySeries {
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct F0Estimate {
    pub f0: f64,
    pub slope: f64,
    /// 1σ on f0; zero when the points are exactly collinear or only two.
    pub sigma: f64,
}

/// Ordinary least-squares line through the series; f0 is its frequency
/// intercept, i.e. the frequency at which the cloud size extrapolates to zero.
pub fn extract_f0(series: &RfSpectroscopySeries) -> Result<F0Estimate, KineticsError> {
    let pts = &series.points;
    if pts.len() < 2 {
        return Err(KineticsError::InvalidInput(format!("{} point(s); a line needs 2", pts.len())));
    }
    if pts.iter().any(|(f, y)| !f.is_finite() || !y.is_finite()) {
        return Err(KineticsError::InvalidInput("non-finite spectroscopy point".into()));
    }
    let n = pts.len() as f64;
    // centre the frequencies so the normal equations stay well conditioned
    let fm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - fm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(KineticsError::InvalidInput("frequencies must not all coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - fm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    if slope == 0.0 || !slope.is_finite() {
        return Err(KineticsError::ZeroSlope);
    }
    // y = ym + slope·(f − fm)  ⇒  f0 = fm − ym/slope
    let f0 = fm - ym / slope;
    let ssr: f64 = pts.iter().map(|p| (p.1 - ym - slope * (p.0 - fm)).powi(2)).sum();
    let s2 = if pts.len() > 2 { ssr / (n - 2.0) } else { 0.0 };
    // ym and slope are uncorrelated in centred form
    let var_ym = s2 / n;
    let var_slope = s2 / sxx;
    let var_f0 = var_ym / (slope * slope) + (ym * ym) * var_slope / slope.powi(4);
    Ok(F0Estimate { f0, slope, sigma: var_f0.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_point_intercept() {
        let a = 1e-10;
        let s = RfSpectroscopySeries { points: vec![(600e3, a), (700e3, 3.5 * a)] };
        let e = extract_f0(&s).unwrap();
        assert!((e.f0 - 560e3).abs() < 1e-6, "{}", e.f0);
        assert_eq!(e.sigma, 0.0);
    }

    #[test]
    fn constructed_intercept() {
        let pts = (0..6).map(|i| {
            let f = 1.9e6 + 1e5 * i as f64;
            (f, 2.5e-12 * (f - 1.8e6))
        });
        let e = extract_f0(&RfSpectroscopySeries { points: pts.collect() }).unwrap();
        assert!((e.f0 - 1.8e6).abs() < 1e-6);
    }

    #[test]
    fn scale_invariance() {
        let pts: Vec<(f64, f64)> = vec![(600e3, 1.0), (650e3, 2.1), (700e3, 3.4), (750e3, 4.4)];
        let a = extract_f0(&RfSpectroscopySeries { points: pts.clone() }).unwrap();
        let scaled = pts.iter().map(|&(f, y)| (f, 7.5e-11 * y)).collect();
        let b = extract_f0(&RfSpectroscopySeries { points: scaled }).unwrap();
        assert!((a.f0 - b.f0).abs() < 1e-6);
        assert!((a.sigma - b.sigma).abs() < 1e-6 * a.sigma);
    }

    #[test]
    fn noisy_intercept_within_three_sigma() {
        let mut misses = 0;
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = (0..10)
                .map(|i| {
                    let f = 600e3 + 2e4 * i as f64;
                    let y = 1e-3 * (f - 560e3) / 1e3;
                    (f, y * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
                })
                .collect();
            let e = extract_f0(&RfSpectroscopySeries { points: pts }).unwrap();
            if (e.f0 - 560e3).abs() > 3.0 * e.sigma {
                misses += 1;
            }
        }
        assert!(misses <= 4, "{misses}");
    }

    #[test]
    fn rejects_degenerate_series() {
        assert!(matches!(
            extract_f0(&RfSpectroscopySeries { points: vec![(1.0, 2.0), (3.0, 2.0)] }),
            Err(KineticsError::ZeroSlope)
        ));
        assert!(extract_f0(&RfSpectroscopySeries { points: vec![(1.0, 2.0)] }).is_err());
        assert!(extract_f0(&RfSpectroscopySeries { points: vec![(1.0, 2.0), (1.0, 3.0)] }).is_err());
    }
}
