use serde::Serialize;

use super::{DecayDataset, KineticsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Weighted least squares when counts are non-integer and every sample
    /// carries sigma_N; Poisson likelihood otherwise (a quasi-likelihood for
    /// non-integer counts).
    Auto,
    PoissonMle,
    WeightedLeastSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FitResult {
    pub tau: f64,
    pub tau_sigma: f64,
    pub n0: f64,
    pub n0_sigma: f64,
    /// Poisson deviance or χ² per degree of freedom; 0 for exactly
    /// determined fits.
    pub residual: f64,
    pub method: FitMethod,
}

/// Poisson maximum-likelihood fit of N0·exp(−t/τ).
pub fn fit_exponential(data: &DecayDataset) -> Result<FitResult, KineticsError> {
    fit_exponential_with(data, FitMethod::Auto)
}

pub fn fit_exponential_with(data: &DecayDataset, method: FitMethod) -> Result<FitResult, KineticsError> {
    data.validate()?;
    let s = &data.samples;
    if s.len() < 2 {
        return Err(KineticsError::NotIdentifiable(format!("{} sample(s); at least 2 are needed", s.len())));
    }
    let nonzero: Vec<f64> = s.iter().map(|x| x.n).filter(|&n| n > 0.0).collect();
    if nonzero.len() < 2 {
        return Err(KineticsError::NotIdentifiable("fewer than two nonzero counts".into()));
    }
    if s.iter().all(|x| x.n == s[0].n) {
        return Err(KineticsError::NotIdentifiable(format!("all counts equal {}", s[0].n)));
    }
    let method = match method {
        FitMethod::Auto
            if s.iter().any(|x| x.n.fract() != 0.0) && s.iter().all(|x| x.sigma_n.is_some()) =>
        {
            FitMethod::WeightedLeastSquares
        }
        FitMethod::Auto => FitMethod::PoissonMle,
        m => m,
    };
    let (lambda, n0, info, residual) = match method {
        FitMethod::PoissonMle => poisson(data)?,
        _ => weighted_least_squares(data)?,
    };
    if !(lambda > 0.0) {
        return Err(KineticsError::NotIdentifiable(format!("counts do not decay (rate {lambda:.3e} s⁻¹)")));
    }
    // covariance of (N0, λ) from the inverse information matrix
    let det = info[0][0] * info[1][1] - info[0][1] * info[0][1];
    if !(det > 0.0) {
        return Err(KineticsError::NotIdentifiable("singular information matrix".into()));
    }
    let var_n0 = info[1][1] / det;
    let var_lambda = info[0][0] / det;
    Ok(FitResult {
        tau: 1.0 / lambda,
        tau_sigma: var_lambda.sqrt() / (lambda * lambda),
        n0,
        n0_sigma: var_n0.sqrt(),
        residual,
        method,
    })
}

type Fit = (f64, f64, [[f64; 2]; 2], f64);

/// Finds the root of a decreasing function by safeguarded Newton steps.
fn decreasing_root(f: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> Result<f64, KineticsError> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, dv) = f(x);
        if v == 0.0 {
            return Ok(x);
        }
        if v > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / dv;
        let next = if dv < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-15 * x.abs() {
            return Ok(next);
        }
        x = next;
    }
    Err(KineticsError::NoConvergence("rate root not bracketed to precision".into()))
}

/// Expands a bracket [lo, hi] around `start` until `f` changes sign.
fn bracket(f: &impl Fn(f64) -> (f64, f64), start: f64, scale: f64) -> Result<(f64, f64), KineticsError> {
    let mut lo = start - scale;
    let mut hi = start + scale;
    for _ in 0..200 {
        if f(lo).0 > 0.0 && f(hi).0 < 0.0 {
            return Ok((lo, hi));
        }
        if f(lo).0 <= 0.0 {
            lo -= hi - lo;
        }
        if f(hi).0 >= 0.0 {
            hi += hi - lo;
        }
    }
    Err(KineticsError::NoConvergence("could not bracket the decay rate".into()))
}

fn poisson(data: &DecayDataset) -> Result<Fit, KineticsError> {
    let s = &data.samples;
    let total: f64 = s.iter().map(|x| x.n).sum();
    let target = s.iter().map(|x| x.n * x.t).sum::<f64>() / total;
    let t0 = s[0].t;
    let span = s[s.len() - 1].t - t0;
    // Score equation with N0 profiled out: the count-weighted mean time equals
    // the model-weighted mean time, which falls monotonically with λ.
    let score = |lambda: f64| {
        let (mut w, mut wt, mut wt2) = (0.0, 0.0, 0.0);
        for x in s {
            let e = (-lambda * (x.t - t0)).exp();
            w += e;
            wt += e * x.t;
            wt2 += e * x.t * x.t;
        }
        let mean = wt / w;
        (mean - target, -(wt2 / w - mean * mean))
    };
    let (lo, hi) = bracket(&score, 1.0 / span, 1.0 / span)?;
    let lambda = decreasing_root(score, lo, hi)?;
    let model: Vec<f64> = s.iter().map(|x| (-lambda * x.t).exp()).collect();
    let n0 = total / model.iter().sum::<f64>();
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    let mut deviance = 0.0;
    for (x, e) in s.iter().zip(&model) {
        let mu = n0 * e;
        a += e * e / mu;
        b += -n0 * x.t * e * e / mu;
        c += (n0 * x.t * e).powi(2) / mu;
        deviance += 2.0 * (if x.n > 0.0 { x.n * (x.n / mu).ln() } else { 0.0 } - (x.n - mu));
    }
    // expected Fisher information Σ ∇μ∇μᵀ/μ at the optimum
    let info = [[a, b], [b, c]];
    let dof = s.len().saturating_sub(2);
    let residual = if dof == 0 { 0.0 } else { deviance / dof as f64 };
    Ok((lambda, n0, info, residual))
}

fn weighted_least_squares(data: &DecayDataset) -> Result<Fit, KineticsError> {
    let s = &data.samples;
    let weights: Vec<f64> = s
        .iter()
        .map(|x| {
            x.sigma_n
                .map(|sig| 1.0 / (sig * sig))
                .ok_or_else(|| KineticsError::InvalidInput("weighted least squares needs sigma_N on every sample".into()))
        })
        .collect::<Result<_, _>>()?;
    let t0 = s[0].t;
    let profile = |lambda: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for (x, w) in s.iter().zip(&weights) {
            let e = (-lambda * (x.t - t0)).exp();
            num += w * x.n * e;
            den += w * e * e;
        }
        num / den
    };
    // −dχ²/dλ at the profiled amplitude (envelope theorem); it decreases
    // through the minimum. Its slope comes from a central difference.
    let gradient = |lambda: f64| {
        let a = profile(lambda);
        s.iter().zip(&weights).map(|(x, w)| {
            let e = (-lambda * (x.t - t0)).exp();
            -2.0 * w * (x.n - a * e) * a * (x.t - t0) * e
        }).sum::<f64>()
    };
    let span = s[s.len() - 1].t - t0;
    let f = |lambda: f64| {
        let d = 1e-7 * (lambda.abs() + 1.0 / span);
        (gradient(lambda), (gradient(lambda + d) - gradient(lambda - d)) / (2.0 * d))
    };
    let start = log_linear_guess(data).unwrap_or(1.0 / span);
    let (lo, hi) = bracket(&f, start, 0.5 / span)?;
    let lambda = decreasing_root(f, lo, hi)?;
    let n0 = profile(lambda) * (lambda * t0).exp();
    let (mut a, mut b, mut c, mut chi2) = (0.0, 0.0, 0.0, 0.0);
    for (x, w) in s.iter().zip(&weights) {
        let e = (-lambda * x.t).exp();
        let (dn0, dl) = (e, -n0 * x.t * e);
        a += w * dn0 * dn0;
        b += w * dn0 * dl;
        c += w * dl * dl;
        chi2 += w * (x.n - n0 * e).powi(2);
    }
    let dof = s.len().saturating_sub(2);
    Ok((lambda, n0, [[a, b], [b, c]], if dof == 0 { 0.0 } else { chi2 / dof as f64 }))
}

fn log_linear_guess(data: &DecayDataset) -> Option<f64> {
    let pts: Vec<(f64, f64)> = data.samples.iter().filter(|x| x.n > 0.0).map(|x| (x.t, x.n.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let slope = -sxy / sxx;
    (slope > 0.0).then_some(slope)
}
