use super::closed_form::require_sample;
use super::solver::{bisect, SolverConfig};
use super::{Estimate, EstimatorError, Method};
use crate::profiles::FrequencyProfile;

/// Coefficients of `(1+g) ln g - A g + B = 0` for a profile, or `None` when
/// the equation is undefined (`f_1 = 0`, `f_1 = n` or an empty sample).
pub fn sichel_equation(p: &FrequencyProfile) -> Option<(f64, f64)> {
    let (n, d, f1) = (p.n() as f64, p.d() as f64, p.f1() as f64);
    if p.f1() == 0 || p.f1() == p.n() || p.d() == 0 {
        return None;
    }
    let log_ratio = (n / f1).ln();
    Some((2.0 * n / d - log_ratio, 2.0 * f1 / d + log_ratio))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SichelSolution {
    pub g: f64,
    pub residual: f64,
    pub b: f64,
    pub c: f64,
    pub estimate: f64,
}

fn residual(g: f64, a: f64, b: f64) -> f64 {
    (1.0 + g) * g.ln() - a * g + b
}

/// Solves the Sichel equation for `g` in `(f_1/n, 1)`.
///
/// The left-hand side is concave in `g` and vanishes at `g = f_1/n`, so an
/// interior root exists iff it rises there and ends negative at `g = 1`.
/// The bisection is bracketed between the maximiser and 1, where the sign
/// change is strict.
pub fn solve(p: &FrequencyProfile, config: &SolverConfig) -> Option<SichelSolution> {
    let (a, b) = sichel_equation(p)?;
    let (n, f1) = (p.n() as f64, p.f1() as f64);
    let lo = f1 / n;
    let slope = |g: f64| g.ln() + 1.0 / g + 1.0 - a;
    if slope(lo) <= 0.0 || residual(1.0, a, b) >= 0.0 {
        return None;
    }
    let peak = bisect(slope, lo, 1.0, config, false, |_, _, w| w <= config.tolerance);
    if residual(peak, a, b) <= 0.0 {
        return None;
    }
    let g = bisect(
        |g| residual(g, a, b),
        peak,
        1.0,
        config,
        false,
        |_, _, w| w <= config.tolerance,
    );
    if !(g > lo && g < 1.0) {
        return None;
    }
    let b_hat = g * (n * g / f1).ln() / (1.0 - g);
    let c_hat = (1.0 - g * g) / (n * g * g);
    Some(SichelSolution {
        g,
        residual: residual(g, a, b),
        b: b_hat,
        c: c_hat,
        estimate: 2.0 / (b_hat * c_hat),
    })
}

/// Sichel's zero-truncated GIGP estimator `2 / (b c)`; falls back to `d` when
/// the equation is undefined or has no interior root.
pub fn sichel(p: &FrequencyProfile, config: &SolverConfig) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Sichel, p)?;
    Ok(match solve(p, config) {
        Some(s) => Estimate::new(Method::Sichel, s.estimate),
        None => Estimate::fallback(Method::Sichel, p.d() as f64),
    })
}
