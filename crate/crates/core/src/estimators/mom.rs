use super::closed_form::require_sample;
use super::solver::{bisect, SolverConfig};
use super::{Estimate, EstimatorError, Method};
use crate::profiles::FrequencyProfile;

/// `D (1 - e^{-n/D})`, increasing in `D` with supremum `n`.
pub(crate) fn mom1_rhs(big_d: f64, n: f64) -> f64 {
    -big_d * (-n / big_d).exp_m1()
}

/// Method of moments for an infinite population with equal frequencies:
/// solves `d = D (1 - e^{-n/D})` on `[max(d, 1), upper_cap]`. When the root
/// lies beyond the cap (always the case for `d = n`) the cap is returned,
/// flagged as saturated.
pub fn mom1(p: &FrequencyProfile, config: &SolverConfig) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Mom1, p)?;
    let (n, d) = (p.n() as f64, p.d() as f64);
    let lo = d.max(1.0);
    let hi = config.upper_cap.max(lo);
    let f = |big_d: f64| mom1_rhs(big_d, n) - d;
    let tol = config.relative_residual * d;
    let f_lo = f(lo);
    if f_lo.abs() <= tol {
        return Ok(Estimate::new(Method::Mom1, lo));
    }
    if p.d() >= p.n() || f(hi) < 0.0 {
        return Ok(Estimate::saturated(Method::Mom1, hi));
    }
    let root = bisect(f, lo, hi, config, true, |x, fx, w| {
        fx.abs() <= tol && w <= config.tolerance.max(f64::EPSILON) * x
    });
    Ok(Estimate::new(Method::Mom1, root))
}
