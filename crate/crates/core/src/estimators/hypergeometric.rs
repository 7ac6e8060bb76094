use libm::lgamma;

use super::closed_form::require_sample;
use super::solver::{bisect, SolverConfig};
use super::{Estimate, EstimatorError, Method};
use crate::profiles::FrequencyProfile;

/// Above this sample size `ln h_n` comes straight from `lgamma`; below it the
/// gamma ratios are expanded into their finite products, which avoids the
/// cancellation between log-gamma values of size `N ln N`.
const PRODUCT_FORM_MAX_N: u64 = 100_000;

/// `ln h_n(x)` where `h_n(x) = G(N-x+1) G(N-n+1) / (G(N-n-x+1) G(N+1))`, the
/// probability that a value with `x` occurrences is absent from a sample of
/// `n` rows drawn without replacement. `-inf` when `x > N - n`.
fn ln_h_n(x: f64, n: u64, population: u64) -> f64 {
    let (nf, big_n) = (n as f64, population as f64);
    if x > big_n - nf {
        return f64::NEG_INFINITY;
    }
    if n <= PRODUCT_FORM_MAX_N {
        // G(a+n)/G(a) = prod_{k<n} (a+k), once for a = N-n-x+1 and once for a = N-n+1.
        let base = big_n - nf + 1.0;
        return (0..n)
            .map(|k| {
                let den = base + k as f64;
                if x == den {
                    f64::NEG_INFINITY
                } else {
                    (-x / den).ln_1p()
                }
            })
            .sum();
    }
    lgamma(big_n - x + 1.0) + lgamma(big_n - nf + 1.0) - lgamma(big_n - nf - x + 1.0) - lgamma(big_n + 1.0)
}

/// `h_n(x)` computed through log-gamma; zero for `x > N - n`.
pub fn h_n(x: f64, n: u64, population: u64) -> f64 {
    ln_h_n(x, n, population).exp()
}

/// `1 - h_n(x)` without cancellation when `h_n(x)` is close to one.
fn one_minus_h_n(x: f64, n: u64, population: u64) -> f64 {
    -ln_h_n(x, n, population).exp_m1()
}

/// Horvitz-Thompson: `sum_j f_j / (1 - h_n(N j / n))`.
pub fn horvitz_thompson(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Ht, p)?;
    let (n, big_n) = (p.n(), p.population());
    if n == big_n {
        return Ok(Estimate::new(Method::Ht, p.d() as f64));
    }
    let mut total = 0.0;
    for (j, fj) in p.iter() {
        let inclusion = one_minus_h_n(big_n as f64 * j as f64 / n as f64, n, big_n);
        if inclusion <= 0.0 {
            return Ok(Estimate::saturated(Method::Ht, f64::INFINITY));
        }
        total += fj as f64 / inclusion;
    }
    Ok(Estimate::new(Method::Ht, total))
}

/// Right-hand side of the MoM2 equation, `D (1 - h_n(N / D))`.
pub(crate) fn mom2_rhs(big_d: f64, n: u64, population: u64) -> f64 {
    big_d * one_minus_h_n(population as f64 / big_d, n, population)
}

/// Method of moments without the infinite-population assumption: solves
/// `d = D (1 - h_n(N / D))` by bisection on `[max(d, 1), N * cap_factor]`.
pub fn mom2(p: &FrequencyProfile, config: &SolverConfig) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Mom2, p)?;
    let (n, big_n) = (p.n(), p.population());
    let d = p.d() as f64;
    let lo = d.max(1.0);
    let hi = (big_n as f64 * config.mom2_cap_factor).min(config.upper_cap).max(lo);
    let f = |big_d: f64| mom2_rhs(big_d, n, big_n) - d;
    let tol = config.relative_residual * d;
    let f_lo = f(lo);
    if f_lo.abs() <= tol {
        return Ok(Estimate::new(Method::Mom2, lo));
    }
    if !(f_lo < 0.0 && f(hi) > 0.0) {
        return Ok(Estimate::fallback(Method::Mom2, d));
    }
    let root = bisect(f, lo, hi, config, true, |x, fx, w| {
        fx.abs() <= tol && w <= config.tolerance.max(f64::EPSILON) * x
    });
    Ok(Estimate::new(Method::Mom2, root))
}
