use super::{Estimate, EstimatorError, Method};
use crate::profiles::FrequencyProfile;

// ln(f64::MAX)
const LN_MAX: f64 = 709.782_712_893_384;

pub(super) fn require_sample(method: Method, p: &FrequencyProfile) -> Result<(), EstimatorError> {
    if p.n() == 0 {
        Err(EstimatorError::EmptySample { method })
    } else {
        Ok(())
    }
}

/// Goodman's unbiased estimator.
///
/// The coefficient of `f_i` is `T_i = prod_{j<=i} (N-n+j-1)/(n-j+1)` with
/// alternating sign. Magnitudes are carried in log space; a term beyond the
/// double range saturates the result to the sign of the largest term.
pub fn goodman(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Goodman, p)?;
    let (n, big_n, d) = (p.n(), p.population(), p.d() as f64);
    if n == big_n {
        return Ok(Estimate::new(Method::Goodman, d));
    }
    let gap = (big_n - n) as f64;
    let nf = n as f64;
    let mut t = 1.0_f64;
    let mut log_t = 0.0;
    let mut sum = 0.0;
    let mut overflow: Option<(f64, f64)> = None;
    let mut classes = p.iter().peekable();
    for i in 1..=p.max_frequency() {
        let fi = i as f64;
        t *= (gap + fi - 1.0) / (nf - fi + 1.0);
        log_t += (gap + fi - 1.0).ln() - (nf - fi + 1.0).ln();
        let Some(&(j, count)) = classes.peek() else { break };
        if j != i {
            continue;
        }
        classes.next();
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        let log_mag = log_t + (count as f64).ln();
        if log_mag > LN_MAX {
            if overflow.is_none_or(|(m, _)| log_mag > m) {
                overflow = Some((log_mag, sign));
            }
        } else if t.is_finite() {
            sum += sign * t * count as f64;
        } else {
            sum += sign * log_mag.exp();
        }
    }
    if let Some((_, sign)) = overflow {
        return Ok(Estimate::saturated(Method::Goodman, sign * f64::INFINITY));
    }
    Ok(Estimate::new(Method::Goodman, d + sum))
}

/// Guaranteed-error estimator: `sqrt(N/n) f_1 + sum_{j>=2} f_j`.
pub fn gee(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Gee, p)?;
    let scale = (p.population() as f64 / p.n() as f64).sqrt();
    let f1 = p.f1();
    Ok(Estimate::new(Method::Gee, scale * f1 as f64 + (p.d() - f1) as f64))
}

/// GEE with the singleton count floored at one.
pub fn eb(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Eb, p)?;
    let scale = (p.population() as f64 / p.n() as f64).sqrt();
    let f1 = p.f1();
    Ok(Estimate::new(
        Method::Eb,
        scale * f1.max(1) as f64 + (p.d() - f1) as f64,
    ))
}

/// `d + f_1^2 / (2 f_2)`, or `d` when there are no doubletons.
pub fn chao(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Chao, p)?;
    let d = p.d() as f64;
    let (f1, f2) = (p.f1() as f64, p.f2() as f64);
    if p.f2() == 0 {
        return Ok(Estimate::fallback(Method::Chao, d));
    }
    Ok(Estimate::new(Method::Chao, d + f1 * f1 / (2.0 * f2)))
}

pub fn shlosser(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Shlosser, p)?;
    let d = p.d() as f64;
    if p.f1() == 0 {
        return Ok(Estimate::new(Method::Shlosser, d));
    }
    let r = p.r();
    let q = 1.0 - r;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, fi) in p.iter() {
        let (i, fi) = (i as f64, fi as f64);
        num += q.powf(i) * fi;
        den += i * r * q.powf(i - 1.0) * fi;
    }
    num *= p.f1() as f64;
    if num == 0.0 {
        return Ok(Estimate::new(Method::Shlosser, d));
    }
    if den == 0.0 {
        return Ok(Estimate::fallback(Method::Shlosser, d));
    }
    Ok(Estimate::new(Method::Shlosser, d + num / den))
}

/// First-order jackknife, `d + (n-1)/n * f_1`.
///
/// Leaving out row `k` loses one distinct value exactly when `k` holds a
/// singleton, so the mean leave-one-out count is `d - f_1/n`.
pub fn jackknife1(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    if p.n() < 2 {
        return Err(EstimatorError::TooFewRows {
            method: Method::Jackknife,
            needed: 2,
            n: p.n(),
        });
    }
    let n = p.n() as f64;
    Ok(Estimate::new(
        Method::Jackknife,
        p.d() as f64 + (n - 1.0) / n * p.f1() as f64,
    ))
}

/// `d + sum_j f_j (1 - j/n)^n`; never exceeds `2d`.
pub fn bootstrap(p: &FrequencyProfile) -> Result<Estimate, EstimatorError> {
    require_sample(Method::Bootstrap, p)?;
    let n = p.n() as f64;
    let tail: f64 = p.iter().map(|(j, fj)| fj as f64 * (1.0 - j as f64 / n).powf(n)).sum();
    Ok(Estimate::new(Method::Bootstrap, p.d() as f64 + tail))
}
