use serde::{Deserialize, Serialize};

/// Settings shared by the root-finding estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Absolute bracket width at which a bisection on a bounded root
    /// variable stops.
    pub tolerance: f64,
    /// D-space solves stop once `|residual| <= relative_residual * d` and the
    /// bracket is within `tolerance` of the root in relative terms.
    pub relative_residual: f64,
    pub max_iterations: usize,
    /// Upper end of the D-space bracket; roots beyond it are reported as
    /// saturated at this value.
    pub upper_cap: f64,
    /// The MoM2 bracket ends at `N * mom2_cap_factor` (and never above `upper_cap`).
    pub mom2_cap_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-15,
            relative_residual: 1e-12,
            max_iterations: 200,
            upper_cap: 1e15,
            mom2_cap_factor: 1e3,
        }
    }
}

/// Bisection on `[lo, hi]` for an `f` with `f(lo) > 0 > f(hi)` or the reverse.
///
/// Stops when `stop(x, f(x))` holds, the bracket can no longer be split in
/// floating point, or the iteration budget runs out. With `geometric` the
/// split point is the geometric mean, which suits brackets spanning many
/// orders of magnitude.
pub(crate) fn bisect<F, S>(f: F, mut lo: f64, mut hi: f64, config: &SolverConfig, geometric: bool, stop: S) -> f64
where
    F: Fn(f64) -> f64,
    S: Fn(f64, f64, f64) -> bool,
{
    let lo_positive = f(lo) > 0.0;
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for _ in 0..config.max_iterations {
        let mid = if geometric {
            (lo * hi).sqrt()
        } else {
            lo + 0.5 * (hi - lo)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.0 {
            best = (fm.abs(), mid);
        }
        if fm == 0.0 || stop(mid, fm, hi - lo) {
            return mid;
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.1
}
