mod common;

use common::checks;
use ndv_core::eval::q_error;
use proptest::prelude::*;

#[test]
fn profile_identities_hold() {
    checks::profile_identities(256).unwrap();
}

#[test]
fn q_error_fixtures() {
    checks::q_error_metric().unwrap();
}

#[test]
fn layout_series() {
    checks::layout().unwrap();
}

#[test]
fn equivariance_is_bit_exact() {
    common::learned::equivariance().unwrap();
}

proptest! {
    #[test]
    fn q_error_is_symmetric_and_scales(d in 1.0f64..1e9, a in 1.0f64..1e6) {
        let up = q_error(a * d, d).unwrap();
        let down = q_error(d, a * d).unwrap();
        prop_assert!((up - a).abs() <= 1e-12 * a);
        prop_assert!((down - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn percentiles_are_monotone(mut v in proptest::collection::vec(0.0f64..1e6, 1..200)) {
        if v.len() > 3 { v[0] = f64::INFINITY; }
        let a = ndv_core::eval::Aggregate::from_q_errors(&v).unwrap();
        prop_assert!(a.p50 <= a.p75 && a.p75 <= a.p90 && a.p90 <= a.p95 && a.p95 <= a.p99);
        prop_assert_eq!(a.mean.is_infinite(), v.iter().any(|x| x.is_infinite()));
        let mut rev = v.clone();
        rev.reverse();
        prop_assert_eq!(ndv_core::eval::Aggregate::from_q_errors(&rev).unwrap(), a);
    }
}
