#![allow(dead_code)]

pub mod checks;
pub mod fixtures;
pub mod learned;

use std::collections::HashMap;

use ndv_core::estimators::{self, h_n, sichel_solve, EstimateOutcome};
use ndv_core::{FrequencyProfile, Method, SolverConfig};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Check = Result<String, String>;

pub fn profile(f: &[(u64, u64)], population: u64) -> FrequencyProfile {
    FrequencyProfile::from_frequencies(f.iter().copied(), population).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Every estimator on every frozen fixture, relative 1e-9.
pub fn fixture_suite() -> Check {
    let cfg = SolverConfig::default();
    let mut per_method: HashMap<Method, usize> = HashMap::new();
    let mut failures = Vec::new();
    for fx in fixtures::FIXTURES {
        let p = profile(fx.f, fx.population);
        for &(method, want) in fx.expected {
            let got = estimators::estimate(method, &p, &cfg).map(|e| e.value);
            match got {
                Ok(v) if rel_err(v, want) <= 1e-9 => *per_method.entry(method).or_default() += 1,
                Ok(v) => failures.push(format!("{}/{method}: got {v}, want {want}", fx.name)),
                Err(e) => failures.push(format!("{}/{method}: {e}", fx.name)),
            }
        }
    }
    if !failures.is_empty() {
        return Err(failures.join("; "));
    }
    let thin: Vec<_> = Method::ALL
        .iter()
        .filter(|m| per_method.get(m).copied().unwrap_or(0) < 5)
        .collect();
    if !thin.is_empty() {
        return Err(format!("fewer than 5 fixtures for {thin:?}"));
    }
    let min = Method::ALL.iter().map(|m| per_method[m]).min().unwrap();
    Ok(format!("{} fixtures, >= {min} per estimator", fixtures::FIXTURES.len()))
}

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Goodman evaluated directly from factorials in exact arithmetic.
pub fn goodman_exact(counts: &[u64], population: u64) -> BigRational {
    let n: u64 = counts.iter().sum();
    let d = counts.iter().filter(|&&c| c > 0).count() as u64;
    if n == population {
        return BigRational::from_integer(d.into());
    }
    let mut f: HashMap<u64, u64> = HashMap::new();
    for &c in counts.iter().filter(|&&c| c > 0) {
        *f.entry(c).or_default() += 1;
    }
    let mut total = BigRational::from_integer(d.into());
    for (&i, &fi) in &f {
        let num = factorial(population - n + i - 1) * factorial(n - i);
        let den = factorial(population - n - 1) * factorial(n);
        let term = BigRational::new(num * BigInt::from(fi), den);
        if i % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

/// Restricted growth strings: every column of length `len` up to relabeling.
fn columns(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; len];
    fn rec(pos: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max + 1 {
            cur[pos] = v;
            rec(pos + 1, max.max(v), cur, out);
        }
    }
    if len > 0 {
        cur[0] = 0;
        rec(1, 0, &mut cur, &mut out);
    }
    out
}

/// Goodman against exact evaluation on every column with N <= 8 and every
/// prefix sample; also checks exact unbiasedness over all subsets where the
/// sample is at least as large as the largest value class.
pub fn goodman_exhaustive() -> Check {
    let mut compared = 0usize;
    for big_n in 1..=8usize {
        for col in columns(big_n) {
            for n in 1..=big_n {
                let mut counts = vec![0u64; big_n];
                for &v in &col[..n] {
                    counts[v] += 1;
                }
                let exact = goodman_exact(&counts, big_n as u64);
                let p = FrequencyProfile::from_value_counts(&counts, big_n as u64).unwrap();
                let got = estimators::goodman(&p).map_err(|e| e.to_string())?.value;
                let want = to_f64(&exact);
                if (got - want).abs() > 1e-9 * want.abs().max(1.0) {
                    return Err(format!("N={big_n} col={col:?} n={n}: got {got}, want {want}"));
                }
                compared += 1;
            }
        }
    }
    // Unbiasedness over all C(N, n) subsets.
    for big_n in 2..=7usize {
        for col in columns(big_n) {
            let truth = col.iter().max().unwrap() + 1;
            let mut class = vec![0usize; truth];
            col.iter().for_each(|&v| class[v] += 1);
            let largest = *class.iter().max().unwrap();
            for n in largest.max(1)..big_n {
                let mut sum = BigRational::zero();
                let mut subsets = 0u64;
                for mask in 0u32..(1 << big_n) {
                    if mask.count_ones() as usize != n {
                        continue;
                    }
                    let mut counts = vec![0u64; truth];
                    (0..big_n)
                        .filter(|i| mask >> i & 1 == 1)
                        .for_each(|i| counts[col[i]] += 1);
                    sum += goodman_exact(&counts, big_n as u64);
                    subsets += 1;
                }
                let mean = sum / BigRational::from_integer(subsets.into());
                if mean != BigRational::from_integer(truth.into()) {
                    return Err(format!("biased at N={big_n} col={col:?} n={n}: {mean}"));
                }
            }
        }
    }
    Ok(format!("{compared} prefix samples matched exactly-evaluated values"))
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `h_n(x)` against `C(N-x, n) / C(N, n)` for all integer `x`, N <= 30.
pub fn ht_oracle() -> Check {
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for big_n in 1..=30u64 {
        for n in 0..=big_n {
            for x in 0..=(big_n - n) {
                let exact = BigRational::new(binomial(big_n - x, n), binomial(big_n, n));
                let want = to_f64(&exact);
                let got = h_n(x as f64, n, big_n);
                let err = rel_err(got, want);
                worst = worst.max(err);
                if err > 1e-10 {
                    return Err(format!("N={big_n} n={n} x={x}: got {got}, want {want}"));
                }
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} points, max relative error {worst:.2e}"))
}

/// Root residuals and fallback paths of the iterative estimators.
pub fn solver_contracts() -> Check {
    let cfg = SolverConfig::default();
    let mut solvable = 0;
    for fx in fixtures::FIXTURES {
        let p = profile(fx.f, fx.population);
        let lo = p.f1() as f64 / p.n() as f64;
        match (sichel_solve(&p, &cfg), fx.sichel_g) {
            (Some(s), Some(g)) => {
                if !(s.residual.abs() < 1e-10 && s.g > lo && s.g < 1.0) {
                    return Err(format!("{}: sichel g={} residual={}", fx.name, s.g, s.residual));
                }
                if rel_err(s.g, g) > 1e-9 {
                    return Err(format!("{}: sichel g={} oracle {g}", fx.name, s.g));
                }
                solvable += 1;
            }
            (None, None) => {}
            (got, want) => {
                return Err(format!("{}: sichel root {got:?}, oracle {want:?}", fx.name));
            }
        }
        let d = p.d() as f64;
        let m1 = estimators::mom1(&p, &cfg).unwrap();
        if !m1.saturated {
            let res = (d - mom1_rhs(m1.value, p.n() as f64)).abs();
            if res >= 1e-9 * d {
                return Err(format!("{}: mom1 residual {res}", fx.name));
            }
        }
        let m2 = estimators::mom2(&p, &cfg).unwrap();
        if !m2.fallback_used {
            let res = (d - mom2_rhs(m2.value, p.n(), p.population())).abs();
            if res >= 1e-9 * d {
                return Err(format!("{}: mom2 residual {res}", fx.name));
            }
        }
    }
    if solvable < 5 {
        return Err(format!("only {solvable} solvable Sichel fixtures"));
    }
    let constant = profile(&[(100, 1)], 10_000);
    let m2 = estimators::mom2(&constant, &cfg).unwrap();
    let res = (1.0 - mom2_rhs(m2.value, 100, 10_000)).abs();
    if res >= 1e-9 {
        return Err(format!("mom2 constant sample residual {res}"));
    }
    let chao = estimators::chao(&profile(&[(1, 4), (3, 3)], 100)).unwrap();
    if !(chao.fallback_used && chao.value == 7.0) {
        return Err("chao f2=0 fallback".into());
    }
    let sichel = estimators::sichel(&profile(&[(2, 5)], 1000), &cfg).unwrap();
    if !(sichel.fallback_used && sichel.value == 5.0) {
        return Err("sichel f1=0 fallback".into());
    }
    let all = estimators::estimate_all(&FrequencyProfile::empty(10), &cfg);
    if !all.iter().all(|o| matches!(o, EstimateOutcome::NotApplicable { .. })) {
        return Err("empty sample must be not applicable".into());
    }
    Ok(format!("{solvable} solvable Sichel fixtures; fallbacks exercised"))
}

pub fn mom1_rhs(big_d: f64, n: f64) -> f64 {
    big_d * (1.0 - (-n / big_d).exp())
}

/// Independent evaluation of `D (1 - h_n(N / D))` in exact product form.
pub fn mom2_rhs(big_d: f64, n: u64, population: u64) -> f64 {
    let x = population as f64 / big_d;
    let big_n = population as f64;
    if x > big_n - n as f64 {
        return big_d;
    }
    let ln_h: f64 = (1..=n).map(|k| (-x / (big_n - n as f64 + k as f64)).ln_1p()).sum();
    -big_d * ln_h.exp_m1()
}

pub fn report(name: &str, check: Check) -> bool {
    match check {
        Ok(detail) => {
            println!("[PASS] {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("[FAIL] {name}: {detail}");
            false
        }
    }
}
