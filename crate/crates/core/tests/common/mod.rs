//! Shared helpers for the oracle and property test suites.

#![allow(dead_code)]

use mable_aft_core::{Dataset, Observation, SimRng};

/// Random simplex point, strictly interior.
pub fn random_simplex(rng: &mut SimRng, m: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..=m).map(|_| 0.05 + rng.uniform()).collect();
    let s: f64 = p.iter().sum();
    for v in &mut p {
        *v /= s;
    }
    p
}

/// Random coefficient vector with entries in (-scale, scale).
pub fn random_gamma(rng: &mut SimRng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.uniform_in(-scale, scale)).collect()
}

/// Random rescaled dataset with mixed censoring classes and d covariates.
///
/// Times are kept well inside the unit interval relative to tau and the
/// coefficient scale stays small, so every likelihood argument is interior:
/// finite-difference oracles never cross the support clamp.
pub fn random_dataset(rng: &mut SimRng, n: usize, d: usize) -> Dataset {
    let tau = 10.0;
    let mut obs = Vec::with_capacity(n);
    for i in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let class = i % 4;
        let o = match class {
            0 => Observation::exact(rng.uniform_in(0.5, 6.0), x),
            1 => Observation::censored(0.0, rng.uniform_in(0.5, 6.0), x),
            2 => {
                let y1 = rng.uniform_in(0.3, 4.0);
                let y2 = y1 + rng.uniform_in(0.3, 2.0);
                Observation::censored(y1, y2, x)
            }
            _ => Observation::censored(rng.uniform_in(0.5, 6.0), f64::INFINITY, x),
        };
        obs.push(o);
    }
    Dataset::new(obs).unwrap().select_tau(Some(tau)).unwrap().rescale().unwrap()
}

/// Adaptive Simpson quadrature, used as the independent integration oracle.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson_rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64, whole: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let left = simpson_rule(f, a, c);
        let right = simpson_rule(f, c, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, c, 0.5 * eps, left, depth - 1)
                + recurse(f, c, b, 0.5 * eps, right, depth - 1)
        }
    }
    recurse(f, a, b, eps, simpson_rule(f, a, b), 40)
}
