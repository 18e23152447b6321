//! Scalar math kernels.
//!
//! All transcendental calls go through `libm` so the crate builds without
//! `std` and gives identical results whichever feature set is active.

use alloc::vec::Vec;

#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline(always)]
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline(always)]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline(always)]
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// ln(n!) by direct summation.
///
/// Exact for n <= 1 and accurate to a few ulps for the degrees used here
/// (n stays in the hundreds); the cumulative table below is what hot paths
/// use, this is for one-off evaluations.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 2..=n {
        acc += ln(i as f64);
    }
    acc
}

/// Prefix table of ln(i!) for i = 0..=n.
pub(crate) fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(0.0);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += ln(i as f64);
        t.push(acc);
    }
    t
}

/// ln C(m, j) from a ln-factorial prefix table covering at least m.
#[inline]
pub(crate) fn ln_binomial(table: &[f64], m: usize, j: usize) -> f64 {
    table[m] - table[j] - table[m - j]
}

const INCBETA_TINY: f64 = 1e-300;
const INCBETA_EPS: f64 = 1e-15;
const INCBETA_MAX_ITER: usize = 300;

/// Regularized incomplete beta function I_x(a, b) for a, b >= 1.
///
/// Continued fraction (modified Lentz), switching to the symmetric form
/// I_x(a, b) = 1 - I_{1-x}(b, a) once x exceeds a/(a+b) so convergence is
/// uniform across the unit interval.
pub(crate) fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a >= 1.0 && b >= 1.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_beta = lgamma_int(a) + lgamma_int(b) - lgamma_int(a + b);
    let front = exp(a * ln(x) + b * ln_1p(-x) - ln_beta);
    if x < a / (a + b) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// ln Gamma(z) for positive integer z (z = n + 1 -> ln n!).
fn lgamma_int(z: f64) -> f64 {
    ln_factorial(z as usize - 1)
}

/// Continued fraction core of the regularized incomplete beta function.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if abs(d) < INCBETA_TINY {
        d = INCBETA_TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=INCBETA_MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;

        // even step
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if abs(d) < INCBETA_TINY {
            d = INCBETA_TINY;
        }
        c = 1.0 + aa / c;
        if abs(c) < INCBETA_TINY {
            c = INCBETA_TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // odd step
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if abs(d) < INCBETA_TINY {
            d = INCBETA_TINY;
        }
        c = 1.0 + aa / c;
        if abs(c) < INCBETA_TINY {
            c = INCBETA_TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if abs(delta - 1.0) < INCBETA_EPS {
            break;
        }
    }
    h
}

/// Composite Simpson rule with `panels` (even, >= 2) equal panels on [a, b].
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0, "panels must be even and >= 2");
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Composite Simpson rule over equally spaced samples (odd count, step `h`).
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    assert!(values.len() >= 3 && values.len() % 2 == 1, "need an odd number of samples >= 3");
    let mut acc = values[0] + values[values.len() - 1];
    for (i, v) in values.iter().enumerate().skip(1).take(values.len() - 2) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}
