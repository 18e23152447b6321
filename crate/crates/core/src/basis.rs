//! Beta-density basis functions and Bernstein polynomial mixtures.
//!
//! The basis is the fixed beta family with integer shapes,
//! `beta_density(m, j, u) = (m+1) C(m,j) u^j (1-u)^{m-j}`, together with its
//! survival counterpart `beta_survival(m, j, u) = 1 - I_u(j+1, m-j+1)`.
//! A density on `[0, tau]` is modelled as a simplex-weighted mixture of the
//! m+1 basis densities.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::math;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Degree above which basis values are evaluated in log space. Binomial
/// coefficients stay exactly representable well past this point, but the
/// direct product loses digits long before it overflows.
const DIRECT_EVAL_MAX_DEGREE: usize = 30;

fn check_unit(u: f64, what: &'static str) -> Result<()> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain { what, value: u });
    }
    Ok(())
}

fn check_index(m: usize, j: usize) -> Result<()> {
    if j > m {
        return Err(Error::BasisIndex { degree: m, index: j });
    }
    Ok(())
}

/// Basis density `(m+1) C(m,j) u^j (1-u)^{m-j}`.
///
/// Evaluated directly for m <= 30 and in log space (via ln-gamma) above,
/// with exact limits at u = 0 and u = 1.
pub fn beta_density(m: usize, j: usize, u: f64) -> Result<f64> {
    check_index(m, j)?;
    check_unit(u, "basis argument")?;
    if u == 0.0 {
        return Ok(if j == 0 { (m + 1) as f64 } else { 0.0 });
    }
    if u == 1.0 {
        return Ok(if j == m { (m + 1) as f64 } else { 0.0 });
    }
    if m <= DIRECT_EVAL_MAX_DEGREE {
        Ok(binomial(m, j) * (m + 1) as f64 * math::pow(u, j as f64) * math::pow(1.0 - u, (m - j) as f64))
    } else {
        Ok(beta_density_log(m, j, u))
    }
}

/// Log-space evaluation path, exposed to tests which check that it agrees
/// with the direct product on low degrees.
pub(crate) fn beta_density_log(m: usize, j: usize, u: f64) -> f64 {
    let ln_c = math::ln_factorial(m) - math::ln_factorial(j) - math::ln_factorial(m - j);
    math::exp(
        math::ln((m + 1) as f64) + ln_c + j as f64 * math::ln(u) + (m - j) as f64 * math::ln_1p(-u),
    )
}

/// C(m, j) exactly (fits u128 for every degree on the direct path).
fn binomial(m: usize, j: usize) -> f64 {
    let j = if j > m / 2 { m - j } else { j };
    let mut c: u128 = 1;
    for i in 0..j {
        c = c * (m - i) as u128 / (i + 1) as u128;
    }
    c as f64
}

/// Basis survival `1 - I_u(j+1, m-j+1)`, the mass of the beta(j+1, m-j+1)
/// kernel beyond u.
pub fn beta_survival(m: usize, j: usize, u: f64) -> Result<f64> {
    check_index(m, j)?;
    check_unit(u, "basis argument")?;
    Ok(1.0 - math::inc_beta((j + 1) as f64, (m - j + 1) as f64, u))
}

/// Per-degree scratch for evaluating whole basis vectors.
///
/// Holds the ln-factorial prefix table up to m+1 so repeated evaluations
/// (one per observation per gamma update) cost O(m) multiplications and a
/// single exp each.
#[derive(Debug, Clone)]
pub(crate) struct BasisTables {
    m: usize,
    lnfact: Vec<f64>,
}

impl BasisTables {
    pub(crate) fn new(m: usize) -> Self {
        BasisTables { m, lnfact: math::ln_factorial_table(m + 1) }
    }

    /// All m+1 basis densities at u, written into `out`.
    ///
    /// Binomial pmf anchored at its mode and unrolled by the ratio
    /// recurrence; entries far from the mode underflow to zero harmlessly.
    pub(crate) fn density_into(&self, u: f64, out: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(out.len(), m + 1);
        let scale = (m + 1) as f64;
        if u == 0.0 {
            out.fill(0.0);
            out[0] = scale;
            return;
        }
        if u == 1.0 {
            out.fill(0.0);
            out[m] = scale;
            return;
        }
        binomial_pmf_into(&self.lnfact, m, u, out);
        for v in out.iter_mut() {
            *v *= scale;
        }
    }

    /// All m+1 basis survivals at u (cumulative binomial identity:
    /// `beta_survival(m, j, u) = P(Bin(m+1, u) <= j)`), written into `out`.
    pub(crate) fn survival_into(&self, u: f64, out: &mut [f64]) {
        let m = self.m;
        debug_assert_eq!(out.len(), m + 1);
        if u <= 0.0 {
            out.fill(1.0);
            return;
        }
        if u >= 1.0 {
            out.fill(0.0);
            return;
        }
        let mut pmf = vec![0.0; m + 2];
        binomial_pmf_into(&self.lnfact, m + 1, u, &mut pmf);
        let mut acc = 0.0;
        for j in 0..=m {
            acc += pmf[j];
            out[j] = acc.min(1.0);
        }
    }
}

/// Binomial(n, u) pmf for all outcomes, mode-anchored for stability.
fn binomial_pmf_into(lnfact: &[f64], n: usize, u: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n + 1);
    debug_assert!(u > 0.0 && u < 1.0);
    let mode = (((n + 1) as f64 * u) as usize).min(n);
    let ln_anchor = math::ln_binomial(lnfact, n, mode)
        + mode as f64 * math::ln(u)
        + (n - mode) as f64 * math::ln_1p(-u);
    let anchor = math::exp(ln_anchor);
    out[mode] = anchor;
    let odds = u / (1.0 - u);
    let mut v = anchor;
    for j in mode..n {
        v *= (n - j) as f64 / (j + 1) as f64 * odds;
        out[j + 1] = v;
    }
    v = anchor;
    for j in (1..=mode).rev() {
        v *= j as f64 / (n - j + 1) as f64 / odds;
        out[j - 1] = v;
    }
}

/// All m+1 basis densities and survivals at u in one pass.
pub fn basis_vectors(m: usize, u: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_unit(u, "basis argument")?;
    let tables = BasisTables::new(m);
    let mut dens = vec![0.0; m + 1];
    let mut surv = vec![0.0; m + 1];
    tables.density_into(u, &mut dens);
    tables.survival_into(u, &mut surv);
    Ok((dens, surv))
}

/// A Bernstein polynomial density model on `[0, tau]`: degree m, truncation
/// time tau, and simplex weights over the m+1 beta kernels.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BernsteinModel {
    degree: usize,
    tau: f64,
    weights: Vec<f64>,
}

/// Tolerance on the simplex sum at construction.
const WEIGHT_SUM_TOL: f64 = 1e-12;

impl BernsteinModel {
    pub fn new(degree: usize, tau: f64, weights: Vec<f64>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain { what: "truncation time", value: tau });
        }
        if weights.len() != degree + 1 {
            return Err(Error::InvalidWeights("length must be degree + 1"));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidWeights("negative or NaN entry"));
        }
        let sum: f64 = weights.iter().sum();
        if math::abs(sum - 1.0) > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights("entries must sum to 1"));
        }
        Ok(BernsteinModel { degree, tau, weights })
    }

    /// The uniform-weight model (a flat density on `[0, tau]`).
    pub fn uniform(degree: usize, tau: f64) -> Self {
        let w = 1.0 / (degree + 1) as f64;
        BernsteinModel { degree, tau, weights: vec![w; degree + 1] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mixture density `(1/tau) sum_j p_j beta_density(m, j, t/tau)`.
    pub fn density(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.tau).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        let tables = BasisTables::new(self.degree);
        let mut dens = vec![0.0; self.degree + 1];
        tables.density_into(t / self.tau, &mut dens);
        Ok(dot(&self.weights, &dens) / self.tau)
    }

    /// Mixture survival `sum_j p_j beta_survival(m, j, t/tau)`.
    ///
    /// Times beyond tau return exactly 0: the model places no mass past the
    /// truncation point, which is what right-censored likelihood terms rely on.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain { what: "time", value: t });
        }
        if t > self.tau {
            return Ok(0.0);
        }
        let tables = BasisTables::new(self.degree);
        let mut surv = vec![0.0; self.degree + 1];
        tables.survival_into(t / self.tau, &mut surv);
        Ok(dot(&self.weights, &surv).clamp(0.0, 1.0))
    }

    /// Mixture density with its first two derivatives in t.
    ///
    /// Uses the Bernstein derivative identity: the derivative of a degree-m
    /// mixture is a signed combination of degree-(m-1) basis densities, and
    /// likewise once more for the second derivative.
    pub fn density_derivatives(&self, t: f64) -> Result<(f64, f64, f64)> {
        if !(0.0..=self.tau).contains(&t) {
            return Err(Error::Domain { what: "time", value: t });
        }
        let eval = MixtureDerivatives::new(&self.weights);
        let (g, g1, g2) = eval.at(t / self.tau);
        let tau = self.tau;
        Ok((g / tau, g1 / (tau * tau), g2 / (tau * tau * tau)))
    }
}

/// Difference coefficients for the first two derivatives of a mixture with
/// fixed weights, on the unit interval (tau = 1).
///
/// `g(u) = sum_j p_j beta_density(m, j, u)`,
/// `g'(u) = sum_i d1_i beta_density(m-1, i, u)` with
/// `d1_i = (m+1)(p_{i+1} - p_i)`, and
/// `g''(u) = sum_i d2_i beta_density(m-2, i, u)` with
/// `d2_i = (m+1) m (p_{i+2} - 2 p_{i+1} + p_i)`.
#[derive(Debug, Clone)]
pub(crate) struct MixtureDerivatives {
    weights: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    tables: BasisTables,
    tables1: Option<BasisTables>,
    tables2: Option<BasisTables>,
}

impl MixtureDerivatives {
    pub(crate) fn new(weights: &[f64]) -> Self {
        let m = weights.len() - 1;
        let mf = m as f64;
        let d1: Vec<f64> = (0..m).map(|i| (mf + 1.0) * (weights[i + 1] - weights[i])).collect();
        let d2: Vec<f64> = (0..m.saturating_sub(1))
            .map(|i| (mf + 1.0) * mf * (weights[i + 2] - 2.0 * weights[i + 1] + weights[i]))
            .collect();
        MixtureDerivatives {
            weights: weights.to_vec(),
            d1,
            d2,
            tables: BasisTables::new(m),
            tables1: if m >= 1 { Some(BasisTables::new(m - 1)) } else { None },
            tables2: if m >= 2 { Some(BasisTables::new(m - 2)) } else { None },
        }
    }

    /// (g, g', g'') at u in [0, 1].
    pub(crate) fn at(&self, u: f64) -> (f64, f64, f64) {
        let m = self.weights.len() - 1;
        let mut buf = vec![0.0; m + 1];
        self.tables.density_into(u, &mut buf);
        let g = dot(&self.weights, &buf);
        let g1 = match &self.tables1 {
            Some(t) => {
                t.density_into(u, &mut buf[..m]);
                dot(&self.d1, &buf[..m])
            }
            None => 0.0,
        };
        let g2 = match &self.tables2 {
            Some(t) => {
                t.density_into(u, &mut buf[..m - 1]);
                dot(&self.d2, &buf[..m - 1])
            }
            None => 0.0,
        };
        (g, g1, g2)
    }

    /// Density value only.
    pub(crate) fn value(&self, u: f64) -> f64 {
        let m = self.weights.len() - 1;
        let mut buf = vec![0.0; m + 1];
        self.tables.density_into(u, &mut buf);
        dot(&self.weights, &buf)
    }

    /// (g, g') only.
    pub(crate) fn value_d1(&self, u: f64) -> (f64, f64) {
        let m = self.weights.len() - 1;
        let mut buf = vec![0.0; m + 1];
        self.tables.density_into(u, &mut buf);
        let g = dot(&self.weights, &buf);
        let g1 = match &self.tables1 {
            Some(t) => {
                t.density_into(u, &mut buf[..m]);
                dot(&self.d1, &buf[..m])
            }
            None => 0.0,
        };
        (g, g1)
    }

    /// Mixture survival at u (1 for u <= 0, 0 for u >= 1).
    pub(crate) fn survival(&self, u: f64) -> f64 {
        let m = self.weights.len() - 1;
        let mut buf = vec![0.0; m + 1];
        self.tables.survival_into(u, &mut buf);
        dot(&self.weights, &buf).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn density_edges_and_closed_forms() {
        // beta_density(m, 0, 0) = m + 1
        assert_eq!(beta_density(5, 0, 0.0).unwrap(), 6.0);
        // 3 * 2 * 0.5 * 0.5
        assert_relative_eq!(beta_density(2, 1, 0.5).unwrap(), 1.5, max_relative = 1e-15);
        assert_eq!(beta_density(4, 2, 0.0).unwrap(), 0.0);
        assert_eq!(beta_density(4, 4, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn density_rejects_bad_arguments() {
        assert!(matches!(beta_density(3, 4, 0.5), Err(Error::BasisIndex { .. })));
        assert!(matches!(beta_density(3, 1, -0.1), Err(Error::Domain { .. })));
        assert!(matches!(beta_density(3, 1, 1.1), Err(Error::Domain { .. })));
    }

    #[test]
    fn log_and_direct_paths_agree() {
        for m in [1usize, 5, 12, 30] {
            for j in 0..=m {
                for &u in &[0.01, 0.2, 0.5, 0.9, 0.999] {
                    let direct = beta_density(m, j, u).unwrap();
                    let logged = beta_density_log(m, j, u);
                    assert_relative_eq!(direct, logged, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn survival_closed_forms() {
        assert_eq!(beta_survival(7, 3, 0.0).unwrap(), 1.0);
        assert_eq!(beta_survival(7, 3, 1.0).unwrap(), 0.0);
        // m = 1, j = 0: survival is (1-u)^2
        assert_relative_eq!(beta_survival(1, 0, 0.5).unwrap(), 0.25, max_relative = 1e-13);
        // m = 1, j = 1: survival is 1 - u^2
        assert_relative_eq!(beta_survival(1, 1, 0.5).unwrap(), 0.75, max_relative = 1e-13);
    }

    #[test]
    fn vectors_match_scalar_calls() {
        for &(m, u) in &[(0usize, 0.7), (1, 0.5), (25, 0.123), (40, 0.9), (60, 0.4)] {
            let (dens, surv) = basis_vectors(m, u).unwrap();
            for j in 0..=m {
                assert_relative_eq!(
                    dens[j],
                    beta_density(m, j, u).unwrap(),
                    max_relative = 1e-10,
                    epsilon = 1e-12
                );
                assert_relative_eq!(
                    surv[j],
                    beta_survival(m, j, u).unwrap(),
                    max_relative = 1e-9,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn density_vector_sums_to_m_plus_one() {
        for m in [0usize, 1, 3, 10, 25, 50] {
            for i in 0..=20 {
                let u = i as f64 / 20.0;
                let (dens, _) = basis_vectors(m, u).unwrap();
                let sum: f64 = dens.iter().sum();
                assert_relative_eq!(sum, (m + 1) as f64, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn uniform_mixture_is_flat() {
        let model = BernsteinModel::uniform(6, 4.0);
        for &t in &[0.0, 0.4, 1.7, 3.99, 4.0] {
            assert_relative_eq!(model.density(t).unwrap(), 0.25, max_relative = 1e-12);
        }
        let (_, d1, _) = model.density_derivatives(1.3).unwrap();
        assert_relative_eq!(d1, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_kernel_model_closed_form() {
        // p = (1, 0), tau = 1: density 2(1-t), survival (1-t)^2
        let model = BernsteinModel::new(1, 1.0, vec![1.0, 0.0]).unwrap();
        assert_relative_eq!(model.density(0.5).unwrap(), 1.0, max_relative = 1e-13);
        assert_relative_eq!(model.survival(0.5).unwrap(), 0.25, max_relative = 1e-13);
        let (f, f1, f2) = model.density_derivatives(0.3).unwrap();
        assert_relative_eq!(f, 1.4, max_relative = 1e-13);
        assert_relative_eq!(f1, -2.0, max_relative = 1e-13);
        assert_relative_eq!(f2, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn survival_is_zero_beyond_tau_and_one_at_zero() {
        let model = BernsteinModel::new(3, 2.0, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(model.survival(0.0).unwrap(), 1.0);
        assert_eq!(model.survival(2.5).unwrap(), 0.0);
        assert!(model.survival(-0.1).is_err());
    }

    #[test]
    fn model_construction_validates() {
        assert!(BernsteinModel::new(1, 1.0, vec![0.5, 0.6]).is_err());
        assert!(BernsteinModel::new(1, 1.0, vec![1.2, -0.2]).is_err());
        assert!(BernsteinModel::new(1, 0.0, vec![0.5, 0.5]).is_err());
        assert!(BernsteinModel::new(2, 1.0, vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn m_zero_vectors() {
        let (dens, surv) = basis_vectors(0, 0.7).unwrap();
        assert_eq!(dens, vec![1.0]);
        assert_relative_eq!(surv[0], 0.3, max_relative = 1e-13);
    }
}
