//! The approximate Bernstein loglikelihood and its derivatives.
//!
//! Everything here works on a rescaled dataset (tau = 1 internally): an
//! exact observation contributes `-g'x + log f_m(y e^{-g'x}; p)` and a
//! censored one contributes `log{S_m(u1; p) - S_m(u2; p)}` with
//! `u_k = y_k e^{-g'x}`. Right-censored terms use `S_m(u2) = 0`.
//!
//! Out-of-support handling: survival arguments are clamped to 1 (the model
//! has no mass past the truncation point), and an exact observation whose
//! argument lands beyond 1 picks up the linear penalty
//! `-OUT_OF_SUPPORT_PENALTY * (u - 1)` on top of a floored log density, so
//! the objective stays finite and pushes iterates back into the feasible
//! region. The analytic gamma derivatives below differentiate exactly this
//! clamped-and-penalized objective.

use crate::basis::{BasisTables, MixtureDerivatives};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::math;
use alloc::vec;
use alloc::vec::Vec;

/// Slope of the linear penalty applied to exact observations with
/// `y e^{-g'x} > 1`.
pub const OUT_OF_SUPPORT_PENALTY: f64 = 1e10;

/// Densities and interval probabilities below this are treated as zero and
/// flag the loglikelihood as -inf.
const PROB_FLOOR: f64 = 1e-300;

/// How a right-censored observation enters the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RightCensoring {
    /// `S(y2) = 0`: the term is the full upper tail `S(y1 e^{-g'x})`.
    #[default]
    Open,
    /// `y2 = tau`: the event is taken to happen by the truncation horizon,
    /// so the term is `S(y1 e^{-g'x}) - S(e^{-g'x})` (on the rescaled
    /// time axis the horizon is 1). For covariates with `g'x > 0` the
    /// subtracted survival is positive, which restrains the coefficients
    /// from running off along right-censored subjects.
    HorizonTau,
}

/// Per-observation basis evaluations cached at one fixed gamma.
///
/// The fixed-point iteration for the weights repeatedly evaluates the
/// likelihood and its weight gradient at the same gamma; everything that
/// does not depend on `p` lives here.
pub struct LikelihoodCache<'a> {
    data: &'a Dataset,
    degree: usize,
    gamma: Vec<f64>,
    terms: Vec<Term>,
}

enum Term {
    /// Exact observation: raw argument `u` (possibly > 1) and the basis
    /// density vector at the clamped argument.
    Exact { eta: f64, u: f64, basis: Vec<f64> },
    /// Censored observation: `dbar[j] = beta_survival(m, j, u1) -
    /// beta_survival(m, j, u2)` with clamped arguments (zero beyond 1, and
    /// zero for the right-censored upper end).
    Censored { dbar: Vec<f64> },
}

impl<'a> LikelihoodCache<'a> {
    pub fn new(data: &'a Dataset, degree: usize, gamma: &[f64]) -> Result<Self> {
        Self::with_convention(data, degree, gamma, RightCensoring::Open)
    }

    pub fn with_convention(
        data: &'a Dataset,
        degree: usize,
        gamma: &[f64],
        right: RightCensoring,
    ) -> Result<Self> {
        if !data.is_rescaled() {
            return Err(Error::NotRescaled);
        }
        if gamma.len() != data.covariate_dim() {
            return Err(Error::DimensionMismatch {
                expected: data.covariate_dim(),
                found: gamma.len(),
            });
        }
        let tables = BasisTables::new(degree);
        let mut terms = Vec::with_capacity(data.len());
        let mut surv1 = vec![0.0; degree + 1];
        let mut surv2 = vec![0.0; degree + 1];
        for obs in data.observations() {
            let eta = dot(gamma, &obs.x);
            let w = math::exp(-eta);
            if obs.censored {
                let u1 = obs.y1 * w;
                let u2 = effective_y2(obs.y2, right) * w;
                tables.survival_into(u1.min(1.0), &mut surv1);
                if u2.is_finite() && u2 < 1.0 {
                    tables.survival_into(u2, &mut surv2);
                } else {
                    surv2.fill(0.0);
                }
                let dbar: Vec<f64> =
                    surv1.iter().zip(&surv2).map(|(a, b)| (a - b).max(0.0)).collect();
                terms.push(Term::Censored { dbar });
            } else {
                let u = obs.y1 * w;
                let mut basis = vec![0.0; degree + 1];
                tables.density_into(u.min(1.0), &mut basis);
                terms.push(Term::Exact { eta, u, basis });
            }
        }
        Ok(LikelihoodCache { data, degree, gamma: gamma.to_vec(), terms })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn dataset(&self) -> &Dataset {
        self.data
    }

    /// Loglikelihood at weights `p`; `-inf` when any exact observation has
    /// zero density or any censored interval has zero probability.
    pub fn loglik(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.degree + 1);
        let mut ll = 0.0;
        for term in &self.terms {
            match term {
                Term::Exact { eta, u, basis } => {
                    let f = dot(p, basis);
                    if *u > 1.0 {
                        ll += -eta + math::ln(f.max(PROB_FLOOR))
                            - OUT_OF_SUPPORT_PENALTY * (u - 1.0);
                    } else {
                        if f < PROB_FLOOR {
                            return f64::NEG_INFINITY;
                        }
                        ll += -eta + math::ln(f);
                    }
                }
                Term::Censored { dbar } => {
                    let ds = dot(p, dbar);
                    if ds < PROB_FLOOR {
                        return f64::NEG_INFINITY;
                    }
                    ll += math::ln(ds);
                }
            }
        }
        ll
    }

    /// Loglikelihood and the Psi vector in one pass.
    ///
    /// `Psi_j = (1/n) sum_i d l_m(g, p; z_i) / d p_j`; each observation
    /// contributes `basis_j / f` (exact) or `dbar_j / dS` (censored), so
    /// `sum_j p_j Psi_j = 1` identically.
    pub fn loglik_and_psi(&self, p: &[f64]) -> (f64, Vec<f64>) {
        debug_assert_eq!(p.len(), self.degree + 1);
        let n = self.terms.len() as f64;
        let mut psi = vec![0.0; self.degree + 1];
        let mut ll = 0.0;
        for term in &self.terms {
            match term {
                Term::Exact { eta, u, basis } => {
                    let f = dot(p, basis).max(PROB_FLOOR);
                    if *u > 1.0 {
                        ll += -eta + math::ln(f) - OUT_OF_SUPPORT_PENALTY * (u - 1.0);
                    } else {
                        ll += -eta + math::ln(f);
                        if f <= PROB_FLOOR {
                            ll = f64::NEG_INFINITY;
                        }
                    }
                    let inv = 1.0 / (f * n);
                    for j in 0..=self.degree {
                        psi[j] += basis[j] * inv;
                    }
                }
                Term::Censored { dbar } => {
                    let ds = dot(p, dbar).max(PROB_FLOOR);
                    ll += math::ln(ds);
                    if ds <= PROB_FLOOR {
                        ll = f64::NEG_INFINITY;
                    }
                    let inv = 1.0 / (ds * n);
                    for j in 0..=self.degree {
                        psi[j] += dbar[j] * inv;
                    }
                }
            }
        }
        (ll, psi)
    }

    /// The Psi vector alone.
    pub fn psi(&self, p: &[f64]) -> Vec<f64> {
        self.loglik_and_psi(p).1
    }

    /// Hessian of the loglikelihood in the weights: the negated sum of
    /// per-observation outer products, symmetric and negative semidefinite.
    pub fn hessian_p(&self, p: &[f64]) -> Matrix {
        debug_assert_eq!(p.len(), self.degree + 1);
        let k = self.degree + 1;
        let mut h = Matrix::zeros(k, k);
        for term in &self.terms {
            let (v, denom) = match term {
                Term::Exact { basis, .. } => (basis, dot(p, basis).max(PROB_FLOOR)),
                Term::Censored { dbar } => (dbar, dot(p, dbar).max(PROB_FLOOR)),
            };
            let inv2 = 1.0 / (denom * denom);
            for a in 0..k {
                if v[a] == 0.0 {
                    continue;
                }
                let va = v[a] * inv2;
                for b in 0..k {
                    h[(a, b)] -= va * v[b];
                }
            }
        }
        h
    }
}

/// Loglikelihood of a rescaled dataset at `(gamma, p)`.
pub fn loglik(data: &Dataset, gamma: &[f64], p: &[f64]) -> Result<f64> {
    check_p(p)?;
    Ok(LikelihoodCache::new(data, p.len() - 1, gamma)?.loglik(p))
}

/// Psi vector at `(gamma, p)`.
pub fn psi(data: &Dataset, gamma: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    check_p(p)?;
    Ok(LikelihoodCache::new(data, p.len() - 1, gamma)?.psi(p))
}

/// Weight Hessian at `(gamma, p)`.
pub fn hessian_p(data: &Dataset, gamma: &[f64], p: &[f64]) -> Result<Matrix> {
    check_p(p)?;
    Ok(LikelihoodCache::new(data, p.len() - 1, gamma)?.hessian_p(p))
}

/// Gradient of the loglikelihood in gamma.
pub fn grad_gamma(data: &Dataset, gamma: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    check_p(p)?;
    let eval = MixtureDerivatives::new(p);
    gamma_pass(data, gamma, &eval, false, RightCensoring::Open).map(|(_, g, _)| g)
}

/// Hessian of the loglikelihood in gamma (the observed-information matrix
/// used for the variance of the regression estimate).
pub fn hessian_gamma(data: &Dataset, gamma: &[f64], p: &[f64]) -> Result<Matrix> {
    check_p(p)?;
    hessian_gamma_with(data, gamma, p, RightCensoring::Open)
}

/// `hessian_gamma` under an explicit right-censoring convention, so the
/// variance matrix can match the convention the fit used.
pub fn hessian_gamma_with(
    data: &Dataset,
    gamma: &[f64],
    p: &[f64],
    right: RightCensoring,
) -> Result<Matrix> {
    check_p(p)?;
    let eval = MixtureDerivatives::new(p);
    gamma_pass(data, gamma, &eval, true, right).map(|(_, _, h)| h.expect("hessian requested"))
}

fn check_p(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidWeights("empty weight vector"));
    }
    if p.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidWeights("negative or NaN entry"));
    }
    Ok(())
}

/// Upper endpoint seen by the likelihood; on the rescaled axis the
/// truncation horizon is 1.
#[inline]
fn effective_y2(y2: f64, right: RightCensoring) -> f64 {
    if y2.is_finite() {
        y2
    } else {
        match right {
            RightCensoring::Open => f64::INFINITY,
            RightCensoring::HorizonTau => 1.0,
        }
    }
}

/// One pass over the data computing the loglikelihood, its gamma gradient,
/// and optionally the gamma Hessian, for fixed weights.
///
/// Derivative forms: for an exact observation with argument `u = y e^{-g'x}`
/// inside the support,
/// `d l / d g = -(1 + u f'/f) x` and
/// `d2 l / d g d g' = {u f'/f + u^2 (f f'' - f'^2) / f^2} x x'`;
/// for a censored observation with `A = u1 f(u1)`, `B = u2 f(u2)`,
/// `D = S(u1) - S(u2)`,
/// `d l / d g = {(A - B)/D} x` and
/// `d2 l / d g d g' = -{(A - B)/D + (A - B)^2/D^2 +
///   (u1^2 f'(u1) - u2^2 f'(u2))/D} x x'`,
/// where terms whose argument is clamped (>= 1, or right-censored) drop out
/// because the clamped survival is constant there.
pub(crate) fn gamma_pass(
    data: &Dataset,
    gamma: &[f64],
    eval: &MixtureDerivatives,
    want_hessian: bool,
    right: RightCensoring,
) -> Result<(f64, Vec<f64>, Option<Matrix>)> {
    if !data.is_rescaled() {
        return Err(Error::NotRescaled);
    }
    let d = data.covariate_dim();
    if gamma.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: gamma.len() });
    }
    let mut ll = 0.0;
    let mut grad = vec![0.0; d];
    let mut hess = if want_hessian { Some(Matrix::zeros(d, d)) } else { None };

    for obs in data.observations() {
        let eta = dot(gamma, &obs.x);
        let w = math::exp(-eta);
        // scalar multiplying x (gradient) and x x' (Hessian) for this row
        let (g_coef, h_coef);
        if !obs.censored {
            let u = obs.y1 * w;
            if u > 1.0 {
                let f = eval.value(1.0).max(PROB_FLOOR);
                ll += -eta + math::ln(f) - OUT_OF_SUPPORT_PENALTY * (u - 1.0);
                g_coef = OUT_OF_SUPPORT_PENALTY * u;
                h_coef = -OUT_OF_SUPPORT_PENALTY * u;
            } else {
                let (f, f1, f2) = eval.at(u);
                if f < PROB_FLOOR {
                    return Err(Error::DegenerateStart);
                }
                ll += -eta + math::ln(f);
                let r1 = u * f1 / f;
                g_coef = -(1.0 + r1);
                h_coef = r1 + u * u * (f * f2 - f1 * f1) / (f * f);
            }
        } else {
            let u1 = obs.y1 * w;
            let u2 = effective_y2(obs.y2, right) * w;
            let (s1, a_val, a_slope) = if u1 >= 1.0 {
                (0.0, 0.0, 0.0)
            } else {
                let (f, f1) = eval.value_d1(u1);
                (eval.survival(u1), u1 * f, u1 * u1 * f1)
            };
            let (s2, b_val, b_slope) = if !u2.is_finite() || u2 >= 1.0 {
                (0.0, 0.0, 0.0)
            } else {
                let (f, f1) = eval.value_d1(u2);
                (eval.survival(u2), u2 * f, u2 * u2 * f1)
            };
            let ds = s1 - s2;
            if ds < PROB_FLOOR {
                return Err(Error::DegenerateStart);
            }
            ll += math::ln(ds);
            let ratio = (a_val - b_val) / ds;
            g_coef = ratio;
            h_coef = -(ratio + ratio * ratio + (a_slope - b_slope) / ds);
        }
        for k in 0..d {
            grad[k] += g_coef * obs.x[k];
        }
        if let Some(h) = hess.as_mut() {
            for a in 0..d {
                let xa = obs.x[a] * h_coef;
                for b in 0..d {
                    h[(a, b)] += xa * obs.x[b];
                }
            }
        }
    }
    Ok((ll, grad, hess))
}
