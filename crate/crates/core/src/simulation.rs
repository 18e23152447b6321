//! Monte Carlo harness: data generation for the censoring designs, a
//! parametric Weibull AFT maximum likelihood comparator, and rMSE/rMISE
//! scoring of fitted baselines against the generating truth.
//!
//! Event times follow the AFT model with a Weibull baseline:
//! `T = e^{g'x} * scale * (-ln U)^{1/shape}`. Covariates are the two-column
//! design `X1 ~ uniform(-1, 1)`, `X2 = +/-1`. Replication `r` of a design
//! draws from an independent, reproducible RNG substream, so replications
//! can be farmed out across threads without changing any result.

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::inference::predict_density;
use crate::inference::predict_survival;
use crate::linalg::{self, dot, inf_norm, Matrix};
use crate::math;
use crate::optimizer::{mable_aft, FitConfig};
use crate::rng::SimRng;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// How event times are censored into observations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum CensoringScheme {
    /// Uncensored: every observation is exact.
    Case0,
    /// Current status: one examination time `U ~ uniform(0, exam_max)`;
    /// the observation is `(0, U]` or `(U, inf)`.
    Case1 { exam_max: f64 },
    /// `inspections` examination times built from uniform(0, 2*inspect_len)
    /// gaps (mean gap `inspect_len`). With probability `cen_prob` the event
    /// is reported as the bracketing inspection interval (`(last, inf)`
    /// beyond the schedule), otherwise exactly.
    CaseK { inspections: usize, inspect_len: f64, cen_prob: f64 },
    /// Right censoring at `C ~ uniform(0, upper)`: exact if `T <= C`,
    /// else `(C, inf)`.
    Right { upper: f64 },
}

/// One Monte Carlo design.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SimDesign {
    pub n: usize,
    pub gamma_true: Vec<f64>,
    /// Baseline Weibull shape at x = 0.
    pub shape: f64,
    /// Baseline Weibull scale at x = 0.
    pub scale: f64,
    pub scheme: CensoringScheme,
    pub replications: usize,
    pub seed: u64,
    /// Nominal truncation time, also the upper limit of the rMISE grid.
    pub tau: f64,
}

impl SimDesign {
    /// The two-covariate design: baseline Weibull(2, 2), coefficients
    /// (0.5, -0.5), truncation time 12.
    pub fn standard(n: usize, scheme: CensoringScheme, replications: usize, seed: u64) -> Self {
        SimDesign {
            n,
            gamma_true: vec![0.5, -0.5],
            shape: 2.0,
            scale: 2.0,
            scheme,
            replications,
            seed,
            tau: 12.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidDesign("sample size must be at least 2"));
        }
        if self.gamma_true.len() != 2 {
            return Err(Error::InvalidDesign("the covariate design is two-dimensional"));
        }
        if !(self.shape > 0.0 && self.scale > 0.0 && self.tau > 0.0) {
            return Err(Error::InvalidDesign("shape, scale, and tau must be positive"));
        }
        if self.replications == 0 {
            return Err(Error::InvalidDesign("need at least one replication"));
        }
        match self.scheme {
            CensoringScheme::Case1 { exam_max } if !(exam_max > 0.0) => {
                Err(Error::InvalidDesign("examination-time bound must be positive"))
            }
            CensoringScheme::CaseK { inspections, inspect_len, cen_prob } => {
                if inspections == 0 {
                    Err(Error::InvalidDesign("need at least one inspection"))
                } else if !(inspect_len > 0.0) {
                    Err(Error::InvalidDesign("inspection length must be positive"))
                } else if !(0.0..=1.0).contains(&cen_prob) {
                    Err(Error::InvalidDesign("censoring probability must be in [0, 1]"))
                } else {
                    Ok(())
                }
            }
            CensoringScheme::Right { upper } if !(upper > 0.0) => {
                Err(Error::InvalidDesign("right-censoring bound must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// The paper's current-status examination bound: uniform(0, 3.66) splits
/// censoring sides 50/50 under the standard design.
pub const CASE1_EXAM_MAX: f64 = 3.66;

/// n x 2 covariate draw: column 1 uniform(-1, 1), column 2 equiprobable +/-1.
pub fn gen_covariates(n: usize, rng: &mut SimRng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let x1 = rng.uniform_in(-1.0, 1.0);
            let x2 = rng.sign();
            vec![x1, x2]
        })
        .collect()
}

/// Event times `T_i = e^{g'x_i} * scale * (-ln U_i)^{1/shape}`.
pub fn gen_event_times(
    x: &[Vec<f64>],
    gamma_true: &[f64],
    shape: f64,
    scale: f64,
    rng: &mut SimRng,
) -> Vec<f64> {
    x.iter()
        .map(|xi| {
            let u = rng.uniform_open0();
            math::exp(dot(gamma_true, xi)) * scale * math::pow(-math::ln(u), 1.0 / shape)
        })
        .collect()
}

/// Censor event times into observations according to `scheme`.
pub fn apply_censoring(
    times: &[f64],
    x: &[Vec<f64>],
    scheme: CensoringScheme,
    rng: &mut SimRng,
) -> Vec<Observation> {
    debug_assert_eq!(times.len(), x.len());
    times
        .iter()
        .zip(x)
        .map(|(&t, xi)| match scheme {
            CensoringScheme::Case0 => Observation::exact(t, xi.clone()),
            CensoringScheme::Case1 { exam_max } => {
                let u = rng.uniform_in(0.0, exam_max);
                if t <= u {
                    Observation::censored(0.0, u, xi.clone())
                } else {
                    Observation::censored(u, f64::INFINITY, xi.clone())
                }
            }
            CensoringScheme::CaseK { inspections, inspect_len, cen_prob } => {
                let mut schedule = Vec::with_capacity(inspections);
                let mut s = 0.0;
                for _ in 0..inspections {
                    s += rng.uniform_in(0.0, 2.0 * inspect_len);
                    schedule.push(s);
                }
                let censored = rng.uniform() < cen_prob;
                if !censored {
                    return Observation::exact(t, xi.clone());
                }
                let mut lower = 0.0;
                for &exam in &schedule {
                    if t <= exam {
                        return Observation::censored(lower, exam, xi.clone());
                    }
                    lower = exam;
                }
                Observation::censored(lower, f64::INFINITY, xi.clone())
            }
            CensoringScheme::Right { upper } => {
                let c = rng.uniform_in(0.0, upper);
                if t <= c {
                    Observation::exact(t, xi.clone())
                } else {
                    Observation::censored(c, f64::INFINITY, xi.clone())
                }
            }
        })
        .collect()
}

/// Generate the dataset of one replication (deterministic in
/// `(design.seed, replication)`).
pub fn simulate_dataset(design: &SimDesign, replication: u64) -> Result<Dataset> {
    design.validate()?;
    let mut rng = SimRng::for_replication(design.seed, replication);
    let x = gen_covariates(design.n, &mut rng);
    let times = gen_event_times(&x, &design.gamma_true, design.shape, design.scale, &mut rng);
    let obs = apply_censoring(&times, &x, design.scheme, &mut rng);
    Dataset::new(obs)
}

/// Number of draws behind the censoring-rate calibration.
const CALIBRATION_DRAWS: usize = 1_000_000;

/// Solve `P(C < T) = target_rate` for the uniform(0, c) right-censoring
/// bound by bisection on a Monte Carlo estimate of the rate.
///
/// `P(C < T | T) = min(T / c, 1)` is monotone decreasing in c, so a fixed
/// pool of 10^6 event-time draws turns the calibration into a
/// one-dimensional root find, deterministic given the seed.
pub fn calibrate_right_censoring(design: &SimDesign, target_rate: f64) -> Result<f64> {
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(Error::InvalidDesign("target censoring rate must be in (0, 1)"));
    }
    design.validate()?;
    let mut rng = SimRng::new(design.seed);
    let mut draws = Vec::with_capacity(CALIBRATION_DRAWS);
    let mut xi = vec![0.0; 2];
    for _ in 0..CALIBRATION_DRAWS {
        xi[0] = rng.uniform_in(-1.0, 1.0);
        xi[1] = rng.sign();
        let u = rng.uniform_open0();
        let t = math::exp(dot(&design.gamma_true, &xi))
            * design.scale
            * math::pow(-math::ln(u), 1.0 / design.shape);
        draws.push(t);
    }
    let rate_at = |c: f64| -> f64 {
        let total: f64 = draws.iter().map(|&t| (t / c).min(1.0)).sum();
        total / draws.len() as f64
    };
    let mut lo = 1e-9;
    let mut hi = 1.0;
    let mut guard = 0;
    while rate_at(hi) > target_rate {
        hi *= 2.0;
        guard += 1;
        if guard > 80 {
            return Err(Error::CalibrationBracket { target: target_rate });
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid) > target_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fit of the parametric Weibull AFT model by maximum likelihood.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct WeibullAftFit {
    pub gamma: Vec<f64>,
    pub shape: f64,
    pub scale: f64,
    pub loglik: f64,
    pub converged: bool,
    pub gradient_norm: f64,
}

impl WeibullAftFit {
    pub fn density(&self, t: f64) -> f64 {
        weibull_density(t.max(1e-12), self.shape, self.scale)
    }

    pub fn survival(&self, t: f64) -> f64 {
        math::exp(-math::pow(t / self.scale, self.shape))
    }
}

fn weibull_density(t: f64, shape: f64, scale: f64) -> f64 {
    let z = t / scale;
    shape / scale * math::pow(z, shape - 1.0) * math::exp(-math::pow(z, shape))
}

/// Loglikelihood and gradient of the Weibull AFT model in the
/// parameterization `theta = (gamma, ln shape, ln scale)`.
///
/// Exact rows contribute the density, censored rows `S(y1) - S(y2)` with
/// `S(t) = exp{-(t e^{-g'x} / scale)^shape}` and `S(inf) = 0`; the
/// survival difference is evaluated as `e^{-A}(1 - e^{-(B-A)})` to stay
/// stable when both tails are small.
fn weibull_loglik_grad(data: &Dataset, theta: &[f64]) -> (f64, Vec<f64>) {
    let d = data.covariate_dim();
    let s = math::exp(theta[d]);
    let b = theta[d + 1];
    let mut ll = 0.0;
    let mut grad = vec![0.0; d + 2];

    for obs in data.observations() {
        let eta = dot(&theta[..d], &obs.x);
        let ln_l = b + eta;
        if !obs.censored {
            let y = obs.y1.max(1e-300);
            let ln_z = math::ln(y) - ln_l;
            let zs = math::exp(s * ln_z);
            ll += theta[d] + (s - 1.0) * math::ln(y) - s * ln_l - zs;
            let dgamma = s * (zs - 1.0);
            for k in 0..d {
                grad[k] += dgamma * obs.x[k];
            }
            grad[d] += 1.0 + s * ln_z * (1.0 - zs);
            grad[d + 1] += dgamma;
        } else {
            // A = (y1/L)^s, B = (y2/L)^s with B = inf for right censoring
            let (a_pow, da_gamma, da_shape, da_scale) = if obs.y1 > 0.0 {
                let ln_z = math::ln(obs.y1) - ln_l;
                let zs = math::exp(s * ln_z);
                (zs, -s * zs, zs * s * ln_z, -s * zs)
            } else {
                (0.0, 0.0, 0.0, 0.0)
            };
            if obs.y2.is_finite() {
                let ln_z2 = math::ln(obs.y2) - ln_l;
                let b_pow = math::exp(s * ln_z2);
                let db_gamma = -s * b_pow;
                let db_shape = b_pow * s * ln_z2;
                let db_scale = -s * b_pow;
                let gap = b_pow - a_pow;
                let q = math::exp(-gap);
                let one_minus_q = -math::expm1(-gap);
                if one_minus_q <= 0.0 {
                    // interval so thin the probability underflows
                    ll += -745.0;
                    continue;
                }
                ll += -a_pow + math::ln(one_minus_q);
                let denom = one_minus_q;
                for k in 0..d {
                    grad[k] += (-da_gamma + q * db_gamma) / denom * obs.x[k];
                }
                grad[d] += (-da_shape + q * db_shape) / denom;
                grad[d + 1] += (-da_scale + q * db_scale) / denom;
            } else {
                ll += -a_pow;
                for k in 0..d {
                    grad[k] += -da_gamma * obs.x[k];
                }
                grad[d] += -da_shape;
                grad[d + 1] += -da_scale;
            }
        }
    }
    (ll, grad)
}

const WEIBULL_GRAD_TOL: f64 = 1e-7;
const WEIBULL_MAXIT: usize = 200;

/// Maximum likelihood fit of the Weibull AFT model to interval-censored
/// data: Newton in `(gamma, ln shape, ln scale)` with a finite-difference
/// Hessian of the analytic gradient, step halving, and a steepest-ascent
/// fallback when the Hessian is not negative definite.
pub fn weibull_aft_mle(data: &Dataset) -> Result<WeibullAftFit> {
    let d = data.covariate_dim();
    let n_upper = data
        .observations()
        .iter()
        .filter(|o| !o.censored || o.y2.is_finite())
        .count();
    if n_upper == 0 {
        // only right-censored rows: the likelihood climbs forever in scale
        return Ok(WeibullAftFit {
            gamma: vec![0.0; d],
            shape: 1.0,
            scale: f64::INFINITY,
            loglik: 0.0,
            converged: false,
            gradient_norm: f64::INFINITY,
        });
    }

    // moment-flavored start: log mean of the informative endpoints
    let mut acc = 0.0;
    let mut count = 0.0;
    for obs in data.observations() {
        let v = if !obs.censored {
            obs.y1
        } else if obs.y2.is_finite() {
            0.5 * (obs.y1 + obs.y2)
        } else {
            obs.y1
        };
        if v > 0.0 {
            acc += v;
            count += 1.0;
        }
    }
    let mean = if count > 0.0 { acc / count } else { 1.0 };
    let mut theta = vec![0.0; d + 2];
    theta[d + 1] = math::ln(mean.max(1e-6));

    let (mut ll, mut grad) = weibull_loglik_grad(data, &theta);
    let mut converged = inf_norm(&grad) < WEIBULL_GRAD_TOL;
    let mut iterations = 0;
    while !converged && iterations < WEIBULL_MAXIT {
        let h = fd_hessian(data, &theta, &grad);
        let neg_h = h.scaled(-1.0);
        let step = match linalg::cholesky(&neg_h) {
            Some(l) => linalg::cholesky_solve(&l, &grad),
            None => {
                let scale = 1.0 / inf_norm(&grad).max(1.0);
                grad.iter().map(|g| g * scale).collect()
            }
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            // keep ln-shape in a numerically sane window
            if trial[d].is_finite() && math::abs(trial[d]) < 12.0 {
                let (ll_new, g_new) = weibull_loglik_grad(data, &trial);
                if ll_new.is_finite() && ll_new >= ll {
                    theta = trial;
                    ll = ll_new;
                    grad = g_new;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        iterations += 1;
        converged = inf_norm(&grad) < WEIBULL_GRAD_TOL;
        if !accepted {
            break;
        }
    }

    Ok(WeibullAftFit {
        gamma: theta[..d].to_vec(),
        shape: math::exp(theta[d]),
        scale: math::exp(theta[d + 1]),
        loglik: ll,
        converged,
        gradient_norm: inf_norm(&grad),
    })
}

/// Central-difference Hessian from the analytic gradient.
fn fd_hessian(data: &Dataset, theta: &[f64], _grad: &[f64]) -> Matrix {
    let p = theta.len();
    let mut h = Matrix::zeros(p, p);
    let mut t = theta.to_vec();
    for k in 0..p {
        let step = 1e-5 * (1.0 + math::abs(theta[k]));
        t[k] = theta[k] + step;
        let (_, gp) = weibull_loglik_grad(data, &t);
        t[k] = theta[k] - step;
        let (_, gm) = weibull_loglik_grad(data, &t);
        t[k] = theta[k];
        for l in 0..p {
            h[(l, k)] = (gp[l] - gm[l]) / (2.0 * step);
        }
    }
    // symmetrize finite-difference noise
    for i in 0..p {
        for j in (i + 1)..p {
            let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = avg;
            h[(j, i)] = avg;
        }
    }
    h
}

/// Root mean (integrated) squared errors over a batch of replications.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Score {
    /// Per-coefficient root mean squared error of gamma-hat.
    pub rmse_gamma: Vec<f64>,
    /// Root mean integrated squared error of the baseline density on
    /// `[0, tau]`.
    pub rmise_density: f64,
    /// Root mean integrated squared error of the baseline survival.
    pub rmise_survival: f64,
}

/// Per-replication errors of one estimator.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EstimatorErrors {
    pub gamma_error: Vec<f64>,
    pub ise_density: f64,
    pub ise_survival: f64,
    pub converged: bool,
}

/// Outcome of one replication: the proposed fit's errors and optionally the
/// parametric comparator's.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ReplicateOutcome {
    pub replication: u64,
    pub proposed: EstimatorErrors,
    pub parametric: Option<EstimatorErrors>,
}

/// Simpson panels of the rMISE integration grid.
pub const MISE_PANELS: usize = 512;

/// Run one replication end to end: simulate, fit the proposed estimator
/// (and the parametric one when `compare` is set), and integrate the
/// baseline errors on the fixed `[0, design.tau]` Simpson grid.
pub fn run_replicate(
    design: &SimDesign,
    replication: u64,
    config: &FitConfig,
    compare: bool,
) -> Result<ReplicateOutcome> {
    let data = simulate_dataset(design, replication)?;
    let d = design.gamma_true.len();

    // the nominal truncation time, pushed up when a sample exceeds it
    let y_max = data.max_finite_endpoint();
    let tau = if y_max >= design.tau {
        crate::data::DEFAULT_TAU_MARGIN * y_max
    } else {
        design.tau
    };
    let fit_config = FitConfig { tau: Some(tau), ..config.clone() };
    let fit = mable_aft(&data, &fit_config)?;

    let grid: Vec<f64> = (0..=MISE_PANELS)
        .map(|i| design.tau * i as f64 / MISE_PANELS as f64)
        .collect();
    let h = design.tau / MISE_PANELS as f64;
    let zeros = vec![0.0; d];
    let fhat = predict_density(&fit, &zeros, &grid)?;
    let shat = predict_survival(&fit, &zeros, &grid)?;
    let sq_err_f: Vec<f64> = grid
        .iter()
        .zip(&fhat)
        .map(|(&t, &fh)| {
            let diff = fh - weibull_density(t.max(1e-300), design.shape, design.scale);
            diff * diff
        })
        .collect();
    let sq_err_s: Vec<f64> = grid
        .iter()
        .zip(&shat)
        .map(|(&t, &sh)| {
            let diff = sh - math::exp(-math::pow(t / design.scale, design.shape));
            diff * diff
        })
        .collect();
    let proposed = EstimatorErrors {
        gamma_error: fit.gamma.iter().zip(&design.gamma_true).map(|(a, b)| a - b).collect(),
        ise_density: math::simpson_samples(&sq_err_f, h),
        ise_survival: math::simpson_samples(&sq_err_s, h),
        converged: fit.diagnostics.outer_converged,
    };

    let parametric = if compare {
        let wfit = weibull_aft_mle(&data)?;
        let sq_err_f: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let diff = wfit.density(t)
                    - weibull_density(t.max(1e-300), design.shape, design.scale);
                diff * diff
            })
            .collect();
        let sq_err_s: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let diff =
                    wfit.survival(t) - math::exp(-math::pow(t / design.scale, design.shape));
                diff * diff
            })
            .collect();
        Some(EstimatorErrors {
            gamma_error: wfit.gamma.iter().zip(&design.gamma_true).map(|(a, b)| a - b).collect(),
            ise_density: math::simpson_samples(&sq_err_f, h),
            ise_survival: math::simpson_samples(&sq_err_s, h),
            converged: wfit.converged,
        })
    } else {
        None
    };

    Ok(ReplicateOutcome { replication, proposed, parametric })
}

/// Aggregate per-replication errors into root mean (integrated) squared
/// errors, reducing in replication order so the result is deterministic.
pub fn score(outcomes: &[ReplicateOutcome]) -> (Score, Option<Score>) {
    let proposed = score_errors(outcomes.iter().map(|o| &o.proposed));
    let with_parametric = outcomes.iter().all(|o| o.parametric.is_some());
    let parametric = if with_parametric && !outcomes.is_empty() {
        Some(score_errors(outcomes.iter().map(|o| o.parametric.as_ref().expect("checked"))))
    } else {
        None
    };
    (proposed, parametric)
}

fn score_errors<'a, I: Iterator<Item = &'a EstimatorErrors>>(errors: I) -> Score {
    let mut count = 0.0;
    let mut sq_gamma: Vec<f64> = Vec::new();
    let mut ise_f = 0.0;
    let mut ise_s = 0.0;
    for e in errors {
        if sq_gamma.is_empty() {
            sq_gamma = vec![0.0; e.gamma_error.len()];
        }
        for (acc, g) in sq_gamma.iter_mut().zip(&e.gamma_error) {
            *acc += g * g;
        }
        ise_f += e.ise_density;
        ise_s += e.ise_survival;
        count += 1.0;
    }
    if count == 0.0 {
        return Score { rmse_gamma: Vec::new(), rmise_density: 0.0, rmise_survival: 0.0 };
    }
    Score {
        rmse_gamma: sq_gamma.iter().map(|&v| math::sqrt(v / count)).collect(),
        rmise_density: math::sqrt(ise_f / count),
        rmise_survival: math::sqrt(ise_s / count),
    }
}

/// Serial driver over all replications of a design.
pub fn run_design(
    design: &SimDesign,
    config: &FitConfig,
    compare: bool,
) -> Result<Vec<ReplicateOutcome>> {
    design.validate()?;
    (0..design.replications as u64)
        .map(|r| run_replicate(design, r, config, compare))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn covariates_have_documented_marginals() {
        let mut rng = SimRng::new(11);
        let x = gen_covariates(4000, &mut rng);
        assert!(x.iter().all(|xi| xi[1] == 1.0 || xi[1] == -1.0));
        assert!(x.iter().all(|xi| (-1.0..1.0).contains(&xi[0])));
        let mean1: f64 = x.iter().map(|xi| xi[0]).sum::<f64>() / 4000.0;
        // mean of uniform(-1,1) has sd 1/sqrt(3n); allow 4 sigma
        assert!(math::abs(mean1) < 4.0 / math::sqrt(3.0 * 4000.0));
    }

    #[test]
    fn same_seed_same_draws() {
        let design = SimDesign::standard(25, CensoringScheme::Case0, 1, 99);
        let a = simulate_dataset(&design, 0).unwrap();
        let b = simulate_dataset(&design, 0).unwrap();
        assert_eq!(a, b);
        let c = simulate_dataset(&design, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn weibull_median_at_zero_gamma() {
        // gamma = 0: T ~ Weibull(2, 2), median 2 (ln 2)^(1/2)
        let mut rng = SimRng::new(5);
        let n = 20_000;
        let x = gen_covariates(n, &mut rng);
        let mut t = gen_event_times(&x, &[0.0, 0.0], 2.0, 2.0, &mut rng);
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = t[n / 2];
        let expected = 2.0 * math::sqrt(core::f64::consts::LN_2);
        assert_relative_eq!(median, expected, max_relative = 0.03);
    }

    #[test]
    fn case1_splits_sides_evenly() {
        let design =
            SimDesign::standard(100_000, CensoringScheme::Case1 { exam_max: CASE1_EXAM_MAX }, 1, 3);
        let data = simulate_dataset(&design, 0).unwrap();
        let counts = data.class_counts();
        assert_eq!(counts[0], 0, "current status data has no exact rows");
        let left_fraction = counts[1] as f64 / design.n as f64;
        assert!(math::abs(left_fraction - 0.5) < 0.02, "left fraction {left_fraction}");
    }

    #[test]
    fn case_k_without_censoring_is_exact() {
        let scheme = CensoringScheme::CaseK { inspections: 5, inspect_len: 1.0, cen_prob: 0.0 };
        let design = SimDesign::standard(200, scheme, 1, 17);
        let data = simulate_dataset(&design, 0).unwrap();
        assert_eq!(data.class_counts()[0], 200);
    }

    #[test]
    fn case_k_censoring_rate_matches_probability() {
        let scheme = CensoringScheme::CaseK { inspections: 5, inspect_len: 1.0, cen_prob: 0.7 };
        let design = SimDesign::standard(20_000, scheme, 1, 23);
        let data = simulate_dataset(&design, 0).unwrap();
        let counts = data.class_counts();
        let censored = (counts[1] + counts[2] + counts[3]) as f64 / design.n as f64;
        assert!(math::abs(censored - 0.7) < 0.02, "censored fraction {censored}");
    }

    #[test]
    fn right_censoring_calibration_hits_target() {
        let design = SimDesign::standard(100, CensoringScheme::Case0, 1, 7);
        let c = calibrate_right_censoring(&design, 0.3).unwrap();
        let scheme = CensoringScheme::Right { upper: c };
        let check = SimDesign::standard(100_000, scheme, 1, 1234);
        let data = simulate_dataset(&check, 0).unwrap();
        let censored = data.class_counts()[3] as f64 / check.n as f64;
        assert!(math::abs(censored - 0.3) < 0.005, "realized rate {censored} at c = {c}");
    }

    #[test]
    fn calibration_rejects_degenerate_targets() {
        let design = SimDesign::standard(100, CensoringScheme::Case0, 1, 7);
        assert!(calibrate_right_censoring(&design, 0.0).is_err());
        assert!(calibrate_right_censoring(&design, 1.0).is_err());
    }

    #[test]
    fn weibull_mle_recovers_truth_on_exact_data() {
        let design = SimDesign::standard(10_000, CensoringScheme::Case0, 1, 41);
        let data = simulate_dataset(&design, 0).unwrap();
        let fit = weibull_aft_mle(&data).unwrap();
        assert!(fit.converged, "gradient norm {}", fit.gradient_norm);
        assert!(fit.gradient_norm < 1e-6);
        assert_relative_eq!(fit.shape, 2.0, max_relative = 0.05);
        assert_relative_eq!(fit.scale, 2.0, max_relative = 0.05);
        assert_relative_eq!(fit.gamma[0], 0.5, max_relative = 0.05);
        assert_relative_eq!(fit.gamma[1], -0.5, max_relative = 0.05);
    }

    #[test]
    fn weibull_mle_flags_all_right_censored() {
        let obs = vec![
            Observation::censored(1.0, f64::INFINITY, vec![0.1]),
            Observation::censored(2.0, f64::INFINITY, vec![-0.2]),
        ];
        let fit = weibull_aft_mle(&Dataset::new(obs).unwrap()).unwrap();
        assert!(!fit.converged);
    }

    #[test]
    fn perfect_estimator_scores_zero() {
        let errors = EstimatorErrors {
            gamma_error: vec![0.0, 0.0],
            ise_density: 0.0,
            ise_survival: 0.0,
            converged: true,
        };
        let outcomes =
            vec![ReplicateOutcome { replication: 0, proposed: errors, parametric: None }];
        let (s, par) = score(&outcomes);
        assert_eq!(s.rmse_gamma, vec![0.0, 0.0]);
        assert_eq!(s.rmise_density, 0.0);
        assert!(par.is_none());
    }

    #[test]
    fn single_rep_score_is_absolute_error() {
        let errors = EstimatorErrors {
            gamma_error: vec![0.1, -0.1],
            ise_density: 0.04,
            ise_survival: 0.09,
            converged: true,
        };
        let outcomes =
            vec![ReplicateOutcome { replication: 0, proposed: errors, parametric: None }];
        let (s, _) = score(&outcomes);
        assert_relative_eq!(s.rmse_gamma[0], 0.1, epsilon = 1e-15);
        assert_relative_eq!(s.rmse_gamma[1], 0.1, epsilon = 1e-15);
        assert_relative_eq!(s.rmise_density, 0.2, epsilon = 1e-15);
        assert_relative_eq!(s.rmise_survival, 0.3, epsilon = 1e-15);
    }
}
