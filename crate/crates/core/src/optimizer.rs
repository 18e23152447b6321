//! Fitting: the simplex fixed-point iteration for the weights, Newton with
//! step halving for the regression coefficients, the alternating algorithm,
//! and change-point degree selection.

use crate::basis::{BernsteinModel, MixtureDerivatives};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{gamma_pass, LikelihoodCache, RightCensoring};
use crate::linalg::{self, inf_norm, Matrix};
use crate::math;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Convention for the reported variance-covariance matrix of gamma-hat.
///
/// Either way the standard errors come out as `sqrt(diag(-H^{-1}))`; the
/// convention only decides how the stored matrix is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum VarianceConvention {
    /// `Sigma = -n H^{-1}`: the asymptotic covariance of sqrt(n)(g - g0).
    /// Standard errors are `sqrt(diag(Sigma) / n)`.
    ScaledByN,
    /// `Sigma = -H^{-1}`: the observed-information covariance of gamma-hat.
    /// Standard errors are `sqrt(diag(Sigma))`.
    ObservedInformation,
}

/// Configuration for [`mable_aft`] and the stage fitters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FitConfig {
    /// Smallest degree on the selection grid.
    pub degree_min: usize,
    /// Largest degree on the selection grid (inclusive).
    pub degree_max: usize,
    /// Starting coefficients; zero vector when absent.
    pub gamma_init: Option<Vec<f64>>,
    /// Loglikelihood-improvement tolerance of the fixed-point iteration.
    pub fp_tol: f64,
    /// Iteration cap of the fixed-point iteration.
    pub fp_maxit: usize,
    /// Sup-norm gradient tolerance of the Newton stage.
    pub newton_tol: f64,
    /// Iteration cap of the Newton stage.
    pub newton_maxit: usize,
    /// Loglikelihood-improvement tolerance of the outer alternation.
    pub outer_tol: f64,
    /// Iteration cap of the outer alternation.
    pub outer_maxit: usize,
    /// Truncation time override; default picks 1.05 times the largest
    /// finite endpoint.
    pub tau: Option<f64>,
    /// Restart each weight stage from the previous weights instead of the
    /// uniform vector. Same limit, usually fewer iterations.
    pub warm_start_weights: bool,
    /// Scaling convention of the reported covariance matrix.
    pub variance: VarianceConvention,
    /// How right-censored observations enter the likelihood.
    pub right_censoring: RightCensoring,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            degree_min: 3,
            degree_max: 25,
            gamma_init: None,
            fp_tol: 1e-8,
            fp_maxit: 5000,
            newton_tol: 1e-8,
            newton_maxit: 50,
            outer_tol: 1e-7,
            outer_maxit: 200,
            tau: None,
            warm_start_weights: false,
            variance: VarianceConvention::ScaledByN,
            right_censoring: RightCensoring::Open,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree_max < self.degree_min + 2 {
            return Err(Error::InvalidConfig("degree grid needs at least 3 points"));
        }
        if !(self.fp_tol > 0.0 && self.newton_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        if self.fp_maxit == 0 || self.newton_maxit == 0 || self.outer_maxit == 0 {
            return Err(Error::InvalidConfig("iteration caps must be at least 1"));
        }
        Ok(())
    }
}

/// KKT residual at which the fixed point is declared converged outright.
const KKT_TOL: f64 = 1e-7;
/// KKT residual still acceptable when the loglikelihood has stalled.
const KKT_SOFT_TOL: f64 = 5e-7;
/// Weights below this are treated as inactive in the KKT residual.
const ACTIVE_WEIGHT: f64 = 1e-8;
/// Weights this small with Psi < 1 are decaying geometrically to zero and
/// get snapped there; the loglikelihood effect is below +n * threshold.
const SNAP_WEIGHT: f64 = 1e-12;
/// Maximum number of step halvings in a Newton line search.
const MAX_HALVINGS: usize = 30;

/// Uniform simplex vector of length m + 1.
pub(crate) fn uniform_weights(degree: usize) -> Vec<f64> {
    vec![1.0 / (degree + 1) as f64; degree + 1]
}

fn normalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    for v in p.iter_mut() {
        *v /= s;
    }
}

/// KKT residual of the Theorem-1 optimality condition: how far `max_j Psi_j`
/// exceeds 1, and how far `Psi_j` sits from 1 on the active set.
fn kkt_residual(p: &[f64], psi: &[f64]) -> f64 {
    let mut r = 0.0_f64;
    for (pj, psij) in p.iter().zip(psi) {
        r = r.max(psij - 1.0);
        if *pj > ACTIVE_WEIGHT {
            r = r.max(math::abs(psij - 1.0));
        }
    }
    r
}

/// Result of one fixed-point run at fixed gamma.
#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub weights: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final KKT residual.
    pub kkt_residual: f64,
    /// Loglikelihood after every iteration, starting with the value at the
    /// initial point (an EM-style update, so nondecreasing up to roundoff).
    pub loglik_trace: Vec<f64>,
}

/// Multiplicative fixed-point iteration `p_j <- p_j Psi_j(gamma, p)` at the
/// gamma baked into `cache`.
///
/// The update is an EM step for the mixture weights, so the loglikelihood
/// never decreases and the iterates stay on the simplex up to roundoff
/// (renormalized each step anyway). Stops once the KKT residual falls below
/// 1e-7, or once the loglikelihood improvement drops under `tol` with the
/// residual already under 5e-7; `max_iterations` caps the loop with a
/// non-convergence flag, and the last iterate is still returned.
pub fn fixed_point_p(
    cache: &LikelihoodCache<'_>,
    p0: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<FixedPointOutcome> {
    run_fixed_point(cache, p0, tol, max_iterations, true)
}

/// `strict_kkt = true` is the contract above. With `strict_kkt = false` the
/// loop stops on the loglikelihood improvement alone, which is all the
/// inner stages of the alternating algorithm need; the final stage polishes
/// with the strict rule.
fn run_fixed_point(
    cache: &LikelihoodCache<'_>,
    p0: &[f64],
    tol: f64,
    max_iterations: usize,
    strict_kkt: bool,
) -> Result<FixedPointOutcome> {
    let m = cache.degree();
    if p0.len() != m + 1 {
        return Err(Error::InvalidWeights("length must be degree + 1"));
    }
    if p0.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidWeights("fixed-point start must be strictly interior"));
    }
    let mut p = p0.to_vec();
    normalize(&mut p);
    let (mut ll, mut psi) = cache.loglik_and_psi(&p);
    if ll == f64::NEG_INFINITY {
        return Err(Error::DegenerateStart);
    }
    let mut trace = vec![ll];
    let mut prev_ll = f64::NEG_INFINITY;
    let mut iterations = 0;
    loop {
        let residual = kkt_residual(&p, &psi);
        let done = if strict_kkt {
            residual <= KKT_TOL || (ll - prev_ll < tol && residual <= KKT_SOFT_TOL)
        } else {
            residual <= KKT_TOL || ll - prev_ll < tol
        };
        if done {
            return Ok(FixedPointOutcome {
                weights: p,
                loglik: ll,
                iterations,
                converged: true,
                kkt_residual: residual,
                loglik_trace: trace,
            });
        }
        if iterations >= max_iterations {
            return Ok(FixedPointOutcome {
                weights: p,
                loglik: ll,
                iterations,
                converged: false,
                kkt_residual: residual,
                loglik_trace: trace,
            });
        }
        for (pj, psij) in p.iter_mut().zip(&psi) {
            *pj *= psij;
            if *pj < SNAP_WEIGHT && *psij < 1.0 {
                *pj = 0.0;
            }
        }
        normalize(&mut p);
        iterations += 1;
        prev_ll = ll;
        let next = cache.loglik_and_psi(&p);
        ll = next.0;
        psi = next.1;
        trace.push(ll);
    }
}

/// Result of one Newton run at fixed weights.
#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub gamma: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Iterations that fell back to steepest ascent because the Hessian was
    /// not negative definite.
    pub fallbacks: usize,
}

/// Newton-Raphson ascent in gamma for fixed weights, with step halving.
///
/// Each step solves `(-H) d = g` via Cholesky; when the factorization fails
/// (Hessian not negative definite) the step falls back to a tempered
/// steepest-ascent direction. Trial points that decrease the loglikelihood
/// are halved up to 30 times; if every halving still decreases it the
/// iterate stays put and the loop ends.
pub fn newton_gamma(
    data: &Dataset,
    p: &[f64],
    gamma0: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<NewtonOutcome> {
    run_newton(data, p, gamma0, tol, max_iterations, RightCensoring::Open)
}

fn run_newton(
    data: &Dataset,
    p: &[f64],
    gamma0: &[f64],
    tol: f64,
    max_iterations: usize,
    right: RightCensoring,
) -> Result<NewtonOutcome> {
    let eval = MixtureDerivatives::new(p);
    let mut gamma = gamma0.to_vec();
    let d = data.covariate_dim();
    if gamma.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: gamma.len() });
    }
    let (mut ll, mut grad, mut hess) = gamma_pass(data, &gamma, &eval, true, right)?;
    let mut iterations = 0;
    let mut fallbacks = 0;
    if d == 0 {
        return Ok(NewtonOutcome { gamma, loglik: ll, iterations, converged: true, fallbacks });
    }
    let mut converged = inf_norm(&grad) < tol;
    while !converged && iterations < max_iterations {
        let h = hess.as_ref().expect("hessian requested");
        let neg_h = h.scaled(-1.0);
        let step = match linalg::cholesky(&neg_h) {
            Some(l) => linalg::cholesky_solve(&l, &grad),
            None => {
                fallbacks += 1;
                let scale = 1.0 / inf_norm(&grad).max(1.0);
                grad.iter().map(|g| g * scale).collect()
            }
        };
        let mut accepted = false;
        let mut t = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = gamma.iter().zip(&step).map(|(g, s)| g + t * s).collect();
            match gamma_pass(data, &trial, &eval, true, right) {
                Ok((ll_new, g_new, h_new)) if ll_new >= ll => {
                    gamma = trial;
                    ll = ll_new;
                    grad = g_new;
                    hess = h_new;
                    accepted = true;
                    break;
                }
                _ => t *= 0.5,
            }
        }
        iterations += 1;
        converged = inf_norm(&grad) < tol;
        if !accepted {
            break;
        }
    }
    Ok(NewtonOutcome { gamma, loglik: ll, iterations, converged, fallbacks })
}

/// Converged (gamma, weights) pair for one degree.
#[derive(Debug, Clone)]
pub struct StageFit {
    pub gamma: Vec<f64>,
    pub weights: Vec<f64>,
    pub loglik: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    pub newton_converged: bool,
    pub fp_converged: bool,
    pub hessian_fallbacks: usize,
    /// Loglikelihood after the initial weight stage and after every outer
    /// iteration.
    pub outer_loglik_trace: Vec<f64>,
}

/// The alternating algorithm for one fixed degree: a fixed-point stage for
/// the weights at the starting gamma, then Newton and fixed-point stages in
/// turn until the outer loglikelihood improvement drops below `outer_tol`.
///
/// Each weight stage restarts from the uniform vector (the plain algorithm's
/// choice); `warm_start_weights` reuses the previous weights instead, which
/// converges to the same limit since the weight problem has a unique
/// maximizer at fixed gamma.
pub fn alternate_fit(data: &Dataset, degree: usize, config: &FitConfig) -> Result<StageFit> {
    alternate_fit_from(data, degree, config, None)
}

/// `alternate_fit` with an explicit starting point for the first weight
/// stage; degree selection threads the previous degree's elevated optimum
/// through here.
pub(crate) fn alternate_fit_from(
    data: &Dataset,
    degree: usize,
    config: &FitConfig,
    weights_start: Option<Vec<f64>>,
) -> Result<StageFit> {
    let d = data.covariate_dim();
    let gamma0 = match &config.gamma_init {
        Some(g) => {
            if g.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: g.len() });
            }
            g.clone()
        }
        None => vec![0.0; d],
    };

    let uniform = uniform_weights(degree);
    let right = config.right_censoring;
    let first_start = weights_start.unwrap_or_else(|| uniform.clone());
    let mut fp = {
        let cache = LikelihoodCache::with_convention(data, degree, &gamma0, right)?;
        run_fixed_point(&cache, &first_start, config.fp_tol, config.fp_maxit, false)?
    };
    let mut gamma = gamma0;
    let mut loglik = fp.loglik;
    let mut outer_trace = vec![loglik];
    let mut newton_converged = true;
    let mut fallbacks = 0;
    let mut outer_iterations = 0;
    let mut converged = d == 0;
    // best iterate seen; an iteration-capped weight stage can regress
    let mut best = (loglik, gamma.clone(), fp.weights.clone());

    while !converged && outer_iterations < config.outer_maxit {
        let newton =
            run_newton(data, &fp.weights, &gamma, config.newton_tol, config.newton_maxit, right)?;
        gamma = newton.gamma;
        newton_converged = newton.converged;
        fallbacks += newton.fallbacks;

        let start = if config.warm_start_weights {
            floor_interior(&fp.weights)
        } else {
            uniform.clone()
        };
        fp = {
            let cache = LikelihoodCache::with_convention(data, degree, &gamma, right)?;
            run_fixed_point(&cache, &start, config.fp_tol, config.fp_maxit, false)?
        };
        outer_iterations += 1;
        outer_trace.push(fp.loglik);
        if fp.loglik > best.0 {
            best = (fp.loglik, gamma.clone(), fp.weights.clone());
        }

        if fp.loglik - loglik < config.outer_tol {
            converged = true;
        }
        loglik = fp.loglik;
    }

    // polish the best weight stage to the strict KKT residual
    gamma = best.1;
    fp = {
        let cache = LikelihoodCache::with_convention(data, degree, &gamma, right)?;
        run_fixed_point(&cache, &floor_interior(&best.2), config.fp_tol, config.fp_maxit, true)?
    };
    loglik = fp.loglik;
    outer_trace.push(loglik);

    Ok(StageFit {
        gamma,
        weights: fp.weights,
        loglik,
        outer_iterations,
        converged,
        kkt_residual: fp.kkt_residual,
        newton_converged,
        fp_converged: fp.converged,
        hessian_fallbacks: fallbacks,
        outer_loglik_trace: outer_trace,
    })
}

/// Exact degree elevation of mixture weights: the degree-(m+1) model with
/// weights `p'_i = {i p_{i-1} + (m + 1 - i) p_i} / (m + 2)` has the same
/// density as the degree-m model with weights `p`. Used to chain degree
/// fits so the loglikelihood trace over the grid is nondecreasing.
pub(crate) fn elevate_weights(p: &[f64]) -> Vec<f64> {
    let m = p.len() - 1;
    let mf = m as f64;
    let mut out = Vec::with_capacity(m + 2);
    for i in 0..=(m + 1) {
        let prev = if i >= 1 { i as f64 * p[i - 1] } else { 0.0 };
        let curr = if i <= m { (mf + 1.0 - i as f64) * p[i] } else { 0.0 };
        out.push((prev + curr) / (mf + 2.0));
    }
    out
}

/// Push exact zeros back inside the simplex so a fixed-point run can start
/// from a previous outcome.
fn floor_interior(p: &[f64]) -> Vec<f64> {
    let mut out = p.to_vec();
    for w in &mut out {
        *w = w.max(1e-12);
    }
    out
}

/// Change-point statistics over a vector of per-degree loglikelihoods.
#[derive(Debug, Clone)]
pub struct ChangePoint {
    /// `r[i]` holds R at grid position i; the first position has none.
    pub r: Vec<Option<f64>>,
    /// Selected grid position in `1..=k` (smallest argmax).
    pub selected: usize,
    /// Set when a nonpositive loglikelihood increment was floored.
    pub degenerate_increment: bool,
}

/// With grid positions `i = 0..=k` and loglikelihoods `l_i`,
/// `R(i) = k ln{(l_k - l_0)/k} - i ln{(l_i - l_0)/i}
///        - (k - i) ln{(l_k - l_i)/(k - i)}` for `i = 1..k` and `R(k) = 0`.
/// The selected position is the smallest argmax over `1..=k`, comparing R
/// rounded to 1e-10 so exact ties break toward the smaller degree.
/// Nonpositive increments are floored at machine epsilon inside the logs.
pub fn change_point(logliks: &[f64]) -> ChangePoint {
    let k = logliks.len() - 1;
    assert!(k >= 1, "change-point selection needs at least 2 grid points");
    if k == 1 {
        // degenerate grid: only R(k) = 0 exists
        return ChangePoint {
            r: vec![None, Some(0.0)],
            selected: 1,
            degenerate_increment: false,
        };
    }
    let mut degenerate = false;
    let mut guarded_ln = |x: f64| {
        if x <= 0.0 {
            degenerate = true;
            math::ln(f64::EPSILON)
        } else {
            math::ln(x)
        }
    };
    let l0 = logliks[0];
    let lk = logliks[k];
    let kf = k as f64;
    let head = kf * guarded_ln((lk - l0) / kf);
    let mut r: Vec<Option<f64>> = vec![None; k + 1];
    for i in 1..k {
        let fi = i as f64;
        let value = head
            - fi * guarded_ln((logliks[i] - l0) / fi)
            - (kf - fi) * guarded_ln((lk - logliks[i]) / (kf - fi));
        r[i] = Some(value);
    }
    r[k] = Some(0.0);

    let round = |x: f64| libm::round(x * 1e10) / 1e10;
    let mut selected = 1;
    let mut best = round(r[1].expect("interior position"));
    for (i, ri) in r.iter().enumerate().skip(2) {
        let v = round(ri.expect("position at or above 1"));
        if v > best {
            best = v;
            selected = i;
        }
    }
    ChangePoint { r, selected, degenerate_increment: degenerate }
}

/// One row of the degree-selection trace.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DegreeFit {
    pub degree: usize,
    /// Loglikelihood of the converged fit; `None` when this degree failed.
    pub loglik: Option<f64>,
    /// Change-point statistic; `None` at the first grid position and for
    /// failed degrees.
    pub r_statistic: Option<f64>,
    pub converged: bool,
}

/// Outcome of fitting the whole degree grid.
pub struct SelectedFit {
    pub stage: StageFit,
    pub degree: usize,
    pub trace: Vec<DegreeFit>,
    pub warnings: Vec<String>,
}

/// Fit every degree on the grid and pick the change-point optimum.
///
/// Fits are chained up the grid: each degree starts from the previous
/// degree's optimum, with the weights carried over by exact degree
/// elevation. Since the degree-(m+1) family contains the degree-m one, the
/// loglikelihood trace is nondecreasing by construction, which is what the
/// change-point statistic assumes. Individual degree failures are skipped
/// with a warning as long as enough degrees survive.
pub fn degree_select(data: &Dataset, config: &FitConfig) -> Result<SelectedFit> {
    config.validate()?;
    let mut warnings = Vec::new();
    let mut fits: Vec<(usize, Result<StageFit>)> = Vec::new();
    let mut carried: Option<(Vec<f64>, Vec<f64>)> = None;
    for degree in config.degree_min..=config.degree_max {
        let (cfg, weights_start) = match &carried {
            // elevation steps one degree at a time; after a failed degree
            // the chain restarts cold
            Some((gamma, weights)) if weights.len() + 1 == degree + 1 => (
                FitConfig { gamma_init: Some(gamma.clone()), ..config.clone() },
                Some(floor_interior(&elevate_weights(weights))),
            ),
            _ => (config.clone(), None),
        };
        let fit = alternate_fit_from(data, degree, &cfg, weights_start);
        if let Ok(stage) = &fit {
            carried = Some((stage.gamma.clone(), stage.weights.clone()));
        }
        fits.push((degree, fit));
    }
    let succeeded: Vec<(usize, &StageFit)> =
        fits.iter().filter_map(|(m, r)| r.as_ref().ok().map(|s| (*m, s))).collect();
    if succeeded.is_empty() {
        return Err(Error::AllDegreesFailed);
    }
    if succeeded.len() < 2 {
        return Err(Error::TooFewDegrees { succeeded: succeeded.len() });
    }
    for (m, r) in &fits {
        if let Err(e) = r {
            warnings.push(format!("degree {m} failed and was skipped: {e}"));
        }
    }

    let logliks: Vec<f64> = succeeded.iter().map(|(_, s)| s.loglik).collect();
    let cp = change_point(&logliks);
    if cp.degenerate_increment {
        warnings.push(String::from(
            "nonpositive loglikelihood increment on the degree grid; floored inside the change-point statistic",
        ));
    }
    let (selected_degree, selected_stage) = succeeded[cp.selected];

    let mut trace = Vec::with_capacity(fits.len());
    for (m, r) in &fits {
        match r {
            Ok(stage) => {
                let pos = succeeded.iter().position(|(sm, _)| sm == m).expect("fitted degree");
                trace.push(DegreeFit {
                    degree: *m,
                    loglik: Some(stage.loglik),
                    r_statistic: cp.r.get(pos).copied().flatten(),
                    converged: stage.converged,
                });
            }
            Err(_) => trace.push(DegreeFit {
                degree: *m,
                loglik: None,
                r_statistic: None,
                converged: false,
            }),
        }
    }

    Ok(SelectedFit { stage: selected_stage.clone(), degree: selected_degree, trace, warnings })
}

/// Convergence and quality diagnostics of a full fit.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Diagnostics {
    pub outer_iterations: usize,
    pub outer_converged: bool,
    pub newton_converged: bool,
    pub fp_converged: bool,
    /// KKT residual of the selected fit.
    pub max_psi_residual: f64,
    pub hessian_fallbacks: usize,
    pub warnings: Vec<String>,
}

/// A fitted model: coefficients, weights, selected degree, variance matrix,
/// and the degree-selection trace.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct FitResult {
    pub gamma: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
    /// Loglikelihood in original time units (internal value minus
    /// `n_exact * ln tau`).
    pub loglik: f64,
    pub tau: f64,
    pub n: usize,
    /// Variance-covariance matrix of gamma-hat under `variance`; `None`
    /// when the information matrix is singular.
    pub sigma_gamma: Option<Matrix>,
    pub variance: VarianceConvention,
    pub degree_trace: Vec<DegreeFit>,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    /// The fitted baseline model on the original time scale.
    pub fn model(&self) -> BernsteinModel {
        BernsteinModel::new(self.degree, self.tau, self.weights.clone())
            .expect("fitted weights form a valid model")
    }

    pub fn covariate_dim(&self) -> usize {
        self.gamma.len()
    }
}

/// The full pipeline: truncation-time selection, rescaling, degree-grid
/// fitting with change-point selection, and the variance matrix of the
/// regression coefficients.
pub fn mable_aft(data: &Dataset, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let with_tau = if data.tau().is_some() && config.tau.is_none() {
        data.clone()
    } else {
        data.select_tau(config.tau)?
    };
    let tau = with_tau.tau().expect("tau selected");
    let scaled = with_tau.rescale()?;
    let selected = degree_select(&scaled, config)?;
    let mut warnings = selected.warnings;

    let d = scaled.covariate_dim();
    let n = scaled.len();
    let stage = selected.stage;

    let sigma_gamma = if d == 0 {
        Some(Matrix::zeros(0, 0))
    } else {
        let hess = crate::likelihood::hessian_gamma_with(
            &scaled,
            &stage.gamma,
            &stage.weights,
            config.right_censoring,
        )?;
        let neg_h = hess.scaled(-1.0);
        match linalg::inverse(&neg_h) {
            Some(inv) => {
                let eigs = linalg::sym_eigenvalues(&neg_h);
                if eigs.iter().any(|&e| e <= 0.0) {
                    warnings.push(String::from(
                        "information matrix has a nonpositive eigenvalue; covariance is not positive definite",
                    ));
                }
                match config.variance {
                    VarianceConvention::ScaledByN => Some(inv.scaled(n as f64)),
                    VarianceConvention::ObservedInformation => Some(inv),
                }
            }
            None => {
                warnings.push(String::from(
                    "singular information matrix; standard errors unavailable",
                ));
                None
            }
        }
    };

    let n_exact = scaled.observations().iter().filter(|o| !o.censored).count();
    let loglik_original = stage.loglik - n_exact as f64 * math::ln(tau);

    Ok(FitResult {
        gamma: stage.gamma,
        weights: stage.weights,
        degree: selected.degree,
        loglik: loglik_original,
        tau,
        n,
        sigma_gamma,
        variance: config.variance,
        degree_trace: selected.trace,
        diagnostics: Diagnostics {
            outer_iterations: stage.outer_iterations,
            outer_converged: stage.converged,
            newton_converged: stage.newton_converged,
            fp_converged: stage.fp_converged,
            max_psi_residual: stage.kkt_residual,
            hessian_fallbacks: stage.hessian_fallbacks,
            warnings,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;
    use approx::assert_relative_eq;

    fn small_dataset() -> Dataset {
        Dataset::new(vec![
            Observation::exact(1.1, vec![0.4]),
            Observation::exact(2.3, vec![-0.2]),
            Observation::censored(0.0, 1.4, vec![0.8]),
            Observation::censored(0.7, 2.9, vec![-0.6]),
            Observation::censored(1.9, f64::INFINITY, vec![0.1]),
            Observation::censored(0.9, 2.2, vec![0.5]),
        ])
        .unwrap()
        .select_tau(Some(3.5))
        .unwrap()
        .rescale()
        .unwrap()
    }

    #[test]
    fn fixed_point_degree_zero_is_immediate() {
        let data = small_dataset();
        let cache = LikelihoodCache::new(&data, 0, &[0.0]).unwrap();
        let out = fixed_point_p(&cache, &[1.0], 1e-8, 100).unwrap();
        assert_eq!(out.weights, vec![1.0]);
        assert!(out.converged);
        assert!(out.kkt_residual <= 1e-12);
    }

    #[test]
    fn fixed_point_single_step_matches_definition() {
        let data = small_dataset();
        let cache = LikelihoodCache::new(&data, 3, &[0.2]).unwrap();
        let p0 = [0.4, 0.3, 0.2, 0.1];
        let psi0 = cache.psi(&p0);
        let expected: Vec<f64> = p0.iter().zip(&psi0).map(|(p, s)| p * s).collect();
        let one = fixed_point_p(&cache, &p0, 1e-18, 1).unwrap();
        assert_eq!(one.iterations, 1);
        for (got, want) in one.weights.iter().zip(&expected) {
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn fixed_point_start_independence() {
        let data = small_dataset();
        let cache = LikelihoodCache::new(&data, 3, &[0.1]).unwrap();
        let a = fixed_point_p(&cache, &uniform_weights(3), 1e-10, 20_000).unwrap();
        let b = fixed_point_p(&cache, &[0.7, 0.1, 0.1, 0.1], 1e-10, 20_000).unwrap();
        assert!(a.converged && b.converged);
        assert_relative_eq!(a.loglik, b.loglik, epsilon = 1e-6);
    }

    #[test]
    fn fixed_point_rejects_boundary_start() {
        let data = small_dataset();
        let cache = LikelihoodCache::new(&data, 2, &[0.0]).unwrap();
        assert!(fixed_point_p(&cache, &[1.0, 0.0, 0.0], 1e-8, 10).is_err());
    }

    #[test]
    fn newton_no_covariate_signal_keeps_gamma() {
        let data = Dataset::new(vec![
            Observation::exact(1.0, vec![0.0]),
            Observation::censored(0.5, 2.0, vec![0.0]),
        ])
        .unwrap()
        .select_tau(Some(2.5))
        .unwrap()
        .rescale()
        .unwrap();
        let out = newton_gamma(&data, &[0.5, 0.5], &[0.3], 1e-8, 50).unwrap();
        assert_eq!(out.gamma, vec![0.3]);
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn newton_finds_analytic_stationary_point() {
        // single exact obs y = 0.5, x = 1, p = (1, 0) on tau = 1:
        // l(g) = -g + ln 2 + ln(1 - 0.5 e^{-g}), stationary exactly at g = 0
        let data = Dataset::new(vec![Observation::exact(0.5, vec![1.0])])
            .unwrap()
            .select_tau(Some(1.0))
            .unwrap()
            .rescale()
            .unwrap();
        let out = newton_gamma(&data, &[1.0, 0.0], &[0.3], 1e-10, 50).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 5);
        assert_relative_eq!(out.gamma[0], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn alternate_fit_converges_with_clean_kkt() {
        let data = small_dataset();
        let cfg = FitConfig::default();
        let fit = alternate_fit(&data, 4, &cfg).unwrap();
        assert!(fit.converged);
        assert!(fit.kkt_residual <= 1e-6);
        let ll = crate::likelihood::loglik(&data, &fit.gamma, &fit.weights).unwrap();
        assert_relative_eq!(ll, fit.loglik, epsilon = 1e-9);
    }

    #[test]
    fn degree_elevation_preserves_the_mixture() {
        use crate::basis::BernsteinModel;
        let p = vec![0.5, 0.2, 0.3];
        let elevated = elevate_weights(&p);
        assert_eq!(elevated.len(), 4);
        assert_relative_eq!(elevated.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        let low = BernsteinModel::new(2, 1.0, p).unwrap();
        let high = BernsteinModel::new(3, 1.0, elevated).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert_relative_eq!(
                low.density(t).unwrap(),
                high.density(t).unwrap(),
                epsilon = 1e-12
            );
            assert_relative_eq!(
                low.survival(t).unwrap(),
                high.survival(t).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn degree_select_trace_is_monotone() {
        let data = small_dataset();
        let cfg = FitConfig { degree_min: 3, degree_max: 10, ..FitConfig::default() };
        let selected = degree_select(&data, &cfg).unwrap();
        let lls: Vec<f64> = selected.trace.iter().map(|t| t.loglik.unwrap()).collect();
        for w in lls.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "degree trace decreased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn change_point_hand_example() {
        // grid logliks (0, 1, 2, 4): R = (-, 0.052116.., 0.169899.., 0)
        let cp = change_point(&[0.0, 1.0, 2.0, 4.0]);
        assert_eq!(cp.selected, 2);
        let expect_r1 = 3.0 * math::ln(4.0 / 3.0) - 2.0 * math::ln(1.5);
        let expect_r2 = 3.0 * math::ln(4.0 / 3.0) - math::ln(2.0);
        assert_relative_eq!(cp.r[1].unwrap(), expect_r1, epsilon = 1e-12);
        assert_relative_eq!(cp.r[2].unwrap(), expect_r2, epsilon = 1e-12);
        assert_eq!(cp.r[3], Some(0.0));
        assert!(!cp.degenerate_increment);
    }

    #[test]
    fn change_point_linear_increments_tie_break_low() {
        let cp = change_point(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        // equal slopes: every interior R is 0 = R(k), min-argmax picks 1
        assert_eq!(cp.selected, 1);
        for i in 1..=4 {
            assert_relative_eq!(cp.r[i].unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn change_point_floors_nonpositive_increments() {
        let cp = change_point(&[2.0, 1.0, 2.5, 3.0]);
        assert!(cp.degenerate_increment);
    }

    #[test]
    fn mable_aft_zero_covariate_column_warns() {
        let obs = vec![
            Observation::exact(1.0, vec![0.0]),
            Observation::exact(1.5, vec![0.0]),
            Observation::exact(2.2, vec![0.0]),
            Observation::censored(0.8, 2.0, vec![0.0]),
            Observation::censored(1.2, f64::INFINITY, vec![0.0]),
        ];
        let data = Dataset::new(obs).unwrap();
        let cfg = FitConfig { degree_min: 2, degree_max: 5, ..FitConfig::default() };
        let fit = mable_aft(&data, &cfg).unwrap();
        assert_eq!(fit.gamma, vec![0.0]);
        assert!(fit.sigma_gamma.is_none());
        assert!(fit
            .diagnostics
            .warnings
            .iter()
            .any(|w| w.contains("singular information matrix")));
    }
}
