//! Post-fit prediction and standard errors.
//!
//! Predicted curves use the AFT scaling directly: the conditional survival
//! at covariates `x` is the baseline mixture survival evaluated at
//! `t e^{-g'x}`, and the conditional density picks up the Jacobian
//! `e^{-g'x}`. Everything is reported on the original time scale.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::math;
use crate::optimizer::{FitResult, VarianceConvention};
use alloc::vec::Vec;

fn time_scale(fit: &FitResult, x: &[f64]) -> Result<f64> {
    if x.len() != fit.covariate_dim() {
        return Err(Error::DimensionMismatch { expected: fit.covariate_dim(), found: x.len() });
    }
    Ok(math::exp(-dot(&fit.gamma, x)))
}

/// Conditional survival `S(t | x)` on a grid of times in original units.
///
/// Values are in [0, 1], nonincreasing, and exactly 0 beyond the support
/// edge `tau e^{g'x}`.
pub fn predict_survival(fit: &FitResult, x: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    let w = time_scale(fit, x)?;
    let model = fit.model();
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::Domain { what: "prediction time", value: t });
            }
            model.survival(t * w)
        })
        .collect()
}

/// Conditional density `f(t | x)` on a grid of times in original units;
/// zero beyond the support edge.
pub fn predict_density(fit: &FitResult, x: &[f64], times: &[f64]) -> Result<Vec<f64>> {
    let w = time_scale(fit, x)?;
    let model = fit.model();
    times
        .iter()
        .map(|&t| {
            if !(t >= 0.0) {
                return Err(Error::Domain { what: "prediction time", value: t });
            }
            let arg = t * w;
            if arg > model.tau() {
                Ok(0.0)
            } else {
                Ok(w * model.density(arg)?)
            }
        })
        .collect()
}

/// Standard errors with a flag for a covariance matrix that was not
/// positive semidefinite (values then come from absolute diagonals).
#[derive(Debug, Clone, PartialEq)]
pub struct StandardErrors {
    pub values: Vec<f64>,
    pub indefinite: bool,
}

/// Standard errors of the regression coefficients.
///
/// Under the `ScaledByN` convention the stored matrix estimates the
/// covariance of `sqrt(n) (gamma-hat - gamma0)`, so the per-coefficient
/// errors divide its diagonal by n; under `ObservedInformation` the
/// diagonal is used as is. Nonpositive diagonal entries are reported from
/// their absolute value with the `indefinite` flag set. A singular
/// information matrix yields NaN entries.
pub fn standard_errors(fit: &FitResult) -> StandardErrors {
    let d = fit.covariate_dim();
    let Some(sigma) = fit.sigma_gamma.as_ref() else {
        return StandardErrors { values: alloc::vec![f64::NAN; d], indefinite: false };
    };
    let scale = match fit.variance {
        VarianceConvention::ScaledByN => 1.0 / fit.n as f64,
        VarianceConvention::ObservedInformation => 1.0,
    };
    let mut indefinite = false;
    let values = sigma
        .diagonal()
        .iter()
        .map(|&v| {
            if v < 0.0 {
                indefinite = true;
            }
            math::sqrt(math::abs(v) * scale)
        })
        .collect();
    StandardErrors { values, indefinite }
}
