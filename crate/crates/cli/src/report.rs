//! The versioned JSON fit report written by `fit` and consumed by
//! `predict`.
//!
//! Every float survives the JSON round trip bit for bit (shortest-repr
//! encoding both ways), so predictions from a reloaded report are identical
//! to in-process ones.

use anyhow::{bail, Context, Result};
use mable_aft_core::optimizer::{DegreeFit, Diagnostics, FitResult, VarianceConvention};
use mable_aft_core::{standard_errors, Matrix};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Current report schema version.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FitReport {
    pub schema: u32,
    /// Covariate column names, aligned with `gamma`.
    pub covariates: Vec<String>,
    pub n: usize,
    pub tau: f64,
    pub degree: usize,
    pub gamma: Vec<f64>,
    /// Per-coefficient standard errors; `None` when unavailable (singular
    /// information matrix).
    pub standard_errors: Vec<Option<f64>>,
    pub weights: Vec<f64>,
    pub loglik: f64,
    pub variance: VarianceConvention,
    /// Variance-covariance matrix as nested rows, when available.
    pub sigma_gamma: Option<Vec<Vec<f64>>>,
    pub degree_trace: Vec<DegreeFit>,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

impl FitReport {
    pub fn from_fit(fit: &FitResult, covariates: Vec<String>) -> Self {
        let se = standard_errors(fit);
        let sigma_gamma = fit.sigma_gamma.as_ref().map(|m| {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
                .collect()
        });
        FitReport {
            schema: SCHEMA_VERSION,
            covariates,
            n: fit.n,
            tau: fit.tau,
            degree: fit.degree,
            gamma: fit.gamma.clone(),
            standard_errors: se
                .values
                .iter()
                .map(|&v| if v.is_finite() { Some(v) } else { None })
                .collect(),
            weights: fit.weights.clone(),
            loglik: fit.loglik,
            variance: fit.variance,
            sigma_gamma,
            degree_trace: fit.degree_trace.clone(),
            converged: fit.diagnostics.outer_converged,
            diagnostics: fit.diagnostics.clone(),
        }
    }

    /// Rebuild the in-memory fit for prediction.
    pub fn to_fit(&self) -> FitResult {
        let sigma_gamma = self.sigma_gamma.as_ref().map(|rows| {
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            Matrix::from_rows(&refs)
        });
        FitResult {
            gamma: self.gamma.clone(),
            weights: self.weights.clone(),
            degree: self.degree,
            loglik: self.loglik,
            tau: self.tau,
            n: self.n,
            sigma_gamma,
            variance: self.variance,
            degree_trace: self.degree_trace.clone(),
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).context("invalid JSON")?;
        let schema = value.get("schema").and_then(|v| v.as_u64());
        match schema {
            Some(v) if v == SCHEMA_VERSION as u64 => {}
            Some(v) => bail!("unsupported fit report schema {v} (expected {SCHEMA_VERSION})"),
            None => bail!("not a fit report: missing `schema` field"),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> FitReport {
        FitReport {
            schema: SCHEMA_VERSION,
            covariates: vec!["trt".into()],
            n: 5,
            tau: 2.5,
            degree: 2,
            gamma: vec![0.1234567890123456],
            standard_errors: vec![Some(0.25)],
            weights: vec![0.2, 0.3, 0.5],
            loglik: -12.5,
            variance: VarianceConvention::ScaledByN,
            sigma_gamma: Some(vec![vec![0.3125]]),
            degree_trace: vec![],
            converged: true,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let report = sample_report();
        let text = report.to_json().unwrap();
        let back = FitReport::from_json(&text).unwrap();
        assert_eq!(report, back);
        assert_eq!(report.gamma[0].to_bits(), back.gamma[0].to_bits());
    }

    #[test]
    fn wrong_schema_rejected() {
        let mut report = sample_report();
        report.schema = 2;
        let text = serde_json::to_string(&report).unwrap();
        let err = FitReport::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("schema 2"), "got: {err}");
    }

    #[test]
    fn missing_schema_rejected() {
        let err = FitReport::from_json("{}").unwrap_err().to_string();
        assert!(err.contains("missing `schema`"), "got: {err}");
    }
}
