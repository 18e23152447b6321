//! Censored observations and datasets.
//!
//! An observation is `(delta, x, (y1, y2])`: exact event time when
//! `delta = 0` (then `y1 = y2`), otherwise an interval with `y2 = +inf`
//! encoding right censoring. Datasets pick a truncation time `tau` above
//! every finite endpoint and can be rescaled so all finite times live in
//! `[0, 1]`, which is the scale the likelihood works on.

use crate::error::{Error, Result};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Censoring class of one observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum CensorClass {
    Exact,
    Left,
    Interval,
    Right,
}

/// One subject: censoring indicator, covariates, and interval endpoints.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Observation {
    /// false = exact event time, true = censored into (y1, y2].
    pub censored: bool,
    /// Covariate vector; the same length across a dataset.
    pub x: Vec<f64>,
    /// Left endpoint (equals the event time when exact).
    pub y1: f64,
    /// Right endpoint; `f64::INFINITY` encodes right censoring.
    pub y2: f64,
}

impl Observation {
    /// Exact event time.
    pub fn exact(y: f64, x: Vec<f64>) -> Self {
        Observation { censored: false, x, y1: y, y2: y }
    }

    /// Censored into `(y1, y2]`; pass `f64::INFINITY` for right censoring.
    pub fn censored(y1: f64, y2: f64, x: Vec<f64>) -> Self {
        Observation { censored: true, x, y1, y2 }
    }

    /// Interval invariants: `y1 >= 0`; exact implies `y1 = y2 < inf`;
    /// censored implies `y1 < y2`.
    pub fn validate(&self) -> core::result::Result<(), &'static str> {
        if !(self.y1 >= 0.0) {
            return Err("left endpoint must be nonnegative");
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err("covariates must be finite");
        }
        if self.censored {
            if !(self.y1 < self.y2) {
                return Err("censored interval needs y1 < y2");
            }
        } else {
            if self.y1 != self.y2 {
                return Err("exact observation needs y1 = y2");
            }
            if !self.y2.is_finite() {
                return Err("exact observation needs a finite time");
            }
        }
        Ok(())
    }

    /// Censoring class: exact, left (`y1 = 0`), right (`y2 = inf`), or interval.
    pub fn classify(&self) -> CensorClass {
        if !self.censored {
            CensorClass::Exact
        } else if self.y1 == 0.0 {
            CensorClass::Left
        } else if self.y2 == f64::INFINITY {
            CensorClass::Right
        } else {
            CensorClass::Interval
        }
    }
}

/// Margin applied above the largest finite endpoint when no truncation time
/// is supplied. Multiplicative, so the default is scale invariant.
pub const DEFAULT_TAU_MARGIN: f64 = 1.05;

/// An immutable collection of observations sharing one covariate dimension,
/// with an optional selected truncation time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Dataset {
    observations: Vec<Observation>,
    covariate_dim: usize,
    tau: Option<f64>,
    rescaled: bool,
}

impl Dataset {
    /// Validate and assemble observations. Rejects the first offending row
    /// by index.
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let covariate_dim = observations[0].x.len();
        for (index, obs) in observations.iter().enumerate() {
            obs.validate().map_err(|reason| Error::InvalidObservation { index, reason })?;
            if obs.x.len() != covariate_dim {
                return Err(Error::CovariateDimension {
                    expected: covariate_dim,
                    found: obs.x.len(),
                    index,
                });
            }
        }
        Ok(Dataset { observations, covariate_dim, tau: None, rescaled: false })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn covariate_dim(&self) -> usize {
        self.covariate_dim
    }

    /// Selected truncation time, if any.
    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// Largest finite endpoint y_(n) over all observations.
    pub fn max_finite_endpoint(&self) -> f64 {
        let mut y = 0.0_f64;
        for obs in &self.observations {
            y = y.max(obs.y1);
            if obs.y2.is_finite() {
                y = y.max(obs.y2);
            }
        }
        y
    }

    /// Counts of (exact, left, interval, right) observations.
    pub fn class_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for obs in &self.observations {
            let k = match obs.classify() {
                CensorClass::Exact => 0,
                CensorClass::Left => 1,
                CensorClass::Interval => 2,
                CensorClass::Right => 3,
            };
            counts[k] += 1;
        }
        counts
    }

    /// Fix the truncation time: the user's value if given (it must exceed
    /// the largest finite endpoint), else `DEFAULT_TAU_MARGIN * y_(n)`.
    ///
    /// Right-censored endpoints stay `+inf` in the data; the likelihood is
    /// what maps them onto tau (where the mixture survival is exactly zero).
    pub fn select_tau(&self, user_tau: Option<f64>) -> Result<Dataset> {
        let y_max = self.max_finite_endpoint();
        let tau = match user_tau {
            Some(t) => {
                if !(t > y_max) {
                    return Err(Error::TauTooSmall { tau: t, max_endpoint: y_max });
                }
                t
            }
            None => {
                if y_max <= 0.0 {
                    return Err(Error::InvalidObservation {
                        index: 0,
                        reason: "all endpoints are zero; cannot pick a truncation time",
                    });
                }
                DEFAULT_TAU_MARGIN * y_max
            }
        };
        let mut out = self.clone();
        out.tau = Some(tau);
        Ok(out)
    }

    /// Divide every finite endpoint by tau so they land in [0, 1].
    /// Idempotent; `original_time` undoes it for reporting.
    pub fn rescale(&self) -> Result<Dataset> {
        let tau = self.tau.ok_or(Error::TauNotSelected)?;
        if self.rescaled {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        for obs in &mut out.observations {
            obs.y1 /= tau;
            if obs.y2.is_finite() {
                obs.y2 /= tau;
            }
        }
        out.rescaled = true;
        Ok(out)
    }

    /// Map a time on the internal [0, 1] scale back to original units.
    pub fn original_time(&self, t: f64) -> f64 {
        match (self.rescaled, self.tau) {
            (true, Some(tau)) => t * tau,
            _ => t,
        }
    }
}
