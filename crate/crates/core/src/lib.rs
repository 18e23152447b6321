//! Maximum approximate Bernstein likelihood estimation (MABLE) for
//! accelerated failure time regression with interval-censored event times.
//!
//! The event time given covariates `x` follows `S(t | x) = S0(t e^{-g'x})`;
//! the baseline density on `[0, tau]` is approximated by a mixture of
//! beta(j+1, m-j+1) kernels with simplex weights. Fitting alternates a
//! Newton step for the regression coefficients with a multiplicative
//! fixed-point iteration for the weights, and picks the degree `m` with a
//! change-point criterion over a degree grid.
//!
//! This crate is `no_std`-compatible (requires `alloc`); IO, CSV and JSON
//! handling, and the command line live in the companion `mable-aft` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod basis;
pub mod data;
pub mod error;
pub mod inference;
pub mod likelihood;
pub mod linalg;
pub mod math;
pub mod optimizer;
pub mod rng;
pub mod simulation;

pub use basis::{basis_vectors, beta_density, beta_survival, BernsteinModel};
pub use data::{CensorClass, Dataset, Observation};
pub use error::{Error, Result};
pub use inference::{predict_density, predict_survival, standard_errors, StandardErrors};
pub use likelihood::{grad_gamma, hessian_gamma, hessian_p, loglik, psi, LikelihoodCache};
pub use linalg::Matrix;
pub use optimizer::{
    alternate_fit, degree_select, fixed_point_p, mable_aft, newton_gamma, FitConfig, FitResult,
    VarianceConvention,
};
pub use rng::SimRng;
pub use simulation::{
    apply_censoring, calibrate_right_censoring, gen_covariates, gen_event_times, weibull_aft_mle,
    CensoringScheme, Score, SimDesign, WeibullAftFit,
};
