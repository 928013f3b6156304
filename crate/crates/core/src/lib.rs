//! Profit-maximizing "test & roll" experiment design.
//!
//! A test & roll runs a small two-cell experiment on part of a finite
//! population and then deploys the winning treatment to everyone else. This
//! crate holds the pure numerical side of the problem:
//!
//! * [`symmetric`]: closed-form sample size, profit, error rate and regret when
//!   both arms share a Normal prior.
//! * [`asymmetric`]: per-arm Normal priors, numeric design optimization,
//!   incumbent/challenger closed forms and the pricing mapping.
//! * [`baselines`]: classical hypothesis-test sample sizes.
//! * [`beta_binomial`]: exact design for Bernoulli outcomes with Beta priors.
//! * [`sim`]: single-replicate Monte Carlo kernels (test & roll, Thompson
//!   sampling, random and perfect-information policies).
//! * [`priors`]: method-of-moments priors from summaries of past experiments.
//!
//! The crate is `no_std` and only needs `alloc`. IO, parallel drivers and the
//! command line live in the `testroll` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymmetric;
pub mod baselines;
pub mod beta_binomial;
mod error;
pub mod numerics;
pub mod optim;
pub mod priors;
pub mod sim;
pub mod symmetric;

pub use crate::asymmetric::{ArmPrior, AsymmetricProblem, PricingSpec};
pub use crate::baselines::HtParams;
pub use crate::beta_binomial::BetaBinomialSpec;
pub use crate::error::{Error, Result};
pub use crate::numerics::RngStream;
pub use crate::symmetric::{DesignReport, SymmetricPriors, TestDesign};
