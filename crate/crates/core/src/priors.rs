//! Method-of-moments priors from summaries of past A/B tests.
//!
//! For two arms of the same experiment, `ȳ1 − ȳ2` has variance
//! `2σ² + s²/n1 + s²/n2`, so the excess of the squared difference over the
//! sampling noise estimates `2σ²`.

// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use alloc::string::String;
use alloc::vec::Vec;


use crate::error::{domain, Error, Result};
use crate::symmetric::SymmetricPriors;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArmSummary {
    pub n: u64,
    pub mean: f64,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PastExperiment {
    pub experiment_id: String,
    pub arms: Vec<ArmSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriorEstimate {
    pub mu: f64,
    pub sigma: f64,
    pub s: f64,
    /// The raw moment estimate of `σ²` was negative and was set to zero.
    pub sigma_truncated: bool,
    pub experiments: usize,
    /// Number of within-experiment arm pairs behind the `σ²` estimate.
    pub pairs: usize,
}

impl PriorEstimate {
    pub fn to_priors(&self) -> Result<SymmetricPriors> {
        if self.sigma <= 0.0 {
            return Err(domain("estimated sigma is zero: no uncertainty to resolve"));
        }
        SymmetricPriors::new(self.mu, self.sigma, self.s)
    }
}

/// Pooled within-arm standard deviation, weighting variances by `n − 1`.
pub fn pooled_sd(experiments: &[PastExperiment]) -> Result<f64> {
    let (mut ss, mut df) = (0.0, 0.0);
    for exp in experiments {
        for arm in &exp.arms {
            let sd = arm.sd.ok_or_else(|| {
                Error::InsufficientData(alloc::format!(
                    "experiment {} lacks arm sd; supply s explicitly",
                    exp.experiment_id
                ))
            })?;
            if arm.n > 1 {
                ss += (arm.n - 1) as f64 * sd * sd;
                df += (arm.n - 1) as f64;
            }
        }
    }
    if df == 0.0 {
        return Err(Error::InsufficientData("no arm has more than one observation".into()));
    }
    Ok((ss / df).sqrt())
}

/// Estimates `(μ, σ, s)`. With `s = None` the pooled arm sd is used.
///
/// Experiments with more than two arms contribute every pair of arms.
pub fn estimate_symmetric_priors(experiments: &[PastExperiment], s: Option<f64>) -> Result<PriorEstimate> {
    if experiments.len() < 3 {
        return Err(Error::InsufficientData(alloc::format!(
            "need at least 3 experiments, got {}",
            experiments.len()
        )));
    }
    for exp in experiments {
        if exp.arms.len() < 2 {
            return Err(domain(alloc::format!("experiment {} has fewer than 2 arms", exp.experiment_id)));
        }
        if exp.arms.iter().any(|a| a.n == 0 || !a.mean.is_finite()) {
            return Err(domain(alloc::format!(
                "experiment {} has an arm with n = 0 or a non-finite mean",
                exp.experiment_id
            )));
        }
    }
    let s = match s {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(_) => return Err(domain("s must be positive")),
        None => pooled_sd(experiments)?,
    };
    let s2 = s * s;

    let (mut weighted, mut weight) = (0.0, 0.0);
    let (mut excess, mut pairs) = (0.0, 0usize);
    for exp in experiments {
        for (i, a) in exp.arms.iter().enumerate() {
            weighted += a.n as f64 * a.mean;
            weight += a.n as f64;
            for b in &exp.arms[i + 1..] {
                let diff = a.mean - b.mean;
                excess += (diff * diff - s2 * (1.0 / a.n as f64 + 1.0 / b.n as f64)) / 2.0;
                pairs += 1;
            }
        }
    }
    let raw = excess / pairs as f64;
    Ok(PriorEstimate {
        mu: weighted / weight,
        sigma: raw.max(0.0).sqrt(),
        s,
        sigma_truncated: raw < 0.0,
        experiments: experiments.len(),
        pairs,
    })
}
