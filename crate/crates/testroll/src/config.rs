//! JSON run configuration.
//!
//! A config file holds one model plus optional hypothesis-test, design,
//! simulation and sweep sections. Command-line flags override file fields.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use testroll_core::asymmetric::{pricing_to_priors, ArmPrior, AsymmetricProblem, PricingSpec};
use testroll_core::baselines::{d_from_lift, d_from_prior_quartile, HtParams};
use testroll_core::beta_binomial::BetaBinomialSpec;
use testroll_core::sim::PolicySpec;
use testroll_core::SymmetricPriors;

use crate::error::{AppError, AppResult};
use crate::simulate::DEFAULT_THOMPSON_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    #[default]
    NnSymmetric,
    NnAsymmetric,
    BetaBinomial,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelKind,
    pub population: Option<u64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub s: Option<f64>,
    /// 0/1 responses: `s` follows from `mu`.
    #[serde(default)]
    pub binary: bool,
    /// Two arms for `nn-asymmetric`.
    pub arms: Option<Vec<ArmPrior>>,
    /// Two-price test for `nn-asymmetric`, as an alternative to `arms`.
    pub pricing: Option<PricingInput>,
    pub beta_binomial: Option<BetaBinomialInput>,
    pub ht: Option<HtInput>,
    pub design: Option<DesignInput>,
    pub simulation: Option<SimulationInput>,
    pub sweep: Option<SweepInput>,
    /// Diagnostics written by the `priors` command; ignored on input.
    pub estimation: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingInput {
    pub p1: f64,
    pub p2: f64,
    pub a: f64,
    pub mu: f64,
    pub sigma: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaBinomialInput {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub v1: f64,
    #[serde(default = "one")]
    pub v2: f64,
    /// Largest per-arm cell searched; defaults to `⌊N/2⌋`.
    pub n_max: Option<u64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HtInput {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_power")]
    pub power: f64,
    /// Minimum detectable difference.
    pub d: Option<f64>,
    /// Relative lift over the (first arm's) prior mean, as an alternative to `d`.
    pub lift: Option<f64>,
    /// Use the upper quartile of the prior `|m1 − m2|` as `d`.
    #[serde(default)]
    pub quartile: bool,
}

impl Default for HtInput {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            power: default_power(),
            d: None,
            lift: None,
            quartile: true,
        }
    }
}

fn default_alpha() -> f64 {
    0.05
}

fn default_power() -> f64 {
    0.8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignInput {
    pub n1: u64,
    pub n2: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedPolicy {
    /// Test & roll at the profit-maximizing design.
    Optimal,
    /// Hypothesis-test cells, deploying the winner regardless of significance.
    Ht,
    /// As `ht` with the finite-population correction.
    HtFpc,
    Thompson,
    Random,
    PerfectInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicyInput {
    Named(NamedPolicy),
    Explicit(PolicySpec),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationInput {
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub policies: Option<Vec<PolicyInput>>,
    /// Number of arms for `nn-symmetric`; defaults to 2.
    pub arms: Option<usize>,
    pub threads: Option<usize>,
    /// Largest `N·R` allowed for Thompson sampling.
    pub thompson_budget: Option<u64>,
    /// Per-replicate draws CSV.
    pub draws: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Population,
    S,
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepInput {
    pub parameter: SweepParameter,
    pub values: Option<Vec<f64>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    /// Space the `from..to` grid geometrically.
    #[serde(default)]
    pub log: bool,
}

pub const DEFAULT_REPLICATES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

/// A validated model.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Symmetric { population: u64, priors: SymmetricPriors },
    Asymmetric(AsymmetricProblem),
    BetaBinomial { spec: BetaBinomialSpec, n_max: u64 },
}

impl Problem {
    pub fn population(&self) -> u64 {
        match self {
            Problem::Symmetric { population, .. } => *population,
            Problem::Asymmetric(p) => p.population,
            Problem::BetaBinomial { spec, .. } => spec.population,
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            Problem::Symmetric { .. } => "nn-symmetric",
            Problem::Asymmetric(_) => "nn-asymmetric",
            Problem::BetaBinomial { .. } => "beta-binomial",
        }
    }
}

fn no_uncertainty(field: &str) -> AppError {
    AppError::config(field, "sigma is 0: no uncertainty to resolve")
}

fn positive(field: &str, v: f64) -> AppResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(AppError::config(field, format!("must be a positive number, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::config("config", e.to_string()))
    }

    fn population(&self) -> AppResult<u64> {
        match self.population {
            Some(n) if n >= 2 => Ok(n),
            Some(n) => Err(AppError::config("population", format!("must be at least 2, got {n}"))),
            None => Err(AppError::config("population", "missing")),
        }
    }

    pub fn problem(&self) -> AppResult<Problem> {
        let population = self.population()?;
        match self.model {
            ModelKind::NnSymmetric => {
                let mu = self.mu.ok_or_else(|| AppError::config("mu", "missing"))?;
                if !mu.is_finite() {
                    return Err(AppError::config("mu", "must be finite"));
                }
                let sigma = self.sigma.ok_or_else(|| AppError::config("sigma", "missing"))?;
                if sigma == 0.0 {
                    return Err(no_uncertainty("sigma"));
                }
                positive("sigma", sigma)?;
                let priors = if self.binary {
                    if self.s.is_some() {
                        return Err(AppError::config("s", "must be omitted for binary responses"));
                    }
                    if !(mu > 0.0 && mu < 1.0) {
                        return Err(AppError::config("mu", "binary responses need 0 < mu < 1"));
                    }
                    SymmetricPriors::binary(mu, sigma)?
                } else {
                    let s = self.s.ok_or_else(|| AppError::config("s", "missing (or set binary)"))?;
                    SymmetricPriors::new(mu, sigma, positive("s", s)?)?
                };
                Ok(Problem::Symmetric { population, priors })
            }
            ModelKind::NnAsymmetric => {
                let problem = match (&self.arms, &self.pricing) {
                    (Some(arms), None) => {
                        if arms.len() != 2 {
                            return Err(AppError::config("arms", "nn-asymmetric needs exactly two arms"));
                        }
                        for (i, arm) in arms.iter().enumerate() {
                            if arm.sigma == 0.0 {
                                return Err(no_uncertainty(&format!("arms[{i}].sigma")));
                            }
                            arm.validate()
                                .map_err(|e| AppError::config(format!("arms[{i}]"), e.to_string()))?;
                        }
                        AsymmetricProblem::new(population, arms[0], arms[1])?
                    }
                    (None, Some(p)) => {
                        if p.sigma == 0.0 {
                            return Err(no_uncertainty("pricing.sigma"));
                        }
                        pricing_to_priors(&PricingSpec {
                            population,
                            p1: p.p1,
                            p2: p.p2,
                            a: p.a,
                            mu: p.mu,
                            sigma: p.sigma,
                            s: p.s,
                        })
                        .map_err(|e| AppError::config("pricing", e.to_string()))?
                    }
                    (Some(_), Some(_)) => return Err(AppError::config("arms", "give either arms or pricing, not both")),
                    (None, None) => return Err(AppError::config("arms", "missing (or give pricing)")),
                };
                Ok(Problem::Asymmetric(problem))
            }
            ModelKind::BetaBinomial => {
                let bb = self
                    .beta_binomial
                    .ok_or_else(|| AppError::config("beta_binomial", "missing"))?;
                let spec = BetaBinomialSpec::new(population, bb.alpha, bb.beta, bb.v1, bb.v2)
                    .map_err(|e| AppError::config("beta_binomial", e.to_string()))?;
                let n_max = bb.n_max.unwrap_or(population / 2);
                if n_max > population / 2 {
                    return Err(AppError::config("beta_binomial.n_max", "must not exceed half the population"));
                }
                Ok(Problem::BetaBinomial { spec, n_max })
            }
        }
    }

    /// Hypothesis-test parameters for the model, if an `ht` section is present.
    pub fn ht_params(&self, problem: &Problem) -> AppResult<Option<HtParams>> {
        let Some(ht) = self.ht else {
            return Ok(None);
        };
        let (base_mean, sigma, s1, s2) = match problem {
            Problem::Symmetric { priors, .. } => (priors.mu, priors.sigma, priors.s, priors.s),
            Problem::Asymmetric(p) => (
                p.arm1.mu,
                ((p.arm1.sigma.powi(2) + p.arm2.sigma.powi(2)) / 2.0).sqrt(),
                p.arm1.s,
                p.arm2.s,
            ),
            Problem::BetaBinomial { .. } => {
                return Err(AppError::config("ht", "hypothesis-test baselines need a Normal model"))
            }
        };
        let d = resolve_d(&ht, base_mean, sigma)?;
        let params = HtParams {
            alpha: ht.alpha,
            power: ht.power,
            d,
            s1,
            s2,
            population: Some(problem.population()),
        };
        params.validate().map_err(|e| AppError::config("ht", e.to_string()))?;
        Ok(Some(params))
    }

    pub fn simulation(&self) -> SimulationInput {
        self.simulation.clone().unwrap_or_default()
    }

    pub fn thompson_budget(&self) -> u64 {
        self.simulation
            .as_ref()
            .and_then(|s| s.thompson_budget)
            .unwrap_or(DEFAULT_THOMPSON_BUDGET)
    }
}

/// `d` from exactly one of an explicit value, a lift or the quartile rule.
pub fn resolve_d(ht: &HtInput, base_mean: f64, sigma: f64) -> AppResult<f64> {
    let given = [ht.d.is_some(), ht.lift.is_some(), ht.quartile];
    match given {
        [true, false, false] => positive("ht.d", ht.d.unwrap_or_default()),
        [false, true, false] => {
            d_from_lift(ht.lift.unwrap_or_default(), base_mean).map_err(|e| AppError::config("ht.lift", e.to_string()))
        }
        [false, false, true] => Ok(d_from_prior_quartile(sigma)?),
        [false, false, false] => Err(AppError::config("ht", "give one of d, lift or quartile")),
        _ => Err(AppError::config("ht", "give only one of d, lift or quartile")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_binary() {
        let c = RunConfig::from_json(r#"{"population": 100000, "mu": 0.68, "sigma": 0.03, "binary": true}"#).unwrap();
        let Problem::Symmetric { priors, .. } = c.problem().unwrap() else {
            panic!()
        };
        assert!((priors.s - 0.2176f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_sigma_rejected() {
        let c = RunConfig::from_json(r#"{"population": 1000, "mu": 0.5, "sigma": 0, "s": 1}"#).unwrap();
        let err = c.problem().unwrap_err();
        assert!(err.to_string().contains("no uncertainty to resolve"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(RunConfig::from_json(r#"{"populaton": 1000}"#).is_err());
    }

    #[test]
    fn missing_field_named() {
        let c = RunConfig::from_json(r#"{"population": 1000, "sigma": 0.1, "s": 1}"#).unwrap();
        assert!(c.problem().unwrap_err().to_string().contains("`mu`"));
    }

    #[test]
    fn policies_parse() {
        let c = RunConfig::from_json(
            r#"{"simulation": {"policies": ["optimal", "thompson", {"kind": "test_roll", "cells": [10, 10]}, {"kind": "thompson", "batch_size": 10}]}}"#,
        )
        .unwrap();
        let p = c.simulation().policies.unwrap();
        assert_eq!(p[0], PolicyInput::Named(NamedPolicy::Optimal));
        assert_eq!(p[2], PolicyInput::Explicit(PolicySpec::TestRoll { cells: vec![10, 10] }));
        assert_eq!(p[3], PolicyInput::Explicit(PolicySpec::Thompson { batch_size: 10 }));
    }

    #[test]
    fn d_choices() {
        let ht = HtInput { lift: Some(0.02), quartile: false, ..HtInput::default() };
        assert!((resolve_d(&ht, 0.68, 0.03).unwrap() - 0.0136).abs() < 1e-15);
        let both = HtInput { lift: Some(0.02), ..HtInput::default() };
        assert!(resolve_d(&both, 0.68, 0.03).is_err());
    }
}
