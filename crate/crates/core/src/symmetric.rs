//! Symmetric Normal-Normal test & roll: both arms share the prior N(μ, σ²)
//! and the response noise s.

// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::{PI, SQRT_2};


use crate::error::{domain, Result};
use crate::numerics::{phi, SQRT_PI};

/// Shared prior for both arms.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetricPriors {
    /// Prior mean response per customer.
    pub mu: f64,
    /// Spread of the arm means around `mu`.
    pub sigma: f64,
    /// Within-arm response noise.
    pub s: f64,
}

impl SymmetricPriors {
    pub fn new(mu: f64, sigma: f64, s: f64) -> Result<Self> {
        let priors = Self { mu, sigma, s };
        priors.validate()?;
        Ok(priors)
    }

    /// Priors for a 0/1 response, with `s² = μ(1 − μ)`.
    pub fn binary(mu: f64, sigma: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(domain("binary response needs 0 < mu < 1"));
        }
        Self::new(mu, sigma, (mu * (1.0 - mu)).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(domain("mu must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain("sigma must be positive"));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(domain("s must be positive"));
        }
        Ok(())
    }
}

/// Population size and test cell sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestDesign {
    pub population: u64,
    pub n1: u64,
    pub n2: u64,
}

impl TestDesign {
    pub fn new(population: u64, n1: u64, n2: u64) -> Result<Self> {
        if population == 0 {
            return Err(domain("population must be positive"));
        }
        match n1.checked_add(n2) {
            Some(total) if total <= population => Ok(Self { population, n1, n2 }),
            _ => Err(domain("test cells exceed the population")),
        }
    }

    /// Customers left for the roll stage.
    pub fn remaining(&self) -> u64 {
        self.population - self.n1 - self.n2
    }
}

/// Closed-form evaluation of a design.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DesignReport {
    pub test_profit: f64,
    pub roll_profit: f64,
    pub total_profit: f64,
    /// Probability of deploying the arm with the lower true mean. `None`
    /// where the model has no closed form for it.
    pub error_rate: Option<f64>,
    pub pi_profit: f64,
    pub regret: f64,
    pub relative_regret: f64,
}

impl DesignReport {
    pub(crate) fn assemble(
        test_profit: f64,
        roll_profit: f64,
        error_rate: Option<f64>,
        pi_profit: f64,
    ) -> Self {
        let total_profit = test_profit + roll_profit;
        let regret = pi_profit - total_profit;
        Self {
            test_profit,
            roll_profit,
            total_profit,
            error_rate,
            pi_profit,
            regret,
            relative_regret: regret / pi_profit,
        }
    }
}

/// Continuous profit-maximizing cell size n* (equal cells).
pub fn optimal_n_symmetric(population: u64, s: f64, sigma: f64) -> Result<f64> {
    if population < 2 {
        return Err(domain("population must be at least 2"));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(domain("s must be positive"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain("sigma must be positive"));
    }
    let ratio = (s / sigma).powi(2);
    let n = population as f64;
    let a = 0.75 * ratio;
    // sqrt(N r/4 + a²) - a, rewritten to avoid cancellation when a dominates
    let inner = n * ratio / 4.0;
    Ok(inner / ((inner + a * a).sqrt() + a))
}

/// Rounds a continuous n* to the better of its two integer neighbours by
/// expected total profit. Ties go to the smaller cell.
pub fn integerize_design(n_star: f64, population: u64, priors: &SymmetricPriors) -> Result<TestDesign> {
    if !(n_star >= 0.0) || 2.0 * n_star >= population as f64 {
        return Err(domain("n_star must satisfy 0 <= 2 n* < N"));
    }
    let lo = n_star.floor() as u64;
    let hi = n_star.ceil() as u64;
    let profit = |n: u64| -> Option<f64> {
        let design = TestDesign::new(population, n, n).ok()?;
        Some(expected_test_profit(&design, priors) + expected_roll_profit(&design, priors))
    };
    let n = match (profit(lo), profit(hi)) {
        (Some(a), Some(b)) if b > a => hi,
        _ => lo,
    };
    TestDesign::new(population, n, n)
}

pub fn expected_test_profit(design: &TestDesign, priors: &SymmetricPriors) -> f64 {
    (design.n1 + design.n2) as f64 * priors.mu
}

/// Per-customer expected gain over random deployment after a test with
/// cells `n1`, `n2`. Zero when either cell is empty.
pub(crate) fn deployment_gain(n1: u64, n2: u64, sigma: f64, s: f64) -> f64 {
    if n1 == 0 || n2 == 0 {
        return 0.0;
    }
    let (n1, n2) = (n1 as f64, n2 as f64);
    let sigma2 = sigma * sigma;
    SQRT_2 * sigma2 / (SQRT_PI * (2.0 * sigma2 + (n1 + n2) / (n1 * n2) * s * s).sqrt())
}

pub fn expected_roll_profit(design: &TestDesign, priors: &SymmetricPriors) -> f64 {
    design.remaining() as f64
        * (priors.mu + deployment_gain(design.n1, design.n2, priors.sigma, priors.s))
}

/// Unconditional probability of deploying the inferior arm.
///
/// This is the sum of both error directions, `1/2 − arctan(·)/π`; either
/// direction alone is half of it. An empty cell means a random choice.
pub fn total_error_rate(design: &TestDesign, priors: &SymmetricPriors) -> f64 {
    if design.n1 == 0 || design.n2 == 0 {
        return 0.5;
    }
    let (n1, n2) = (design.n1 as f64, design.n2 as f64);
    let arg = SQRT_2 * priors.sigma / priors.s * (n1 * n2 / (n1 + n2)).sqrt();
    0.5 - arg.atan() / PI
}

/// Probability of deploying arm 1 given the true means.
pub fn conditional_error_rate(m1: f64, m2: f64, design: &TestDesign, s: f64) -> Result<f64> {
    if design.n1 == 0 || design.n2 == 0 {
        return Err(domain("conditional error rate needs both cells non-empty"));
    }
    if !(s > 0.0) {
        return Err(domain("s must be positive"));
    }
    let se = s * (1.0 / design.n1 as f64 + 1.0 / design.n2 as f64).sqrt();
    Ok(1.0 - phi((m2 - m1) / se))
}

/// Expected profit when the better arm is always deployed, `N(μ + σ/√π)`.
pub fn perfect_information_profit(population: u64, priors: &SymmetricPriors) -> f64 {
    population as f64 * (priors.mu + priors.sigma / SQRT_PI)
}

/// Expected regret against perfect information and its ratio to the
/// perfect-information profit.
///
/// Equal non-empty cells use the closed form; anything else falls back to
/// perfect-information profit minus the closed-form total.
pub fn expected_regret(design: &TestDesign, priors: &SymmetricPriors) -> (f64, f64) {
    let pi = perfect_information_profit(design.population, priors);
    let regret = if design.n1 == design.n2 && design.n1 > 0 {
        regret_at(design.population, design.n1 as f64, priors)
    } else {
        pi - expected_test_profit(design, priors) - expected_roll_profit(design, priors)
    };
    (regret, regret / pi)
}

/// Expected regret of equal cells of real-valued size `n > 0`, the closed
/// form evaluated without integer rounding (e.g. at the continuous n*).
pub fn regret_at(population: u64, n: f64, priors: &SymmetricPriors) -> f64 {
    let sigma = priors.sigma;
    let root = (sigma * sigma + priors.s * priors.s / n).sqrt();
    population as f64 * sigma / SQRT_PI * (1.0 - sigma / root) + 2.0 * n * sigma * sigma / (SQRT_PI * root)
}

/// Full closed-form report for a design.
pub fn evaluate_design(design: &TestDesign, priors: &SymmetricPriors) -> DesignReport {
    DesignReport::assemble(
        expected_test_profit(design, priors),
        expected_roll_profit(design, priors),
        Some(total_error_rate(design, priors)),
        perfect_information_profit(design.population, priors),
    )
}

/// Optimal integer design and its report.
pub fn plan_symmetric(population: u64, priors: &SymmetricPriors) -> Result<(TestDesign, DesignReport)> {
    priors.validate()?;
    let n_star = optimal_n_symmetric(population, priors.s, priors.sigma)?;
    let design = integerize_design(n_star, population, priors)?;
    Ok((design, evaluate_design(&design, priors)))
}
