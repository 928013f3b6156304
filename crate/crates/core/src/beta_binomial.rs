//! Exact test & roll for conversion outcomes: each arm's conversion rate has
//! the shared prior `Beta(α, β)` and profit per conversion `v_j`.

// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;


use crate::error::{domain, Error, Result};
use crate::numerics::{beta_reg, integrate, ln_gamma, ln_gamma_ratio};
use crate::symmetric::{DesignReport, TestDesign};

/// Largest cell for which the exact sums are evaluated.
pub const MAX_CELL: u64 = 100_000;

/// Cell sizes up to this bound are searched exhaustively.
const EXHAUSTIVE_LIMIT: u64 = 2_000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaBinomialSpec {
    pub population: u64,
    pub alpha: f64,
    pub beta: f64,
    pub v1: f64,
    pub v2: f64,
}

impl BetaBinomialSpec {
    pub fn new(population: u64, alpha: f64, beta: f64, v1: f64, v2: f64) -> Result<Self> {
        let spec = Self {
            population,
            alpha,
            beta,
            v1,
            v2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(domain("population must be positive"));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(domain("alpha and beta must be positive"));
        }
        if !(self.v1 > 0.0 && self.v2 > 0.0 && self.v1.is_finite() && self.v2.is_finite()) {
            return Err(domain("profit per conversion must be positive"));
        }
        Ok(())
    }

    fn prior_mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Posterior expected profit per customer of arm 1 after `y` of `n` convert.
    fn value1(&self, y: u64, n: u64) -> f64 {
        self.v1 * (self.alpha + y as f64) / (self.alpha + self.beta + n as f64)
    }

    fn value2(&self, y: u64, n: u64) -> f64 {
        self.v2 * (self.alpha + y as f64) / (self.alpha + self.beta + n as f64)
    }
}

/// Beta-binomial probabilities of `y = 0..=n` conversions, computed in log space.
pub fn beta_binomial_masses(n: u64, alpha: f64, beta: f64) -> Vec<f64> {
    let nf = n as f64;
    // ln C(n, y) + ln B(y + α, n − y + β) − ln B(α, β), grouped into gamma
    // ratios with nearby arguments
    let constant = ln_gamma_ratio(nf, 1.0, alpha + beta) + ln_gamma(alpha + beta) - ln_gamma(alpha) - ln_gamma(beta);
    (0..=n)
        .map(|y| {
            let yf = y as f64;
            (constant + ln_gamma_ratio(yf, alpha, 1.0) + ln_gamma_ratio(nf - yf, beta, 1.0)).exp()
        })
        .collect()
}

pub fn bb_expected_test_profit(n1: u64, n2: u64, spec: &BetaBinomialSpec) -> f64 {
    (n1 as f64 * spec.v1 + n2 as f64 * spec.v2) * spec.prior_mean()
}

/// Real-valued crossover count `ỹ1`: arm 1 is deployed when `y1 ≥ ỹ1`.
pub fn bb_decision_threshold(y2: u64, n1: u64, n2: u64, spec: &BetaBinomialSpec) -> f64 {
    let ratio = spec.v2 / spec.v1 * (spec.alpha + spec.beta + n1 as f64) / (spec.alpha + spec.beta + n2 as f64);
    spec.alpha * (ratio - 1.0) + y2 as f64 * ratio
}

/// Which arm wins a tie in posterior expected profit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TieRule {
    #[default]
    FirstArm,
    SecondArm,
}

/// Smallest integer `y1` in `0..=n1 + 1` for which arm 1 is deployed given `y2`.
fn integer_threshold(y2: u64, n1: u64, n2: u64, spec: &BetaBinomialSpec, tie: TieRule) -> u64 {
    let target = spec.value2(y2, n2);
    let deploys_first = |y1: u64| match tie {
        TieRule::FirstArm => spec.value1(y1, n1) >= target,
        TieRule::SecondArm => spec.value1(y1, n1) > target,
    };
    let guess = bb_decision_threshold(y2, n1, n2, spec).ceil();
    let mut k = if guess <= 0.0 {
        0
    } else {
        (guess as u64).min(n1 + 1)
    };
    // the real threshold can be off by one after rounding; settle it directly
    while k > 0 && deploys_first(k - 1) {
        k -= 1;
    }
    while k <= n1 && !deploys_first(k) {
        k += 1;
    }
    k
}

fn check_cells(n1: u64, n2: u64, spec: &BetaBinomialSpec) -> Result<TestDesign> {
    spec.validate()?;
    if n1 > MAX_CELL || n2 > MAX_CELL {
        return Err(Error::Resource(format!(
            "beta-binomial cells above {MAX_CELL} are not evaluated exactly (got {n1}, {n2})"
        )));
    }
    TestDesign::new(spec.population, n1, n2)
}

/// Expected profit from deploying the posterior-best arm to the remaining
/// `N − n1 − n2` customers.
pub fn bb_expected_roll_profit(n1: u64, n2: u64, spec: &BetaBinomialSpec) -> Result<f64> {
    bb_expected_roll_profit_with(n1, n2, spec, TieRule::FirstArm)
}

pub fn bb_expected_roll_profit_with(n1: u64, n2: u64, spec: &BetaBinomialSpec, tie: TieRule) -> Result<f64> {
    let design = check_cells(n1, n2, spec)?;
    let w1 = beta_binomial_masses(n1, spec.alpha, spec.beta);
    let w2 = beta_binomial_masses(n2, spec.alpha, spec.beta);

    // below[k] = P(y1 < k); above[k] = E[value1(y1); y1 >= k]
    let len = n1 as usize + 2;
    let mut below = Vec::with_capacity(len);
    below.push(0.0);
    for (y1, w) in w1.iter().enumerate() {
        below.push(below[y1] + w);
    }
    let mut above = alloc::vec![0.0; len];
    for y1 in (0..=n1 as usize).rev() {
        above[y1] = above[y1 + 1] + w1[y1] * spec.value1(y1 as u64, n1);
    }

    let mut per_customer = 0.0;
    for (y2, w) in w2.iter().enumerate() {
        let y2 = y2 as u64;
        let k = integer_threshold(y2, n1, n2, spec, tie) as usize;
        per_customer += w * (above[k] + spec.value2(y2, n2) * below[k]);
    }
    Ok(design.remaining() as f64 * per_customer)
}

pub fn bb_expected_total_profit(n1: u64, n2: u64, spec: &BetaBinomialSpec) -> Result<f64> {
    Ok(bb_expected_test_profit(n1, n2, spec) + bb_expected_roll_profit(n1, n2, spec)?)
}

/// Equal-cell design maximizing expected total profit over `n ∈ 0..=n_max`.
///
/// Exhaustive up to 2,000; above that a golden-section search on the integers
/// followed by a sweep of ±5 around its optimum.
pub fn bb_optimal_design(spec: &BetaBinomialSpec, n_max: u64) -> Result<TestDesign> {
    spec.validate()?;
    if n_max > spec.population / 2 {
        return Err(domain("n_max must not exceed half the population"));
    }
    if n_max > MAX_CELL {
        return Err(Error::Resource(format!("n_max above {MAX_CELL}")));
    }
    let profit = |n: u64| bb_expected_total_profit(n, n, spec);

    let mut best = (0u64, profit(0)?);
    let consider = |n: u64, best: &mut (u64, f64)| -> Result<()> {
        let v = profit(n)?;
        if v > best.1 {
            *best = (n, v);
        }
        Ok(())
    };

    if n_max <= EXHAUSTIVE_LIMIT {
        for n in 1..=n_max {
            consider(n, &mut best)?;
        }
    } else {
        let centre = golden_section_argmax(0, n_max, |n| profit(n))?;
        for n in centre.saturating_sub(5)..=(centre + 5).min(n_max) {
            consider(n, &mut best)?;
        }
    }
    TestDesign::new(spec.population, best.0, best.0)
}

/// Golden-section search for the maximizer of a unimodal function on `lo..=hi`.
fn golden_section_argmax<F: FnMut(u64) -> Result<f64>>(mut lo: u64, mut hi: u64, mut f: F) -> Result<u64> {
    const INV_PHI: f64 = 0.618_033_988_749_895;
    while hi - lo > 3 {
        let step = ((hi - lo) as f64 * INV_PHI).round() as u64;
        let (a, b) = (hi - step, lo + step);
        let (a, b) = if a < b { (a, b) } else { (b, b + 1) };
        if f(a)? < f(b)? {
            lo = a;
        } else {
            hi = b;
        }
    }
    let mut best = (lo, f(lo)?);
    for n in lo + 1..=hi {
        let v = f(n)?;
        if v > best.1 {
            best = (n, v);
        }
    }
    Ok(best.0)
}

/// Normal approximation `(μ, s, σ)` to a `Beta(α, β)` prior on a conversion rate.
pub fn bb_to_normal_approx(alpha: f64, beta: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(domain("alpha and beta must be positive"));
    }
    let total = alpha + beta;
    let mu = alpha / total;
    let s = (mu * (1.0 - mu)).sqrt();
    let sigma = (alpha * beta / (total * total * (total + 1.0))).sqrt();
    Ok((mu, s, sigma))
}

/// `Beta(α, β)` with mean `mu` and standard deviation `sigma`.
pub fn normal_to_bb(mu: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(domain("mu must lie in (0, 1)"));
    }
    let total = mu * (1.0 - mu) / (sigma * sigma) - 1.0;
    if !(sigma > 0.0) || !(total > 0.0) {
        return Err(domain("sigma too large for a Beta prior with this mean"));
    }
    Ok((mu * total, (1.0 - mu) * total))
}

/// `N · E[max(v1 p1, v2 p2)]` with `p1, p2` independent draws from the prior.
pub fn bb_perfect_information_profit(spec: &BetaBinomialSpec) -> f64 {
    let (a, b) = (spec.alpha, spec.beta);
    let top = spec.v1.max(spec.v2);
    // E[max] = ∫ (1 − F1(x) F2(x)) dx over [0, top]
    let integrand = |x: f64| 1.0 - beta_reg(x / spec.v1, a, b) * beta_reg(x / spec.v2, a, b);
    let pieces = 64;
    let width = top / pieces as f64;
    let e_max: f64 = (0..pieces)
        .map(|i| integrate(integrand, i as f64 * width, (i + 1) as f64 * width, 1e-13 * top))
        .sum();
    spec.population as f64 * e_max
}

/// Closed-form report; the error rate is not computed for this model.
pub fn bb_evaluate(design: &TestDesign, spec: &BetaBinomialSpec) -> Result<DesignReport> {
    let test = bb_expected_test_profit(design.n1, design.n2, spec);
    let roll = bb_expected_roll_profit(design.n1, design.n2, spec)?;
    Ok(DesignReport::assemble(test, roll, None, bb_perfect_information_profit(spec)))
}
