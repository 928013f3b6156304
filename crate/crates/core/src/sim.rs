//! Single-replicate Monte Carlo kernels.
//!
//! Replicate `r` draws everything from `RngStream::new(seed, r)`: the arm
//! means first, then whatever the policy needs. Two policies run on the same
//! `(seed, r)` therefore see the same true means, and test & roll designs that
//! differ only in cell sizes share their standardized cell-mean noise.

// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;


use crate::asymmetric::ArmPrior;
use crate::error::{domain, Result};
use crate::numerics::{expected_max_normal, RngStream};

/// Stream reserved for the Monte Carlo perfect-information reference.
pub const PI_REFERENCE_STREAM: u64 = u64::MAX;

/// Draws used for the Monte Carlo perfect-information reference.
pub const PI_REFERENCE_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateTruth {
    pub arm_means: Vec<f64>,
    pub replicate_index: u64,
}

impl ReplicateTruth {
    pub fn best_mean(&self) -> f64 {
        self.arm_means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum PolicySpec {
    /// Test with `cells[j]` customers on arm `j`, then deploy the arm with the
    /// highest posterior mean.
    TestRoll { cells: Vec<u64> },
    /// Thompson sampling, updating the posteriors every `batch_size` customers.
    Thompson { batch_size: u64 },
    /// Deploy a uniformly chosen arm to everyone.
    Random,
    /// Deploy the arm with the highest true mean to everyone.
    PerfectInfo,
    /// Test with `cells[j]` customers on arm `j`, then deploy the arm with
    /// the highest raw cell mean regardless of significance. Cells larger
    /// than `⌊N/K⌋` are capped.
    HtDeploy { cells: Vec<u64> },
}

impl PolicySpec {
    pub fn name(&self) -> String {
        match self {
            PolicySpec::TestRoll { cells } => format!("test_roll{}", cell_suffix(cells)),
            PolicySpec::Thompson { batch_size: 1 } => "thompson".into(),
            PolicySpec::Thompson { batch_size } => format!("thompson_batch{batch_size}"),
            PolicySpec::Random => "random".into(),
            PolicySpec::PerfectInfo => "perfect_info".into(),
            PolicySpec::HtDeploy { cells } => format!("ht_deploy{}", cell_suffix(cells)),
        }
    }

    pub fn validate(&self, arms: usize, population: u64) -> Result<()> {
        match self {
            PolicySpec::TestRoll { cells } => {
                if cells.len() != arms {
                    return Err(domain(format!("test_roll needs {arms} cell sizes, got {}", cells.len())));
                }
                let total = cells.iter().try_fold(0u64, |acc, &n| acc.checked_add(n));
                match total {
                    Some(t) if t <= population => Ok(()),
                    _ => Err(domain("test cells exceed the population")),
                }
            }
            PolicySpec::HtDeploy { cells } if cells.len() != arms => {
                Err(domain(format!("ht_deploy needs {arms} cell sizes, got {}", cells.len())))
            }
            PolicySpec::Thompson { batch_size: 0 } => Err(domain("thompson batch_size must be positive")),
            _ => Ok(()),
        }
    }
}

fn cell_suffix(cells: &[u64]) -> String {
    let mut out = String::new();
    for n in cells {
        out.push('_');
        out.push_str(&format!("{n}"));
    }
    out
}

/// Realized result of one policy on one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub replicate_index: u64,
    pub profit: f64,
    /// `N·max_j m_j − profit`.
    pub regret: f64,
    pub relative_regret: f64,
    /// Arm deployed after the test, where the policy has one.
    pub deployed: Option<usize>,
    /// Whether the deployed arm has a lower true mean than the best arm.
    pub error: Option<bool>,
    /// Whether hypothesis-test cells were capped at `⌊N/K⌋`.
    pub capped: bool,
}

/// Checks arm priors for simulation; `sigma = 0` is allowed here.
pub fn validate_arms(priors: &[ArmPrior]) -> Result<()> {
    if priors.len() < 2 {
        return Err(domain("need at least two arms"));
    }
    for arm in priors {
        if !arm.mu.is_finite() || !(arm.sigma >= 0.0 && arm.sigma.is_finite()) || !(arm.s > 0.0 && arm.s.is_finite()) {
            return Err(domain("arm priors need finite mu, sigma >= 0 and s > 0"));
        }
    }
    Ok(())
}

pub fn draw_truth(priors: &[ArmPrior], rng: &mut RngStream) -> ReplicateTruth {
    ReplicateTruth {
        arm_means: priors.iter().map(|a| rng.normal(a.mu, a.sigma)).collect(),
        replicate_index: rng.stream_index(),
    }
}

/// Runs `policy` on replicate `replicate_index` of the run keyed by `seed`.
pub fn run_replicate(
    policy: &PolicySpec,
    priors: &[ArmPrior],
    population: u64,
    seed: u64,
    replicate_index: u64,
) -> Result<ReplicateOutcome> {
    validate_arms(priors)?;
    policy.validate(priors.len(), population)?;
    let mut rng = RngStream::new(seed, replicate_index);
    let truth = draw_truth(priors, &mut rng);
    Ok(execute(policy, priors, population, &truth, &mut rng))
}

/// Runs a validated policy against drawn truth, continuing on `rng`.
pub fn execute(
    policy: &PolicySpec,
    priors: &[ArmPrior],
    population: u64,
    truth: &ReplicateTruth,
    rng: &mut RngStream,
) -> ReplicateOutcome {
    let big_n = population as f64;
    let means = &truth.arm_means;
    let best = truth.best_mean();
    let mut deployed = None;
    let mut error = None;
    let mut capped = false;
    let profit = match policy {
        PolicySpec::TestRoll { cells } => {
            let ybar = cell_means(priors, cells, means, rng);
            let posterior: Vec<f64> = priors
                .iter()
                .zip(cells)
                .zip(&ybar)
                .map(|((arm, &n), &y)| arm.posterior_mean(n, y))
                .collect();
            let j = argmax(&posterior);
            deployed = Some(j);
            error = Some(means[j] < best);
            staged_profit(cells, means, j, population)
        }
        PolicySpec::HtDeploy { cells } => {
            let cap = population / priors.len() as u64;
            capped = cells.iter().any(|&n| n > cap);
            let cells: Vec<u64> = cells.iter().map(|&n| n.min(cap)).collect();
            let ybar = cell_means(priors, &cells, means, rng);
            // empty cells never win against observed ones
            let scores: Vec<f64> = cells
                .iter()
                .zip(&ybar)
                .map(|(&n, &y)| if n > 0 { y } else { f64::NEG_INFINITY })
                .collect();
            let j = if cells.iter().all(|&n| n == 0) { 0 } else { argmax(&scores) };
            deployed = Some(j);
            staged_profit(&cells, means, j, population)
        }
        PolicySpec::Thompson { batch_size } => thompson_profit(priors, means, population, *batch_size, rng),
        PolicySpec::Random => {
            let j = rng.index(priors.len());
            deployed = Some(j);
            big_n * means[j]
        }
        PolicySpec::PerfectInfo => big_n * best,
    };
    let ceiling = big_n * best;
    let regret = ceiling - profit;
    ReplicateOutcome {
        replicate_index: truth.replicate_index,
        profit,
        regret,
        relative_regret: regret / ceiling,
        deployed,
        error,
        capped,
    }
}

/// Simulated cell means `ȳ_j ~ N(m_j, s_j²/n_j)`. One standard normal is drawn
/// per arm even for empty cells so that the stream stays aligned across
/// designs.
fn cell_means(priors: &[ArmPrior], cells: &[u64], means: &[f64], rng: &mut RngStream) -> Vec<f64> {
    priors
        .iter()
        .zip(cells)
        .zip(means)
        .map(|((arm, &n), &m)| {
            let z = rng.standard_normal();
            if n > 0 {
                m + arm.s / (n as f64).sqrt() * z
            } else {
                0.0
            }
        })
        .collect()
}

/// Test-stage profit booked at its conditional expectation `n_j m_j`.
fn staged_profit(cells: &[u64], means: &[f64], deployed: usize, population: u64) -> f64 {
    let tested: u64 = cells.iter().sum();
    let test: f64 = cells.iter().zip(means).map(|(&n, &m)| n as f64 * m).sum();
    test + (population - tested) as f64 * means[deployed]
}

/// Index of the largest value; ties go to the lowest index.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// Posterior `N(mean, var)` for one arm's mean response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalPosterior {
    pub mean: f64,
    pub var: f64,
}

impl NormalPosterior {
    pub fn from_prior(arm: &ArmPrior) -> Self {
        Self {
            mean: arm.mu,
            var: arm.sigma * arm.sigma,
        }
    }
}

/// Conjugate known-variance update of the chosen arm after observing `reward`.
pub fn thompson_step(posteriors: &mut [NormalPosterior], reward: f64, chosen: usize, s: f64) {
    let p = &mut posteriors[chosen];
    if p.var <= 0.0 {
        return;
    }
    let noise = s * s;
    let var = 1.0 / (1.0 / p.var + 1.0 / noise);
    p.mean = var * (p.mean / p.var + reward / noise);
    p.var = var;
}

/// Batched form of [`thompson_step`]: `count` rewards on one arm summing to `sum`.
fn thompson_batch_update(p: &mut NormalPosterior, sum: f64, count: u64, s: f64) {
    if p.var <= 0.0 || count == 0 {
        return;
    }
    let noise = s * s;
    let var = 1.0 / (1.0 / p.var + count as f64 / noise);
    p.mean = var * (p.mean / p.var + sum / noise);
    p.var = var;
}

fn thompson_profit(priors: &[ArmPrior], means: &[f64], population: u64, batch_size: u64, rng: &mut RngStream) -> f64 {
    let k = priors.len();
    let mut posteriors: Vec<NormalPosterior> = priors.iter().map(NormalPosterior::from_prior).collect();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0u64; k];
    let mut draws = vec![0.0; k];
    let mut profit = 0.0;
    let mut served = 0u64;
    while served < population {
        let batch = batch_size.min(population - served);
        for _ in 0..batch {
            for (d, p) in draws.iter_mut().zip(&posteriors) {
                *d = rng.normal(p.mean, p.var.sqrt());
            }
            let j = argmax(&draws);
            let reward = rng.normal(means[j], priors[j].s);
            profit += reward;
            if batch_size == 1 {
                thompson_step(&mut posteriors, reward, j, priors[j].s);
            } else {
                sums[j] += reward;
                counts[j] += 1;
            }
        }
        if batch_size > 1 {
            for j in 0..k {
                thompson_batch_update(&mut posteriors[j], sums[j], counts[j], priors[j].s);
                sums[j] = 0.0;
                counts[j] = 0;
            }
        }
        served += batch;
    }
    profit
}

/// Expected perfect-information profit `N·E[max_j m_j]`: closed form for two
/// arms, otherwise Monte Carlo on [`PI_REFERENCE_STREAM`].
pub fn perfect_information_reference(priors: &[ArmPrior], population: u64, seed: u64) -> Result<f64> {
    validate_arms(priors)?;
    let big_n = population as f64;
    if let [a, b] = priors {
        return Ok(big_n * expected_max_normal(a.mu, a.sigma, b.mu, b.sigma));
    }
    let mut rng = RngStream::new(seed, PI_REFERENCE_STREAM);
    let mut sum = 0.0;
    for _ in 0..PI_REFERENCE_DRAWS {
        sum += draw_truth(priors, &mut rng).best_mean();
    }
    Ok(big_n * sum / PI_REFERENCE_DRAWS as f64)
}

/// Summary of one policy over `R` replicates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimResult {
    pub policy: String,
    pub replicates: usize,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub per_replicate_profit: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub per_replicate_regret: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub per_replicate_relative_regret: Vec<f64>,
    pub mean_profit: f64,
    /// Sample sd over `√R`; `None` for a single replicate.
    pub mc_standard_error: Option<f64>,
    pub mean_regret: f64,
    pub regret_standard_error: Option<f64>,
    /// `(PI − mean_profit) / PI` against the expected perfect-information profit.
    pub relative_regret: f64,
    pub pi_reference: f64,
    /// Fraction of replicates deploying a worse arm; test & roll only.
    pub error_frequency: Option<f64>,
    /// Set when hypothesis-test cells had to be capped.
    pub capped: bool,
}

impl SimResult {
    /// Reduces outcomes in the given order, which callers keep sorted by
    /// replicate index so sums are reproducible.
    pub fn from_outcomes(policy: &PolicySpec, outcomes: &[ReplicateOutcome], pi_reference: f64) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(domain("need at least one replicate"));
        }
        let profit: Vec<f64> = outcomes.iter().map(|o| o.profit).collect();
        let regret: Vec<f64> = outcomes.iter().map(|o| o.regret).collect();
        let (mean_profit, mc_standard_error) = mean_and_se(&profit);
        let (mean_regret, regret_standard_error) = mean_and_se(&regret);
        let error_frequency = match policy {
            PolicySpec::TestRoll { .. } => {
                let errors = outcomes.iter().filter(|o| o.error == Some(true)).count();
                Some(errors as f64 / outcomes.len() as f64)
            }
            _ => None,
        };
        Ok(Self {
            policy: policy.name(),
            replicates: outcomes.len(),
            per_replicate_relative_regret: outcomes.iter().map(|o| o.relative_regret).collect(),
            per_replicate_profit: profit,
            per_replicate_regret: regret,
            mean_profit,
            mc_standard_error,
            mean_regret,
            regret_standard_error,
            relative_regret: (pi_reference - mean_profit) / pi_reference,
            pi_reference,
            error_frequency,
            capped: outcomes.iter().any(|o| o.capped),
        })
    }
}

/// Mean and standard error, summed in slice order.
pub fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, Some((ss / (r - 1.0)).sqrt() / r.sqrt()))
}

/// Sequential reference runner; the std crate provides the parallel one.
pub fn simulate_sequential(
    policy: &PolicySpec,
    priors: &[ArmPrior],
    population: u64,
    replicates: usize,
    seed: u64,
) -> Result<SimResult> {
    if replicates == 0 {
        return Err(domain("replicates must be at least 1"));
    }
    let outcomes = (0..replicates as u64)
        .map(|r| run_replicate(policy, priors, population, seed, r))
        .collect::<Result<Vec<_>>>()?;
    SimResult::from_outcomes(policy, &outcomes, perfect_information_reference(priors, population, seed)?)
}
