//! Parallel replicate drivers.
//!
//! Replicates fan out over a rayon pool and are collected back in replicate
//! order before any reduction, so results are bit-identical for any thread
//! count.

use rayon::prelude::*;
use testroll_core::sim::{perfect_information_reference, run_replicate, PolicySpec, ReplicateOutcome, SimResult};
use testroll_core::{ArmPrior, Error};

use crate::error::{AppError, AppResult};

/// Customer-steps (`N·R`) allowed for Thompson sampling by default.
pub const DEFAULT_THOMPSON_BUDGET: u64 = 10_000_000_000;

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub replicates: usize,
    pub seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub thompson_budget: u64,
}

impl SimOptions {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            threads: None,
            thompson_budget: DEFAULT_THOMPSON_BUDGET,
        }
    }

    pub fn threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> AppResult<T> {
        match self.threads {
            None => Ok(job()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| AppError::config("threads", e.to_string()))?;
                Ok(pool.install(job))
            }
        }
    }
}

fn check_budget(policy: &PolicySpec, population: u64, opts: &SimOptions) -> AppResult<()> {
    if let PolicySpec::Thompson { .. } = policy {
        let steps = population.saturating_mul(opts.replicates as u64);
        if steps > opts.thompson_budget {
            return Err(Error::Resource(format!(
                "thompson needs N·R = {steps} customer steps, budget is {}",
                opts.thompson_budget
            ))
            .into());
        }
    }
    Ok(())
}

/// Runs every replicate of one policy, in replicate order.
pub fn simulate_outcomes(
    policy: &PolicySpec,
    priors: &[ArmPrior],
    population: u64,
    opts: &SimOptions,
) -> AppResult<Vec<ReplicateOutcome>> {
    if opts.replicates == 0 {
        return Err(AppError::config("replicates", "must be at least 1"));
    }
    check_budget(policy, population, opts)?;
    let outcomes = opts.in_pool(|| {
        (0..opts.replicates as u64)
            .into_par_iter()
            .map(|r| run_replicate(policy, priors, population, opts.seed, r))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(outcomes)
}

pub fn simulate(policy: &PolicySpec, priors: &[ArmPrior], population: u64, opts: &SimOptions) -> AppResult<SimResult> {
    let pi = perfect_information_reference(priors, population, opts.seed)?;
    let outcomes = simulate_outcomes(policy, priors, population, opts)?;
    Ok(SimResult::from_outcomes(policy, &outcomes, pi)?)
}

/// One [`SimResult`] per policy, all sharing seed streams and the same
/// perfect-information reference.
pub fn regret_table(
    policies: &[PolicySpec],
    priors: &[ArmPrior],
    population: u64,
    opts: &SimOptions,
) -> AppResult<Vec<SimResult>> {
    if policies.is_empty() {
        return Ok(Vec::new());
    }
    for p in policies {
        check_budget(p, population, opts)?;
    }
    let pi = perfect_information_reference(priors, population, opts.seed)?;
    policies
        .iter()
        .map(|p| {
            let outcomes = simulate_outcomes(p, priors, population, opts)?;
            Ok(SimResult::from_outcomes(p, &outcomes, pi)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct KArmSearch {
    /// Per-arm cell size with the highest simulated mean profit.
    pub n: u64,
    pub mean_profit: f64,
    /// Every candidate evaluated, as `(n, mean profit)`, in evaluation order.
    pub evaluated: Vec<(u64, f64)>,
}

/// Equal per-arm cell size maximizing simulated test & roll profit for `k`
/// arms sharing one prior.
///
/// A coarse geometric grid over `0..=⌊N/k⌋` is refined around the incumbent
/// until the spacing is one. Every candidate reuses the same replicate
/// streams, so comparisons between candidates are paired.
pub fn karm_optimal_n(prior: ArmPrior, k: usize, population: u64, opts: &SimOptions) -> AppResult<KArmSearch> {
    if k < 2 {
        return Err(AppError::config("simulation.arms", "need at least two arms"));
    }
    let priors = vec![prior; k];
    let cap = population / k as u64;
    let mut cache: Vec<(u64, f64)> = Vec::new();
    let mut eval = |n: u64| -> AppResult<f64> {
        if let Some(&(_, v)) = cache.iter().find(|(m, _)| *m == n) {
            return Ok(v);
        }
        let policy = PolicySpec::TestRoll { cells: vec![n; k] };
        let outcomes = simulate_outcomes(&policy, &priors, population, opts)?;
        let mean = outcomes.iter().map(|o| o.profit).sum::<f64>() / outcomes.len() as f64;
        cache.push((n, mean));
        Ok(mean)
    };

    // geometric grid 0, 1, 2, 4, ... capped at ⌊N/k⌋
    let mut grid = vec![0u64];
    let mut g = 1u64;
    while g < cap {
        grid.push(g);
        g = (g as f64 * 1.5).ceil() as u64;
    }
    grid.push(cap);
    grid.dedup();

    let mut best = (0u64, f64::NEG_INFINITY);
    for &n in &grid {
        let v = eval(n)?;
        if v > best.1 {
            best = (n, v);
        }
    }
    let position = grid.iter().position(|&n| n == best.0).unwrap_or(0);
    let mut lo = grid[position.saturating_sub(1)];
    let mut hi = grid[(position + 1).min(grid.len() - 1)];
    loop {
        let span = hi - lo;
        if span <= 16 {
            for n in lo..=hi {
                let v = eval(n)?;
                if v > best.1 {
                    best = (n, v);
                }
            }
            break;
        }
        let step = span / 8;
        let mut n = lo;
        while n <= hi {
            let v = eval(n)?;
            if v > best.1 {
                best = (n, v);
            }
            n += step;
        }
        lo = best.0.saturating_sub(step).max(lo);
        hi = (best.0 + step).min(hi);
    }
    Ok(KArmSearch {
        n: best.0,
        mean_profit: best.1,
        evaluated: cache,
    })
}
