//! Subcommand implementations, returning structured results.

use serde::Serialize;
use testroll_core::asymmetric::{evaluate_asymmetric, optimize_design_asymmetric};
use testroll_core::baselines::{n_hypothesis_test, n_hypothesis_test_fpc, n_hypothesis_test_unequal, HtParams};
use testroll_core::beta_binomial::{bb_evaluate, bb_optimal_design};
use testroll_core::priors::{estimate_symmetric_priors, PriorEstimate};
use testroll_core::sim::{PolicySpec, SimResult};
use testroll_core::symmetric::{evaluate_design, optimal_n_symmetric, plan_symmetric};
use testroll_core::{ArmPrior, DesignReport, SymmetricPriors, TestDesign};

use crate::config::{resolve_d, NamedPolicy, PolicyInput, Problem, RunConfig, SweepInput, SweepParameter};
use crate::error::{AppError, AppResult};
use crate::simulate::{karm_optimal_n, regret_table, KArmSearch, SimOptions};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanOutput {
    pub model: &'static str,
    pub design: TestDesign,
    /// Real-valued optimum before rounding (symmetric model only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_star: Option<f64>,
    pub report: DesignReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_test: Option<HtOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HtOutput {
    pub d: f64,
    pub n1: u64,
    pub n2: u64,
    /// Report at the hypothesis-test cells; absent when they exceed `N`.
    pub report: Option<DesignReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_fpc: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report_fpc: Option<DesignReport>,
    pub exceeds_population: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateOutput {
    pub model: &'static str,
    pub design: TestDesign,
    pub report: DesignReport,
}

pub fn evaluate(problem: &Problem, n1: u64, n2: u64) -> AppResult<EvaluateOutput> {
    let design = TestDesign::new(problem.population(), n1, n2)?;
    Ok(EvaluateOutput {
        model: problem.model_name(),
        design,
        report: report_for(problem, &design)?,
    })
}

fn report_for(problem: &Problem, design: &TestDesign) -> AppResult<DesignReport> {
    Ok(match problem {
        Problem::Symmetric { priors, .. } => evaluate_design(design, priors),
        Problem::Asymmetric(p) => evaluate_asymmetric(design, p)?,
        Problem::BetaBinomial { spec, .. } => bb_evaluate(design, spec)?,
    })
}

fn optimal_design(problem: &Problem) -> AppResult<(TestDesign, Option<f64>)> {
    Ok(match problem {
        Problem::Symmetric { population, priors } => {
            let (design, _) = plan_symmetric(*population, priors)?;
            (design, Some(optimal_n_symmetric(*population, priors.s, priors.sigma)?))
        }
        Problem::Asymmetric(p) => (optimize_design_asymmetric(p)?, None),
        Problem::BetaBinomial { spec, n_max } => (bb_optimal_design(spec, *n_max)?, None),
    })
}

pub fn plan(config: &RunConfig, problem: &Problem) -> AppResult<PlanOutput> {
    let (design, n_star) = optimal_design(problem)?;
    let report = report_for(problem, &design)?;
    let hypothesis_test = match config.ht_params(problem)? {
        Some(params) => Some(ht_output(problem, &params)?),
        None => None,
    };
    Ok(PlanOutput {
        model: problem.model_name(),
        design,
        n_star,
        report,
        hypothesis_test,
    })
}

fn ht_output(problem: &Problem, params: &HtParams) -> AppResult<HtOutput> {
    let population = problem.population();
    let at = |n1: u64, n2: u64| -> AppResult<Option<DesignReport>> {
        match n1.checked_add(n2) {
            Some(t) if t <= population => Ok(Some(report_for(problem, &TestDesign::new(population, n1, n2)?)?)),
            _ => Ok(None),
        }
    };
    match problem {
        Problem::Symmetric { .. } => {
            let n = n_hypothesis_test(params)?;
            let fpc = n_hypothesis_test_fpc(params)?;
            Ok(HtOutput {
                d: params.d,
                n1: n,
                n2: n,
                report: at(n, n)?,
                n_fpc: Some(fpc),
                report_fpc: at(fpc, fpc)?,
                exceeds_population: n.saturating_mul(2) > population,
            })
        }
        _ => {
            let (n1, n2) = n_hypothesis_test_unequal(params)?;
            Ok(HtOutput {
                d: params.d,
                n1,
                n2,
                report: at(n1, n2)?,
                n_fpc: None,
                report_fpc: None,
                exceeds_population: n1.saturating_add(n2) > population,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateOutput {
    pub model: &'static str,
    pub population: u64,
    pub arms: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub karm_search: Option<KArmSearch>,
    pub results: Vec<SimResult>,
}

/// Arm priors used by the simulator.
pub fn simulation_arms(config: &RunConfig, problem: &Problem) -> AppResult<Vec<ArmPrior>> {
    match problem {
        Problem::Symmetric { priors, .. } => {
            let k = config.simulation().arms.unwrap_or(2);
            if k < 2 {
                return Err(AppError::config("simulation.arms", "need at least two arms"));
            }
            Ok(vec![
                ArmPrior {
                    mu: priors.mu,
                    sigma: priors.sigma,
                    s: priors.s,
                };
                k
            ])
        }
        Problem::Asymmetric(p) => {
            if config.simulation().arms.is_some_and(|k| k != 2) {
                return Err(AppError::config("simulation.arms", "nn-asymmetric simulates exactly two arms"));
            }
            Ok(vec![p.arm1, p.arm2])
        }
        Problem::BetaBinomial { .. } => Err(AppError::config("model", "simulation supports the Normal models only")),
    }
}

fn default_policies(config: &RunConfig) -> Vec<PolicyInput> {
    let mut out = vec![PolicyInput::Named(NamedPolicy::PerfectInfo), PolicyInput::Named(NamedPolicy::Thompson)];
    out.push(PolicyInput::Named(NamedPolicy::Optimal));
    if config.ht.is_some() {
        out.push(PolicyInput::Named(NamedPolicy::Ht));
    }
    out.push(PolicyInput::Named(NamedPolicy::Random));
    out
}

pub fn simulate(config: &RunConfig, problem: &Problem, opts: &SimOptions) -> AppResult<SimulateOutput> {
    let arms = simulation_arms(config, problem)?;
    let k = arms.len();
    let population = problem.population();
    let inputs = config.simulation().policies.unwrap_or_else(|| default_policies(config));
    let mut karm_search = None;
    let mut policies = Vec::with_capacity(inputs.len());
    for input in &inputs {
        let policy = match input {
            PolicyInput::Explicit(p) => p.clone(),
            PolicyInput::Named(NamedPolicy::Optimal) => {
                if k == 2 {
                    let (d, _) = optimal_design(problem)?;
                    PolicySpec::TestRoll { cells: vec![d.n1, d.n2] }
                } else {
                    let search = karm_optimal_n(arms[0], k, population, opts)?;
                    let cells = vec![search.n; k];
                    karm_search = Some(search);
                    PolicySpec::TestRoll { cells }
                }
            }
            PolicyInput::Named(named @ (NamedPolicy::Ht | NamedPolicy::HtFpc)) => {
                let params = config
                    .ht_params(problem)?
                    .ok_or_else(|| AppError::config("ht", "the ht policies need an `ht` section"))?;
                let cells = match (problem, named) {
                    (Problem::Symmetric { .. }, NamedPolicy::Ht) => vec![n_hypothesis_test(&params)?; k],
                    (Problem::Symmetric { .. }, _) => vec![n_hypothesis_test_fpc(&params)?; k],
                    (_, NamedPolicy::Ht) => {
                        let (n1, n2) = n_hypothesis_test_unequal(&params)?;
                        vec![n1, n2]
                    }
                    _ => {
                        return Err(AppError::config(
                            "simulation.policies",
                            "ht_fpc has no unequal-variance form; use ht",
                        ))
                    }
                };
                PolicySpec::HtDeploy { cells }
            }
            PolicyInput::Named(NamedPolicy::Thompson) => PolicySpec::Thompson { batch_size: 1 },
            PolicyInput::Named(NamedPolicy::Random) => PolicySpec::Random,
            PolicyInput::Named(NamedPolicy::PerfectInfo) => PolicySpec::PerfectInfo,
        };
        policy
            .validate(k, population)
            .map_err(|e| AppError::config("simulation.policies", e.to_string()))?;
        policies.push(policy);
    }
    let results = regret_table(&policies, &arms, population, opts)?;
    Ok(SimulateOutput {
        model: problem.model_name(),
        population,
        arms: k,
        replicates: opts.replicates,
        seed: opts.seed,
        karm_search,
        results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub n_star: f64,
    pub n_ht: u64,
    pub n_fpc: u64,
}

pub fn sweep_grid(sweep: &SweepInput) -> AppResult<Vec<f64>> {
    let grid = match (&sweep.values, sweep.from, sweep.to, sweep.steps) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(from), Some(to), Some(steps)) => {
            if steps == 0 {
                return Err(AppError::config("sweep.steps", "must be at least 1"));
            }
            if !(from.is_finite() && to.is_finite()) || to < from {
                return Err(AppError::config("sweep", "need finite bounds with from <= to"));
            }
            if sweep.log && from <= 0.0 {
                return Err(AppError::config("sweep.from", "log grid needs from > 0"));
            }
            (0..steps)
                .map(|i| {
                    let t = if steps == 1 { 0.0 } else { i as f64 / (steps - 1) as f64 };
                    if sweep.log {
                        from * (to / from).powf(t)
                    } else {
                        from + (to - from) * t
                    }
                })
                .collect()
        }
        _ => return Err(AppError::config("sweep", "give either values or from, to and steps")),
    };
    if grid.is_empty() {
        return Err(AppError::config("sweep.values", "grid is empty"));
    }
    Ok(grid)
}

/// `n*`, `n_HT` and `n_FPC` across a grid of one parameter. Without an `ht`
/// section, `d` follows the prior-quartile rule at each grid point.
pub fn sweep(config: &RunConfig, problem: &Problem, sweep: &SweepInput) -> AppResult<Vec<SweepRow>> {
    let Problem::Symmetric { population, priors } = problem else {
        return Err(AppError::config("model", "sweep supports nn-symmetric only"));
    };
    let ht = config.ht.unwrap_or_default();
    sweep_grid(sweep)?
        .into_iter()
        .map(|value| {
            let (mut n, mut p) = (*population, *priors);
            match sweep.parameter {
                SweepParameter::Population => {
                    if !(value >= 2.0 && value.fract() == 0.0 && value <= u64::MAX as f64) {
                        return Err(AppError::config("sweep", format!("population {value} is not an integer >= 2")));
                    }
                    n = value as u64;
                }
                SweepParameter::S => p = SymmetricPriors::new(p.mu, p.sigma, value)?,
                SweepParameter::Sigma => p = SymmetricPriors::new(p.mu, value, p.s)?,
            }
            let d = resolve_d(&ht, p.mu, p.sigma)?;
            let params = HtParams::equal(ht.alpha, ht.power, d, p.s).with_population(n);
            Ok(SweepRow {
                value,
                n_star: optimal_n_symmetric(n, p.s, p.sigma)?,
                n_ht: n_hypothesis_test(&params)?,
                n_fpc: n_hypothesis_test_fpc(&params)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorsOutput {
    pub model: &'static str,
    pub mu: f64,
    pub sigma: f64,
    pub s: f64,
    pub estimation: PriorEstimate,
}

pub fn priors(path: &std::path::Path, s: Option<f64>) -> AppResult<PriorsOutput> {
    let file = std::fs::File::open(path).map_err(|source| AppError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let experiments = crate::io::read_experiments(std::io::BufReader::new(file))?;
    let est = estimate_symmetric_priors(&experiments, s)?;
    Ok(PriorsOutput {
        model: "nn-symmetric",
        mu: est.mu,
        sigma: est.sigma,
        s: est.s,
        estimation: est,
    })
}
