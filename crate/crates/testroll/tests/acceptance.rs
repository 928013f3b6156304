//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values.

use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use testroll::cli::{execute, Cli};
use testroll::simulate::{regret_table, simulate, SimOptions};
use testroll_core::asymmetric::{
    error_rate_asymmetric, expected_profit_asymmetric, incumbent_challenger_n, optimize_design_asymmetric,
    AsymmetricProblem,
};
use testroll_core::baselines::{n_hypothesis_test, n_hypothesis_test_fpc, n_hypothesis_test_unequal, HtParams};
use testroll_core::beta_binomial::{
    bb_expected_roll_profit, bb_optimal_design, bb_to_normal_approx, beta_binomial_masses, BetaBinomialSpec,
};
use testroll_core::sim::PolicySpec;
use testroll_core::symmetric::{
    evaluate_design, expected_roll_profit, regret_at, optimal_n_symmetric, plan_symmetric, total_error_rate,
};
use testroll_core::{ArmPrior, RngStream, SymmetricPriors, TestDesign};

use clap::Parser;

struct Checks {
    criterion: &'static str,
    items: Vec<(bool, String)>,
}

impl Checks {
    fn new(criterion: &'static str) -> Self {
        Self {
            criterion,
            items: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        self.items.push((ok, detail.into()));
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{what} = {got} (want {want} ± {tol})"));
    }

    fn rel(&mut self, what: &str, got: f64, want: f64, frac: f64) {
        let r = got / want - 1.0;
        self.check(r.abs() <= frac, format!("{what} = {got} ({:+.3}% vs {want}, band ±{}%)", 100.0 * r, 100.0 * frac));
    }

    fn within_time(&mut self, what: &str, took: Duration, limit: Duration) {
        self.check(took <= limit, format!("{what} took {took:.2?} (limit {limit:?})"));
    }

    fn finish(self) {
        let pass = self.items.iter().all(|(ok, _)| *ok);
        println!("{}: {}", self.criterion, if pass { "PASS" } else { "FAIL" });
        for (ok, detail) in &self.items {
            println!("  [{}] {detail}", if *ok { "ok" } else { "FAIL" });
        }
        assert!(pass, "{} failed", self.criterion);
    }
}

fn website() -> SymmetricPriors {
    SymmetricPriors::binary(0.68, 0.03).unwrap()
}

fn display_ads() -> SymmetricPriors {
    SymmetricPriors::new(10.36, 4.40, 103.77).unwrap()
}

fn catalog() -> AsymmetricProblem {
    AsymmetricProblem::new(
        100_000,
        ArmPrior::new(19.39, 20.97, 87.69).unwrap(),
        ArmPrior::new(30.06, 13.48, 179.36).unwrap(),
    )
    .unwrap()
}

#[test]
fn criterion_01_website_closed_form() {
    let mut c = Checks::new("criterion 1 (website closed forms)");
    let start = Instant::now();
    let priors = website();
    let (design, report) = plan_symmetric(100_000, &priors).unwrap();
    let no_test = evaluate_design(&TestDesign::new(100_000, 0, 0).unwrap(), &priors);
    let took = start.elapsed();
    c.near("n*", design.n1 as f64, 2_284.0, 1.0);
    c.check(design.n1 == design.n2, format!("equal cells {design:?}"));
    c.near("test-stage conversions", report.test_profit, 3_106.0, 1.0);
    c.near("overall", report.total_profit, 69_536.0, 2.0);
    c.near("error rate (pp)", 100.0 * report.error_rate.unwrap(), 10.0, 0.05);
    c.near("relative regret (pp)", 100.0 * report.relative_regret, 0.22, 0.01);
    c.near("perfect information", report.pi_profit, 69_693.0, 1.0);
    c.check(no_test.total_profit == 68_000.0, format!("no-test overall = {}", no_test.total_profit));
    c.within_time("closed forms", took, Duration::from_secs(1));
    c.finish();
}

#[test]
fn criterion_02_website_baselines() {
    let mut c = Checks::new("criterion 2 (website hypothesis-test baselines)");
    let params = HtParams::equal(0.05, 0.8, 0.0136, 0.2176f64.sqrt()).with_population(100_000);
    let n = n_hypothesis_test(&params).unwrap();
    let fpc = n_hypothesis_test_fpc(&params).unwrap();
    c.near("n_HT", n as f64, 18_468.0, 1.0);
    c.near("n_FPC", fpc as f64, 13_487.0, 1.0);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("website.json");
    std::fs::write(&config, r#"{"model": "nn-symmetric", "population": 100000, "mu": 0.68, "sigma": 0.03, "binary": true}"#).unwrap();
    let out = dir.path().join("eval.json");
    let cli = Cli::try_parse_from([
        "testroll",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
        "evaluate",
        "--n1",
        "18468",
        "--n2",
        "18468",
    ])
    .unwrap();
    execute(&cli).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let total = v["report"]["total_profit"].as_f64().unwrap();
    let rel = v["report"]["relative_regret"].as_f64().unwrap();
    c.near("evaluate overall at HT design", total, 69_060.0, 5.0);
    c.near("evaluate relative regret at HT design (pp)", 100.0 * rel, 0.91, 0.02);
    c.finish();
}

#[test]
fn criterion_03_display_ads() {
    let mut c = Checks::new("criterion 3 (display advertising)");
    let priors = display_ads();
    let n_star = optimal_n_symmetric(1_000_000, priors.s, priors.sigma).unwrap();
    let (design, report) = plan_symmetric(1_000_000, &priors).unwrap();
    c.rel("n*", design.n1 as f64, 11_391.0, 0.002);
    c.check(true, format!("continuous n* = {n_star:.2}"));
    c.near("error rate (pp)", 100.0 * report.error_rate.unwrap(), 6.9, 0.1);
    c.rel("overall", report.total_profit, 12_727_000.0, 0.001);
    c.rel("perfect information", report.pi_profit, 12_840_000.0, 0.001);
    let fpc = n_hypothesis_test_fpc(&HtParams::equal(0.05, 0.8, 0.19, 103.77).with_population(1_000_000)).unwrap();
    c.rel("n_FPC", fpc as f64, 452_673.0, 0.005);
    c.near("relative regret (pp)", 100.0 * report.relative_regret, 0.89, 0.02);
    c.finish();
}

#[test]
fn criterion_04_catalog_asymmetric() {
    let mut c = Checks::new("criterion 4 (catalog asymmetric design)");
    let problem = catalog();
    let start = Instant::now();
    let design = optimize_design_asymmetric(&problem).unwrap();

    // exhaustive lattice search on a 3,000 x 3,000 window around the optimizer's answer
    let lo1 = design.n1.saturating_sub(1_500);
    let lo2 = design.n2.saturating_sub(1_500);
    let mut best = (0u64, 0u64, f64::NEG_INFINITY);
    for n1 in lo1..lo1 + 3_000 {
        for n2 in lo2..lo2 + 3_000 {
            if let Ok(p) = expected_profit_asymmetric(n1, n2, &problem) {
                if p.total > best.2 {
                    best = (n1, n2, p.total);
                }
            }
        }
    }
    let took = start.elapsed();
    let got = expected_profit_asymmetric(design.n1, design.n2, &problem).unwrap().total;
    c.check(
        (design.n1, design.n2) == (best.0, best.1),
        format!("optimizer {:?} = lattice argmax ({}, {}), profit {got:.1} vs {:.1}", (design.n1, design.n2), best.0, best.1, best.2),
    );
    c.near("n1 vs published 588", design.n1 as f64, 588.0, 1.0);
    c.near("n2 vs published 1,884", design.n2 as f64, 1_884.0, 1.0);
    let published = expected_profit_asymmetric(588, 1_884, &problem).unwrap().total;
    c.check(true, format!("expected profit at (588, 1884) = {published:.1}"));

    let ht = HtParams {
        alpha: 0.05,
        power: 0.8,
        d: 4.8475,
        s1: 87.69,
        s2: 179.36,
        population: None,
    };
    let (h1, h2) = n_hypothesis_test_unequal(&ht).unwrap();
    c.near("unequal HT n1", h1 as f64, 7_822.0, 1.0);
    c.near("unequal HT n2", h2 as f64, 15_999.0, 1.0);

    let sim = simulate(
        &PolicySpec::TestRoll { cells: vec![design.n1, design.n2] },
        &[problem.arm1, problem.arm2],
        100_000,
        &SimOptions::new(10_000, 4),
    )
    .unwrap();
    c.rel("simulated overall", sim.mean_profit, 3_476_000.0, 0.025);
    c.within_time("optimizer + lattice", took, Duration::from_secs(120));
    c.finish();
}

/// Random parameter set drawn from a fixed stream.
fn random_arm(rng: &mut RngStream) -> ArmPrior {
    ArmPrior {
        mu: rng.normal(0.0, 5.0),
        sigma: 0.1 + 2.0 * rng.uniform(),
        s: 1.0 + 20.0 * rng.uniform(),
    }
}

#[test]
fn criterion_05_monte_carlo_oracles() {
    let mut c = Checks::new("criterion 5 (Monte Carlo oracle suite)");
    let start = Instant::now();
    let mut rng = RngStream::new(2_019, 0);
    let reps = 10_000;
    for case in 0..10 {
        let symmetric = case < 5;
        let population = 1_000 + (rng.uniform() * 99_000.0) as u64;
        let a1 = random_arm(&mut rng);
        let a2 = if symmetric { a1 } else { random_arm(&mut rng) };
        let n1 = 1 + (rng.uniform() * population as f64 * 0.05) as u64;
        let n2 = if symmetric { n1 } else { (rng.uniform() * population as f64 * 0.05) as u64 };
        let problem = AsymmetricProblem::new(population, a1, a2).unwrap();
        let (want, error) = if symmetric {
            let p = SymmetricPriors::new(a1.mu, a1.sigma, a1.s).unwrap();
            let r = evaluate_design(&TestDesign::new(population, n1, n2).unwrap(), &p);
            (r.total_profit, r.error_rate.unwrap())
        } else {
            (
                expected_profit_asymmetric(n1, n2, &problem).unwrap().total,
                error_rate_asymmetric(n1, n2, &problem),
            )
        };
        let res = simulate(
            &PolicySpec::TestRoll { cells: vec![n1, n2] },
            &[a1, a2],
            population,
            &SimOptions::new(reps, 500 + case),
        )
        .unwrap();
        let se = res.mc_standard_error.unwrap();
        let kind = if symmetric { "symmetric" } else { "asymmetric" };
        c.check(
            (res.mean_profit - want).abs() <= 3.0 * se,
            format!("{kind} case {case}: profit {:.2} vs {want:.2}, {:.2} SE", res.mean_profit, (res.mean_profit - want) / se),
        );
        let freq = res.error_frequency.unwrap();
        let se_e = (error * (1.0 - error) / reps as f64).sqrt();
        c.check(
            (freq - error).abs() <= 3.0 * se_e,
            format!("{kind} case {case}: error {freq:.4} vs {error:.4}, {:.2} SE", (freq - error) / se_e),
        );
    }
    c.within_time("suite", start.elapsed(), Duration::from_secs(60));
    c.finish();
}

#[test]
fn criterion_06_thompson_benchmark() {
    let mut c = Checks::new("criterion 6 (Thompson sampling benchmark)");
    let start = Instant::now();
    let priors = website();
    let arm = ArmPrior {
        mu: priors.mu,
        sigma: priors.sigma,
        s: priors.s,
    };
    let (design, _) = plan_symmetric(100_000, &priors).unwrap();
    let policies = [
        PolicySpec::PerfectInfo,
        PolicySpec::Thompson { batch_size: 1 },
        PolicySpec::TestRoll { cells: vec![design.n1, design.n2] },
    ];
    let table = regret_table(&policies, &[arm, arm], 100_000, &SimOptions::new(1_000, 6)).unwrap();
    // regret against the realized perfect-information profit of the same replicates
    let pi_total: f64 = table[0].per_replicate_profit.iter().sum();
    let relative = |k: usize| table[k].per_replicate_regret.iter().sum::<f64>() / pi_total;
    let (thompson, test_roll) = (relative(1), relative(2));
    c.check(
        (0.0..=0.0015).contains(&thompson),
        format!("thompson relative regret {:.4}% in [0%, 0.15%]", 100.0 * thompson),
    );
    c.check(
        thompson < test_roll,
        format!("thompson {:.4}% < test_roll(n*) {:.4}% (paired)", 100.0 * thompson, 100.0 * test_roll),
    );
    c.within_time("benchmark", start.elapsed(), Duration::from_secs(300));
    c.finish();
}

#[test]
fn criterion_07_incumbent_challenger() {
    let mut c = Checks::new("criterion 7 (incumbent/challenger)");
    let (s, sigma1, population) = (1.0, 0.1, 100_000u64);
    for i in 1..=10 {
        let ratio = 1.0 + 0.3 * i as f64;
        let (n1, n2) = incumbent_challenger_n(population, s, sigma1, ratio).unwrap();
        let problem = AsymmetricProblem::new(
            population,
            ArmPrior::new(0.0, sigma1, s).unwrap(),
            ArmPrior::new(0.0, ratio * sigma1, s).unwrap(),
        )
        .unwrap();
        let d = optimize_design_asymmetric(&problem).unwrap();
        c.check(
            (d.n1 as f64 - n1).abs() <= 1.0 && (d.n2 as f64 - n2).abs() <= 1.0,
            format!("c = {ratio:.1}: closed form ({n1:.2}, {n2:.2}) vs optimizer ({}, {})", d.n1, d.n2),
        );
    }
    // (2c⁴ − c² − 1)s²/(c²σ1²) = 675 for c = 2
    let threshold = 675u64;
    let (at, _) = incumbent_challenger_n(threshold, s, sigma1, 2.0).unwrap();
    let (above, _) = incumbent_challenger_n(threshold + 1, s, sigma1, 2.0).unwrap();
    c.check(at == 0.0 && above > 0.0, format!("n1 at N = 675 is {at}, at N = 676 is {above:.4}"));
    let problem = |n| {
        AsymmetricProblem::new(n, ArmPrior::new(0.0, sigma1, s).unwrap(), ArmPrior::new(0.0, 2.0 * sigma1, s).unwrap())
            .unwrap()
    };
    let below = optimize_design_asymmetric(&problem(600)).unwrap();
    c.check(below.n1 == 0, format!("optimizer below threshold (N = 600): {below:?}"));
    c.finish();
}

#[test]
fn criterion_08_beta_binomial() {
    use rand_distr_free::*;
    let mut c = Checks::new("criterion 8 (beta-binomial)");

    let spec = BetaBinomialSpec::new(10, 1.0, 1.0, 1.0, 1.0).unwrap();
    let want = 8.0 * (1.0 / 3.0 + 3.0 * 2.0 / 3.0) / 4.0;
    let got = bb_expected_roll_profit(1, 1, &spec).unwrap();
    c.near("4-case enumeration", got, want, 1e-12);

    for (k, (spec, n1, n2)) in [
        (BetaBinomialSpec::new(100, 2.0, 8.0, 5.0, 5.0).unwrap(), 7u64, 3u64),
        (BetaBinomialSpec::new(500, 1.0, 1.0, 1.0, 2.0).unwrap(), 30, 30),
        (BetaBinomialSpec::new(1_000, 0.5, 4.5, 3.0, 2.0).unwrap(), 12, 25),
    ]
    .into_iter()
    .enumerate()
    {
        let (mean, se) = simulate_bb_roll(&spec, n1, n2, 1_000_000, k as u64);
        let exact = bb_expected_roll_profit(n1, n2, &spec).unwrap();
        c.check(
            (mean - exact).abs() <= 3.0 * se,
            format!("MC roll ({n1}, {n2}): {mean:.4} vs exact {exact:.4}, {:.2} SE", (mean - exact) / se),
        );
    }

    let population = 100_000;
    for precision in [2.0, 100.0] {
        for i in 1..=19 {
            let mu = 0.05 * i as f64;
            let (alpha, beta) = (mu * precision, (1.0 - mu) * precision);
            let spec = BetaBinomialSpec::new(population, alpha, beta, 1.0, 1.0).unwrap();
            let bb = bb_optimal_design(&spec, population / 2).unwrap().n1 as f64;
            let (_, s, sigma) = bb_to_normal_approx(alpha, beta).unwrap();
            let nn = optimal_n_symmetric(population, s, sigma).unwrap();
            let gap = (bb - nn).abs() / bb;
            c.check(
                gap <= 0.15,
                format!("precision {precision}, mu {mu:.2}: BB {bb}, NN {nn:.1}, gap {:.1}%", 100.0 * gap),
            );
        }
    }
    let spec = BetaBinomialSpec::new(population, 1.0, 99.0, 1.0, 1.0).unwrap();
    let bb = bb_optimal_design(&spec, population / 2).unwrap().n1 as f64;
    let (_, s, sigma) = bb_to_normal_approx(1.0, 99.0).unwrap();
    let nn = optimal_n_symmetric(population, s, sigma).unwrap();
    c.check(nn < bb, format!("mu 0.01, precision 100: NN {nn:.1} < BB {bb}"));

    let total: f64 = beta_binomial_masses(30, 2.0, 8.0).iter().sum();
    c.near("total probability n = 30", total, 1.0, 1e-10);
    c.finish();
}

/// Beta and binomial draws by inversion, independent of the library code.
mod rand_distr_free {
    use testroll_core::beta_binomial::{bb_decision_threshold, BetaBinomialSpec};
    use testroll_core::numerics::beta_cdf;
    use testroll_core::RngStream;

    fn beta_draw(a: f64, b: f64, rng: &mut RngStream) -> f64 {
        let u = rng.uniform();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if beta_cdf(mid, a, b).unwrap() < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn binomial_draw(n: u64, p: f64, rng: &mut RngStream) -> u64 {
        (0..n).filter(|_| rng.uniform() < p).count() as u64
    }

    pub fn simulate_bb_roll(spec: &BetaBinomialSpec, n1: u64, n2: u64, reps: usize, stream: u64) -> (f64, f64) {
        let mut rng = RngStream::new(88, stream);
        let remaining = (spec.population - n1 - n2) as f64;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..reps {
            let p1 = beta_draw(spec.alpha, spec.beta, &mut rng);
            let p2 = beta_draw(spec.alpha, spec.beta, &mut rng);
            let y1 = binomial_draw(n1, p1, &mut rng);
            let y2 = binomial_draw(n2, p2, &mut rng);
            // deploy arm 1 when y1 reaches the crossover; ties go to arm 1
            let first = y1 as f64 >= bb_decision_threshold(y2, n1, n2, spec) - 1e-9;
            let v = remaining * if first { spec.v1 * p1 } else { spec.v2 * p2 };
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / reps as f64;
        (mean, ((sumsq / reps as f64 - mean * mean) / reps as f64).sqrt())
    }
}

#[test]
fn criterion_09_property_suite() {
    let mut c = Checks::new("criterion 9 (property suite)");
    let config = Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    };
    let mut run = |name: &str, result: Result<(), String>| c.check(result.is_ok(), format!("{name}: {}", result.err().unwrap_or_else(|| "256 cases".into())));

    let mut runner = TestRunner::new(config.clone());
    let r = runner.run(&(2u64..100_000_000, 0.01f64..100.0, 0.001f64..10.0), |(n, s, sigma)| {
        let n_star = optimal_n_symmetric(n, s, sigma).unwrap();
        prop_assert!(n_star <= (n as f64).sqrt() * s / (2.0 * sigma) * (1.0 + 1e-12));
        Ok(())
    });
    run("n* <= sqrt(N) s / (2 sigma)", r.map_err(|e| e.to_string()));

    let mut runner = TestRunner::new(config.clone());
    let r = runner.run(&(0.01f64..100.0, 0.001f64..10.0, 1.0f64..1e4, -10.0f64..10.0), |(s, sigma, factor, mu)| {
        let threshold = 4.0 * s * s / (sigma * sigma);
        let n = (threshold * (1.0 + factor)).ceil();
        prop_assume!(n < 1e15);
        let n = n as u64;
        prop_assume!(n as f64 > threshold && n >= 2);
        let priors = SymmetricPriors::new(mu, sigma, s).unwrap();
        let regret = regret_at(n, optimal_n_symmetric(n, s, sigma).unwrap(), &priors);
        let bound = 3.0 * s * (n as f64).sqrt() / std::f64::consts::PI.sqrt();
        prop_assert!(regret <= bound, "regret {} bound {}", regret, bound);
        Ok(())
    });
    run("regret at continuous n* <= 3 s sqrt(N) / sqrt(pi)", r.map_err(|e| e.to_string()));

    let mut runner = TestRunner::new(config.clone());
    let r = runner.run(&(1_000u64..10_000_000, 0.01f64..100.0), |(n, s)| {
        // sigma grid spanning s/sigma from 1e4 down to 1e-2
        let grid: Vec<f64> = (0..=120).map(|i| s * 10f64.powf(-4.0 + 6.0 * i as f64 / 120.0)).collect();
        let rel: Vec<f64> = grid
            .iter()
            .map(|&sigma| {
                let priors = SymmetricPriors::new(1.0, sigma, s).unwrap();
                plan_symmetric(n, &priors).unwrap().1.relative_regret
            })
            .collect();
        let (argmax, _) = rel.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        prop_assert!(argmax > 0 && argmax < grid.len() - 1, "argmax at grid edge {}", argmax);
        Ok(())
    });
    run("relative regret has an interior maximum over sigma", r.map_err(|e| e.to_string()));

    let mut runner = TestRunner::new(config.clone());
    let r = runner.run(&(1u64..10_000, 1u64..10_000, 0.01f64..10.0, 0.01f64..10.0), |(n, extra, s, sigma)| {
        let population = 2 * (n + extra) + 2;
        let p = SymmetricPriors::new(0.0, sigma, s).unwrap();
        let e = |n: u64, p: &SymmetricPriors| total_error_rate(&TestDesign::new(population, n, n).unwrap(), p);
        prop_assert!(e(n + extra, &p) < e(n, &p));
        prop_assert!(e(n, &SymmetricPriors::new(0.0, sigma, s * 1.5).unwrap()) > e(n, &p));
        prop_assert!(e(n, &SymmetricPriors::new(0.0, sigma * 1.5, s).unwrap()) < e(n, &p));
        prop_assert!(e(n, &p) < 0.5);
        Ok(())
    });
    run("error rate decreasing in n and sigma, increasing in s", r.map_err(|e| e.to_string()));

    let mut runner = TestRunner::new(config);
    let r = runner.run(
        &(2u64..10_000_000, -10.0f64..10.0, 0.001f64..10.0, 0.01f64..100.0, 0.0f64..1.0),
        |(population, mu, sigma, s, frac)| {
            let n = ((population / 2) as f64 * frac) as u64;
            let design = TestDesign::new(population, n, n).unwrap();
            let priors = SymmetricPriors::new(mu, sigma, s).unwrap();
            let arm = ArmPrior::new(mu, sigma, s).unwrap();
            let problem = AsymmetricProblem::new(population, arm, arm).unwrap();
            let sym = expected_roll_profit(&design, &priors);
            let asym = expected_profit_asymmetric(n, n, &problem).unwrap().roll;
            prop_assert!((sym - asym).abs() <= 1e-12 * sym.abs().max(1.0), "{} vs {}", sym, asym);
            Ok(())
        },
    );
    run("asymmetric roll profit reduces to symmetric at 1e-12", r.map_err(|e| e.to_string()));
    c.finish();
}

#[test]
fn criterion_10_determinism_across_threads() {
    let mut c = Checks::new("criterion 10 (determinism across worker threads)");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        r#"{
            "model": "nn-symmetric", "population": 20000, "mu": 0.68, "sigma": 0.03, "binary": true,
            "ht": {"lift": 0.02},
            "simulation": {"policies": ["perfect_info", "thompson", "optimal", "ht", "random"]}
        }"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8", "1"] {
        let out = dir.path().join(format!("out_{threads}_{}.csv", outputs.len()));
        let draws = dir.path().join(format!("draws_{threads}_{}.csv", outputs.len()));
        let cli = Cli::try_parse_from([
            "testroll",
            "--config",
            config.to_str().unwrap(),
            "--format",
            "csv",
            "--seed",
            "17",
            "--replicates",
            "300",
            "--threads",
            threads,
            "--output",
            out.to_str().unwrap(),
            "--draws",
            draws.to_str().unwrap(),
            "simulate",
        ])
        .unwrap();
        execute(&cli).unwrap();
        outputs.push((threads, std::fs::read(&out).unwrap(), std::fs::read(&draws).unwrap()));
    }
    let (_, summary, draws) = &outputs[0];
    for (threads, s, d) in &outputs[1..] {
        c.check(s == summary, format!("summary CSV with {threads} threads identical ({} bytes)", s.len()));
        c.check(d == draws, format!("draws CSV with {threads} threads identical ({} bytes)", d.len()));
    }
    c.finish();
}
