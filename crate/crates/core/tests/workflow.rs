//! End-to-end use of the public API: estimate priors, plan, then check the
//! plan against simulation.

use testroll_core::asymmetric::{evaluate_asymmetric, optimize_design_asymmetric, pricing_to_priors};
use testroll_core::beta_binomial::{bb_to_normal_approx, normal_to_bb};
use testroll_core::priors::{estimate_symmetric_priors, ArmSummary, PastExperiment};
use testroll_core::sim::{simulate_sequential, PolicySpec};
use testroll_core::symmetric::{evaluate_design, plan_symmetric};
use testroll_core::{ArmPrior, PricingSpec, RngStream, SymmetricPriors, TestDesign};

#[test]
fn plan_agrees_with_simulation() {
    let priors = SymmetricPriors::new(1.0, 0.5, 8.0).unwrap();
    let (design, report) = plan_symmetric(20_000, &priors).unwrap();
    let arm = ArmPrior::new(1.0, 0.5, 8.0).unwrap();
    let sim = simulate_sequential(
        &PolicySpec::TestRoll { cells: vec![design.n1, design.n2] },
        &[arm, arm],
        20_000,
        4_000,
        3,
    )
    .unwrap();
    let se = sim.mc_standard_error.unwrap();
    assert!((sim.mean_profit - report.total_profit).abs() < 3.0 * se, "{} vs {}", sim.mean_profit, report.total_profit);
    let err = report.error_rate.unwrap();
    let freq = sim.error_frequency.unwrap();
    assert!((freq - err).abs() < 3.0 * (err * (1.0 - err) / 4_000.0).sqrt());
}

#[test]
fn estimated_priors_feed_the_planner() {
    let (mu, sigma, s) = (5.0, 0.8, 20.0);
    let mut rng = RngStream::new(11, 0);
    let experiments: Vec<_> = (0..400)
        .map(|j| {
            let arms = (0..2)
                .map(|_| {
                    let n = 5_000;
                    let m = rng.normal(mu, sigma);
                    ArmSummary {
                        n,
                        mean: rng.normal(m, s / (n as f64).sqrt()),
                        sd: Some(s),
                    }
                })
                .collect();
            PastExperiment {
                experiment_id: format!("e{j}"),
                arms,
            }
        })
        .collect();
    let est = estimate_symmetric_priors(&experiments, None).unwrap();
    assert!((est.mu - mu).abs() < 0.15);
    assert!((est.sigma - sigma).abs() < 0.1);
    let (design, _) = plan_symmetric(100_000, &est.to_priors().unwrap()).unwrap();
    let (truth, _) = plan_symmetric(100_000, &SymmetricPriors::new(mu, sigma, s).unwrap()).unwrap();
    assert!((design.n1 as f64 / truth.n1 as f64 - 1.0).abs() < 0.15);
}

#[test]
fn pricing_problem_yields_feasible_design() {
    let spec = PricingSpec {
        population: 50_000,
        p1: 10.0,
        p2: 12.0,
        a: 0.5,
        mu: 0.3,
        sigma: 0.05,
        s: 0.4,
    };
    let problem = pricing_to_priors(&spec).unwrap();
    let d = optimize_design_asymmetric(&problem).unwrap();
    assert!(d.n1 + d.n2 < d.population);
    let best = evaluate_asymmetric(&d, &problem).unwrap().total_profit;
    for (n1, n2) in [(0, 0), (d.n1 + 50, d.n2), (d.n1, d.n2 + 50)] {
        let other = evaluate_asymmetric(&TestDesign::new(50_000, n1, n2).unwrap(), &problem).unwrap();
        assert!(other.total_profit <= best);
    }
}

#[test]
fn beta_and_normal_mappings_invert() {
    let (alpha, beta) = normal_to_bb(0.68, 0.03).unwrap();
    let (mu, _, sigma) = bb_to_normal_approx(alpha, beta).unwrap();
    assert!((mu - 0.68).abs() < 1e-12);
    assert!((sigma - 0.03).abs() < 1e-12);
}

#[test]
fn no_test_design_is_prior_mean() {
    let p = SymmetricPriors::new(2.0, 1.0, 3.0).unwrap();
    let r = evaluate_design(&TestDesign::new(1_000, 0, 0).unwrap(), &p);
    assert_eq!(r.total_profit, 2_000.0);
}
