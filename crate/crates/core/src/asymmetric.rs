//! Normal-Normal test & roll with separate priors per arm.


// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Error, Result};
use crate::numerics::{expected_max_normal, gain_over_first, integrate, normal_pdf, phi};
use crate::optim::NelderMead;
use crate::symmetric::{optimal_n_symmetric, DesignReport, TestDesign};

/// Prior and noise for one arm: `m ~ N(mu, sigma²)`, responses `~ N(m, s²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArmPrior {
    pub mu: f64,
    pub sigma: f64,
    pub s: f64,
}

impl ArmPrior {
    pub fn new(mu: f64, sigma: f64, s: f64) -> Result<Self> {
        let arm = Self { mu, sigma, s };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(domain("arm mu must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain("arm sigma must be positive"));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(domain("arm s must be positive"));
        }
        Ok(())
    }

    /// Posterior mean of `m` after `n` responses averaging `ybar`.
    pub fn posterior_mean(&self, n: u64, ybar: f64) -> f64 {
        if n == 0 {
            return self.mu;
        }
        let prior_precision = 1.0 / (self.sigma * self.sigma);
        let data_precision = n as f64 / (self.s * self.s);
        (self.mu * prior_precision + ybar * data_precision) / (prior_precision + data_precision)
    }

    /// Prior-predictive variance of the posterior mean after `n` responses,
    /// `σ⁴ / (σ² + s²/n)`; zero without data.
    fn information(&self, n: f64) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        let sigma2 = self.sigma * self.sigma;
        sigma2 * sigma2 * n / (sigma2 * n + self.s * self.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymmetricProblem {
    pub population: u64,
    pub arm1: ArmPrior,
    pub arm2: ArmPrior,
}

impl AsymmetricProblem {
    pub fn new(population: u64, arm1: ArmPrior, arm2: ArmPrior) -> Result<Self> {
        let problem = Self {
            population,
            arm1,
            arm2,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(domain("population must be at least 2"));
        }
        self.arm1.validate()?;
        self.arm2.validate()
    }
}

/// Two candidate prices with linear demand `d = a − m·p + ε`,
/// `m ~ N(mu, sigma²)`, `ε ~ N(0, s²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PricingSpec {
    pub population: u64,
    pub p1: f64,
    pub p2: f64,
    pub a: f64,
    pub mu: f64,
    pub sigma: f64,
    pub s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ArmChoice {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfitBreakdown {
    pub test: f64,
    pub roll: f64,
    pub total: f64,
}

/// Deploys the arm with the larger posterior mean; exact ties go to arm 1.
pub fn posterior_mean_decision(
    ybar1: f64,
    n1: u64,
    ybar2: f64,
    n2: u64,
    problem: &AsymmetricProblem,
) -> ArmChoice {
    if problem.arm1.posterior_mean(n1, ybar1) >= problem.arm2.posterior_mean(n2, ybar2) {
        ArmChoice::First
    } else {
        ArmChoice::Second
    }
}

/// Expected profit with real-valued cell sizes; the optimizer's objective.
pub(crate) fn profit_continuous(n1: f64, n2: f64, problem: &AsymmetricProblem) -> (f64, f64) {
    let (a1, a2) = (&problem.arm1, &problem.arm2);
    let test = a1.mu * n1 + a2.mu * n2;
    let v = (a1.information(n1) + a2.information(n2)).sqrt();
    let per_customer = a1.mu + gain_over_first(a2.mu - a1.mu, v);
    (test, (problem.population as f64 - n1 - n2) * per_customer)
}

pub fn expected_profit_asymmetric(n1: u64, n2: u64, problem: &AsymmetricProblem) -> Result<ProfitBreakdown> {
    TestDesign::new(problem.population, n1, n2)?;
    let (test, roll) = profit_continuous(n1 as f64, n2 as f64, problem);
    Ok(ProfitBreakdown {
        test,
        roll,
        total: test + roll,
    })
}

/// Probability that the posterior-mean rule deploys the arm with the lower
/// true mean.
///
/// With `P` the difference of posterior means and `D = m1 − m2`, `D | P` is
/// `N(P, w² − v²)`, so the error is `E[Φ(−|P| / √(w² − v²))]` over
/// `P ~ N(μ1 − μ2, v²)`, evaluated by quadrature.
pub fn error_rate_asymmetric(n1: u64, n2: u64, problem: &AsymmetricProblem) -> f64 {
    let (a1, a2) = (&problem.arm1, &problem.arm2);
    let mean = a1.mu - a2.mu;
    let v2 = a1.information(n1 as f64) + a2.information(n2 as f64);
    let w2 = a1.sigma * a1.sigma + a2.sigma * a2.sigma;
    let tau = (w2 - v2).max(0.0).sqrt();
    if v2 <= 0.0 {
        return phi(-mean.abs() / w2.sqrt());
    }
    if tau == 0.0 {
        return 0.0;
    }
    let v = v2.sqrt();
    let integrand = |z: f64| phi(-(mean + v * z).abs() / tau) * normal_pdf(z);
    let (lo, hi) = (-12.0, 12.0);
    let kink = -mean / v;
    if kink > lo && kink < hi {
        integrate(integrand, lo, kink, 1e-13) + integrate(integrand, kink, hi, 1e-13)
    } else {
        integrate(integrand, lo, hi, 1e-13)
    }
}

/// `N · E[max(m1, m2)]`.
pub fn perfect_information_profit_asymmetric(problem: &AsymmetricProblem) -> f64 {
    let (a1, a2) = (&problem.arm1, &problem.arm2);
    problem.population as f64 * expected_max_normal(a1.mu, a1.sigma, a2.mu, a2.sigma)
}

pub fn evaluate_asymmetric(design: &TestDesign, problem: &AsymmetricProblem) -> Result<DesignReport> {
    let profit = expected_profit_asymmetric(design.n1, design.n2, problem)?;
    Ok(DesignReport::assemble(
        profit.test,
        profit.roll,
        Some(error_rate_asymmetric(design.n1, design.n2, problem)),
        perfect_information_profit_asymmetric(problem),
    ))
}

const EVALUATION_BUDGET: usize = 100_000;

/// Integer `(n1, n2)` maximizing expected total profit.
///
/// Multi-start Nelder-Mead on the continuous objective over the feasible
/// triangle, then an integer hill climb from the surrounding lattice points.
pub fn optimize_design_asymmetric(problem: &AsymmetricProblem) -> Result<TestDesign> {
    problem.validate()?;
    let big_n = problem.population as f64;
    let (a1, a2) = (&problem.arm1, &problem.arm2);
    let scale = 1.0 + a1.mu.abs() + a2.mu.abs() + a1.sigma + a2.sigma;
    let objective = |x: &[f64; 2]| {
        let (p, dist) = project(x, big_n);
        let (t, r) = profit_continuous(p[0], p[1], problem);
        t + r - scale * dist
    };

    let s_bar = ((a1.s * a1.s + a2.s * a2.s) / 2.0).sqrt();
    let sigma_bar = ((a1.sigma * a1.sigma + a2.sigma * a2.sigma) / 2.0).sqrt();
    let warm = optimal_n_symmetric(problem.population, s_bar, sigma_bar)?.max(1.0);
    let starts = [
        [warm, warm],
        [warm / 4.0, warm],
        [warm, warm / 4.0],
        [1.0, 1.0],
        [big_n / 8.0, big_n / 8.0],
    ];

    let nm = NelderMead {
        max_evaluations: 8_000,
        x_tolerance: 1e-4,
    };
    let mut evaluations = 0;
    let mut best: Option<([f64; 2], f64)> = None;
    let mut all_converged = true;
    for start in starts {
        let start = project(&start, big_n).0;
        let step = [start[0].max(4.0) * 0.25, start[1].max(4.0) * 0.25];
        let first = nm.maximize(objective, start, step);
        // restart from the result to escape a collapsed simplex
        let restart_step = [first.x[0].abs().max(4.0) * 0.05, first.x[1].abs().max(4.0) * 0.05];
        let second = nm.maximize(objective, first.x, restart_step);
        evaluations += first.evaluations + second.evaluations;
        all_converged &= second.converged;
        if best.map_or(true, |(_, v)| second.value > v) {
            best = Some((second.x, second.value));
        }
    }
    let (x, _) = best.expect("at least one start");
    let x = project(&x, big_n).0;

    let population = problem.population;
    let value = |n1: u64, n2: u64| -> Option<f64> {
        if n1.checked_add(n2)? > population {
            return None;
        }
        let (t, r) = profit_continuous(n1 as f64, n2 as f64, problem);
        Some(t + r)
    };
    let mut candidates = [
        (x[0].floor(), x[1].floor()),
        (x[0].floor(), x[1].ceil()),
        (x[0].ceil(), x[1].floor()),
        (x[0].ceil(), x[1].ceil()),
        (0.0, x[1].round()),
        (x[0].round(), 0.0),
        (0.0, 0.0),
    ]
    .map(|(a, b)| (a.max(0.0) as u64, b.max(0.0) as u64));
    candidates.sort();
    let mut current = (0u64, 0u64);
    let mut current_value = f64::NEG_INFINITY;
    for (n1, n2) in candidates {
        if let Some(v) = value(n1, n2) {
            if v > current_value {
                current = (n1, n2);
                current_value = v;
            }
        }
    }
    // integer hill climb over the 8-neighbourhood, then a wider scan
    loop {
        evaluations += 1;
        if evaluations > EVALUATION_BUDGET {
            break;
        }
        let mut moved = false;
        for radius in [1i64, 3] {
            for d1 in -radius..=radius {
                for d2 in -radius..=radius {
                    let n1 = current.0 as i64 + d1;
                    let n2 = current.1 as i64 + d2;
                    if n1 < 0 || n2 < 0 {
                        continue;
                    }
                    if let Some(v) = value(n1 as u64, n2 as u64) {
                        if v > current_value {
                            current = (n1 as u64, n2 as u64);
                            current_value = v;
                            moved = true;
                        }
                    }
                }
            }
            if moved {
                break;
            }
        }
        if !moved {
            break;
        }
    }

    let design = TestDesign::new(population, current.0, current.1)?;
    if !all_converged || evaluations > EVALUATION_BUDGET {
        return Err(Error::NonConvergence {
            evaluations,
            best: design,
        });
    }
    Ok(design)
}

/// Projects onto `{n1 >= 0, n2 >= 0, n1 + n2 <= N}` and returns the distance moved.
fn project(x: &[f64; 2], big_n: f64) -> ([f64; 2], f64) {
    let mut p = [x[0].max(0.0), x[1].max(0.0)];
    let sum = p[0] + p[1];
    if sum > big_n {
        // shift both coordinates equally toward the hypotenuse, then clamp
        let excess = (sum - big_n) / 2.0;
        p = [p[0] - excess, p[1] - excess];
        if p[0] < 0.0 {
            p = [0.0, big_n];
        } else if p[1] < 0.0 {
            p = [big_n, 0.0];
        }
    }
    let dist = ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt();
    (p, dist)
}

/// Optimal real-valued cells for an incumbent (arm 1) and a challenger with
/// `σ2 = c·σ1`, equal prior means and equal noise `s`.
///
/// `n1` is clamped to zero once the population is at or below
/// `(2c⁴ − c² − 1)s² / (c²σ1²)`.
pub fn incumbent_challenger_n(population: u64, s: f64, sigma1: f64, c: f64) -> Result<(f64, f64)> {
    if !(c > 1.0) || !c.is_finite() {
        return Err(domain("c must exceed 1; use the symmetric formula for c = 1"));
    }
    if !(s > 0.0) || !(sigma1 > 0.0) {
        return Err(domain("s and sigma1 must be positive"));
    }
    let big_n = population as f64;
    let c2 = c * c;
    let sig2 = sigma1 * sigma1;
    let root = (2.0 * c2 * (c2 + 1.0) * big_n * sig2 + (2.0 * c2 * c2 + 5.0 * c2 + 2.0) * s * s).sqrt();
    let n1 = s * (root - c * s * (1.0 + 2.0 * c2)) / (2.0 * (c2 * c + c) * sig2);
    let n2 = s * (c * root - (c2 + 2.0) * s) / (2.0 * c2 * (c2 + 1.0) * sig2);
    let threshold = (2.0 * c2 * c2 - c2 - 1.0) * s * s / (c2 * sig2);
    let n1 = if big_n <= threshold { 0.0 } else { n1.max(0.0) };
    Ok((n1, n2))
}

/// Maps a two-price test onto arm priors: `μ_j = p_j(a − μ p_j)`,
/// `σ_j = p_j² σ`, `s_j = p_j s`.
pub fn pricing_to_priors(spec: &PricingSpec) -> Result<AsymmetricProblem> {
    if !(spec.p1 > 0.0 && spec.p2 > 0.0) {
        return Err(domain("prices must be positive"));
    }
    if !(spec.sigma > 0.0 && spec.s > 0.0) {
        return Err(domain("pricing sigma and s must be positive"));
    }
    let arm = |p: f64| ArmPrior::new(p * (spec.a - spec.mu * p), p * p * spec.sigma, p * spec.s);
    AsymmetricProblem::new(spec.population, arm(spec.p1)?, arm(spec.p2)?)
}
