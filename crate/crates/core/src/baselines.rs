//! Classical hypothesis-test sample sizes, used as comparison designs.


// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::numerics::phi_inv;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HtParams {
    /// Two-sided type-I error rate.
    pub alpha: f64,
    pub power: f64,
    /// Minimum detectable difference in means.
    pub d: f64,
    pub s1: f64,
    pub s2: f64,
    /// Population size, needed only for the finite-population correction.
    pub population: Option<u64>,
}

impl HtParams {
    pub fn equal(alpha: f64, power: f64, d: f64, s: f64) -> Self {
        Self {
            alpha,
            power,
            d,
            s1: s,
            s2: s,
            population: None,
        }
    }

    pub fn with_population(mut self, population: u64) -> Self {
        self.population = Some(population);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(domain("alpha must lie in (0, 1)"));
        }
        if !(self.power > 0.0 && self.power < 1.0) {
            return Err(domain("power must lie in (0, 1)"));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(domain("detectable difference d must be positive"));
        }
        if !(self.s1 > 0.0 && self.s2 > 0.0 && self.s1.is_finite() && self.s2.is_finite()) {
            return Err(domain("response noise must be positive"));
        }
        Ok(())
    }

    /// `z_{1−α/2} + z_{power}`.
    fn z(&self) -> f64 {
        phi_inv(1.0 - self.alpha / 2.0) + phi_inv(self.power)
    }
}

/// Per-cell size before rounding; uses `s1` as the common noise.
pub fn n_hypothesis_test_raw(params: &HtParams) -> Result<f64> {
    params.validate()?;
    let z = params.z();
    Ok(z * z * 2.0 * params.s1 * params.s1 / (params.d * params.d))
}

/// Per-cell size for equal noise `s = s1`, rounded up.
pub fn n_hypothesis_test(params: &HtParams) -> Result<u64> {
    Ok(ceil_count(n_hypothesis_test_raw(params)?))
}

pub fn n_hypothesis_test_fpc_raw(params: &HtParams) -> Result<f64> {
    params.validate()?;
    let big_n = match params.population {
        Some(n) if n >= 2 => n as f64,
        Some(_) => return Err(domain("population must be at least 2")),
        None => return Err(domain("finite-population correction needs a population")),
    };
    let z2 = params.z().powi(2);
    let s2 = params.s1 * params.s1;
    Ok(2.0 * big_n * z2 * s2 / ((big_n - 1.0) * params.d * params.d + 4.0 * s2 * z2))
}

/// Per-cell size with the finite-population correction, rounded up.
pub fn n_hypothesis_test_fpc(params: &HtParams) -> Result<u64> {
    Ok(ceil_count(n_hypothesis_test_fpc_raw(params)?))
}

/// Cell sizes minimizing `n1 + n2` at the stated power when the arms have
/// different noise.
pub fn n_hypothesis_test_unequal(params: &HtParams) -> Result<(u64, u64)> {
    params.validate()?;
    let z2 = params.z().powi(2);
    let d2 = params.d * params.d;
    let (s1, s2) = (params.s1, params.s2);
    Ok((
        ceil_count(z2 * (s1 * s1 + s1 * s2) / d2),
        ceil_count(z2 * (s1 * s2 + s2 * s2) / d2),
    ))
}

/// `d` as a relative lift over a base mean.
pub fn d_from_lift(lift: f64, base_mean: f64) -> Result<f64> {
    let d = lift * base_mean;
    if !(d > 0.0 && d.is_finite()) {
        return Err(domain("lift times base mean must be positive"));
    }
    Ok(d)
}

/// Upper quartile of `|m1 − m2|` when both means are drawn from `N(μ, σ²)`:
/// the difference is `N(0, 2σ²)`, so the rule is `√2 σ Φ⁻¹(5/8)`.
pub fn d_from_prior_quartile(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(domain("sigma must be positive"));
    }
    Ok(core::f64::consts::SQRT_2 * sigma * phi_inv(0.625))
}

fn ceil_count(x: f64) -> u64 {
    // guard against values like 16.000000000000004 from quantile round-off
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * x.abs().max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}
