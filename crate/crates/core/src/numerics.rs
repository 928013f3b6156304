//! Special functions, quadrature and reproducible random streams.

// float methods come from libm here; with std linked (tests) they resolve inherently
#[allow(unused_imports)]
use num_traits::Float;

use core::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};

/// `1 / sqrt(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, Φ(x).
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("normal_cdf needs a finite argument"));
    }
    Ok(phi(x))
}

/// Unchecked Φ(x), evaluated through `erfc` so both tails keep full relative
/// precision.
#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Inverse of the standard normal CDF.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("normal_quantile needs 0 < p < 1"));
    }
    Ok(phi_inv(p))
}

/// Wichura's AS241 (PPND16) followed by one Newton step against [`phi`].
pub(crate) fn phi_inv(p: f64) -> f64 {
    let q = p - 0.5;
    let x = if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        q * poly(
            r,
            &[
                3.387_132_872_796_366_608,
                1.331_416_678_917_843_774_5e2,
                1.971_590_950_306_551_442_7e3,
                1.373_169_376_550_946_112_5e4,
                4.592_195_393_154_987_145_7e4,
                6.726_577_092_700_870_085_3e4,
                3.343_057_558_358_812_810_5e4,
                2.509_080_928_730_122_672_7e3,
            ],
        ) / poly(
            r,
            &[
                1.0,
                4.231_333_070_160_091_125_2e1,
                6.871_870_074_920_579_083e2,
                5.394_196_021_424_751_107_7e3,
                2.121_379_430_158_659_586_7e4,
                3.930_789_580_009_271_061e4,
                2.872_908_573_572_194_267_4e4,
                5.226_495_278_852_854_561e3,
            ],
        )
    } else {
        let tail = if q < 0.0 { p } else { 1.0 - p };
        let r = (-tail.ln()).sqrt();
        let v = if r <= 5.0 {
            let r = r - 1.6;
            poly(
                r,
                &[
                    1.423_437_110_749_683_577_34,
                    4.630_337_846_156_545_295_9,
                    5.769_497_221_460_691_405_5,
                    3.647_848_324_763_204_605_04,
                    1.270_458_252_452_368_382_58,
                    2.417_807_251_774_506_117_7e-1,
                    2.272_384_498_926_918_458_33e-2,
                    7.745_450_142_783_414_076_4e-4,
                ],
            ) / poly(
                r,
                &[
                    1.0,
                    2.053_191_626_637_758_821_87,
                    1.676_384_830_183_803_849_4,
                    6.897_673_349_851_000_045_5e-1,
                    1.481_039_764_274_800_745_9e-1,
                    1.519_866_656_361_645_719_66e-2,
                    5.475_938_084_995_344_946e-4,
                    1.050_750_071_644_416_843_24e-9,
                ],
            )
        } else {
            let r = r - 5.0;
            poly(
                r,
                &[
                    6.657_904_643_501_103_777_2,
                    5.463_784_911_164_114_369_9,
                    1.784_826_539_917_291_335_8,
                    2.965_605_718_285_048_912_3e-1,
                    2.653_218_952_657_612_309_3e-2,
                    1.242_660_947_388_078_438_6e-3,
                    2.711_555_568_743_487_578_15e-5,
                    2.010_334_399_292_288_132_65e-7,
                ],
            ) / poly(
                r,
                &[
                    1.0,
                    5.998_322_065_558_879_376_9e-1,
                    1.369_298_809_227_358_053_1e-1,
                    1.487_536_129_085_061_485_25e-2,
                    7.868_691_311_456_132_591e-4,
                    1.846_318_317_510_054_681_8e-5,
                    1.421_511_758_316_445_888_7e-7,
                    2.044_263_103_389_939_785_64e-15,
                ],
            )
        };
        if q < 0.0 {
            -v
        } else {
            v
        }
    };
    let density = normal_pdf(x);
    if density > 0.0 {
        x - (phi(x) - p) / density
    } else {
        x
    }
}

/// Horner evaluation, coefficients in increasing degree.
fn poly(x: f64, coeffs: &[f64]) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("log_gamma needs a finite x > 0"));
    }
    Ok(ln_gamma(x))
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// `ln B(a, b)`.
#[inline]
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln Γ(x + a) − ln Γ(x + b)` without the cancellation of two large
/// log-gammas once `x` is large.
pub(crate) fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> f64 {
    let (za, zb) = (x + a, x + b);
    if za.min(zb) < 10.0 {
        return ln_gamma(za) - ln_gamma(zb);
    }
    // Stirling: (z − ½)ln z − z + Σ, rearranged so the large terms cancel exactly
    let leading = (a - b) * zb.ln() + (za - 0.5) * ((a - b) / zb).ln_1p() - (a - b);
    leading + stirling_tail(za) - stirling_tail(zb)
}

fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0 - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain("beta_cdf needs a, b > 0"));
    }
    if x.is_nan() {
        return Err(domain("beta_cdf needs a numeric x"));
    }
    Ok(beta_reg(x, a, b))
}

pub(crate) fn beta_reg(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cont_frac(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_cont_frac(1.0 - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cont_frac(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `E[max(X1, X2)]` for independent `X_j ~ N(mean_j, sd_j²)`.
pub(crate) fn expected_max_normal(mean1: f64, sd1: f64, mean2: f64, sd2: f64) -> f64 {
    let e = mean2 - mean1;
    let w = (sd1 * sd1 + sd2 * sd2).sqrt();
    mean1 + gain_over_first(e, w)
}

/// `E[max(0, D)]` for `D ~ N(e, w²)`, the `eΦ(e/w) + wφ(e/w)` term.
#[inline]
pub(crate) fn gain_over_first(e: f64, w: f64) -> f64 {
    if w > 0.0 {
        e * phi(e / w) + w * normal_pdf(e / w)
    } else {
        e.max(0.0)
    }
}

/// `√π`.
pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// A replicate-scoped random stream.
///
/// Built on ChaCha8 with the 64-bit seed as key and `stream_index` as the
/// ChaCha stream id, so stream `k` yields the same sequence no matter which
/// thread or in what order it is consumed.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    #[inline]
    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..k`.
    #[inline]
    pub fn index(&mut self, k: usize) -> usize {
        self.rng.random_range(0..k)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
