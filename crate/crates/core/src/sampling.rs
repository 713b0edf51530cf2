//! Seeded random streams and the distribution samplers used by the policies
//! and the simulated environment.
//!
//! Policies never touch an RNG directly; they draw through [`Sampler`], so a
//! test can substitute scripted draws and make every argmax deterministic.
//!
//! [`RngStream`] wraps ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! whose output is fixed across platforms for a given seed.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, Vector};

pub const DEFAULT_TRUNCATION_BOUND: f64 = 5.0;

/// Source of the primitive draws every policy and environment needs.
pub trait Sampler {
    /// A draw from N(0, 1).
    fn standard_normal(&mut self) -> f64;

    /// A draw from U[0, 1).
    fn uniform(&mut self) -> f64;

    /// A draw from Gamma(shape, rate), mean `shape / rate`.
    fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        sample_gamma(shape, rate, self)
    }

    /// Uniform index in `[0, n)`.
    fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

impl<S: Sampler + ?Sized> Sampler for &mut S {
    fn standard_normal(&mut self) -> f64 {
        (**self).standard_normal()
    }

    fn uniform(&mut self) -> f64 {
        (**self).uniform()
    }

    fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
        (**self).gamma(shape, rate)
    }

    fn index(&mut self, n: usize) -> usize {
        (**self).index(n)
    }
}

/// Seeded, reproducible random stream. One stream per consumer; there is no
/// global generator.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Sampler for RngStream {
    fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Free-function form of [`Sampler::standard_normal`].
pub fn sample_standard_normal<S: Sampler + ?Sized>(rng: &mut S) -> f64 {
    rng.standard_normal()
}

/// Marsaglia–Tsang squeeze sampler, with the `U^(1/shape)` boost for
/// `shape < 1`. Consumes normals and uniforms from `rng`.
pub fn sample_gamma<S: Sampler + ?Sized>(shape: f64, rate: f64, rng: &mut S) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma rate must be positive, got {rate}"
        )));
    }
    let boosted = shape < 1.0;
    let a = if boosted { shape + 1.0 } else { shape };
    let d = a - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    let g = loop {
        let (x, v) = loop {
            let x = rng.standard_normal();
            let v = 1.0 + c * x;
            if v > 0.0 {
                break (x, v * v * v);
            }
        };
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            break d * v;
        }
        if u > 0.0 && u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            break d * v;
        }
    };
    let g = if boosted {
        // U in (0, 1]; a zero uniform would collapse the draw to exactly 0.
        let u = 1.0 - rng.uniform();
        g * u.powf(1.0 / shape)
    } else {
        g
    };
    Ok(g / rate)
}

/// `mean + L z` with `z` a vector of independent standard normals drawn in
/// index order.
pub fn sample_mvn<S: Sampler + ?Sized>(
    mean: &[f64],
    cov_chol: &CholeskyFactor,
    rng: &mut S,
) -> Result<Vector> {
    if mean.len() != cov_chol.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov_chol.dim(),
            actual: mean.len(),
        });
    }
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.standard_normal()).collect();
    let mut out = cov_chol.mul_vec(&z);
    for (o, m) in out.iter_mut().zip(mean) {
        *o += m;
    }
    Ok(out)
}

/// Shape of the zero-mean reward noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Gaussian,
    /// Normal noise truncated to `[-bound, bound]`, rescaled to keep the
    /// requested variance.
    TruncatedNormal {
        bound: f64,
    },
    /// Uniform on `[-√3σ, √3σ]`.
    Uniform,
}

impl NoiseKind {
    pub fn truncated_normal() -> Self {
        NoiseKind::TruncatedNormal {
            bound: DEFAULT_TRUNCATION_BOUND,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::TruncatedNormal { .. } => "truncated_normal",
            NoiseKind::Uniform => "uniform",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "truncated_normal" => Ok(NoiseKind::truncated_normal()),
            "uniform" => Ok(NoiseKind::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise kind `{other}` (expected gaussian, truncated_normal or uniform)"
            ))),
        }
    }
}

/// A noise kind bound to a target variance, with any truncation scale
/// precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    kind: NoiseKind,
    variance: f64,
    /// Gaussian: σ. Uniform: half-width √3σ. Truncated: the pre-truncation
    /// standard deviation that yields the requested variance.
    scale: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {variance}"
            )));
        }
        let sigma = variance.sqrt();
        let scale = match kind {
            NoiseKind::Gaussian => sigma,
            NoiseKind::Uniform => 3f64.sqrt() * sigma,
            NoiseKind::TruncatedNormal { bound } => truncated_scale(bound, variance)?,
        };
        Ok(NoiseModel {
            kind,
            variance,
            scale,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn sample<S: Sampler + ?Sized>(&self, rng: &mut S) -> f64 {
        match self.kind {
            NoiseKind::Gaussian => self.scale * rng.standard_normal(),
            NoiseKind::Uniform => self.scale * (2.0 * rng.uniform() - 1.0),
            NoiseKind::TruncatedNormal { bound } => {
                let limit = bound / self.scale;
                loop {
                    let z = rng.standard_normal();
                    if z.abs() <= limit {
                        break (self.scale * z).clamp(-bound, bound);
                    }
                }
            }
        }
    }
}

/// Zero-mean noise draw with the given variance.
pub fn sample_noise<S: Sampler + ?Sized>(
    kind: NoiseKind,
    variance: f64,
    rng: &mut S,
) -> Result<f64> {
    Ok(NoiseModel::new(kind, variance)?.sample(rng))
}

/// Variance of a standard normal truncated to `[-c, c]`.
fn truncated_unit_variance(c: f64) -> f64 {
    let phi = (-0.5 * c * c).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mass = libm::erf(c / std::f64::consts::SQRT_2);
    1.0 - 2.0 * c * phi / mass
}

/// Finds s with Var(s·Z | |s·Z| ≤ bound) = variance by bisection; the
/// truncated variance is increasing in s.
fn truncated_scale(bound: f64, variance: f64) -> Result<f64> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "truncation bound must be positive, got {bound}"
        )));
    }
    // The truncated variance approaches bound²/3 as s → ∞.
    if variance >= bound * bound / 3.0 {
        return Err(Error::InvalidParameter(format!(
            "variance {variance} unreachable with truncation bound {bound}"
        )));
    }
    let truncated_var = |s: f64| s * s * truncated_unit_variance(bound / s);
    let mut lo = variance.sqrt();
    let mut hi = lo;
    while truncated_var(hi) < variance {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "variance {variance} unreachable with truncation bound {bound}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if truncated_var(mid) < variance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
