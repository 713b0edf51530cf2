//! Simulated portfolio market: per-round contexts, rewards drawn from hidden
//! per-arm parameters, and the exact mean-variance regret oracle.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{dot, Vector};
use crate::sampling::{NoiseKind, NoiseModel, Sampler};

/// Mean parameters (8 sector sensitivities) and reward variance of the ten
/// synthetic portfolios used for the portfolio-selection experiments.
pub const PORTFOLIO_TABLE: [([f64; 8], f64); 10] = [
    ([0.15, 0.33, -0.10, 0.08, -0.01, -0.04, 0.01, 0.11], 0.89),
    ([0.14, 0.22, 0.15, 0.31, 0.02, 0.43, -0.08, 0.30], 0.66),
    ([0.15, 0.24, -0.02, 0.02, 0.38, 0.48, 0.09, 0.32], 0.78),
    ([0.43, 0.44, -0.05, -0.08, 0.00, 0.43, -0.04, 0.15], 0.41),
    ([0.47, 0.22, 0.32, 0.09, 0.31, 0.40, -0.09, 0.35], 0.34),
    ([0.49, 0.35, 0.07, 0.37, -0.04, 0.17, 0.45, 0.08], 0.91),
    ([0.07, -0.02, -0.09, 0.31, 0.03, 0.06, 0.19, -0.07], 0.49),
    ([0.24, -0.01, 0.25, 0.32, -0.04, 0.15, 0.32, 0.15], 0.97),
    ([-0.07, 0.22, 0.30, 0.21, 0.47, 0.25, 0.44, -0.02], 0.70),
    ([-0.02, 0.38, 0.14, -0.00, 0.46, 0.11, 0.35, 0.33], 0.66),
];

/// The K context vectors revealed in one round, row `i` belonging to arm `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextMatrix {
    arms: usize,
    dim: usize,
    data: Vec<f64>,
}

impl ContextMatrix {
    pub fn from_rows(rows: Vec<Vector>) -> Result<Self> {
        let arms = rows.len();
        if arms == 0 {
            return Err(Error::InvalidParameter(
                "context matrix needs at least one row".into(),
            ));
        }
        let dim = rows[0].dim();
        let mut data = Vec::with_capacity(arms * dim);
        for row in rows {
            if row.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: row.dim(),
                });
            }
            data.extend_from_slice(&row);
        }
        Ok(ContextMatrix { arms, dim, data })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, arm: usize) -> &[f64] {
        &self.data[arm * self.dim..(arm + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Draws `K` contexts with entries uniform on `[-1, 1]`, each row then scaled
/// by `min(1, 1/‖x‖)`. Consumes exactly `K·d` uniforms.
pub fn gen_contexts<S: Sampler + ?Sized>(k: usize, d: usize, rng: &mut S) -> ContextMatrix {
    assert!(k >= 1 && d >= 1, "need at least one arm and one dimension");
    let mut data = raw_contexts(k, d, rng);
    for row in data.chunks_exact_mut(d) {
        let norm = dot(row, row).sqrt();
        if norm > 1.0 {
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
    }
    ContextMatrix {
        arms: k,
        dim: d,
        data,
    }
}

pub(crate) fn raw_contexts<S: Sampler + ?Sized>(k: usize, d: usize, rng: &mut S) -> Vec<f64> {
    (0..k * d).map(|_| 2.0 * rng.uniform() - 1.0).collect()
}

/// Hidden parameters of one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmTruth {
    mu: Vector,
    noise: NoiseModel,
}

impl ArmTruth {
    /// Requires `‖mu‖ ≤ 1`.
    pub fn new(mu: Vector, sigma2: f64, noise: NoiseKind) -> Result<Self> {
        let norm = mu.norm();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "mean parameter norm {norm} exceeds 1"
            )));
        }
        Self::with_unbounded_mean(mu, sigma2, noise)
    }

    /// Skips the `‖mu‖ ≤ 1` check.
    pub fn with_unbounded_mean(mu: Vector, sigma2: f64, noise: NoiseKind) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(
                "mean parameter must be finite".into(),
            ));
        }
        Ok(ArmTruth {
            mu,
            noise: NoiseModel::new(noise, sigma2)?,
        })
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.noise.variance()
    }

    pub fn noise_kind(&self) -> NoiseKind {
        self.noise.kind()
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn mean_reward(&self, x: &[f64]) -> f64 {
        dot(x, &self.mu)
    }

    pub fn mv(&self, x: &[f64], rho: f64) -> f64 {
        mv_value(x, &self.mu, self.sigma2(), rho)
    }
}

/// `xᵀμ + ε` with ε drawn from the arm's noise model.
pub fn draw_reward<S: Sampler + ?Sized>(truth: &ArmTruth, x: &[f64], rng: &mut S) -> f64 {
    assert_eq!(x.len(), truth.mu.dim(), "context dimension mismatch");
    truth.mean_reward(x) + truth.noise.sample(rng)
}

/// Mean-variance `xᵀμ − ρσ²`.
pub fn mv_value(x: &[f64], mu: &[f64], sigma2: f64, rho: f64) -> f64 {
    assert_eq!(x.len(), mu.len(), "context dimension mismatch");
    dot(x, mu) - rho * sigma2
}

pub fn mv_values(contexts: &ContextMatrix, truths: &[ArmTruth], rho: f64) -> Vec<f64> {
    assert_eq!(contexts.arms(), truths.len(), "arm count mismatch");
    contexts
        .rows()
        .zip(truths)
        .map(|(x, t)| t.mv(x, rho))
        .collect()
}

/// Best arm under the mean-variance criterion, lowest index on ties.
pub fn optimal_arm(contexts: &ContextMatrix, truths: &[ArmTruth], rho: f64) -> usize {
    crate::policies::argmax(&mv_values(contexts, truths, rho))
}

/// `max_i MV_i − MV_chosen`.
pub fn regret(
    contexts: &ContextMatrix,
    truths: &[ArmTruth],
    rho: f64,
    chosen: usize,
) -> Result<f64> {
    if chosen >= truths.len() {
        return Err(Error::ArmOutOfRange {
            index: chosen,
            arms: truths.len(),
        });
    }
    let mv = mv_values(contexts, truths, rho);
    let best = mv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((best - mv[chosen]).max(0.0))
}

/// The built-in ten-portfolio parameter table with the given noise kind.
pub fn portfolio_truths(noise: NoiseKind) -> Vec<ArmTruth> {
    PORTFOLIO_TABLE
        .iter()
        .map(|(mu, s2)| {
            ArmTruth::with_unbounded_mean(Vector::from(*mu), *s2, noise)
                .expect("built-in table is valid")
        })
        .collect()
}

/// Renders truths as a whitespace-separated table: 1-based arm index, the
/// `d` mean entries, then σ².
pub fn format_truth_table(truths: &[ArmTruth]) -> String {
    let mut out = String::new();
    let d = truths.first().map_or(0, |t| t.mu.dim());
    out.push_str("# arm");
    for j in 1..=d {
        let _ = write!(out, " mu_{j}");
    }
    out.push_str(" sigma2\n");
    for (i, t) in truths.iter().enumerate() {
        let _ = write!(out, "{}", i + 1);
        for v in t.mu.iter() {
            let _ = write!(out, " {}", v + 0.0);
        }
        let _ = writeln!(out, " {}", t.sigma2());
    }
    out
}

/// Parses the format of [`format_truth_table`]. Blank lines and `#`
/// comments are skipped; arm indices must run 1, 2, …, K in order.
pub fn parse_truth_table(
    text: &str,
    noise: NoiseKind,
    allow_unbounded_mean: bool,
) -> Result<Vec<ArmTruth>> {
    let mut truths = Vec::new();
    let mut dim = None;
    for (lineno, line) in text.lines().enumerate() {
        let loc = || format!("truth table line {}", lineno + 1);
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(loc(), format!("not a number: `{f}`")))
            })
            .collect::<Result<_>>()?;
        if fields.len() < 3 {
            return Err(Error::parse(
                loc(),
                "expected arm index, mean entries and variance",
            ));
        }
        let index = fields[0];
        if index != (truths.len() + 1) as f64 {
            return Err(Error::parse(
                loc(),
                format!("expected arm index {}, found {index}", truths.len() + 1),
            ));
        }
        let d = fields.len() - 2;
        if *dim.get_or_insert(d) != d {
            return Err(Error::parse(
                loc(),
                format!("expected {} mean entries, found {d}", dim.unwrap()),
            ));
        }
        let mu = Vector::from(&fields[1..=d]);
        let sigma2 = fields[d + 1];
        let truth = if allow_unbounded_mean {
            ArmTruth::with_unbounded_mean(mu, sigma2, noise)
        } else {
            ArmTruth::new(mu, sigma2, noise)
        }
        .map_err(|e| Error::parse(loc(), e.to_string()))?;
        truths.push(truth);
    }
    if truths.is_empty() {
        return Err(Error::parse("truth table", "no arms"));
    }
    Ok(truths)
}
