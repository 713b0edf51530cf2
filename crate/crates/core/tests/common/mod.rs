//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's linear algebra or update paths.

#![allow(dead_code)]

use mvts::{RngStream, Sampler};

/// Gauss-Jordan inverse with partial pivoting, row-major.
pub fn gauss_jordan_inverse(d: usize, m: &[f64]) -> Vec<f64> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..d {
                a.swap(pivot * d + k, col * d + k);
                inv.swap(pivot * d + k, col * d + k);
            }
        }
        let p = a[col * d + col];
        for k in 0..d {
            a[col * d + k] /= p;
            inv[col * d + k] /= p;
        }
        for r in 0..d {
            if r != col {
                let f = a[r * d + col];
                if f != 0.0 {
                    for k in 0..d {
                        a[r * d + k] -= f * a[col * d + k];
                        inv[r * d + k] -= f * inv[col * d + k];
                    }
                }
            }
        }
    }
    inv
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Posterior statistics rebuilt from the whole history in one pass.
#[derive(Debug, Clone)]
pub struct BatchPosterior {
    pub a: Vec<f64>,
    pub a_inv: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
    pub d: f64,
}

pub fn batch_rebuild(dim: usize, history: &[(Vec<f64>, f64)]) -> BatchPosterior {
    let mut a = vec![0.0; dim * dim];
    for i in 0..dim {
        a[i * dim + i] = 1.0;
    }
    let mut b = vec![0.0; dim];
    let mut sum_sq = 0.0;
    for (x, r) in history {
        for i in 0..dim {
            for j in 0..dim {
                a[i * dim + j] += x[i] * x[j];
            }
            b[i] += x[i] * r;
        }
        sum_sq += r * r;
    }
    let a_inv = gauss_jordan_inverse(dim, &a);
    let mut quad = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            quad += b[i] * a_inv[i * dim + j] * b[j];
        }
    }
    BatchPosterior {
        a,
        a_inv,
        b,
        c: 0.5 * history.len() as f64,
        d: (0.5 * (sum_sq - quad)).max(0.0),
    }
}

/// Uniform on `[lo, hi)`.
pub fn uniform_in(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

/// A context with norm at most `max_norm`, direction and radius uniform-ish.
pub fn random_context(rng: &mut RngStream, dim: usize, max_norm: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..dim).map(|_| rng.standard_normal()).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let radius = max_norm * rng.uniform();
    for v in &mut x {
        *v *= radius / norm;
    }
    x
}

pub fn random_history(
    rng: &mut RngStream,
    dim: usize,
    n: usize,
    max_reward: f64,
) -> Vec<(Vec<f64>, f64)> {
    (0..n)
        .map(|_| {
            (
                random_context(rng, dim, 1.0),
                uniform_in(rng, -max_reward, max_reward),
            )
        })
        .collect()
}

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Checks the sample mean and variance against their targets within `k`
/// standard errors. The variance's standard error uses the sample fourth
/// central moment.
pub fn moments_ok(xs: &[f64], mean: f64, var: f64, k: f64) -> Result<(), String> {
    let n = xs.len() as f64;
    let (m, v) = mean_var(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let se_mean = (var / n).sqrt();
    let se_var = ((m4 - v * v) / n).sqrt();
    if (m - mean).abs() > k * se_mean {
        return Err(format!("mean {m} vs {mean} (se {se_mean:.3e})"));
    }
    if (v - var).abs() > k * se_var {
        return Err(format!("variance {v} vs {var} (se {se_var:.3e})"));
    }
    Ok(())
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
