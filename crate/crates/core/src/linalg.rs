//! Small dense symmetric positive-definite linear algebra.
//!
//! Everything here is sized for the per-arm design matrices of a disjoint
//! linear bandit (`d` rarely above 16), so storage is a flat row-major
//! `Vec<f64>` and every routine is a plain triple loop.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Pivots in `(-JITTER_FLOOR, JITTER_FLOOR]` are lifted to the floor instead
/// of failing the factorization.
pub const JITTER_FLOOR: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-12;

/// A dense real vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        self.dot(&self.0).sqrt()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Vector(v.to_vec())
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symmetric positive-definite matrix in row-major storage.
///
/// Symmetry is checked on construction from raw entries; positive
/// definiteness is only established by a successful [`cholesky`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SpdMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        SpdMatrix { dim, data }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &e) in entries.iter().enumerate() {
            data[i * dim + i] = e;
        }
        SpdMatrix { dim, data }
    }

    /// Builds a matrix from row-major entries, rejecting asymmetric input.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        for i in 0..dim {
            for j in 0..i {
                let (a, b) = (data[i * dim + j], data[j * dim + i]);
                let scale = a.abs().max(b.abs()).max(1.0);
                if (a - b).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(SpdMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// `A += x xᵀ`.
    pub fn add_outer(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        let d = self.dim;
        for i in 0..d {
            let xi = x[i];
            let row = &mut self.data[i * d..(i + 1) * d];
            for (a, &xj) in row.iter_mut().zip(x) {
                *a += xi * xj;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vector {
        debug_assert_eq!(x.len(), self.dim);
        Vector((0..self.dim).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SpdMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Inverse through the Cholesky factor.
    pub fn inverse(&self) -> Result<Self> {
        Ok(cholesky(self)?.inverse())
    }

    pub fn max_abs_diff(&self, other: &SpdMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Averages the matrix with its transpose in place.
    pub fn symmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            for j in 0..i {
                let m = 0.5 * (self.data[i * d + j] + self.data[j * d + i]);
                self.data[i * d + j] = m;
                self.data[j * d + i] = m;
            }
        }
    }
}

/// Lower-triangular factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dim: usize,
    data: Vec<f64>,
}

impl CholeskyFactor {
    /// The all-zero factor, i.e. a degenerate (zero) covariance.
    pub fn zeros(dim: usize) -> Self {
        CholeskyFactor {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// `L z`.
    pub fn mul_vec(&self, z: &[f64]) -> Vector {
        debug_assert_eq!(z.len(), self.dim);
        let d = self.dim;
        Vector(
            (0..d)
                .map(|i| dot(&self.data[i * d..i * d + i + 1], &z[..=i]))
                .collect(),
        )
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.data {
            *v *= factor;
        }
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> SpdMatrix {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let k = j + 1;
                let v = dot(&self.data[i * d..i * d + k], &self.data[j * d..j * d + k]);
                data[i * d + j] = v;
                data[j * d + i] = v;
            }
        }
        SpdMatrix { dim: d, data }
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vector {
        let d = self.dim;
        let mut y = b.to_vec();
        for i in 0..d {
            let s = dot(&self.data[i * d..i * d + i], &y[..i]);
            y[i] = (y[i] - s) / self.data[i * d + i];
        }
        for i in (0..d).rev() {
            let mut s = y[i];
            for k in i + 1..d {
                s -= self.data[k * d + i] * y[k];
            }
            y[i] = s / self.data[i * d + i];
        }
        Vector(y)
    }

    /// `(L Lᵀ)⁻¹`, exactly symmetric.
    pub fn inverse(&self) -> SpdMatrix {
        let d = self.dim;
        // Invert L by forward substitution, then form L⁻ᵀ L⁻¹.
        let mut linv = vec![0.0; d * d];
        for j in 0..d {
            linv[j * d + j] = 1.0 / self.data[j * d + j];
            for i in j + 1..d {
                let mut s = 0.0;
                for k in j..i {
                    s += self.data[i * d + k] * linv[k * d + j];
                }
                linv[i * d + j] = -s / self.data[i * d + i];
            }
        }
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..d {
                    s += linv[k * d + i] * linv[k * d + j];
                }
                data[i * d + j] = s;
                data[j * d + i] = s;
            }
        }
        SpdMatrix { dim: d, data }
    }
}

/// Cholesky–Banachiewicz factorization.
pub fn cholesky(m: &SpdMatrix) -> Result<CholeskyFactor> {
    let d = m.dim;
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s = m.get(i, j) - dot(&l[i * d..i * d + j], &l[j * d..j * d + j]);
            if i == j {
                let pivot = if s > JITTER_FLOOR {
                    s
                } else if s > -JITTER_FLOOR {
                    JITTER_FLOOR
                } else {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                };
                l[i * d + i] = pivot.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(CholeskyFactor { dim: d, data: l })
}

/// Rank-one inverse update: given `A⁻¹`, returns `(A + x xᵀ)⁻¹`.
pub fn sherman_morrison(a_inv: &SpdMatrix, x: &[f64]) -> SpdMatrix {
    let mut out = a_inv.clone();
    sherman_morrison_in_place(&mut out, x);
    out
}

/// In-place form of [`sherman_morrison`].
pub fn sherman_morrison_in_place(a_inv: &mut SpdMatrix, x: &[f64]) {
    let d = a_inv.dim;
    assert_eq!(x.len(), d, "context dimension must match matrix dimension");
    let u = a_inv.mul_vec(x);
    // 1 + xᵀA⁻¹x ≥ 1 for SPD A⁻¹.
    let denom = 1.0 + dot(x, &u);
    for i in 0..d {
        let ui = u[i] / denom;
        for j in 0..=i {
            let v = a_inv.data[i * d + j] - ui * u[j];
            a_inv.data[i * d + j] = v;
            a_inv.data[j * d + i] = v;
        }
    }
}

/// `xᵀ M x`.
pub fn quad_form(m: &SpdMatrix, x: &[f64]) -> f64 {
    assert_eq!(
        x.len(),
        m.dim,
        "vector dimension must match matrix dimension"
    );
    let q = dot(x, &m.mul_vec(x));
    q.max(0.0)
}

#[cfg(test)]
impl SpdMatrix {
    pub(crate) fn from_row_major_unchecked(dim: usize, data: Vec<f64>) -> Self {
        SpdMatrix { dim, data }
    }
}
