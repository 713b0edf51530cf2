//! Per-arm Bayesian state.
//!
//! [`ArmPosterior`] is the normal-gamma posterior of the disjoint linear
//! model: conditioned on the precision λ, the mean parameter is
//! `N(A⁻¹b, (λA)⁻¹)`, and λ is `Gamma(C, D)` in shape/rate form. Starting
//! from the empty-history prior `A = I, b = 0, C = D = 0`, after pulls
//! `(x_s, r_s)` the state is
//!
//! ```text
//!   A = I + Σ x_s x_sᵀ        b = Σ x_s r_s
//!   C = n / 2                 D = ½ (Σ r_s² − bᵀA⁻¹b)
//! ```
//!
//! `observe` applies the one-step update and keeps `A⁻¹` current through
//! Sherman–Morrison, re-inverting from `A` every [`REFRESH_INTERVAL`]
//! updates. `from_history` recomputes everything in batch form.
//!
//! [`CfArmPosterior`] is the context-free normal-gamma state used by the
//! context-free mean-variance baseline.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{dot, quad_form, sherman_morrison_in_place, SpdMatrix, Vector};

/// Rank-one inverse updates between full re-inversions of `A`.
pub const REFRESH_INTERVAL: u32 = 256;

/// Relative slack below zero tolerated on `D` before it is treated as a
/// consistency failure; scaled by `max(1, Σ r²)`.
const RATE_NEGATIVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmPosterior {
    a: SpdMatrix,
    a_inv: SpdMatrix,
    b: Vector,
    shape: f64,
    rate: f64,
    n_pulls: u64,
    sum_sq_rewards: f64,
    since_refresh: u32,
}

impl ArmPosterior {
    /// Empty-history prior of dimension `d`.
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        ArmPosterior {
            a: SpdMatrix::identity(d),
            a_inv: SpdMatrix::identity(d),
            b: Vector::zeros(d),
            shape: 0.0,
            rate: 0.0,
            n_pulls: 0,
            sum_sq_rewards: 0.0,
            since_refresh: 0,
        }
    }

    /// Batch recomputation from a full pull history.
    pub fn from_history<'a, I>(d: usize, history: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        let mut state = Self::new(d);
        for (x, r) in history {
            check_observation(d, x, r)?;
            state.a.add_outer(x);
            for (bi, xi) in state.b.iter_mut().zip(x) {
                *bi += xi * r;
            }
            state.n_pulls += 1;
            state.sum_sq_rewards += r * r;
        }
        state.a_inv = state.a.inverse()?;
        state.shape = 0.5 * state.n_pulls as f64;
        state.rate = 0.5 * (state.sum_sq_rewards - quad_form(&state.a_inv, &state.b));
        state.clamp_rate()?;
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// Design matrix `A = I + Σ x xᵀ`.
    pub fn design(&self) -> &SpdMatrix {
        &self.a
    }

    pub fn design_inverse(&self) -> &SpdMatrix {
        &self.a_inv
    }

    /// Reward-weighted context sum `b = Σ x r`.
    pub fn response(&self) -> &Vector {
        &self.b
    }

    /// Gamma shape `C`.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Gamma rate `D`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn n_pulls(&self) -> u64 {
        self.n_pulls
    }

    /// Applies one observed pull in place. On error the state is unchanged.
    pub fn observe(&mut self, x: &[f64], r: f64) -> Result<()> {
        check_observation(self.dim(), x, r)?;
        let mut next = self.clone();
        next.apply(x, r)?;
        *self = next;
        Ok(())
    }

    fn apply(&mut self, x: &[f64], r: f64) -> Result<()> {
        let norm_sq = dot(x, x);
        if norm_sq > 1.0 + 1e-9 {
            log::warn!("context norm {} exceeds 1", norm_sq.sqrt());
        }

        let before = quad_form(&self.a_inv, &self.b);
        self.a.add_outer(x);
        for (bi, xi) in self.b.iter_mut().zip(x) {
            *bi += xi * r;
        }
        self.since_refresh += 1;
        if self.since_refresh >= REFRESH_INTERVAL {
            self.a_inv = self.a.inverse()?;
            self.since_refresh = 0;
        } else {
            sherman_morrison_in_place(&mut self.a_inv, x);
        }
        let after = quad_form(&self.a_inv, &self.b);

        self.shape += 0.5;
        self.rate += 0.5 * (before - after + r * r);
        self.n_pulls += 1;
        self.sum_sq_rewards += r * r;
        if !(self.rate.is_finite() && self.sum_sq_rewards.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidObservation(format!(
                "reward {r} overflows the posterior statistics"
            )));
        }
        self.clamp_rate()
    }

    /// Value-returning form of [`observe`](Self::observe).
    pub fn observed(&self, x: &[f64], r: f64) -> Result<Self> {
        check_observation(self.dim(), x, r)?;
        let mut next = self.clone();
        next.apply(x, r)?;
        Ok(next)
    }

    /// Ridge estimate `μ̂ = A⁻¹b`.
    pub fn mean_estimate(&self) -> Vector {
        self.a_inv.mul_vec(&self.b)
    }

    /// Variance estimate `σ̂² = D / C`.
    pub fn variance_estimate(&self) -> Result<f64> {
        if self.n_pulls == 0 {
            return Err(Error::NoObservations);
        }
        Ok(self.rate / self.shape)
    }

    /// One-line JSON object for debug dumps.
    pub fn snapshot_json(&self, arm: usize) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{{\"arm\":{arm},\"C\":{},\"D\":{},\"n_pulls\":{},\"b\":",
            json_num(self.shape),
            json_num(self.rate),
            self.n_pulls
        );
        push_json_array(&mut s, &self.b);
        s.push_str(",\"A\":");
        push_json_array(&mut s, self.a.as_slice());
        s.push('}');
        s
    }

    fn clamp_rate(&mut self) -> Result<()> {
        if self.rate < 0.0 {
            let tol = RATE_NEGATIVE_TOL * self.sum_sq_rewards.max(1.0);
            if self.rate < -tol {
                return Err(Error::InternalConsistency(format!(
                    "gamma rate went negative: {}",
                    self.rate
                )));
            }
            self.rate = 0.0;
        }
        Ok(())
    }
}

fn check_observation(d: usize, x: &[f64], r: f64) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x.len(),
        });
    }
    if !r.is_finite() || !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidObservation(format!(
            "non-finite context or reward (r = {r})"
        )));
    }
    Ok(())
}

fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        "null".to_string()
    }
}

fn push_json_array(s: &mut String, values: &[f64]) {
    s.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&json_num(*v));
    }
    s.push(']');
}

/// Context-free normal-gamma state: running mean `μ̂`, pseudo-count `T̂`,
/// shape `α̂` and rate `β̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfArmPosterior {
    pub mean: f64,
    pub count: f64,
    pub shape: f64,
    pub rate: f64,
}

impl CfArmPosterior {
    /// Pre-initialization state. It is chosen so that the first `observe`
    /// lands exactly on the initialization values of
    /// [`from_first_reward`](Self::from_first_reward).
    pub fn empty() -> Self {
        CfArmPosterior {
            mean: 0.0,
            count: 0.0,
            shape: 0.0,
            rate: 0.5,
        }
    }

    pub fn is_initialized(&self) -> bool {
        self.count > 0.0
    }

    /// State after the single initialization pull:
    /// `μ̂ = r, T̂ = 1, α̂ = ½, β̂ = ½`.
    pub fn from_first_reward(r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidObservation(format!("non-finite reward {r}")));
        }
        Ok(CfArmPosterior {
            mean: r,
            count: 1.0,
            shape: 0.5,
            rate: 0.5,
        })
    }

    pub fn observe(&mut self, r: f64) -> Result<()> {
        if !r.is_finite() {
            return Err(Error::InvalidObservation(format!("non-finite reward {r}")));
        }
        let n = self.count;
        let resid = r - self.mean;
        let mean = (n * self.mean + r) / (n + 1.0);
        let rate = self.rate + n / (n + 1.0) * resid * resid / 2.0;
        if !(mean.is_finite() && rate.is_finite()) {
            return Err(Error::InvalidObservation(format!(
                "reward {r} overflows the posterior statistics"
            )));
        }
        self.mean = mean;
        self.rate = rate;
        self.count = n + 1.0;
        self.shape += 0.5;
        Ok(())
    }

    pub fn observed(&self, r: f64) -> Result<Self> {
        let mut next = *self;
        next.observe(r)?;
        Ok(next)
    }
}
