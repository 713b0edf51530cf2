//! Risk-averse Thompson sampling for linear contextual bandits.
//!
//! Each arm keeps a normal-gamma posterior over its reward coefficients and
//! noise precision. Policies sample from these posteriors and pick the arm
//! with the best sampled mean-variance score `x·μ - ρ·σ²`.
//!
//! ```
//! use mvts::{Policy, PolicyKind, RngStream, ContextMatrix, Vector};
//!
//! let mut policy = Policy::new(PolicyKind::MvtsD, 1.0, 2, 2).unwrap();
//! let ctx = ContextMatrix::from_rows(vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 1.0])]).unwrap();
//! policy.update(0, ctx.row(0), 0.5).unwrap();
//! policy.update(1, ctx.row(1), -0.5).unwrap();
//! let mut rng = RngStream::new(7);
//! let arm = policy.choose(&ctx, &mut rng).unwrap().arm;
//! assert!(arm < 2);
//! ```

pub mod environment;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod policies;
pub mod posterior;
pub mod sampling;

#[cfg(test)]
mod test_oracle;

pub use environment::{
    draw_reward, gen_contexts, mv_value, mv_values, optimal_arm, portfolio_truths, regret,
    ArmTruth, ContextMatrix,
};
pub use error::{Error, Result};
pub use harness::{Experiment, ExperimentConfig, RoundRecord};
pub use linalg::{CholeskyFactor, SpdMatrix, Vector};
pub use policies::{argmax, Decision, Policy, PolicyKind, PolicyTag};
pub use posterior::{ArmPosterior, CfArmPosterior};
pub use sampling::{NoiseKind, NoiseModel, RngStream, Sampler};
