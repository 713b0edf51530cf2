//! Arm-selection policies.
//!
//! Each `choose_*` function is a pure function of the posterior states, the
//! round's contexts and a [`Sampler`]. Draws are taken arm by arm in index
//! order, and within an arm in the fixed order documented on each function,
//! so a seeded run is reproducible draw for draw. Ties go to the lowest arm
//! index.

use std::fmt;
use std::str::FromStr;

use crate::environment::ContextMatrix;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, CholeskyFactor};
use crate::posterior::{ArmPosterior, CfArmPosterior};
use crate::sampling::{sample_mvn, Sampler};

/// Floor applied to a sampled precision before it is inverted.
pub const MIN_SAMPLED_PRECISION: f64 = 1e-12;

/// Floor applied to a zero gamma rate so the precision draw stays defined.
const MIN_GAMMA_RATE: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyTag {
    MvtsD,
    MvtsDn,
    TsA,
    CfMvts,
    Uniform,
}

impl PolicyTag {
    pub const ALL: [PolicyTag; 5] = [
        PolicyTag::MvtsD,
        PolicyTag::MvtsDn,
        PolicyTag::TsA,
        PolicyTag::CfMvts,
        PolicyTag::Uniform,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyTag::MvtsD => "mvts_d",
            PolicyTag::MvtsDn => "mvts_dn",
            PolicyTag::TsA => "ts_a",
            PolicyTag::CfMvts => "cf_mvts",
            PolicyTag::Uniform => "uniform",
        }
    }
}

impl fmt::Display for PolicyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown policy `{s}`")))
    }
}

/// A policy together with its sampling constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Normal-gamma Thompson sampling on the mean-variance score.
    MvtsD,
    /// Independent normal draws for mean (scale `v`) and variance (scale `u`).
    MvtsDn {
        u: f64,
        v: f64,
    },
    /// Risk-neutral linear Thompson sampling with mean scale `v`.
    TsA {
        v: f64,
    },
    /// Context-free mean-variance Thompson sampling.
    CfMvts,
    Uniform,
}

impl PolicyKind {
    pub fn tag(&self) -> PolicyTag {
        match self {
            PolicyKind::MvtsD => PolicyTag::MvtsD,
            PolicyKind::MvtsDn { .. } => PolicyTag::MvtsDn,
            PolicyKind::TsA { .. } => PolicyTag::TsA,
            PolicyKind::CfMvts => PolicyTag::CfMvts,
            PolicyKind::Uniform => PolicyTag::Uniform,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::MvtsDn { u, v } => {
                check_positive("u", u)?;
                check_positive("v", v)
            }
            PolicyKind::TsA { v } => check_positive("v", v),
            _ => Ok(()),
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "risk tolerance must be finite and nonnegative, got {rho}"
        )))
    }
}

fn check_confidence(epsilon: f64, eps_max: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < eps_max) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, {eps_max}), got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Sampling scales `(u, v)` of the normal-variance variant:
///
/// ```text
///   v = R √( (4/ε) d ln(4K/δ) )
///   u = 8 R² d ln(4K/δ) √(1/ε)
/// ```
///
/// with `ε ∈ (0, ½)` and `δ ∈ (0, 1)`.
pub fn dn_constants(r: f64, epsilon: f64, delta: f64, d: usize, k: usize) -> Result<(f64, f64)> {
    check_positive("R", r)?;
    check_confidence(epsilon, 0.5, delta)?;
    if d == 0 || k == 0 {
        return Err(Error::InvalidParameter("d and K must be positive".into()));
    }
    let log_term = (4.0 * k as f64 / delta).ln();
    let v = r * (4.0 / epsilon * d as f64 * log_term).sqrt();
    let u = 8.0 * r * r * d as f64 * log_term * (1.0 / epsilon).sqrt();
    Ok((u, v))
}

/// Mean-sampling scale of risk-neutral linear Thompson sampling,
/// `v = R √( (24/ε) d ln(1/δ) )` with `ε, δ ∈ (0, 1)`.
pub fn ts_a_scale(r: f64, epsilon: f64, delta: f64, d: usize) -> Result<f64> {
    check_positive("R", r)?;
    check_confidence(epsilon, 1.0, delta)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    Ok(r * (24.0 / epsilon * d as f64 * (1.0 / delta).ln()).sqrt())
}

/// Outcome of one selection step.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub arm: usize,
    /// Per-arm sampled score the argmax ran over.
    pub sampled_scores: Vec<f64>,
    /// Per-arm sampled mean term (`xᵀμ̃`, or `θ` for the context-free policy).
    pub sampled_means: Vec<f64>,
    /// Per-arm sampled variance term (`σ̃²`, `1/τ`, or 0 where not sampled).
    pub sampled_variances: Vec<f64>,
}

impl Decision {
    fn from_terms(means: Vec<f64>, variances: Vec<f64>, rho: f64) -> Self {
        let scores: Vec<f64> = means
            .iter()
            .zip(&variances)
            .map(|(m, v)| m - rho * v)
            .collect();
        Decision {
            arm: argmax(&scores),
            sampled_scores: scores,
            sampled_means: means,
            sampled_variances: variances,
        }
    }
}

/// Index of the largest value, lowest index on ties. NaN never wins.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

fn check_contexts(states: &[ArmPosterior], contexts: &ContextMatrix) -> Result<()> {
    if states.is_empty() {
        return Err(Error::PolicyState("no arms".into()));
    }
    if contexts.arms() != states.len() {
        return Err(Error::DimensionMismatch {
            expected: states.len(),
            actual: contexts.arms(),
        });
    }
    let d = states[0].dim();
    if contexts.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: contexts.dim(),
        });
    }
    for (i, s) in states.iter().enumerate() {
        if s.n_pulls() == 0 {
            return Err(Error::PolicyState(format!(
                "arm {i} has not been initialized"
            )));
        }
    }
    Ok(())
}

fn inverse_factor(state: &ArmPosterior) -> Result<CholeskyFactor> {
    cholesky(state.design_inverse())
}

/// Normal-gamma Thompson sampling. Per arm, in order: one
/// `λ̃ ~ Gamma(C, D)`, then `μ̃ ~ N(A⁻¹b, (λ̃A)⁻¹)` from `d` standard normals.
/// Score is `xᵀμ̃ − ρ/λ̃`.
pub fn choose_mvts_d<S: Sampler + ?Sized>(
    states: &[ArmPosterior],
    contexts: &ContextMatrix,
    rho: f64,
    sampler: &mut S,
) -> Result<Decision> {
    check_rho(rho)?;
    check_contexts(states, contexts)?;
    let k = states.len();
    let mut means = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for (i, state) in states.iter().enumerate() {
        let precision = sampler
            .gamma(state.shape(), state.rate().max(MIN_GAMMA_RATE))?
            .max(MIN_SAMPLED_PRECISION);
        let mut factor = inverse_factor(state)?;
        factor.scale(1.0 / precision.sqrt());
        let mu = sample_mvn(&state.mean_estimate(), &factor, sampler)?;
        means.push(dot(contexts.row(i), &mu));
        variances.push(1.0 / precision);
    }
    Ok(Decision::from_terms(means, variances, rho))
}

/// Normal-variance variant. Per arm, in order: one standard normal for
/// `σ̃² ~ N(D/C, u²/n)`, then `d` standard normals for
/// `μ̃ ~ N(A⁻¹b, v²A⁻¹)`. Negative `σ̃²` draws are kept as is.
pub fn choose_mvts_dn<S: Sampler + ?Sized>(
    states: &[ArmPosterior],
    contexts: &ContextMatrix,
    rho: f64,
    u: f64,
    v: f64,
    sampler: &mut S,
) -> Result<Decision> {
    check_rho(rho)?;
    check_positive("u", u)?;
    check_positive("v", v)?;
    check_contexts(states, contexts)?;
    let k = states.len();
    let mut means = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for (i, state) in states.iter().enumerate() {
        let sd = u / (state.n_pulls() as f64).sqrt();
        let sigma2 = state.variance_estimate()? + sd * sampler.standard_normal();
        let mut factor = inverse_factor(state)?;
        factor.scale(v);
        let mu = sample_mvn(&state.mean_estimate(), &factor, sampler)?;
        means.push(dot(contexts.row(i), &mu));
        variances.push(sigma2);
    }
    Ok(Decision::from_terms(means, variances, rho))
}

/// Risk-neutral linear Thompson sampling: `d` standard normals per arm for
/// `μ̃ ~ N(A⁻¹b, v²A⁻¹)`, score `xᵀμ̃`.
pub fn choose_ts_a<S: Sampler + ?Sized>(
    states: &[ArmPosterior],
    contexts: &ContextMatrix,
    v: f64,
    sampler: &mut S,
) -> Result<Decision> {
    check_positive("v", v)?;
    check_contexts(states, contexts)?;
    let k = states.len();
    let mut means = Vec::with_capacity(k);
    for (i, state) in states.iter().enumerate() {
        let mut factor = inverse_factor(state)?;
        factor.scale(v);
        let mu = sample_mvn(&state.mean_estimate(), &factor, sampler)?;
        means.push(dot(contexts.row(i), &mu));
    }
    Ok(Decision::from_terms(means, vec![0.0; k], 0.0))
}

/// Context-free mean-variance Thompson sampling. Per arm, in order: one
/// `τ ~ Gamma(α̂, β̂)`, then one normal for `θ ~ N(μ̂, 1/T̂)`. Score is
/// `θ − ρ/τ`.
pub fn choose_cf_mvts<S: Sampler + ?Sized>(
    states: &[CfArmPosterior],
    rho: f64,
    sampler: &mut S,
) -> Result<Decision> {
    check_rho(rho)?;
    if states.is_empty() {
        return Err(Error::PolicyState("no arms".into()));
    }
    let k = states.len();
    let mut means = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for (i, s) in states.iter().enumerate() {
        if !s.is_initialized() {
            return Err(Error::PolicyState(format!(
                "arm {i} has not been initialized"
            )));
        }
        let tau = sampler.gamma(s.shape, s.rate)?.max(MIN_SAMPLED_PRECISION);
        let theta = s.mean + sampler.standard_normal() / s.count.sqrt();
        means.push(theta);
        variances.push(1.0 / tau);
    }
    Ok(Decision::from_terms(means, variances, rho))
}

/// Uniformly random arm.
pub fn choose_uniform<S: Sampler + ?Sized>(k: usize, sampler: &mut S) -> Result<Decision> {
    if k == 0 {
        return Err(Error::PolicyState("no arms".into()));
    }
    let arm = sampler.index(k);
    let mut scores = vec![0.0; k];
    scores[arm] = 1.0;
    Ok(Decision {
        arm,
        sampled_means: scores.clone(),
        sampled_scores: scores,
        sampled_variances: vec![0.0; k],
    })
}

#[derive(Debug, Clone, PartialEq)]
enum PolicyState {
    Contextual(Vec<ArmPosterior>),
    ContextFree(Vec<CfArmPosterior>),
    Stateless { arms: usize },
}

/// A policy instance owning the per-arm state for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    kind: PolicyKind,
    rho: f64,
    state: PolicyState,
}

impl Policy {
    pub fn new(kind: PolicyKind, rho: f64, arms: usize, dim: usize) -> Result<Self> {
        kind.validate()?;
        check_rho(rho)?;
        if arms == 0 || dim == 0 {
            return Err(Error::InvalidParameter(
                "arm count and dimension must be positive".into(),
            ));
        }
        let state = match kind {
            PolicyKind::MvtsD | PolicyKind::MvtsDn { .. } | PolicyKind::TsA { .. } => {
                PolicyState::Contextual(vec![ArmPosterior::new(dim); arms])
            }
            PolicyKind::CfMvts => PolicyState::ContextFree(vec![CfArmPosterior::empty(); arms]),
            PolicyKind::Uniform => PolicyState::Stateless { arms },
        };
        Ok(Policy { kind, rho, state })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn tag(&self) -> PolicyTag {
        self.kind.tag()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn arms(&self) -> usize {
        match &self.state {
            PolicyState::Contextual(s) => s.len(),
            PolicyState::ContextFree(s) => s.len(),
            PolicyState::Stateless { arms } => *arms,
        }
    }

    /// Per-arm posteriors of the contextual policies.
    pub fn arm_states(&self) -> Option<&[ArmPosterior]> {
        match &self.state {
            PolicyState::Contextual(s) => Some(s),
            _ => None,
        }
    }

    pub fn cf_states(&self) -> Option<&[CfArmPosterior]> {
        match &self.state {
            PolicyState::ContextFree(s) => Some(s),
            _ => None,
        }
    }

    pub fn choose<S: Sampler + ?Sized>(
        &self,
        contexts: &ContextMatrix,
        sampler: &mut S,
    ) -> Result<Decision> {
        match (&self.state, self.kind) {
            (PolicyState::Contextual(s), PolicyKind::MvtsD) => {
                choose_mvts_d(s, contexts, self.rho, sampler)
            }
            (PolicyState::Contextual(s), PolicyKind::MvtsDn { u, v }) => {
                choose_mvts_dn(s, contexts, self.rho, u, v, sampler)
            }
            (PolicyState::Contextual(s), PolicyKind::TsA { v }) => {
                choose_ts_a(s, contexts, v, sampler)
            }
            (PolicyState::ContextFree(s), _) => choose_cf_mvts(s, self.rho, sampler),
            (PolicyState::Stateless { arms }, _) => choose_uniform(*arms, sampler),
            _ => unreachable!("policy state does not match its kind"),
        }
    }

    /// Feeds back the reward of the pulled arm. Only that arm's state changes.
    pub fn update(&mut self, arm: usize, context: &[f64], reward: f64) -> Result<()> {
        let arms = self.arms();
        if arm >= arms {
            return Err(Error::ArmOutOfRange { index: arm, arms });
        }
        match &mut self.state {
            PolicyState::Contextual(s) => s[arm].observe(context, reward),
            PolicyState::ContextFree(s) => s[arm].observe(reward),
            PolicyState::Stateless { .. } => Ok(()),
        }
    }

    /// One JSON line per arm describing the current state.
    pub fn snapshot_lines(&self) -> Vec<String> {
        match &self.state {
            PolicyState::Contextual(s) => s
                .iter()
                .enumerate()
                .map(|(i, a)| a.snapshot_json(i))
                .collect(),
            PolicyState::ContextFree(s) => s
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    format!(
                        "{{\"arm\":{i},\"mean\":{:e},\"count\":{:e},\"alpha\":{:e},\"beta\":{:e}}}",
                        a.mean, a.count, a.shape, a.rate
                    )
                })
                .collect(),
            PolicyState::Stateless { .. } => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::sampling::RngStream;

    /// Returns fixed values and counts what was asked for.
    #[derive(Default)]
    struct Pinned {
        normal: f64,
        gamma: Option<f64>,
        uniform: f64,
        normals: usize,
        gammas: usize,
    }

    impl Sampler for Pinned {
        fn standard_normal(&mut self) -> f64 {
            self.normals += 1;
            self.normal
        }

        fn uniform(&mut self) -> f64 {
            self.uniform
        }

        fn gamma(&mut self, shape: f64, rate: f64) -> Result<f64> {
            self.gammas += 1;
            Ok(self.gamma.unwrap_or(shape / rate))
        }
    }

    fn pinned(gamma: f64) -> Pinned {
        Pinned {
            gamma: Some(gamma),
            ..Default::default()
        }
    }

    fn scalar_arm(history: &[(f64, f64)]) -> ArmPosterior {
        let mut s = ArmPosterior::new(1);
        for &(x, r) in history {
            s.observe(&[x], r).unwrap();
        }
        s
    }

    fn ctx(rows: &[&[f64]]) -> ContextMatrix {
        ContextMatrix::from_rows(rows.iter().map(|r| Vector::from(*r)).collect()).unwrap()
    }

    #[test]
    fn dn_constants_closed_form() {
        let (u, v) = dn_constants(1.0, 0.25, 0.1, 8, 10).unwrap();
        // ln 400 = 5.991464547107982
        let l = 400f64.ln();
        assert!((l - 5.991464547107982).abs() < 1e-15);
        assert!((v - (16.0 * 8.0 * l).sqrt()).abs() < 1e-12);
        assert!((u - 64.0 * l * 2.0).abs() < 1e-10);
        assert!((v - 27.69).abs() < 0.01, "v = {v}");
        assert!((u - 766.9).abs() < 0.05, "u = {u}");
    }

    #[test]
    fn dn_constants_reject_bad_ranges() {
        assert!(matches!(
            dn_constants(1.0, 0.6, 0.1, 8, 10),
            Err(Error::InvalidParameter(_))
        ));
        assert!(dn_constants(1.0, 0.0, 0.1, 8, 10).is_err());
        assert!(dn_constants(1.0, 0.25, 1.0, 8, 10).is_err());
        assert!(dn_constants(0.0, 0.25, 0.1, 8, 10).is_err());
        assert!(ts_a_scale(1.0, 1.0, 0.1, 8).is_err());
        // ε up to 1 is allowed for the risk-neutral constant.
        let v = ts_a_scale(1.0, 0.6, 0.1, 8).unwrap();
        assert!((v - (24.0 / 0.6 * 8.0 * 10f64.ln()).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_arm_always_chosen() {
        let states = vec![scalar_arm(&[(1.0, 0.3)])];
        let c = ctx(&[&[0.5]]);
        let mut rng = RngStream::new(1);
        assert_eq!(choose_mvts_d(&states, &c, 1.0, &mut rng).unwrap().arm, 0);
        assert_eq!(
            choose_mvts_dn(&states, &c, 1.0, 1.0, 1.0, &mut rng)
                .unwrap()
                .arm,
            0
        );
        assert_eq!(choose_ts_a(&states, &c, 1.0, &mut rng).unwrap().arm, 0);
        let cf = [CfArmPosterior::from_first_reward(0.1).unwrap()];
        assert_eq!(choose_cf_mvts(&cf, 1.0, &mut rng).unwrap().arm, 0);
        assert_eq!(choose_uniform(1, &mut rng).unwrap().arm, 0);
    }

    #[test]
    fn mvts_d_pinned_draws_reduce_to_hand_scores() {
        // Arm 0: x=1, r=2 → μ̂ = 1. Arm 1: x=1, r=1.2 → μ̂ = 0.6.
        // Pinned λ̃ = 1 so σ̃² = 1; ρ = 0.25, context 0.75 / 0.9167.
        // Scores: 0.75·1 − 0.25 = 0.5 and (0.55/0.6)·0.6 − 0.25 = 0.3.
        let states = vec![scalar_arm(&[(1.0, 2.0)]), scalar_arm(&[(1.0, 1.2)])];
        let c = ctx(&[&[0.75], &[0.55 / 0.6]]);
        let mut s = pinned(1.0);
        let d = choose_mvts_d(&states, &c, 0.25, &mut s).unwrap();
        assert_eq!(d.arm, 0);
        assert!((d.sampled_scores[0] - 0.5).abs() < 1e-12);
        assert!((d.sampled_scores[1] - 0.3).abs() < 1e-12);
        assert_eq!(d.sampled_variances, vec![1.0, 1.0]);
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let arm = scalar_arm(&[(1.0, 1.0)]);
        let states = vec![arm.clone(), arm.clone(), arm];
        let c = ctx(&[&[0.5], &[0.5], &[0.5]]);
        let d = choose_mvts_d(&states, &c, 1.0, &mut pinned(2.0)).unwrap();
        assert_eq!(d.arm, 0);
        let d = choose_mvts_dn(&states, &c, 1.0, 1.0, 1.0, &mut Pinned::default()).unwrap();
        assert_eq!(d.arm, 0);
        let d = choose_ts_a(&states, &c, 1.0, &mut Pinned::default()).unwrap();
        assert_eq!(d.arm, 0);
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[f64::NAN, -1.0]), 1);
    }

    #[test]
    fn mvts_dn_zero_perturbation_uses_point_estimates() {
        // Arm 0: μ̂ = 1, σ̂² = 2, context 0.5 → 0.5 − 0.15·2 = 0.2.
        // Arm 1: (x, r) = (1, 0.8) gives μ̂ = 0.4, σ̂² = 2·½(0.64 − 0.32) = 0.32,
        //        context 1 → 0.4 − 0.15·0.32 = 0.352.
        let states = vec![scalar_arm(&[(1.0, 2.0)]), scalar_arm(&[(1.0, 0.8)])];
        let c = ctx(&[&[0.5], &[1.0]]);
        let rho = 0.15;
        let d = choose_mvts_dn(&states, &c, rho, 1.0, 1.0, &mut Pinned::default()).unwrap();
        let expected: Vec<f64> = states
            .iter()
            .enumerate()
            .map(|(i, s)| c.row(i)[0] * s.mean_estimate()[0] - rho * s.rate() / s.shape())
            .collect();
        assert!((expected[0] - 0.2).abs() < 1e-12);
        assert!((expected[1] - 0.352).abs() < 1e-12);
        assert_eq!(d.arm, 1);
        for (a, b) in d.sampled_scores.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mvts_dn_rejects_nonpositive_scales() {
        let states = vec![scalar_arm(&[(1.0, 2.0)])];
        let c = ctx(&[&[0.5]]);
        let mut s = Pinned::default();
        assert!(choose_mvts_dn(&states, &c, 1.0, 0.0, 1.0, &mut s).is_err());
        assert!(choose_mvts_dn(&states, &c, 1.0, 1.0, 0.0, &mut s).is_err());
        assert!(Policy::new(PolicyKind::MvtsDn { u: 0.0, v: 1.0 }, 1.0, 2, 2).is_err());
        assert!(Policy::new(PolicyKind::TsA { v: -1.0 }, 1.0, 2, 2).is_err());
        assert!(Policy::new(PolicyKind::MvtsD, -0.1, 2, 2).is_err());
    }

    #[test]
    fn mvts_dn_keeps_negative_variance_draws() {
        let states = vec![scalar_arm(&[(1.0, 2.0)])];
        let c = ctx(&[&[0.5]]);
        let mut s = Pinned {
            normal: -10.0,
            ..Default::default()
        };
        let d = choose_mvts_dn(&states, &c, 1.0, 1.0, 1.0, &mut s).unwrap();
        assert!((d.sampled_variances[0] - (2.0 - 10.0)).abs() < 1e-12);
    }

    #[test]
    fn ts_a_is_argmax_of_point_estimate_and_ignores_rho() {
        let states = vec![scalar_arm(&[(1.0, 2.0)]), scalar_arm(&[(1.0, 0.8)])];
        let c = ctx(&[&[0.3], &[1.0]]);
        let d = choose_ts_a(&states, &c, 1.0, &mut Pinned::default()).unwrap();
        // 0.3·1 vs 1·0.4
        assert_eq!(d.arm, 1);
        assert!((d.sampled_scores[0] - 0.3).abs() < 1e-12);

        let p0 = Policy::new(PolicyKind::TsA { v: 1.0 }, 0.0, 2, 1).unwrap();
        let p9 = Policy::new(PolicyKind::TsA { v: 1.0 }, 9.0, 2, 1).unwrap();
        let mut a = p0.clone();
        let mut b = p9.clone();
        for (arm, r) in [(0, 2.0), (1, 0.8)] {
            a.update(arm, &[1.0], r).unwrap();
            b.update(arm, &[1.0], r).unwrap();
        }
        for seed in 0..50 {
            let da = a.choose(&c, &mut RngStream::new(seed)).unwrap();
            let db = b.choose(&c, &mut RngStream::new(seed)).unwrap();
            assert_eq!(da, db);
        }
    }

    #[test]
    fn cf_mvts_pinned_example_and_context_blindness() {
        let states = [
            CfArmPosterior {
                mean: 1.0,
                count: 1.0,
                shape: 0.5,
                rate: 0.5,
            },
            CfArmPosterior {
                mean: 0.0,
                count: 1.0,
                shape: 0.5,
                rate: 0.5,
            },
        ];
        let d = choose_cf_mvts(&states, 1.0, &mut pinned(1.0)).unwrap();
        assert_eq!(d.arm, 0);
        assert_eq!(d.sampled_scores, vec![0.0, -1.0]);

        let mut p = Policy::new(PolicyKind::CfMvts, 1.0, 2, 2).unwrap();
        p.update(0, &[0.1, 0.2], 1.0).unwrap();
        p.update(1, &[0.3, 0.4], 0.0).unwrap();
        let c1 = ctx(&[&[0.1, 0.2], &[0.3, 0.4]]);
        let c2 = ctx(&[&[0.3, 0.4], &[0.1, 0.2]]);
        for seed in 0..20 {
            let a = p.choose(&c1, &mut RngStream::new(seed)).unwrap();
            let b = p.choose(&c2, &mut RngStream::new(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn uninitialized_arms_are_rejected() {
        let states = vec![ArmPosterior::new(1), scalar_arm(&[(1.0, 1.0)])];
        let c = ctx(&[&[0.5], &[0.5]]);
        let mut rng = RngStream::new(0);
        assert!(matches!(
            choose_mvts_d(&states, &c, 1.0, &mut rng),
            Err(Error::PolicyState(_))
        ));
        assert!(matches!(
            choose_ts_a(&states, &c, 1.0, &mut rng),
            Err(Error::PolicyState(_))
        ));
        assert!(matches!(
            choose_cf_mvts(&[CfArmPosterior::empty()], 1.0, &mut rng),
            Err(Error::PolicyState(_))
        ));
    }

    #[test]
    fn uniform_frequencies_and_determinism() {
        let mut rng = RngStream::new(99);
        let mut counts = [0usize; 10];
        let n = 100_000;
        for _ in 0..n {
            counts[choose_uniform(10, &mut rng).unwrap().arm] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.1).abs() < 0.01);
        }
        let a: Vec<usize> = {
            let mut r = RngStream::new(5);
            (0..100)
                .map(|_| choose_uniform(7, &mut r).unwrap().arm)
                .collect()
        };
        let b: Vec<usize> = {
            let mut r = RngStream::new(5);
            (0..100)
                .map(|_| choose_uniform(7, &mut r).unwrap().arm)
                .collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn draw_counts_per_round() {
        let d = 3;
        let k = 4;
        let mut arm = ArmPosterior::new(d);
        arm.observe(&[0.1, 0.2, 0.3], 1.0).unwrap();
        let states = vec![arm; k];
        let c = ContextMatrix::from_rows(vec![Vector::from(vec![0.1, 0.2, 0.3]); k]).unwrap();

        let mut s = pinned(1.0);
        choose_mvts_d(&states, &c, 1.0, &mut s).unwrap();
        assert_eq!((s.gammas, s.normals), (k, k * d));

        let mut s = Pinned::default();
        choose_ts_a(&states, &c, 1.0, &mut s).unwrap();
        assert_eq!((s.gammas, s.normals), (0, k * d));

        let mut s = Pinned::default();
        choose_mvts_dn(&states, &c, 1.0, 1.0, 1.0, &mut s).unwrap();
        assert_eq!((s.gammas, s.normals), (0, k * (d + 1)));

        let cf = vec![CfArmPosterior::from_first_reward(0.0).unwrap(); k];
        let mut s = pinned(1.0);
        choose_cf_mvts(&cf, 1.0, &mut s).unwrap();
        assert_eq!((s.gammas, s.normals), (k, k));
    }

    #[test]
    fn update_touches_only_pulled_arm() {
        let mut p = Policy::new(PolicyKind::MvtsD, 1.0, 3, 2).unwrap();
        for arm in 0..3 {
            p.update(arm, &[0.5, 0.5], arm as f64).unwrap();
        }
        let before = p.arm_states().unwrap().to_vec();
        p.update(1, &[0.2, -0.4], 0.7).unwrap();
        let after = p.arm_states().unwrap();
        assert_eq!(after[0], before[0]);
        assert_eq!(after[2], before[2]);
        assert_eq!(after[1], before[1].observed(&[0.2, -0.4], 0.7).unwrap());

        let mut cf = Policy::new(PolicyKind::CfMvts, 1.0, 2, 2).unwrap();
        cf.update(0, &[0.0, 0.0], 0.4).unwrap();
        assert_eq!(
            cf.cf_states().unwrap()[0],
            CfArmPosterior::from_first_reward(0.4).unwrap()
        );
        assert_eq!(cf.cf_states().unwrap()[1], CfArmPosterior::empty());

        let mut u = Policy::new(PolicyKind::Uniform, 1.0, 2, 2).unwrap();
        let snapshot = u.clone();
        u.update(1, &[0.0, 0.0], 3.0).unwrap();
        assert_eq!(u, snapshot);

        assert!(matches!(
            p.update(3, &[0.0, 0.0], 0.0),
            Err(Error::ArmOutOfRange { index: 3, arms: 3 })
        ));
    }

    #[test]
    fn rho_zero_decision_is_mean_argmax() {
        let mut p = Policy::new(PolicyKind::MvtsD, 0.0, 4, 2).unwrap();
        let mut rng = RngStream::new(3);
        for arm in 0..4 {
            p.update(arm, &[0.6, -0.2], rng.standard_normal()).unwrap();
        }
        let c = ctx(&[&[0.1, 0.9], &[-0.5, 0.5], &[0.7, 0.0], &[0.3, -0.3]]);
        for _ in 0..200 {
            let d = p.choose(&c, &mut rng).unwrap();
            assert_eq!(d.arm, argmax(&d.sampled_means));
        }
    }

    #[test]
    fn tag_round_trip() {
        for t in PolicyTag::ALL {
            assert_eq!(t.as_str().parse::<PolicyTag>().unwrap(), t);
        }
        assert!("linucb".parse::<PolicyTag>().is_err());
    }
}
