//! Fixtures shared by the kernel benchmarks.

use mvts::environment::gen_contexts;
use mvts::{ArmPosterior, ContextMatrix, NoiseKind, Policy, PolicyKind, RngStream};

/// A posterior that has seen `n` random pulls.
pub fn warmed_posterior(dim: usize, n: usize, seed: u64) -> ArmPosterior {
    let mut rng = RngStream::new(seed);
    let mut post = ArmPosterior::new(dim);
    for _ in 0..n {
        let ctx = gen_contexts(1, dim, &mut rng);
        post.observe(ctx.row(0), 0.1).expect("finite reward");
    }
    post
}

/// A policy over the portfolio arms after `rounds` random updates, plus a
/// context matrix to choose from.
pub fn warmed_policy(kind: PolicyKind, rounds: usize, seed: u64) -> (Policy, ContextMatrix) {
    let truths = mvts::portfolio_truths(NoiseKind::Gaussian);
    let (k, d) = (truths.len(), truths[0].mu().dim());
    let mut rng = RngStream::new(seed);
    let mut policy = Policy::new(kind, 1.0, k, d).expect("valid policy");
    for t in 0..rounds {
        let ctx = gen_contexts(k, d, &mut rng);
        let arm = t % k;
        let r = mvts::draw_reward(&truths[arm], ctx.row(arm), &mut rng);
        policy.update(arm, ctx.row(arm), r).expect("valid update");
    }
    (policy, gen_contexts(k, d, &mut rng))
}
