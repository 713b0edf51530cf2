//! Seeded replications and their aggregation.
//!
//! Within a replication, every round draws one context matrix from the
//! `"env"` stream and shows it to all policies. Each policy then selects
//! with its own stream, observes its own reward draw, and updates. Round 0
//! pulls every arm once per policy; those records carry zero regret and are
//! not part of the regret curves.

use rayon::prelude::*;

use crate::environment::{draw_reward, gen_contexts, mv_values, ArmTruth};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::seed::derive_seed;
use crate::policies::{argmax, Policy, PolicyKind, PolicyTag};
use crate::sampling::RngStream;

/// Environment variable that caps the replication thread pool.
pub const THREADS_ENV: &str = "MVTS_THREADS";

/// One logged pull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub replication: usize,
    pub round: usize,
    pub policy: PolicyTag,
    pub chosen_arm: usize,
    pub optimal_arm: usize,
    pub reward: f64,
    pub regret: f64,
    pub cum_regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub policy: PolicyTag,
    /// Round-0 initialization records followed by rounds `1..=T`.
    pub records: Vec<RoundRecord>,
    /// Final per-arm state as JSON lines.
    pub snapshot: Vec<String>,
}

impl PolicyRun {
    /// Cumulative regret at rounds `1..=T`.
    pub fn cum_regret_curve(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.round > 0)
            .map(|r| r.cum_regret)
            .collect()
    }

    pub fn total_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutput {
    pub replication: usize,
    pub runs: Vec<PolicyRun>,
}

/// Mean cumulative-regret curves over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurves {
    pub policies: Vec<PolicyTag>,
    /// `mean_cum_regret[p][t - 1]` is the mean cumulative regret of policy
    /// `p` after round `t`.
    pub mean_cum_regret: Vec<Vec<f64>>,
    /// Total regret of each replication, per policy.
    pub totals: Vec<Vec<f64>>,
}

impl AggregateCurves {
    /// Averages per-replication curves. `curves[r][p]` is replication `r`,
    /// policy `p`; the sum runs in replication order.
    pub fn from_curves(policies: Vec<PolicyTag>, curves: &[Vec<Vec<f64>>]) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidParameter(
                "no replications to aggregate".into(),
            ));
        }
        let horizon = curves[0].first().map_or(0, Vec::len);
        let mut sums = vec![vec![0.0; horizon]; policies.len()];
        let mut totals = vec![Vec::with_capacity(curves.len()); policies.len()];
        for (r, rep) in curves.iter().enumerate() {
            if rep.len() != policies.len() {
                return Err(Error::InvalidParameter(format!(
                    "replication {r} has {} policy curves, expected {}",
                    rep.len(),
                    policies.len()
                )));
            }
            for (p, curve) in rep.iter().enumerate() {
                if curve.len() != horizon {
                    return Err(Error::InvalidParameter(format!(
                        "replication {r} policy {} has {} rounds, expected {horizon}",
                        policies[p],
                        curve.len()
                    )));
                }
                for (s, c) in sums[p].iter_mut().zip(curve) {
                    *s += c;
                }
                totals[p].push(curve.last().copied().unwrap_or(0.0));
            }
        }
        let n = curves.len() as f64;
        for s in sums.iter_mut().flatten() {
            *s /= n;
        }
        Ok(AggregateCurves {
            policies,
            mean_cum_regret: sums,
            totals,
        })
    }

    pub fn horizon(&self) -> usize {
        self.mean_cum_regret.first().map_or(0, Vec::len)
    }

    pub fn index_of(&self, policy: PolicyTag) -> Option<usize> {
        self.policies.iter().position(|&p| p == policy)
    }

    pub fn curve(&self, policy: PolicyTag) -> Option<&[f64]> {
        self.index_of(policy)
            .map(|i| self.mean_cum_regret[i].as_slice())
    }

    /// Mean total regret at the horizon.
    pub fn mean_total(&self, policy: PolicyTag) -> Option<f64> {
        self.curve(policy).and_then(|c| c.last().copied())
    }

    /// Standard error of the total regret across replications.
    pub fn total_std_error(&self, policy: PolicyTag) -> Option<f64> {
        let totals = &self.totals[self.index_of(policy)?];
        let n = totals.len() as f64;
        if totals.len() < 2 {
            return Some(0.0);
        }
        let mean = totals.iter().sum::<f64>() / n;
        let var = totals.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Some((var / n).sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub replications: Vec<ReplicationOutput>,
    pub aggregate: AggregateCurves,
}

impl ExperimentResult {
    /// All records, ordered by replication, then policy, then round.
    pub fn records(&self) -> impl Iterator<Item = &RoundRecord> {
        self.replications
            .iter()
            .flat_map(|r| r.runs.iter().flat_map(|p| p.records.iter()))
    }
}

/// A validated configuration bound to its truth table.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    policies: Vec<PolicyKind>,
    truths: Vec<ArmTruth>,
}

impl Experiment {
    /// Validates `config` and loads its truth table.
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let truths = config.load_truths()?;
        Self::with_truths(config, truths)
    }

    /// Uses the given truths instead of the configured source.
    pub fn with_truths(config: ExperimentConfig, truths: Vec<ArmTruth>) -> Result<Self> {
        config.validate()?;
        config.check_truths(&truths)?;
        let policies = config.resolve_policies()?;
        Ok(Experiment {
            config,
            policies,
            truths,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn policies(&self) -> &[PolicyKind] {
        &self.policies
    }

    pub fn truths(&self) -> &[ArmTruth] {
        &self.truths
    }

    pub fn run_replication(&self, replication: usize) -> Result<ReplicationOutput> {
        self.simulate(replication).map_err(|e| Error::Replication {
            replication,
            source: Box::new(e),
        })
    }

    fn simulate(&self, replication: usize) -> Result<ReplicationOutput> {
        let cfg = &self.config;
        let (k, d, horizon, rho) = (cfg.arms, cfg.dim, cfg.horizon, cfg.rho);
        let seed = |label: &str| derive_seed(cfg.master_seed, replication as u64, label);

        struct Lane {
            policy: Policy,
            decisions: RngStream,
            rewards: RngStream,
            records: Vec<RoundRecord>,
            cum: f64,
        }

        let mut env = RngStream::new(seed("env"));
        let mut lanes = self
            .policies
            .iter()
            .map(|&kind| {
                let tag = kind.tag().as_str();
                Ok(Lane {
                    policy: Policy::new(kind, rho, k, d)?,
                    decisions: RngStream::new(seed(tag)),
                    rewards: RngStream::new(seed(&format!("{tag}/reward"))),
                    records: Vec::with_capacity(horizon + k),
                    cum: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let contexts = gen_contexts(k, d, &mut env);
        let optimal = argmax(&mv_values(&contexts, &self.truths, rho));
        for lane in &mut lanes {
            for (arm, truth) in self.truths.iter().enumerate() {
                let x = contexts.row(arm);
                let reward = draw_reward(truth, x, &mut lane.rewards);
                lane.policy.update(arm, x, reward)?;
                lane.records.push(RoundRecord {
                    replication,
                    round: 0,
                    policy: lane.policy.tag(),
                    chosen_arm: arm,
                    optimal_arm: optimal,
                    reward,
                    regret: 0.0,
                    cum_regret: 0.0,
                });
            }
        }

        for round in 1..=horizon {
            let contexts = gen_contexts(k, d, &mut env);
            let mv = mv_values(&contexts, &self.truths, rho);
            let optimal = argmax(&mv);
            for lane in &mut lanes {
                let arm = lane.policy.choose(&contexts, &mut lane.decisions)?.arm;
                let x = contexts.row(arm);
                let reward = draw_reward(&self.truths[arm], x, &mut lane.rewards);
                lane.policy.update(arm, x, reward)?;
                let regret = mv[optimal] - mv[arm];
                if regret.is_nan() || regret < 0.0 {
                    return Err(Error::InternalConsistency(format!(
                        "negative regret {regret} at round {round}"
                    )));
                }
                lane.cum += regret;
                lane.records.push(RoundRecord {
                    replication,
                    round,
                    policy: lane.policy.tag(),
                    chosen_arm: arm,
                    optimal_arm: optimal,
                    reward,
                    regret,
                    cum_regret: lane.cum,
                });
            }
        }

        Ok(ReplicationOutput {
            replication,
            runs: lanes
                .into_iter()
                .map(|lane| PolicyRun {
                    policy: lane.policy.tag(),
                    snapshot: lane.policy.snapshot_lines(),
                    records: lane.records,
                })
                .collect(),
        })
    }

    /// Runs every replication on the global rayon pool, or on a dedicated
    /// pool when [`THREADS_ENV`] is set.
    pub fn run(&self) -> Result<ExperimentResult> {
        self.run_with_threads(threads_from_env()?)
    }

    /// Runs every replication with at most `threads` workers (`None` uses the
    /// global pool). Output does not depend on the thread count.
    pub fn run_with_threads(&self, threads: Option<usize>) -> Result<ExperimentResult> {
        let work = || {
            (0..self.config.replications)
                .into_par_iter()
                .map(|r| self.run_replication(r))
                .collect::<Result<Vec<_>>>()
        };
        let replications = match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
                .install(work)?,
            None => work()?,
        };
        let curves: Vec<Vec<Vec<f64>>> = replications
            .iter()
            .map(|r| r.runs.iter().map(PolicyRun::cum_regret_curve).collect())
            .collect();
        let aggregate = AggregateCurves::from_curves(self.config.policies.clone(), &curves)?;
        Ok(ExperimentResult {
            replications,
            aggregate,
        })
    }
}

/// Reads [`THREADS_ENV`]; unset or empty means "use the default pool".
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        _ => Ok(None),
    }
}
