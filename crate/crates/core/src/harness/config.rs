//! Experiment configuration and its flat `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! arms = 10
//! dim = 8
//! horizon = 10000
//! rho = 1
//! replications = 20
//! policies = mvts_d, mvts_dn, ts_a, cf_mvts, uniform
//! noise = gaussian            # gaussian | truncated_normal | uniform
//! truncation_bound = 5
//! master_seed = 1
//! truths = builtin            # or a path to a truth table
//! allow_unbounded_mean = false
//! sub_gaussian_r = 1
//! epsilon = 0.25
//! delta = 0.1
//! mvts_dn.u = 1               # or auto: derive from (R, epsilon, delta)
//! mvts_dn.v = 1
//! ts_a.v = 1
//! debug_dump = false
//! ```
//!
//! Every key is optional and falls back to [`ExperimentConfig::default`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::environment::{parse_truth_table, portfolio_truths, ArmTruth};
use crate::error::{Error, Result};
use crate::policies::{dn_constants, ts_a_scale, PolicyKind, PolicyTag};
use crate::sampling::{NoiseKind, DEFAULT_TRUNCATION_BOUND};

#[derive(Debug, Clone, PartialEq)]
pub enum TruthSource {
    Builtin,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub arms: usize,
    pub dim: usize,
    pub horizon: usize,
    pub rho: f64,
    pub replications: usize,
    pub policies: Vec<PolicyTag>,
    /// Noise shape; a truncated-normal bound here is replaced by
    /// `truncation_bound`, see [`ExperimentConfig::noise_kind`].
    pub noise: NoiseKind,
    pub truncation_bound: f64,
    pub master_seed: u64,
    pub truths: TruthSource,
    pub allow_unbounded_mean: bool,
    /// Sub-Gaussian constant R used when deriving sampling scales.
    pub sub_gaussian_r: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub mvts_dn_u: Option<f64>,
    pub mvts_dn_v: Option<f64>,
    pub ts_a_v: Option<f64>,
    pub debug_dump: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            arms: 10,
            dim: 8,
            horizon: 10_000,
            rho: 1.0,
            replications: 20,
            policies: PolicyTag::ALL.to_vec(),
            noise: NoiseKind::Gaussian,
            truncation_bound: DEFAULT_TRUNCATION_BOUND,
            master_seed: 1,
            truths: TruthSource::Builtin,
            allow_unbounded_mean: false,
            sub_gaussian_r: 1.0,
            epsilon: 0.25,
            delta: 0.1,
            mvts_dn_u: None,
            mvts_dn_v: None,
            ts_a_v: None,
            debug_dump: false,
        }
    }
}

impl ExperimentConfig {
    /// Portfolio-experiment setup with all sampling scales pinned to 1.
    pub fn portfolio(rho: f64, noise: NoiseKind) -> Self {
        ExperimentConfig {
            rho,
            noise,
            mvts_dn_u: Some(1.0),
            mvts_dn_v: Some(1.0),
            ts_a_v: Some(1.0),
            ..Default::default()
        }
    }

    /// The noise kind with the configured truncation bound applied.
    pub fn noise_kind(&self) -> NoiseKind {
        match self.noise {
            NoiseKind::TruncatedNormal { .. } => NoiseKind::TruncatedNormal {
                bound: self.truncation_bound,
            },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.arms == 0 {
            return fail("arms must be at least 1".into());
        }
        if self.dim == 0 {
            return fail("dim must be at least 1".into());
        }
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if self.replications == 0 {
            return fail("replications must be at least 1".into());
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return fail(format!(
                "rho must be finite and nonnegative, got {}",
                self.rho
            ));
        }
        if self.policies.is_empty() {
            return fail("policies must not be empty".into());
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].contains(p) {
                return fail(format!("policy `{p}` listed twice"));
            }
        }
        for (name, v) in [
            ("mvts_dn.u", self.mvts_dn_u),
            ("mvts_dn.v", self.mvts_dn_v),
            ("ts_a.v", self.ts_a_v),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(format!("{name} must be positive, got {v}"));
                }
            }
        }
        self.resolve_policies().map(|_| ())
    }

    /// Policy kinds with every sampling scale filled in, overrides first.
    pub fn resolve_policies(&self) -> Result<Vec<PolicyKind>> {
        let wrap = |e: Error| Error::Config(e.to_string());
        self.policies
            .iter()
            .map(|tag| {
                Ok(match tag {
                    PolicyTag::MvtsD => PolicyKind::MvtsD,
                    PolicyTag::MvtsDn => {
                        let (u, v) = match (self.mvts_dn_u, self.mvts_dn_v) {
                            (Some(u), Some(v)) => (u, v),
                            (u, v) => {
                                let (du, dv) = dn_constants(
                                    self.sub_gaussian_r,
                                    self.epsilon,
                                    self.delta,
                                    self.dim,
                                    self.arms,
                                )
                                .map_err(wrap)?;
                                (u.unwrap_or(du), v.unwrap_or(dv))
                            }
                        };
                        PolicyKind::MvtsDn { u, v }
                    }
                    PolicyTag::TsA => PolicyKind::TsA {
                        v: match self.ts_a_v {
                            Some(v) => v,
                            None => {
                                ts_a_scale(self.sub_gaussian_r, self.epsilon, self.delta, self.dim)
                                    .map_err(wrap)?
                            }
                        },
                    },
                    PolicyTag::CfMvts => PolicyKind::CfMvts,
                    PolicyTag::Uniform => PolicyKind::Uniform,
                })
            })
            .collect()
    }

    /// Loads the truth table and checks it against `arms` and `dim`.
    pub fn load_truths(&self) -> Result<Vec<ArmTruth>> {
        let truths = match &self.truths {
            TruthSource::Builtin => portfolio_truths(self.noise_kind()),
            TruthSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_truth_table(&text, self.noise_kind(), self.allow_unbounded_mean)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        };
        self.check_truths(&truths)?;
        Ok(truths)
    }

    pub fn check_truths(&self, truths: &[ArmTruth]) -> Result<()> {
        if truths.len() != self.arms {
            return Err(Error::Config(format!(
                "config has arms = {} but the truth table has {} arms",
                self.arms,
                truths.len()
            )));
        }
        if let Some(t) = truths.iter().find(|t| t.mu().dim() != self.dim) {
            return Err(Error::Config(format!(
                "config has dim = {} but the truth table has dimension {}",
                self.dim,
                t.mu().dim()
            )));
        }
        if !self.allow_unbounded_mean {
            if let Some((i, t)) = truths
                .iter()
                .enumerate()
                .find(|(_, t)| t.mu().norm() > 1.0 + 1e-12)
            {
                return Err(Error::Config(format!(
                    "arm {} has mean norm {} > 1 (set allow_unbounded_mean = true to accept)",
                    i + 1,
                    t.mu().norm()
                )));
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_text(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })?;
        if let TruthSource::File(p) = &cfg.truths {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.truths = TruthSource::File(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let loc = format!("line {}", lineno + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(&loc, format!("expected `key = value`, found `{line}`"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key.to_string()) {
                return Err(Error::parse(&loc, format!("duplicate key `{key}`")));
            }
            seen.push(key.to_string());
            cfg.set(key, value).map_err(|m| Error::parse(&loc, m))?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "arms" => self.arms = num(key, value)?,
            "dim" => self.dim = num(key, value)?,
            "horizon" => self.horizon = num(key, value)?,
            "rho" => self.rho = num(key, value)?,
            "replications" => self.replications = num(key, value)?,
            "policies" => {
                self.policies = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<PolicyTag>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "noise" => self.noise = value.parse::<NoiseKind>().map_err(|e| e.to_string())?,
            "truncation_bound" => self.truncation_bound = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "truths" => {
                self.truths = if value == "builtin" {
                    TruthSource::Builtin
                } else {
                    TruthSource::File(PathBuf::from(value))
                }
            }
            "allow_unbounded_mean" => self.allow_unbounded_mean = num(key, value)?,
            "sub_gaussian_r" => self.sub_gaussian_r = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "mvts_dn.u" => self.mvts_dn_u = opt_num(key, value)?,
            "mvts_dn.v" => self.mvts_dn_v = opt_num(key, value)?,
            "ts_a.v" => self.ts_a_v = opt_num(key, value)?,
            "debug_dump" => self.debug_dump = num(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Renders every key, in the documented order. `from_text` of the result
    /// reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), |v| v.to_string());
        let policies: Vec<&str> = self.policies.iter().map(|p| p.as_str()).collect();
        let truths = match &self.truths {
            TruthSource::Builtin => "builtin".to_string(),
            TruthSource::File(p) => p.display().to_string(),
        };
        let _ = writeln!(out, "arms = {}", self.arms);
        let _ = writeln!(out, "dim = {}", self.dim);
        let _ = writeln!(out, "horizon = {}", self.horizon);
        let _ = writeln!(out, "rho = {}", self.rho);
        let _ = writeln!(out, "replications = {}", self.replications);
        let _ = writeln!(out, "policies = {}", policies.join(", "));
        let _ = writeln!(out, "noise = {}", self.noise.tag());
        let _ = writeln!(out, "truncation_bound = {}", self.truncation_bound);
        let _ = writeln!(out, "master_seed = {}", self.master_seed);
        let _ = writeln!(out, "truths = {truths}");
        let _ = writeln!(out, "allow_unbounded_mean = {}", self.allow_unbounded_mean);
        let _ = writeln!(out, "sub_gaussian_r = {}", self.sub_gaussian_r);
        let _ = writeln!(out, "epsilon = {}", self.epsilon);
        let _ = writeln!(out, "delta = {}", self.delta);
        let _ = writeln!(out, "mvts_dn.u = {}", opt(self.mvts_dn_u));
        let _ = writeln!(out, "mvts_dn.v = {}", opt(self.mvts_dn_v));
        let _ = writeln!(out, "ts_a.v = {}", opt(self.ts_a_v));
        let _ = writeln!(out, "debug_dump = {}", self.debug_dump);
        out
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn opt_num(key: &str, value: &str) -> std::result::Result<Option<f64>, String> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}
