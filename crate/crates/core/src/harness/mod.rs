//! Seeded Monte-Carlo experiment runner.
//!
//! An experiment runs `N` trials of every configured policy on fresh
//! reservoirs and records metrics at a geometric grid of checkpoints. All
//! metrics are pseudo-metrics computed from the true arm means, never from the
//! noisy rewards.
//!
//! Seeding: trial `i` of every policy sees the same reservoir and the same
//! reward noise, derived from `mix(master_seed, i)`. Policy-internal
//! randomness comes from `mix(master_seed, mix(label_id(label), i))`, where
//! `label_id` is the FNV-1a hash of the policy label. Adding or renaming a
//! policy therefore leaves every other stream untouched.

mod aggregate;
mod export;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policies::{Policy, PolicyConfig, PolicyError, PolicyKind};
use crate::rng::{label_id, mix, Seed};
use crate::{ArmSupply, BetaSchedule, Environment, QuantileSpec};

pub use aggregate::{aggregate, nearest_rank, AggregateRow, AggregateStats};
pub use export::{export, import_aggregate, AGG_HEADER};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("policy {policy:?}, trial {trial}: {source}")]
    Trial {
        policy: String,
        trial: u32,
        #[source]
        source: PolicyError,
    },
    #[error("policy {policy:?}, trial {trial} panicked: {message}")]
    Panic { policy: String, trial: u32, message: String },
    #[error("traces do not share a checkpoint grid: {0}")]
    GridMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

/// A recorded quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Rank `gamma` of the recommended arm.
    RecRank,
    /// True mean of the recommended arm.
    RecMean,
    /// `lambda_0` minus the true mean of the recommended arm.
    SimpleRegret,
    /// Sum over pulls of `lambda_0` minus the pulled arm's true mean.
    CumRegret,
    /// Sum over pulls of the pulled arm's true mean.
    CumReward,
}

impl Metric {
    pub const ALL: [Metric; 5] =
        [Metric::RecRank, Metric::RecMean, Metric::SimpleRegret, Metric::CumRegret, Metric::CumReward];

    pub fn name(self) -> &'static str {
        match self {
            Metric::RecRank => "rec_rank",
            Metric::RecMean => "rec_mean",
            Metric::SimpleRegret => "simple_regret",
            Metric::CumRegret => "cum_regret",
            Metric::CumReward => "cum_reward",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == s.trim())
    }

    /// Whether the metric is defined for a reservoir.
    pub fn needs_bounded(self) -> bool {
        matches!(self, Metric::SimpleRegret | Metric::CumRegret)
    }

    /// Default metric set for a reservoir.
    pub fn defaults(spec: &QuantileSpec) -> Vec<Metric> {
        Metric::ALL.into_iter().filter(|m| spec.is_bounded() || !m.needs_bounded()).collect()
    }
}

/// A labelled policy configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyEntry {
    pub label: String,
    pub config: PolicyConfig,
}

impl PolicyEntry {
    pub fn new(label: impl Into<String>, config: PolicyConfig) -> Self {
        PolicyEntry { label: label.into(), config }
    }

    /// The value written to the `beta` column.
    pub fn beta_label(&self) -> String {
        if self.config.kind == PolicyKind::Bsh {
            return "na".into();
        }
        match self.config.beta {
            BetaSchedule::Constant { beta } => format!("{beta}"),
            BetaSchedule::Theoretical { delta } => format!("theoretical:{delta}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub spec: QuantileSpec,
    pub supply: ArmSupply,
    pub t_max: u64,
    pub trials: u32,
    pub policies: Vec<PolicyEntry>,
    pub zeta: f64,
    pub master_seed: u64,
    pub checkpoint_ratio: f64,
    /// Times recorded in addition to the geometric grid.
    pub extra_checkpoints: Vec<u64>,
    pub metrics: Vec<Metric>,
    /// Worker pool width; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Report progress on standard error.
    pub progress: bool,
}

impl ExperimentConfig {
    pub fn new(spec: QuantileSpec, supply: ArmSupply, t_max: u64, trials: u32, policies: Vec<PolicyEntry>) -> Self {
        ExperimentConfig {
            spec,
            supply,
            t_max,
            trials,
            policies,
            zeta: 1.0,
            master_seed: 0,
            checkpoint_ratio: 1.05,
            extra_checkpoints: Vec::new(),
            metrics: Metric::defaults(&spec),
            threads: None,
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: String| Err(HarnessError::Config(m));
        self.spec.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.t_max == 0 {
            return err("T_max must be at least 1".into());
        }
        if self.trials == 0 {
            return err("N must be at least 1".into());
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return err(format!("zeta must be finite and >= 0, got {}", self.zeta));
        }
        if !(self.checkpoint_ratio > 1.0 && self.checkpoint_ratio.is_finite()) {
            return err(format!("checkpoint_ratio must exceed 1, got {}", self.checkpoint_ratio));
        }
        if let Some(&c) = self.extra_checkpoints.iter().find(|&&c| c == 0 || c > self.t_max) {
            return err(format!("checkpoint {c} is outside 1..={}", self.t_max));
        }
        if self.supply == ArmSupply::Finite(0) {
            return err("K must be positive".into());
        }
        if self.threads == Some(0) {
            return err("threads must be positive".into());
        }
        if self.policies.is_empty() {
            return err("no policies configured".into());
        }
        if self.metrics.is_empty() {
            return err("no metrics selected".into());
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if self.metrics[..i].contains(m) {
                return err(format!("metric {} listed twice", m.name()));
            }
            if m.needs_bounded() && !self.spec.is_bounded() {
                return err(format!("metric {} needs a bounded reservoir, {} is unbounded", m.name(), self.spec.family()));
            }
        }
        for (i, p) in self.policies.iter().enumerate() {
            if p.label.is_empty() || p.label.contains([',', '"', '\n']) {
                return err(format!("invalid policy label {:?}", p.label));
            }
            if self.policies[..i].iter().any(|q| q.label == p.label) {
                return err(format!("policy label {:?} used twice", p.label));
            }
            p.config.validate().map_err(|e| HarnessError::Config(format!("[{}] {e}", p.label)))?;
            if p.config.kind == PolicyKind::Ucb && self.supply == ArmSupply::Infinite {
                return err(format!("[{}] ucb needs a finite K", p.label));
            }
        }
        Ok(())
    }

    pub fn checkpoints(&self) -> Vec<u64> {
        let mut grid = checkpoints(self.t_max, self.checkpoint_ratio);
        grid.extend(self.extra_checkpoints.iter().filter(|&&c| c >= 1 && c <= self.t_max));
        grid.sort_unstable();
        grid.dedup();
        grid
    }

    fn reservoir_seed(&self, trial: u32) -> Seed {
        Seed(mix(self.master_seed, u64::from(trial)))
    }

    fn policy_seed(&self, label: &str, trial: u32) -> Seed {
        Seed(mix(self.master_seed, mix(label_id(label), u64::from(trial))))
    }
}

/// Distinct values of `floor(ratio^k)` up to `t_max`, plus 1 and `t_max`.
pub fn checkpoints(t_max: u64, ratio: f64) -> Vec<u64> {
    let mut out = vec![1u64];
    let mut x = 1.0f64;
    loop {
        x *= ratio;
        let c = x.floor() as u64;
        if c >= t_max {
            break;
        }
        if c > *out.last().expect("nonempty") {
            out.push(c);
        }
    }
    if t_max > 1 {
        out.push(t_max);
    }
    out
}

/// Metrics of one trial at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: u64,
    pub rec_rank: f64,
    pub rec_mean: f64,
    pub simple_regret: Option<f64>,
    pub cum_regret: Option<f64>,
    pub cum_reward: f64,
    /// Wall time spent in policy steps (including reward draws) up to `t`.
    pub elapsed_ns: u64,
}

impl TracePoint {
    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::RecRank => Some(self.rec_rank),
            Metric::RecMean => Some(self.rec_mean),
            Metric::SimpleRegret => self.simple_regret,
            Metric::CumRegret => self.cum_regret,
            Metric::CumReward => Some(self.cum_reward),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialTrace {
    pub policy: String,
    pub beta: String,
    pub trial: u32,
    pub points: Vec<TracePoint>,
}

impl TrialTrace {
    pub fn elapsed_ns(&self) -> u64 {
        self.points.last().map_or(0, |p| p.elapsed_ns)
    }
}

/// Runs trial `trial` of policy number `policy` in `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, policy: usize, trial: u32) -> Result<TrialTrace, HarnessError> {
    let entry = cfg
        .policies
        .get(policy)
        .ok_or_else(|| HarnessError::Config(format!("no policy number {policy}")))?;
    let wrap = |source: PolicyError| HarnessError::Trial { policy: entry.label.clone(), trial, source };
    let mut env = Environment::build(cfg.spec, cfg.supply, cfg.zeta, cfg.reservoir_seed(trial))
        .map_err(|e| wrap(e.into()))?;
    let mut pol = entry
        .config
        .build(cfg.supply.limit(), cfg.zeta, cfg.policy_seed(&entry.label, trial))
        .map_err(wrap)?;
    let bounded = cfg.spec.is_bounded();
    let top = cfg.spec.top_mean();
    let grid = cfg.checkpoints();
    let mut points = Vec::with_capacity(grid.len());
    let (mut cum_regret, mut cum_reward) = (0.0f64, 0.0f64);
    let mut elapsed = 0u64;
    let mut t = 0u64;
    for &c in &grid {
        let mut rec = None;
        while t < c {
            t += 1;
            let start = Instant::now();
            let step = pol.step(t, &mut env).map_err(wrap)?;
            elapsed += start.elapsed().as_nanos() as u64;
            let m = env.reservoir_mut().mean(step.pulled).map_err(|e| wrap(e.into()))?;
            cum_reward += m;
            cum_regret += top - m;
            rec = Some(step.recommended);
        }
        let rec = rec.expect("checkpoints strictly increase");
        let r = env.reservoir_mut();
        let rank = r.sample_rank(rec).map_err(|e| wrap(e.into()))?;
        let mean = r.mean(rec).map_err(|e| wrap(e.into()))?;
        points.push(TracePoint {
            t: c,
            rec_rank: rank,
            rec_mean: mean,
            simple_regret: bounded.then_some(top - mean),
            cum_regret: bounded.then_some(cum_regret),
            cum_reward,
            elapsed_ns: elapsed,
        });
    }
    Ok(TrialTrace { policy: entry.label.clone(), beta: entry.beta_label(), trial, points })
}

/// All traces, in policy-major order, and their aggregate.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub traces: Vec<TrialTrace>,
    pub aggregate: AggregateStats,
}

/// Runs every trial of every policy on a worker pool and aggregates them.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let tasks: Vec<(usize, u32)> =
        (0..cfg.policies.len()).flat_map(|p| (0..cfg.trials).map(move |i| (p, i))).collect();
    let done = AtomicUsize::new(0);
    let total = tasks.len();
    let run = |&(p, i): &(usize, u32)| {
        let out = catch_unwind(AssertUnwindSafe(|| run_trial(cfg, p, i))).unwrap_or_else(|payload| {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            Err(HarnessError::Panic { policy: cfg.policies[p].label.clone(), trial: i, message })
        });
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if cfg.progress && (n == total || n % (total / 20).max(1) == 0) {
            eprintln!("[{n}/{total}] trials done");
        }
        out
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let traces: Vec<TrialTrace> = pool.install(|| tasks.par_iter().map(run).collect::<Result<_, _>>())?;
    let aggregate = aggregate(&traces, &cfg.metrics)?;
    Ok(ExperimentResult { traces, aggregate })
}
