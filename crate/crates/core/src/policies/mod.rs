//! Decision policies behind a common step interface.
//!
//! At every time `t = 1, 2, ...` a policy pulls exactly one arm from the
//! [`Environment`] and names a recommended arm. Arms are opened in index order:
//! a policy only ever pulls arm `n + 1` as its first unseen arm.
//!
//! All argmax operations break ties the same way. Unpulled arms (infinite UCB)
//! come first, then the smaller index.

mod bsh;
mod max_tree;
mod ose;
mod prose;
mod table;
mod ucb;

use thiserror::Error;

use crate::reservoir::ReservoirError;
use crate::rng::{Seed, POLICY_TAG};
use crate::scope_index::IndexError;
use crate::{Arm, BetaSchedule, Environment, RankedIndex, ReferenceIndex};

pub use crate::scope_index::ScopeQuantile;
pub use bsh::{sequential_halving, Bsh, HalvingRun};
pub use ose::{ose_scope, Ose};
pub use prose::Prose;
pub use ucb::Ucb;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget {budget} is smaller than the number of arms {arms}")]
    Budget { budget: u64, arms: usize },
    #[error("time steps must be consecutive starting at 1: expected {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error(transparent)]
    Reservoir(#[from] ReservoirError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Outcome of one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub pulled: Arm,
    pub recommended: Arm,
}

pub trait Policy {
    /// Plays time step `t`, which must follow the previous call.
    fn step(&mut self, t: u64, env: &mut Environment) -> Result<Step, PolicyError>;
    /// Number of pulls made so far.
    fn pulls(&self) -> u64;
    /// Number of distinct arms pulled so far.
    fn opened(&self) -> usize;
}

pub(crate) fn check_time(pulls: u64, t: u64) -> Result<(), PolicyError> {
    if t == pulls + 1 {
        Ok(())
    } else {
        Err(PolicyError::OutOfOrder { expected: pulls + 1, got: t })
    }
}

/// True when arm `n + 1` exists.
pub(crate) fn has_fresh_arm(env: &Environment, opened: usize) -> bool {
    env.arm_limit().is_none_or(|k| (opened as u64) < u64::from(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Ose,
    Prose,
    Ucb,
    Bsh,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ose => "ose",
            PolicyKind::Prose => "prose",
            PolicyKind::Ucb => "ucb",
            PolicyKind::Bsh => "bsh",
        }
    }

    pub fn parse(s: &str) -> Result<Self, PolicyError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ose" => Ok(PolicyKind::Ose),
            "prose" => Ok(PolicyKind::Prose),
            "ucb" => Ok(PolicyKind::Ucb),
            "bsh" => Ok(PolicyKind::Bsh),
            other => Err(PolicyError::Config(format!("unknown policy {other:?}"))),
        }
    }
}

/// Which scope index backs PROSE.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IndexEngine {
    #[default]
    Ranked,
    Reference,
}

/// Everything needed to build a policy for one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub beta: BetaSchedule,
    pub gamma_scope: f64,
    pub engine: IndexEngine,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, beta: BetaSchedule) -> Self {
        PolicyConfig { kind, beta, gamma_scope: 1.0, engine: IndexEngine::Ranked }
    }

    /// Checks the parameters, independent of the environment.
    pub fn validate(&self) -> Result<(), PolicyError> {
        self.beta.validate().map_err(PolicyError::Config)?;
        ScopeQuantile::new(self.gamma_scope).map_err(PolicyError::Config)?;
        if self.kind == PolicyKind::Prose && !self.beta.is_constant() {
            return Err(PolicyError::Config("prose requires a constant beta".into()));
        }
        Ok(())
    }

    /// Builds the policy for an environment with the given arm limit.
    pub fn build(&self, arm_limit: Option<u32>, zeta: f64, seed: Seed) -> Result<PolicyState, PolicyError> {
        self.validate()?;
        let rng_seed = seed.derive(POLICY_TAG);
        let q = ScopeQuantile::new(self.gamma_scope).map_err(PolicyError::Config)?;
        Ok(match self.kind {
            PolicyKind::Ose => PolicyState::Ose(Ose::new(self.beta, zeta, rng_seed)),
            PolicyKind::Prose => {
                let BetaSchedule::Constant { beta } = self.beta else { unreachable!("validated") };
                match self.engine {
                    IndexEngine::Ranked => PolicyState::Prose(Prose::new(RankedIndex::new(), beta, q, zeta)?),
                    IndexEngine::Reference => {
                        PolicyState::ProseReference(Prose::new(ReferenceIndex::new(), beta, q, zeta)?)
                    }
                }
            }
            PolicyKind::Ucb => PolicyState::Ucb(Ucb::new(self.beta, zeta, arm_limit)?),
            PolicyKind::Bsh => PolicyState::Bsh(Bsh::new()),
        })
    }
}

/// A policy of any kind.
#[derive(Debug)]
pub enum PolicyState {
    Ose(Ose),
    Prose(Prose<RankedIndex>),
    ProseReference(Prose<ReferenceIndex>),
    Ucb(Ucb),
    Bsh(Bsh),
}

impl PolicyState {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicyState::Ose(_) => PolicyKind::Ose,
            PolicyState::Prose(_) | PolicyState::ProseReference(_) => PolicyKind::Prose,
            PolicyState::Ucb(_) => PolicyKind::Ucb,
            PolicyState::Bsh(_) => PolicyKind::Bsh,
        }
    }

    fn inner(&mut self) -> &mut dyn Policy {
        match self {
            PolicyState::Ose(p) => p,
            PolicyState::Prose(p) => p,
            PolicyState::ProseReference(p) => p,
            PolicyState::Ucb(p) => p,
            PolicyState::Bsh(p) => p,
        }
    }

    fn inner_ref(&self) -> &dyn Policy {
        match self {
            PolicyState::Ose(p) => p,
            PolicyState::Prose(p) => p,
            PolicyState::ProseReference(p) => p,
            PolicyState::Ucb(p) => p,
            PolicyState::Bsh(p) => p,
        }
    }
}

impl Policy for PolicyState {
    fn step(&mut self, t: u64, env: &mut Environment) -> Result<Step, PolicyError> {
        self.inner().step(t, env)
    }

    fn pulls(&self) -> u64 {
        self.inner_ref().pulls()
    }

    fn opened(&self) -> usize {
        self.inner_ref().opened()
    }
}
