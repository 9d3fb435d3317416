//! Progressive ranking for optimistic scope exploration.

use super::{check_time, has_fresh_arm, Policy, PolicyError, Step};
use crate::scope_index::{ScopeIndex, ScopeQuantile};
use crate::{Arm, ArmStats, Environment};

/// Cycles a level `j = 1..=J` through the scopes of an LCB-ranked index and
/// pulls the best UCB among the top-`Z_j` arms. Unpulled arms rank after every
/// pulled one, so a scope wider than the number of pulled arms opens a new
/// arm. Recommends the best LCB.
#[derive(Debug, Clone)]
pub struct Prose<I: ScopeIndex> {
    index: I,
    stats: Vec<ArmStats>,
    beta: f64,
    zeta: f64,
    q: ScopeQuantile,
    level: usize,
    pulls: u64,
    last_scope: u64,
}

impl<I: ScopeIndex> Prose<I> {
    /// `index` must be empty.
    pub fn new(index: I, beta: f64, q: ScopeQuantile, zeta: f64) -> Result<Self, PolicyError> {
        if !index.is_empty() {
            return Err(PolicyError::Config("prose needs an empty index".into()));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(PolicyError::Config(format!("beta must be positive, got {beta}")));
        }
        Ok(Prose { index, stats: Vec::new(), beta, zeta, q, level: 1, pulls: 0, last_scope: 0 })
    }

    pub fn index(&self) -> &I {
        &self.index
    }

    /// Level used at the latest step.
    pub fn last_level(&self) -> usize {
        if self.level == 1 {
            self.index.levels()
        } else {
            self.level - 1
        }
    }

    /// Scope size `Z_j` used at the latest step.
    pub fn last_scope(&self) -> u64 {
        self.last_scope
    }
}

impl<I: ScopeIndex> Policy for Prose<I> {
    fn step(&mut self, t: u64, env: &mut Environment) -> Result<Step, PolicyError> {
        check_time(self.pulls, t)?;
        self.index.set_boundaries(t, self.q);
        let levels = self.index.levels();
        if self.level > levels {
            self.level = 1;
        }
        let z = self.index.boundaries()[self.level - 1];
        self.last_scope = z;
        let n = self.stats.len();
        let pulled = if z as usize > n && has_fresh_arm(env, n) {
            let a = Arm::from_slot(n);
            self.index.insert_arm(a)?;
            self.stats.push(ArmStats::default());
            a
        } else {
            self.index.max_ucb_in_scope(self.level)?
        };
        let x = env.pull(pulled)?;
        let s = &mut self.stats[pulled.slot()];
        s.update(x);
        let (l, u) = (s.lcb(self.zeta, self.beta), s.ucb(self.zeta, self.beta));
        self.index.record_pull(pulled, l, u)?;
        self.pulls += 1;
        let recommended = self.index.best_lcb()?;
        self.level = if self.level >= levels { 1 } else { self.level + 1 };
        Ok(Step { pulled, recommended })
    }

    fn pulls(&self) -> u64 {
        self.pulls
    }

    fn opened(&self) -> usize {
        self.stats.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{PolicyConfig, PolicyKind, Ucb};
    use crate::rng::Seed;
    use crate::scope_index::scope_levels;
    use crate::{ArmSupply, BetaSchedule, QuantileSpec, RankedIndex, ReferenceIndex};

    fn env(k: u32, seed: u64) -> Environment {
        Environment::build(QuantileSpec::Beta { alpha: 1.0 }, ArmSupply::Finite(k), 1.0, Seed(seed)).unwrap()
    }

    #[test]
    fn first_step_pulls_arm_one() {
        let mut e = env(10, 0);
        let mut p = Prose::new(RankedIndex::new(), 10.0, ScopeQuantile::identity(), 1.0).unwrap();
        let s = p.step(1, &mut e).unwrap();
        assert_eq!(s, Step { pulled: Arm::new(1), recommended: Arm::new(1) });
        assert_eq!(p.last_scope(), 1);
    }

    #[test]
    fn level_sweeps_follow_exponential_scopes() {
        let mut e = Environment::build(QuantileSpec::Beta { alpha: 1.0 }, ArmSupply::Infinite, 1.0, Seed(5)).unwrap();
        let mut p = Prose::new(RankedIndex::new(), 10.0, ScopeQuantile::identity(), 1.0).unwrap();
        let t0 = 60_000u64;
        let mut scopes = Vec::new();
        for t in 1..t0 + 40 {
            p.step(t, &mut e).unwrap();
            if t >= t0 {
                scopes.push((p.last_level(), p.last_scope()));
            }
        }
        let levels = scope_levels(t0);
        // one full sweep in order
        let start = scopes.iter().position(|&(j, _)| j == 1).unwrap();
        for (j, &(lvl, z)) in scopes[start..start + levels].iter().enumerate() {
            assert_eq!(lvl, j + 1);
            if j + 1 < levels {
                assert_eq!(z, ((j + 1) as f64).exp().floor() as u64);
            } else {
                assert!(z >= t0);
            }
        }
    }

    #[test]
    fn ranked_and_reference_engines_agree() {
        for seed in 0..3 {
            let mut ea = env(400, seed);
            let mut eb = env(400, seed);
            let mut a = Prose::new(RankedIndex::new(), 1.0, ScopeQuantile::identity(), 1.0).unwrap();
            let mut b = Prose::new(ReferenceIndex::new(), 1.0, ScopeQuantile::identity(), 1.0).unwrap();
            for t in 1..=3000 {
                assert_eq!(a.step(t, &mut ea).unwrap(), b.step(t, &mut eb).unwrap(), "t={t}");
            }
        }
    }

    #[test]
    fn full_scope_reproduces_ucb() {
        let k = 200;
        for seed in 0..4 {
            let mut ea = env(k, seed);
            let mut eb = env(k, seed);
            let mut prose = Prose::new(RankedIndex::new(), 4.0, ScopeQuantile::new(f64::INFINITY).unwrap(), 1.0).unwrap();
            let mut ucb = Ucb::new(BetaSchedule::Constant { beta: 4.0 }, 1.0, Some(k)).unwrap();
            for t in 1..=5000 {
                assert_eq!(prose.step(t, &mut ea).unwrap(), ucb.step(t, &mut eb).unwrap(), "t={t}");
            }
        }
    }

    #[test]
    fn built_through_config() {
        let cfg = PolicyConfig::new(PolicyKind::Prose, BetaSchedule::Constant { beta: 10.0 });
        let mut p = cfg.build(Some(10), 1.0, Seed(1)).unwrap();
        let mut e = env(10, 1);
        for t in 1..=100 {
            p.step(t, &mut e).unwrap();
        }
        assert_eq!(p.opened(), 10);
    }
}
