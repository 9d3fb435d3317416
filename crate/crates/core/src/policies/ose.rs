//! Optimistic scope exploration.

use super::table::ArmTable;
use super::{check_time, has_fresh_arm, Policy, PolicyError, Step};
use crate::rng::{unit_closed_open, Pcg64, Seed};
use crate::{Arm, BetaSchedule, Environment};

/// Scope size `clamp(floor(t^u), 1, t)` for a uniform draw `u`.
#[inline]
pub fn ose_scope(t: u64, u: f64) -> u64 {
    let t = t.max(1);
    ((t as f64).powf(u).floor() as u64).clamp(1, t)
}

/// At step `t`, draws `Z = floor(t^U)` and pulls the best UCB among arms
/// `1..=Z`, where any unpulled arm in range wins. Recommends the best LCB.
#[derive(Debug, Clone)]
pub struct Ose {
    table: ArmTable,
    rng: Pcg64,
    pulls: u64,
    last_scope: u64,
}

impl Ose {
    pub fn new(beta: BetaSchedule, zeta: f64, seed: Seed) -> Self {
        Ose { table: ArmTable::new(zeta, beta), rng: seed.rng(), pulls: 0, last_scope: 0 }
    }

    /// Scope size drawn at the latest step.
    pub fn last_scope(&self) -> u64 {
        self.last_scope
    }
}

impl Policy for Ose {
    fn step(&mut self, t: u64, env: &mut Environment) -> Result<Step, PolicyError> {
        check_time(self.pulls, t)?;
        let z = ose_scope(t, unit_closed_open(&mut self.rng));
        self.last_scope = z;
        let n = self.table.opened();
        let pulled = if z as usize > n && has_fresh_arm(env, n) {
            Arm::from_slot(n)
        } else {
            self.table.argmax_ucb(z as usize, t - 1).expect("scope holds a pulled arm")
        };
        let x = env.pull(pulled)?;
        self.table.record(pulled, x);
        self.pulls += 1;
        let recommended = self.table.argmax_lcb(t).expect("an arm was pulled");
        Ok(Step { pulled, recommended })
    }

    fn pulls(&self) -> u64 {
        self.pulls
    }

    fn opened(&self) -> usize {
        self.table.opened()
    }
}
