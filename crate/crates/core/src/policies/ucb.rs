//! Upper confidence bound over a finite arm set.

use super::table::ArmTable;
use super::{check_time, Policy, PolicyError, Step};
use crate::{Arm, BetaSchedule, Environment};

/// Pulls the best UCB over all `K` arms, so the first `K` steps sweep the
/// arms in index order. Recommends the best LCB.
#[derive(Debug, Clone)]
pub struct Ucb {
    table: ArmTable,
    k: usize,
    pulls: u64,
}

impl Ucb {
    /// Fails on an infinite arm supply.
    pub fn new(beta: BetaSchedule, zeta: f64, arm_limit: Option<u32>) -> Result<Self, PolicyError> {
        let k = arm_limit.ok_or_else(|| PolicyError::Config("ucb needs a finite number of arms".into()))?;
        beta.validate().map_err(PolicyError::Config)?;
        Ok(Ucb { table: ArmTable::new(zeta, beta), k: k as usize, pulls: 0 })
    }
}

impl Policy for Ucb {
    fn step(&mut self, t: u64, env: &mut Environment) -> Result<Step, PolicyError> {
        check_time(self.pulls, t)?;
        if env.arm_limit().map(|l| l as usize) != Some(self.k) {
            return Err(PolicyError::Config("environment arm count differs from the policy's".into()));
        }
        let n = self.table.opened();
        let pulled = if n < self.k {
            Arm::from_slot(n)
        } else {
            self.table.argmax_ucb(n, t - 1).expect("arms are open")
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
