//! Flat per-arm statistics table shared by OSE and UCB.

use super::max_tree::MaxTree;
use crate::{Arm, ArmStats, BetaSchedule};

/// Stats of the opened arms `1..=n`, with argmax queries over UCB and LCB.
///
/// With a constant schedule the bounds of an arm change only when it is
/// pulled, so they are kept in segment trees. Otherwise every query scans.
#[derive(Debug, Clone)]
pub(crate) struct ArmTable {
    stats: Vec<ArmStats>,
    zeta: f64,
    beta: BetaSchedule,
    ucb: MaxTree,
    lcb: MaxTree,
}

impl ArmTable {
    pub(crate) fn new(zeta: f64, beta: BetaSchedule) -> Self {
        ArmTable { stats: Vec::new(), zeta, beta, ucb: MaxTree::new(), lcb: MaxTree::new() }
    }

    pub(crate) fn opened(&self) -> usize {
        self.stats.len()
    }

    /// Adds reward `x` to `arm`, opening it if it is arm `n + 1`.
    pub(crate) fn record(&mut self, arm: Arm, x: f64) {
        let slot = arm.slot();
        debug_assert!(slot <= self.stats.len(), "arms are opened in index order");
        if slot == self.stats.len() {
            self.stats.push(ArmStats::default());
        }
        self.stats[slot].update(x);
        if let BetaSchedule::Constant { beta } = self.beta {
            let s = self.stats[slot];
            let (u, l) = (s.ucb(self.zeta, beta), s.lcb(self.zeta, beta));
            if slot == self.ucb.len() {
                self.ucb.push(u);
                self.lcb.push(l);
            } else {
                self.ucb.set(slot, u);
                self.lcb.set(slot, l);
            }
        }
    }

    /// Largest UCB at time `t` among arms `1..=z`, ties to the smaller index.
    pub(crate) fn argmax_ucb(&self, z: usize, t: u64) -> Option<Arm> {
        let z = z.min(self.stats.len());
        if self.beta.is_constant() {
            return self.ucb.argmax_prefix(z).map(Arm::from_slot);
        }
        let beta = self.beta.value(t);
        scan_max(self.stats[..z].iter().map(|s| s.ucb(self.zeta, beta)))
    }

    /// Largest LCB at time `t` among all opened arms.
    pub(crate) fn argmax_lcb(&self, t: u64) -> Option<Arm> {
        if self.beta.is_constant() {
            return self.lcb.argmax().map(Arm::from_slot);
        }
        let beta = self.beta.value(t);
        scan_max(self.stats.iter().map(|s| s.lcb(self.zeta, beta)))
    }
}

fn scan_max(values: impl Iterator<Item = f64>) -> Option<Arm> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| Arm::from_slot(i))
}
