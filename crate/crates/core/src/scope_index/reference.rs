//! Scan-based scope index.

use std::cmp::Ordering;

use super::{fill_boundaries, lcb_order, ucb_order, IndexError, ScopeIndex, ScopeQuantile};
use crate::Arm;

/// Flat [`ScopeIndex`]: updates are `O(1)`, queries scan every arm.
#[derive(Debug, Clone)]
pub struct ReferenceIndex {
    arms: Vec<Arm>,
    lcb: Vec<f64>,
    ucb: Vec<f64>,
    pos: Vec<u32>,
    boundaries: Vec<u64>,
}

const ABSENT: u32 = u32::MAX;

impl Default for ReferenceIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl ReferenceIndex {
    pub fn new() -> Self {
        ReferenceIndex { arms: Vec::new(), lcb: Vec::new(), ucb: Vec::new(), pos: Vec::new(), boundaries: vec![1] }
    }

    fn position(&self, arm: Arm) -> Option<usize> {
        let p = *self.pos.get(arm.slot())?;
        (p != ABSENT).then_some(p as usize)
    }

    fn cmp_lcb(&self, a: usize, b: usize) -> Ordering {
        lcb_order(self.lcb[a], self.arms[a], self.lcb[b], self.arms[b])
    }

    fn cmp_ucb(&self, a: usize, b: usize) -> Ordering {
        ucb_order(self.ucb[a], self.arms[a], self.ucb[b], self.arms[b])
    }

    fn sorted_positions(&self) -> Vec<usize> {
        let mut p: Vec<usize> = (0..self.arms.len()).collect();
        p.sort_unstable_by(|&a, &b| self.cmp_lcb(a, b));
        p
    }
}

impl ScopeIndex for ReferenceIndex {
    fn set_boundaries(&mut self, t: u64, q: ScopeQuantile) {
        fill_boundaries(t, q, &mut self.boundaries);
    }

    fn insert_arm(&mut self, arm: Arm) -> Result<(), IndexError> {
        if self.position(arm).is_some() {
            return Err(IndexError::Duplicate(arm));
        }
        if arm.slot() >= self.pos.len() {
            self.pos.resize(arm.slot() + 1, ABSENT);
        }
        self.pos[arm.slot()] = self.arms.len() as u32;
        self.arms.push(arm);
        self.lcb.push(f64::NEG_INFINITY);
        self.ucb.push(f64::INFINITY);
        Ok(())
    }

    fn record_pull(&mut self, arm: Arm, lcb: f64, ucb: f64) -> Result<(), IndexError> {
        if lcb.is_nan() || ucb.is_nan() {
            return Err(IndexError::NanBound);
        }
        let p = self.position(arm).ok_or(IndexError::Missing(arm))?;
        self.lcb[p] = lcb;
        self.ucb[p] = ucb;
        Ok(())
    }

    fn max_ucb_in_scope(&self, level: usize) -> Result<Arm, IndexError> {
        let n = self.arms.len();
        if n == 0 {
            return Err(IndexError::EmptyScope);
        }
        let levels = self.boundaries.len();
        if level == 0 || level > levels {
            return Err(IndexError::LevelOutOfRange { level, levels });
        }
        let z = if level == levels { n } else { (self.boundaries[level - 1] as usize).min(n) };
        let mut p: Vec<usize> = (0..n).collect();
        if z < n {
            p.select_nth_unstable_by(z, |&a, &b| self.cmp_lcb(a, b));
        }
        let best = p[..z]
            .iter()
            .copied()
            .min_by(|&a, &b| self.cmp_ucb(a, b))
            .ok_or(IndexError::EmptyScope)?;
        Ok(self.arms[best])
    }

    fn best_lcb(&self) -> Result<Arm, IndexError> {
        (0..self.arms.len())
            .min_by(|&a, &b| self.cmp_lcb(a, b))
            .map(|p| self.arms[p])
            .ok_or(IndexError::EmptyScope)
    }

    fn len(&self) -> usize {
        self.arms.len()
    }

    fn contains(&self, arm: Arm) -> bool {
        self.position(arm).is_some()
    }

    fn bounds(&self, arm: Arm) -> Option<(f64, f64)> {
        self.position(arm).map(|p| (self.lcb[p], self.ucb[p]))
    }

    fn boundaries(&self) -> &[u64] {
        &self.boundaries
    }

    fn lcb_ranking(&self) -> Vec<Arm> {
        self.sorted_positions().into_iter().map(|p| self.arms[p]).collect()
    }

    fn differential_sets(&self) -> Vec<Vec<Arm>> {
        let order = self.sorted_positions();
        let levels = self.boundaries.len();
        let mut sets = vec![Vec::new(); levels];
        for (i, &p) in order.iter().enumerate() {
            let r = (i + 1) as u64;
            let s = self.boundaries.partition_point(|&z| z < r).min(levels - 1);
            sets[s].push(p);
        }
        sets.into_iter()
            .map(|mut s| {
                s.sort_unstable_by(|&a, &b| self.cmp_ucb(a, b));
                s.into_iter().map(|p| self.arms[p]).collect()
            })
            .collect()
    }
}
