//! Sequential halving and its bracketed, doubling anytime version.

use super::{check_time, has_fresh_arm, Policy, PolicyError, Step};
use crate::{Arm, ArmStats, Environment};

/// A resumable sequential-halving run over a fixed arm set and budget.
///
/// Runs `R = ceil(log2 |arms|)` rounds (at least one). In each round every
/// survivor is pulled `max(1, floor(B / (|S| R)))` times in cyclic passes,
/// then the better half by empirical mean survives, ties to the smaller index.
#[derive(Debug, Clone)]
pub struct HalvingRun {
    survivors: Vec<(Arm, ArmStats)>,
    budget: u64,
    rounds: u32,
    round: u32,
    quota: u64,
    pos: usize,
    pass: u64,
    pulls: u64,
    winner: Option<Arm>,
}

impl HalvingRun {
    pub fn new(arms: &[Arm], budget: u64) -> Result<Self, PolicyError> {
        if arms.is_empty() || budget < arms.len() as u64 {
            return Err(PolicyError::Budget { budget, arms: arms.len() });
        }
        let rounds = (arms.len() as u64).next_power_of_two().trailing_zeros().max(1);
        let mut run = HalvingRun {
            survivors: arms.iter().map(|&a| (a, ArmStats::default())).collect(),
            budget,
            rounds,
            round: 0,
            quota: 0,
            pos: 0,
            pass: 0,
            pulls: 0,
            winner: None,
        };
        run.quota = run.round_quota();
        Ok(run)
    }

    fn round_quota(&self) -> u64 {
        (self.budget / (self.survivors.len() as u64 * u64::from(self.rounds))).max(1)
    }

    /// The arm to pull next; `None` once the run is complete.
    pub fn next_arm(&self) -> Option<Arm> {
        if self.winner.is_some() {
            None
        } else {
            Some(self.survivors[self.pos].0)
        }
    }

    /// Records the reward of the arm returned by [`next_arm`](Self::next_arm).
    /// Returns the winner when this pull completes the run.
    pub fn record(&mut self, x: f64) -> Option<Arm> {
        assert!(self.winner.is_none(), "run already complete");
        self.survivors[self.pos].1.update(x);
        self.pulls += 1;
        self.pos += 1;
        if self.pos < self.survivors.len() {
            return None;
        }
        self.pos = 0;
        self.pass += 1;
        if self.pass < self.quota {
            return None;
        }
        self.pass = 0;
        self.round += 1;
        self.survivors
            .sort_by(|(a, sa), (b, sb)| sb.mean.total_cmp(&sa.mean).then(a.cmp(b)));
        let keep = self.survivors.len().div_ceil(2);
        self.survivors.truncate(keep);
        if self.round >= self.rounds || self.survivors.len() == 1 {
            self.winner = Some(self.survivors[0].0);
            return self.winner;
        }
        // cycle in index order within a round
        self.survivors.sort_by_key(|&(a, _)| a);
        self.quota = self.round_quota();
        None
    }

    pub fn winner(&self) -> Option<Arm> {
        self.winner
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn survivors(&self) -> impl Iterator<Item = Arm> + '_ {
        self.survivors.iter().map(|&(a, _)| a)
    }
}

/// Runs sequential halving to completion and returns the last survivor and the
/// number of pulls spent. A single arm is returned without pulling it.
pub fn sequential_halving<F>(arms: &[Arm], budget: u64, mut reward: F) -> Result<(Arm, u64), PolicyError>
where
    F: FnMut(Arm) -> Result<f64, PolicyError>,
{
    let mut run = HalvingRun::new(arms, budget)?;
    if arms.len() == 1 {
        return Ok((arms[0], 0));
    }
    while let Some(a) = run.next_arm() {
        let x = reward(a)?;
        if let Some(w) = run.record(x) {
            return Ok((w, run.pulls()));
        }
    }
    unreachable!("a run always ends with a winner")
}

#[derive(Debug, Clone)]
struct Bracket {
    arms: Vec<Arm>,
    doubling: u32,
    run: HalvingRun,
    /// Latest winner and its overall empirical mean when it won.
    winner: Option<(Arm, f64)>,
}

/// Bracketing sequential halving with doubling budgets.
///
/// Bracket `m` opens at step `4^m` with `2^(m+1)` fresh arms (fewer if the
/// supply runs out). Each bracket repeats sequential halving on its arms
/// with budgets `|arms| 2^i`, `i = 0, 1, ...`. Open brackets take steps in
/// turn. The recommendation is the latest winner with the best overall mean,
/// frozen when it won; before any run completes it is the best overall mean.
#[derive(Debug, Clone, Default)]
pub struct Bsh {
    brackets: Vec<Bracket>,
    global: Vec<ArmStats>,
    cursor: usize,
    pulls: u64,
    supply_exhausted: bool,
}

impl Bsh {
    pub fn new() -> Self {
        Bsh::default()
    }

    pub fn brackets(&self) -> usize {
        self.brackets.len()
    }

    /// Number of completed halving runs over all brackets.
    pub fn completed_runs(&self) -> u64 {
        self.brackets.iter().map(|b| u64::from(b.doubling)).sum()
    }

    fn open_due(&mut self, t: u64, env: &Environment) -> Result<(), PolicyError> {
        while !self.supply_exhausted {
            let m = self.brackets.len() as u32;
            let opens_at = 4u64.checked_pow(m).unwrap_or(u64::MAX);
            if t < opens_at {
                break;
            }
            let n = self.global.len();
            if !has_fresh_arm(env, n) {
                self.supply_exhausted = true;
                break;
            }
            let mut size = 2u64.checked_pow(m + 1).unwrap_or(u64::MAX);
            if let Some(k) = env.arm_limit() {
                size = size.min(u64::from(k) - n as u64);
            }
            let arms: Vec<Arm> = (n..n + size as usize).map(Arm::from_slot).collect();
            self.global.resize(n + arms.len(), ArmStats::default());
            let run = HalvingRun::new(&arms, arms.len() as u64)?;
            self.brackets.push(Bracket { arms, doubling: 0, run, winner: None });
        }
        Ok(())
    }

    fn recommend(&self) -> Arm {
        let mut best: Option<(Arm, f64)> = None;
        for &(a, m) in self.brackets.iter().filter_map(|b| b.winner.as_ref()) {
            if best.is_none_or(|(ba, bm)| m > bm || (m == bm && a < ba)) {
                best = Some((a, m));
            }
        }
        if let Some((a, _)) = best {
            return a;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.global.iter().enumerate().filter(|(_, s)| s.n > 0) {
            if best.is_none_or(|(_, bm)| s.mean > bm) {
                best = Some((i, s.mean));
            }
        }
        Arm::from_slot(best.expect("an arm was pulled").0)
    }
}

impl Policy for Bsh {
    fn step(&mut self, t: u64, env: &mut Environment) -> Result<Step, PolicyError> {
        check_time(self.pulls, t)?;
        self.open_due(t, env)?;
        let b = self.cursor % self.brackets.len();
        self.cursor = self.cursor.wrapping_add(1);
        let pulled = self.brackets[b].run.next_arm().expect("runs restart on completion");
        let x = env.pull(pulled)?;
        self.global[pulled.slot()].update(x);
        self.pulls += 1;
        let bracket = &mut self.brackets[b];
        if let Some(w) = bracket.run.record(x) {
            bracket.winner = Some((w, self.global[w.slot()].mean));
            bracket.doubling += 1;
            let budget = (bracket.arms.len() as u64).saturating_mul(1u64 << bracket.doubling.min(62));
            bracket.run = HalvingRun::new(&bracket.arms, budget)?;
        }
        Ok(Step { pulled, recommended: self.recommend() })
    }

    fn pulls(&self) -> u64 {
        self.pulls
    }

    fn opened(&self) -> usize {
        self.global.iter().filter(|s| s.n > 0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use crate::{ArmSupply, QuantileSpec};

    fn arms(n: u32) -> Vec<Arm> {
        (1..=n).map(Arm::new).collect()
    }

    #[test]
    fn single_arm_costs_nothing() {
        let (w, pulls) = sequential_halving(&arms(1), 10, |_| panic!("no pull expected")).unwrap();
        assert_eq!((w, pulls), (Arm::new(1), 0));
    }

    #[test]
    fn budget_below_arm_count_fails() {
        let r = sequential_halving(&arms(4), 3, |_| Ok(0.0));
        assert_eq!(r, Err(PolicyError::Budget { budget: 3, arms: 4 }));
    }

    #[test]
    fn noiseless_two_and_four_arms() {
        let means = [0.0, 1.0];
        let (w, _) = sequential_halving(&arms(2), 2, |a| Ok(means[a.slot()])).unwrap();
        assert_eq!(w, Arm::new(2));

        // 4 arms, B = 16: round 1 pulls each of 4 arms twice, round 2 each of 2 arms 4 times
        let means = [0.3, 0.9, 0.1, 0.5];
        let mut log = Vec::new();
        let (w, pulls) = sequential_halving(&arms(4), 16, |a| {
            log.push(a.get());
            Ok(means[a.slot()])
        })
        .unwrap();
        assert_eq!(w, Arm::new(2));
        assert_eq!(pulls, 16);
        assert_eq!(log, vec![1, 2, 3, 4, 1, 2, 3, 4, 2, 4, 2, 4, 2, 4, 2, 4]);
    }

    #[test]
    fn ties_keep_the_smaller_index() {
        let (w, _) = sequential_halving(&arms(5), 5, |_| Ok(1.0)).unwrap();
        assert_eq!(w, Arm::new(1));
    }

    #[test]
    fn brackets_open_on_schedule() {
        let mut env = Environment::build(QuantileSpec::Beta { alpha: 1.0 }, ArmSupply::Infinite, 1.0, Seed(0)).unwrap();
        let mut p = Bsh::new();
        let s = p.step(1, &mut env).unwrap();
        assert_eq!(s.pulled, Arm::new(1));
        for t in 2..=3 {
            p.step(t, &mut env).unwrap();
        }
        assert_eq!(p.brackets(), 1);
        p.step(4, &mut env).unwrap();
        assert_eq!(p.brackets(), 2);
        for t in 5..=64 {
            p.step(t, &mut env).unwrap();
        }
        assert_eq!(p.brackets(), 4);
        assert_eq!(p.global.len(), 2 + 4 + 8 + 16);
    }

    #[test]
    fn finite_supply_truncates_the_last_bracket() {
        let mut env = Environment::build(QuantileSpec::Beta { alpha: 1.0 }, ArmSupply::Finite(10), 1.0, Seed(0)).unwrap();
        let mut p = Bsh::new();
        for t in 1..=5000 {
            p.step(t, &mut env).unwrap();
        }
        assert_eq!(p.brackets(), 3);
        assert_eq!(p.brackets[2].arms.len(), 4);
        assert_eq!(p.opened(), 10);
    }

    #[test]
    fn recommendation_changes_only_at_completions() {
        let mut env = Environment::build(QuantileSpec::Beta { alpha: 1.0 }, ArmSupply::Infinite, 1.0, Seed(4)).unwrap();
        let mut p = Bsh::new();
        let mut prev: Option<(Arm, u64)> = None;
        for t in 1..=20_000 {
            let s = p.step(t, &mut env).unwrap();
            let done = p.completed_runs();
            if let Some((a, d)) = prev {
                if d == done && d > 0 {
                    assert_eq!(s.recommended, a, "t={t}");
                }
            }
            prev = Some((s.recommended, done));
        }
    }

    #[test]
    fn noiseless_bernoulli_recommends_a_top_arm_from_step_64() {
        let spec = QuantileSpec::BernoulliType { u: 1.0, eta0: 0.5 };
        let seeds = 1000;
        let mut good = 0;
        for seed in 0..seeds {
            let mut env = Environment::build(spec, ArmSupply::Infinite, 0.0, Seed(seed)).unwrap();
            let mut p = Bsh::new();
            let mut ok = true;
            for t in 1..=512 {
                let s = p.step(t, &mut env).unwrap();
                if t >= 64 && env.reservoir_mut().mean(s.recommended).unwrap() != 1.0 {
                    ok = false;
                }
            }
            good += usize::from(ok);
        }
        assert!(good as f64 / seeds as f64 >= 0.99, "{good}/{seeds}");
    }
}
