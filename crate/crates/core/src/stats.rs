//! Per-arm statistics and confidence bounds.

/// Pull count and running empirical mean of one arm.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmStats {
    pub n: u64,
    pub mean: f64,
}

impl ArmStats {
    #[inline]
    pub fn update(&mut self, x: f64) {
        self.n += 1;
        self.mean += (x - self.mean) / self.n as f64;
    }

    /// Half-width `sqrt(zeta^2 beta / n)` of the confidence interval.
    #[inline]
    pub fn radius(&self, zeta: f64, beta: f64) -> f64 {
        (zeta * zeta * beta / self.n as f64).sqrt()
    }

    /// Upper confidence bound; `+inf` for an unpulled arm.
    #[inline]
    pub fn ucb(&self, zeta: f64, beta: f64) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            self.mean + self.radius(zeta, beta)
        }
    }

    /// Lower confidence bound; `-inf` for an unpulled arm.
    #[inline]
    pub fn lcb(&self, zeta: f64, beta: f64) -> f64 {
        if self.n == 0 {
            f64::NEG_INFINITY
        } else {
            self.mean - self.radius(zeta, beta)
        }
    }
}

/// The exploration parameter `beta_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaSchedule {
    Constant { beta: f64 },
    /// `beta_t = 6 ln(5t / delta)`.
    Theoretical { delta: f64 },
}

impl BetaSchedule {
    #[inline]
    pub fn value(&self, t: u64) -> f64 {
        let t = t.max(1);
        match *self {
            BetaSchedule::Constant { beta } => beta,
            BetaSchedule::Theoretical { delta } => 6.0 * (5.0 * t as f64 / delta).ln(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, BetaSchedule::Constant { .. })
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            BetaSchedule::Constant { beta } if !(beta > 0.0 && beta.is_finite()) => {
                Err(format!("beta must be positive, got {beta}"))
            }
            BetaSchedule::Theoretical { delta } if !(delta > 0.0 && delta <= 1.0) => {
                Err(format!("delta must lie in (0, 1], got {delta}"))
            }
            _ => Ok(()),
        }
    }
}
