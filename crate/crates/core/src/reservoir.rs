//! Arm-mean distributions and the arm reservoir.
//!
//! A distribution of arm means is described by its quantile function
//! `eta -> lambda(eta)` on `(0, 1]`: nonincreasing and right-continuous, so that
//! a fraction `eta` of the arms has mean at least `lambda(eta)`. Each arm gets a
//! latent uniform rank and its mean is the quantile at that rank.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::rng::{unit_open_closed, Pcg64, Seed, NOISE_TAG, RANK_TAG};
use crate::Arm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReservoirError {
    #[error("rank {0} is outside (0, 1]")]
    Domain(f64),
    #[error("arm {arm} does not exist in a reservoir of {limit} arms")]
    ArmOutOfRange { arm: u32, limit: u32 },
    #[error("invalid distribution: {0}")]
    InvalidSpec(String),
}

/// Distribution of arm means, given through its quantile function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuantileSpec {
    /// Mean `u` with probability `eta0`, mean 0 otherwise.
    BernoulliType { u: f64, eta0: f64 },
    /// `Beta(1, 1/alpha)` means: `lambda = 1 - eta^alpha`.
    Beta { alpha: f64 },
    /// Pareto means on `[1, inf)`: `lambda = eta^-alpha`.
    Pareto { alpha: f64 },
    /// Discrete `Polynomial(alpha)` instance with `levels` distinct means.
    PolynomialDiscrete { alpha: f64, levels: u32 },
}

impl QuantileSpec {
    pub fn validate(&self) -> Result<(), ReservoirError> {
        let bad = |m: String| Err(ReservoirError::InvalidSpec(m));
        match *self {
            QuantileSpec::BernoulliType { u, eta0 } => {
                if !u.is_finite() {
                    return bad(format!("u must be finite, got {u}"));
                }
                if !(eta0 > 0.0 && eta0 <= 1.0) {
                    return bad(format!("eta0 must lie in (0, 1], got {eta0}"));
                }
            }
            QuantileSpec::Beta { alpha } | QuantileSpec::Pareto { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha must be positive, got {alpha}"));
                }
            }
            QuantileSpec::PolynomialDiscrete { alpha, levels } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha must be positive, got {alpha}"));
                }
                if levels == 0 {
                    return bad("poly levels must be positive".into());
                }
            }
        }
        Ok(())
    }

    /// The quantile `lambda(eta)`.
    pub fn quantile(&self, eta: f64) -> Result<f64, ReservoirError> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(ReservoirError::Domain(eta));
        }
        Ok(self.quantile_unchecked(eta))
    }

    /// The quantile without the domain check; `eta` must lie in `(0, 1]`.
    #[inline]
    pub fn quantile_unchecked(&self, eta: f64) -> f64 {
        match *self {
            QuantileSpec::BernoulliType { u, eta0 } => {
                if eta <= eta0 {
                    u
                } else {
                    0.0
                }
            }
            QuantileSpec::Beta { alpha } => 1.0 - eta.powf(alpha),
            QuantileSpec::Pareto { alpha } => eta.powf(-alpha),
            QuantileSpec::PolynomialDiscrete { alpha, levels } => {
                // the unique i with i < K*eta <= i + 1
                let k = f64::from(levels);
                let i = ((k * eta).ceil() - 1.0).max(0.0);
                1.0 - (i / k).powf(alpha)
            }
        }
    }

    /// `lambda_0`, the limit of the quantile as the rank goes to zero.
    /// Infinite for unbounded distributions.
    pub fn top_mean(&self) -> f64 {
        match *self {
            QuantileSpec::BernoulliType { u, .. } => u,
            QuantileSpec::Beta { .. } | QuantileSpec::PolynomialDiscrete { .. } => 1.0,
            QuantileSpec::Pareto { .. } => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.top_mean().is_finite()
    }

    /// Short name used in config files and output.
    pub fn family(&self) -> &'static str {
        match self {
            QuantileSpec::BernoulliType { .. } => "bernoulli",
            QuantileSpec::Beta { .. } => "beta",
            QuantileSpec::Pareto { .. } => "pareto",
            QuantileSpec::PolynomialDiscrete { .. } => "poly",
        }
    }
}

/// How many arms the reservoir holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArmSupply {
    /// Arms `1..=K`; touching any other index is an error.
    Finite(u32),
    Infinite,
}

impl ArmSupply {
    pub fn limit(self) -> Option<u32> {
        match self {
            ArmSupply::Finite(k) => Some(k),
            ArmSupply::Infinite => None,
        }
    }
}

/// Centered Gaussian reward noise with standard deviation `zeta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub zeta: f64,
}

impl NoiseModel {
    pub fn new(zeta: f64) -> Self {
        assert!(zeta >= 0.0 && zeta.is_finite(), "zeta must be finite and >= 0");
        NoiseModel { zeta }
    }

    #[inline]
    pub fn draw<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.zeta == 0.0 {
            return 0.0;
        }
        let g: f64 = StandardNormal.sample(rng);
        self.zeta * g
    }
}

/// Lazily materialised arm population.
///
/// Ranks are drawn from a dedicated stream in index order, so the rank of arm
/// `a` depends only on the seed and `a`, never on the order in which arms are
/// touched. Each arm has its own reward-noise stream.
pub struct ArmReservoir {
    spec: QuantileSpec,
    supply: ArmSupply,
    ranks: Vec<f64>,
    means: Vec<f64>,
    noise: Vec<Pcg64>,
    rank_rng: Pcg64,
    noise_seed: Seed,
}

impl ArmReservoir {
    /// Creates a reservoir. In finite mode all `K` ranks are drawn up front.
    pub fn new(spec: QuantileSpec, supply: ArmSupply, seed: Seed) -> Result<Self, ReservoirError> {
        spec.validate()?;
        let mut res = ArmReservoir {
            spec,
            supply,
            ranks: Vec::new(),
            means: Vec::new(),
            noise: Vec::new(),
            rank_rng: seed.derive(RANK_TAG).rng(),
            noise_seed: seed.derive(NOISE_TAG),
        };
        if let ArmSupply::Finite(k) = supply {
            if k == 0 {
                return Err(ReservoirError::InvalidSpec("K must be positive".into()));
            }
            res.materialize(k as usize);
        }
        Ok(res)
    }

    pub fn spec(&self) -> &QuantileSpec {
        &self.spec
    }

    pub fn supply(&self) -> ArmSupply {
        self.supply
    }

    /// Number of arms whose rank has been drawn.
    pub fn materialized(&self) -> usize {
        self.ranks.len()
    }

    fn materialize(&mut self, count: usize) {
        self.ranks.reserve(count.saturating_sub(self.ranks.len()));
        while self.ranks.len() < count {
            let slot = self.ranks.len();
            let rank = unit_open_closed(&mut self.rank_rng);
            self.ranks.push(rank);
            self.means.push(self.spec.quantile_unchecked(rank));
            self.noise.push(self.noise_seed.stream(slot as u64 + 1));
        }
    }

    #[inline]
    fn touch(&mut self, arm: Arm) -> Result<usize, ReservoirError> {
        let slot = arm.slot();
        if slot < self.ranks.len() {
            return Ok(slot);
        }
        if let ArmSupply::Finite(limit) = self.supply {
            return Err(ReservoirError::ArmOutOfRange { arm: arm.get(), limit });
        }
        self.materialize(slot + 1);
        Ok(slot)
    }

    /// The latent rank `gamma(a)` of an arm, drawn on first use.
    pub fn sample_rank(&mut self, arm: Arm) -> Result<f64, ReservoirError> {
        let slot = self.touch(arm)?;
        Ok(self.ranks[slot])
    }

    /// The true mean `lambda(gamma(a))` of an arm.
    pub fn mean(&mut self, arm: Arm) -> Result<f64, ReservoirError> {
        let slot = self.touch(arm)?;
        Ok(self.means[slot])
    }

    /// One noisy reward from `arm`.
    #[inline]
    pub fn draw_reward(&mut self, noise: &NoiseModel, arm: Arm) -> Result<f64, ReservoirError> {
        let slot = self.touch(arm)?;
        let eps = noise.draw(&mut self.noise[slot]);
        Ok(self.means[slot] + eps)
    }
}

/// A reservoir together with its noise model: what a policy interacts with.
pub struct Environment {
    reservoir: ArmReservoir,
    noise: NoiseModel,
}

impl Environment {
    pub fn new(reservoir: ArmReservoir, noise: NoiseModel) -> Self {
        Environment { reservoir, noise }
    }

    pub fn build(
        spec: QuantileSpec,
        supply: ArmSupply,
        zeta: f64,
        seed: Seed,
    ) -> Result<Self, ReservoirError> {
        Ok(Self::new(ArmReservoir::new(spec, supply, seed)?, NoiseModel::new(zeta)))
    }

    #[inline]
    pub fn pull(&mut self, arm: Arm) -> Result<f64, ReservoirError> {
        self.reservoir.draw_reward(&self.noise, arm)
    }

    pub fn zeta(&self) -> f64 {
        self.noise.zeta
    }

    pub fn arm_limit(&self) -> Option<u32> {
        self.reservoir.supply.limit()
    }

    pub fn reservoir(&self) -> &ArmReservoir {
        &self.reservoir
    }

    pub fn reservoir_mut(&mut self) -> &mut ArmReservoir {
        &mut self.reservoir
    }
}
