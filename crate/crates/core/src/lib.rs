//! Simulation, benchmarking and theory toolkit for bandit problems where the
//! number of arms exceeds the sampling budget.
//!
//! The crate is organised bottom-up:
//!
//! - [`reservoir`]: arm-mean distributions given by quantile functions, and the
//!   lazily materialised arm reservoir with Gaussian reward noise.
//! - [`stats`]: per-arm sufficient statistics and UCB/LCB confidence bounds.
//! - [`scope_index`]: the incremental LCB-ranked index used by PROSE, plus a
//!   naive reference implementation.
//! - [`policies`]: OSE, PROSE, UCB and bracketing sequential halving (BSH).
//! - [`theory`]: numerical evaluation of the rank complexity functions and the
//!   closed-form rank bounds.
//! - [`harness`]: seeded Monte-Carlo experiment runner, aggregation and export.
//! - [`cli`]: the configuration format and the `manyarm` command front end.

pub mod arm;
pub mod cli;
pub mod harness;
pub mod policies;
pub mod reservoir;
pub mod rng;
pub mod scope_index;
pub mod stats;
pub mod theory;

pub use arm::Arm;
pub use reservoir::{ArmReservoir, ArmSupply, Environment, NoiseModel, QuantileSpec};
pub use scope_index::{RankedIndex, ReferenceIndex, ScopeIndex, ScopeQuantile};
pub use stats::{ArmStats, BetaSchedule};
