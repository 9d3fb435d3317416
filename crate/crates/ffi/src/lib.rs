//! C ABI over the `manyarm` toolkit.
//!
//! Every function returns a [`ManyarmStatus`] and writes results through out
//! pointers. Handles are opaque and must be released with the matching
//! `*_free` function; freeing a null handle is a no-op. Panics never cross the
//! boundary: they are reported as [`ManyarmStatus::Panic`].
//!
//! Arms are numbered from 1, as in the Rust API.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use manyarm::policies::{IndexEngine, Policy, PolicyConfig, PolicyError, PolicyKind, PolicyState};
use manyarm::reservoir::ReservoirError;
use manyarm::rng::Seed;
use manyarm::scope_index::IndexError;
use manyarm::theory::{self, ComplexityContext, TheoryError};
use manyarm::{Arm, ArmSupply, BetaSchedule, Environment, QuantileSpec, RankedIndex, ScopeIndex, ScopeQuantile};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManyarmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DuplicateArm = 3,
    MissingArm = 4,
    EmptyIndex = 5,
    OutOfRange = 6,
    Unsupported = 7,
    Runtime = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManyarmDist {
    Bernoulli = 0,
    Beta = 1,
    Pareto = 2,
    Poly = 3,
}

/// Reservoir description. `alpha` is used by beta, pareto and poly; `u` and
/// `eta0` by bernoulli; `levels` by poly.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ManyarmSpec {
    pub dist: ManyarmDist,
    pub alpha: f64,
    pub u: f64,
    pub eta0: f64,
    pub levels: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManyarmPolicy {
    Ose = 0,
    Prose = 1,
    Ucb = 2,
    Bsh = 3,
}

/// Policy parameters. `delta > 0` selects the theoretical schedule and
/// ignores `beta`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ManyarmPolicyConfig {
    pub kind: ManyarmPolicy,
    pub beta: f64,
    pub delta: f64,
    pub gamma_scope: f64,
}

/// Outcome of one trial step.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ManyarmStepResult {
    pub t: u64,
    pub pulled: u32,
    pub recommended: u32,
    pub pulled_mean: f64,
    pub recommended_mean: f64,
    pub recommended_rank: f64,
}

/// Incremental LCB-ranked scope index.
pub struct ManyarmIndex {
    inner: RankedIndex,
    q: ScopeQuantile,
}

/// One policy playing against one seeded reservoir.
pub struct ManyarmTrial {
    env: Environment,
    policy: PolicyState,
    t: u64,
}

/// Rank complexity tables for one reservoir.
pub struct ManyarmTheory {
    ctx: ComplexityContext,
}

fn index_status(e: &IndexError) -> ManyarmStatus {
    match e {
        IndexError::Duplicate(_) => ManyarmStatus::DuplicateArm,
        IndexError::Missing(_) => ManyarmStatus::MissingArm,
        IndexError::EmptyScope => ManyarmStatus::EmptyIndex,
        IndexError::LevelOutOfRange { .. } => ManyarmStatus::OutOfRange,
        IndexError::NanBound => ManyarmStatus::InvalidArgument,
    }
}

fn policy_status(e: &PolicyError) -> ManyarmStatus {
    match e {
        PolicyError::Config(_) | PolicyError::Budget { .. } => ManyarmStatus::InvalidArgument,
        PolicyError::OutOfOrder { .. } => ManyarmStatus::Runtime,
        PolicyError::Reservoir(ReservoirError::InvalidSpec(_)) => ManyarmStatus::InvalidArgument,
        PolicyError::Reservoir(_) => ManyarmStatus::OutOfRange,
        PolicyError::Index(i) => index_status(i),
    }
}

fn theory_status(e: &TheoryError) -> ManyarmStatus {
    match e {
        TheoryError::Unsupported(_) => ManyarmStatus::Unsupported,
        _ => ManyarmStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> ManyarmStatus) -> ManyarmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(ManyarmStatus::Panic)
}

macro_rules! try_status {
    ($e:expr, $map:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return $map(&err),
        }
    };
}

fn to_spec(s: &ManyarmSpec) -> Result<QuantileSpec, ManyarmStatus> {
    let spec = match s.dist {
        ManyarmDist::Bernoulli => QuantileSpec::BernoulliType { u: s.u, eta0: s.eta0 },
        ManyarmDist::Beta => QuantileSpec::Beta { alpha: s.alpha },
        ManyarmDist::Pareto => QuantileSpec::Pareto { alpha: s.alpha },
        ManyarmDist::Poly => QuantileSpec::PolynomialDiscrete { alpha: s.alpha, levels: s.levels },
    };
    spec.validate().map_err(|_| ManyarmStatus::InvalidArgument)?;
    Ok(spec)
}

fn arm(index: u32) -> Result<Arm, ManyarmStatus> {
    if index == 0 {
        Err(ManyarmStatus::InvalidArgument)
    } else {
        Ok(Arm::new(index))
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn manyarm_status_message(status: ManyarmStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        ManyarmStatus::Ok => b"ok\0",
        ManyarmStatus::NullPointer => b"null pointer argument\0",
        ManyarmStatus::InvalidArgument => b"invalid argument\0",
        ManyarmStatus::DuplicateArm => b"arm is already indexed\0",
        ManyarmStatus::MissingArm => b"arm is not indexed\0",
        ManyarmStatus::EmptyIndex => b"index is empty\0",
        ManyarmStatus::OutOfRange => b"value out of range\0",
        ManyarmStatus::Unsupported => b"unsupported for this distribution\0",
        ManyarmStatus::Runtime => b"runtime failure\0",
        ManyarmStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Creates an empty index with scope exponent `gamma` (>= 1, or infinity).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_new(gamma: f64, out: *mut *mut ManyarmIndex) -> ManyarmStatus {
    guard(|| {
        if out.is_null() {
            return ManyarmStatus::NullPointer;
        }
        let q = try_status!(ScopeQuantile::new(gamma), |_: &String| ManyarmStatus::InvalidArgument);
        let h = Box::new(ManyarmIndex { inner: RankedIndex::new(), q });
        *out = Box::into_raw(h);
        ManyarmStatus::Ok
    })
}

/// # Safety
/// `index` must be null or a handle from [`manyarm_index_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_free(index: *mut ManyarmIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Recomputes the scope boundaries for time `t >= 1`.
///
/// # Safety
/// `index` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_set_time(index: *mut ManyarmIndex, t: u64) -> ManyarmStatus {
    guard(|| {
        let Some(h) = index.as_mut() else { return ManyarmStatus::NullPointer };
        if t == 0 {
            return ManyarmStatus::InvalidArgument;
        }
        h.inner.set_boundaries(t, h.q);
        ManyarmStatus::Ok
    })
}

/// Adds an untouched arm (bounds -inf, +inf).
///
/// # Safety
/// `index` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_insert(index: *mut ManyarmIndex, arm_index: u32) -> ManyarmStatus {
    guard(|| {
        let Some(h) = index.as_mut() else { return ManyarmStatus::NullPointer };
        let a = try_status!(arm(arm_index), |s: &ManyarmStatus| *s);
        try_status!(h.inner.insert_arm(a), index_status);
        ManyarmStatus::Ok
    })
}

/// Replaces the bounds of an indexed arm.
///
/// # Safety
/// `index` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_record(index: *mut ManyarmIndex, arm_index: u32, lcb: f64, ucb: f64) -> ManyarmStatus {
    guard(|| {
        let Some(h) = index.as_mut() else { return ManyarmStatus::NullPointer };
        let a = try_status!(arm(arm_index), |s: &ManyarmStatus| *s);
        try_status!(h.inner.record_pull(a, lcb, ucb), index_status);
        ManyarmStatus::Ok
    })
}

/// Arm with the largest UCB among the `Z_level` best arms by LCB.
///
/// # Safety
/// `index` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_max_ucb_in_scope(index: *const ManyarmIndex, level: usize, out: *mut u32) -> ManyarmStatus {
    guard(|| {
        let (Some(h), false) = (index.as_ref(), out.is_null()) else { return ManyarmStatus::NullPointer };
        *out = try_status!(h.inner.max_ucb_in_scope(level), index_status).get();
        ManyarmStatus::Ok
    })
}

/// Arm with the largest LCB.
///
/// # Safety
/// `index` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_best_lcb(index: *const ManyarmIndex, out: *mut u32) -> ManyarmStatus {
    guard(|| {
        let (Some(h), false) = (index.as_ref(), out.is_null()) else { return ManyarmStatus::NullPointer };
        *out = try_status!(h.inner.best_lcb(), index_status).get();
        ManyarmStatus::Ok
    })
}

/// Number of indexed arms and number of scope levels.
///
/// # Safety
/// `index` must be a live handle; either out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn manyarm_index_size(index: *const ManyarmIndex, arms: *mut usize, levels: *mut usize) -> ManyarmStatus {
    guard(|| {
        let Some(h) = index.as_ref() else { return ManyarmStatus::NullPointer };
        if let Some(a) = arms.as_mut() {
            *a = h.inner.len();
        }
        if let Some(l) = levels.as_mut() {
            *l = h.inner.levels();
        }
        ManyarmStatus::Ok
    })
}

/// Creates a trial: `policy` against a reservoir of `arms` arms (0 for an
/// unbounded supply) with noise level `zeta`.
///
/// # Safety
/// `spec` and `policy` must be readable and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_trial_new(
    spec: *const ManyarmSpec,
    arms: u32,
    policy: *const ManyarmPolicyConfig,
    zeta: f64,
    reservoir_seed: u64,
    policy_seed: u64,
    out: *mut *mut ManyarmTrial,
) -> ManyarmStatus {
    guard(|| {
        let (Some(s), Some(p), false) = (spec.as_ref(), policy.as_ref(), out.is_null()) else {
            return ManyarmStatus::NullPointer;
        };
        let spec = try_status!(to_spec(s), |s: &ManyarmStatus| *s);
        let supply = if arms == 0 { ArmSupply::Infinite } else { ArmSupply::Finite(arms) };
        let kind = match p.kind {
            ManyarmPolicy::Ose => PolicyKind::Ose,
            ManyarmPolicy::Prose => PolicyKind::Prose,
            ManyarmPolicy::Ucb => PolicyKind::Ucb,
            ManyarmPolicy::Bsh => PolicyKind::Bsh,
        };
        let beta = if p.delta > 0.0 {
            BetaSchedule::Theoretical { delta: p.delta }
        } else {
            BetaSchedule::Constant { beta: p.beta }
        };
        let config = PolicyConfig { kind, beta, gamma_scope: p.gamma_scope, engine: IndexEngine::Ranked };
        let env = try_status!(Environment::build(spec, supply, zeta, Seed(reservoir_seed)), |_: &ReservoirError| {
            ManyarmStatus::InvalidArgument
        });
        let policy = try_status!(config.build(supply.limit(), zeta, Seed(policy_seed)), policy_status);
        *out = Box::into_raw(Box::new(ManyarmTrial { env, policy, t: 0 }));
        ManyarmStatus::Ok
    })
}

/// # Safety
/// `trial` must be null or a handle from [`manyarm_trial_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn manyarm_trial_free(trial: *mut ManyarmTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// Plays the next time step.
///
/// # Safety
/// `trial` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_trial_step(trial: *mut ManyarmTrial, out: *mut ManyarmStepResult) -> ManyarmStatus {
    guard(|| {
        let (Some(h), false) = (trial.as_mut(), out.is_null()) else { return ManyarmStatus::NullPointer };
        let t = h.t + 1;
        let step = try_status!(h.policy.step(t, &mut h.env), policy_status);
        h.t = t;
        let r = h.env.reservoir_mut();
        let fail = |_: &ReservoirError| ManyarmStatus::Runtime;
        let pulled_mean = try_status!(r.mean(step.pulled), fail);
        let recommended_mean = try_status!(r.mean(step.recommended), fail);
        let recommended_rank = try_status!(r.sample_rank(step.recommended), fail);
        *out = ManyarmStepResult {
            t,
            pulled: step.pulled.get(),
            recommended: step.recommended.get(),
            pulled_mean,
            recommended_mean,
            recommended_rank,
        };
        ManyarmStatus::Ok
    })
}

/// Builds the complexity tables for `spec` at noise `zeta` and factor `psi`.
///
/// # Safety
/// `spec` must be readable and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_theory_new(spec: *const ManyarmSpec, zeta: f64, psi: f64, out: *mut *mut ManyarmTheory) -> ManyarmStatus {
    guard(|| {
        let (Some(s), false) = (spec.as_ref(), out.is_null()) else { return ManyarmStatus::NullPointer };
        let spec = try_status!(to_spec(s), |s: &ManyarmStatus| *s);
        let ctx = try_status!(ComplexityContext::new(spec, zeta, psi), theory_status);
        *out = Box::into_raw(Box::new(ManyarmTheory { ctx }));
        ManyarmStatus::Ok
    })
}

/// # Safety
/// `theory` must be null or a handle from [`manyarm_theory_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn manyarm_theory_free(theory: *mut ManyarmTheory) {
    if !theory.is_null() {
        drop(Box::from_raw(theory));
    }
}

/// Significant rank at time `t`; `relaxed` selects the relaxed complexity.
///
/// # Safety
/// `theory` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_theory_eta_star(theory: *const ManyarmTheory, t: f64, relaxed: bool, out: *mut f64) -> ManyarmStatus {
    guard(|| {
        let (Some(h), false) = (theory.as_ref(), out.is_null()) else { return ManyarmStatus::NullPointer };
        if !(t > 0.0) {
            return ManyarmStatus::InvalidArgument;
        }
        *out = theory::eta_star(&h.ctx, t, relaxed);
        ManyarmStatus::Ok
    })
}

/// Sample complexity `S(eta)`, or the relaxed `S~(eta)`.
///
/// # Safety
/// `theory` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_theory_sample_complexity(
    theory: *const ManyarmTheory,
    eta: f64,
    relaxed: bool,
    out: *mut f64,
) -> ManyarmStatus {
    guard(|| {
        let (Some(h), false) = (theory.as_ref(), out.is_null()) else { return ManyarmStatus::NullPointer };
        *out = try_status!(theory::sample_complexity(&h.ctx, eta, relaxed), theory_status);
        ManyarmStatus::Ok
    })
}

/// Closed-form upper bound on the relaxed significant rank at `t`, and the
/// mean at that rank.
///
/// # Safety
/// `theory` must be a live handle; `rank` and `reward` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn manyarm_theory_closed_form(theory: *const ManyarmTheory, t: f64, rank: *mut f64, reward: *mut f64) -> ManyarmStatus {
    guard(|| {
        let (Some(h), false, false) = (theory.as_ref(), rank.is_null(), reward.is_null()) else {
            return ManyarmStatus::NullPointer;
        };
        let b = try_status!(theory::closed_form_bound(&h.ctx, t), theory_status);
        *rank = b.rank_bound;
        *reward = b.reward_bound;
        ManyarmStatus::Ok
    })
}
