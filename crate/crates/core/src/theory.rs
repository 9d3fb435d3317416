//! Numerical evaluation of rank complexity functions.
//!
//! For ranks `0 < rho < nu <= 1` the rank-corrected inverse squared gap is
//!
//! ```text
//! G(rho, nu) = max( zeta^2 nu / (rho (lambda_rho - lambda_nu)^2), 1 / rho )
//! ```
//!
//! and the sample complexity of detecting a top-`eta` arm is
//! `S(eta) = inf_{rho < eta} sup_{nu >= eta} G(rho, nu)`, with the relaxed
//! form `S~(eta) = sup_{nu >= 2 eta} G(eta, nu)`. A rank `eta` is
//! `psi`-significant at time `t` when `S(eta) <= t / psi`; `eta_star` returns
//! the smallest such rank.
//!
//! Extrema are taken over a logarithmic grid on `[eta_min, 1]`
//! (64 points per decade by default). The grid infimum over `rho` can miss the
//! true infimum by at most one grid cell, so grid values are upper estimates
//! of `S` and grid ranks sit at most one cell above the true ones.
//! Bernoulli reservoirs use the closed form of `S` instead.
//!
//! Infinite complexities are represented by `f64::INFINITY`.

use std::sync::OnceLock;

use thiserror::Error;

use crate::reservoir::ReservoirError;
use crate::QuantileSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0} has no closed-form rank bound; use the grid eta_star")]
    Unsupported(&'static str),
    #[error(transparent)]
    Spec(#[from] ReservoirError),
}

pub const DEFAULT_POINTS_PER_DECADE: u32 = 64;
pub const DEFAULT_ETA_MIN: f64 = 1e-16;

/// `2^30 ln^3(5t / delta)`, the significance factor of the worst-case guarantee.
pub fn guarantee_psi(t: f64, delta: f64) -> f64 {
    2f64.powi(30) * (5.0 * t / delta).ln().powi(3)
}

#[derive(Debug)]
struct Tables {
    /// Grid `S` at every grid point.
    exact: Vec<f64>,
    /// Grid `S~` at every grid point below `1/2`.
    relaxed: Vec<f64>,
}

/// A reservoir, noise level and significance factor, with a cached grid.
#[derive(Debug)]
pub struct ComplexityContext {
    spec: QuantileSpec,
    zeta: f64,
    psi: f64,
    grid: Vec<f64>,
    points_per_decade: u32,
    tables: OnceLock<Tables>,
}

impl Clone for ComplexityContext {
    fn clone(&self) -> Self {
        ComplexityContext {
            spec: self.spec,
            zeta: self.zeta,
            psi: self.psi,
            grid: self.grid.clone(),
            points_per_decade: self.points_per_decade,
            tables: OnceLock::new(),
        }
    }
}

impl ComplexityContext {
    pub fn new(spec: QuantileSpec, zeta: f64, psi: f64) -> Result<Self, TheoryError> {
        Self::with_grid(spec, zeta, psi, DEFAULT_POINTS_PER_DECADE, DEFAULT_ETA_MIN)
    }

    /// Grid points `10^(-k / points_per_decade)` down to the first one at or below `eta_min`.
    pub fn with_grid(
        spec: QuantileSpec,
        zeta: f64,
        psi: f64,
        points_per_decade: u32,
        eta_min: f64,
    ) -> Result<Self, TheoryError> {
        spec.validate()?;
        if !(zeta >= 0.0 && zeta.is_finite()) {
            return Err(TheoryError::Domain(format!("zeta must be finite and >= 0, got {zeta}")));
        }
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(TheoryError::Domain(format!("psi must be positive, got {psi}")));
        }
        if points_per_decade == 0 {
            return Err(TheoryError::Domain("points_per_decade must be positive".into()));
        }
        if !(eta_min > 0.0 && eta_min < 1.0) {
            return Err(TheoryError::Domain(format!("eta_min must lie in (0, 1), got {eta_min}")));
        }
        let ppd = f64::from(points_per_decade);
        let steps = (-eta_min.log10() * ppd - 1e-9).ceil() as i64;
        let grid = (0..=steps).rev().map(|k| grid_point(k, points_per_decade, ppd)).collect();
        Ok(ComplexityContext { spec, zeta, psi, grid, points_per_decade, tables: OnceLock::new() })
    }

    pub fn spec(&self) -> &QuantileSpec {
        &self.spec
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// The rank grid, ascending, ending at 1.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Ratio between neighbouring grid points.
    pub fn cell_ratio(&self) -> f64 {
        10f64.powf(1.0 / f64::from(self.points_per_decade))
    }

    /// `lambda_rho - lambda_nu`, computed without cancellation where possible.
    fn gap(&self, rho: f64, nu: f64) -> f64 {
        match self.spec {
            QuantileSpec::Beta { alpha } => nu.powf(alpha) - rho.powf(alpha),
            QuantileSpec::Pareto { alpha } => rho.powf(-alpha) - nu.powf(-alpha),
            _ => self.spec.quantile_unchecked(rho) - self.spec.quantile_unchecked(nu),
        }
    }

    /// `Delta_eta = lambda_0 - lambda_eta` of a bounded spec.
    fn delta(&self, eta: f64) -> f64 {
        match self.spec {
            QuantileSpec::Beta { alpha } => eta.powf(alpha),
            _ => self.spec.top_mean() - self.spec.quantile_unchecked(eta),
        }
    }

    #[inline]
    fn g(&self, rho: f64, nu: f64) -> f64 {
        let z2 = self.zeta * self.zeta;
        let first = if z2 == 0.0 {
            0.0
        } else {
            let d = self.gap(rho, nu);
            if d <= 0.0 {
                f64::INFINITY
            } else {
                z2 * nu / (rho * d * d)
            }
        };
        first.max(1.0 / rho)
    }

    fn bernoulli_s(&self, eta: f64) -> Option<f64> {
        match self.spec {
            QuantileSpec::BernoulliType { u, eta0 } => Some(if eta <= eta0 {
                f64::INFINITY
            } else {
                (self.zeta * self.zeta / (eta0 * u * u)).max(1.0 / eta0)
            }),
            _ => None,
        }
    }

    fn exact_direct(&self, eta: f64) -> f64 {
        if let Some(s) = self.bernoulli_s(eta) {
            return s;
        }
        let split = self.grid.partition_point(|&x| x < eta);
        let mut best = f64::INFINITY;
        for &rho in &self.grid[..split] {
            let mut worst = self.g(rho, eta);
            for &nu in &self.grid[split..] {
                worst = worst.max(self.g(rho, nu));
            }
            best = best.min(worst);
        }
        best
    }

    fn relaxed_direct(&self, eta: f64) -> f64 {
        let lo = 2.0 * eta;
        let split = self.grid.partition_point(|&x| x < lo);
        self.grid[split..].iter().fold(self.g(eta, lo), |acc, &nu| acc.max(self.g(eta, nu)))
    }

    fn tables(&self) -> &Tables {
        self.tables.get_or_init(|| {
            let n = self.grid.len();
            let exact = if self.bernoulli_s(0.5).is_some() {
                self.grid.iter().map(|&e| self.bernoulli_s(e).expect("bernoulli")).collect()
            } else {
                // S[k] = min_{i<k} max_{m>=k} G(grid[i], grid[m])
                let mut exact = vec![f64::INFINITY; n];
                let mut suffix = vec![0.0; n];
                for i in 0..n {
                    let rho = self.grid[i];
                    let mut acc = 0.0f64;
                    for m in (i + 1..n).rev() {
                        acc = acc.max(self.g(rho, self.grid[m]));
                        suffix[m] = acc;
                    }
                    for k in i + 1..n {
                        exact[k] = exact[k].min(suffix[k]);
                    }
                }
                exact
            };
            let relaxed = self
                .grid
                .iter()
                .take_while(|&&e| e < 0.5)
                .map(|&e| self.relaxed_direct(e))
                .collect();
            Tables { exact, relaxed }
        })
    }

    /// Grid `S` at every grid point (ascending ranks).
    pub fn exact_table(&self) -> &[f64] {
        &self.tables().exact
    }

    /// Grid `S~` at every grid point below `1/2`.
    pub fn relaxed_table(&self) -> &[f64] {
        &self.tables().relaxed
    }
}

fn grid_point(k: i64, ppd_u: u32, ppd: f64) -> f64 {
    // exact decades where possible
    if k % i64::from(ppd_u) == 0 {
        10f64.powi(-(k / i64::from(ppd_u)) as i32)
    } else {
        10f64.powf(-(k as f64) / ppd)
    }
}

/// `G(rho, nu)` for `0 < rho < nu <= 1`.
pub fn gap_complexity(ctx: &ComplexityContext, rho: f64, nu: f64) -> Result<f64, TheoryError> {
    if !(rho > 0.0 && rho < nu && nu <= 1.0) {
        return Err(TheoryError::Domain(format!("need 0 < rho < nu <= 1, got rho={rho}, nu={nu}")));
    }
    Ok(ctx.g(rho, nu))
}

/// `S(eta)` for `eta` in `(0, 1)`, or `S~(eta)` for `eta` in `(0, 1/2)`.
pub fn sample_complexity(ctx: &ComplexityContext, eta: f64, relaxed: bool) -> Result<f64, TheoryError> {
    let upper = if relaxed { 0.5 } else { 1.0 };
    if !(eta > 0.0 && eta < upper) {
        return Err(TheoryError::Domain(format!("eta must lie in (0, {upper}), got {eta}")));
    }
    Ok(if relaxed { ctx.relaxed_direct(eta) } else { ctx.exact_direct(eta) })
}

/// Smallest grid rank that is `psi`-significant at time `t`, or 1 if none is.
///
/// The relaxed variant returns `min(2 eta, 1)` for the smallest grid `eta`
/// below `1/2` with `S~(eta) <= t / psi`.
pub fn eta_star(ctx: &ComplexityContext, t: f64, relaxed: bool) -> f64 {
    let threshold = t / ctx.psi;
    if relaxed {
        let table = ctx.relaxed_table();
        return match table.iter().position(|&s| s <= threshold) {
            Some(k) => (2.0 * ctx.grid[k]).min(1.0),
            None => 1.0,
        };
    }
    // grid S is nonincreasing in eta
    let candidates = ctx.grid.len() - 1;
    let table = &ctx.exact_table()[..candidates];
    let k = table.partition_point(|&s| s > threshold);
    if k < candidates {
        ctx.grid[k]
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonComplexity {
    /// `g(eps)`, the largest rank with gap at most `eps`.
    pub g_eps: f64,
    /// `g(eps / 2)`.
    pub g_half: f64,
    /// `H(eps)`.
    pub h: f64,
}

/// `g(eps) = sup{eta : lambda_0 - lambda_eta <= eps}` and the complexity
/// `H(eps) = max(1 / g(eps/2), sup_{eta >= g(eps)} zeta^2 eta / (g(eps/2) Delta_eta^2))`.
pub fn epsilon_complexity(ctx: &ComplexityContext, eps: f64) -> Result<EpsilonComplexity, TheoryError> {
    if !ctx.spec.is_bounded() {
        return Err(TheoryError::Domain(format!("{} reservoirs are unbounded", ctx.spec.family())));
    }
    if !(eps > 0.0) {
        return Err(TheoryError::Domain(format!("eps must be positive, got {eps}")));
    }
    let g_eps = level_rank(ctx, eps);
    let g_half = level_rank(ctx, eps / 2.0);
    let z2 = ctx.zeta * ctx.zeta;
    let term = |eta: f64| {
        if z2 == 0.0 {
            return 0.0;
        }
        let d = ctx.delta(eta);
        if d <= 0.0 {
            f64::INFINITY
        } else {
            z2 * eta / (g_half * d * d)
        }
    };
    let split = ctx.grid.partition_point(|&x| x < g_eps);
    let sup = ctx.grid[split..].iter().fold(term(g_eps), |acc, &e| acc.max(term(e)));
    let h = if g_half > 0.0 { sup.max(1.0 / g_half) } else { f64::INFINITY };
    Ok(EpsilonComplexity { g_eps, g_half, h })
}

/// `sup{eta in [0, 1] : Delta_eta <= eps}` by bisection.
fn level_rank(ctx: &ComplexityContext, eps: f64) -> f64 {
    if ctx.delta(1.0) <= eps {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ctx.delta(mid) <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormBound {
    /// Upper bound on the relaxed significant rank, capped at 1.
    pub rank_bound: f64,
    /// `lambda` at `rank_bound`.
    pub reward_bound: f64,
}

/// Explicit upper bounds on the relaxed significant rank at time `t`.
///
/// - Beta, `alpha < 1/2`: `max(2 psi / t, 8 psi zeta^2 / (alpha^2 t))`
/// - Beta, `alpha >= 1/2`: `max(2 psi / t, (24 psi zeta^2 / t)^(1 / (2 alpha)))`
/// - Pareto, `alpha < 1/2`: `2 max(psi / t, (4 psi zeta^2 / (alpha^2 t))^(1 / (1 - 2 alpha)))`
/// - Pareto, `alpha >= 1/2`: `2 psi / t` once `t >= psi (16 zeta^2)^(1 / (2 alpha))`, else 1
/// - Bernoulli: `eta0` once `t >= psi zeta^2 / (eta0 u^2)`, else 1
pub fn closed_form_bound(ctx: &ComplexityContext, t: f64) -> Result<ClosedFormBound, TheoryError> {
    if !(t > 0.0) {
        return Err(TheoryError::Domain(format!("t must be positive, got {t}")));
    }
    let (psi, z2) = (ctx.psi, ctx.zeta * ctx.zeta);
    let rank = match ctx.spec {
        QuantileSpec::Beta { alpha } if alpha < 0.5 => (2.0 * psi / t).max(8.0 * psi * z2 / (alpha * alpha * t)),
        QuantileSpec::Beta { alpha } => (2.0 * psi / t).max((24.0 * psi * z2 / t).powf(1.0 / (2.0 * alpha))),
        QuantileSpec::Pareto { alpha } if alpha < 0.5 => {
            2.0 * (psi / t).max((4.0 * psi * z2 / (alpha * alpha * t)).powf(1.0 / (1.0 - 2.0 * alpha)))
        }
        QuantileSpec::Pareto { alpha } => {
            if t >= psi * (16.0 * z2).powf(1.0 / (2.0 * alpha)) {
                2.0 * psi / t
            } else {
                1.0
            }
        }
        QuantileSpec::BernoulliType { u, eta0 } => {
            if t >= psi * z2 / (eta0 * u * u) {
                eta0
            } else {
                1.0
            }
        }
        QuantileSpec::PolynomialDiscrete { .. } => return Err(TheoryError::Unsupported("polynomial")),
    };
    let rank_bound = rank.min(1.0);
    Ok(ClosedFormBound { rank_bound, reward_bound: ctx.spec.quantile(rank_bound)? })
}
