//! Certified bounds when prices range over all reals.
//!
//! Rounding every price of a profile down to the grid `delta * Z` moves the
//! region boundaries by at most `L * delta` and can attract opt-out users
//! worth at most an extra `2 * sqrt(2 delta / alpha)` of interval length,
//! where `alpha` is the strong-convexity parameter of the inconvenience
//! function and `L = 2 max_i 1 / (alpha (t_{i+1} - t_i))`. Two certified
//! bounds on the continuous optimum follow:
//!
//! * `LB(delta)`: solve exactly over the clamped grid; a grid optimum is a
//!   fortiori a feasible real-price profile.
//! * `UB(delta)`: solve the companion problem with rewards `(q + delta) * v`
//!   and capacities relaxed by `mu_up * L * delta + 2 mu_up sqrt(2 delta /
//!   alpha)`, then add `n * mu_up * L * delta * p_max`; every real-price
//!   profile rounds down into its feasible set.
//!
//! Requires strong convexity and a density bounded away from zero on an
//! interval; both are checked by [`derive_constants`].

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{self, Instance, PriceProfile};
use crate::solver::{solve, SolveMode};

#[derive(Debug, Error, PartialEq)]
pub enum ContinuousError {
    #[error("continuous-price bounds require a strongly convex distance (quadratic family)")]
    NotStronglyConvex,
    #[error("continuous-price bounds require a density bounded away from zero; piece {index} is zero")]
    ZeroDensityPiece { index: usize },
}

/// Constants entering the discretization bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousConstants {
    /// Strong-convexity parameter of the distance.
    pub alpha: f64,
    /// Upper bound on the density.
    pub mu_upper: f64,
    /// `2 max_i 1 / (alpha (t_{i+1} - t_i))`; 0 when there is one slot.
    pub lipschitz: f64,
    pub p_min: f64,
    pub p_max: f64,
}

/// Lower/upper bound pair for one grid resolution.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub delta: f64,
    pub lb: f64,
    pub lb_profile: PriceProfile,
    /// Optimal value of the relaxed companion problem.
    pub ub_raw: f64,
    /// `ub_raw + n * mu_upper * lipschitz * delta * p_max`.
    pub ub: f64,
    pub ub_profile: PriceProfile,
    pub gap: f64,
}

/// Validates the continuous-mode assumptions and assembles the constants.
pub fn derive_constants(instance: &Instance) -> Result<ContinuousConstants, ContinuousError> {
    let alpha = instance
        .distance()
        .strong_convexity_param()
        .ok_or(ContinuousError::NotStronglyConvex)?;
    if let Some(index) = instance
        .population()
        .densities()
        .iter()
        .position(|&rho| rho <= 0.0)
    {
        return Err(ContinuousError::ZeroDensityPiece { index });
    }
    let (_, mu_upper) = instance.population().bounds();
    let lipschitz = instance
        .slots()
        .windows(2)
        .map(|w| 2.0 / (alpha * (w[1].time - w[0].time)))
        .fold(0.0f64, f64::max);
    let (p_min, p_max) = instance.price_bounds();
    Ok(ContinuousConstants {
        alpha,
        mu_upper,
        lipschitz,
        p_min,
        p_max,
    })
}

/// Capacity of the relaxed companion problem:
/// `nu + mu_up * L * delta + 2 mu_up sqrt(2 delta / alpha)`.
pub fn relaxed_capacity(constants: &ContinuousConstants, nu: f64, delta: f64) -> f64 {
    nu + constants.mu_upper * constants.lipschitz * delta
        + 2.0 * constants.mu_upper * (2.0 * delta / constants.alpha).sqrt()
}

/// Largest grid resolution for which the discretization analysis is sharp;
/// requesting a coarser grid still yields valid bounds, merely loose ones.
pub fn delta_max(constants: &ContinuousConstants) -> f64 {
    8.0 / (constants.lipschitz * constants.lipschitz * constants.alpha)
}

/// Rounds every coordinate down to the grid `delta * Z`.
pub fn floor_profile(profile: &PriceProfile, delta: f64) -> PriceProfile {
    PriceProfile::new(
        profile
            .prices()
            .iter()
            .map(|&q| model::floor_to_grid(q, delta))
            .collect(),
    )
}

/// `LB(delta)`: the exact optimum over the clamped price grid, a certified
/// lower bound on the continuous optimum.
///
/// Panics if `delta <= 0`.
pub fn lower_bound(instance: &Instance, delta: f64) -> (f64, PriceProfile) {
    assert!(delta > 0.0, "delta must be positive, got {delta}");
    let grid = instance.price_grid(delta);
    let result = solve(instance, &grid, SolveMode::Exact);
    // the grid always holds a price at or above break-even, so a zero-revenue
    // feasible profile exists and the optimum is finite
    debug_assert!(result.value.is_finite());
    (result.value.to_f64(), result.profile)
}

/// `UB(delta)`: optimum of the relaxed companion problem on the widened
/// grid, plus the price-rounding correction `n * mu_up * L * delta * p_max`.
///
/// Returns `(ub_raw, ub, profile)`.
pub fn upper_bound(
    instance: &Instance,
    delta: f64,
) -> Result<(f64, f64, PriceProfile), ContinuousError> {
    assert!(delta > 0.0, "delta must be positive, got {delta}");
    let constants = derive_constants(instance)?;
    let k_lo = model::grid_floor_index(constants.p_min, delta) - 1;
    let k_hi = model::grid_floor_index(constants.p_max, delta) + 1;
    let grid: Vec<f64> = (k_lo..=k_hi).map(|k| k as f64 * delta).collect();
    let result = solve(instance, &grid, SolveMode::Relaxed(delta));
    debug_assert!(result.value.is_finite());
    let ub_raw = result.value.to_f64();
    let correction = instance.n() as f64
        * constants.mu_upper
        * constants.lipschitz
        * delta
        * constants.p_max;
    Ok((ub_raw, ub_raw + correction, result.profile))
}

/// One [`BoundReport`] per requested resolution; the solves for different
/// resolutions are independent and run in parallel.
pub fn gap_sweep(instance: &Instance, deltas: &[f64]) -> Result<Vec<BoundReport>, ContinuousError> {
    derive_constants(instance)?;
    deltas
        .par_iter()
        .map(|&delta| {
            let (lb, lb_profile) = lower_bound(instance, delta);
            let (ub_raw, ub, ub_profile) = upper_bound(instance, delta)?;
            Ok(BoundReport {
                delta,
                lb,
                lb_profile,
                ub_raw,
                ub,
                ub_profile,
                gap: ub - lb,
            })
        })
        .collect()
}
