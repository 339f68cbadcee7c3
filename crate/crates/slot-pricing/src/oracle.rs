//! Brute-force reference implementations and randomized instances.
//!
//! The enumerator walks every profile in `P^n` through
//! [`Instance::compute_regions`] and never touches the graph solver, so
//! agreement between the two is a genuine cross-implementation check. The
//! Monte-Carlo sampler validates the user-choice rule itself by simulating
//! a finite population.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{Instance, PriceProfile};
use crate::real::ExtendedReal;

pub const DEFAULT_ENUM_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("enumeration over {profiles} profiles exceeds the limit {limit}")]
    TooManyProfiles { profiles: u64, limit: u64 },
}

/// Result of exhaustive enumeration over `P^n`.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: ExtendedReal,
    /// Every profile attaining the optimum, up to ties of `1e-12`, in
    /// lexicographic order of price indices.
    pub argmax_profiles: Vec<PriceProfile>,
    pub profiles_evaluated: u64,
}

const TIE_TOL: f64 = 1e-12;

/// Evaluates every profile in `P^n` and returns the exact optimum.
pub fn enumerate_opt(
    instance: &Instance,
    prices: &[f64],
    limit: u64,
) -> Result<OracleResult, OracleError> {
    assert!(!prices.is_empty(), "price set must be non-empty");
    let n = instance.n() as u32;
    let profiles = (prices.len() as u64)
        .checked_pow(n)
        .filter(|&count| count <= limit)
        .ok_or(OracleError::TooManyProfiles {
            profiles: (prices.len() as f64).powi(n as i32) as u64,
            limit,
        })?;

    // rank r spells out the profile in lexicographic order (most
    // significant digit = slot 0), making the parallel map deterministic
    let profile_at = |rank: u64| -> PriceProfile {
        let mut digits = vec![0usize; n as usize];
        let mut rest = rank;
        for digit in digits.iter_mut().rev() {
            *digit = (rest % prices.len() as u64) as usize;
            rest /= prices.len() as u64;
        }
        PriceProfile::new(digits.into_iter().map(|i| prices[i]).collect())
    };
    let values: Vec<ExtendedReal> = (0..profiles)
        .into_par_iter()
        .map(|rank| instance.revenue_or_infeasible(&profile_at(rank)))
        .collect();
    let best = values
        .iter()
        .copied()
        .fold(ExtendedReal::NegInf, ExtendedReal::max);

    let mut argmax_profiles = Vec::new();
    if let ExtendedReal::Finite(best_value) = best {
        for (rank, value) in values.iter().enumerate() {
            if let ExtendedReal::Finite(v) = value {
                if (best_value - v).abs() <= TIE_TOL {
                    argmax_profiles.push(profile_at(rank as u64));
                }
            }
        }
    }

    Ok(OracleResult {
        value: best,
        argmax_profiles,
        profiles_evaluated: profiles,
    })
}

/// Estimates per-slot loads by simulating `samples` users drawn from the
/// population by inverse-transform sampling with a seeded generator.
///
/// Each user picks the lowest-index slot minimizing `d(s - t_j) + p_j` and
/// is served only when that minimum is nonpositive. Estimates are scaled by
/// `total_mass / samples`.
pub fn monte_carlo_loads(
    instance: &Instance,
    profile: &PriceProfile,
    samples: u64,
    seed: u64,
) -> Vec<f64> {
    assert!(samples >= 1, "need at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = instance.population().total_mass();
    let mut counts = vec![0u64; instance.n()];
    for _ in 0..samples {
        let u: f64 = rng.gen::<f64>();
        let s = instance.population().quantile(u * total);
        let mut best_cost = f64::INFINITY;
        let mut best_slot = 0usize;
        for j in 0..instance.n() {
            let cost = instance.distance().eval(s - instance.slot_time(j)) + profile[j];
            if cost < best_cost {
                best_cost = cost;
                best_slot = j;
            }
        }
        if best_cost <= 0.0 {
            counts[best_slot] += 1;
        }
    }
    counts
        .into_iter()
        .map(|c| c as f64 * total / samples as f64)
        .collect()
}

/// `true` when the graph solver and the enumerator agree on the optimum.
pub fn verify_solver(instance: &Instance, prices: &[f64]) -> Result<bool, OracleError> {
    let oracle = enumerate_opt(instance, prices, DEFAULT_ENUM_LIMIT)?;
    let solved = crate::solver::solve(instance, prices, crate::solver::SolveMode::Exact);
    Ok(match (solved.value, oracle.value) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs() <= 1e-9,
        (a, b) => a == b,
    })
}

/// Seeded random instances and price sets for the regression suites.
pub mod gen {
    use super::*;
    use crate::distance::DistanceSpec;
    use crate::measure::DensityModel;
    use crate::model::Slot;

    /// Instance family drawn by [`random_instance`].
    #[derive(Clone, Copy, Debug, PartialEq, Eq)]
    pub enum Family {
        Quadratic,
        Hyperbolic,
    }

    /// A small random instance: n in {2,3}, slot times sorted in 0..10
    /// with minimum gap 0.5, 1-4 density pieces with rates in 0.1..1,
    /// capacities uniform between 0 and the total mass.
    pub fn random_instance(rng: &mut impl Rng, family: Family) -> Instance {
        let n = rng.gen_range(2..=3usize);
        let times = random_times(rng, n, 0.0, 10.0, 0.5);
        let a = rng.gen_range(0.2..=2.0);
        let distance = match family {
            // c in [-2, -0.1] keeps the break-even price -d(0) positive
            Family::Quadratic => DistanceSpec::QuadraticOffset {
                a,
                c: rng.gen_range(-2.0..=-0.1),
            },
            Family::Hyperbolic => DistanceSpec::HyperbolicOffset {
                a,
                c: -a + rng.gen_range(-2.0..=-0.1),
            },
        };
        let population = random_density(rng, 1..=4, -1.0, 11.0, 0.1..=1.0);
        let total = population.total_mass();
        let slots = times
            .into_iter()
            .map(|time| Slot {
                time,
                capacity: rng.gen_range(0.0..=total),
            })
            .collect();
        Instance::new(distance, slots, population).unwrap()
    }

    /// A compact strongly convex, continuous-mode-eligible instance whose
    /// clamped price range stays small, so fine grids remain tractable.
    pub fn random_compact_instance(rng: &mut impl Rng) -> Instance {
        let n = rng.gen_range(2..=3usize);
        let times = random_times(rng, n, 0.0, 2.0, 0.5);
        let distance = DistanceSpec::QuadraticOffset {
            a: rng.gen_range(0.2..=0.6),
            c: rng.gen_range(-1.5..=-0.2),
        };
        let population = random_density(rng, 1..=3, -0.5, 3.0, 0.1..=1.0);
        let total = population.total_mass();
        let slots = times
            .into_iter()
            .map(|time| Slot {
                time,
                capacity: rng.gen_range(0.1 * total..=total),
            })
            .collect();
        Instance::new(distance, slots, population).unwrap()
    }

    /// `k` distinct sorted prices around the useful range of `instance`.
    pub fn random_prices(rng: &mut impl Rng, instance: &Instance, k: usize) -> Vec<f64> {
        let (p_min, p_max) = instance.price_bounds();
        let lo = p_min.max(p_max - 2.5);
        loop {
            let mut prices: Vec<f64> = (0..k)
                .map(|_| rng.gen_range(lo..=p_max + 0.3))
                .collect();
            prices.sort_by(f64::total_cmp);
            prices.dedup();
            if prices.len() == k {
                return prices;
            }
        }
    }

    fn random_times(rng: &mut impl Rng, n: usize, lo: f64, hi: f64, min_gap: f64) -> Vec<f64> {
        loop {
            let mut times: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
            times.sort_by(f64::total_cmp);
            if times.windows(2).all(|w| w[1] - w[0] >= min_gap) {
                return times;
            }
        }
    }

    fn random_density(
        rng: &mut impl Rng,
        pieces: std::ops::RangeInclusive<usize>,
        lo: f64,
        hi: f64,
        rho: std::ops::RangeInclusive<f64>,
    ) -> DensityModel {
        let m = rng.gen_range(pieces);
        let breakpoints = loop {
            let mut bp: Vec<f64> = (0..=m).map(|_| rng.gen_range(lo..=hi)).collect();
            bp.sort_by(f64::total_cmp);
            if bp.windows(2).all(|w| w[1] - w[0] >= 0.2) {
                break bp;
            }
        };
        let densities: Vec<f64> = (0..m)
            .map(|_| rng.gen_range(rho.clone()))
            .collect();
        DensityModel::new(breakpoints, densities).unwrap()
    }

    /// Deterministic generator for a recorded master seed.
    pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }
}
