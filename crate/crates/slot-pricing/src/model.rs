//! Problem instances, user-choice regions, revenue and price ranges.
//!
//! A user with preferred time `s` pays total cost `d(s - t_j) + p_j` for
//! slot `j`, picks a minimizing slot, and opts out when even the minimum is
//! positive. The set of preferred times where slot `j` wins the comparison
//! is the envelope region; intersecting it with the sublevel set of the
//! slot's own price gives the served region whose mass is the service load.

use thiserror::Error;

use crate::distance::{DistanceError, DistanceSpec};
use crate::measure::DensityModel;
use crate::real::{ExtendedInterval, ExtendedReal, Interval};

/// Absolute slack when comparing a load against a capacity, absorbing
/// round-off in prefix-integral masses at exact boundary loads.
pub const CAPACITY_SLACK: f64 = 1e-12;

/// Relative tolerance when deciding whether a value sits on a grid multiple.
const GRID_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("instance needs at least one slot")]
    NoSlots,
    #[error("slot times must be strictly increasing at slot {index}: {prev} >= {next}")]
    UnsortedSlots { index: usize, prev: f64, next: f64 },
    #[error("slot {index} capacity must be finite and nonnegative, got {value}")]
    InvalidCapacity { index: usize, value: f64 },
    #[error("slot {index} time must be finite, got {value}")]
    InvalidTime { index: usize, value: f64 },
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// One service slot: a time and a capacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub time: f64,
    pub capacity: f64,
}

/// A pricing problem instance.
#[derive(Clone, Debug)]
pub struct Instance {
    distance: DistanceSpec,
    slots: Vec<Slot>,
    population: DensityModel,
}

/// One price per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceProfile(Vec<f64>);

impl PriceProfile {
    pub fn new(prices: Vec<f64>) -> Self {
        PriceProfile(prices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prices(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for PriceProfile {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// Regions and load of a single slot under a fixed price profile.
#[derive(Clone, Copy, Debug)]
pub struct SlotRegions {
    /// Preferred times where this slot minimizes the total cost; `None` when
    /// the slot is never strictly preferred (zero-length regions included).
    pub envelope: Option<ExtendedInterval>,
    /// Envelope region clipped to the slot's sublevel set.
    pub served: Option<Interval>,
    /// Population mass of the served region.
    pub load: f64,
    /// `load <= capacity` up to [`CAPACITY_SLACK`].
    pub capacity_ok: bool,
}

/// Full evaluation of a price profile.
#[derive(Clone, Debug)]
pub struct RegionReport {
    pub slots: Vec<SlotRegions>,
    pub revenue: f64,
    pub feasible: bool,
}

impl Instance {
    pub fn new(
        distance: DistanceSpec,
        slots: Vec<Slot>,
        population: DensityModel,
    ) -> Result<Self, InstanceError> {
        distance.validate()?;
        if slots.is_empty() {
            return Err(InstanceError::NoSlots);
        }
        for (index, slot) in slots.iter().enumerate() {
            if !slot.time.is_finite() {
                return Err(InstanceError::InvalidTime {
                    index,
                    value: slot.time,
                });
            }
            if !slot.capacity.is_finite() || slot.capacity < 0.0 {
                return Err(InstanceError::InvalidCapacity {
                    index,
                    value: slot.capacity,
                });
            }
        }
        for (index, pair) in slots.windows(2).enumerate() {
            if pair[0].time >= pair[1].time {
                return Err(InstanceError::UnsortedSlots {
                    index: index + 1,
                    prev: pair[0].time,
                    next: pair[1].time,
                });
            }
        }
        Ok(Instance {
            distance,
            slots,
            population,
        })
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn distance(&self) -> &DistanceSpec {
        &self.distance
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot_time(&self, j: usize) -> f64 {
        self.slots[j].time
    }

    pub fn population(&self) -> &DensityModel {
        &self.population
    }

    /// Envelope and served regions, loads, revenue and feasibility for `p`.
    ///
    /// The envelope region of slot `j` is bounded below by the largest
    /// crossover point against the slots on its left and above by the
    /// smallest crossover against the slots on its right; all pairs are
    /// consulted since a non-adjacent slot can dominate under arbitrary
    /// prices.
    pub fn compute_regions(&self, p: &PriceProfile) -> RegionReport {
        assert_eq!(p.len(), self.n(), "profile length must match slot count");
        let n = self.n();
        let mut slots = Vec::with_capacity(n);
        let mut revenue = 0.0;
        let mut feasible = true;
        for j in 0..n {
            let mut lo = ExtendedReal::NegInf;
            for k in 0..j {
                // d(x-tj)+pj <= d(x-tk)+pk holds right of the crossover
                let sigma = self
                    .distance
                    .diff_inverse(self.slot_time(k), self.slot_time(j), p[j] - p[k]);
                lo = lo.max(sigma);
            }
            let mut hi = ExtendedReal::PosInf;
            for k in j + 1..n {
                let sigma = self
                    .distance
                    .diff_inverse(self.slot_time(j), self.slot_time(k), p[k] - p[j]);
                hi = hi.min(sigma);
            }
            // zero-length regions are reported as empty: they carry no mass
            let envelope = (lo.total_cmp(&hi) == std::cmp::Ordering::Less)
                .then_some(ExtendedInterval::new(lo, hi));
            let served = self
                .distance
                .sublevel_interval(self.slot_time(j), p[j])
                .and_then(|s| if envelope.is_some() { s.clip(lo, hi) } else { None });
            let load = served.map_or(0.0, |s| self.population.interval_mass(&s));
            let capacity_ok = load <= self.slots[j].capacity + CAPACITY_SLACK;
            feasible &= capacity_ok;
            revenue += p[j] * load;
            slots.push(SlotRegions {
                envelope,
                served,
                load,
                capacity_ok,
            });
        }
        RegionReport {
            slots,
            revenue,
            feasible,
        }
    }

    /// The revenue of `p`, or `NegInf` when some capacity is exceeded.
    pub fn revenue_or_infeasible(&self, p: &PriceProfile) -> ExtendedReal {
        let report = self.compute_regions(p);
        if report.feasible {
            ExtendedReal::Finite(report.revenue)
        } else {
            ExtendedReal::NegInf
        }
    }

    /// The clamped price range `(p_min, p_max)` outside of which no price is
    /// ever useful: `p_max = -d(0)` and `p_min` is the smallest pairwise
    /// cost difference over the population support.
    ///
    /// Each pairwise difference is monotone over the line, so its infimum
    /// over the support is attained at the left endpoint for ordered pairs
    /// and at the right endpoint for reversed ones.
    pub fn price_bounds(&self) -> (f64, f64) {
        let p_max = -self.distance.min_value();
        let support = self.population.support();
        // the diagonal pair contributes 0
        let mut inf_diff = 0.0f64;
        for j in 0..self.n() {
            for k in j + 1..self.n() {
                let (tj, tk) = (self.slot_time(j), self.slot_time(k));
                let at_left = self.distance.eval(support.lo() - tj) - self.distance.eval(support.lo() - tk);
                let at_right = self.distance.eval(support.hi() - tk) - self.distance.eval(support.hi() - tj);
                inf_diff = inf_diff.min(at_left).min(at_right);
            }
        }
        (p_max.min(inf_diff), p_max)
    }

    /// All multiples of `delta` in `[p_min, p_max + delta)`: the finite grid
    /// whose optimum equals the optimum over all of `delta * Z`.
    ///
    /// Panics if `delta <= 0`.
    pub fn price_grid(&self, delta: f64) -> Vec<f64> {
        assert!(delta > 0.0, "delta must be positive, got {delta}");
        let (p_min, p_max) = self.price_bounds();
        let k_lo = grid_ceil_index(p_min, delta);
        // largest k with k*delta < p_max + delta
        let r = p_max / delta;
        let k_hi = match near_integer(r) {
            Some(m) => m,
            None => r.floor() as i64 + 1,
        };
        (k_lo..=k_hi).map(|k| k as f64 * delta).collect()
    }
}

fn near_integer(r: f64) -> Option<i64> {
    let k = r.round();
    ((r - k).abs() <= GRID_SNAP_TOL * r.abs().max(1.0)).then_some(k as i64)
}

/// Largest grid index `k` with `k * delta <= x`, snapping values within a
/// relative tolerance of a multiple onto it.
pub fn grid_floor_index(x: f64, delta: f64) -> i64 {
    let r = x / delta;
    near_integer(r).unwrap_or_else(|| r.floor() as i64)
}

/// Smallest grid index `k` with `k * delta >= x`, with the same snapping.
pub fn grid_ceil_index(x: f64, delta: f64) -> i64 {
    let r = x / delta;
    near_integer(r).unwrap_or_else(|| r.ceil() as i64)
}

/// Rounds `x` down to the grid `delta * Z`.
///
/// Grid values are produced as `k * delta` by integer multiplication so that
/// re-rounding a grid point reproduces it bit-for-bit.
pub fn floor_to_grid(x: f64, delta: f64) -> f64 {
    grid_floor_index(x, delta) as f64 * delta
}

/// All multiples of `delta` in the closed interval `[lo, hi]`.
pub fn delta_grid(lo: f64, hi: f64, delta: f64) -> Vec<f64> {
    assert!(delta > 0.0, "delta must be positive, got {delta}");
    let k_lo = grid_ceil_index(lo, delta);
    let k_hi = grid_floor_index(hi, delta);
    (k_lo..=k_hi).map(|k| k as f64 * delta).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DensityModel;
    use crate::testutil::ref1;

    #[test]
    fn construction_errors() {
        let pop = DensityModel::uniform(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            Instance::new(DistanceSpec::QuadraticOffset { a: 1.0, c: 0.0 }, vec![], pop.clone()),
            Err(InstanceError::NoSlots)
        ));
        assert!(matches!(
            Instance::new(
                DistanceSpec::QuadraticOffset { a: 1.0, c: 0.0 },
                vec![Slot { time: 1.0, capacity: 1.0 }, Slot { time: 1.0, capacity: 1.0 }],
                pop.clone()
            ),
            Err(InstanceError::UnsortedSlots { .. })
        ));
        assert!(matches!(
            Instance::new(
                DistanceSpec::QuadraticOffset { a: 1.0, c: 0.0 },
                vec![Slot { time: 1.0, capacity: -1.0 }],
                pop.clone()
            ),
            Err(InstanceError::InvalidCapacity { .. })
        ));
        assert!(matches!(
            Instance::new(
                DistanceSpec::QuadraticOffset { a: -1.0, c: 0.0 },
                vec![Slot { time: 1.0, capacity: 1.0 }],
                pop
            ),
            Err(InstanceError::Distance(_))
        ));
    }

    #[test]
    fn regions_symmetric_prices() {
        let inst = ref1();
        let report = inst.compute_regions(&PriceProfile::new(vec![0.0, 0.0]));
        let r0 = &report.slots[0];
        let r1 = &report.slots[1];
        assert_eq!(
            r0.envelope,
            Some(ExtendedInterval::new(ExtendedReal::NegInf, ExtendedReal::Finite(1.0)))
        );
        assert_eq!(
            r1.envelope,
            Some(ExtendedInterval::new(ExtendedReal::Finite(1.0), ExtendedReal::PosInf))
        );
        assert_eq!(r0.served, Some(Interval::new(-1.0, 1.0)));
        assert_eq!(r1.served, Some(Interval::new(1.0, 3.0)));
        assert!((r0.load - 1.0).abs() <= 1e-12);
        assert!((r1.load - 1.0).abs() <= 1e-12);
        assert_eq!(report.revenue, 0.0);
        assert!(report.feasible);
    }

    #[test]
    fn regions_asymmetric_prices() {
        let inst = ref1();
        let report = inst.compute_regions(&PriceProfile::new(vec![0.5, 1.0]));
        let r0 = &report.slots[0];
        let r1 = &report.slots[1];
        // crossover sigma_12(0.5) = 1.125; sublevel of slot 1 has half-width sqrt(0.5)
        let hw = 0.5f64.sqrt();
        let s0 = r0.served.unwrap();
        assert!((s0.lo() + hw).abs() <= 1e-12 && (s0.hi() - hw).abs() <= 1e-12);
        assert!((r0.load - hw).abs() <= 1e-12);
        // slot 2 at the break-even price keeps only its own time
        assert_eq!(r1.served, Some(Interval::point(2.0)));
        assert_eq!(r1.load, 0.0);
        assert!((report.revenue - 0.5 * hw).abs() <= 1e-12);
        assert!((report.revenue - 0.35355).abs() <= 1e-5);
        assert!(report.feasible);
    }

    #[test]
    fn single_slot_above_break_even_serves_nobody() {
        let inst = Instance::new(
            DistanceSpec::QuadraticOffset { a: 1.0, c: -1.0 },
            vec![Slot { time: 0.0, capacity: 10.0 }],
            DensityModel::uniform(-1.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        let report = inst.compute_regions(&PriceProfile::new(vec![1.25]));
        assert_eq!(report.slots[0].load, 0.0);
        assert_eq!(report.revenue, 0.0);
    }

    #[test]
    fn revenue_or_infeasible_examples() {
        let inst = ref1();
        let hw = 0.5f64.sqrt();
        let value = inst.revenue_or_infeasible(&PriceProfile::new(vec![0.5, 0.5]));
        match value {
            ExtendedReal::Finite(v) => assert!((v - 2.0 * 0.5 * hw).abs() <= 1e-12),
            other => panic!("expected finite revenue, got {other}"),
        }

        let tight = Instance::new(
            *inst.distance(),
            vec![
                Slot { time: 0.0, capacity: 0.5 },
                Slot { time: 2.0, capacity: 2.0 },
            ],
            inst.population().clone(),
        )
        .unwrap();
        assert_eq!(
            tight.revenue_or_infeasible(&PriceProfile::new(vec![0.5, 0.5])),
            ExtendedReal::NegInf
        );

        // break-even prices with ample capacity are always feasible
        let value = inst.revenue_or_infeasible(&PriceProfile::new(vec![1.0, 1.0]));
        match value {
            ExtendedReal::Finite(v) => assert!(v >= 0.0),
            other => panic!("expected finite revenue, got {other}"),
        }
    }

    #[test]
    fn price_bounds_examples() {
        let inst = ref1();
        let (_, p_max) = inst.price_bounds();
        assert_eq!(p_max, 1.0);

        let inst2 = Instance::new(
            DistanceSpec::QuadraticOffset { a: 1.0, c: -1.0 },
            vec![
                Slot { time: 1.0, capacity: 1.0 },
                Slot { time: 2.0, capacity: 1.0 },
            ],
            DensityModel::uniform(0.0, 3.0, 1.0).unwrap(),
        )
        .unwrap();
        let (p_min, p_max) = inst2.price_bounds();
        assert_eq!(p_max, 1.0);
        assert!((p_min + 3.0).abs() <= 1e-12);

        let single = Instance::new(
            DistanceSpec::QuadraticOffset { a: 1.0, c: 0.5 },
            vec![Slot { time: 0.0, capacity: 1.0 }],
            DensityModel::uniform(0.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        // p_max = -d(0) = -0.5 < 0, so p_min clamps to p_max
        assert_eq!(single.price_bounds(), (-0.5, -0.5));
    }

    #[test]
    fn price_grid_examples() {
        // p_min = -3, p_max = 1
        let inst = Instance::new(
            DistanceSpec::QuadraticOffset { a: 1.0, c: -1.0 },
            vec![
                Slot { time: 1.0, capacity: 1.0 },
                Slot { time: 2.0, capacity: 1.0 },
            ],
            DensityModel::uniform(0.0, 3.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(inst.price_grid(1.0), vec![-3.0, -2.0, -1.0, 0.0, 1.0]);

        let grid = inst.price_grid(0.5);
        assert_eq!(grid.first(), Some(&-3.0));
        assert_eq!(grid.last(), Some(&1.0));
        assert_eq!(grid.len(), 9);

        // single slot at break-even zero: the grid is the one useful price
        let flat = Instance::new(
            DistanceSpec::QuadraticOffset { a: 1.0, c: 0.0 },
            vec![Slot { time: 0.0, capacity: 1.0 }],
            DensityModel::uniform(-1.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(flat.price_bounds(), (0.0, 0.0));
        assert_eq!(flat.price_grid(0.25), vec![0.0]);
    }

    #[test]
    #[should_panic(expected = "delta must be positive")]
    fn price_grid_rejects_nonpositive_delta() {
        ref1().price_grid(0.0);
    }

    #[test]
    fn total_served_mass_never_exceeds_population() {
        use rand::Rng;
        let mut rng = crate::oracle::gen::seeded_rng(0x10AD);
        for trial in 0..200 {
            let family = if trial % 2 == 0 {
                crate::oracle::gen::Family::Quadratic
            } else {
                crate::oracle::gen::Family::Hyperbolic
            };
            let inst = crate::oracle::gen::random_instance(&mut rng, family);
            let (p_min, p_max) = inst.price_bounds();
            let profile = PriceProfile::new(
                (0..inst.n())
                    .map(|_| rng.gen_range(p_min.max(p_max - 3.0)..=p_max + 0.5))
                    .collect(),
            );
            let report = inst.compute_regions(&profile);
            let total: f64 = report.slots.iter().map(|s| s.load).sum();
            assert!(total <= inst.population().total_mass() + 1e-9);
        }
    }

    #[test]
    fn grid_helpers_are_drift_free() {
        // 0.7 / 0.1 = 6.999... in f64; the snap keeps it on index 7
        assert_eq!(grid_floor_index(0.7, 0.1), 7);
        assert_eq!(grid_ceil_index(0.7, 0.1), 7);
        assert_eq!(grid_floor_index(0.74, 0.1), 7);
        assert_eq!(grid_ceil_index(0.74, 0.1), 8);
        // re-rounding a generated grid point is the identity, bit for bit
        for delta in [0.1, 0.25, 0.025, 1.0 / 3.0] {
            for k in -50..=50i64 {
                let x = k as f64 * delta;
                assert_eq!(floor_to_grid(x, delta), x, "delta {delta} k {k}");
            }
        }
        assert_eq!(delta_grid(-0.5, 1.0, 0.5), vec![-0.5, 0.0, 0.5, 1.0]);
        assert_eq!(delta_grid(0.3, 1.0, 0.5), vec![0.5, 1.0]);
    }
}
