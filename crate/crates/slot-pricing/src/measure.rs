//! The population measure as a piecewise-constant density.
//!
//! Interval masses reduce to two lookups in a precomputed prefix-integral
//! table, which keeps every reward evaluated by the solver exact up to
//! round-off. Rays are intersected with the support first; the density
//! vanishes outside it.

use thiserror::Error;

use crate::real::{ExtendedReal, Interval};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("need at least two breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("breakpoints must be strictly increasing at index {index}: {prev} >= {next}")]
    UnsortedBreakpoints { index: usize, prev: f64, next: f64 },
    #[error("expected {expected} densities for {breakpoints} breakpoints, got {got}")]
    LengthMismatch {
        breakpoints: usize,
        expected: usize,
        got: usize,
    },
    #[error("density must be finite and nonnegative at index {index}, got {value}")]
    InvalidDensity { index: usize, value: f64 },
    #[error("total mass must be positive")]
    ZeroTotalMass,
}

/// A finite absolutely continuous measure with piecewise-constant density.
///
/// Piece `k` carries density `densities[k]` on `(breakpoints[k], breakpoints[k+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityModel {
    breakpoints: Vec<f64>,
    densities: Vec<f64>,
    /// `prefix[k]` is the mass of `[breakpoints[0], breakpoints[k]]`.
    prefix: Vec<f64>,
}

impl DensityModel {
    pub fn new(breakpoints: Vec<f64>, densities: Vec<f64>) -> Result<Self, MeasureError> {
        if breakpoints.len() < 2 {
            return Err(MeasureError::TooFewBreakpoints(breakpoints.len()));
        }
        for (index, pair) in breakpoints.windows(2).enumerate() {
            if !pair[0].is_finite() || !pair[1].is_finite() || pair[0] >= pair[1] {
                return Err(MeasureError::UnsortedBreakpoints {
                    index: index + 1,
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        if densities.len() != breakpoints.len() - 1 {
            return Err(MeasureError::LengthMismatch {
                breakpoints: breakpoints.len(),
                expected: breakpoints.len() - 1,
                got: densities.len(),
            });
        }
        for (index, &rho) in densities.iter().enumerate() {
            if !rho.is_finite() || rho < 0.0 {
                return Err(MeasureError::InvalidDensity { index, value: rho });
            }
        }
        let mut prefix = Vec::with_capacity(breakpoints.len());
        prefix.push(0.0);
        for (k, &rho) in densities.iter().enumerate() {
            let piece = rho * (breakpoints[k + 1] - breakpoints[k]);
            prefix.push(prefix[k] + piece);
        }
        if *prefix.last().unwrap() <= 0.0 {
            return Err(MeasureError::ZeroTotalMass);
        }
        Ok(DensityModel {
            breakpoints,
            densities,
            prefix,
        })
    }

    /// Uniform density `rho` on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, rho: f64) -> Result<Self, MeasureError> {
        DensityModel::new(vec![lo, hi], vec![rho])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn total_mass(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// Mass of `(-inf, x]`, i.e. the unnormalized CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        if x <= bp[0] {
            return 0.0;
        }
        if x >= *bp.last().unwrap() {
            return self.total_mass();
        }
        // piece k holds x in (bp[k], bp[k+1]]
        let k = bp.partition_point(|&b| b < x) - 1;
        self.prefix[k] + self.densities[k] * (x - bp[k])
    }

    /// Mass of the closed interval (or ray) with the given endpoints.
    ///
    /// Panics if `lo > hi`. Degenerate intervals have zero mass.
    pub fn mass(&self, lo: ExtendedReal, hi: ExtendedReal) -> f64 {
        assert!(
            lo.total_cmp(&hi) != std::cmp::Ordering::Greater,
            "interval endpoints out of order: {lo} > {hi}"
        );
        let lo_cdf = match lo {
            ExtendedReal::NegInf => 0.0,
            ExtendedReal::Finite(x) => self.cdf(x),
            ExtendedReal::PosInf => self.total_mass(),
        };
        let hi_cdf = match hi {
            ExtendedReal::NegInf => 0.0,
            ExtendedReal::Finite(x) => self.cdf(x),
            ExtendedReal::PosInf => self.total_mass(),
        };
        (hi_cdf - lo_cdf).max(0.0)
    }

    /// Mass of a finite closed interval.
    pub fn interval_mass(&self, iv: &Interval) -> f64 {
        (self.cdf(iv.hi()) - self.cdf(iv.lo())).max(0.0)
    }

    /// `(min, max)` of the density over the pieces as given.
    pub fn bounds(&self) -> (f64, f64) {
        let lower = self.densities.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = self.densities.iter().copied().fold(0.0, f64::max);
        (lower, upper)
    }

    /// Whether the density is interval supported and bounded away from zero,
    /// i.e. every piece has strictly positive density.
    pub fn continuous_mode_eligible(&self) -> bool {
        self.densities.iter().all(|&rho| rho > 0.0)
    }

    /// The support hull, trimmed of leading and trailing zero-density pieces.
    pub fn support(&self) -> Interval {
        let first = self
            .densities
            .iter()
            .position(|&rho| rho > 0.0)
            .expect("total mass is positive");
        let last = self
            .densities
            .iter()
            .rposition(|&rho| rho > 0.0)
            .expect("total mass is positive");
        Interval::new(self.breakpoints[first], self.breakpoints[last + 1])
    }

    /// Inverse CDF: the smallest `x` with `cdf(x) >= m`, for `m` in
    /// `[0, total_mass]`. Used for deterministic inverse-transform sampling.
    pub fn quantile(&self, m: f64) -> f64 {
        debug_assert!((0.0..=self.total_mass()).contains(&m));
        // first piece whose right prefix exceeds m (skips zero-density pieces)
        let k = self.prefix.partition_point(|&p| p < m);
        if k == 0 {
            return self.support().lo();
        }
        let k = (k - 1).min(self.densities.len() - 1);
        if self.densities[k] > 0.0 {
            self.breakpoints[k] + (m - self.prefix[k]) / self.densities[k]
        } else {
            self.breakpoints[k + 1]
        }
    }
}
