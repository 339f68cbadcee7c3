//! The user inconvenience function `d` and its analytic queries.
//!
//! Every algorithm in this crate interrogates `d` through a small set of
//! primitives: point evaluation, the inverse of pairwise differences
//! `x -> d(x - t_i) - d(x - t_j)` (with `-inf`/`+inf` conventions when the
//! requested level is never attained), the limits of those differences at
//! the ends of the line, sublevel sets, and the strong-convexity parameter.
//!
//! Two families are built in:
//!
//! * [`DistanceSpec::QuadraticOffset`]: `d(x) = a*x^2 + c`, strongly convex
//!   with parameter `2a`; every pairwise difference is affine, so inverses
//!   are closed-form and the difference limits are infinite.
//! * [`DistanceSpec::HyperbolicOffset`]: `d(x) = a*sqrt(1 + x^2) + c`,
//!   strictly but not strongly convex; the pairwise differences have finite
//!   limits `a*(t_i - t_j)` and `a*(t_j - t_i)`, so some levels are never
//!   attained and the inverse falls back to bracketing bisection.

use thiserror::Error;

use crate::real::{ExtendedReal, Interval};

/// Absolute tolerance on the argument for the bisection fallback.
const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: u32 = 200;

#[derive(Debug, Error, PartialEq)]
pub enum DistanceError {
    #[error("distance parameter a must be positive, got {0}")]
    NonPositiveCurvature(f64),
}

/// Direction of a one-sided limit along the real line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    NegInfinity,
    PosInfinity,
}

/// A strictly convex inconvenience function with unique minimum at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistanceSpec {
    /// `d(x) = a*x^2 + c` with `a > 0`.
    QuadraticOffset { a: f64, c: f64 },
    /// `d(x) = a*sqrt(1 + x^2) + c` with `a > 0`.
    HyperbolicOffset { a: f64, c: f64 },
}

impl DistanceSpec {
    /// Checks the construction invariant `a > 0`.
    pub fn validate(&self) -> Result<(), DistanceError> {
        let a = match self {
            DistanceSpec::QuadraticOffset { a, .. } => *a,
            DistanceSpec::HyperbolicOffset { a, .. } => *a,
        };
        if a.is_nan() || a <= 0.0 {
            return Err(DistanceError::NonPositiveCurvature(a));
        }
        Ok(())
    }

    /// `d(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DistanceSpec::QuadraticOffset { a, c } => a * x * x + c,
            DistanceSpec::HyperbolicOffset { a, c } => a * (1.0 + x * x).sqrt() + c,
        }
    }

    /// The global minimum `d(0)`.
    pub fn min_value(&self) -> f64 {
        match self {
            DistanceSpec::QuadraticOffset { c, .. } => *c,
            DistanceSpec::HyperbolicOffset { a, c } => a + c,
        }
    }

    /// The limit of `s -> d(s - ti) - d(s - tj)` as `s` goes to `direction`.
    ///
    /// Defined for any `ti`, `tj` (equal slots give `Finite(0)`).
    pub fn diff_limit(&self, ti: f64, tj: f64, direction: Direction) -> ExtendedReal {
        if ti == tj {
            return ExtendedReal::Finite(0.0);
        }
        match self {
            DistanceSpec::QuadraticOffset { .. } => {
                // a[(s-ti)^2 - (s-tj)^2] = a (tj-ti)(2s - ti - tj): affine in s.
                let slope_sign_pos = tj > ti;
                match (direction, slope_sign_pos) {
                    (Direction::NegInfinity, true) | (Direction::PosInfinity, false) => {
                        ExtendedReal::NegInf
                    }
                    (Direction::PosInfinity, true) | (Direction::NegInfinity, false) => {
                        ExtendedReal::PosInf
                    }
                }
            }
            DistanceSpec::HyperbolicOffset { a, .. } => {
                // sqrt(1+u^2) behaves like |u|, so the difference tends to
                // a(|s-ti| - |s-tj|).
                match direction {
                    Direction::NegInfinity => ExtendedReal::Finite(a * (ti - tj)),
                    Direction::PosInfinity => ExtendedReal::Finite(a * (tj - ti)),
                }
            }
        }
    }

    /// The inverse of the increasing map `x -> d(x - ti) - d(x - tj)`.
    ///
    /// Returns the unique `x` attaining level `q`, `NegInf` when the
    /// difference stays above `q` everywhere, and `PosInf` when it stays
    /// below `q` everywhere.
    ///
    /// Panics if `ti >= tj` (the map is increasing only for `ti < tj`).
    pub fn diff_inverse(&self, ti: f64, tj: f64, q: f64) -> ExtendedReal {
        assert!(ti < tj, "diff_inverse requires ti < tj, got {ti} >= {tj}");
        match self {
            DistanceSpec::QuadraticOffset { a, .. } => {
                // a(tj-ti)(2x - ti - tj) = q, surjective onto the line.
                let x = (q / a + (tj * tj - ti * ti)) / (2.0 * (tj - ti));
                ExtendedReal::Finite(x)
            }
            DistanceSpec::HyperbolicOffset { .. } => {
                // The difference increases from a(ti-tj) to a(tj-ti), open
                // at both ends: levels at or beyond a limit are unattained.
                let lo_limit = self
                    .diff_limit(ti, tj, Direction::NegInfinity)
                    .as_finite()
                    .expect("hyperbolic limits are finite");
                let hi_limit = self
                    .diff_limit(ti, tj, Direction::PosInfinity)
                    .as_finite()
                    .expect("hyperbolic limits are finite");
                if q <= lo_limit {
                    return ExtendedReal::NegInf;
                }
                if q >= hi_limit {
                    return ExtendedReal::PosInf;
                }
                ExtendedReal::Finite(self.bisect_difference(ti, tj, q))
            }
        }
    }

    /// Bracketing bisection on the increasing difference; only called with
    /// `q` strictly between the two limits, so a bracket always exists.
    fn bisect_difference(&self, ti: f64, tj: f64, q: f64) -> f64 {
        let g = |x: f64| self.eval(x - ti) - self.eval(x - tj);
        let mid = 0.5 * (ti + tj);
        let mut step = 1.0f64.max(tj - ti);
        let (mut lo, mut hi) = (mid, mid);
        while g(lo) > q {
            lo -= step;
            step *= 2.0;
        }
        step = 1.0f64.max(tj - ti);
        while g(hi) < q {
            hi += step;
            step *= 2.0;
        }
        for _ in 0..BISECT_MAX_ITER {
            if hi - lo <= BISECT_TOL {
                break;
            }
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break; // interval no longer splittable in f64
            }
            if g(m) < q {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    }

    /// The sublevel set `S(q) = { x : d(x - tj) + q <= 0 }`.
    ///
    /// `None` when `q > -d(0)`; the single point `{tj}` when `q = -d(0)`.
    pub fn sublevel_interval(&self, tj: f64, q: f64) -> Option<Interval> {
        match self {
            DistanceSpec::QuadraticOffset { a, c } => {
                // a(x-tj)^2 <= -(c+q)
                let rhs = -(c + q) / a;
                if rhs < 0.0 {
                    None
                } else {
                    let r = rhs.sqrt();
                    Some(Interval::new(tj - r, tj + r))
                }
            }
            DistanceSpec::HyperbolicOffset { a, c } => {
                // sqrt(1+(x-tj)^2) <= -(c+q)/a, which needs the bound >= 1.
                let bound = -(c + q) / a;
                if bound < 1.0 {
                    None
                } else {
                    let r = (bound * bound - 1.0).sqrt();
                    Some(Interval::new(tj - r, tj + r))
                }
            }
        }
    }

    /// Strong-convexity parameter: `2a` for the quadratic family, absent for
    /// the hyperbolic one (its curvature decays to 0 at infinity).
    pub fn strong_convexity_param(&self) -> Option<f64> {
        match self {
            DistanceSpec::QuadraticOffset { a, .. } => Some(2.0 * a),
            DistanceSpec::HyperbolicOffset { .. } => None,
        }
    }
}
