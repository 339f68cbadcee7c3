//! Extended reals and closed intervals.
//!
//! Region boundaries routinely take the values `-inf` and `+inf` (a slot can
//! be preferred on an unbounded ray, or never preferred at all), so the
//! numeric vocabulary of the crate is the extended real line with the total
//! order `NegInf < Finite(x) < PosInf`.

use std::cmp::Ordering;
use std::fmt;

/// A point of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    /// Classifies an `f64`, mapping IEEE infinities to the matching variant.
    pub fn from_f64(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else if x == f64::INFINITY {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite(x)
        }
    }

    /// The IEEE representation (`-inf`/`+inf` for the infinite variants).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Total order `NegInf < Finite(x) < PosInf`.
    ///
    /// Finite payloads must not be NaN; they are compared with `total_cmp`,
    /// so `-0.0 < 0.0` in ties, which is irrelevant for interval endpoints.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        use ExtendedReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.total_cmp(b),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.total_cmp(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => write!(f, "-inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => write!(f, "+inf"),
        }
    }
}

/// A nonempty closed interval `[lo, hi]` of the real line.
///
/// Emptiness is expressed as `Option<Interval>` at call sites; a degenerate
/// interval (`lo == hi`) is a valid single point of length zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    /// Panics if `lo > hi` or either endpoint is non-finite.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(
            lo.is_finite() && hi.is_finite() && lo <= hi,
            "invalid interval [{lo}, {hi}]"
        );
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval::new(x, x)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    /// Clips to the (possibly unbounded) range `[lo, hi]` of extended reals.
    pub fn clip(&self, lo: ExtendedReal, hi: ExtendedReal) -> Option<Interval> {
        let lo = self.lo.max(lo.to_f64());
        let hi = self.hi.min(hi.to_f64());
        (lo <= hi).then(|| Interval::new(lo, hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A closed interval with extended-real endpoints (a ray or the whole line
/// are admissible), used for the envelope regions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedInterval {
    pub lo: ExtendedReal,
    pub hi: ExtendedReal,
}

impl ExtendedInterval {
    pub fn new(lo: ExtendedReal, hi: ExtendedReal) -> Self {
        ExtendedInterval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo.total_cmp(&ExtendedReal::Finite(x)) != Ordering::Greater
            && ExtendedReal::Finite(x).total_cmp(&self.hi) != Ordering::Greater
    }
}

impl fmt::Display for ExtendedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_total() {
        use ExtendedReal::*;
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(-1e300) < Finite(0.0));
        assert!(Finite(0.0) < PosInf);
        assert!(NegInf < PosInf);
        assert_eq!(NegInf.total_cmp(&NegInf), Ordering::Equal);
        assert_eq!(PosInf.total_cmp(&PosInf), Ordering::Equal);
    }

    #[test]
    fn min_max() {
        use ExtendedReal::*;
        assert_eq!(NegInf.max(Finite(2.0)), Finite(2.0));
        assert_eq!(PosInf.min(Finite(2.0)), Finite(2.0));
        assert_eq!(Finite(1.0).max(Finite(2.0)), Finite(2.0));
    }

    #[test]
    fn interval_intersection() {
        let a = Interval::new(0.0, 2.0);
        let b = Interval::new(1.0, 3.0);
        assert_eq!(a.intersect(&b), Some(Interval::new(1.0, 2.0)));
        let c = Interval::new(2.5, 3.0);
        assert_eq!(a.intersect(&c), None);
        // touching intervals intersect in a point
        let d = Interval::new(2.0, 3.0);
        assert_eq!(a.intersect(&d), Some(Interval::point(2.0)));
    }

    #[test]
    fn clip_to_rays() {
        let s = Interval::new(-1.0, 1.0);
        assert_eq!(
            s.clip(ExtendedReal::NegInf, ExtendedReal::Finite(0.0)),
            Some(Interval::new(-1.0, 0.0))
        );
        assert_eq!(s.clip(ExtendedReal::Finite(2.0), ExtendedReal::PosInf), None);
        assert_eq!(s.clip(ExtendedReal::NegInf, ExtendedReal::PosInf), Some(s));
    }
}
