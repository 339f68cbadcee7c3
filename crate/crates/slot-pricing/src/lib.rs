//! Revenue-maximizing time-slot pricing under capacity constraints.
//!
//! A company offers a service at `n` time slots, each with a capacity. A
//! non-atomic population of users, modeled as a density over preferred
//! times, reacts to a price profile: each user picks a slot minimizing
//! inconvenience plus price, or opts out when even the best total cost is
//! positive. This crate solves the company's pricing problem two ways:
//!
//! * exactly over a finite price set, by a longest-path dynamic program on
//!   the line digraph of a coverage-condition digraph ([`solver`]);
//! * with certified lower/upper bounds when prices range over all reals,
//!   by solving on a `delta`-grid and on a capacity-relaxed companion
//!   problem ([`continuous`]).
//!
//! The building blocks are the inconvenience function ([`distance`]), the
//! population measure ([`measure`]) and the user-choice regions
//! ([`model`]). A brute-force reference implementation lives in [`oracle`].
//!
//! ```
//! use slot_pricing::model::Slot;
//! use slot_pricing::{solve, DensityModel, DistanceSpec, Instance, SolveMode};
//!
//! let instance = Instance::new(
//!     DistanceSpec::QuadraticOffset { a: 1.0, c: -1.0 },
//!     vec![
//!         Slot { time: 0.0, capacity: 2.0 },
//!         Slot { time: 2.0, capacity: 2.0 },
//!     ],
//!     DensityModel::uniform(-1.0, 3.0, 0.5)?,
//! )?;
//! let result = solve(&instance, &[0.5, 1.0], SolveMode::Exact);
//! assert_eq!(result.profile.prices(), &[0.5, 0.5]);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! See the book under `book/` for a guided tour.

pub mod continuous;
pub mod distance;
pub mod measure;
pub mod model;
pub mod oracle;
pub mod real;
pub mod solver;

pub use distance::{Direction, DistanceSpec};
pub use measure::DensityModel;
pub use model::{Instance, PriceProfile, RegionReport, Slot};
pub use real::{ExtendedInterval, ExtendedReal, Interval};
pub use solver::{solve, SolveMode, SolveResult};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::distance::DistanceSpec;
    use crate::measure::DensityModel;
    use crate::model::{Instance, Slot};

    /// Quadratic a=1, c=-1; slots at 0 and 2 with capacity 2; uniform
    /// density 0.5 on [-1, 3].
    pub fn ref1() -> Instance {
        Instance::new(
            DistanceSpec::QuadraticOffset { a: 1.0, c: -1.0 },
            vec![
                Slot { time: 0.0, capacity: 2.0 },
                Slot { time: 2.0, capacity: 2.0 },
            ],
            DensityModel::uniform(-1.0, 3.0, 0.5).unwrap(),
        )
        .unwrap()
    }
}
