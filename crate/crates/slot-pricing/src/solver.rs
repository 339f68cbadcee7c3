//! Exact solver over a finite price set.
//!
//! Price profiles correspond to source-to-sink paths in a digraph `D` whose
//! internal vertices are (slot, price) pairs. An arc means the two endpoint
//! pairs can be neighbors on the lower envelope while every slot in between
//! can be priced out of the picture; the *coverage* predicate expresses
//! exactly that. A slot's revenue depends on both of its region boundaries,
//! so rewards live on pairs of consecutive arcs, i.e. on arcs of the line
//! digraph `L(D)`. The optimum is a maximum-reward source-to-sink path in
//! `L(D)`, found by a longest-path dynamic program in topological order.
//!
//! The line digraph is never materialized: the DP keeps one running value
//! per arc of `D` and enumerates predecessor arcs on the fly, which is the
//! same recurrence with far less memory.

use rayon::prelude::*;

use crate::continuous;
use crate::model::{Instance, PriceProfile, CAPACITY_SLACK};
use crate::real::{ExtendedReal, Interval};

/// Slack counting boundary equality as covered, matching the non-strict
/// comparisons in the coverage conditions.
const COVERAGE_SLACK: f64 = 1e-12;

/// Minimum number of arcs in a layer before the DP fans out to rayon.
const PARALLEL_THRESHOLD: usize = 4096;

/// A vertex of the pricing digraph: slot `0` is the source, slot `n + 1`
/// the sink, and every internal vertex carries a price from `P`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub slot: usize,
    pub price: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcClass {
    /// Source arc: everything left of the head is covered at `-inf`.
    A1,
    /// Internal arc between two (slot, price) pairs with a finite boundary.
    A2,
    /// Sink arc: everything right of the tail is covered at `+inf`.
    A3,
}

/// An arc of `D`. For `A2` arcs the boundary is the crossover point between
/// the tail and head pairs; source and sink arcs carry the matching
/// infinite sentinel.
#[derive(Clone, Copy, Debug)]
pub struct Arc {
    pub tail: u32,
    pub head: u32,
    pub class: ArcClass,
    pub boundary: ExtendedReal,
}

/// The coverage-condition digraph over `([n] x P) + {source, sink}`.
#[derive(Clone, Debug)]
pub struct PricingGraph {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    in_arcs: Vec<Vec<u32>>,
    out_arcs: Vec<Vec<u32>>,
    prices: Vec<f64>,
    n: usize,
}

/// Reward regime for the dynamic program.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMode {
    /// Rewards `q * v` under the instance capacities.
    Exact,
    /// Rewards `(q + delta) * v` under capacities relaxed by the
    /// discretization-error terms of the continuous module.
    Relaxed(f64),
}

/// Outcome of a solve: the optimal value, the realized source-to-sink path,
/// the reconstructed price profile and its per-slot loads.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub value: ExtendedReal,
    pub path: Vec<Vertex>,
    pub profile: PriceProfile,
    pub per_slot_loads: Vec<f64>,
    /// Number of predecessor/successor arc pairs examined by the DP.
    pub transitions: u64,
}

/// Whether slot `ell` is covered by the pair `(i, q)` at the point `at`:
/// slot `ell` priced at `max P` is no better there than slot `i` priced `q`.
///
/// At `-inf`/`+inf` the comparison uses the monotone limit of the pairwise
/// difference.
pub fn covered(
    instance: &Instance,
    ell: usize,
    by: (usize, f64),
    at: ExtendedReal,
    max_price: f64,
) -> bool {
    let (i, q) = by;
    let d = instance.distance();
    match at {
        ExtendedReal::Finite(s) => {
            d.eval(s - instance.slot_time(i)) + q
                <= d.eval(s - instance.slot_time(ell)) + max_price + COVERAGE_SLACK
        }
        ExtendedReal::NegInf => {
            match d.diff_limit(
                instance.slot_time(i),
                instance.slot_time(ell),
                crate::distance::Direction::NegInfinity,
            ) {
                ExtendedReal::NegInf => true,
                ExtendedReal::PosInf => false,
                ExtendedReal::Finite(limit) => limit <= max_price - q + COVERAGE_SLACK,
            }
        }
        ExtendedReal::PosInf => {
            match d.diff_limit(
                instance.slot_time(i),
                instance.slot_time(ell),
                crate::distance::Direction::PosInfinity,
            ) {
                ExtendedReal::NegInf => true,
                ExtendedReal::PosInf => false,
                ExtendedReal::Finite(limit) => limit <= max_price - q + COVERAGE_SLACK,
            }
        }
    }
}

impl PricingGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn source(&self) -> u32 {
        0
    }

    pub fn sink(&self) -> u32 {
        (self.vertices.len() - 1) as u32
    }

    fn vertex_id(&self, slot: usize, price_idx: usize) -> u32 {
        (1 + (slot - 1) * self.prices.len() + price_idx) as u32
    }

    /// The reward of the consecutive arc pair `(a, a2)` meeting at an
    /// internal vertex `(j, q)`: `q * v` (or `(q + delta) * v` in relaxed
    /// mode) where `v` is the mass served by slot `j` between the two
    /// boundaries, or `NegInf` when the capacity would be exceeded or the
    /// boundaries cross.
    ///
    /// Panics unless `a.head == a2.tail` is an internal vertex.
    pub fn pair_reward(
        &self,
        instance: &Instance,
        a: &Arc,
        a2: &Arc,
        mode: SolveMode,
    ) -> ExtendedReal {
        assert_eq!(a.head, a2.tail, "arcs are not consecutive");
        let vertex = self.vertices[a.head as usize];
        let j = vertex.slot - 1;
        let q = vertex.price.expect("meeting vertex must be internal");
        if a.class == ArcClass::A2
            && a2.class == ArcClass::A2
            && a.boundary.total_cmp(&a2.boundary) == std::cmp::Ordering::Greater
        {
            return ExtendedReal::NegInf;
        }
        let volume = instance
            .distance()
            .sublevel_interval(instance.slot_time(j), q)
            .and_then(|s| s.clip(a.boundary, a2.boundary))
            .map_or(0.0, |s| instance.population().interval_mass(&s));
        let (coefficient, capacity) = match mode {
            SolveMode::Exact => (q, instance.slots()[j].capacity),
            SolveMode::Relaxed(delta) => {
                let constants = continuous::derive_constants(instance)
                    .expect("relaxed mode requires continuous-mode constants");
                (
                    q + delta,
                    continuous::relaxed_capacity(&constants, instance.slots()[j].capacity, delta),
                )
            }
        };
        if volume <= capacity + CAPACITY_SLACK {
            ExtendedReal::Finite(coefficient * volume)
        } else {
            ExtendedReal::NegInf
        }
    }
}

/// Builds the digraph `D` for the given sorted, distinct, non-empty `P`.
pub fn build_graph(instance: &Instance, prices: &[f64]) -> PricingGraph {
    assert!(!prices.is_empty(), "price set must be non-empty");
    debug_assert!(
        prices.windows(2).all(|w| w[0] < w[1]),
        "prices must be sorted and distinct"
    );
    let n = instance.n();
    let np = prices.len();
    let max_price = prices[np - 1];

    let mut vertices = Vec::with_capacity(n * np + 2);
    vertices.push(Vertex { slot: 0, price: None });
    for j in 1..=n {
        for &q in prices {
            vertices.push(Vertex { slot: j, price: Some(q) });
        }
    }
    vertices.push(Vertex { slot: n + 1, price: None });

    let source = 0u32;
    let sink = (vertices.len() - 1) as u32;
    let vid = |slot: usize, price_idx: usize| (1 + (slot - 1) * np + price_idx) as u32;

    // Arcs in topological order of (tail slot, head slot): all source arcs
    // first, then per tail slot the internal arcs by increasing head slot,
    // followed by the tail slot's sink arcs.
    let mut arcs = Vec::new();
    for j in 1..=n {
        for (qi, &q) in prices.iter().enumerate() {
            let all_covered =
                (0..j).all(|ell| covered(instance, ell, (j - 1, q), ExtendedReal::NegInf, max_price));
            if all_covered {
                arcs.push(Arc {
                    tail: source,
                    head: vid(j, qi),
                    class: ArcClass::A1,
                    boundary: ExtendedReal::NegInf,
                });
            }
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            for (ri, &r) in prices.iter().enumerate() {
                for (qi, &q) in prices.iter().enumerate() {
                    let sigma = instance.distance().diff_inverse(
                        instance.slot_time(i - 1),
                        instance.slot_time(j - 1),
                        q - r,
                    );
                    let ExtendedReal::Finite(s) = sigma else {
                        continue;
                    };
                    let at = ExtendedReal::Finite(s);
                    // At the boundary the two endpoint pairs cost the same,
                    // so covering ell = i and ell = j reduces to r <= max P
                    // and q <= max P, which hold for prices drawn from P.
                    // Only strictly interior slots need the numeric check
                    // (the boundary itself may come from bisection).
                    let all_covered = (i..j - 1).all(|ell| {
                        covered(instance, ell, (i - 1, r), at, max_price)
                            && covered(instance, ell, (j - 1, q), at, max_price)
                    });
                    if all_covered {
                        arcs.push(Arc {
                            tail: vid(i, ri),
                            head: vid(j, qi),
                            class: ArcClass::A2,
                            boundary: sigma,
                        });
                    }
                }
            }
        }
        for (ri, &r) in prices.iter().enumerate() {
            let all_covered = (i - 1..n)
                .all(|ell| covered(instance, ell, (i - 1, r), ExtendedReal::PosInf, max_price));
            if all_covered {
                arcs.push(Arc {
                    tail: vid(i, ri),
                    head: sink,
                    class: ArcClass::A3,
                    boundary: ExtendedReal::PosInf,
                });
            }
        }
    }

    let mut in_arcs = vec![Vec::new(); vertices.len()];
    let mut out_arcs = vec![Vec::new(); vertices.len()];
    for (idx, arc) in arcs.iter().enumerate() {
        out_arcs[arc.tail as usize].push(idx as u32);
        in_arcs[arc.head as usize].push(idx as u32);
    }
    PricingGraph {
        vertices,
        arcs,
        in_arcs,
        out_arcs,
        prices: prices.to_vec(),
        n,
    }
}

/// Reconstructs the price profile of a source-to-sink path: visited
/// internal vertices keep their price, every other slot gets `max P`.
///
/// Panics when slot indices along the path fail to increase strictly.
pub fn path_to_profile(path: &[Vertex], prices: &[f64], n: usize) -> PriceProfile {
    let max_price = *prices.last().expect("price set must be non-empty");
    let mut profile = vec![max_price; n];
    let mut prev_slot: Option<usize> = None;
    for vertex in path {
        if let Some(prev) = prev_slot {
            assert!(
                vertex.slot > prev,
                "path slots must be strictly increasing: {prev} then {}",
                vertex.slot
            );
        }
        prev_slot = Some(vertex.slot);
        if let Some(price) = vertex.price {
            profile[vertex.slot - 1] = price;
        }
    }
    PriceProfile::new(profile)
}

/// Tie-break key: lexicographically smaller (tail slot, tail price) wins.
fn tail_key(graph: &PricingGraph, arc: u32) -> (usize, f64) {
    let tail = graph.vertices[graph.arcs[arc as usize].tail as usize];
    (tail.slot, tail.price.unwrap_or(f64::NEG_INFINITY))
}

fn key_less(a: (usize, f64), b: (usize, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Solves the pricing problem over the finite price set `prices`.
///
/// The returned value is the maximum reward over source-to-sink paths of
/// the line digraph, which equals the optimum of the pricing problem; the
/// path is reconstructed into an optimal profile. `NegInf` means no
/// feasible profile exists in `P^n` (capacities are over-tight relative to
/// forced demand at every choice of prices).
pub fn solve(instance: &Instance, prices: &[f64], mode: SolveMode) -> SolveResult {
    let graph = build_graph(instance, prices);
    let n = instance.n();
    let np = prices.len();

    // Per-vertex data: price coefficient, capacity, sublevel set, and the
    // CDF shortcut values that make a pair reward two lookups.
    let (coef_of, cap_of): (Vec<f64>, Vec<f64>) = match mode {
        SolveMode::Exact => (
            prices.to_vec(),
            instance.slots().iter().map(|s| s.capacity).collect(),
        ),
        SolveMode::Relaxed(delta) => {
            let constants = continuous::derive_constants(instance)
                .expect("relaxed mode requires continuous-mode constants");
            (
                prices.iter().map(|&q| q + delta).collect(),
                instance
                    .slots()
                    .iter()
                    .map(|s| continuous::relaxed_capacity(&constants, s.capacity, delta))
                    .collect(),
            )
        }
    };
    let vertex_sublevel: Vec<Option<Interval>> = graph
        .vertices
        .iter()
        .map(|v| match (v.slot, v.price) {
            (slot, Some(q)) if (1..=n).contains(&slot) => instance
                .distance()
                .sublevel_interval(instance.slot_time(slot - 1), q),
            _ => None,
        })
        .collect();
    let population = instance.population();
    // Arc `a` seen as the left neighbor of its head: CDF at the clipped
    // left end of the head's sublevel set. Seen as the right neighbor of
    // its tail: CDF at the clipped right end of the tail's sublevel set.
    let cdf_left: Vec<f64> = graph
        .arcs
        .iter()
        .map(|arc| match vertex_sublevel[arc.head as usize] {
            Some(s) => population.cdf(s.lo().max(arc.boundary.to_f64())),
            None => 0.0,
        })
        .collect();
    let cdf_right: Vec<f64> = graph
        .arcs
        .iter()
        .map(|arc| match vertex_sublevel[arc.tail as usize] {
            Some(s) => population.cdf(s.hi().min(arc.boundary.to_f64())),
            None => 0.0,
        })
        .collect();
    let bound_f64: Vec<f64> = graph.arcs.iter().map(|a| a.boundary.to_f64()).collect();
    let is_a2: Vec<bool> = graph.arcs.iter().map(|a| a.class == ArcClass::A2).collect();

    let mut best = vec![f64::NEG_INFINITY; graph.arcs.len()];
    let mut pred: Vec<u32> = vec![u32::MAX; graph.arcs.len()];
    for (idx, arc) in graph.arcs.iter().enumerate() {
        if arc.class == ArcClass::A1 {
            best[idx] = 0.0;
        }
    }

    // Relaxes one outgoing arc against all in-arcs of its tail vertex;
    // sequential over predecessors so the tie-break is deterministic.
    let relax = |a2: u32, best: &[f64]| -> (f64, u32, u64) {
        let arc2 = &graph.arcs[a2 as usize];
        let meeting = arc2.tail as usize;
        let slot = graph.vertices[meeting].slot - 1;
        let (coef, cap) = (
            coef_of[price_index(&graph, meeting)],
            cap_of[slot] + CAPACITY_SLACK,
        );
        let mut value = f64::NEG_INFINITY;
        let mut choice = u32::MAX;
        let mut transitions = 0u64;
        for &a in &graph.in_arcs[meeting] {
            transitions += 1;
            let prefix = best[a as usize];
            if prefix == f64::NEG_INFINITY {
                continue;
            }
            if is_a2[a as usize] && is_a2[a2 as usize] && bound_f64[a as usize] > bound_f64[a2 as usize]
            {
                continue;
            }
            let volume = (cdf_right[a2 as usize] - cdf_left[a as usize]).max(0.0);
            if volume > cap {
                continue;
            }
            let candidate = prefix + coef * volume;
            if candidate > value
                || (candidate == value
                    && (choice == u32::MAX || key_less(tail_key(&graph, a), tail_key(&graph, choice))))
            {
                value = candidate;
                choice = a;
            }
        }
        (value, choice, transitions)
    };

    let mut transitions = 0u64;
    for slot in 1..=n {
        let layer: Vec<u32> = (0..np)
            .flat_map(|qi| graph.out_arcs[graph.vertex_id(slot, qi) as usize].iter().copied())
            .collect();
        let results: Vec<(f64, u32, u64)> = if layer.len() >= PARALLEL_THRESHOLD {
            layer.par_iter().map(|&a2| relax(a2, &best)).collect()
        } else {
            layer.iter().map(|&a2| relax(a2, &best)).collect()
        };
        for (&a2, (value, choice, count)) in layer.iter().zip(results) {
            best[a2 as usize] = value;
            pred[a2 as usize] = choice;
            transitions += count;
        }
    }

    // Best sink arc, same tie-break as the DP reductions.
    let mut final_arc = u32::MAX;
    let mut final_value = f64::NEG_INFINITY;
    for &a in &graph.in_arcs[graph.sink() as usize] {
        let value = best[a as usize];
        if value == f64::NEG_INFINITY {
            continue;
        }
        if value > final_value
            || (value == final_value
                && (final_arc == u32::MAX
                    || key_less(tail_key(&graph, a), tail_key(&graph, final_arc))))
        {
            final_value = value;
            final_arc = a;
        }
    }

    let max_price = prices[np - 1];
    if final_arc == u32::MAX {
        let profile = PriceProfile::new(vec![max_price; n]);
        let per_slot_loads = instance
            .compute_regions(&profile)
            .slots
            .iter()
            .map(|s| s.load)
            .collect();
        return SolveResult {
            value: ExtendedReal::NegInf,
            path: Vec::new(),
            profile,
            per_slot_loads,
            transitions,
        };
    }

    let mut arc_path = vec![final_arc];
    while pred[*arc_path.last().unwrap() as usize] != u32::MAX {
        arc_path.push(pred[*arc_path.last().unwrap() as usize]);
    }
    arc_path.reverse();
    let mut path = vec![graph.vertices[0]];
    for &a in &arc_path {
        path.push(graph.vertices[graph.arcs[a as usize].head as usize]);
    }
    let profile = path_to_profile(&path, prices, n);
    let per_slot_loads = instance
        .compute_regions(&profile)
        .slots
        .iter()
        .map(|s| s.load)
        .collect();
    SolveResult {
        value: ExtendedReal::Finite(final_value),
        path,
        profile,
        per_slot_loads,
        transitions,
    }
}

/// Index into the price list of an internal vertex.
fn price_index(graph: &PricingGraph, vertex: usize) -> usize {
    (vertex - 1) % graph.prices.len()
}
