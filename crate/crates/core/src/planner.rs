//! Greedy route planners.
//!
//! Every planner tries each reachable unvisited spot as the next move and
//! grows a route behind it:
//!
//! * [`plan_time_series`] walks forward in time, always taking the best
//!   spot at its earliest arrival.
//! * [`plan_whole_greedy`] considers every `(slot, spot)` pair of the
//!   remaining window in descending value order and inserts them wherever
//!   the route still fits. With `width > 1` it branches on the best `width`
//!   feasible pairs at each step and keeps the best completed route.
//!
//! Results are ranked by tour score, one route per distinct next spot.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{
    check_insert, earliest_arrival, tour_score, Instance, Itinerary, PlannerState, SpotId,
    TimePoint, VisitEntry,
};
use crate::scoring::ScoreTable;

/// Number of alternatives presented to the user by default.
pub const DEFAULT_RESULTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Time-series greedy.
    A,
    /// Whole single greedy (search width 1).
    B,
    /// Whole greedy with search width.
    C,
}

impl Algorithm {
    /// Search width actually used for this algorithm.
    pub fn effective_width(self, requested: usize) -> usize {
        match self {
            Algorithm::A | Algorithm::B => 1,
            Algorithm::C => requested,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Algorithm::A),
            "B" | "b" => Ok(Algorithm::B),
            "C" | "c" => Ok(Algorithm::C),
            other => Err(format!("unknown algorithm {other:?}, expected A, B or C")),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            Algorithm::A => 'A',
            Algorithm::B => 'B',
            Algorithm::C => 'C',
        };
        write!(f, "{c}")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PlanRequest<'a> {
    pub instance: &'a Instance,
    pub state: &'a PlannerState,
    pub table: &'a ScoreTable,
    pub n_results: usize,
    pub width: usize,
}

impl<'a> PlanRequest<'a> {
    pub fn new(instance: &'a Instance, state: &'a PlannerState, table: &'a ScoreTable) -> Self {
        Self {
            instance,
            state,
            table,
            n_results: DEFAULT_RESULTS,
            width: 1,
        }
    }

    pub fn with_results(mut self, n: usize) -> Self {
        self.n_results = n;
        self
    }

    pub fn with_width(mut self, width: usize) -> Self {
        self.width = width;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    pub arrival: TimePoint,
    pub spot: SpotId,
    pub value: f64,
}

impl CandidatePair {
    fn entry(&self) -> VisitEntry {
        VisitEntry {
            arrival: self.arrival,
            spot: self.spot,
            score: self.value,
        }
    }
}

/// Total order used everywhere: value descending, then earlier arrival,
/// then lower spot index.
fn pair_order(a: &CandidatePair, b: &CandidatePair) -> Ordering {
    b.value
        .total_cmp(&a.value)
        .then(a.arrival.cmp(&b.arrival))
        .then(a.spot.cmp(&b.spot))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRoute {
    pub itinerary: Itinerary,
    pub tour_score: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedRoutes {
    pub routes: Vec<RankedRoute>,
}

impl RankedRoutes {
    pub fn best(&self) -> Option<&RankedRoute> {
        self.routes.first()
    }

    pub fn best_score(&self) -> Option<f64> {
        self.best().map(|r| r.tour_score)
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }
}

/// Every `(slot, spot)` pair for unvisited spots not already in `z`,
/// sorted best first.
pub fn candidate_pairs(req: &PlanRequest<'_>, z: &Itinerary) -> Vec<CandidatePair> {
    let grid = &req.instance.grid;
    let mut pairs: Vec<CandidatePair> = req
        .state
        .unvisited()
        .filter(|s| !z.contains(*s))
        .flat_map(|spot| {
            grid.points().enumerate().map(move |(p, arrival)| CandidatePair {
                arrival,
                spot,
                value: req.table.value_at(spot, p),
            })
        })
        .collect();
    pairs.sort_by(pair_order);
    pairs
}

/// Ranks routes by score and keeps the best route per next spot.
pub fn rank_and_present(mut routes: Vec<RankedRoute>, n_results: usize) -> RankedRoutes {
    let head = |r: &RankedRoute| r.itinerary.first().map(|e| (e.arrival, e.spot));
    routes.sort_by(|a, b| {
        b.tour_score
            .total_cmp(&a.tour_score)
            .then_with(|| head(a).cmp(&head(b)))
    });
    let mut seen = Vec::new();
    routes.retain(|r| match r.itinerary.first() {
        Some(e) if !seen.contains(&e.spot) => {
            seen.push(e.spot);
            true
        }
        _ => false,
    });
    routes.truncate(n_results);
    RankedRoutes { routes }
}

/// Seeds: every unvisited spot placed at its earliest arrival, if its stay
/// still fits in the window.
fn seeds(req: &PlanRequest<'_>) -> Vec<Itinerary> {
    let inst = req.instance;
    let end = u32::from(inst.grid.end().minutes());
    req.state
        .unvisited()
        .filter_map(|spot| {
            let arrival = earliest_arrival(inst, req.state.position, req.state.now, spot).ok()?;
            if arrival.plus_raw(inst.stay(spot)) > end {
                return None;
            }
            let point = inst.grid.point_index(arrival)?;
            let mut z = Itinerary::new(req.state.position, req.state.now);
            z.entries.push(VisitEntry {
                arrival,
                spot,
                score: req.table.value_at(spot, point),
            });
            Some(z)
        })
        .collect()
}

fn scored(itinerary: Itinerary) -> RankedRoute {
    let tour_score = tour_score(&itinerary);
    RankedRoute {
        itinerary,
        tour_score,
    }
}

/// Time-series greedy: from each first spot, repeatedly move to the
/// unvisited spot with the best value at its earliest arrival.
pub fn plan_time_series(req: &PlanRequest<'_>) -> RankedRoutes {
    let routes: Vec<RankedRoute> = seeds(req)
        .into_par_iter()
        .map(|z| scored(extend_time_series(req, z)))
        .collect();
    rank_and_present(routes, req.n_results)
}

fn extend_time_series(req: &PlanRequest<'_>, mut z: Itinerary) -> Itinerary {
    let inst = req.instance;
    let end = u32::from(inst.grid.end().minutes());
    loop {
        let (from, depart) = z.end_state(inst);
        let best = req
            .state
            .unvisited()
            .filter(|s| !z.contains(*s))
            .filter_map(|spot| {
                let arrival = earliest_arrival(inst, from, depart, spot).ok()?;
                if arrival.plus_raw(inst.stay(spot)) > end {
                    return None;
                }
                let point = inst.grid.point_index(arrival)?;
                Some(CandidatePair {
                    arrival,
                    spot,
                    value: req.table.value_at(spot, point),
                })
            })
            .min_by(pair_order);
        match best {
            Some(pair) => z.entries.push(pair.entry()),
            None => return z,
        }
    }
}

/// Whole greedy with search width `req.width` (width 1 is the single
/// greedy variant).
pub fn plan_whole_greedy(req: &PlanRequest<'_>) -> RankedRoutes {
    let width = req.width.max(1);
    let pairs = candidate_pairs(req, &Itinerary::new(req.state.position, req.state.now));
    let routes: Vec<RankedRoute> = seeds(req)
        .into_par_iter()
        .map(|seed| {
            let mut search = WholeSearch {
                instance: req.instance,
                pairs: &pairs,
                width,
                memo: HashMap::new(),
            };
            search.best_completion(seed)
        })
        .collect();
    rank_and_present(routes, req.n_results)
}

type RouteKey = Vec<(TimePoint, SpotId)>;

struct WholeSearch<'a> {
    instance: &'a Instance,
    pairs: &'a [CandidatePair],
    width: usize,
    // The result of a node depends only on the set of entries already
    // placed, so orderings that reach the same set share one subtree.
    memo: HashMap<RouteKey, RankedRoute>,
}

impl WholeSearch<'_> {
    fn best_completion(&mut self, z: Itinerary) -> RankedRoute {
        let key: RouteKey = z.entries.iter().map(|e| (e.arrival, e.spot)).collect();
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        // the seed stays first: the route is a recommendation for that next move
        let anchor = z.entries[0].arrival;
        let branches: Vec<VisitEntry> = self
            .pairs
            .iter()
            .filter(|p| p.arrival > anchor)
            .map(CandidatePair::entry)
            .filter(|e| check_insert(self.instance, &z, e))
            .take(self.width)
            .collect();
        let result = if branches.is_empty() {
            scored(z)
        } else {
            let mut best: Option<RankedRoute> = None;
            for entry in branches {
                let mut next = z.clone();
                next.insert(entry);
                let candidate = self.best_completion(next);
                if best
                    .as_ref()
                    .is_none_or(|b| candidate.tour_score > b.tour_score)
                {
                    best = Some(candidate);
                }
            }
            best.expect("at least one branch")
        };
        self.memo.insert(key, result.clone());
        result
    }
}

/// Runs the planner matching `algorithm`.
pub fn plan(algorithm: Algorithm, req: &PlanRequest<'_>) -> RankedRoutes {
    match algorithm {
        Algorithm::A => plan_time_series(req),
        Algorithm::B => plan_whole_greedy(&req.with_width(1)),
        Algorithm::C => plan_whole_greedy(req),
    }
}
