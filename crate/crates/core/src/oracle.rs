//! Exact reference solver.
//!
//! Exhaustively maximises the future expected score over all slot-quantized
//! itineraries: after each visit the next spot may be any remaining spot at
//! any slot boundary it can physically reach, as long as its stay ends by
//! the end of the tour. The first visit is fixed at its earliest arrival,
//! matching how the planners frame "go to `s` next".
//!
//! Exponential in the number of spots, so instances are bounded by
//! [`OracleLimits`]; an instance over the limits is refused rather than
//! solved approximately.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{earliest_arrival, Itinerary, Position, SpotId, TimePoint, VisitEntry};
use crate::planner::{rank_and_present, PlanRequest, RankedRoute, RankedRoutes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_spots: usize,
    pub max_slots: usize,
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_spots: 12,
            max_slots: 48,
            node_budget: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance has {found} {what}, oracle limit is {limit}")]
    TooLarge {
        what: &'static str,
        found: usize,
        limit: usize,
    },
    #[error("node budget of {0} exhausted")]
    BudgetExceeded(u64),
}

/// Memoised state: where we stand, which spots remain, when we leave.
type Key = (usize, u64, u16);

/// Best continuation: value and the next visit achieving it.
type Step = (f64, Option<(SpotId, TimePoint)>);

pub struct Oracle<'a> {
    req: PlanRequest<'a>,
    limits: OracleLimits,
    memo: HashMap<Key, Step>,
    nodes: u64,
}

impl<'a> Oracle<'a> {
    pub fn new(req: PlanRequest<'a>, limits: OracleLimits) -> Result<Self, OracleError> {
        let n_spots = req.instance.n_spots();
        let n_slots = req.instance.grid.n_slots();
        if n_spots > limits.max_spots.min(64) {
            return Err(OracleError::TooLarge {
                what: "spots",
                found: n_spots,
                limit: limits.max_spots.min(64),
            });
        }
        if n_slots > limits.max_slots {
            return Err(OracleError::TooLarge {
                what: "slots",
                found: n_slots,
                limit: limits.max_slots,
            });
        }
        Ok(Self {
            req,
            limits,
            memo: HashMap::new(),
            nodes: 0,
        })
    }

    /// Nodes expanded so far (memo misses).
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn position_index(&self, p: Position) -> usize {
        self.req.instance.matrix.index_of(p)
    }

    /// Highest score obtainable from `remaining` after leaving `from` at
    /// `t_after`.
    pub fn exact_ev(
        &mut self,
        from: Position,
        remaining: &BTreeSet<SpotId>,
        t_after: TimePoint,
    ) -> Result<f64, OracleError> {
        let mask = remaining.iter().fold(0u64, |m, s| m | (1 << s.0));
        self.ev(from, mask, t_after).map(|(v, _)| v)
    }

    fn ev(&mut self, from: Position, remaining: u64, t_after: TimePoint) -> Result<Step, OracleError> {
        let inst = self.req.instance;
        let grid = &inst.grid;
        if t_after >= grid.end() || remaining == 0 {
            return Ok((0.0, None));
        }
        let key = (self.position_index(from), remaining, t_after.minutes());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(*hit);
        }
        self.nodes += 1;
        if self.nodes > self.limits.node_budget {
            return Err(OracleError::BudgetExceeded(self.limits.node_budget));
        }
        let end = u32::from(grid.end().minutes());
        let mut best: Step = (0.0, None);
        for s in 0..inst.n_spots() {
            if remaining & (1 << s) == 0 {
                continue;
            }
            let spot = SpotId(s);
            let Ok(earliest) = earliest_arrival(inst, from, t_after, spot) else {
                continue;
            };
            let stay = inst.stay(spot);
            let first = grid.point_index(earliest).expect("aligned arrival");
            for p in first..grid.n_points() {
                let arrival = grid.point(p);
                if arrival.plus_raw(stay) > end {
                    break;
                }
                let (rest, _) = self.ev(
                    Position::Spot(spot),
                    remaining & !(1 << s),
                    arrival.plus(stay),
                )?;
                let value = self.req.table.value_at(spot, p) + rest;
                if best.1.is_none() || value > best.0 {
                    best = (value, Some((spot, arrival)));
                }
            }
        }
        self.memo.insert(key, best);
        Ok(best)
    }

    /// Optimal route for every possible next spot, ranked.
    pub fn best_routes(&mut self) -> Result<RankedRoutes, OracleError> {
        let req = self.req;
        let inst = req.instance;
        let end = u32::from(inst.grid.end().minutes());
        let unvisited: u64 = req.state.unvisited().fold(0, |m, s| m | (1 << s.0));
        let mut routes = Vec::new();
        for first in req.state.unvisited() {
            let Ok(arrival) = earliest_arrival(inst, req.state.position, req.state.now, first)
            else {
                continue;
            };
            if arrival.plus_raw(inst.stay(first)) > end {
                continue;
            }
            let mut z = Itinerary::new(req.state.position, req.state.now);
            let mut remaining = unvisited & !(1 << first.0);
            let mut at = (first, arrival);
            loop {
                let (spot, arrival) = at;
                let point = inst.grid.point_index(arrival).expect("aligned arrival");
                z.entries.push(VisitEntry {
                    arrival,
                    spot,
                    score: req.table.value_at(spot, point),
                });
                let leave = arrival.plus(inst.stay(spot));
                match self.ev(Position::Spot(spot), remaining, leave)?.1 {
                    Some(next) => {
                        remaining &= !(1 << next.0 .0);
                        at = next;
                    }
                    None => break,
                }
            }
            let tour_score = crate::model::tour_score(&z);
            routes.push(RankedRoute {
                itinerary: z,
                tour_score,
            });
        }
        Ok(rank_and_present(routes, req.n_results))
    }
}

/// One-shot convenience wrapper around [`Oracle::best_routes`].
pub fn exact_best_routes(
    req: &PlanRequest<'_>,
    limits: OracleLimits,
) -> Result<RankedRoutes, OracleError> {
    Oracle::new(*req, limits)?.best_routes()
}

/// One-shot convenience wrapper around [`Oracle::exact_ev`].
pub fn exact_ev(
    req: &PlanRequest<'_>,
    limits: OracleLimits,
    from: Position,
    remaining: &BTreeSet<SpotId>,
    t_after: TimePoint,
) -> Result<f64, OracleError> {
    Oracle::new(*req, limits)?.exact_ev(from, remaining, t_after)
}
