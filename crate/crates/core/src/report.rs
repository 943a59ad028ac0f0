//! Presentation payloads shared by the HTTP service and the command line.
//!
//! Times are `"HH:MM"` strings and scores are rounded to one decimal place.
//! Field order is fixed by declaration order, which keeps machine output
//! stable.

use serde::{Deserialize, Serialize, Serializer};

use crate::model::{free_time, tour_score, Instance, Itinerary, Position, TimePoint};
use crate::planner::RankedRoutes;
use crate::scenario::Scenario;

/// Rounds to one decimal place.
pub fn round1(x: f64) -> f64 {
    let r = (x * 10.0).round() / 10.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Formats with exactly one decimal, e.g. `41.9` or `17.0`.
pub fn fmt1(x: f64) -> String {
    format!("{:.1}", round1(x))
}

pub(crate) fn ser_round1<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round1(*x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitView {
    pub arrival: TimePoint,
    pub spot: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_deserializing)]
    pub departure: Option<TimePoint>,
    #[serde(default, serialize_with = "ser_round1")]
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteView {
    pub rank: usize,
    #[serde(serialize_with = "ser_round1")]
    pub tour_score: f64,
    pub spot_count: usize,
    pub travel_minutes: u32,
    pub stay_minutes: u32,
    pub free_time_minutes: u32,
    pub visits: Vec<VisitView>,
}

/// A stretch of the tour spent moving, waiting or at a spot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub from: TimePoint,
    pub to: TimePoint,
    /// Destination while moving or waiting, the spot itself while staying.
    pub spot: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Move,
    Free,
    Visit,
}

/// Move, free and visit segments in time order. Waiting is placed on
/// arrival, before the visit starts.
pub fn timeline(scenario: &Scenario, z: &Itinerary) -> Vec<Segment> {
    let instance = scenario.instance();
    let mut out = Vec::new();
    let mut from = z.origin;
    let mut ready = z.departure;
    for e in &z.entries {
        let here = Position::Spot(e.spot);
        let key = scenario.spot_key(e.spot).to_string();
        let reached = ready.plus(instance.matrix.travel(from, here));
        let mut push = |kind, a: TimePoint, b: TimePoint| {
            if b > a {
                out.push(Segment {
                    kind,
                    from: a,
                    to: b,
                    spot: key.clone(),
                });
            }
        };
        push(SegmentKind::Move, ready, reached);
        push(SegmentKind::Free, reached, e.arrival);
        let leave = e.arrival.plus(instance.stay(e.spot));
        push(SegmentKind::Visit, e.arrival, leave);
        from = here;
        ready = leave;
    }
    out
}

fn minutes_of(segments: &[Segment], kind: SegmentKind) -> u32 {
    segments
        .iter()
        .filter(|s| s.kind == kind)
        .map(|s| u32::from(s.to.minutes() - s.from.minutes()))
        .sum()
}

pub fn route_view(scenario: &Scenario, rank: usize, z: &Itinerary) -> RouteView {
    let segments = timeline(scenario, z);
    RouteView {
        rank,
        tour_score: tour_score(z),
        spot_count: z.len(),
        travel_minutes: minutes_of(&segments, SegmentKind::Move),
        stay_minutes: minutes_of(&segments, SegmentKind::Visit),
        free_time_minutes: free_time(scenario.instance(), z),
        visits: visit_views(scenario, z),
    }
}

pub fn visit_views(scenario: &Scenario, z: &Itinerary) -> Vec<VisitView> {
    let instance: &Instance = scenario.instance();
    z.entries
        .iter()
        .map(|e| VisitView {
            arrival: e.arrival,
            spot: scenario.spot_key(e.spot).to_string(),
            name: instance.spots[e.spot.0].name.clone(),
            departure: Some(e.arrival.plus(instance.stay(e.spot))),
            score: e.score,
        })
        .collect()
}

pub fn route_views(scenario: &Scenario, routes: &RankedRoutes) -> Vec<RouteView> {
    routes
        .routes
        .iter()
        .enumerate()
        .map(|(i, r)| route_view(scenario, i + 1, &r.itinerary))
        .collect()
}

/// One route as a text line: `[13:00, A, 7.0] ... score 17.0, spots 3`.
pub fn route_line(route: &RouteView) -> String {
    let mut line = String::new();
    for v in &route.visits {
        line.push_str(&format!("[{}, {}, {}] ", v.arrival, v.spot, fmt1(v.score)));
    }
    line.push_str(&format!(
        "score {}, spots {}",
        fmt1(route.tour_score),
        route.spot_count
    ));
    line
}

/// Mean tour score over the presented routes, zero when there are none.
pub fn mean_score(routes: &[RouteView]) -> f64 {
    if routes.is_empty() {
        0.0
    } else {
        routes.iter().map(|r| r.tour_score).sum::<f64>() / routes.len() as f64
    }
}
