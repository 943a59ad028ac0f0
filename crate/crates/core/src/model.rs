//! Domain types shared by the planners and the oracle: clock times, the
//! slotted tour window, spots, the travel matrix and itineraries together
//! with the feasibility rules that every route must satisfy.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Minutes in a day; the upper bound for every [`TimePoint`].
pub const MINUTES_PER_DAY: u16 = 1440;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid time {0:?}, expected HH:MM")]
    InvalidTime(String),
    #[error("invalid tour window: {0}")]
    InvalidGrid(String),
    #[error("{time} is outside the tour window {start}-{end}")]
    OutOfWindow {
        time: TimePoint,
        start: TimePoint,
        end: TimePoint,
    },
    #[error("spot {spot} cannot be reached before the tour ends (earliest {earliest})")]
    Unreachable { spot: SpotId, earliest: TimePoint },
    #[error("invalid travel matrix: {0}")]
    InvalidMatrix(String),
    #[error("infeasible itinerary at leg {leg}: {reason}")]
    Infeasible { leg: usize, reason: String },
}

/// Clock time in whole minutes since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimePoint(u16);

impl TimePoint {
    pub fn from_minutes(minutes: u16) -> Result<Self, ModelError> {
        if minutes > MINUTES_PER_DAY {
            return Err(ModelError::InvalidTime(minutes.to_string()));
        }
        Ok(Self(minutes))
    }

    pub fn hm(hour: u16, minute: u16) -> Self {
        assert!(minute < 60 && hour * 60 + minute <= MINUTES_PER_DAY);
        Self(hour * 60 + minute)
    }

    pub const fn minutes(self) -> u16 {
        self.0
    }

    /// Adds a duration, saturating at the end of the day.
    pub fn plus(self, minutes: u32) -> TimePoint {
        let total = u32::from(self.0).saturating_add(minutes);
        Self(total.min(u32::from(MINUTES_PER_DAY)) as u16)
    }

    /// Adds a duration without saturation, for comparisons that may run past
    /// midnight.
    pub fn plus_raw(self, minutes: u32) -> u32 {
        u32::from(self.0) + minutes
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

impl FromStr for TimePoint {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidTime(s.to_string());
        let (h, m) = s.split_once(':').ok_or_else(bad)?;
        if h.is_empty() || h.len() > 2 || m.len() != 2 {
            return Err(bad());
        }
        let h: u16 = h.parse().map_err(|_| bad())?;
        let m: u16 = m.parse().map_err(|_| bad())?;
        if m >= 60 || h * 60 + m > MINUTES_PER_DAY {
            return Err(bad());
        }
        Ok(Self(h * 60 + m))
    }
}

impl Serialize for TimePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The tour window `[start, end]` cut into slots of equal width.
///
/// Slot boundaries ("points") run from `start` to `end` inclusive, so a
/// window of `n` slots has `n + 1` points. Scores are tabulated per point;
/// the final point exists so that tables can carry a value at `end`, even
/// though no visit with positive stay can begin there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TimeGrid {
    start: TimePoint,
    end: TimePoint,
    slot_width: u16,
}

impl TimeGrid {
    pub fn new(start: TimePoint, end: TimePoint, slot_width: u16) -> Result<Self, ModelError> {
        if start >= end {
            return Err(ModelError::InvalidGrid(format!(
                "start {start} must precede end {end}"
            )));
        }
        if slot_width == 0 {
            return Err(ModelError::InvalidGrid("slot width must be positive".into()));
        }
        let span = end.minutes() - start.minutes();
        if !span.is_multiple_of(slot_width) {
            return Err(ModelError::InvalidGrid(format!(
                "window of {span} min is not a multiple of the {slot_width} min slot width"
            )));
        }
        Ok(Self {
            start,
            end,
            slot_width,
        })
    }

    pub const fn start(&self) -> TimePoint {
        self.start
    }

    pub const fn end(&self) -> TimePoint {
        self.end
    }

    pub const fn slot_width(&self) -> u16 {
        self.slot_width
    }

    pub fn span_minutes(&self) -> u16 {
        self.end.minutes() - self.start.minutes()
    }

    pub fn n_slots(&self) -> usize {
        usize::from(self.span_minutes() / self.slot_width)
    }

    pub fn n_points(&self) -> usize {
        self.n_slots() + 1
    }

    /// Time of the `index`-th slot boundary.
    pub fn point(&self, index: usize) -> TimePoint {
        debug_assert!(index < self.n_points());
        TimePoint(self.start.minutes() + index as u16 * self.slot_width)
    }

    pub fn points(&self) -> impl Iterator<Item = TimePoint> + '_ {
        (0..self.n_points()).map(|i| self.point(i))
    }

    /// Index of the slot boundary at `t`, if `t` is one.
    pub fn point_index(&self, t: TimePoint) -> Option<usize> {
        if t < self.start || t > self.end {
            return None;
        }
        let offset = t.minutes() - self.start.minutes();
        offset.is_multiple_of(self.slot_width).then(|| usize::from(offset / self.slot_width))
    }

    /// Checked variant of [`point_index`](Self::point_index).
    pub fn require_point(&self, t: TimePoint) -> Result<usize, ModelError> {
        self.point_index(t).ok_or(ModelError::OutOfWindow {
            time: t,
            start: self.start,
            end: self.end,
        })
    }

    /// Smallest slot boundary that is both `>= t` and `>= start`.
    pub fn align_up(&self, t: TimePoint) -> Result<TimePoint, ModelError> {
        self.align_up_raw(u32::from(t.minutes()))
    }

    pub(crate) fn align_up_raw(&self, t: u32) -> Result<TimePoint, ModelError> {
        let start = u32::from(self.start.minutes());
        let end = u32::from(self.end.minutes());
        let width = u32::from(self.slot_width);
        let aligned = if t <= start {
            start
        } else {
            start + (t - start).div_ceil(width) * width
        };
        if aligned > end {
            return Err(ModelError::OutOfWindow {
                time: TimePoint(t.min(u32::from(MINUTES_PER_DAY)) as u16),
                start: self.start,
                end: self.end,
            });
        }
        Ok(TimePoint(aligned as u16))
    }
}

/// Index of a spot in the scenario's spot list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpotId(pub usize);

impl SpotId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for SpotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Where the tourist currently stands: the scenario origin or a spot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    Origin,
    Spot(SpotId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spot {
    pub id: SpotId,
    pub key: String,
    pub name: String,
    pub indoor: bool,
    pub stay_minutes: u16,
}

/// Pairwise walking minutes over all spots plus the origin.
///
/// Rows and columns `0..n_spots` are spots; index `n_spots` is the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TravelMatrix {
    n_spots: usize,
    minutes: Vec<u32>,
}

impl TravelMatrix {
    pub fn new(n_spots: usize, rows: &[Vec<u32>]) -> Result<Self, ModelError> {
        let size = n_spots + 1;
        if rows.len() != size {
            return Err(ModelError::InvalidMatrix(format!(
                "expected {size} rows ({n_spots} spots + origin), found {}",
                rows.len()
            )));
        }
        let mut minutes = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(ModelError::InvalidMatrix(format!(
                    "row {i} has {} columns, expected {size}",
                    row.len()
                )));
            }
            if row[i] != 0 {
                return Err(ModelError::InvalidMatrix(format!(
                    "diagonal entry [{i}][{i}] must be 0"
                )));
            }
            minutes.extend_from_slice(row);
        }
        Ok(Self { n_spots, minutes })
    }

    /// Uniform travel time between every pair of distinct locations.
    pub fn uniform(n_spots: usize, minutes: u32) -> Self {
        let size = n_spots + 1;
        let rows: Vec<Vec<u32>> = (0..size)
            .map(|i| (0..size).map(|j| if i == j { 0 } else { minutes }).collect())
            .collect();
        Self::new(n_spots, &rows).expect("uniform matrix is well formed")
    }

    pub const fn n_spots(&self) -> usize {
        self.n_spots
    }

    pub fn size(&self) -> usize {
        self.n_spots + 1
    }

    pub fn index_of(&self, p: Position) -> usize {
        match p {
            Position::Origin => self.n_spots,
            Position::Spot(s) => s.0,
        }
    }

    pub fn travel(&self, from: Position, to: Position) -> u32 {
        self.minutes[self.index_of(from) * self.size() + self.index_of(to)]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.minutes.chunks(self.size()).map(<[u32]>::to_vec).collect()
    }

    /// Triples `(i, j, k)` with `m[i][k] > m[i][j] + m[j][k]`.
    pub fn triangle_violations(&self) -> Vec<(usize, usize, usize)> {
        let n = self.size();
        let at = |i: usize, j: usize| self.minutes[i * n + j];
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if at(i, k) > at(i, j) + at(j, k) {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }
}

/// The static geometry of a planning problem: tour window, spots and
/// travel times. Scores live separately because they change with context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub grid: TimeGrid,
    pub spots: Vec<Spot>,
    pub matrix: TravelMatrix,
}

impl Instance {
    pub fn stay(&self, spot: SpotId) -> u32 {
        u32::from(self.spots[spot.0].stay_minutes)
    }

    pub fn n_spots(&self) -> usize {
        self.spots.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisitEntry {
    pub arrival: TimePoint,
    pub spot: SpotId,
    pub score: f64,
}

/// An ordered visit list starting from `origin` at `departure`.
#[derive(Debug, Clone, PartialEq)]
pub struct Itinerary {
    pub origin: Position,
    pub departure: TimePoint,
    pub entries: Vec<VisitEntry>,
}

impl Itinerary {
    pub fn new(origin: Position, departure: TimePoint) -> Self {
        Self {
            origin,
            departure,
            entries: Vec::new(),
        }
    }

    pub fn contains(&self, spot: SpotId) -> bool {
        self.entries.iter().any(|e| e.spot == spot)
    }

    pub fn first(&self) -> Option<&VisitEntry> {
        self.entries.first()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position at which an entry arriving at `arrival` would be inserted.
    pub fn insertion_index(&self, arrival: TimePoint) -> usize {
        self.entries.partition_point(|e| e.arrival < arrival)
    }

    /// Inserts keeping arrival order. Callers check feasibility first.
    pub fn insert(&mut self, entry: VisitEntry) {
        let at = self.insertion_index(entry.arrival);
        self.entries.insert(at, entry);
    }

    /// Location and time from which the tourist leaves after the last visit.
    pub fn end_state(&self, instance: &Instance) -> (Position, TimePoint) {
        match self.entries.last() {
            Some(last) => (
                Position::Spot(last.spot),
                last.arrival.plus(instance.stay(last.spot)),
            ),
            None => (self.origin, self.departure),
        }
    }
}

/// What the planner knows about the tourist right now.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerState {
    pub all_spots: BTreeSet<SpotId>,
    pub visited: BTreeSet<SpotId>,
    pub position: Position,
    pub now: TimePoint,
}

impl PlannerState {
    pub fn new(
        instance: &Instance,
        visited: BTreeSet<SpotId>,
        position: Position,
        now: TimePoint,
    ) -> Result<Self, ModelError> {
        let all_spots: BTreeSet<SpotId> = (0..instance.n_spots()).map(SpotId).collect();
        if let Some(bad) = visited.iter().find(|s| !all_spots.contains(s)) {
            return Err(ModelError::InvalidGrid(format!("visited spot {bad} is unknown")));
        }
        if now > instance.grid.end() {
            return Err(ModelError::OutOfWindow {
                time: now,
                start: instance.grid.start(),
                end: instance.grid.end(),
            });
        }
        Ok(Self {
            all_spots,
            visited,
            position,
            now,
        })
    }

    pub fn unvisited(&self) -> impl Iterator<Item = SpotId> + '_ {
        self.all_spots.difference(&self.visited).copied()
    }
}

/// Earliest slot boundary at which `to` can be reached leaving `from` at
/// `depart`.
pub fn earliest_arrival(
    instance: &Instance,
    from: Position,
    depart: TimePoint,
    to: SpotId,
) -> Result<TimePoint, ModelError> {
    let raw = depart.plus_raw(instance.matrix.travel(from, Position::Spot(to)));
    instance
        .grid
        .align_up_raw(raw)
        .map_err(|_| ModelError::Unreachable {
            spot: to,
            earliest: TimePoint(raw.min(u32::from(MINUTES_PER_DAY)) as u16),
        })
}

/// Whether `candidate` can be inserted into `z` without breaking any leg.
///
/// Waiting is allowed: every leg only has to fit, not to be tight.
pub fn check_insert(instance: &Instance, z: &Itinerary, candidate: &VisitEntry) -> bool {
    if candidate.spot.0 >= instance.n_spots() || z.contains(candidate.spot) {
        return false;
    }
    let grid = &instance.grid;
    if grid.point_index(candidate.arrival).is_none() {
        return false;
    }
    let stay = instance.stay(candidate.spot);
    let leave = candidate.arrival.plus_raw(stay);
    if leave > u32::from(grid.end().minutes()) {
        return false;
    }
    let at = z.insertion_index(candidate.arrival);
    let here = Position::Spot(candidate.spot);
    let ready = match at.checked_sub(1).map(|i| &z.entries[i]) {
        Some(prev) => {
            prev.arrival.plus_raw(instance.stay(prev.spot))
                + instance.matrix.travel(Position::Spot(prev.spot), here)
        }
        None => z.departure.plus_raw(instance.matrix.travel(z.origin, here)),
    };
    if ready > u32::from(candidate.arrival.minutes()) {
        return false;
    }
    match z.entries.get(at) {
        Some(next) => {
            leave + instance.matrix.travel(here, Position::Spot(next.spot))
                <= u32::from(next.arrival.minutes())
        }
        None => true,
    }
}

/// Validates a whole itinerary, naming the first violated leg.
///
/// Leg 0 is origin to first visit; leg `i` ends at entry `i`.
pub fn validate_itinerary(instance: &Instance, z: &Itinerary) -> Result<(), ModelError> {
    let grid = &instance.grid;
    let mut seen = BTreeSet::new();
    let mut from = z.origin;
    let mut ready = u32::from(z.departure.minutes());
    let describe = |p: Position| match p {
        Position::Origin => "origin".to_string(),
        Position::Spot(s) => instance
            .spots
            .get(s.0)
            .map_or_else(|| s.to_string(), |spot| spot.key.clone()),
    };
    for (leg, entry) in z.entries.iter().enumerate() {
        let fail = |reason: String| Err(ModelError::Infeasible { leg, reason });
        if entry.spot.0 >= instance.n_spots() {
            return fail(format!("unknown spot {}", entry.spot));
        }
        let key = describe(Position::Spot(entry.spot));
        if !seen.insert(entry.spot) {
            return fail(format!("{key} is visited twice"));
        }
        if grid.point_index(entry.arrival).is_none() {
            return fail(format!(
                "arrival {} at {key} is not a slot boundary of the window",
                entry.arrival
            ));
        }
        let here = Position::Spot(entry.spot);
        let reach = ready + instance.matrix.travel(from, here);
        if reach > u32::from(entry.arrival.minutes()) {
            return fail(format!(
                "{} -> {key}: earliest arrival {} is after planned arrival {}",
                describe(from),
                TimePoint(reach.min(u32::from(MINUTES_PER_DAY)) as u16),
                entry.arrival
            ));
        }
        let leave = entry.arrival.plus_raw(instance.stay(entry.spot));
        if leave > u32::from(grid.end().minutes()) {
            return fail(format!(
                "stay at {key} from {} ends after the tour end {}",
                entry.arrival,
                grid.end()
            ));
        }
        from = here;
        ready = leave;
    }
    Ok(())
}

/// Sum of the per-visit scores.
pub fn tour_score(z: &Itinerary) -> f64 {
    z.entries.iter().map(|e| e.score).sum()
}

/// Total waiting minutes along the itinerary, including the first leg.
pub fn free_time(instance: &Instance, z: &Itinerary) -> u32 {
    let mut from = z.origin;
    let mut ready = u32::from(z.departure.minutes());
    let mut slack = 0;
    for entry in &z.entries {
        let here = Position::Spot(entry.spot);
        let reach = ready + instance.matrix.travel(from, here);
        slack += u32::from(entry.arrival.minutes()).saturating_sub(reach);
        from = here;
        ready = entry.arrival.plus_raw(instance.stay(entry.spot));
    }
    slack
}
