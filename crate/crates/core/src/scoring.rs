//! Per-spot, per-slot evaluation values.
//!
//! A spot's value at a slot is its static preference score plus a dynamic
//! part made of a time-feature bonus, a congestion term and a weather term.
//! Tables can also be given directly as a value matrix, in which case the
//! decomposition is unknown and only weather shifts can be layered on top.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{SpotId, TimeGrid, TimePoint};

pub const STATIC_RANGE: (f64, f64) = (1.0, 5.0);
pub const TIME_BONUS_RANGE: (f64, f64) = (0.0, 2.0);
pub const CONGESTION_RANGE: (f64, f64) = (0.0, 2.0);
pub const WEATHER_RANGE: (f64, f64) = (-1.0, 1.0);

/// Congestion samples are taken every half hour.
pub const CONGESTION_SAMPLE_MINUTES: u16 = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("{time} is not a slot boundary inside the tour window")]
    OutOfWindow { time: TimePoint },
    #[error("unknown spot {0}")]
    UnknownSpot(SpotId),
    #[error("congestion trace for spot {spot} is empty")]
    EmptyTrace { spot: usize },
    #[error("congestion trace for spot {spot} has a non-finite or negative sample")]
    BadSample { spot: usize },
    #[error("slot width {0} min neither divides nor is a multiple of 30 min")]
    SlotWidth(u16),
    #[error("{component} table has the wrong shape: {detail}")]
    Shape {
        component: &'static str,
        detail: String,
    },
    #[error("{component} value {value} for spot {spot} is outside [{lo}, {hi}]")]
    Range {
        component: &'static str,
        spot: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("the table was given as direct values and has no dynamic decomposition")]
    NotDecomposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weather {
    Sunny,
    Rain,
}

/// Weather term: outdoor spots gain in sun and lose in rain, indoor spots
/// gain in rain and are neutral in sun.
pub fn weather_effect(indoor: bool, condition: Weather) -> f64 {
    match (indoor, condition) {
        (false, Weather::Sunny) => 1.0,
        (false, Weather::Rain) => -1.0,
        (true, Weather::Sunny) => 0.0,
        (true, Weather::Rain) => 1.0,
    }
}

/// Weather condition at every slot boundary of the window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeatherPlan(Vec<Weather>);

impl WeatherPlan {
    pub fn constant(grid: &TimeGrid, condition: Weather) -> Self {
        Self(vec![condition; grid.n_points()])
    }

    pub fn from_points(grid: &TimeGrid, conditions: Vec<Weather>) -> Result<Self, ScoringError> {
        if conditions.len() != grid.n_points() {
            return Err(ScoringError::Shape {
                component: "weather",
                detail: format!(
                    "{} conditions for {} slot boundaries",
                    conditions.len(),
                    grid.n_points()
                ),
            });
        }
        Ok(Self(conditions))
    }

    pub fn conditions(&self) -> &[Weather] {
        &self.0
    }

    /// Weather term rows for the given indoor flags.
    pub fn effects(&self, indoor: &[bool]) -> Vec<Vec<f64>> {
        indoor
            .iter()
            .map(|&inside| self.0.iter().map(|&w| weather_effect(inside, w)).collect())
            .collect()
    }
}

/// Raw half-hourly congestion samples per spot, starting at the window start.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionTrace {
    pub raw: Vec<Vec<f64>>,
}

/// Number of half-hour samples a trace needs to cover every slot boundary.
pub fn required_samples(grid: &TimeGrid) -> usize {
    usize::from(grid.span_minutes() / CONGESTION_SAMPLE_MINUTES) + 1
}

/// Congestion term for one spot at every slot boundary.
///
/// Samples are replicated onto the slots they cover (slots wider than a
/// sample average the samples they span), then rescaled so the least
/// congested boundary scores 2 and the most congested scores 0. A spot
/// with flat congestion gets the midpoint 1 everywhere.
pub fn congestion_row_to_ce(raw: &[f64], grid: &TimeGrid) -> Result<Vec<f64>, ScoringError> {
    let width = grid.slot_width();
    if !CONGESTION_SAMPLE_MINUTES.is_multiple_of(width) && !width.is_multiple_of(CONGESTION_SAMPLE_MINUTES) {
        return Err(ScoringError::SlotWidth(width));
    }
    if raw.is_empty() {
        return Err(ScoringError::EmptyTrace { spot: 0 });
    }
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(ScoringError::BadSample { spot: 0 });
    }
    let sample = CONGESTION_SAMPLE_MINUTES as usize;
    let last = raw.len() - 1;
    let replicated: Vec<f64> = (0..grid.n_points())
        .map(|i| {
            let offset = i * usize::from(width);
            let first = offset / sample;
            let past = (offset + usize::from(width)).div_ceil(sample).max(first + 1);
            let picked: Vec<f64> = (first..past).map(|k| raw[k.min(last)]).collect();
            picked.iter().sum::<f64>() / picked.len() as f64
        })
        .collect();
    let max = replicated.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = replicated.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return Ok(vec![1.0; replicated.len()]);
    }
    Ok(replicated
        .iter()
        .map(|v| (2.0 * (max - v) / (max - min)).clamp(0.0, 2.0))
        .collect())
}

/// Congestion term table for every spot of a trace.
pub fn congestion_to_ce(
    trace: &CongestionTrace,
    grid: &TimeGrid,
) -> Result<Vec<Vec<f64>>, ScoringError> {
    trace
        .raw
        .iter()
        .enumerate()
        .map(|(spot, row)| {
            congestion_row_to_ce(row, grid).map_err(|e| match e {
                ScoringError::EmptyTrace { .. } => ScoringError::EmptyTrace { spot },
                ScoringError::BadSample { .. } => ScoringError::BadSample { spot },
                other => other,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Decomposed {
        sv: Vec<f64>,
        tv: Vec<Vec<f64>>,
        ce: Vec<Vec<f64>>,
        we: Vec<Vec<f64>>,
    },
    Direct {
        base: Vec<Vec<f64>>,
        shift: Vec<Vec<f64>>,
    },
}

/// Evaluation values for every spot at every slot boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    n_spots: usize,
    n_points: usize,
    source: Source,
    values: Vec<f64>,
}

fn check_shape(
    component: &'static str,
    rows: &[Vec<f64>],
    n_spots: usize,
    n_points: usize,
) -> Result<(), ScoringError> {
    if rows.len() != n_spots {
        return Err(ScoringError::Shape {
            component,
            detail: format!("{} rows for {n_spots} spots", rows.len()),
        });
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_points) {
        return Err(ScoringError::Shape {
            component,
            detail: format!("row {i} has {} values for {n_points} slot boundaries", row.len()),
        });
    }
    Ok(())
}

fn check_range(
    component: &'static str,
    rows: &[Vec<f64>],
    (lo, hi): (f64, f64),
) -> Result<(), ScoringError> {
    for (spot, row) in rows.iter().enumerate() {
        if let Some(&value) = row.iter().find(|v| !(lo..=hi).contains(*v)) {
            return Err(ScoringError::Range {
                component,
                spot,
                value,
                lo,
                hi,
            });
        }
    }
    Ok(())
}

impl ScoreTable {
    /// Builds a table from its components, checking shapes and ranges.
    pub fn decomposed(
        grid: &TimeGrid,
        sv: Vec<f64>,
        tv: Vec<Vec<f64>>,
        ce: Vec<Vec<f64>>,
        we: Vec<Vec<f64>>,
    ) -> Result<Self, ScoringError> {
        let n_spots = sv.len();
        let n_points = grid.n_points();
        let (lo, hi) = STATIC_RANGE;
        if let Some((spot, &value)) = sv.iter().enumerate().find(|(_, v)| !(lo..=hi).contains(*v)) {
            return Err(ScoringError::Range {
                component: "sv",
                spot,
                value,
                lo,
                hi,
            });
        }
        for (name, rows, range) in [
            ("tv", &tv, TIME_BONUS_RANGE),
            ("ce", &ce, CONGESTION_RANGE),
            ("we", &we, WEATHER_RANGE),
        ] {
            check_shape(name, rows, n_spots, n_points)?;
            check_range(name, rows, range)?;
        }
        let mut values = Vec::with_capacity(n_spots * n_points);
        for s in 0..n_spots {
            for p in 0..n_points {
                values.push(sv[s] + (tv[s][p] + ce[s][p] + we[s][p]));
            }
        }
        Ok(Self {
            n_spots,
            n_points,
            source: Source::Decomposed { sv, tv, ce, we },
            values,
        })
    }

    /// Builds a table straight from evaluation values.
    pub fn direct(grid: &TimeGrid, base: Vec<Vec<f64>>) -> Result<Self, ScoringError> {
        let n_spots = base.len();
        let n_points = grid.n_points();
        check_shape("direct_eval", &base, n_spots, n_points)?;
        check_range("direct_eval", &base, (f64::MIN, f64::MAX))?;
        let shift = vec![vec![0.0; n_points]; n_spots];
        let values = base.iter().flatten().copied().collect();
        Ok(Self {
            n_spots,
            n_points,
            source: Source::Direct { base, shift },
            values,
        })
    }

    /// Adds a per-cell offset on top of direct values (used to apply a
    /// weather change to a table whose decomposition is unknown).
    pub fn with_shift(mut self, shift: Vec<Vec<f64>>) -> Result<Self, ScoringError> {
        match &mut self.source {
            Source::Direct { base, shift: old } => {
                check_shape("shift", &shift, self.n_spots, self.n_points)?;
                self.values = base
                    .iter()
                    .zip(&shift)
                    .flat_map(|(b, s)| b.iter().zip(s).map(|(x, y)| x + y))
                    .collect();
                *old = shift;
                Ok(self)
            }
            Source::Decomposed { .. } => Err(ScoringError::NotDecomposed),
        }
    }

    pub const fn n_spots(&self) -> usize {
        self.n_spots
    }

    pub const fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn is_decomposed(&self) -> bool {
        matches!(self.source, Source::Decomposed { .. })
    }

    /// Value at a slot-boundary index without bounds translation.
    #[inline]
    pub fn value_at(&self, spot: SpotId, point: usize) -> f64 {
        self.values[spot.0 * self.n_points + point]
    }

    fn locate(
        &self,
        spot: SpotId,
        t: TimePoint,
        grid: &TimeGrid,
    ) -> Result<usize, ScoringError> {
        if spot.0 >= self.n_spots {
            return Err(ScoringError::UnknownSpot(spot));
        }
        grid.point_index(t)
            .filter(|p| *p < self.n_points)
            .ok_or(ScoringError::OutOfWindow { time: t })
    }

    /// Dynamic part: time bonus + congestion + weather.
    pub fn dv(&self, spot: SpotId, t: TimePoint, grid: &TimeGrid) -> Result<f64, ScoringError> {
        let p = self.locate(spot, t, grid)?;
        match &self.source {
            Source::Decomposed { tv, ce, we, .. } => {
                let s = spot.0;
                Ok(tv[s][p] + ce[s][p] + we[s][p])
            }
            Source::Direct { .. } => Err(ScoringError::NotDecomposed),
        }
    }

    /// Static plus dynamic value of visiting `spot` at `t`.
    pub fn eval(&self, spot: SpotId, t: TimePoint, grid: &TimeGrid) -> Result<f64, ScoringError> {
        let p = self.locate(spot, t, grid)?;
        Ok(self.value_at(spot, p))
    }

    pub fn static_score(&self, spot: SpotId) -> Option<f64> {
        match &self.source {
            Source::Decomposed { sv, .. } => sv.get(spot.0).copied(),
            Source::Direct { .. } => None,
        }
    }

    /// All values as rows of slot boundaries, one row per spot.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n_points).map(<[f64]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(start: &str, end: &str, width: u16) -> TimeGrid {
        TimeGrid::new(start.parse().unwrap(), end.parse().unwrap(), width).unwrap()
    }

    #[test]
    fn dv_is_three_term_sum() {
        let g = grid("13:00", "14:00", 60);
        let t = ScoreTable::decomposed(
            &g,
            vec![3.0],
            vec![vec![2.0, 0.0]],
            vec![vec![1.5, 0.0]],
            vec![vec![1.0, 0.0]],
        )
        .unwrap();
        assert_eq!(t.dv(SpotId(0), "13:00".parse().unwrap(), &g).unwrap(), 4.5);
        assert_eq!(t.dv(SpotId(0), "14:00".parse().unwrap(), &g).unwrap(), 0.0);
        assert_eq!(t.eval(SpotId(0), "13:00".parse().unwrap(), &g).unwrap(), 7.5);
        assert!(matches!(
            t.dv(SpotId(0), "14:30".parse().unwrap(), &g),
            Err(ScoringError::OutOfWindow { .. })
        ));
        assert!(matches!(
            t.dv(SpotId(0), "13:30".parse().unwrap(), &g),
            Err(ScoringError::OutOfWindow { .. })
        ));
    }

    #[test]
    fn congestion_examples() {
        let half = grid("13:00", "14:00", 30);
        assert_eq!(
            congestion_row_to_ce(&[10.0, 20.0, 30.0], &half).unwrap(),
            vec![2.0, 1.0, 0.0]
        );
        assert_eq!(
            congestion_row_to_ce(&[5.0, 5.0, 5.0], &half).unwrap(),
            vec![1.0, 1.0, 1.0]
        );
        let fine = grid("13:00", "13:50", 10);
        assert_eq!(
            congestion_row_to_ce(&[0.0, 4.0], &fine).unwrap(),
            vec![2.0, 2.0, 2.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn congestion_wide_slots_average_samples() {
        let hourly = grid("13:00", "15:00", 60);
        // boundaries 13:00, 14:00, 15:00 average [0,2], [4,6], [8,10]
        let ce = congestion_row_to_ce(&[0.0, 2.0, 4.0, 6.0, 8.0, 10.0], &hourly).unwrap();
        assert_eq!(ce, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn congestion_errors() {
        let g = grid("13:00", "14:00", 30);
        assert!(matches!(
            congestion_to_ce(&CongestionTrace { raw: vec![vec![1.0], vec![]] }, &g),
            Err(ScoringError::EmptyTrace { spot: 1 })
        ));
        assert!(matches!(
            congestion_row_to_ce(&[f64::NAN], &g),
            Err(ScoringError::BadSample { .. })
        ));
        let odd = grid("13:00", "14:10", 35);
        assert!(matches!(congestion_row_to_ce(&[1.0], &odd), Err(ScoringError::SlotWidth(35))));
    }

    #[test]
    fn weather_effect_table() {
        assert_eq!(weather_effect(false, Weather::Sunny), 1.0);
        assert_eq!(weather_effect(false, Weather::Rain), -1.0);
        assert_eq!(weather_effect(true, Weather::Sunny), 0.0);
        assert_eq!(weather_effect(true, Weather::Rain), 1.0);
    }

    #[test]
    fn component_ranges_enforced() {
        let g = grid("13:00", "14:00", 60);
        let zero = || vec![vec![0.0, 0.0]];
        assert!(matches!(
            ScoreTable::decomposed(&g, vec![7.0], zero(), zero(), zero()),
            Err(ScoringError::Range { component: "sv", .. })
        ));
        assert!(matches!(
            ScoreTable::decomposed(&g, vec![3.0], vec![vec![0.0, 2.5]], zero(), zero()),
            Err(ScoringError::Range { component: "tv", .. })
        ));
        assert!(matches!(
            ScoreTable::decomposed(&g, vec![3.0], vec![vec![0.0]], zero(), zero()),
            Err(ScoringError::Shape { component: "tv", .. })
        ));
    }

    #[test]
    fn direct_tables_shift_but_do_not_decompose() {
        let g = grid("13:00", "14:00", 60);
        let t = ScoreTable::direct(&g, vec![vec![7.0, 3.0]]).unwrap();
        assert!(matches!(
            t.dv(SpotId(0), "13:00".parse().unwrap(), &g),
            Err(ScoringError::NotDecomposed)
        ));
        let shifted = t.with_shift(vec![vec![-2.0, -2.0]]).unwrap();
        assert_eq!(shifted.rows(), vec![vec![5.0, 1.0]]);
    }

    fn raw_trace() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1000.0, 1..14)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn congestion_in_range_and_order_reversing(raw in raw_trace(), width in prop::sample::select(vec![5u16, 10, 15, 30, 60, 150])) {
            let g = TimeGrid::new("13:00".parse().unwrap(), "18:00".parse().unwrap(), width).unwrap();
            let ce = congestion_row_to_ce(&raw, &g).unwrap();
            prop_assert_eq!(ce.len(), g.n_points());
            prop_assert!(ce.iter().all(|v| (0.0..=2.0).contains(v)));
            if width <= 30 {
                // boundaries map to single samples: order is reversed pointwise
                let idx = |i: usize| ((i * usize::from(width)) / 30).min(raw.len() - 1);
                for i in 0..ce.len() {
                    for j in 0..ce.len() {
                        if raw[idx(i)] < raw[idx(j)] {
                            prop_assert!(ce[i] >= ce[j]);
                        }
                    }
                }
            }
        }

        #[test]
        fn weather_effect_range(indoor in any::<bool>(), rain in any::<bool>()) {
            let w = if rain { Weather::Rain } else { Weather::Sunny };
            let v = weather_effect(indoor, w);
            prop_assert!(v == -1.0 || v == 0.0 || v == 1.0);
        }

        #[test]
        fn eval_decomposes_exactly(
            sv in prop::collection::vec(1.0f64..=5.0, 1..5),
            seed in prop::collection::vec((0.0f64..=2.0, 0.0f64..=2.0, -1.0f64..=1.0), 3),
        ) {
            let g = TimeGrid::new("13:00".parse().unwrap(), "14:00".parse().unwrap(), 30).unwrap();
            let n = sv.len();
            let tv: Vec<Vec<f64>> = (0..n).map(|s| (0..3).map(|p| seed[(s + p) % 3].0).collect()).collect();
            let ce: Vec<Vec<f64>> = (0..n).map(|s| (0..3).map(|p| seed[(s * 2 + p) % 3].1).collect()).collect();
            let we: Vec<Vec<f64>> = (0..n).map(|s| (0..3).map(|p| seed[(s + 2 * p) % 3].2).collect()).collect();
            let t = ScoreTable::decomposed(&g, sv.clone(), tv.clone(), ce.clone(), we.clone()).unwrap();
            for s in 0..n {
                for (p, time) in g.points().enumerate() {
                    let dv = t.dv(SpotId(s), time, &g).unwrap();
                    prop_assert_eq!(dv, tv[s][p] + ce[s][p] + we[s][p]);
                    prop_assert_eq!(t.eval(SpotId(s), time, &g).unwrap(), sv[s] + dv);
                }
            }
        }
    }
}
