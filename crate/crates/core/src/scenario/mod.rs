//! Scenario documents: the JSON file format, validation into planner
//! inputs, bundled instances and a seeded random generator.
//!
//! A scenario describes the tour window, the spots, the travel matrix and
//! the scores. Scores come in one of two forms:
//!
//! * decomposed: per-spot `sv`, optional `tv` bonus windows, optional
//!   half-hourly `congestion` samples and an optional `weather` plan;
//! * direct: a `direct_eval` matrix of values per spot and slot boundary,
//!   optionally with the `weather` under which those values hold.

mod builtin;
mod random;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Instance, PlannerState, Position, Spot, SpotId, TimeGrid, TimePoint, TravelMatrix,
};
use crate::scoring::{
    congestion_row_to_ce, required_samples, weather_effect, ScoreTable, ScoringError, Weather,
    WeatherPlan, STATIC_RANGE, TIME_BONUS_RANGE,
};

pub use builtin::{builtin, builtin_names, builtin_synth20, builtin_table3};
pub use random::{generate_random, RandomInstanceSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl ScenarioError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Field path of a validation error.
    pub fn path(&self) -> Option<&str> {
        match self {
            Self::Invalid { path, .. } => Some(path),
            Self::Parse(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: TimePoint,
    pub end: TimePoint,
    pub slot_width_minutes: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginSpec {
    pub name: String,
    /// Spot the origin coincides with, if any. That spot is never
    /// recommended from the starting position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spot: Option<String>,
}

/// Time-feature bonus over an inclusive range of slot boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBonus {
    pub from_slot: TimePoint,
    pub to_slot: TimePoint,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpotSpec {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub indoor: bool,
    pub stay_minutes: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sv: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tv: Vec<TimeBonus>,
}

/// Either one condition for the whole window or one per slot boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeatherSpec {
    Constant(Weather),
    PerSlot(Vec<Weather>),
}

impl WeatherSpec {
    pub fn to_plan(&self, grid: &TimeGrid) -> Result<WeatherPlan, ScoringError> {
        match self {
            WeatherSpec::Constant(w) => Ok(WeatherPlan::constant(grid, *w)),
            WeatherSpec::PerSlot(list) => WeatherPlan::from_points(grid, list.clone()),
        }
    }
}

/// The on-disk scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub grid: GridSpec,
    pub origin: OriginSpec,
    pub now: TimePoint,
    pub spots: Vec<SpotSpec>,
    /// Rows and columns follow `spots`, with the origin last.
    pub travel_minutes: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub congestion: Option<BTreeMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weather: Option<WeatherSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_eval: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub visited: Vec<String>,
}

/// Replacement dynamic context applied on top of a scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weather: Option<WeatherSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub congestion: BTreeMap<String, Vec<f64>>,
}

impl ContextOverride {
    /// Folds `other` into `self`; later values win.
    pub fn merge(&mut self, other: ContextOverride) {
        if other.weather.is_some() {
            self.weather = other.weather;
        }
        self.congestion.extend(other.congestion);
    }
}

/// A validated scenario ready for planning.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    file: ScenarioFile,
    instance: Instance,
    table: ScoreTable,
    index: HashMap<String, SpotId>,
    origin_spot: Option<SpotId>,
    visited: BTreeSet<SpotId>,
}

fn grid_from(spec: &GridSpec) -> Result<TimeGrid, ScenarioError> {
    TimeGrid::new(spec.start, spec.end, spec.slot_width_minutes)
        .map_err(|e| ScenarioError::invalid("grid", e.to_string()))
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn load(bytes: &[u8]) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            serde_json::from_slice(bytes).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn load_str(text: &str) -> Result<Self, ScenarioError> {
        Self::load(text.as_bytes())
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, ScenarioError> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::invalid(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", file.schema_version),
            ));
        }
        let grid = grid_from(&file.grid)?;
        if file.spots.is_empty() {
            return Err(ScenarioError::invalid("spots", "at least one spot is required"));
        }
        if file.spots.len() > 64 {
            return Err(ScenarioError::invalid("spots", "at most 64 spots are supported"));
        }
        let mut index = HashMap::new();
        let mut spots = Vec::with_capacity(file.spots.len());
        for (i, spec) in file.spots.iter().enumerate() {
            let path = format!("spots[{i}]");
            if spec.id.is_empty() {
                return Err(ScenarioError::invalid(format!("{path}.id"), "empty id"));
            }
            if index.insert(spec.id.clone(), SpotId(i)).is_some() {
                return Err(ScenarioError::invalid(
                    format!("{path}.id"),
                    format!("duplicate id {:?}", spec.id),
                ));
            }
            if spec.stay_minutes == 0 || spec.stay_minutes % grid.slot_width() != 0 {
                return Err(ScenarioError::invalid(
                    format!("{path}.stay_minutes"),
                    format!(
                        "{} is not a positive multiple of the {} min slot width",
                        spec.stay_minutes,
                        grid.slot_width()
                    ),
                ));
            }
            spots.push(Spot {
                id: SpotId(i),
                key: spec.id.clone(),
                name: spec.name.clone(),
                indoor: spec.indoor,
                stay_minutes: spec.stay_minutes,
            });
        }
        let matrix = TravelMatrix::new(spots.len(), &file.travel_minutes)
            .map_err(|e| ScenarioError::invalid("travel_minutes", e.to_string()))?;
        let lookup = |path: String, id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| ScenarioError::invalid(path, format!("unknown spot id {id:?}")))
        };
        let origin_spot = match &file.origin.spot {
            Some(id) => Some(lookup("origin.spot".into(), id)?),
            None => None,
        };
        let mut visited = BTreeSet::new();
        for (i, id) in file.visited.iter().enumerate() {
            visited.insert(lookup(format!("visited[{i}]"), id)?);
        }
        if file.now > grid.end() {
            return Err(ScenarioError::invalid(
                "now",
                format!("{} is after the tour end {}", file.now, grid.end()),
            ));
        }
        if let Some(congestion) = &file.congestion {
            for id in congestion.keys() {
                lookup(format!("congestion.{id}"), id)?;
            }
        }
        let instance = Instance {
            grid,
            spots,
            matrix,
        };
        let mut scenario = Self {
            table: ScoreTable::direct(&grid, vec![vec![0.0; grid.n_points()]])
                .expect("placeholder table"),
            file,
            instance,
            index,
            origin_spot,
            visited,
        };
        scenario.table = scenario.build_table(&ContextOverride::default())?;
        Ok(scenario)
    }

    /// Materialises the score table, optionally under a replacement context.
    pub fn build_table(&self, context: &ContextOverride) -> Result<ScoreTable, ScenarioError> {
        let grid = self.instance.grid;
        let file = &self.file;
        let n_points = grid.n_points();
        let indoor: Vec<bool> = self.instance.spots.iter().map(|s| s.indoor).collect();
        let weather_plan = |spec: &WeatherSpec, path: &str| {
            spec.to_plan(&grid)
                .map_err(|e| ScenarioError::invalid(path, e.to_string()))
        };
        let base_weather = match &file.weather {
            Some(spec) => weather_plan(spec, "weather")?,
            None => WeatherPlan::constant(&grid, Weather::Sunny),
        };
        let weather = match &context.weather {
            Some(spec) => weather_plan(spec, "context.weather")?,
            None => base_weather.clone(),
        };

        if let Some(direct) = &file.direct_eval {
            if let Some(i) = file.spots.iter().position(|s| s.sv.is_some() || !s.tv.is_empty()) {
                return Err(ScenarioError::invalid(
                    format!("spots[{i}]"),
                    "sv/tv must be absent when direct_eval is given",
                ));
            }
            if file.congestion.is_some() {
                return Err(ScenarioError::invalid(
                    "congestion",
                    "congestion must be absent when direct_eval is given",
                ));
            }
            if let Some(id) = context.congestion.keys().next() {
                return Err(ScenarioError::invalid(
                    format!("context.congestion.{id}"),
                    "congestion overrides need a decomposed scenario",
                ));
            }
            let table = ScoreTable::direct(&grid, direct.clone())
                .map_err(|e| ScenarioError::invalid("direct_eval", e.to_string()))?;
            if table.n_spots() != self.instance.n_spots() {
                return Err(ScenarioError::invalid(
                    "direct_eval",
                    format!(
                        "{} rows for {} spots",
                        table.n_spots(),
                        self.instance.n_spots()
                    ),
                ));
            }
            let shift: Vec<Vec<f64>> = indoor
                .iter()
                .map(|&inside| {
                    base_weather
                        .conditions()
                        .iter()
                        .zip(weather.conditions())
                        .map(|(&was, &now)| weather_effect(inside, now) - weather_effect(inside, was))
                        .collect()
                })
                .collect();
            return table
                .with_shift(shift)
                .map_err(|e| ScenarioError::invalid("weather", e.to_string()));
        }

        let mut sv = Vec::with_capacity(file.spots.len());
        let mut tv = Vec::with_capacity(file.spots.len());
        let mut ce = Vec::with_capacity(file.spots.len());
        let samples = required_samples(&grid);
        for (i, spec) in file.spots.iter().enumerate() {
            let path = format!("spots[{i}]");
            let value = spec.sv.ok_or_else(|| {
                ScenarioError::invalid(format!("{path}.sv"), "sv is required without direct_eval")
            })?;
            if !(STATIC_RANGE.0..=STATIC_RANGE.1).contains(&value) {
                return Err(ScenarioError::invalid(
                    format!("{path}.sv"),
                    format!("{value} is outside the static score scale 1-5"),
                ));
            }
            sv.push(value);

            let mut row = vec![0.0; n_points];
            for (j, bonus) in spec.tv.iter().enumerate() {
                let bpath = format!("{path}.tv[{j}]");
                let from = grid
                    .require_point(bonus.from_slot)
                    .map_err(|e| ScenarioError::invalid(format!("{bpath}.from_slot"), e.to_string()))?;
                let to = grid
                    .require_point(bonus.to_slot)
                    .map_err(|e| ScenarioError::invalid(format!("{bpath}.to_slot"), e.to_string()))?;
                if from > to {
                    return Err(ScenarioError::invalid(bpath, "from_slot is after to_slot"));
                }
                for cell in &mut row[from..=to] {
                    *cell += bonus.value;
                }
            }
            if let Some(v) = row
                .iter()
                .find(|v| !(TIME_BONUS_RANGE.0..=TIME_BONUS_RANGE.1).contains(*v))
            {
                return Err(ScenarioError::invalid(
                    format!("{path}.tv"),
                    format!("time bonus {v} is outside 0-2"),
                ));
            }
            tv.push(row);

            let trace = context
                .congestion
                .get(&spec.id)
                .map(|t| (t, format!("context.congestion.{}", spec.id)))
                .or_else(|| {
                    file.congestion
                        .as_ref()
                        .and_then(|c| c.get(&spec.id))
                        .map(|t| (t, format!("congestion.{}", spec.id)))
                });
            let row = match trace {
                Some((raw, tpath)) => {
                    if raw.len() < samples {
                        return Err(ScenarioError::invalid(
                            tpath,
                            format!("{} samples, the window needs {samples}", raw.len()),
                        ));
                    }
                    congestion_row_to_ce(raw, &grid)
                        .map_err(|e| ScenarioError::invalid(tpath, e.to_string()))?
                }
                None => vec![1.0; n_points],
            };
            ce.push(row);
        }
        if let Some(id) = context.congestion.keys().find(|id| !self.index.contains_key(*id)) {
            return Err(ScenarioError::invalid(
                format!("context.congestion.{id}"),
                format!("unknown spot id {id:?}"),
            ));
        }
        let we = weather.effects(&indoor);
        ScoreTable::decomposed(&grid, sv, tv, ce, we)
            .map_err(|e| ScenarioError::invalid("spots", e.to_string()))
    }

    pub fn file(&self) -> &ScenarioFile {
        &self.file
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.instance.grid
    }

    pub fn table(&self) -> &ScoreTable {
        &self.table
    }

    pub fn spot_id(&self, key: &str) -> Option<SpotId> {
        self.index.get(key).copied()
    }

    pub fn spot_key(&self, id: SpotId) -> &str {
        &self.instance.spots[id.0].key
    }

    /// Spots listed as already visited in the document.
    pub fn visited(&self) -> &BTreeSet<SpotId> {
        &self.visited
    }

    pub fn origin_spot(&self) -> Option<SpotId> {
        self.origin_spot
    }

    /// Planner state at the scenario's start: the listed visited spots plus
    /// the spot the origin stands on.
    pub fn initial_state(&self) -> PlannerState {
        let mut visited = self.visited.clone();
        visited.extend(self.origin_spot);
        PlannerState::new(&self.instance, visited, Position::Origin, self.file.now)
            .expect("validated scenario")
    }

    /// Serialises back to the document format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("scenario serialises")
    }
}
