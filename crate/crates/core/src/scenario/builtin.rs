//! Bundled scenarios.

use std::collections::BTreeMap;

use super::{
    GridSpec, OriginSpec, Scenario, ScenarioError, ScenarioFile, SpotSpec, TimeBonus, WeatherSpec,
    SCHEMA_VERSION,
};
use crate::scoring::Weather;

fn t(s: &str) -> crate::model::TimePoint {
    s.parse().expect("builtin time")
}

/// Names accepted by [`builtin`].
pub fn builtin_names() -> &'static [&'static str] {
    &["table3", "synth20"]
}

pub fn builtin(name: &str) -> Result<Scenario, ScenarioError> {
    match name {
        "table3" => Ok(builtin_table3()),
        "synth20" => Ok(builtin_synth20()),
        other => Err(ScenarioError::invalid(
            "builtin",
            format!(
                "unknown builtin scenario {other:?}, expected one of {}",
                builtin_names().join(", ")
            ),
        )),
    }
}

/// Nine spots `A`..`I` with hourly slots 13:00-18:00, a one-hour stay at
/// every spot and one hour between any two locations. The tourist stands
/// at `I` at 12:00 having already seen `B` and `H`.
pub fn builtin_table3() -> Scenario {
    const VALUES: [[f64; 6]; 9] = [
        [7.0, 3.0, 4.0, 5.0, 6.0, 7.0],
        [4.0, 5.0, 3.0, 2.0, 4.0, 5.0],
        [4.0, 5.0, 6.0, 7.0, 9.0, 6.0],
        [4.0, 5.0, 4.0, 3.0, 2.0, 6.0],
        [4.0, 3.0, 2.0, 1.0, 2.0, 3.0],
        [7.0, 7.0, 6.0, 4.0, 3.0, 2.0],
        [5.0, 4.0, 3.0, 2.0, 4.0, 7.0],
        [4.0, 5.0, 4.0, 3.0, 2.0, 1.0],
        [2.0, 1.0, 4.0, 5.0, 1.0, 6.0],
    ];
    let keys = ["A", "B", "C", "D", "E", "F", "G", "H", "I"];
    let spots = keys
        .iter()
        .map(|k| SpotSpec {
            id: (*k).to_string(),
            name: format!("Spot {k}"),
            indoor: matches!(*k, "E" | "I"),
            stay_minutes: 60,
            sv: None,
            tv: Vec::new(),
        })
        .collect();
    let size = keys.len() + 1;
    let travel = (0..size)
        .map(|i| (0..size).map(|j| if i == j { 0 } else { 60 }).collect())
        .collect();
    let file = ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: "table3".into(),
        description: "Nine-spot worked example with hourly slots and uniform one-hour stays and \
                      travel times; values are given directly per slot."
            .into(),
        grid: GridSpec {
            start: t("13:00"),
            end: t("18:00"),
            slot_width_minutes: 60,
        },
        origin: OriginSpec {
            name: "I".into(),
            spot: Some("I".into()),
        },
        now: t("12:00"),
        spots,
        travel_minutes: travel,
        congestion: None,
        weather: Some(WeatherSpec::Constant(Weather::Sunny)),
        direct_eval: Some(VALUES.iter().map(|r| r.to_vec()).collect()),
        visited: vec!["B".into(), "H".into()],
    };
    Scenario::from_file(file).expect("table3 is valid")
}

struct Poi {
    id: &'static str,
    name: &'static str,
    indoor: bool,
    stay: u16,
    sv: f64,
    /// Planar position in metres east/north of the station.
    at: (f64, f64),
    /// Half-hour sample index of peak crowding and its height.
    peak: (f64, f64),
}

const POIS: [Poi; 20] = [
    Poi { id: "IK", name: "Ishibe-Koji", indoor: false, stay: 10, sv: 3.0, at: (1000.0, -100.0), peak: (3.0, 40.0) },
    Poi { id: "RNT", name: "Rokuhara Mitsuji Temple", indoor: false, stay: 30, sv: 3.0, at: (400.0, -700.0), peak: (2.0, 30.0) },
    Poi { id: "KCM", name: "Kyoto Culture Museum", indoor: true, stay: 60, sv: 2.0, at: (-1700.0, 600.0), peak: (4.0, 35.0) },
    Poi { id: "CIT", name: "Chion-in Temple", indoor: false, stay: 40, sv: 4.0, at: (1300.0, 600.0), peak: (2.0, 70.0) },
    Poi { id: "YK", name: "Yasui Konpiragu", indoor: false, stay: 20, sv: 2.5, at: (700.0, -350.0), peak: (5.0, 45.0) },
    Poi { id: "NM", name: "Nishiki Market", indoor: true, stay: 40, sv: 3.0, at: (-1300.0, 200.0), peak: (1.0, 90.0) },
    Poi { id: "KRGS", name: "Kyoto Ryozan Gokoku Shrine", indoor: false, stay: 30, sv: 2.0, at: (1200.0, -500.0), peak: (6.0, 25.0) },
    Poi { id: "RD", name: "Rokkakudo", indoor: false, stay: 20, sv: 2.0, at: (-1600.0, 400.0), peak: (3.0, 30.0) },
    Poi { id: "HS", name: "Hanamikoji Street", indoor: false, stay: 20, sv: 3.0, at: (450.0, -100.0), peak: (8.0, 80.0) },
    Poi { id: "KDT", name: "Kodaiji Temple", indoor: false, stay: 40, sv: 4.0, at: (1100.0, -250.0), peak: (4.0, 60.0) },
    Poi { id: "SGR", name: "Shoren-in Gate Ruins", indoor: false, stay: 40, sv: 3.5, at: (1400.0, 1000.0), peak: (5.0, 30.0) },
    Poi { id: "KM", name: "Kyoto Minamiza", indoor: true, stay: 30, sv: 2.5, at: (100.0, 0.0), peak: (7.0, 50.0) },
    Poi { id: "KYT", name: "Kiyomizu Temple", indoor: false, stay: 60, sv: 5.0, at: (1500.0, -1100.0), peak: (3.0, 100.0) },
    Poi { id: "CHT", name: "Chorakuji Temple", indoor: false, stay: 20, sv: 1.5, at: (1350.0, 50.0), peak: (4.0, 15.0) },
    Poi { id: "MP", name: "Maruyama Park", indoor: false, stay: 20, sv: 3.0, at: (1200.0, 200.0), peak: (9.0, 55.0) },
    Poi { id: "KNT", name: "Kenninji Temple", indoor: false, stay: 40, sv: 4.0, at: (350.0, -400.0), peak: (1.0, 50.0) },
    Poi { id: "YS", name: "Yasaka Shrine", indoor: false, stay: 20, sv: 3.5, at: (950.0, 50.0), peak: (6.0, 85.0) },
    Poi { id: "TT", name: "Tofukuji Temple", indoor: false, stay: 60, sv: 4.0, at: (400.0, -3800.0), peak: (2.0, 65.0) },
    Poi { id: "NZ", name: "Ninenzaka", indoor: false, stay: 20, sv: 3.5, at: (1150.0, -600.0), peak: (5.0, 75.0) },
    Poi { id: "SSD", name: "Sanju Sangen Do", indoor: false, stay: 50, sv: 4.0, at: (200.0, -2000.0), peak: (0.0, 60.0) },
];

const EVENING_LIGHTS: [&str; 3] = ["KDT", "KYT", "CIT"];
const MAGAZINE_TEXT: [&str; 4] = ["RD", "MP", "SGR", "TT"];

/// Walking minutes for a straight-line distance, with a street detour
/// factor and 75 m/min pace.
fn walk_minutes(a: (f64, f64), b: (f64, f64)) -> u32 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    (d * 1.3 / 75.0).ceil() as u32
}

/// Synthetic twenty-spot afternoon in a Higashiyama-like district, with
/// 10-minute slots from 13:00 to 18:00 departing from Gion Station on a
/// sunny day.
///
/// Positions, stays, static scores and crowding curves are invented; the
/// time bonuses follow the evening-illumination rule (+2 for three spots,
/// +1 for four more) over 17:30-18:00.
pub fn builtin_synth20() -> Scenario {
    let samples = 11;
    let spots = POIS
        .iter()
        .map(|p| {
            let bonus = if EVENING_LIGHTS.contains(&p.id) {
                Some(2.0)
            } else if MAGAZINE_TEXT.contains(&p.id) {
                Some(1.0)
            } else {
                None
            };
            SpotSpec {
                id: p.id.into(),
                name: p.name.into(),
                indoor: p.indoor,
                stay_minutes: p.stay,
                sv: Some(p.sv),
                tv: bonus
                    .map(|value| TimeBonus {
                        from_slot: t("17:30"),
                        to_slot: t("18:00"),
                        value,
                    })
                    .into_iter()
                    .collect(),
            }
        })
        .collect();
    let mut places: Vec<(f64, f64)> = POIS.iter().map(|p| p.at).collect();
    places.push((0.0, 0.0));
    let travel = places
        .iter()
        .map(|&a| places.iter().map(|&b| walk_minutes(a, b)).collect())
        .collect();
    let congestion: BTreeMap<String, Vec<f64>> = POIS
        .iter()
        .map(|p| {
            let (centre, height) = p.peak;
            let trace = (0..samples)
                .map(|k| {
                    let x = k as f64 - centre;
                    let v = 10.0 + height * (-x * x / 6.0).exp();
                    (v * 10.0).round() / 10.0
                })
                .collect();
            (p.id.to_string(), trace)
        })
        .collect();
    let file = ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: "synth20".into(),
        description: "Synthetic 20-spot district instance (invented geometry, stays and crowding \
                      curves); 10-minute slots, 13:00-18:00, sunny."
            .into(),
        grid: GridSpec {
            start: t("13:00"),
            end: t("18:00"),
            slot_width_minutes: 10,
        },
        origin: OriginSpec {
            name: "Gion Station".into(),
            spot: None,
        },
        now: t("13:00"),
        spots,
        travel_minutes: travel,
        congestion: Some(congestion),
        weather: Some(WeatherSpec::Constant(Weather::Sunny)),
        direct_eval: None,
        visited: Vec::new(),
    };
    Scenario::from_file(file).expect("synth20 is valid")
}
