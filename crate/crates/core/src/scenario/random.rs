//! Seeded random instances for property tests and oracle comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridSpec, OriginSpec, Scenario, ScenarioFile, SpotSpec, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceSpec {
    pub n_spots: usize,
    pub n_slots: usize,
    pub slot_width: u16,
    /// Inclusive range of integer evaluation values.
    pub value_range: (i32, i32),
    /// Inclusive range of travel minutes between distinct locations.
    pub travel_range: (u32, u32),
    /// Inclusive range of stays, in slots.
    pub stay_slots: (u16, u16),
    pub triangle_inequality: bool,
    pub seed: u64,
}

impl RandomInstanceSpec {
    /// Small instance within default oracle limits.
    pub fn small(seed: u64) -> Self {
        Self {
            n_spots: 5,
            n_slots: 6,
            slot_width: 30,
            value_range: (1, 9),
            travel_range: (5, 50),
            stay_slots: (1, 2),
            triangle_inequality: true,
            seed,
        }
    }
}

/// All-pairs shortest paths, so that `m[i][k] <= m[i][j] + m[j][k]`.
fn metric_closure(m: &mut [Vec<u32>]) {
    let n = m.len();
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                let via = m[i][j] + m[j][k];
                if via < m[i][k] {
                    m[i][k] = via;
                }
            }
        }
    }
}

pub fn generate_random(spec: &RandomInstanceSpec) -> Scenario {
    assert!(spec.n_spots > 0 && spec.n_slots > 0 && spec.slot_width > 0);
    assert!(spec.value_range.0 <= spec.value_range.1);
    assert!(spec.travel_range.0 <= spec.travel_range.1);
    assert!(spec.stay_slots.0 >= 1 && spec.stay_slots.0 <= spec.stay_slots.1);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start: crate::model::TimePoint = "09:00".parse().expect("time");
    let span = spec.n_slots as u32 * u32::from(spec.slot_width);
    let end = start.plus(span);
    let n_points = spec.n_slots + 1;

    let spots: Vec<SpotSpec> = (0..spec.n_spots)
        .map(|i| SpotSpec {
            id: format!("S{i}"),
            name: format!("Spot {i}"),
            indoor: rng.gen_bool(0.3),
            stay_minutes: rng.gen_range(spec.stay_slots.0..=spec.stay_slots.1) * spec.slot_width,
            sv: None,
            tv: Vec::new(),
        })
        .collect();
    let direct_eval: Vec<Vec<f64>> = (0..spec.n_spots)
        .map(|_| {
            (0..n_points)
                .map(|_| f64::from(rng.gen_range(spec.value_range.0..=spec.value_range.1)))
                .collect()
        })
        .collect();
    let size = spec.n_spots + 1;
    let mut travel: Vec<Vec<u32>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| {
                    if i == j {
                        0
                    } else {
                        rng.gen_range(spec.travel_range.0..=spec.travel_range.1)
                    }
                })
                .collect()
        })
        .collect();
    if spec.triangle_inequality {
        metric_closure(&mut travel);
    }
    let now = start.plus(rng.gen_range(0..=u32::from(spec.slot_width)));

    let file = ScenarioFile {
        schema_version: SCHEMA_VERSION,
        name: format!("random-{}", spec.seed),
        description: String::new(),
        grid: GridSpec {
            start,
            end,
            slot_width_minutes: spec.slot_width,
        },
        origin: OriginSpec {
            name: "start".into(),
            spot: None,
        },
        now,
        spots,
        travel_minutes: travel,
        congestion: None,
        weather: None,
        direct_eval: Some(direct_eval),
        visited: Vec::new(),
    };
    Scenario::from_file(file).expect("generated scenario is valid")
}
