mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use tourplan::model::{check_insert, tour_score, validate_itinerary, Itinerary, Position};
use tourplan::oracle::{exact_best_routes, exact_ev, Oracle, OracleError, OracleLimits};
use tourplan::planner::{
    candidate_pairs, plan, plan_time_series, plan_whole_greedy, Algorithm, PlanRequest,
    RankedRoutes,
};
use tourplan::scenario::{builtin_table3, generate_random, RandomInstanceSpec, Scenario};
use tourplan::{SpotId, TimePoint};

fn hm(s: &str) -> TimePoint {
    s.parse().unwrap()
}

fn visits(s: &Scenario, routes: &RankedRoutes, rank: usize) -> Vec<(String, String, f64)> {
    routes.routes[rank]
        .itinerary
        .entries
        .iter()
        .map(|e| (e.arrival.to_string(), s.spot_key(e.spot).to_string(), e.score))
        .collect()
}

fn route_for(routes: &RankedRoutes, first: SpotId) -> Option<&tourplan::RankedRoute> {
    routes.routes.iter().find(|r| r.itinerary.entries[0].spot == first)
}

#[test]
fn time_series_walkthrough_from_a() {
    let s = builtin_table3();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table()).with_results(10);
    let routes = plan_time_series(&req);
    let a = route_for(&routes, s.spot_id("A").unwrap()).unwrap();
    let got: Vec<(String, String, f64)> = a
        .itinerary
        .entries
        .iter()
        .map(|e| (e.arrival.to_string(), s.spot_key(e.spot).to_string(), e.score))
        .collect();
    assert_eq!(
        got,
        vec![
            ("13:00".into(), "A".into(), 7.0),
            ("15:00".into(), "C".into(), 6.0),
            ("17:00".into(), "G".into(), 4.0)
        ]
    );
    assert_eq!(a.tour_score, 17.0);
}

#[test]
fn whole_single_greedy_walkthrough_from_a() {
    let s = builtin_table3();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table()).with_results(10);
    let routes = plan_whole_greedy(&req);
    assert_eq!(
        visits(&s, &routes, 0),
        vec![
            ("13:00".into(), "A".into(), 7.0),
            ("15:00".into(), "F".into(), 6.0),
            ("17:00".into(), "C".into(), 9.0)
        ]
    );
    assert_eq!(routes.best_score(), Some(22.0));
}

#[test]
fn candidate_pairs_on_table3() {
    let s = builtin_table3();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table());
    let empty = Itinerary::new(Position::Origin, hm("12:00"));
    let pairs = candidate_pairs(&req, &empty);
    let head = pairs[0];
    assert_eq!((head.arrival, s.spot_key(head.spot), head.value), (hm("17:00"), "C", 9.0));
    let sevens: Vec<(String, &str)> = pairs
        .iter()
        .filter(|p| p.value == 7.0)
        .map(|p| (p.arrival.to_string(), s.spot_key(p.spot)))
        .collect();
    assert_eq!(
        sevens,
        vec![
            ("13:00".to_string(), "A"),
            ("13:00".to_string(), "F"),
            ("14:00".to_string(), "F"),
            ("16:00".to_string(), "C"),
            ("18:00".to_string(), "A"),
            ("18:00".to_string(), "G"),
        ]
    );
    // visited B, H and the origin spot I never appear
    assert!(pairs
        .iter()
        .all(|p| !["B", "H", "I"].contains(&s.spot_key(p.spot))));
}

#[test]
fn width_three_branches_on_top_feasible_pairs() {
    let s = builtin_table3();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table());
    let mut z = Itinerary::new(Position::Origin, hm("12:00"));
    let a = s.spot_id("A").unwrap();
    z.entries.push(tourplan::VisitEntry {
        arrival: hm("13:00"),
        spot: a,
        score: 7.0,
    });
    let top: Vec<(String, &str, f64)> = candidate_pairs(&req, &z)
        .into_iter()
        .filter(|p| p.arrival > hm("13:00"))
        .filter(|p| {
            check_insert(
                s.instance(),
                &z,
                &tourplan::VisitEntry {
                    arrival: p.arrival,
                    spot: p.spot,
                    score: p.value,
                },
            )
        })
        .take(3)
        .map(|p| (p.arrival.to_string(), s.spot_key(p.spot), p.value))
        .collect();
    assert_eq!(
        top,
        vec![
            ("17:00".to_string(), "C", 9.0),
            ("16:00".to_string(), "C", 7.0),
            ("15:00".to_string(), "C", 6.0)
        ]
    );
}

#[test]
fn table3_rankings_against_oracle() {
    let s = builtin_table3();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table()).with_results(10);
    let exact = exact_best_routes(&req, OracleLimits::default()).unwrap();
    // hand enumeration: A 22, F 20, G 20, D 19, E 19, C 16
    let by_first: Vec<(&str, f64)> = exact
        .routes
        .iter()
        .map(|r| (s.spot_key(r.itinerary.entries[0].spot), r.tour_score))
        .collect();
    assert_eq!(
        by_first,
        vec![("A", 22.0), ("F", 20.0), ("G", 20.0), ("D", 19.0), ("E", 19.0), ("C", 16.0)]
    );
    assert_eq!(
        common::brute_force_best(s.file(), &[]),
        Some(22.0),
        "independent enumeration"
    );
    let c = plan_whole_greedy(&req.with_width(3));
    assert_eq!(c.best_score(), Some(22.0));
    for r in &c.routes {
        let first = r.itinerary.entries[0].spot;
        let opt = route_for(&exact, first).unwrap().tour_score;
        assert!(r.tour_score <= opt);
    }
}

#[test]
fn exact_ev_table3_after_a() {
    let s = builtin_table3();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table());
    let remaining: BTreeSet<SpotId> = ["C", "D", "E", "F", "G"]
        .iter()
        .map(|k| s.spot_id(k).unwrap())
        .collect();
    let a = Position::Spot(s.spot_id("A").unwrap());
    // F@15:00 (6) then C@17:00 (9)
    let ev = exact_ev(&req, OracleLimits::default(), a, &remaining, hm("14:00")).unwrap();
    assert_eq!(ev, 15.0);
    assert_eq!(
        exact_ev(&req, OracleLimits::default(), a, &remaining, hm("18:00")).unwrap(),
        0.0
    );
    assert_eq!(
        exact_ev(&req, OracleLimits::default(), a, &BTreeSet::new(), hm("14:00")).unwrap(),
        0.0
    );
}

#[test]
fn oracle_refuses_large_or_expensive_instances() {
    let s = tourplan::scenario::builtin_synth20();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table());
    assert!(matches!(
        exact_best_routes(&req, OracleLimits::default()),
        Err(OracleError::TooLarge { what: "spots", .. })
    ));
    let small = generate_random(&RandomInstanceSpec::small(1));
    let state = small.initial_state();
    let req = PlanRequest::new(small.instance(), &state, small.table());
    let tight = OracleLimits {
        node_budget: 3,
        ..OracleLimits::default()
    };
    assert_eq!(
        exact_best_routes(&req, tight),
        Err(OracleError::BudgetExceeded(3))
    );
}

#[test]
fn oracle_single_spot_single_slot() {
    let mut file = generate_random(&RandomInstanceSpec {
        n_spots: 1,
        n_slots: 1,
        ..RandomInstanceSpec::small(4)
    })
    .file()
    .clone();
    file.spots[0].stay_minutes = 30;
    file.now = file.grid.start;
    file.travel_minutes = vec![vec![0, 0], vec![0, 0]];
    let s = Scenario::from_file(file).unwrap();
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table());
    let exact = exact_best_routes(&req, OracleLimits::default()).unwrap();
    assert_eq!(exact.len(), 1);
    let value = s.table().value_at(SpotId(0), 0);
    assert_eq!(exact.best_score(), Some(value));
}

#[test]
fn oracle_matches_brute_force_on_random_instances() {
    for seed in 0..60 {
        for triangle in [true, false] {
            let s = generate_random(&RandomInstanceSpec {
                triangle_inequality: triangle,
                ..RandomInstanceSpec::small(seed)
            });
            let state = s.initial_state();
            let req = PlanRequest::new(s.instance(), &state, s.table());
            let exact = exact_best_routes(&req, OracleLimits::default()).unwrap();
            assert_eq!(exact.best_score(), common::brute_force_best(s.file(), &[]), "seed {seed}");
        }
    }
}

#[test]
fn oracle_monotone_in_window() {
    for seed in 0..30 {
        let short = generate_random(&RandomInstanceSpec {
            n_slots: 4,
            ..RandomInstanceSpec::small(seed)
        });
        let mut longer_file = short.file().clone();
        longer_file.grid.end = longer_file.grid.end.plus(60);
        for row in longer_file.direct_eval.as_mut().unwrap() {
            row.extend([0.0, 0.0]);
        }
        let long = Scenario::from_file(longer_file).unwrap();
        let best = |s: &Scenario| {
            let state = s.initial_state();
            let req = PlanRequest::new(s.instance(), &state, s.table());
            let mut o = Oracle::new(req, OracleLimits::default()).unwrap();
            o.best_routes().unwrap().best_score().unwrap_or(0.0)
        };
        assert!(best(&long) >= best(&short), "seed {seed}");
    }
}

fn check_routes(s: &Scenario, routes: &RankedRoutes, state: &tourplan::PlannerState) {
    let mut last = f64::INFINITY;
    for r in &routes.routes {
        validate_itinerary(s.instance(), &r.itinerary).unwrap();
        assert_eq!(r.tour_score, tour_score(&r.itinerary));
        assert!(r.tour_score <= last);
        last = r.tour_score;
        for e in &r.itinerary.entries {
            assert!(!state.visited.contains(&e.spot));
            assert_eq!(
                e.score,
                s.table().eval(e.spot, e.arrival, s.grid()).unwrap()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planners_return_valid_deterministic_routes(seed in 0u64..10_000, width in 1usize..5, visited in 0usize..3) {
        let s = generate_random(&RandomInstanceSpec {
            n_spots: 7,
            n_slots: 10,
            triangle_inequality: seed % 2 == 0,
            ..RandomInstanceSpec::small(seed)
        });
        let mut state = s.initial_state();
        state.visited.extend((0..visited).map(SpotId));
        let req = PlanRequest::new(s.instance(), &state, s.table()).with_width(width);
        for alg in [Algorithm::A, Algorithm::B, Algorithm::C] {
            let first = plan(alg, &req);
            check_routes(&s, &first, &state);
            prop_assert!(first.len() <= 3);
            prop_assert_eq!(&first, &plan(alg, &req));
        }
    }

    #[test]
    fn reinserting_any_entry_is_feasible(seed in 0u64..10_000) {
        let s = generate_random(&RandomInstanceSpec { n_spots: 6, n_slots: 8, ..RandomInstanceSpec::small(seed) });
        let state = s.initial_state();
        let req = PlanRequest::new(s.instance(), &state, s.table()).with_width(2);
        for r in plan_whole_greedy(&req).routes {
            for i in 0..r.itinerary.len() {
                let mut without = r.itinerary.clone();
                let entry = without.entries.remove(i);
                prop_assert!(check_insert(s.instance(), &without, &entry));
            }
        }
    }
}
