#![allow(dead_code)]

use tourplan::scenario::ScenarioFile;

/// Brute-force optimum straight from a direct-valued scenario document.
///
/// Enumerates every sequence of distinct spots and every arrival slot for
/// each of them (the first visit at its earliest arrival), with its own
/// clock arithmetic. Shares no code with the library's search.
pub fn brute_force_best(file: &ScenarioFile, visited_extra: &[usize]) -> Option<f64> {
    let values = file.direct_eval.as_ref().expect("direct values");
    let n = file.spots.len();
    let start = file.grid.start.minutes() as u32;
    let end = file.grid.end.minutes() as u32;
    let width = file.grid.slot_width_minutes as u32;
    let stays: Vec<u32> = file.spots.iter().map(|s| s.stay_minutes as u32).collect();
    let travel = &file.travel_minutes;
    let origin = n;
    let mut excluded = vec![false; n];
    for v in &file.visited {
        excluded[file.spots.iter().position(|s| &s.id == v).unwrap()] = true;
    }
    if let Some(o) = &file.origin.spot {
        excluded[file.spots.iter().position(|s| &s.id == o).unwrap()] = true;
    }
    for &v in visited_extra {
        excluded[v] = true;
    }
    let align = |t: u32| -> u32 {
        if t <= start {
            start
        } else {
            start + (t - start).div_ceil(width) * width
        }
    };

    #[allow(clippy::too_many_arguments)]
    fn rest(
        from: usize,
        depart: u32,
        used: &mut Vec<bool>,
        values: &[Vec<f64>],
        stays: &[u32],
        travel: &[Vec<u32>],
        start: u32,
        end: u32,
        width: u32,
        align: &dyn Fn(u32) -> u32,
    ) -> f64 {
        let mut best = 0.0f64;
        for s in 0..stays.len() {
            if used[s] {
                continue;
            }
            let mut a = align(depart + travel[from][s]);
            while a + stays[s] <= end {
                used[s] = true;
                let v = values[s][((a - start) / width) as usize]
                    + rest(s, a + stays[s], used, values, stays, travel, start, end, width, align);
                used[s] = false;
                best = best.max(v);
                a += width;
            }
        }
        best
    }

    let now = file.now.minutes() as u32;
    let mut best: Option<f64> = None;
    let mut used = excluded.clone();
    for s in 0..n {
        if excluded[s] {
            continue;
        }
        let a = align(now + travel[origin][s]);
        if a > end || a + stays[s] > end {
            continue;
        }
        used[s] = true;
        let v = values[s][((a - start) / width) as usize]
            + rest(s, a + stays[s], &mut used, values, &stays, travel, start, end, width, &align);
        used[s] = false;
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best
}
