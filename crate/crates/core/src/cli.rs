//! Command-line front end: batch planning, width sweeps, scoring of fixed
//! routes, timing benchmarks and the HTTP server.

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{validate_itinerary, Itinerary, ModelError, Position, VisitEntry};
use crate::planner::{plan, Algorithm, PlanRequest, RankedRoutes, DEFAULT_RESULTS};
use crate::report::{
    fmt1, mean_score, route_line, route_view, route_views, ser_round1, timeline, RouteView,
    Segment, VisitView,
};
use crate::scenario::{builtin, builtin_names, Scenario};
use crate::TimePoint;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_LOAD: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tourplan", version, about = "On-site tour planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recommend the top routes from the scenario's start.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "C")]
        algorithm: Algorithm,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = DEFAULT_RESULTS)]
        top: usize,
        /// Also print each route's move/free/visit segments.
        #[arg(long)]
        timeline: bool,
    },
    /// Run algorithm C for every width in a range.
    SweepWidth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        repeat: u32,
    },
    /// Score a fixed route under the scenario.
    ScoreRoute {
        #[command(flatten)]
        common: Common,
        /// JSON file with a `visits` list, or machine output of `plan`.
        #[arg(long)]
        route: std::path::PathBuf,
        /// Route to take from a `plan` report.
        #[arg(long, default_value_t = 1)]
        rank: usize,
    },
    /// Time algorithms A, B and C.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        width: usize,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
        repeat: u32,
    },
    /// Print a scenario document.
    ShowScenario {
        #[arg(long)]
        scenario: String,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long)]
    scenario: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Machine,
}

impl clap::builder::ValueParserFactory for Algorithm {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Algorithm>())
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Resolves a path or a bundled scenario name.
pub fn load_scenario(spec: &str) -> Result<Scenario, String> {
    let path = Path::new(spec);
    if path.exists() {
        let bytes = std::fs::read(path).map_err(|e| format!("{spec}: {e}"))?;
        return Scenario::load(&bytes).map_err(|e| format!("{spec}: {e}"));
    }
    if builtin_names().contains(&spec) {
        return builtin(spec).map_err(|e| e.to_string());
    }
    Err(format!(
        "{spec}: no such file and not a bundled scenario ({})",
        builtin_names().join(", ")
    ))
}

fn load(spec: &str) -> Result<Scenario, Failure> {
    load_scenario(spec).map_err(|m| Failure::new(EXIT_LOAD, m))
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(EXIT_FAILURE, e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn timed_plan(algorithm: Algorithm, req: &PlanRequest<'_>) -> (RankedRoutes, Duration) {
    let start = Instant::now();
    let routes = plan(algorithm, req);
    (routes, start.elapsed())
}

#[derive(Serialize)]
struct PlanReport {
    scenario: String,
    algorithm: Algorithm,
    width: usize,
    position: String,
    now: TimePoint,
    routes: Vec<RouteView>,
    #[serde(serialize_with = "ser_round1")]
    mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timelines: Option<Vec<Vec<Segment>>>,
}

fn origin_label(s: &Scenario) -> String {
    s.file().origin.name.clone()
}

fn cmd_plan(
    out: &mut dyn Write,
    common: &Common,
    algorithm: Algorithm,
    width: usize,
    top: usize,
    with_timeline: bool,
) -> Outcome {
    if width < 1 || top < 1 {
        return Err(Failure::new(EXIT_USAGE, "--width and --top must be at least 1"));
    }
    let s = load(&common.scenario)?;
    let state = s.initial_state();
    let req = PlanRequest::new(s.instance(), &state, s.table())
        .with_results(top)
        .with_width(width);
    let routes = plan(algorithm, &req);
    let views = route_views(&s, &routes);
    let timelines = with_timeline.then(|| {
        routes
            .routes
            .iter()
            .map(|r| timeline(&s, &r.itinerary))
            .collect::<Vec<_>>()
    });
    let report = PlanReport {
        scenario: s.name().to_string(),
        algorithm,
        width: algorithm.effective_width(width),
        position: origin_label(&s),
        now: state.now,
        mean: mean_score(&views),
        routes: views,
        timelines,
    };
    if common.format == Format::Machine {
        return json_line(out, &report);
    }
    writeln!(
        out,
        "{}: algorithm {} (width {}) from {} at {}",
        report.scenario, report.algorithm, report.width, report.position, report.now
    )?;
    if report.routes.is_empty() {
        writeln!(out, "no feasible route")?;
    }
    for (i, r) in report.routes.iter().enumerate() {
        writeln!(out, "{}. {}", r.rank, route_line(r))?;
        writeln!(
            out,
            "   move {} min, visit {} min, free {} min",
            r.travel_minutes, r.stay_minutes, r.free_time_minutes
        )?;
        if let Some(t) = &report.timelines {
            for seg in &t[i] {
                let kind = serde_json::to_value(seg.kind).expect("kind");
                writeln!(
                    out,
                    "     {}-{} {:5} {}",
                    seg.from,
                    seg.to,
                    kind.as_str().unwrap_or_default(),
                    seg.spot
                )?;
            }
        }
    }
    writeln!(out, "mean {} over {} routes", fmt1(report.mean), report.routes.len())?;
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    k: usize,
    #[serde(serialize_with = "ser_round1")]
    best_score: f64,
    mean_seconds: f64,
    best: Option<RouteView>,
}

#[derive(Serialize)]
struct SweepReport {
    scenario: String,
    repeat: u32,
    rows: Vec<SweepRow>,
    /// Width from which the best score saturates, see [`plateau_from`].
    plateau_from: Option<usize>,
}

/// Step gains at most this fraction of the largest gain count as flat.
pub const PLATEAU_TOLERANCE: f64 = 0.1;

/// Smallest `k` from which every later gain in best score is at most
/// `tolerance` times the largest gain across the sweep, or `None` when the
/// last step still climbs. With `tolerance` 0 this finds an exact plateau.
pub fn plateau_from(ks: &[usize], scores: &[f64], tolerance: f64) -> Option<usize> {
    if ks.len() < 2 {
        return None;
    }
    let gains: Vec<f64> = scores.windows(2).map(|w| w[1] - w[0]).collect();
    let largest = gains.iter().copied().fold(0.0, f64::max);
    let flat = |g: f64| g <= tolerance * largest;
    let mut from = gains.len();
    while from > 0 && flat(gains[from - 1]) {
        from -= 1;
    }
    (from < gains.len()).then(|| ks[from])
}

fn cmd_sweep(out: &mut dyn Write, common: &Common, k_min: usize, k_max: usize, repeat: u32) -> Outcome {
    if k_min < 1 || k_min > k_max {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("invalid width range {k_min}..{k_max}: need 1 <= k-min <= k-max"),
        ));
    }
    let s = load(&common.scenario)?;
    let state = s.initial_state();
    let mut rows = Vec::new();
    for k in k_min..=k_max {
        let req = PlanRequest::new(s.instance(), &state, s.table()).with_width(k);
        let mut total = Duration::ZERO;
        let mut routes = RankedRoutes::default();
        for _ in 0..repeat {
            let (r, t) = timed_plan(Algorithm::C, &req);
            total += t;
            routes = r;
        }
        rows.push(SweepRow {
            k,
            best_score: routes.best_score().unwrap_or(0.0),
            mean_seconds: total.as_secs_f64() / f64::from(repeat),
            best: routes.best().map(|r| route_view(&s, 1, &r.itinerary)),
        });
    }
    let ks: Vec<usize> = rows.iter().map(|r| r.k).collect();
    let scores: Vec<f64> = rows.iter().map(|r| r.best_score).collect();
    let report = SweepReport {
        scenario: s.name().to_string(),
        repeat,
        plateau_from: plateau_from(&ks, &scores, PLATEAU_TOLERANCE),
        rows,
    };
    if common.format == Format::Machine {
        return json_line(out, &report);
    }
    writeln!(out, "{:>3}  {:>10}  {:>12}", "k", "best", "mean time")?;
    for r in &report.rows {
        writeln!(
            out,
            "{:>3}  {:>10}  {:>10.4} s",
            r.k,
            fmt1(r.best_score),
            r.mean_seconds
        )?;
    }
    match report.plateau_from {
        Some(k) => writeln!(out, "plateau from k={k}")?,
        None => writeln!(out, "no plateau within k={k_min}..{k_max}")?,
    }
    Ok(())
}

#[derive(Deserialize)]
struct RouteFile {
    visits: Vec<VisitView>,
}

fn read_route(path: &Path, rank: usize) -> Result<Vec<VisitView>, Failure> {
    let bad = |m: String| Failure::new(EXIT_LOAD, format!("{}: {m}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let mut doc: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if let Some(routes) = doc.get_mut("routes").and_then(Value::as_array_mut) {
        if rank < 1 || rank > routes.len() {
            return Err(bad(format!("no route of rank {rank} ({} in file)", routes.len())));
        }
        doc = routes.swap_remove(rank - 1);
    }
    let file: RouteFile = serde_json::from_value(doc).map_err(|e| bad(e.to_string()))?;
    Ok(file.visits)
}

fn cmd_score_route(out: &mut dyn Write, common: &Common, route: &Path, rank: usize) -> Outcome {
    let s = load(&common.scenario)?;
    let visits = read_route(route, rank)?;
    let state = s.initial_state();
    let mut z = Itinerary::new(Position::Origin, state.now);
    for (i, v) in visits.iter().enumerate() {
        let spot = s.spot_id(&v.spot).ok_or_else(|| {
            Failure::new(EXIT_LOAD, format!("visits[{i}]: unknown spot {:?}", v.spot))
        })?;
        if state.visited.contains(&spot) {
            return Err(Failure::new(
                EXIT_INFEASIBLE,
                format!("infeasible route at leg {i}: {} was visited before the tour", v.spot),
            ));
        }
        let score = match s.grid().point_index(v.arrival) {
            Some(p) => s.table().value_at(spot, p),
            None => 0.0,
        };
        z.entries.push(VisitEntry {
            arrival: v.arrival,
            spot,
            score,
        });
    }
    validate_itinerary(s.instance(), &z).map_err(|e| match e {
        ModelError::Infeasible { .. } => Failure::new(EXIT_INFEASIBLE, e.to_string()),
        other => Failure::new(EXIT_LOAD, other.to_string()),
    })?;
    let view = route_view(&s, 1, &z);
    if common.format == Format::Machine {
        return json_line(out, &view);
    }
    for v in &view.visits {
        writeln!(out, "{}  {:<6} {:>5}", v.arrival, v.spot, fmt1(v.score))?;
    }
    writeln!(out, "{}", route_line(&view))?;
    writeln!(
        out,
        "move {} min, visit {} min, free {} min",
        view.travel_minutes, view.stay_minutes, view.free_time_minutes
    )?;
    Ok(())
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Serialize)]
struct BenchRow {
    algorithm: Algorithm,
    width: usize,
    mean_seconds: f64,
    sd_seconds: f64,
    #[serde(serialize_with = "ser_round1")]
    best_score: f64,
}

#[derive(Serialize)]
struct BenchReport {
    scenario: String,
    repeat: u32,
    rows: Vec<BenchRow>,
}

fn cmd_bench(out: &mut dyn Write, common: &Common, width: usize, repeat: u32) -> Outcome {
    if width < 1 {
        return Err(Failure::new(EXIT_USAGE, "--width must be at least 1"));
    }
    let s = load(&common.scenario)?;
    let state = s.initial_state();
    let mut rows = Vec::new();
    for algorithm in [Algorithm::A, Algorithm::B, Algorithm::C] {
        let req = PlanRequest::new(s.instance(), &state, s.table()).with_width(width);
        let mut times = Vec::new();
        let mut best = 0.0;
        for _ in 0..repeat {
            let (routes, t) = timed_plan(algorithm, &req);
            times.push(t.as_secs_f64());
            best = routes.best_score().unwrap_or(0.0);
        }
        let (mean, sd) = mean_sd(&times);
        rows.push(BenchRow {
            algorithm,
            width: algorithm.effective_width(width),
            mean_seconds: mean,
            sd_seconds: sd,
            best_score: best,
        });
    }
    let report = BenchReport {
        scenario: s.name().to_string(),
        repeat,
        rows,
    };
    if common.format == Format::Machine {
        return json_line(out, &report);
    }
    writeln!(out, "{}: {} runs each", report.scenario, repeat)?;
    for r in &report.rows {
        writeln!(
            out,
            "{} (width {})  {:.4}±{:.4} (s)  best {}",
            r.algorithm,
            r.width,
            r.mean_seconds,
            r.sd_seconds,
            fmt1(r.best_score)
        )?;
    }
    Ok(())
}

fn cmd_serve(addr: std::net::SocketAddr) -> Outcome {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::service::serve(addr))?;
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Plan {
            common,
            algorithm,
            width,
            top,
            timeline,
        } => cmd_plan(out, common, *algorithm, *width, *top, *timeline),
        Command::SweepWidth {
            common,
            k_min,
            k_max,
            repeat,
        } => cmd_sweep(out, common, *k_min, *k_max, *repeat),
        Command::ScoreRoute {
            common,
            route,
            rank,
        } => cmd_score_route(out, common, route, *rank),
        Command::Bench {
            common,
            width,
            repeat,
        } => cmd_bench(out, common, *width, *repeat),
        Command::ShowScenario { scenario } => {
            load(scenario).and_then(|s| writeln!(out, "{}", s.to_json()).map_err(Failure::from))
        }
        Command::Serve { addr } => cmd_serve(*addr),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_detection() {
        let ks = [1, 2, 3, 4, 5];
        assert_eq!(plateau_from(&ks, &[1.0, 2.0, 3.0, 3.0, 3.0], 0.0), Some(3));
        assert_eq!(plateau_from(&ks, &[1.0, 2.0, 3.0, 4.0, 5.0], 0.1), None);
        assert_eq!(plateau_from(&ks, &[2.0; 5], 0.0), Some(1));
        assert_eq!(plateau_from(&ks, &[33.5, 39.3, 44.65, 44.65, 44.7], 0.0), None);
        assert_eq!(plateau_from(&ks, &[33.5, 39.3, 44.65, 44.65, 44.7], 0.1), Some(3));
        assert_eq!(plateau_from(&[1], &[3.0], 0.1), None);
    }

    #[test]
    fn sample_deviation() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, sd) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((sd - 1.0).abs() < 1e-12);
    }
}
