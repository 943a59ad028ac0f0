//! C ABI over the tourplan planner.
//!
//! Scenarios and planning results are opaque handles owned by the caller
//! and released with their `*_free` function. Every fallible call returns a
//! [`TpStatus`]; on failure [`tp_last_error`] describes what went wrong on
//! the calling thread. Strings returned through `char **` outputs belong to
//! the caller and are released with [`tp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tourplan::planner::{plan, Algorithm, PlanRequest, RankedRoutes};
use tourplan::report::route_views;
use tourplan::scenario::{builtin, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidScenario = 3,
    InvalidArgument = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpAlgorithm {
    /// Time-series greedy.
    A = 0,
    /// Whole single greedy.
    B = 1,
    /// Whole greedy with search width.
    C = 2,
}

impl From<TpAlgorithm> for Algorithm {
    fn from(a: TpAlgorithm) -> Self {
        match a {
            TpAlgorithm::A => Algorithm::A,
            TpAlgorithm::B => Algorithm::B,
            TpAlgorithm::C => Algorithm::C,
        }
    }
}

/// A validated scenario.
pub struct TpScenario {
    inner: Scenario,
}

/// Ranked routes from one planner run.
pub struct TpRoutes {
    scenario: Scenario,
    routes: RankedRoutes,
    keys: Vec<CString>,
}

/// One visit of a route. `spot_key` stays valid as long as the routes
/// handle it came from.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TpVisit {
    /// Minutes since midnight.
    pub arrival_minutes: u16,
    /// Index of the spot in the scenario's spot list.
    pub spot_index: usize,
    pub spot_key: *const c_char,
    pub score: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("no interior nul"));
}

fn fail(status: TpStatus, message: impl Into<String>) -> TpStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> TpStatus) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(TpStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, TpStatus> {
    if s.is_null() {
        return Err(fail(TpStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(TpStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> TpStatus {
    if out.is_null() {
        return fail(TpStatus::NullArgument, "null output pointer");
    }
    *out = CString::new(s).expect("json has no nul").into_raw();
    TpStatus::Ok
}

unsafe fn put_scenario(out: *mut *mut TpScenario, result: Result<Scenario, String>) -> TpStatus {
    if out.is_null() {
        return fail(TpStatus::NullArgument, "null output pointer");
    }
    match result {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(TpScenario { inner }));
            TpStatus::Ok
        }
        Err(m) => {
            *out = ptr::null_mut();
            fail(TpStatus::InvalidScenario, m)
        }
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a scenario document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_scenario_from_json(
    json: *const c_char,
    out: *mut *mut TpScenario,
) -> TpStatus {
    guard(|| match read_str(json) {
        Ok(text) => put_scenario(out, Scenario::load_str(text).map_err(|e| e.to_string())),
        Err(status) => status,
    })
}

/// Loads a bundled scenario by name (`table3`, `synth20`).
///
/// # Safety
/// `name` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_scenario_builtin(
    name: *const c_char,
    out: *mut *mut TpScenario,
) -> TpStatus {
    guard(|| match read_str(name) {
        Ok(name) => put_scenario(out, builtin(name).map_err(|e| e.to_string())),
        Err(status) => status,
    })
}

/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tp_scenario_free(scenario: *mut TpScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of spots, or 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_scenario_spot_count(scenario: *const TpScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.instance().n_spots())
}

/// Serialises the scenario document.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_scenario_to_json(
    scenario: *const TpScenario,
    out: *mut *mut c_char,
) -> TpStatus {
    guard(|| match scenario.as_ref() {
        Some(s) => write_string(out, s.inner.to_json()),
        None => fail(TpStatus::NullArgument, "null scenario"),
    })
}

/// Plans from the scenario's start. `width` is ignored by A and B.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_plan(
    scenario: *const TpScenario,
    algorithm: TpAlgorithm,
    width: usize,
    n_results: usize,
    out: *mut *mut TpRoutes,
) -> TpStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(TpStatus::NullArgument, "null scenario");
        };
        if out.is_null() {
            return fail(TpStatus::NullArgument, "null output pointer");
        }
        if width < 1 || n_results < 1 {
            return fail(TpStatus::InvalidArgument, "width and n_results must be at least 1");
        }
        let s = &s.inner;
        let state = s.initial_state();
        let req = PlanRequest::new(s.instance(), &state, s.table())
            .with_width(width)
            .with_results(n_results);
        let routes = plan(algorithm.into(), &req);
        let keys = s
            .instance()
            .spots
            .iter()
            .map(|spot| CString::new(spot.key.replace('\0', " ")).expect("no nul"))
            .collect();
        *out = Box::into_raw(Box::new(TpRoutes {
            scenario: s.clone(),
            routes,
            keys,
        }));
        TpStatus::Ok
    })
}

/// # Safety
/// `routes` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tp_routes_free(routes: *mut TpRoutes) {
    if !routes.is_null() {
        drop(Box::from_raw(routes));
    }
}

/// Number of routes, or 0 for a null handle.
///
/// # Safety
/// `routes` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tp_routes_count(routes: *const TpRoutes) -> usize {
    routes.as_ref().map_or(0, |r| r.routes.len())
}

unsafe fn route_at<'a>(
    routes: *const TpRoutes,
    index: usize,
) -> Result<(&'a TpRoutes, &'a tourplan::RankedRoute), TpStatus> {
    let r = routes
        .as_ref()
        .ok_or_else(|| fail(TpStatus::NullArgument, "null routes"))?;
    let route = r.routes.routes.get(index).ok_or_else(|| {
        fail(
            TpStatus::OutOfRange,
            format!("route {index} out of range ({} routes)", r.routes.len()),
        )
    })?;
    Ok((r, route))
}

/// Tour score of route `index`.
///
/// # Safety
/// `routes` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_routes_score(
    routes: *const TpRoutes,
    index: usize,
    out: *mut f64,
) -> TpStatus {
    guard(|| match route_at(routes, index) {
        Ok((_, route)) if !out.is_null() => {
            *out = route.tour_score;
            TpStatus::Ok
        }
        Ok(_) => fail(TpStatus::NullArgument, "null output pointer"),
        Err(status) => status,
    })
}

/// Number of visits in route `index`.
///
/// # Safety
/// `routes` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_routes_len(
    routes: *const TpRoutes,
    index: usize,
    out: *mut usize,
) -> TpStatus {
    guard(|| match route_at(routes, index) {
        Ok((_, route)) if !out.is_null() => {
            *out = route.itinerary.len();
            TpStatus::Ok
        }
        Ok(_) => fail(TpStatus::NullArgument, "null output pointer"),
        Err(status) => status,
    })
}

/// Visit `visit` of route `index`.
///
/// # Safety
/// `routes` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_routes_visit(
    routes: *const TpRoutes,
    index: usize,
    visit: usize,
    out: *mut TpVisit,
) -> TpStatus {
    guard(|| {
        let (r, route) = match route_at(routes, index) {
            Ok(found) => found,
            Err(status) => return status,
        };
        if out.is_null() {
            return fail(TpStatus::NullArgument, "null output pointer");
        }
        let Some(e) = route.itinerary.entries.get(visit) else {
            return fail(
                TpStatus::OutOfRange,
                format!("visit {visit} out of range ({} visits)", route.itinerary.len()),
            );
        };
        *out = TpVisit {
            arrival_minutes: e.arrival.minutes(),
            spot_index: e.spot.0,
            spot_key: r.keys[e.spot.0].as_ptr(),
            score: e.score,
        };
        TpStatus::Ok
    })
}

/// Routes as JSON, in the same layout as the HTTP service.
///
/// # Safety
/// `routes` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tp_routes_to_json(
    routes: *const TpRoutes,
    out: *mut *mut c_char,
) -> TpStatus {
    guard(|| match routes.as_ref() {
        Some(r) => {
            let views = route_views(&r.scenario, &r.routes);
            write_string(out, serde_json::to_string(&views).expect("routes serialise"))
        }
        None => fail(TpStatus::NullArgument, "null routes"),
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
