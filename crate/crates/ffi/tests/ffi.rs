use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use tourplan_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tp_last_error()) }.to_string_lossy().into_owned()
}

fn builtin(name: &str) -> *mut TpScenario {
    let name = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tp_scenario_builtin(name.as_ptr(), &mut s) }, TpStatus::Ok);
    s
}

#[test]
fn plan_table3_through_the_c_surface() {
    unsafe {
        let s = builtin("table3");
        assert_eq!(tp_scenario_spot_count(s), 9);
        let mut routes = ptr::null_mut();
        assert_eq!(tp_plan(s, TpAlgorithm::B, 1, 3, &mut routes), TpStatus::Ok);
        assert_eq!(tp_routes_count(routes), 3);
        let mut score = 0.0;
        assert_eq!(tp_routes_score(routes, 0, &mut score), TpStatus::Ok);
        assert_eq!(score, 22.0);
        let mut len = 0;
        assert_eq!(tp_routes_len(routes, 0, &mut len), TpStatus::Ok);
        let mut got = Vec::new();
        for i in 0..len {
            let mut v = std::mem::zeroed::<TpVisit>();
            assert_eq!(tp_routes_visit(routes, 0, i, &mut v), TpStatus::Ok);
            let key = CStr::from_ptr(v.spot_key).to_str().unwrap().to_string();
            got.push((v.arrival_minutes, key, v.score));
        }
        assert_eq!(
            got,
            vec![(780, "A".into(), 7.0), (900, "F".into(), 6.0), (1020, "C".into(), 9.0)]
        );
        let mut v = std::mem::zeroed::<TpVisit>();
        assert_eq!(tp_routes_visit(routes, 0, 3, &mut v), TpStatus::OutOfRange);
        assert_eq!(tp_routes_score(routes, 9, &mut score), TpStatus::OutOfRange);
        assert!(last_error().contains("route 9"));
        tp_routes_free(routes);
        tp_scenario_free(s);
    }
}

#[test]
fn json_round_trip_and_errors() {
    unsafe {
        let s = builtin("synth20");
        let mut json = ptr::null_mut();
        assert_eq!(tp_scenario_to_json(s, &mut json), TpStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(tp_scenario_from_json(json, &mut again), TpStatus::Ok);
        assert_eq!(tp_scenario_spot_count(again), 20);
        tp_string_free(json);

        let mut routes = ptr::null_mut();
        assert_eq!(tp_plan(again, TpAlgorithm::C, 0, 3, &mut routes), TpStatus::InvalidArgument);
        assert!(routes.is_null());
        assert_eq!(tp_plan(again, TpAlgorithm::C, 3, 3, &mut routes), TpStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(tp_routes_to_json(routes, &mut out), TpStatus::Ok);
        let parsed: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(out).to_str().unwrap()).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 3);
        tp_string_free(out);
        tp_routes_free(routes);
        tp_scenario_free(again);
        tp_scenario_free(s);

        let bad = CString::new("{\"schema_version\": 1}").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(tp_scenario_from_json(bad.as_ptr(), &mut none), TpStatus::InvalidScenario);
        assert!(none.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(tp_scenario_from_json(ptr::null(), &mut none), TpStatus::NullArgument);
        let invalid_utf8 = [0xffu8, 0];
        assert_eq!(
            tp_scenario_from_json(invalid_utf8.as_ptr().cast(), &mut none),
            TpStatus::InvalidUtf8
        );
        assert_eq!(tp_routes_count(ptr::null()), 0);
        tp_routes_free(ptr::null_mut());
        tp_scenario_free(ptr::null_mut());
        tp_string_free(ptr::null_mut());
        assert!(!CStr::from_ptr(tp_version()).to_bytes().is_empty());
    }
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_is_valid_c() {
    let status = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-std=c99", "-x", "c"])
        .arg(crate_dir().join("include/tourplan.h"))
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
}

/// Directory holding the shared library built alongside this test.
fn library_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    let found = [deps, deps.parent()?]
        .into_iter()
        .find(|d| d.join("libtourplan_ffi.so").exists() || d.join("libtourplan_ffi.dylib").exists())
        .map(Path::to_path_buf);
    found
}

#[test]
fn c_program_links_and_runs() {
    let lib = library_dir().expect("shared library next to the test binary");
    let out = tempfile_path("smoke");
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg("-L")
        .arg(&lib)
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .args(["-ltourplan_ffi", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(
        stdout,
        "routes 3 score 22.0 visits 3\n13:00 A 7.0\n15:00 F 6.0\n17:00 C 9.0\njson ok\n"
    );
    let _ = std::fs::remove_file(out);
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("tourplan-ffi-{stem}-{}", std::process::id()))
}
