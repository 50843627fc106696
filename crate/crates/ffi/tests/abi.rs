use std::ffi::{CStr, CString};
use std::ptr;

use dataplane_sim_ffi::*;

fn last_error() -> String {
    let p = dps_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_scenario() -> *mut DpsScenario {
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(dps_scenario_default(&mut s), DpsStatus::Ok);
        assert_eq!(dps_scenario_set_arrival_rate(s, 20.0), DpsStatus::Ok);
    }
    s
}

#[test]
fn run_round_trip_conserves_requests() {
    let s = small_scenario();
    unsafe {
        let scheme = CString::new("bestfit-upf-mec").unwrap();
        assert_eq!(dps_scenario_set_scheme(s, scheme.as_ptr()), DpsStatus::Ok);
        assert_eq!(dps_scenario_set_seed(s, 3), DpsStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(dps_run(s, &mut r), DpsStatus::Ok);
        let mut c = DpsCounts::default();
        assert_eq!(dps_run_counts(r, &mut c), DpsStatus::Ok);
        assert!(c.generated > 0);
        assert_eq!(c.generated, c.completed + c.dropped);
        assert_eq!((c.residual, c.truncated), (0, 0));

        let mut json = ptr::null_mut();
        assert_eq!(dps_run_summary_json(r, &mut json), DpsStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        dps_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["scheme"], "bestfit-upf-mec");

        let (mut p50, mut pmax) = (0.0, 0.0);
        assert_eq!(dps_run_e2e_percentile(r, 50.0, &mut p50), DpsStatus::Ok);
        assert_eq!(dps_run_e2e_percentile(r, 100.0, &mut pmax), DpsStatus::Ok);
        assert!(p50 >= 1.0 && p50 <= pmax);
        assert_eq!(dps_run_e2e_percentile(r, 0.0, &mut p50), DpsStatus::Domain);
        dps_run_free(r);
        dps_scenario_free(s);
    }
}

#[test]
fn same_seed_same_summary() {
    let summary = || unsafe {
        let s = small_scenario();
        let mut r = ptr::null_mut();
        assert_eq!(dps_run(s, &mut r), DpsStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(dps_run_summary_json(r, &mut json), DpsStatus::Ok);
        let text = CStr::from_ptr(json).to_string_lossy().into_owned();
        dps_string_free(json);
        dps_run_free(r);
        dps_scenario_free(s);
        text
    };
    assert_eq!(summary(), summary());
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            dps_scenario_default(ptr::null_mut()),
            DpsStatus::NullPointer
        );
        assert_eq!(
            dps_scenario_from_toml(ptr::null(), &mut s),
            DpsStatus::NullPointer
        );

        let junk = CString::new("name = ").unwrap();
        assert_eq!(
            dps_scenario_from_toml(junk.as_ptr(), &mut s),
            DpsStatus::Parse
        );
        assert!(s.is_null());

        let missing = CString::new("/nonexistent/scenario.toml").unwrap();
        assert_eq!(
            dps_scenario_from_file(missing.as_ptr(), &mut s),
            DpsStatus::Io
        );
        assert!(last_error().contains("file not found"), "{}", last_error());

        let s = small_scenario();
        let bad = CString::new("warp-drive").unwrap();
        assert_eq!(
            dps_scenario_set_scheme(s, bad.as_ptr()),
            DpsStatus::UnknownScheme
        );
        assert!(last_error().contains("bestfit-upf-mec"), "{}", last_error());
        assert_eq!(dps_scenario_set_pairs(s, 0), DpsStatus::Domain);

        let invalid_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(
            dps_scenario_set_scheme(s, invalid_utf8.as_ptr().cast()),
            DpsStatus::InvalidUtf8
        );

        let mut out = 0.0;
        assert_eq!(
            dps_upf_projected_delay(1, 0.0, 0.0, 1.0, &mut out),
            DpsStatus::Domain
        );
        assert_eq!(
            dps_find_bestfit(ptr::null(), 0, 1.0, &mut 0, &mut out),
            DpsStatus::Domain
        );
        dps_scenario_free(s);
        dps_scenario_free(ptr::null_mut());
        dps_run_free(ptr::null_mut());
        dps_string_free(ptr::null_mut());
    }
}

#[test]
fn validation_reports_every_violation() {
    unsafe {
        let s = small_scenario();
        let mut report = ptr::null_mut();
        assert_eq!(dps_scenario_validate(s, &mut report), DpsStatus::Ok);
        dps_string_free(report);

        assert_eq!(dps_scenario_set_arrival_rate(s, -1.0), DpsStatus::Ok);
        assert_eq!(
            dps_scenario_validate(s, &mut report),
            DpsStatus::InvalidScenario
        );
        let v: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(report).to_str().unwrap()).unwrap();
        dps_string_free(report);
        assert_eq!(v["violations"].as_array().unwrap().len(), 1);

        let mut r = ptr::null_mut();
        assert_eq!(dps_run(s, &mut r), DpsStatus::InvalidScenario);
        assert!(r.is_null());
        dps_scenario_free(s);
    }
}

#[test]
fn scenario_toml_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(dps_scenario_capex(&mut s), DpsStatus::Ok);
        assert_eq!(dps_scenario_set_pairs(s, 7), DpsStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(dps_scenario_to_toml(s, &mut text), DpsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(dps_scenario_from_toml(text, &mut back), DpsStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(dps_scenario_to_toml(back, &mut again), DpsStatus::Ok);
        assert_eq!(CStr::from_ptr(text), CStr::from_ptr(again));
        assert!(CStr::from_ptr(text)
            .to_str()
            .unwrap()
            .contains("capex-7pairs"));
        dps_string_free(text);
        dps_string_free(again);
        dps_scenario_free(back);
        dps_scenario_free(s);
    }
}

#[test]
fn delay_wrappers_match_hand_values() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(
            dps_upf_projected_delay(7, 0.0, 4.0, 1.0, &mut out),
            DpsStatus::Ok
        );
        assert_eq!(out, 3.0);
        assert_eq!(
            dps_net_delay(10, 1500.0, 150.0, 1.0, &mut out),
            DpsStatus::Ok
        );
        assert_eq!(out, 0.8);

        let loads = [
            DpsLoad {
                queue_len: 9,
                headroom: 4.0,
                capacity: 4.0,
            },
            DpsLoad {
                queue_len: 2,
                headroom: 4.0,
                capacity: 4.0,
            },
            DpsLoad {
                queue_len: 2,
                headroom: 4.0,
                capacity: 4.0,
            },
        ];
        let mut idx = usize::MAX;
        assert_eq!(
            dps_find_bestfit(loads.as_ptr(), loads.len(), 1.0, &mut idx, &mut out),
            DpsStatus::Ok
        );
        assert_eq!((idx, out), (1, 1.0));
    }
    let v = unsafe { CStr::from_ptr(dps_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
