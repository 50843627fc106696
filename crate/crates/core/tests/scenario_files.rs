mod common;

use common::small_scenario;
use dataplane_sim::{validate_scenario, Scenario, SchemeKind, SimError};
use proptest::prelude::*;

proptest! {
    #[test]
    fn toml_round_trip(
        caps in prop::collection::vec(1u32..20, 1..6),
        lambda in 0.0f64..100.0,
        horizon in 0u64..1000,
        seed in any::<u64>(),
        scheme in prop::sample::select(SchemeKind::ALL.to_vec()),
        bw in 1.0f64..5000.0,
    ) {
        let s = small_scenario(&caps, &caps, bw, lambda, horizon, scheme, seed);
        let text = s.to_toml_string().unwrap();
        prop_assert_eq!(Scenario::from_toml_str(&text).unwrap(), s);
    }

    #[test]
    fn resized_topologies_stay_valid(k in 1usize..12) {
        let s = Scenario::capex().with_pairs(k);
        prop_assert!(validate_scenario(&s).is_valid());
        prop_assert_eq!((s.num_upfs(), s.num_mecs()), (k, k));
        let total: f64 = s.traffic.skew.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn bundled_scenarios_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for s in [Scenario::table1(), Scenario::capex()] {
        let path = dir.path().join(format!("{}.toml", s.name));
        std::fs::write(&path, s.to_toml_string().unwrap()).unwrap();
        assert_eq!(Scenario::load(&path).unwrap(), s);
    }
}

#[test]
fn every_violation_is_reported() {
    let mut s = Scenario::table1();
    s.delta_ms = 0.0;
    s.traffic.skew = vec![0.5, 0.5, 0.5, 0.0, 0.0];
    s.upfs[1].alpha.urllc = 0.45;
    s.mecs.pop();
    let report = validate_scenario(&s);
    let text = report.to_string();
    assert!(report.violations.len() >= 4, "{text}");
    assert!(text.contains("skew sums to 1.5"), "{text}");
    assert!(text.contains("alpha sums to 1.2"), "{text}");
    assert!(matches!(
        report.into_result(),
        Err(SimError::InvalidScenario(_))
    ));
}

#[test]
fn missing_file_is_reported() {
    let err = Scenario::load("/nonexistent/dir/scenario.toml").unwrap_err();
    assert!(err.to_string().contains("file not found"), "{err}");
}

#[test]
fn malformed_file_is_a_parse_error() {
    let err = Scenario::from_toml_str("name = 3\n").unwrap_err();
    assert!(matches!(err, SimError::Parse(_)));
}
