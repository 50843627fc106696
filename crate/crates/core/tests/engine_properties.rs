mod common;

use common::small_scenario;
use dataplane_sim::model::RequestStatus;
use dataplane_sim::{run_to_completion, QosClass, RunResult, Scenario, SchemeKind};
use proptest::prelude::*;

fn scheme_strategy() -> impl Strategy<Value = SchemeKind> {
    prop::sample::select(SchemeKind::ALL.to_vec())
}

prop_compose! {
    fn scenario_strategy()(
        caps in prop::collection::vec(1u32..5, 1..5),
        mec_scale in 1u32..6,
        bw in prop::sample::select(vec![150.0, 450.0, 1000.0]),
        lambda in 0.0f64..12.0,
        horizon in 0u64..25,
        scheme in scheme_strategy(),
        seed in any::<u64>(),
    ) -> Scenario {
        let mecs: Vec<u32> = caps.iter().map(|c| c * mec_scale).collect();
        small_scenario(&caps, &mecs, bw, lambda, horizon, scheme, seed)
    }
}

fn check_invariants(s: &Scenario, run: &RunResult) {
    assert_eq!(run.generated, run.completed + run.dropped + run.residual);
    assert_eq!(run.residual, 0, "drain left requests behind");
    assert!(!run.truncated);
    assert_eq!(run.generated as usize, run.requests.len());

    for row in &run.series {
        for (i, served) in row.upf_served.iter().enumerate() {
            let cap = s.upfs[i].capacity.unwrap();
            for q in QosClass::ALL {
                assert!(
                    served[q] <= cap[q],
                    "epoch {} UPF {i} {q} over capacity",
                    row.epoch
                );
            }
        }
        for (j, served) in row.mec_served.iter().enumerate() {
            assert!(*served <= s.mecs[j].capacity.unwrap());
        }
    }
    let arrivals: u64 = run.series.iter().map(|r| r.arrivals).sum();
    let completed: u64 = run.series.iter().map(|r| r.completed).sum();
    let dropped: u64 = run.series.iter().map(|r| r.dropped).sum();
    assert_eq!(
        (arrivals, completed, dropped),
        (run.generated, run.completed, run.dropped)
    );

    for r in &run.requests {
        match r.status {
            RequestStatus::Completed => {
                let m = r.measured;
                assert_eq!(m.d_e2e, m.d_upf + m.d_net + m.d_mec);
                assert!(m.d_upf >= s.delta_ms);
                if r.qos.uses_mec() {
                    assert!(
                        m.d_e2e >= 2.0 * s.delta_ms,
                        "request {} e2e {}",
                        r.id,
                        m.d_e2e
                    );
                    assert!(m.d_net > 0.0 && m.d_mec >= s.delta_ms);
                    assert!(r.assigned_mec.is_some());
                } else {
                    assert_eq!((m.d_net, m.d_mec), (0.0, 0.0));
                    assert!(r.assigned_mec.is_none());
                }
                assert!(r.finish_epoch.unwrap() >= r.arrival_epoch);
                assert!(r.arrival_epoch < s.horizon_epochs.max(1));
            }
            RequestStatus::Dropped => assert!(r.finish_epoch.is_some()),
            other => panic!("request {} left in {other:?}", r.id),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_invariants_hold(s in scenario_strategy()) {
        let run = run_to_completion(&s).unwrap();
        check_invariants(&s, &run);
    }

    #[test]
    fn runs_are_reproducible(s in scenario_strategy()) {
        prop_assert_eq!(run_to_completion(&s).unwrap(), run_to_completion(&s).unwrap());
    }

    #[test]
    fn baseline_never_leaves_the_origin(s in scenario_strategy()) {
        let run = run_to_completion(&s.with_scheme(SchemeKind::Baseline)).unwrap();
        for r in &run.requests {
            prop_assert_eq!(r.assigned_upf, Some(r.origin_upf));
            if r.qos.uses_mec() {
                prop_assert_eq!(r.assigned_mec, Some(r.origin_upf));
            }
        }
    }

    #[test]
    fn path_extension_keeps_pairs_together(s in scenario_strategy()) {
        let run = run_to_completion(&s.with_scheme(SchemeKind::BestfitUpfPathExt)).unwrap();
        for r in run.requests.iter().filter(|r| r.qos.uses_mec()) {
            prop_assert_eq!(r.assigned_mec, r.assigned_upf);
        }
    }
}

#[test]
fn schemes_agree_when_one_pair_is_enough() {
    // a single pair with ample capacity: every scheme makes the same choice
    let base = small_scenario(&[50], &[200], 1000.0, 8.0, 30, SchemeKind::Baseline, 9);
    let reference = run_to_completion(&base).unwrap();
    for scheme in SchemeKind::ALL {
        let run = run_to_completion(&base.with_scheme(scheme)).unwrap();
        let delays: Vec<_> = run.requests.iter().map(|r| r.measured).collect();
        let expected: Vec<_> = reference.requests.iter().map(|r| r.measured).collect();
        assert_eq!(delays, expected, "{scheme}");
    }
}

#[test]
fn idle_system_delays_are_minimal() {
    // ample capacity everywhere: each stage takes exactly one epoch
    let s = small_scenario(
        &[40, 40, 40],
        &[200, 200, 200],
        1000.0,
        3.0,
        50,
        SchemeKind::BestfitUpfMec,
        4,
    );
    let run = run_to_completion(&s).unwrap();
    for r in run.completed_requests() {
        assert_eq!(r.measured.d_upf, 1.0);
        if r.qos.uses_mec() {
            assert_eq!(r.measured.d_mec, 1.0);
            assert!(r.measured.d_net <= 1.0);
        }
    }
}

#[test]
fn drain_cap_truncates_and_reports_residual() {
    let mut s = small_scenario(&[1], &[1], 150.0, 10.0, 20, SchemeKind::Baseline, 2);
    s.drain_cap_epochs = Some(3);
    let run = run_to_completion(&s).unwrap();
    assert!(run.truncated);
    assert!(run.residual > 0);
    assert_eq!(run.generated, run.completed + run.dropped + run.residual);
}
