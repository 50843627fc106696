#![allow(dead_code)]

use dataplane_sim::model::{ArrivalProcess, LinkSpec, MecSpec, TrafficSpec, UpfSpec};
use dataplane_sim::{PerQos, Scenario, SchemeKind};

/// Small co-located topology: per-bucket UPF capacities, MEC capacities and a
/// uniform link bandwidth. Queues are unbounded in practice.
pub fn small_scenario(
    upf_caps: &[u32],
    mec_caps: &[u32],
    bandwidth_mbps: f64,
    mean_arrivals: f64,
    horizon: u64,
    scheme: SchemeKind,
    seed: u64,
) -> Scenario {
    let u = upf_caps.len();
    Scenario {
        name: "prop".into(),
        delta_ms: 1.0,
        horizon_epochs: horizon,
        seed,
        scheme,
        headroom_factor: 1e6,
        drain_cap_epochs: Some(1_000_000),
        thresholds_ms: PerQos {
            urllc: Some(5.0),
            embb: Some(10.0),
            mmtc: None,
            regular: None,
        },
        traffic: TrafficSpec {
            mean_arrivals_per_epoch: mean_arrivals,
            process: ArrivalProcess::Poisson,
            skew: vec![1.0 / u as f64; u],
            qos_mix: PerQos::splat(0.25),
        },
        upfs: upf_caps
            .iter()
            .map(|&c| UpfSpec {
                bytes_per_ue: 256,
                etpb: None,
                alpha: PerQos::splat(0.25),
                capacity: Some(PerQos::splat(c)),
                queue_cap: None,
            })
            .collect(),
        mecs: mec_caps
            .iter()
            .map(|&c| MecSpec {
                bytes_per_ue: 1500,
                etpb: None,
                capacity: Some(c),
                queue_cap: None,
            })
            .collect(),
        links: LinkSpec {
            bandwidth_mbps: vec![vec![bandwidth_mbps; mec_caps.len()]; u],
        },
    }
}

/// Mean of per-seed maximum end-to-end delays.
pub fn mean_of_max(summaries: &[dataplane_sim::SummaryReport]) -> f64 {
    summaries.iter().map(|s| s.max_e2e()).sum::<f64>() / summaries.len() as f64
}
