use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::run_to_completion;
use crate::error::Result;
use crate::model::{PerQos, QosClass, Scenario, SchemeKind};

/// Threshold compliance of one scheme at one topology size, pooled over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapexPoint {
    pub num_pairs: usize,
    pub scheme: SchemeKind,
    /// Percent of completed (admitted) connections below the class threshold.
    pub pct_under_threshold: PerQos<Option<f64>>,
    pub completed: PerQos<u64>,
    pub dropped: PerQos<u64>,
    pub seeds: usize,
    /// Totals over all classes and seeds.
    pub generated: u64,
    pub residual: u64,
}

/// Baseline vs bestfit UPF-MEC at one pair count, for one QoS class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapexRow {
    pub num_pairs: usize,
    pub qos: QosClass,
    pub baseline_pct: f64,
    pub mecia_pct: f64,
    /// `mecia_pct / baseline_pct`; `None` when the baseline is at 0 %.
    pub connectivity_gain: Option<f64>,
    /// Smallest swept pair count at which the bestfit UPF-MEC scheme reaches
    /// the baseline's percentage at `num_pairs`.
    pub matching_pairs: Option<usize>,
    /// `1 - matching_pairs / num_pairs`.
    pub capex_savings: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CapexSweep {
    pub points: Vec<CapexPoint>,
    pub rows: Vec<CapexRow>,
}

impl CapexSweep {
    pub fn point(&self, num_pairs: usize, scheme: SchemeKind) -> Option<&CapexPoint> {
        self.points
            .iter()
            .find(|p| p.num_pairs == num_pairs && p.scheme == scheme)
    }

    pub fn row(&self, num_pairs: usize, qos: QosClass) -> Option<&CapexRow> {
        self.rows
            .iter()
            .find(|r| r.num_pairs == num_pairs && r.qos == qos)
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    under: PerQos<u64>,
    completed: PerQos<u64>,
    dropped: PerQos<u64>,
    generated: u64,
    residual: u64,
}

fn tally(scenario: &Scenario, thresholds: &PerQos<Option<f64>>) -> Result<Tally> {
    let run = run_to_completion(scenario)?;
    let mut t = Tally {
        generated: run.generated,
        residual: run.residual,
        ..Tally::default()
    };
    for r in &run.requests {
        match r.status {
            crate::model::RequestStatus::Completed => {
                t.completed[r.qos] += 1;
                if thresholds[r.qos].is_some_and(|th| r.measured.d_e2e < th) {
                    t.under[r.qos] += 1;
                }
            }
            crate::model::RequestStatus::Dropped => t.dropped[r.qos] += 1,
            _ => {}
        }
    }
    Ok(t)
}

const SWEEP_SCHEMES: [SchemeKind; 2] = [SchemeKind::Baseline, SchemeKind::BestfitUpfMec];

/// For each pair count `k`, resizes `base` to `k` co-located pairs, runs the
/// baseline and bestfit UPF-MEC schemes on every seed, and reports the share
/// of connections meeting `thresholds`.
pub fn capex_sweep(
    base: &Scenario,
    pair_counts: &[usize],
    seeds: &[u64],
    thresholds: &PerQos<Option<f64>>,
) -> Result<CapexSweep> {
    let mut counts: Vec<usize> = pair_counts.iter().copied().filter(|k| *k >= 1).collect();
    counts.sort_unstable();
    counts.dedup();

    let jobs: Vec<(usize, SchemeKind, u64)> = counts
        .iter()
        .flat_map(|&k| {
            SWEEP_SCHEMES
                .iter()
                .flat_map(move |&s| seeds.iter().map(move |&seed| (k, s, seed)))
        })
        .collect();
    let tallies: Vec<Tally> = jobs
        .par_iter()
        .map(|&(k, scheme, seed)| {
            let sc = base.with_pairs(k).with_scheme(scheme).with_seed(seed);
            tally(&sc, thresholds)
        })
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    for (chunk, job) in tallies
        .chunks(seeds.len().max(1))
        .zip(jobs.iter().step_by(seeds.len().max(1)))
    {
        let mut pooled = Tally::default();
        for t in chunk {
            for q in QosClass::ALL {
                pooled.under[q] += t.under[q];
                pooled.completed[q] += t.completed[q];
                pooled.dropped[q] += t.dropped[q];
            }
            pooled.generated += t.generated;
            pooled.residual += t.residual;
        }
        points.push(CapexPoint {
            num_pairs: job.0,
            scheme: job.1,
            pct_under_threshold: PerQos::from_fn(|q| {
                thresholds[q]?;
                (pooled.completed[q] > 0)
                    .then(|| 100.0 * pooled.under[q] as f64 / pooled.completed[q] as f64)
            }),
            completed: pooled.completed,
            dropped: pooled.dropped,
            seeds: chunk.len(),
            generated: pooled.generated,
            residual: pooled.residual,
        });
    }
    if seeds.is_empty() {
        points.clear();
    }

    let pct = |k: usize, s: SchemeKind, q: QosClass| -> Option<f64> {
        points
            .iter()
            .find(|p| p.num_pairs == k && p.scheme == s)
            .and_then(|p| p.pct_under_threshold[q])
    };
    let mut rows = Vec::new();
    for q in QosClass::ALL
        .into_iter()
        .filter(|q| thresholds[*q].is_some())
    {
        for &k in &counts {
            let (Some(b), Some(m)) = (
                pct(k, SchemeKind::Baseline, q),
                pct(k, SchemeKind::BestfitUpfMec, q),
            ) else {
                continue;
            };
            let matching_pairs = counts
                .iter()
                .copied()
                .find(|&k2| pct(k2, SchemeKind::BestfitUpfMec, q).is_some_and(|m2| m2 >= b));
            rows.push(CapexRow {
                num_pairs: k,
                qos: q,
                baseline_pct: b,
                mecia_pct: m,
                connectivity_gain: (b > 0.0).then(|| m / b),
                matching_pairs,
                capex_savings: matching_pairs.map(|k2| 1.0 - k2 as f64 / k as f64),
            });
        }
    }
    Ok(CapexSweep { points, rows })
}
