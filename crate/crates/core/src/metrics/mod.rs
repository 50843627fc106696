//! Aggregation of run results into delay statistics, CDFs, scheme
//! comparisons and the CapEx sweep.
//!
//! Percentiles use the nearest-rank convention: the `p`-th percentile of `n`
//! sorted samples is the sample at rank `ceil(p / 100 * n)` (1-based).
//! Standard deviations are population deviations. All statistics are
//! computed over sorted samples, so they do not depend on event-log order.

mod capex;
pub mod emit;

use serde::{Deserialize, Serialize};

use crate::engine::RunResult;
use crate::model::{PerQos, QosClass, RequestStatus, SchemeKind};

pub use capex::{capex_sweep, CapexPoint, CapexRow, CapexSweep};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub count: u64,
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn from_samples(samples: &[f64]) -> Stat {
        let sorted = sorted(samples);
        stat_sorted(&sorted)
    }
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn stat_sorted(sorted: &[f64]) -> Stat {
    if sorted.is_empty() {
        return Stat::default();
    }
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Stat {
        count: sorted.len() as u64,
        mean,
        std: var.sqrt(),
    }
}

/// Nearest-rank percentile of ascending `sorted`; `None` when empty.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, n) - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p50: f64,
    pub p80: f64,
    pub p95: f64,
    pub p99: f64,
    pub p999: f64,
    pub max: f64,
}

impl Percentiles {
    pub fn from_samples(samples: &[f64]) -> Option<Percentiles> {
        let s = sorted(samples);
        Self::from_sorted(&s)
    }

    fn from_sorted(s: &[f64]) -> Option<Percentiles> {
        Some(Percentiles {
            p50: percentile(s, 50.0)?,
            p80: percentile(s, 80.0)?,
            p95: percentile(s, 95.0)?,
            p99: percentile(s, 99.0)?,
            p999: percentile(s, 99.9)?,
            max: *s.last()?,
        })
    }
}

/// Empirical CDF: one step per distinct sample value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CdfTable {
    pub values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl CdfTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// P(X <= x).
    pub fn prob_at_or_below(&self, x: f64) -> f64 {
        match self.values.partition_point(|v| *v <= x) {
            0 => 0.0,
            k => self.probabilities[k - 1],
        }
    }
}

pub fn build_cdf(samples: &[f64]) -> CdfTable {
    let s = sorted(samples);
    let n = s.len() as f64;
    let mut table = CdfTable::default();
    for (k, v) in s.iter().enumerate() {
        let is_last_of_run = s.get(k + 1).is_none_or(|next| next != v);
        if is_last_of_run {
            table.values.push(*v);
            table.probabilities.push((k + 1) as f64 / n);
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub scenario: String,
    pub scheme: SchemeKind,
    pub seed: u64,
    pub generated: u64,
    pub completed: u64,
    pub dropped: u64,
    pub residual: u64,
    pub truncated: bool,
    /// Measured UPF delay per (UPF, QoS), keyed by the serving UPF.
    pub upf_delay: Vec<PerQos<Stat>>,
    /// Measured MEC delay per serving MEC.
    pub mec_delay: Vec<Stat>,
    pub upf_overall: Stat,
    pub net_overall: Stat,
    pub mec_overall: Stat,
    pub e2e_overall: Stat,
    pub e2e_percentiles: Option<Percentiles>,
    pub e2e_percentiles_by_qos: PerQos<Option<Percentiles>>,
    pub projected_e2e_overall: Stat,
    /// Completed requests of the class whose end-to-end delay is below the
    /// class threshold, in percent. `None` without a threshold or samples.
    pub pct_under_threshold: PerQos<Option<f64>>,
    pub completed_by_qos: PerQos<u64>,
    pub dropped_by_qos: PerQos<u64>,
    /// Largest end-of-epoch total queue length seen at each UPF.
    pub peak_upf_queue: Vec<u32>,
    pub peak_mec_queue: Vec<u32>,
}

impl SummaryReport {
    pub fn max_e2e(&self) -> f64 {
        self.e2e_percentiles.map_or(0.0, |p| p.max)
    }

    pub fn peak_queue(&self) -> u32 {
        self.peak_upf_queue.iter().copied().max().unwrap_or(0)
    }
}

/// Summary using the latency thresholds the run was configured with.
pub fn summarize(run: &RunResult) -> SummaryReport {
    summarize_with_thresholds(run, &run.thresholds_ms)
}

/// uRLLC 5 ms, eMBB 10 ms.
pub fn default_thresholds() -> PerQos<Option<f64>> {
    PerQos {
        urllc: Some(5.0),
        embb: Some(10.0),
        mmtc: None,
        regular: None,
    }
}

pub fn summarize_with_thresholds(
    run: &RunResult,
    thresholds: &PerQos<Option<f64>>,
) -> SummaryReport {
    let mut upf_samples = vec![PerQos::<Vec<f64>>::default(); run.num_upfs];
    let mut mec_samples = vec![Vec::new(); run.num_mecs];
    let mut upf_all = Vec::new();
    let mut net_all = Vec::new();
    let mut mec_all = Vec::new();
    let mut e2e_all = Vec::new();
    let mut projected_all = Vec::new();
    let mut e2e_by_qos = PerQos::<Vec<f64>>::default();
    let mut completed_by_qos = PerQos::<u64>::default();
    let mut dropped_by_qos = PerQos::<u64>::default();

    for r in &run.requests {
        match r.status {
            RequestStatus::Completed => {}
            RequestStatus::Dropped => {
                dropped_by_qos[r.qos] += 1;
                continue;
            }
            _ => continue,
        }
        completed_by_qos[r.qos] += 1;
        let m = r.measured;
        if let Some(i) = r.assigned_upf {
            upf_samples[i][r.qos].push(m.d_upf);
        }
        upf_all.push(m.d_upf);
        if let Some(j) = r.assigned_mec {
            mec_samples[j].push(m.d_mec);
            mec_all.push(m.d_mec);
            net_all.push(m.d_net);
        }
        e2e_all.push(m.d_e2e);
        e2e_by_qos[r.qos].push(m.d_e2e);
        projected_all.push(r.projected.d_e2e);
    }

    let e2e_sorted = sorted(&e2e_all);
    let by_qos_sorted = e2e_by_qos.map(|_, v| sorted(v));
    let pct_under_threshold = PerQos::from_fn(|q| {
        let t = thresholds[q]?;
        let s = &by_qos_sorted[q];
        if s.is_empty() {
            return None;
        }
        let under = s.partition_point(|x| *x < t);
        Some(100.0 * under as f64 / s.len() as f64)
    });

    let mut peak_upf_queue = vec![0u32; run.num_upfs];
    let mut peak_mec_queue = vec![0u32; run.num_mecs];
    for row in &run.series {
        for (i, q) in row.upf_queue.iter().enumerate() {
            let total: u32 = q.iter().map(|(_, v)| *v).sum();
            peak_upf_queue[i] = peak_upf_queue[i].max(total);
        }
        for (j, q) in row.mec_queue.iter().enumerate() {
            peak_mec_queue[j] = peak_mec_queue[j].max(*q);
        }
    }

    SummaryReport {
        scenario: run.scenario.clone(),
        scheme: run.scheme,
        seed: run.seed,
        generated: run.generated,
        completed: run.completed,
        dropped: run.dropped,
        residual: run.residual,
        truncated: run.truncated,
        upf_delay: upf_samples
            .iter()
            .map(|per| per.map(|_, v| Stat::from_samples(v)))
            .collect(),
        mec_delay: mec_samples.iter().map(|v| Stat::from_samples(v)).collect(),
        upf_overall: Stat::from_samples(&upf_all),
        net_overall: Stat::from_samples(&net_all),
        mec_overall: Stat::from_samples(&mec_all),
        e2e_overall: stat_sorted(&e2e_sorted),
        e2e_percentiles: Percentiles::from_sorted(&e2e_sorted),
        e2e_percentiles_by_qos: by_qos_sorted.map(|_, s| Percentiles::from_sorted(s)),
        projected_e2e_overall: Stat::from_samples(&projected_all),
        pct_under_threshold,
        completed_by_qos,
        dropped_by_qos,
        peak_upf_queue,
        peak_mec_queue,
    }
}

/// All measured end-to-end delays of completed requests, optionally of one class.
pub fn e2e_samples(run: &RunResult, qos: Option<QosClass>) -> Vec<f64> {
    run.completed_requests()
        .filter(|r| qos.is_none_or(|q| r.qos == q))
        .map(|r| r.measured.d_e2e)
        .collect()
}

/// One row of a multi-seed scheme comparison; every field is a mean over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scheme: SchemeKind,
    pub seeds: usize,
    pub upf_mean: f64,
    pub upf_std: f64,
    pub net_mean: f64,
    pub mec_mean: f64,
    pub mec_std: f64,
    pub e2e_mean: f64,
    pub e2e_p80: f64,
    pub e2e_p999: f64,
    /// Mean over seeds of the per-run maximum end-to-end delay.
    pub e2e_max: f64,
    pub peak_queue: f64,
    pub pct_urllc_under_threshold: Option<f64>,
    pub pct_embb_under_threshold: Option<f64>,
    pub dropped: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn mean_opt(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.flatten().collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Averages per-seed summaries of one scheme.
pub fn comparison_row(scheme: SchemeKind, summaries: &[SummaryReport]) -> ComparisonRow {
    let pct = |s: &SummaryReport| s.e2e_percentiles;
    ComparisonRow {
        scheme,
        seeds: summaries.len(),
        upf_mean: mean(summaries.iter().map(|s| s.upf_overall.mean)),
        upf_std: mean(summaries.iter().map(|s| s.upf_overall.std)),
        net_mean: mean(summaries.iter().map(|s| s.net_overall.mean)),
        mec_mean: mean(summaries.iter().map(|s| s.mec_overall.mean)),
        mec_std: mean(summaries.iter().map(|s| s.mec_overall.std)),
        e2e_mean: mean(summaries.iter().map(|s| s.e2e_overall.mean)),
        e2e_p80: mean(summaries.iter().map(|s| pct(s).map_or(0.0, |p| p.p80))),
        e2e_p999: mean(summaries.iter().map(|s| pct(s).map_or(0.0, |p| p.p999))),
        e2e_max: mean(summaries.iter().map(|s| s.max_e2e())),
        peak_queue: mean(summaries.iter().map(|s| s.peak_queue() as f64)),
        pct_urllc_under_threshold: mean_opt(summaries.iter().map(|s| s.pct_under_threshold.urllc)),
        pct_embb_under_threshold: mean_opt(summaries.iter().map(|s| s.pct_under_threshold.embb)),
        dropped: mean(summaries.iter().map(|s| s.dropped as f64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sample_stats() {
        let s = Stat::from_samples(&[3.5]);
        assert_eq!((s.count, s.mean, s.std), (1, 3.5, 0.0));
        assert_eq!(Stat::from_samples(&[]), Stat::default());
    }

    #[test]
    fn two_sample_stats_and_nearest_rank() {
        let s = Stat::from_samples(&[4.0, 2.0]);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.std, 1.0);
        let p = Percentiles::from_samples(&[4.0, 2.0]).unwrap();
        // rank ceil(0.5 * 2) = 1 → 2 ms
        assert_eq!(p.p50, 2.0);
        assert_eq!(p.p80, 4.0);
        assert_eq!(p.max, 4.0);
        assert!(Percentiles::from_samples(&[]).is_none());
    }

    #[test]
    fn nearest_rank_on_one_to_hundred() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 50.0), Some(50.0));
        assert_eq!(percentile(&v, 95.0), Some(95.0));
        assert_eq!(percentile(&v, 99.9), Some(100.0));
        assert_eq!(percentile(&v, 0.0), Some(1.0));
    }

    #[test]
    fn cdf_steps() {
        assert!(build_cdf(&[]).is_empty());
        let c = build_cdf(&[3.0, 1.0, 1.0]);
        assert_eq!(c.values, vec![1.0, 3.0]);
        assert_eq!(c.probabilities, vec![2.0 / 3.0, 1.0]);
        assert_eq!(c.prob_at_or_below(0.5), 0.0);
        assert_eq!(c.prob_at_or_below(2.0), 2.0 / 3.0);
        assert_eq!(c.prob_at_or_below(3.0), 1.0);
    }
}
