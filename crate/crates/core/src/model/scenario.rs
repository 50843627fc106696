use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PerQos, QosClass, SchemeKind};
use crate::delay;
use crate::error::{Result, SimError};

pub const DEFAULT_HEADROOM_FACTOR: f64 = 10.0;
const SUM_TOLERANCE: f64 = 1e-9;

/// The canonical five-pair experiment shipped with the crate.
pub const TABLE1_TOML: &str = include_str!("../../scenarios/table1.toml");

/// Heavier variant of the five-pair scenario, the base for pair-count sweeps.
pub const CAPEX_TOML: &str = include_str!("../../scenarios/capex.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalProcess {
    /// Poisson-distributed count per epoch with the configured mean.
    Poisson,
    /// Fixed count per epoch; a fractional mean is spread with a running remainder.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub mean_arrivals_per_epoch: f64,
    pub process: ArrivalProcess,
    /// Fraction of requests originating at each UPF.
    pub skew: Vec<f64>,
    pub qos_mix: PerQos<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpfSpec {
    pub bytes_per_ue: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etpb: Option<f64>,
    pub alpha: PerQos<f64>,
    /// Requests per epoch per bucket. Derived from `etpb` and `alpha` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<PerQos<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_cap: Option<PerQos<u32>>,
}

impl UpfSpec {
    pub fn resolved_capacity(&self, delta_ms: f64) -> Result<PerQos<u32>> {
        if let Some(c) = self.capacity {
            return Ok(c);
        }
        let etpb = self
            .etpb
            .ok_or_else(|| SimError::Parse("UPF needs either `capacity` or `etpb`".to_string()))?;
        let mut out = PerQos::default();
        for q in QosClass::ALL {
            let c = delay::upf_capacity(etpb, self.bytes_per_ue as f64, self.alpha[q], delta_ms)?;
            out[q] = whole_requests(c);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MecSpec {
    pub bytes_per_ue: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etpb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue_cap: Option<u32>,
}

impl MecSpec {
    pub fn resolved_capacity(&self, delta_ms: f64) -> Result<u32> {
        if let Some(c) = self.capacity {
            return Ok(c);
        }
        let etpb = self
            .etpb
            .ok_or_else(|| SimError::Parse("MEC needs either `capacity` or `etpb`".to_string()))?;
        Ok(whole_requests(delay::mec_capacity(
            etpb,
            self.bytes_per_ue as f64,
            delta_ms,
        )?))
    }
}

// Derived capacities are rounded down to whole requests per epoch.
fn whole_requests(c: f64) -> u32 {
    (c + 1e-9).floor().max(0.0) as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// Row per UPF, column per MEC.
    pub bandwidth_mbps: Vec<Vec<f64>>,
}

/// Declarative description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub delta_ms: f64,
    pub horizon_epochs: u64,
    pub seed: u64,
    pub scheme: SchemeKind,
    #[serde(default = "default_headroom_factor")]
    pub headroom_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drain_cap_epochs: Option<u64>,
    pub thresholds_ms: PerQos<Option<f64>>,
    pub traffic: TrafficSpec,
    pub upfs: Vec<UpfSpec>,
    pub mecs: Vec<MecSpec>,
    pub links: LinkSpec,
}

fn default_headroom_factor() -> f64 {
    DEFAULT_HEADROOM_FACTOR
}

impl Scenario {
    /// The bundled five-pair scenario (capacity order 5 > 1 > 3 > 2 > 4,
    /// arrival skew 13/24/30/15/18 %).
    pub fn table1() -> Scenario {
        Scenario::from_toml_str(TABLE1_TOML).expect("bundled scenario parses")
    }

    /// The bundled sweep base: the five-pair topology at twice the load.
    pub fn capex() -> Scenario {
        Scenario::from_toml_str(CAPEX_TOML).expect("bundled scenario parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Parse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                SimError::Io(std::io::Error::new(
                    e.kind(),
                    format!("file not found: {}", path.display()),
                ))
            } else {
                SimError::Io(e)
            }
        })?;
        Scenario::from_toml_str(&text)
    }

    pub fn num_upfs(&self) -> usize {
        self.upfs.len()
    }

    pub fn num_mecs(&self) -> usize {
        self.mecs.len()
    }

    pub fn drain_cap(&self) -> u64 {
        self.drain_cap_epochs
            .unwrap_or_else(|| self.horizon_epochs.saturating_mul(10))
    }

    /// Admission bound `ceil(headroom_factor * arrival_rate / service_rate)`, at least 1.
    pub fn default_queue_cap(&self, arrival_rate: f64, service_rate: u32) -> u32 {
        if service_rate == 0 {
            return 1;
        }
        let cap = (self.headroom_factor * arrival_rate / service_rate as f64).ceil();
        cap.clamp(1.0, u32::MAX as f64) as u32
    }

    pub fn with_scheme(&self, scheme: SchemeKind) -> Scenario {
        Scenario {
            scheme,
            ..self.clone()
        }
    }

    pub fn with_seed(&self, seed: u64) -> Scenario {
        Scenario {
            seed,
            ..self.clone()
        }
    }

    /// Resizes the topology to `k` co-located UPF-MEC pairs by cycling the
    /// per-entity parameters, link bandwidths and traffic skew of this scenario.
    /// The skew is renormalized; the aggregate arrival rate is unchanged.
    pub fn with_pairs(&self, k: usize) -> Scenario {
        let u = self.upfs.len().max(1);
        let m = self.mecs.len().max(1);
        let upfs = (0..k).map(|i| self.upfs[i % u].clone()).collect();
        let mecs = (0..k).map(|j| self.mecs[j % m].clone()).collect();
        let bandwidth_mbps = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| self.links.bandwidth_mbps[i % u][j % m])
                    .collect()
            })
            .collect();
        let raw: Vec<f64> = (0..k).map(|i| self.traffic.skew[i % u]).collect();
        let total: f64 = raw.iter().sum();
        let skew = raw
            .iter()
            .map(|w| {
                if total > 0.0 {
                    w / total
                } else {
                    1.0 / k as f64
                }
            })
            .collect();
        Scenario {
            name: format!("{}-{}pairs", self.name, k),
            upfs,
            mecs,
            links: LinkSpec { bandwidth_mbps },
            traffic: TrafficSpec {
                skew,
                ..self.traffic.clone()
            },
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(SimError::InvalidScenario(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "scenario is valid");
        }
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn is_fraction(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Collects every violated invariant of `s`. An empty report means valid.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mut r = ValidationReport::default();
    let u = s.upfs.len();
    let m = s.mecs.len();

    if !(s.delta_ms > 0.0 && s.delta_ms.is_finite()) {
        r.push(
            "delta_ms",
            format!("must be positive, got {}", fmt_num(s.delta_ms)),
        );
    }
    if !(s.headroom_factor > 0.0 && s.headroom_factor.is_finite()) {
        r.push("headroom_factor", "must be positive");
    }
    if u == 0 {
        r.push("upfs", "at least one UPF is required");
    }
    if m == 0 {
        r.push("mecs", "at least one MEC is required");
    }
    if s.scheme == SchemeKind::BestfitUpfPathExt && u != m {
        r.push(
            "scheme",
            format!("path extension needs co-located pairs, got U = {u}, M = {m}"),
        );
    }

    for (q, t) in s.thresholds_ms.iter() {
        if let Some(t) = t {
            if !(*t > 0.0) {
                r.push(format!("thresholds_ms.{q}"), "must be positive");
            }
        }
    }

    let t = &s.traffic;
    if !(t.mean_arrivals_per_epoch >= 0.0 && t.mean_arrivals_per_epoch.is_finite()) {
        r.push("traffic.mean_arrivals_per_epoch", "must be finite and >= 0");
    }
    if t.skew.len() != u {
        r.push(
            "traffic.skew",
            format!("has {} entries but there are {u} UPFs", t.skew.len()),
        );
    }
    for (i, w) in t.skew.iter().enumerate() {
        if !is_fraction(*w) {
            r.push(
                "traffic.skew",
                format!("UPF {} fraction {} outside [0, 1]", i + 1, fmt_num(*w)),
            );
        }
    }
    let skew_sum: f64 = t.skew.iter().sum();
    if (skew_sum - 1.0).abs() > SUM_TOLERANCE {
        r.push(
            "traffic.skew",
            format!("skew sums to {}", fmt_num(skew_sum)),
        );
    }
    for (q, w) in t.qos_mix.iter() {
        if !is_fraction(*w) {
            r.push(
                format!("traffic.qos_mix.{q}"),
                format!("{} outside [0, 1]", fmt_num(*w)),
            );
        }
    }
    let mix_sum: f64 = t.qos_mix.iter().map(|(_, w)| w).sum();
    if (mix_sum - 1.0).abs() > SUM_TOLERANCE {
        r.push(
            "traffic.qos_mix",
            format!("qos mix sums to {}", fmt_num(mix_sum)),
        );
    }

    for (i, spec) in s.upfs.iter().enumerate() {
        let name = format!("UPF {}", i + 1);
        if spec.bytes_per_ue == 0 {
            r.push(&name, "bytes_per_ue must be positive");
        }
        for (q, a) in spec.alpha.iter() {
            if !(*a > 0.0 && *a <= 1.0) {
                r.push(&name, format!("alpha.{q} = {} outside (0, 1]", fmt_num(*a)));
            }
        }
        let alpha_sum: f64 = spec.alpha.iter().map(|(_, a)| a).sum();
        if alpha_sum > 1.0 + SUM_TOLERANCE {
            r.push(&name, format!("alpha sums to {} (> 1)", fmt_num(alpha_sum)));
        }
        match spec.resolved_capacity(s.delta_ms) {
            Ok(cap) => {
                for (q, c) in cap.iter() {
                    if *c == 0 {
                        r.push(
                            &name,
                            format!("capacity.{q} must be at least 1 request per epoch"),
                        );
                    }
                }
            }
            Err(e) => r.push(&name, e.to_string()),
        }
        if let Some(qc) = spec.queue_cap {
            for (q, c) in qc.iter() {
                if *c == 0 {
                    r.push(&name, format!("queue_cap.{q} must be at least 1"));
                }
            }
        }
    }

    for (j, spec) in s.mecs.iter().enumerate() {
        let name = format!("MEC {}", j + 1);
        if spec.bytes_per_ue == 0 {
            r.push(&name, "bytes_per_ue must be positive");
        }
        match spec.resolved_capacity(s.delta_ms) {
            Ok(0) => r.push(&name, "capacity must be at least 1 request per epoch"),
            Ok(_) => {}
            Err(e) => r.push(&name, e.to_string()),
        }
        if spec.queue_cap == Some(0) {
            r.push(&name, "queue_cap must be at least 1");
        }
    }

    let bw = &s.links.bandwidth_mbps;
    if bw.len() != u || bw.iter().any(|row| row.len() != m) {
        r.push(
            "links.bandwidth_mbps",
            format!("must be a {u} x {m} matrix (full mesh)"),
        );
    } else {
        for (i, row) in bw.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                if !(*b > 0.0 && b.is_finite()) {
                    r.push(
                        "links.bandwidth_mbps",
                        format!(
                            "link UPF {} -> MEC {} bandwidth must be positive",
                            i + 1,
                            j + 1
                        ),
                    );
                }
            }
        }
    }
    r
}
