//! Domain types shared by every stage of the simulator.
//!
//! Capacities are stored in requests per epoch, delays in milliseconds and
//! link bandwidths in bits per millisecond (scenario files use Mbps).

mod scenario;
mod state;

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::delay::DelayBreakdown;
use crate::error::SimError;

pub use scenario::{
    validate_scenario, ArrivalProcess, LinkSpec, MecSpec, Scenario, TrafficSpec, UpfSpec,
    ValidationReport, Violation, CAPEX_TOML, DEFAULT_HEADROOM_FACTOR, TABLE1_TOML,
};
pub use state::{mbps_to_bits_per_ms, Link, LinkMatrix, MecState, SystemState, UpfState};

pub type RequestId = u64;

/// Service type of a UE request. Selects the UPF bucket and the latency
/// threshold; `Regular` traffic egresses after the UPF and never reaches a MEC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QosClass {
    Urllc,
    Embb,
    Mmtc,
    Regular,
}

impl QosClass {
    pub const ALL: [QosClass; 4] = [
        QosClass::Urllc,
        QosClass::Embb,
        QosClass::Mmtc,
        QosClass::Regular,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            QosClass::Urllc => "urllc",
            QosClass::Embb => "embb",
            QosClass::Mmtc => "mmtc",
            QosClass::Regular => "regular",
        }
    }

    /// Whether requests of this class continue to a MEC after the UPF.
    pub fn uses_mec(self) -> bool {
        self != QosClass::Regular
    }
}

impl fmt::Display for QosClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QosClass {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "urllc" => Ok(QosClass::Urllc),
            "embb" => Ok(QosClass::Embb),
            "mmtc" => Ok(QosClass::Mmtc),
            "regular" => Ok(QosClass::Regular),
            _ => Err(SimError::UnknownQos(s.to_string())),
        }
    }
}

/// One value per QoS class. Serializes as a table keyed by class name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PerQos<T> {
    pub urllc: T,
    pub embb: T,
    pub mmtc: T,
    pub regular: T,
}

impl<T> PerQos<T> {
    pub fn from_fn(mut f: impl FnMut(QosClass) -> T) -> Self {
        PerQos {
            urllc: f(QosClass::Urllc),
            embb: f(QosClass::Embb),
            mmtc: f(QosClass::Mmtc),
            regular: f(QosClass::Regular),
        }
    }

    pub fn splat(value: T) -> Self
    where
        T: Clone,
    {
        PerQos::from_fn(|_| value.clone())
    }

    pub fn map<U>(&self, mut f: impl FnMut(QosClass, &T) -> U) -> PerQos<U> {
        PerQos::from_fn(|q| f(q, &self[q]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (QosClass, &T)> {
        QosClass::ALL.into_iter().map(move |q| (q, &self[q]))
    }
}

impl<T> Index<QosClass> for PerQos<T> {
    type Output = T;

    fn index(&self, q: QosClass) -> &T {
        match q {
            QosClass::Urllc => &self.urllc,
            QosClass::Embb => &self.embb,
            QosClass::Mmtc => &self.mmtc,
            QosClass::Regular => &self.regular,
        }
    }
}

impl<T> IndexMut<QosClass> for PerQos<T> {
    fn index_mut(&mut self, q: QosClass) -> &mut T {
        match q {
            QosClass::Urllc => &mut self.urllc,
            QosClass::Embb => &mut self.embb,
            QosClass::Mmtc => &mut self.mmtc,
            QosClass::Regular => &mut self.regular,
        }
    }
}

/// Epoch counter plus the epoch length `delta` in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochClock {
    epoch: u64,
    delta_ms: f64,
}

impl EpochClock {
    pub fn new(delta_ms: f64) -> Result<Self, SimError> {
        if !(delta_ms > 0.0) || !delta_ms.is_finite() {
            return Err(SimError::domain("delta_ms", delta_ms, "must be positive"));
        }
        Ok(EpochClock { epoch: 0, delta_ms })
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn delta_ms(&self) -> f64 {
        self.delta_ms
    }

    pub fn advance(&mut self) {
        self.epoch += 1;
    }
}

impl Default for EpochClock {
    fn default() -> Self {
        EpochClock {
            epoch: 0,
            delta_ms: 1.0,
        }
    }
}

/// The four UE-assignment policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeKind {
    /// SMF default: geo-local UPF and its co-located MEC.
    #[serde(rename = "baseline")]
    Baseline,
    /// Bestfit UPF, SMF-default (origin) MEC.
    #[serde(rename = "bestfit-upf-no-pe")]
    BestfitUpfNoPe,
    /// Bestfit UPF, path extended to that UPF's co-located MEC.
    #[serde(rename = "bestfit-upf-pe")]
    BestfitUpfPathExt,
    /// Bestfit UPF and bestfit MEC chosen independently.
    #[serde(rename = "bestfit-upf-mec")]
    BestfitUpfMec,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Baseline,
        SchemeKind::BestfitUpfNoPe,
        SchemeKind::BestfitUpfPathExt,
        SchemeKind::BestfitUpfMec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Baseline => "baseline",
            SchemeKind::BestfitUpfNoPe => "bestfit-upf-no-pe",
            SchemeKind::BestfitUpfPathExt => "bestfit-upf-pe",
            SchemeKind::BestfitUpfMec => "bestfit-upf-mec",
        }
    }

    pub fn valid_names() -> String {
        SchemeKind::ALL
            .iter()
            .map(|s| s.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let found = match lower.as_str() {
            "baseline" | "smf" => Some(SchemeKind::Baseline),
            "bestfit-upf-no-pe" | "no-pe" | "nope" => Some(SchemeKind::BestfitUpfNoPe),
            "bestfit-upf-pe" | "pe" | "upf-ext" => Some(SchemeKind::BestfitUpfPathExt),
            "bestfit-upf-mec" | "upf-mec" => Some(SchemeKind::BestfitUpfMec),
            _ => None,
        };
        found.ok_or_else(|| SimError::UnknownScheme {
            name: s.to_string(),
            valid: SchemeKind::valid_names(),
        })
    }
}

/// Lifecycle of a request. Variants are ordered; a request only moves forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RequestStatus {
    Pending,
    InUpfQueue,
    InTransit,
    InMecQueue,
    Completed,
    Dropped,
}

/// One flow-setup request admitted into the data plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeRequest {
    pub id: RequestId,
    pub qos: QosClass,
    /// Geo-local UPF (0-based) drawn from the traffic skew.
    pub origin_upf: usize,
    pub arrival_epoch: u64,
    pub assigned_upf: Option<usize>,
    pub assigned_mec: Option<usize>,
    /// Delays measured in the simulated system.
    pub measured: DelayBreakdown,
    /// Delays projected by the scheme at admission time.
    pub projected: DelayBreakdown,
    pub status: RequestStatus,
    /// Epoch in which the request finished (completed or dropped).
    pub finish_epoch: Option<u64>,
}

impl UeRequest {
    pub fn new(id: RequestId, qos: QosClass, origin_upf: usize, arrival_epoch: u64) -> Self {
        UeRequest {
            id,
            qos,
            origin_upf,
            arrival_epoch,
            assigned_upf: None,
            assigned_mec: None,
            measured: DelayBreakdown::default(),
            projected: DelayBreakdown::default(),
            status: RequestStatus::Pending,
            finish_epoch: None,
        }
    }

    /// Moves the request to `next`. Regressions are invariant violations.
    pub fn advance(&mut self, next: RequestStatus) -> Result<(), SimError> {
        if next < self.status {
            return Err(SimError::Invariant(format!(
                "request {} status regression {:?} -> {:?}",
                self.id, self.status, next
            )));
        }
        self.status = next;
        Ok(())
    }
}
