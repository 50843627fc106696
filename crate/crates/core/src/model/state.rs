use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{PerQos, QosClass, RequestId, Scenario};
use crate::delay::{self, Load};
use crate::error::{Result, SimError};

/// Live state of one UPF: a dedicated compute bucket and FCFS queue per QoS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpfState {
    /// 0-based index; reports print it 1-based.
    pub id: usize,
    pub etpb: Option<f64>,
    pub bytes_per_ue: u32,
    pub alpha: PerQos<f64>,
    pub capacity: PerQos<u32>,
    pub queue: PerQos<VecDeque<RequestId>>,
    pub in_service: PerQos<u32>,
    pub queue_cap: PerQos<u32>,
}

impl UpfState {
    pub fn new(id: usize, capacity: PerQos<u32>, queue_cap: PerQos<u32>) -> Self {
        let total: u32 = capacity.iter().map(|(_, c)| *c).sum();
        UpfState {
            id,
            etpb: None,
            bytes_per_ue: 256,
            alpha: capacity.map(|_, c| {
                if total == 0 {
                    0.0
                } else {
                    *c as f64 / total as f64
                }
            }),
            capacity,
            queue: PerQos::default(),
            in_service: PerQos::default(),
            queue_cap,
        }
    }

    pub fn queue_len(&self, q: QosClass) -> usize {
        self.queue[q].len()
    }

    pub fn total_queue_len(&self) -> usize {
        QosClass::ALL.iter().map(|&q| self.queue[q].len()).sum()
    }

    pub fn is_full(&self, q: QosClass) -> bool {
        self.queue[q].len() >= self.queue_cap[q] as usize
    }

    /// Free service slots of bucket `q` in the current epoch.
    pub fn headroom(&self, q: QosClass) -> Result<f64> {
        delay::upf_headroom(self.capacity[q] as f64, self.in_service[q] as u64)
    }

    pub fn load(&self, q: QosClass) -> Result<Load> {
        Ok(Load {
            queue_len: self.queue[q].len() as u64,
            headroom: self.headroom(q)?,
            capacity: self.capacity[q] as f64,
        })
    }
}

/// Live state of one MEC: a single FCFS queue shared by all non-regular traffic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MecState {
    pub id: usize,
    pub etpb: Option<f64>,
    pub bytes_per_ue: u32,
    pub capacity: u32,
    pub queue: VecDeque<RequestId>,
    pub in_service: u32,
    pub queue_cap: u32,
    /// Admitted requests bound for this MEC that have not reached its queue yet.
    #[serde(default)]
    pub committed: u32,
}

impl MecState {
    pub fn new(id: usize, capacity: u32, queue_cap: u32) -> Self {
        MecState {
            id,
            etpb: None,
            bytes_per_ue: 1500,
            capacity,
            queue: VecDeque::new(),
            in_service: 0,
            queue_cap,
            committed: 0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() >= self.queue_cap as usize
    }

    pub fn headroom(&self) -> Result<f64> {
        delay::upf_headroom(self.capacity as f64, self.in_service as u64)
    }

    /// Upstream commitments count as queued work, so requests admitted earlier
    /// in the same epoch steer later ones away from this MEC.
    pub fn load(&self) -> Result<Load> {
        Ok(Load {
            queue_len: self.queue.len() as u64 + self.committed as u64,
            headroom: self.headroom()?,
            capacity: self.capacity as f64,
        })
    }
}

/// UPF→MEC link. `n_share` counts requests currently in transit on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub upf_id: usize,
    pub mec_id: usize,
    pub bandwidth_bits_per_ms: f64,
    pub n_share: u32,
}

/// Full mesh of links, row-major by UPF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMatrix {
    num_upfs: usize,
    num_mecs: usize,
    links: Vec<Link>,
}

impl LinkMatrix {
    pub fn from_fn(
        num_upfs: usize,
        num_mecs: usize,
        mut bw: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut links = Vec::with_capacity(num_upfs * num_mecs);
        for i in 0..num_upfs {
            for j in 0..num_mecs {
                links.push(Link {
                    upf_id: i,
                    mec_id: j,
                    bandwidth_bits_per_ms: bw(i, j),
                    n_share: 0,
                });
            }
        }
        LinkMatrix {
            num_upfs,
            num_mecs,
            links,
        }
    }

    pub fn uniform(num_upfs: usize, num_mecs: usize, bandwidth_bits_per_ms: f64) -> Self {
        Self::from_fn(num_upfs, num_mecs, |_, _| bandwidth_bits_per_ms)
    }

    pub fn get(&self, upf: usize, mec: usize) -> &Link {
        &self.links[upf * self.num_mecs + mec]
    }

    pub fn get_mut(&mut self, upf: usize, mec: usize) -> &mut Link {
        &mut self.links[upf * self.num_mecs + mec]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Link> {
        self.links.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Link> {
        self.links.iter_mut()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.num_upfs, self.num_mecs)
    }

    /// True when every link has the same bandwidth and the same `n_share`.
    pub fn is_uniform(&self) -> bool {
        match self.links.first() {
            None => true,
            Some(first) => self.links.iter().all(|l| {
                l.bandwidth_bits_per_ms == first.bandwidth_bits_per_ms && l.n_share == first.n_share
            }),
        }
    }
}

/// Everything a scheme may look at when deciding where a request goes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub delta_ms: f64,
    pub upfs: Vec<UpfState>,
    pub mecs: Vec<MecState>,
    pub links: LinkMatrix,
}

impl SystemState {
    /// Builds an idle system from a scenario. The scenario should already be valid.
    pub fn from_scenario(s: &Scenario) -> Result<Self> {
        let delta = s.delta_ms;
        let upfs = s
            .upfs
            .iter()
            .enumerate()
            .map(|(i, spec)| {
                let capacity = spec.resolved_capacity(delta)?;
                let queue_cap = match spec.queue_cap {
                    Some(cap) => cap,
                    None => PerQos::from_fn(|q| {
                        s.default_queue_cap(
                            s.traffic.mean_arrivals_per_epoch * s.traffic.qos_mix[q],
                            capacity[q],
                        )
                    }),
                };
                Ok(UpfState {
                    id: i,
                    etpb: spec.etpb,
                    bytes_per_ue: spec.bytes_per_ue,
                    alpha: spec.alpha,
                    capacity,
                    queue: PerQos::default(),
                    in_service: PerQos::default(),
                    queue_cap,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mec_rate = s.traffic.mean_arrivals_per_epoch * (1.0 - s.traffic.qos_mix.regular);
        let mecs = s
            .mecs
            .iter()
            .enumerate()
            .map(|(j, spec)| {
                let capacity = spec.resolved_capacity(delta)?;
                Ok(MecState {
                    id: j,
                    etpb: spec.etpb,
                    bytes_per_ue: spec.bytes_per_ue,
                    capacity,
                    queue: VecDeque::new(),
                    in_service: 0,
                    queue_cap: spec
                        .queue_cap
                        .unwrap_or_else(|| s.default_queue_cap(mec_rate, capacity)),
                    committed: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let links = LinkMatrix::from_fn(upfs.len(), mecs.len(), |i, j| {
            mbps_to_bits_per_ms(s.links.bandwidth_mbps[i][j])
        });
        Ok(SystemState {
            delta_ms: delta,
            upfs,
            mecs,
            links,
        })
    }

    pub fn num_upfs(&self) -> usize {
        self.upfs.len()
    }

    pub fn num_mecs(&self) -> usize {
        self.mecs.len()
    }

    pub fn is_colocated(&self) -> bool {
        self.upfs.len() == self.mecs.len()
    }

    /// The MEC sharing a site with `upf`. Extra UPFs wrap around when U > M.
    pub fn colocated_mec(&self, upf: usize) -> usize {
        upf % self.mecs.len()
    }

    pub fn check_upf(&self, upf: usize) -> Result<()> {
        if upf >= self.upfs.len() {
            return Err(SimError::Topology(format!(
                "UPF index {} out of range (U = {})",
                upf + 1,
                self.upfs.len()
            )));
        }
        Ok(())
    }
}

/// 1 Mbps = 10^6 bit/s = 10^3 bit/ms.
pub fn mbps_to_bits_per_ms(mbps: f64) -> f64 {
    mbps * 1e3
}
