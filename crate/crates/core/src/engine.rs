//! Discrete-epoch simulation loop.
//!
//! Each epoch runs, in order: arrival generation, sequential admission through
//! the configured scheme, per-bucket UPF service, link deliveries into MEC
//! queues, MEC service, and the `n_share` refresh. A request served in epoch
//! `t` at a stage it entered in epoch `a` spends `(t + 1 - a)` epochs there.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::delay::{self, DelayBreakdown};
use crate::error::{Result, SimError};
use crate::model::{
    validate_scenario, ArrivalProcess, EpochClock, PerQos, QosClass, RequestId, RequestStatus,
    Scenario, SchemeKind, SystemState, TrafficSpec, UeRequest,
};
use crate::schemes;

pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples per-epoch arrivals for a traffic specification.
#[derive(Debug, Clone)]
pub struct ArrivalGenerator {
    mean: f64,
    process: ArrivalProcess,
    origin: WeightedIndex<f64>,
    qos: WeightedIndex<f64>,
    poisson: Option<Poisson<f64>>,
}

impl ArrivalGenerator {
    pub fn new(traffic: &TrafficSpec) -> Result<Self> {
        let origin = WeightedIndex::new(traffic.skew.iter().copied())
            .map_err(|e| SimError::Parse(format!("traffic.skew: {e}")))?;
        let qos = WeightedIndex::new(QosClass::ALL.iter().map(|&q| traffic.qos_mix[q]))
            .map_err(|e| SimError::Parse(format!("traffic.qos_mix: {e}")))?;
        let mean = traffic.mean_arrivals_per_epoch;
        let poisson = if traffic.process == ArrivalProcess::Poisson && mean > 0.0 {
            Some(Poisson::new(mean).map_err(|e| SimError::Parse(format!("poisson mean: {e}")))?)
        } else {
            None
        };
        Ok(ArrivalGenerator {
            mean,
            process: traffic.process,
            origin,
            qos,
            poisson,
        })
    }

    fn count(&self, rng: &mut SimRng, epoch: u64) -> u64 {
        match self.process {
            ArrivalProcess::Poisson => self.poisson.map_or(0, |p| p.sample(rng) as u64),
            // floor((e+1)λ) - floor(eλ): exact long-run mean without carried state
            ArrivalProcess::Deterministic => {
                let hi = ((epoch + 1) as f64 * self.mean).floor();
                let lo = (epoch as f64 * self.mean).floor();
                (hi - lo) as u64
            }
        }
    }

    pub fn generate(&self, rng: &mut SimRng, epoch: u64, first_id: RequestId) -> Vec<UeRequest> {
        let n = self.count(rng, epoch);
        (0..n)
            .map(|k| {
                let origin = self.origin.sample(rng);
                let qos = QosClass::ALL[self.qos.sample(rng)];
                UeRequest::new(first_id + k, qos, origin, epoch)
            })
            .collect()
    }
}

/// Draws the arrivals of one epoch. Ids start at `first_id`.
pub fn generate_arrivals(
    traffic: &TrafficSpec,
    rng: &mut SimRng,
    epoch: u64,
    first_id: RequestId,
) -> Result<Vec<UeRequest>> {
    Ok(ArrivalGenerator::new(traffic)?.generate(rng, epoch, first_id))
}

/// Per-epoch trace row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: u64,
    pub arrivals: u64,
    pub admitted: u64,
    pub dropped: u64,
    pub completed: u64,
    /// Queue lengths at the end of the epoch.
    pub upf_queue: Vec<PerQos<u32>>,
    pub upf_served: Vec<PerQos<u32>>,
    pub mec_queue: Vec<u32>,
    pub mec_served: Vec<u32>,
    pub in_transit: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: String,
    pub scheme: SchemeKind,
    pub seed: u64,
    pub delta_ms: f64,
    pub num_upfs: usize,
    pub num_mecs: usize,
    pub horizon_epochs: u64,
    pub thresholds_ms: PerQos<Option<f64>>,
    pub epochs_run: u64,
    /// The drain cap was reached with requests still in the system.
    pub truncated: bool,
    pub generated: u64,
    pub completed: u64,
    pub dropped: u64,
    pub residual: u64,
    pub requests: Vec<UeRequest>,
    pub series: Vec<EpochReport>,
}

impl RunResult {
    pub fn completed_requests(&self) -> impl Iterator<Item = &UeRequest> {
        self.requests
            .iter()
            .filter(|r| r.status == RequestStatus::Completed)
    }
}

#[derive(Debug, Clone, Copy)]
struct InFlight {
    id: RequestId,
    upf: usize,
    mec: usize,
    deliver_epoch: u64,
}

/// A single simulation; owns all of its state.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    scenario: Scenario,
    clock: EpochClock,
    state: SystemState,
    rng: SimRng,
    arrivals: ArrivalGenerator,
    requests: Vec<UeRequest>,
    mec_arrival: Vec<u64>,
    in_flight: Vec<InFlight>,
    series: Vec<EpochReport>,
    completed: u64,
    dropped: u64,
}

impl SimulationRun {
    pub fn new(scenario: Scenario) -> Result<Self> {
        validate_scenario(&scenario).into_result()?;
        let state = SystemState::from_scenario(&scenario)?;
        Ok(SimulationRun {
            clock: EpochClock::new(scenario.delta_ms)?,
            rng: seeded_rng(scenario.seed),
            arrivals: ArrivalGenerator::new(&scenario.traffic)?,
            state,
            scenario,
            requests: Vec::new(),
            mec_arrival: Vec::new(),
            in_flight: Vec::new(),
            series: Vec::new(),
            completed: 0,
            dropped: 0,
        })
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn clock(&self) -> &EpochClock {
        &self.clock
    }

    pub fn requests(&self) -> &[UeRequest] {
        &self.requests
    }

    pub fn generated(&self) -> u64 {
        self.requests.len() as u64
    }

    pub fn residual(&self) -> u64 {
        self.generated() - self.completed - self.dropped
    }

    /// Admits externally supplied requests at the current epoch, before
    /// [`step_epoch`](Self::step_epoch) generates its own. Ids are reassigned.
    pub fn inject(
        &mut self,
        reqs: impl IntoIterator<Item = (QosClass, usize)>,
    ) -> Result<Vec<RequestId>> {
        let t = self.clock.epoch();
        let mut ids = Vec::new();
        for (qos, origin) in reqs {
            let id = self.requests.len() as RequestId;
            self.state.check_upf(origin)?;
            self.admit(UeRequest::new(id, qos, origin, t))?;
            ids.push(id);
        }
        Ok(ids)
    }

    fn admit(&mut self, mut req: UeRequest) -> Result<bool> {
        let t = self.clock.epoch();
        let decision = schemes::assign(self.scenario.scheme, &req, &self.state)?;
        req.assigned_upf = Some(decision.upf_id);
        req.assigned_mec = decision.mec_id;
        req.projected = decision.projected;
        let admitted = !decision.dropped;
        if admitted {
            let upf = &mut self.state.upfs[decision.upf_id];
            upf.queue[req.qos].push_back(req.id);
            if upf.queue[req.qos].len() > upf.queue_cap[req.qos] as usize {
                return Err(SimError::Invariant(format!(
                    "UPF {} {} queue exceeds its cap",
                    decision.upf_id + 1,
                    req.qos
                )));
            }
            if let Some(j) = decision.mec_id {
                self.state.mecs[j].committed += 1;
            }
            req.advance(RequestStatus::InUpfQueue)?;
        } else {
            req.advance(RequestStatus::Dropped)?;
            req.finish_epoch = Some(t);
            self.dropped += 1;
        }
        debug_assert_eq!(req.id as usize, self.requests.len());
        self.requests.push(req);
        self.mec_arrival.push(0);
        Ok(admitted)
    }

    /// Advances the simulation by one epoch.
    pub fn step_epoch(&mut self) -> Result<EpochReport> {
        let t = self.clock.epoch();
        let delta = self.clock.delta_ms();
        let completed_before = self.completed;
        let dropped_before = self.dropped;

        for upf in &mut self.state.upfs {
            upf.in_service = PerQos::default();
        }
        for mec in &mut self.state.mecs {
            mec.in_service = 0;
        }

        // arrivals and sequential admission
        let arrivals = if t < self.scenario.horizon_epochs {
            self.arrivals
                .generate(&mut self.rng, t, self.requests.len() as RequestId)
        } else {
            Vec::new()
        };
        let n_arrivals = arrivals.len() as u64;
        let mut admitted = 0;
        for req in arrivals {
            if self.admit(req)? {
                admitted += 1;
            }
        }
        if admitted + (self.dropped - dropped_before) != n_arrivals {
            return Err(SimError::Invariant(format!(
                "epoch {t}: arrivals {n_arrivals} != admitted {admitted} + dropped"
            )));
        }

        // UPF service, one dedicated bucket per QoS
        let mut upf_served = vec![PerQos::<u32>::default(); self.state.upfs.len()];
        #[allow(clippy::needless_range_loop)]
        for i in 0..self.state.upfs.len() {
            for q in QosClass::ALL {
                let upf = &mut self.state.upfs[i];
                let n = (upf.capacity[q] as usize).min(upf.queue[q].len());
                let served: Vec<RequestId> = upf.queue[q].drain(..n).collect();
                upf.in_service[q] = n as u32;
                if upf.in_service[q] > upf.capacity[q] {
                    return Err(SimError::Invariant(format!(
                        "UPF {} {q}: in-service {} > capacity {}",
                        i + 1,
                        upf.in_service[q],
                        upf.capacity[q]
                    )));
                }
                upf_served[i][q] = n as u32;
                for id in served {
                    self.finish_upf_stage(id, i, t, delta)?;
                }
            }
        }

        // link deliveries
        let (mut due, rest): (Vec<_>, Vec<_>) = std::mem::take(&mut self.in_flight)
            .into_iter()
            .partition(|f| f.deliver_epoch <= t);
        self.in_flight = rest;
        due.sort_by_key(|f| (f.deliver_epoch, f.id));
        for f in due {
            self.deliver(f, t)?;
        }

        // MEC service
        let mut mec_served = vec![0u32; self.state.mecs.len()];
        #[allow(clippy::needless_range_loop)]
        for j in 0..self.state.mecs.len() {
            let mec = &mut self.state.mecs[j];
            let n = (mec.capacity as usize).min(mec.queue.len());
            let served: Vec<RequestId> = mec.queue.drain(..n).collect();
            mec.in_service = n as u32;
            mec_served[j] = n as u32;
            for id in served {
                let arrived = self.mec_arrival[id as usize];
                let req = &mut self.requests[id as usize];
                let d_mec = (t + 1 - arrived) as f64 * delta;
                req.measured = DelayBreakdown::new(req.measured.d_upf, req.measured.d_net, d_mec);
                req.advance(RequestStatus::Completed)?;
                req.finish_epoch = Some(t);
                self.completed += 1;
            }
        }

        // n_share = requests still in transit on each link
        for link in self.state.links.iter_mut() {
            link.n_share = 0;
        }
        for f in &self.in_flight {
            self.state.links.get_mut(f.upf, f.mec).n_share += 1;
        }

        let report = EpochReport {
            epoch: t,
            arrivals: n_arrivals,
            admitted,
            dropped: self.dropped - dropped_before,
            completed: self.completed - completed_before,
            upf_queue: self
                .state
                .upfs
                .iter()
                .map(|u| u.queue.map(|_, dq| dq.len() as u32))
                .collect(),
            upf_served,
            mec_queue: self
                .state
                .mecs
                .iter()
                .map(|m| m.queue.len() as u32)
                .collect(),
            mec_served,
            in_transit: self.in_flight.len() as u64,
        };
        self.series.push(report.clone());
        self.clock.advance();
        Ok(report)
    }

    fn finish_upf_stage(&mut self, id: RequestId, upf: usize, t: u64, delta: f64) -> Result<()> {
        let req = &mut self.requests[id as usize];
        let d_upf = (t + 1 - req.arrival_epoch) as f64 * delta;
        if !req.qos.uses_mec() {
            req.measured = DelayBreakdown::upf_only(d_upf);
            req.advance(RequestStatus::Completed)?;
            req.finish_epoch = Some(t);
            self.completed += 1;
            return Ok(());
        }
        let mec = req
            .assigned_mec
            .ok_or_else(|| SimError::Invariant(format!("request {id} has no MEC")))?;
        let link = self.state.links.get_mut(upf, mec);
        link.n_share += 1;
        let d_net = delay::net_delay(
            link.n_share as u64,
            self.state.mecs[mec].bytes_per_ue as f64,
            link.bandwidth_bits_per_ms,
            delta,
        )?;
        let transit_epochs = ((d_net / delta).ceil() as u64).max(1);
        req.measured = DelayBreakdown::new(d_upf, d_net, 0.0);
        req.advance(RequestStatus::InTransit)?;
        self.in_flight.push(InFlight {
            id,
            upf,
            mec,
            deliver_epoch: t + transit_epochs,
        });
        Ok(())
    }

    fn deliver(&mut self, f: InFlight, t: u64) -> Result<()> {
        let mec = &mut self.state.mecs[f.mec];
        let req = &mut self.requests[f.id as usize];
        mec.committed = mec.committed.checked_sub(1).ok_or_else(|| {
            SimError::Invariant(format!("MEC {} received an uncommitted request", f.mec + 1))
        })?;
        if mec.is_full() {
            req.advance(RequestStatus::Dropped)?;
            req.finish_epoch = Some(t);
            self.dropped += 1;
            return Ok(());
        }
        mec.queue.push_back(f.id);
        self.mec_arrival[f.id as usize] = t;
        req.advance(RequestStatus::InMecQueue)
    }

    pub fn into_result(self, truncated: bool) -> RunResult {
        let residual = self.residual();
        RunResult {
            scenario: self.scenario.name.clone(),
            scheme: self.scenario.scheme,
            seed: self.scenario.seed,
            delta_ms: self.scenario.delta_ms,
            num_upfs: self.state.upfs.len(),
            num_mecs: self.state.mecs.len(),
            horizon_epochs: self.scenario.horizon_epochs,
            thresholds_ms: self.scenario.thresholds_ms,
            epochs_run: self.clock.epoch(),
            truncated,
            generated: self.requests.len() as u64,
            completed: self.completed,
            dropped: self.dropped,
            residual,
            requests: self.requests,
            series: self.series,
        }
    }
}

/// Runs the horizon, then drains until the system is empty or the drain cap hits.
pub fn run_to_completion(scenario: &Scenario) -> Result<RunResult> {
    let drain_cap = scenario.drain_cap();
    let horizon = scenario.horizon_epochs;
    let mut run = SimulationRun::new(scenario.clone())?;
    for _ in 0..horizon {
        run.step_epoch()?;
    }
    let mut drained = 0;
    while run.residual() > 0 && drained < drain_cap {
        run.step_epoch()?;
        drained += 1;
    }
    let truncated = run.residual() > 0;
    Ok(run.into_result(truncated))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traffic(mean: f64, process: ArrivalProcess) -> TrafficSpec {
        TrafficSpec {
            mean_arrivals_per_epoch: mean,
            process,
            skew: vec![0.13, 0.24, 0.30, 0.15, 0.18],
            qos_mix: PerQos::splat(0.25),
        }
    }

    #[test]
    fn zero_rate_generates_nothing() {
        let mut rng = seeded_rng(1);
        for p in [ArrivalProcess::Poisson, ArrivalProcess::Deterministic] {
            for e in 0..10 {
                assert!(generate_arrivals(&traffic(0.0, p), &mut rng, e, 0)
                    .unwrap()
                    .is_empty());
            }
        }
    }

    #[test]
    fn deterministic_process_count_and_origin_frequencies() {
        let g = ArrivalGenerator::new(&traffic(10.0, ArrivalProcess::Deterministic)).unwrap();
        let mut rng = seeded_rng(7);
        let mut counts = [0u64; 5];
        let mut total = 0;
        for e in 0..20_000 {
            let reqs = g.generate(&mut rng, e, total);
            assert_eq!(reqs.len(), 10);
            for r in &reqs {
                counts[r.origin_upf] += 1;
                assert_eq!(r.arrival_epoch, e);
            }
            total += reqs.len() as u64;
        }
        let expected = [0.13, 0.24, 0.30, 0.15, 0.18];
        for (c, w) in counts.iter().zip(expected) {
            let f = *c as f64 / total as f64;
            assert!((f - w).abs() < 0.005, "{f} vs {w}");
        }
    }

    #[test]
    fn deterministic_fractional_mean() {
        let g = ArrivalGenerator::new(&traffic(2.5, ArrivalProcess::Deterministic)).unwrap();
        let mut rng = seeded_rng(0);
        let n: usize = (0..100).map(|e| g.generate(&mut rng, e, 0).len()).sum();
        assert_eq!(n, 250);
    }

    #[test]
    fn same_seed_same_arrivals() {
        let g = ArrivalGenerator::new(&traffic(12.0, ArrivalProcess::Poisson)).unwrap();
        let draw = |seed| {
            let mut rng = seeded_rng(seed);
            (0..50)
                .flat_map(|e| g.generate(&mut rng, e, 0))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn horizon_zero_is_empty() {
        let mut s = Scenario::table1();
        s.horizon_epochs = 0;
        let r = run_to_completion(&s).unwrap();
        assert_eq!(r.generated, 0);
        assert_eq!(r.epochs_run, 0);
        assert!(r.requests.is_empty() && r.series.is_empty());
        assert!(!r.truncated);
    }

    #[test]
    fn invalid_scenario_is_refused() {
        let mut s = Scenario::table1();
        s.traffic.skew = vec![1.0];
        assert!(matches!(
            SimulationRun::new(s),
            Err(SimError::InvalidScenario(_))
        ));
    }
}
