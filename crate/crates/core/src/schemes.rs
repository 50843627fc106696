//! UE-request assignment policies.
//!
//! Every policy is a pure function of the request and a read-only
//! [`SystemState`]; the engine applies the returned decision.

use serde::{Deserialize, Serialize};

use crate::delay::{self, DelayBreakdown, Load};
use crate::error::{Result, SimError};
use crate::model::{SchemeKind, SystemState, UeRequest};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentDecision {
    pub upf_id: usize,
    /// Absent iff the request is regular traffic.
    pub mec_id: Option<usize>,
    pub projected: DelayBreakdown,
    /// The selected UPF bucket was full; the request is not admitted.
    pub dropped: bool,
}

fn argmin_projected(loads: &[Load], delta_ms: f64, what: &'static str) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, load) in loads.iter().enumerate() {
        let cost = load.projected_delay(delta_ms)?;
        // strict comparison keeps the lowest index on ties
        if best.is_none_or(|(_, b)| cost < b) {
            best = Some((i, cost));
        }
    }
    best.ok_or(SimError::EmptySnapshot(what))
}

/// Index (0-based) of the UPF with the smallest projected compute delay for
/// one more request, and that delay. Ties go to the lowest index.
pub fn find_bestfit_upf(loads: &[Load], delta_ms: f64) -> Result<(usize, f64)> {
    argmin_projected(loads, delta_ms, "UPF")
}

/// MEC counterpart of [`find_bestfit_upf`].
pub fn find_bestfit_mec(loads: &[Load], delta_ms: f64) -> Result<(usize, f64)> {
    argmin_projected(loads, delta_ms, "MEC")
}

pub(crate) fn upf_loads(req: &UeRequest, state: &SystemState) -> Result<Vec<Load>> {
    state.upfs.iter().map(|u| u.load(req.qos)).collect()
}

pub(crate) fn mec_loads(state: &SystemState) -> Result<Vec<Load>> {
    state.mecs.iter().map(|m| m.load()).collect()
}

pub(crate) fn projected_upf(req: &UeRequest, state: &SystemState, upf: usize) -> Result<f64> {
    state.upfs[upf]
        .load(req.qos)?
        .projected_delay(state.delta_ms)
}

pub(crate) fn projected_mec(state: &SystemState, mec: usize) -> Result<f64> {
    state.mecs[mec].load()?.projected_delay(state.delta_ms)
}

/// Link delay the request would see on UPF `upf` → MEC `mec` right now.
pub(crate) fn projected_net(state: &SystemState, upf: usize, mec: usize) -> Result<f64> {
    let link = state.links.get(upf, mec);
    delay::net_delay(
        link.n_share as u64,
        state.mecs[mec].bytes_per_ue as f64,
        link.bandwidth_bits_per_ms,
        state.delta_ms,
    )
}

fn decide(
    req: &UeRequest,
    state: &SystemState,
    upf: usize,
    d_upf: f64,
    mec: Option<usize>,
    d_mec: Option<f64>,
) -> Result<AssignmentDecision> {
    let dropped = state.upfs[upf].is_full(req.qos);
    let (mec_id, projected) = if req.qos.uses_mec() {
        let mec = mec.expect("non-regular decisions carry a MEC");
        let d_mec = match d_mec {
            Some(d) => d,
            None => projected_mec(state, mec)?,
        };
        let d_net = projected_net(state, upf, mec)?;
        (Some(mec), DelayBreakdown::new(d_upf, d_net, d_mec))
    } else {
        (None, DelayBreakdown::upf_only(d_upf))
    };
    Ok(AssignmentDecision {
        upf_id: upf,
        mec_id,
        projected,
        dropped,
    })
}

/// SMF default: the request's geo-local UPF and that UPF's co-located MEC,
/// regardless of load. Projected delays are for reporting only.
pub fn assign_baseline(req: &UeRequest, state: &SystemState) -> Result<AssignmentDecision> {
    state.check_upf(req.origin_upf)?;
    let upf = req.origin_upf;
    let d_upf = projected_upf(req, state, upf)?;
    decide(req, state, upf, d_upf, Some(state.colocated_mec(upf)), None)
}

/// Bestfit UPF, but the MEC stays the SMF default (co-located with the origin UPF).
pub fn assign_bestfit_no_pe(req: &UeRequest, state: &SystemState) -> Result<AssignmentDecision> {
    state.check_upf(req.origin_upf)?;
    let (upf, d_upf) = find_bestfit_upf(&upf_loads(req, state)?, state.delta_ms)?;
    decide(
        req,
        state,
        upf,
        d_upf,
        Some(state.colocated_mec(req.origin_upf)),
        None,
    )
}

/// Bestfit UPF with the path extended to that UPF's co-located MEC.
pub fn assign_bestfit_pe(req: &UeRequest, state: &SystemState) -> Result<AssignmentDecision> {
    if !state.is_colocated() {
        return Err(SimError::Topology(format!(
            "path extension needs co-located pairs, got U = {}, M = {}",
            state.num_upfs(),
            state.num_mecs()
        )));
    }
    state.check_upf(req.origin_upf)?;
    let (upf, d_upf) = find_bestfit_upf(&upf_loads(req, state)?, state.delta_ms)?;
    decide(req, state, upf, d_upf, Some(upf), None)
}

/// Bestfit UPF and bestfit MEC, each chosen independently of the other and
/// of the link between them.
pub fn assign_bestfit_upf_mec(req: &UeRequest, state: &SystemState) -> Result<AssignmentDecision> {
    state.check_upf(req.origin_upf)?;
    let (upf, d_upf) = find_bestfit_upf(&upf_loads(req, state)?, state.delta_ms)?;
    if !req.qos.uses_mec() {
        return decide(req, state, upf, d_upf, None, None);
    }
    let (mec, d_mec) = find_bestfit_mec(&mec_loads(state)?, state.delta_ms)?;
    decide(req, state, upf, d_upf, Some(mec), Some(d_mec))
}

pub fn assign(
    scheme: SchemeKind,
    req: &UeRequest,
    state: &SystemState,
) -> Result<AssignmentDecision> {
    match scheme {
        SchemeKind::Baseline => assign_baseline(req, state),
        SchemeKind::BestfitUpfNoPe => assign_bestfit_no_pe(req, state),
        SchemeKind::BestfitUpfPathExt => assign_bestfit_pe(req, state),
        SchemeKind::BestfitUpfMec => assign_bestfit_upf_mec(req, state),
    }
}
