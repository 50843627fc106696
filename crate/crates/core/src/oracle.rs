//! Exhaustive reference solvers for small instances.
//!
//! The batch oracle enumerates every composition `x_1 + .. + x_U = n` and
//! minimizes the largest per-UPF worst-case compute delay
//! `max(0, (q + x - headroom) / c)`. Because the objective only depends on the
//! counts, compositions cover all `U^n` labelled placements in
//! `C(n + U - 1, U - 1)` evaluations.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::delay::{self, Load};
use crate::engine::{seeded_rng, SimRng};
use crate::error::{Result, SimError};
use crate::model::{SystemState, UeRequest};
use crate::schemes::{self, find_bestfit_upf};

pub const MAX_BATCH: usize = 12;
pub const MAX_UPFS: usize = 5;
pub const MAX_PAIRS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchPlacement {
    /// Requests placed on each UPF.
    pub assignment: Vec<u64>,
    /// Largest worst-case compute delay over all UPFs, in epochs.
    pub worst_case_epochs: f64,
}

fn check_loads(loads: &[Load]) -> Result<()> {
    if loads.is_empty() {
        return Err(SimError::EmptySnapshot("UPF"));
    }
    for (i, l) in loads.iter().enumerate() {
        if !(l.capacity > 0.0) {
            return Err(SimError::domain("capacity", l.capacity, "must be positive"));
        }
        // headroom = C - S with 0 <= S <= C
        if !(l.headroom >= 0.0 && l.headroom <= l.capacity) {
            return Err(SimError::Invariant(format!(
                "UPF {}: headroom {} outside [0, {}]",
                i + 1,
                l.headroom,
                l.capacity
            )));
        }
    }
    Ok(())
}

/// Max over every UPF of the worst-case delay after placing `x`.
pub fn batch_objective(x: &[u64], loads: &[Load]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (xj, l) in x.iter().zip(loads) {
        worst = worst.max(delay::worst_case_batch_delay(
            l.queue_len,
            *xj,
            l.headroom,
            l.capacity,
        )?);
    }
    Ok(worst)
}

// Worst case seen by the placed requests themselves (UPFs with x_j > 0).
fn placed_objective(x: &[u64], loads: &[Load]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (xj, l) in x.iter().zip(loads) {
        if *xj > 0 {
            worst = worst.max(delay::worst_case_batch_delay(
                l.queue_len,
                *xj,
                l.headroom,
                l.capacity,
            )?);
        }
    }
    Ok(worst)
}

/// Visits every composition of `n` into `parts` parts, in lexicographically
/// descending order: `(n, 0, .., 0)` first, `(0, .., 0, n)` last.
pub fn for_each_composition(
    n: u64,
    parts: usize,
    mut f: impl FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    fn rec(
        remaining: u64,
        pos: usize,
        x: &mut Vec<u64>,
        f: &mut dyn FnMut(&[u64]) -> Result<()>,
    ) -> Result<()> {
        if pos + 1 == x.len() {
            x[pos] = remaining;
            return f(x);
        }
        for v in (0..=remaining).rev() {
            x[pos] = v;
            rec(remaining - v, pos + 1, x, f)?;
        }
        Ok(())
    }
    if parts == 0 {
        return Ok(());
    }
    let mut x = vec![0; parts];
    rec(n, 0, &mut x, &mut f)
}

/// Exact min-max placement of `n` requests of one QoS over `loads`.
///
/// Among vectors with the optimal objective, the one whose placed requests
/// see the smallest worst case wins; remaining ties go to the first vector
/// in lexicographically descending order. With `n = 1` this selects exactly
/// the UPF that [`find_bestfit_upf`] picks.
pub fn minmax_batch_optimum(n: usize, loads: &[Load]) -> Result<BatchPlacement> {
    if n > MAX_BATCH {
        return Err(SimError::BoundExceeded {
            name: "n",
            value: n,
            limit: MAX_BATCH,
        });
    }
    if loads.len() > MAX_UPFS {
        return Err(SimError::BoundExceeded {
            name: "U",
            value: loads.len(),
            limit: MAX_UPFS,
        });
    }
    check_loads(loads)?;
    let mut best: Option<(f64, f64, Vec<u64>)> = None;
    for_each_composition(n as u64, loads.len(), |x| {
        let obj = batch_objective(x, loads)?;
        let placed = placed_objective(x, loads)?;
        let better = match &best {
            None => true,
            Some((bo, bp, _)) => obj < *bo || (obj == *bo && placed < *bp),
        };
        if better {
            best = Some((obj, placed, x.to_vec()));
        }
        Ok(())
    })?;
    let (worst_case_epochs, _, assignment) = best.expect("at least one composition");
    Ok(BatchPlacement {
        assignment,
        worst_case_epochs,
    })
}

/// Places the batch one request at a time on the current bestfit UPF,
/// growing that UPF's projected queue after each placement.
pub fn sequential_heuristic_batch(n: usize, loads: &[Load]) -> Result<BatchPlacement> {
    check_loads(loads)?;
    let mut projected = loads.to_vec();
    let mut assignment = vec![0u64; loads.len()];
    for _ in 0..n {
        let (i, _) = find_bestfit_upf(&projected, 1.0)?;
        assignment[i] += 1;
        projected[i].queue_len += 1;
    }
    let worst_case_epochs = batch_objective(&assignment, loads)?;
    Ok(BatchPlacement {
        assignment,
        worst_case_epochs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOptimum {
    pub upf_id: usize,
    pub mec_id: Option<usize>,
    pub d_e2e: f64,
}

/// True joint minimum of `d_upf(i) + d_net(i, j) + d_mec(j)` over all pairs,
/// using the same projected delays as the schemes. Regular traffic only
/// minimizes `d_upf`. Ties go to the lowest `(i, j)`.
pub fn pair_enumeration_optimum(req: &UeRequest, state: &SystemState) -> Result<PairOptimum> {
    let (u, m) = (state.num_upfs(), state.num_mecs());
    if u * m > MAX_PAIRS {
        return Err(SimError::BoundExceeded {
            name: "U*M",
            value: u * m,
            limit: MAX_PAIRS,
        });
    }
    if u == 0 {
        return Err(SimError::EmptySnapshot("UPF"));
    }
    let d_upf: Vec<f64> = (0..u)
        .map(|i| schemes::projected_upf(req, state, i))
        .collect::<Result<_>>()?;
    if !req.qos.uses_mec() {
        let (i, d) = find_bestfit_upf(&schemes::upf_loads(req, state)?, state.delta_ms)?;
        return Ok(PairOptimum {
            upf_id: i,
            mec_id: None,
            d_e2e: d,
        });
    }
    if m == 0 {
        return Err(SimError::EmptySnapshot("MEC"));
    }
    let d_mec: Vec<f64> = (0..m)
        .map(|j| schemes::projected_mec(state, j))
        .collect::<Result<_>>()?;
    let mut best: Option<PairOptimum> = None;
    for (i, du) in d_upf.iter().enumerate() {
        for (j, dm) in d_mec.iter().enumerate() {
            let total = du + schemes::projected_net(state, i, j)? + dm;
            if best.is_none_or(|b| total < b.d_e2e) {
                best = Some(PairOptimum {
                    upf_id: i,
                    mec_id: Some(j),
                    d_e2e: total,
                });
            }
        }
    }
    Ok(best.expect("non-empty pair set"))
}

/// One row of an oracle gap study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub instance: u64,
    pub num_upfs: usize,
    pub batch: usize,
    pub optimum: f64,
    pub heuristic: f64,
    /// `heuristic / optimum`; 1 when both are zero.
    pub ratio: f64,
    pub same_assignment: bool,
}

/// Random single-QoS UPF snapshot: capacity 1..=4, in-service 0..=capacity,
/// queue 0..=8.
pub fn random_loads(rng: &mut SimRng, u: usize) -> Vec<Load> {
    (0..u)
        .map(|_| {
            let c: u32 = rng.random_range(1..=4);
            let s: u32 = rng.random_range(0..=c);
            let q: u64 = rng.random_range(0..=8);
            Load::new(q, (c - s) as f64, c as f64)
        })
        .collect()
}

pub fn gap_ratio(heuristic: f64, optimum: f64) -> f64 {
    if optimum == 0.0 {
        if heuristic == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        heuristic / optimum
    }
}

/// Compares the sequential heuristic with the exact optimum on `trials`
/// random instances, each with a batch size drawn from `1..=n_max`.
pub fn gap_study(u: usize, n_max: usize, trials: u64, seed: u64) -> Result<Vec<GapRecord>> {
    if u == 0 {
        return Err(SimError::EmptySnapshot("UPF"));
    }
    if u > MAX_UPFS {
        return Err(SimError::BoundExceeded {
            name: "U",
            value: u,
            limit: MAX_UPFS,
        });
    }
    if n_max > MAX_BATCH {
        return Err(SimError::BoundExceeded {
            name: "n_max",
            value: n_max,
            limit: MAX_BATCH,
        });
    }
    let mut rng = seeded_rng(seed);
    (0..trials)
        .map(|instance| {
            let loads = random_loads(&mut rng, u);
            let batch = if n_max == 0 {
                0
            } else {
                rng.random_range(1..=n_max)
            };
            let opt = minmax_batch_optimum(batch, &loads)?;
            let heur = sequential_heuristic_batch(batch, &loads)?;
            Ok(GapRecord {
                instance,
                num_upfs: u,
                batch,
                optimum: opt.worst_case_epochs,
                heuristic: heur.worst_case_epochs,
                ratio: gap_ratio(heur.worst_case_epochs, opt.worst_case_epochs),
                same_assignment: opt.assignment == heur.assignment,
            })
        })
        .collect()
}
