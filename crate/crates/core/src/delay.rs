//! Delay and capacity formulas for the UPF, MEC and UPF→MEC link.
//!
//! All functions are pure. Times are milliseconds, capacities requests per
//! epoch, bandwidth bits per millisecond. Byte counts are converted to bits
//! with an explicit factor of 8.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

const BITS_PER_BYTE: f64 = 8.0;

/// Per-request delay components; `d_e2e` is always their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DelayBreakdown {
    pub d_upf: f64,
    pub d_net: f64,
    pub d_mec: f64,
    pub d_e2e: f64,
}

impl DelayBreakdown {
    pub fn new(d_upf: f64, d_net: f64, d_mec: f64) -> Self {
        DelayBreakdown {
            d_upf,
            d_net,
            d_mec,
            d_e2e: d_upf + d_net + d_mec,
        }
    }

    /// Regular traffic stops at the UPF.
    pub fn upf_only(d_upf: f64) -> Self {
        DelayBreakdown::new(d_upf, 0.0, 0.0)
    }
}

/// Queue length, free service slots and capacity of one service point
/// (a UPF bucket or a MEC), as seen by the assignment schemes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub queue_len: u64,
    pub headroom: f64,
    pub capacity: f64,
}

impl Load {
    pub fn new(queue_len: u64, headroom: f64, capacity: f64) -> Self {
        Load {
            queue_len,
            headroom,
            capacity,
        }
    }

    pub fn idle(capacity: f64) -> Self {
        Load::new(0, capacity, capacity)
    }

    pub fn projected_delay(&self, delta_ms: f64) -> Result<f64> {
        upf_projected_delay(self.queue_len, self.headroom, self.capacity, delta_ms)
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SimError::domain(name, value, "must be positive and finite"))
    }
}

/// UPF bucket capacity `etpb * bytes * 8 * alpha / delta`.
///
/// `etpb` enters the product as a per-bit processing factor, so larger values
/// mean a faster UPF.
pub fn upf_capacity(etpb: f64, bytes: f64, alpha: f64, delta_ms: f64) -> Result<f64> {
    require_positive("etpb", etpb)?;
    require_positive("bytes", bytes)?;
    require_positive("delta_ms", delta_ms)?;
    if !(alpha > 0.0) {
        return Err(SimError::domain(
            "alpha",
            alpha,
            "bucket disabled (alpha must be > 0)",
        ));
    }
    if alpha > 1.0 {
        return Err(SimError::domain("alpha", alpha, "must not exceed 1"));
    }
    Ok(etpb * bytes * BITS_PER_BYTE * alpha / delta_ms)
}

/// MEC capacity `etpb * bytes * 8 / delta`; the UPF form with `alpha = 1`.
pub fn mec_capacity(etpb: f64, bytes: f64, delta_ms: f64) -> Result<f64> {
    upf_capacity(etpb, bytes, 1.0, delta_ms)
}

/// Free service slots `c - s`.
pub fn upf_headroom(capacity: f64, in_service: u64) -> Result<f64> {
    if !(capacity >= 0.0) {
        return Err(SimError::domain("capacity", capacity, "must be >= 0"));
    }
    let s = in_service as f64;
    if s > capacity {
        return Err(SimError::Invariant(format!(
            "in-service count {in_service} exceeds capacity {capacity}"
        )));
    }
    Ok(capacity - s)
}

/// Projected compute delay of one more request at a UPF bucket.
///
/// `delta` when the queue is shorter than the headroom, otherwise
/// `((q + 1 - headroom) / c) * delta + delta`. Equality takes the second branch.
pub fn upf_projected_delay(
    queue_len: u64,
    headroom: f64,
    capacity: f64,
    delta_ms: f64,
) -> Result<f64> {
    require_positive("capacity", capacity)?;
    require_positive("delta_ms", delta_ms)?;
    if !(headroom >= 0.0) {
        return Err(SimError::domain("headroom", headroom, "must be >= 0"));
    }
    let q = queue_len as f64;
    if q < headroom {
        Ok(delta_ms)
    } else {
        Ok((q + 1.0 - headroom) / capacity * delta_ms + delta_ms)
    }
}

/// Same piecewise form as [`upf_projected_delay`] over a MEC's single queue.
pub fn mec_projected_delay(
    queue_len: u64,
    headroom: f64,
    capacity: f64,
    delta_ms: f64,
) -> Result<f64> {
    upf_projected_delay(queue_len, headroom, capacity, delta_ms)
}

/// Link delay `n_share * bytes * 8 / (bw * delta)`; zero on an empty link.
pub fn net_delay(
    n_share: u64,
    bytes_mec: f64,
    bandwidth_bits_per_ms: f64,
    delta_ms: f64,
) -> Result<f64> {
    require_positive("bandwidth", bandwidth_bits_per_ms)?;
    require_positive("delta_ms", delta_ms)?;
    if !(bytes_mec >= 0.0) {
        return Err(SimError::domain("bytes_mec", bytes_mec, "must be >= 0"));
    }
    Ok(n_share as f64 * bytes_mec * BITS_PER_BYTE / (bandwidth_bits_per_ms * delta_ms))
}

/// Worst-case compute delay, in epochs, after placing a batch of `x`
/// requests on a bucket: `max(0, (q + x - headroom) / c)`.
pub fn worst_case_batch_delay(
    queue_len: u64,
    batch: u64,
    headroom: f64,
    capacity: f64,
) -> Result<f64> {
    require_positive("capacity", capacity)?;
    let v = (queue_len as f64 + batch as f64 - headroom) / capacity;
    Ok(v.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upf_capacity_examples() {
        assert!(matches!(
            upf_capacity(1.0, 256.0, 0.0, 1.0),
            Err(SimError::Domain { name: "alpha", .. })
        ));
        // etpb = 1/512, 256 B, alpha = 1 → 4 requests per epoch.
        assert_eq!(upf_capacity(1.0 / 512.0, 256.0, 1.0, 1.0).unwrap(), 4.0);
        let a = upf_capacity(0.003, 256.0, 0.2, 1.0).unwrap();
        let b = upf_capacity(0.003, 256.0, 0.4, 1.0).unwrap();
        assert_eq!(b, 2.0 * a);
        assert!(upf_capacity(-1.0, 256.0, 0.5, 1.0).is_err());
        assert!(upf_capacity(1.0, 0.0, 0.5, 1.0).is_err());
        assert!(upf_capacity(1.0, 256.0, 0.5, 0.0).is_err());
        assert!(upf_capacity(1.0, 256.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn headroom_examples() {
        assert_eq!(upf_headroom(4.0, 4).unwrap(), 0.0);
        assert_eq!(upf_headroom(4.0, 1).unwrap(), 3.0);
        assert_eq!(upf_headroom(7.0, 0).unwrap(), 7.0);
        assert!(matches!(upf_headroom(4.0, 5), Err(SimError::Invariant(_))));
    }

    #[test]
    fn upf_projected_delay_examples() {
        assert_eq!(upf_projected_delay(0, 2.0, 4.0, 1.0).unwrap(), 1.0);
        assert_eq!(upf_projected_delay(7, 0.0, 4.0, 1.0).unwrap(), 3.0);
        // q == headroom takes the queueing branch.
        assert_eq!(
            upf_projected_delay(3, 3.0, 4.0, 1.0).unwrap(),
            1.0 / 4.0 + 1.0
        );
        assert!(upf_projected_delay(1, 0.0, 0.0, 1.0).is_err());
        assert!(upf_projected_delay(1, 0.0, -2.0, 1.0).is_err());
    }

    #[test]
    fn mec_projected_delay_examples() {
        assert_eq!(mec_projected_delay(0, 1.0, 2.0, 1.0).unwrap(), 1.0);
        assert_eq!(mec_projected_delay(5, 0.0, 2.0, 1.0).unwrap(), 4.0);
        for (q, h, c) in [(0, 2.0, 4.0), (7, 0.0, 4.0), (3, 1.0, 3.0)] {
            assert_eq!(
                mec_projected_delay(q, h, c, 1.0).unwrap(),
                upf_projected_delay(q, h, c, 1.0).unwrap()
            );
        }
    }

    #[test]
    fn mec_capacity_examples() {
        let etpb = 1.0 / 1024.0;
        assert_eq!(
            mec_capacity(etpb, 1500.0, 1.0).unwrap(),
            upf_capacity(etpb, 1500.0, 1.0, 1.0).unwrap()
        );
        assert_eq!(
            mec_capacity(etpb, 1500.0, 0.5).unwrap(),
            2.0 * mec_capacity(etpb, 1500.0, 1.0).unwrap()
        );
        // 1500 B * 8 = 12000 bit; 12000 / 1024 = 11.71875
        assert_eq!(mec_capacity(etpb, 1500.0, 1.0).unwrap(), 11.71875);
        assert!(mec_capacity(0.0, 1500.0, 1.0).is_err());
    }

    #[test]
    fn net_delay_examples() {
        assert_eq!(net_delay(0, 1500.0, 150_000.0, 1.0).unwrap(), 0.0);
        let d1 = net_delay(7, 1500.0, 150_000.0, 1.0).unwrap();
        let d2 = net_delay(7, 1500.0, 300_000.0, 1.0).unwrap();
        assert_eq!(d2, d1 / 2.0);
        // 10 * 1500 * 8 bit / 150e3 bit/ms
        assert_eq!(net_delay(10, 1500.0, 150_000.0, 1.0).unwrap(), 0.8);
        assert!(net_delay(1, 1500.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn worst_case_batch_examples() {
        assert_eq!(worst_case_batch_delay(1, 0, 3.0, 4.0).unwrap(), 0.0);
        assert_eq!(worst_case_batch_delay(3, 5, 0.0, 4.0).unwrap(), 2.0);
        let mut prev = 0.0;
        for x in 0..20 {
            let v = worst_case_batch_delay(2, x, 3.0, 2.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(worst_case_batch_delay(1, 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn breakdown_sums() {
        let d = DelayBreakdown::new(1.5, 0.25, 2.0);
        assert_eq!(d.d_e2e, 3.75);
        assert_eq!(DelayBreakdown::upf_only(2.0).d_e2e, 2.0);
    }
}
