//! Per-flow accounting and the evaluation metrics derived from it.
//!
//! Symbols: S sent, L lost, P delivered, D per-packet end-to-end delay,
//! R / T bytes received / transmitted per simulation second, N run length.
//!
//! The mean delay divides by delivered packets P, since delay is only
//! observable for packets that arrive. Kbps is 1000 bit/s.

use crate::engine::SimTime;
use crate::error::OracleMismatch;
use crate::traffic::{PacketRecord, PacketStatus};

/// Streaming accumulators for one flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowStats {
    pub flow_id: u32,
    pub dest_node: u32,
    pub sent: u64,
    pub lost: u64,
    pub delivered: u64,
    /// Sum of end-to-end delays of delivered packets, ns.
    pub delay_sum_ns: u128,
    pub bytes_received: u64,
    pub bytes_transmitted: u64,
    /// Measured interval N (horizon minus warm-up).
    pub duration: SimTime,
    /// Packets created before this instant are excluded.
    pub warmup: SimTime,
    /// R_i, indexed by absolute simulation second.
    pub rx_buckets: Vec<u64>,
    /// T_i, indexed by absolute simulation second.
    pub tx_buckets: Vec<u64>,
    delays_ns: Vec<u64>,
}

impl FlowStats {
    pub fn new(flow_id: u32, dest_node: u32, horizon: SimTime, warmup: SimTime) -> Self {
        let seconds = horizon.as_nanos().div_ceil(1_000_000_000) as usize + 1;
        FlowStats {
            flow_id,
            dest_node,
            sent: 0,
            lost: 0,
            delivered: 0,
            delay_sum_ns: 0,
            bytes_received: 0,
            bytes_transmitted: 0,
            duration: horizon.saturating_sub(warmup),
            warmup,
            rx_buckets: vec![0; seconds],
            tx_buckets: vec![0; seconds],
            delays_ns: Vec::new(),
        }
    }

    fn counts(&self, created: SimTime) -> bool {
        created >= self.warmup
    }

    fn bump(buckets: &mut Vec<u64>, t: SimTime, bytes: u64) {
        let i = t.second_index() as usize;
        if i >= buckets.len() {
            buckets.resize(i + 1, 0);
        }
        buckets[i] += bytes;
    }

    pub fn on_created(&mut self, created: SimTime, size: u32) {
        if !self.counts(created) {
            return;
        }
        self.sent += 1;
        self.bytes_transmitted += u64::from(size);
        Self::bump(&mut self.tx_buckets, created, u64::from(size));
    }

    pub fn on_delivered(&mut self, created: SimTime, rx: SimTime, size: u32) {
        if !self.counts(created) {
            return;
        }
        let delay = (rx - created).as_nanos();
        self.delivered += 1;
        self.delay_sum_ns += u128::from(delay);
        self.delays_ns.push(delay);
        self.bytes_received += u64::from(size);
        Self::bump(&mut self.rx_buckets, rx, u64::from(size));
    }

    pub fn on_lost(&mut self, created: SimTime) {
        if self.counts(created) {
            self.lost += 1;
        }
    }

    /// Packets neither delivered nor lost when the run ended.
    pub fn in_flight(&self) -> u64 {
        self.sent - self.delivered - self.lost
    }

    /// `100 * L / S`; absent when nothing was sent.
    pub fn packet_loss_ratio(&self) -> Option<f64> {
        (self.sent > 0).then(|| 100.0 * self.lost as f64 / self.sent as f64)
    }

    /// `sum(D) / P` in milliseconds; absent when nothing was delivered.
    pub fn mean_delay_ms(&self) -> Option<f64> {
        (self.delivered > 0).then(|| self.delay_sum_ns as f64 / self.delivered as f64 / 1e6)
    }

    /// `sum(R_i * 8) / N` in Kbps.
    pub fn throughput_kbps(&self) -> f64 {
        bitrate_kbps(self.rx_buckets.iter().sum(), self.duration)
    }

    /// `sum(T_i * 8) / N` in Kbps.
    pub fn tx_bitrate_kbps(&self) -> f64 {
        bitrate_kbps(self.tx_buckets.iter().sum(), self.duration)
    }

    /// Delay percentile over delivered packets (nearest rank), ms.
    pub fn delay_percentile_ms(&self, q: f64) -> Option<f64> {
        let mut d = self.delays_ns.clone();
        percentile_ns(&mut d, q).map(|ns| ns as f64 / 1e6)
    }

    pub fn delays_ns(&self) -> &[u64] {
        &self.delays_ns
    }

    /// First field that differs from `other`, for oracle comparison.
    pub fn first_difference(&self, other: &FlowStats) -> Option<OracleMismatch> {
        macro_rules! check {
            ($field:ident) => {
                if self.$field != other.$field {
                    return Some(OracleMismatch {
                        flow_id: self.flow_id,
                        field: stringify!($field),
                        streaming: format!("{:?}", self.$field),
                        recomputed: format!("{:?}", other.$field),
                    });
                }
            };
        }
        check!(flow_id);
        check!(sent);
        check!(lost);
        check!(delivered);
        check!(delay_sum_ns);
        check!(bytes_received);
        check!(bytes_transmitted);
        check!(duration);
        let trim = |v: &[u64]| {
            let end = v.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1);
            v[..end].to_vec()
        };
        let (a, b) = (trim(&self.rx_buckets), trim(&other.rx_buckets));
        if a != b {
            return Some(OracleMismatch {
                flow_id: self.flow_id,
                field: "rx_buckets",
                streaming: format!("{a:?}"),
                recomputed: format!("{b:?}"),
            });
        }
        let (a, b) = (trim(&self.tx_buckets), trim(&other.tx_buckets));
        if a != b {
            return Some(OracleMismatch {
                flow_id: self.flow_id,
                field: "tx_buckets",
                streaming: format!("{a:?}"),
                recomputed: format!("{b:?}"),
            });
        }
        None
    }
}

pub fn bitrate_kbps(bytes: u64, duration: SimTime) -> f64 {
    if duration == SimTime::ZERO {
        return 0.0;
    }
    bytes as f64 * 8.0 / duration.as_secs_f64() / 1000.0
}

/// Nearest-rank percentile, `q` in [0, 1].
pub fn percentile_ns(values: &mut [u64], q: f64) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    Some(values[rank - 1])
}

/// Brute-force recomputation of every flow's accumulators from packet
/// records. Flows listed in `flows` (id, dest) appear even with no records.
pub fn recompute_from_records<'a>(
    records: impl IntoIterator<Item = &'a PacketRecord>,
    flows: &[(u32, u32)],
    horizon: SimTime,
    warmup: SimTime,
) -> Vec<FlowStats> {
    let mut out: Vec<FlowStats> = flows
        .iter()
        .map(|&(id, dest)| FlowStats::new(id, dest, horizon, warmup))
        .collect();
    for r in records {
        let idx = match out.iter().position(|s| s.flow_id == r.flow_id) {
            Some(i) => i,
            None => {
                out.push(FlowStats::new(r.flow_id, u32::MAX, horizon, warmup));
                out.len() - 1
            }
        };
        let s = &mut out[idx];
        if r.created < warmup {
            continue;
        }
        s.sent += 1;
        s.bytes_transmitted += u64::from(r.size);
        FlowStats::bump(&mut s.tx_buckets, r.created, u64::from(r.size));
        match r.status {
            PacketStatus::Delivered => {
                let rx = r.rx.expect("delivered packet has rx time");
                let d = (rx - r.created).as_nanos();
                s.delivered += 1;
                s.delay_sum_ns += u128::from(d);
                s.delays_ns.push(d);
                s.bytes_received += u64::from(r.size);
                FlowStats::bump(&mut s.rx_buckets, rx, u64::from(r.size));
            }
            PacketStatus::Lost => s.lost += 1,
            PacketStatus::InFlight => {}
        }
    }
    out.sort_by_key(|s| s.flow_id);
    out
}

/// Compares streaming accumulators with recomputed ones, flow by flow.
pub fn verify_against(
    streaming: &[FlowStats],
    recomputed: &[FlowStats],
) -> Result<(), OracleMismatch> {
    for s in streaming {
        let empty;
        let other = match recomputed.iter().find(|r| r.flow_id == s.flow_id) {
            Some(r) => r,
            None => {
                empty = FlowStats::new(s.flow_id, s.dest_node, s.warmup + s.duration, s.warmup);
                &empty
            }
        };
        if let Some(m) = s.first_difference(other) {
            return Err(m);
        }
    }
    if let Some(extra) = recomputed
        .iter()
        .find(|r| r.sent > 0 && !streaming.iter().any(|s| s.flow_id == r.flow_id))
    {
        return Err(OracleMismatch {
            flow_id: extra.flow_id,
            field: "flow_id",
            streaming: "absent".into(),
            recomputed: format!("{} packets", extra.sent),
        });
    }
    Ok(())
}

/// Mean of the present values; absent if none are present.
pub fn mean_present(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats() -> FlowStats {
        FlowStats::new(0, 1, SimTime::from_secs(4), SimTime::ZERO)
    }

    #[test]
    fn loss_ratio() {
        let mut s = stats();
        for _ in 0..20 {
            s.on_created(SimTime::ZERO, 100);
        }
        for _ in 0..5 {
            s.on_lost(SimTime::ZERO);
        }
        assert_eq!(s.packet_loss_ratio(), Some(25.0));
        let mut s = stats();
        s.on_created(SimTime::ZERO, 1);
        assert_eq!(s.packet_loss_ratio(), Some(0.0));
        assert_eq!(stats().packet_loss_ratio(), None);
    }

    #[test]
    fn mean_delay() {
        let mut s = stats();
        for (i, d) in [10u64, 20, 30].into_iter().enumerate() {
            let c = SimTime::from_millis(i as u64 * 100);
            s.on_created(c, 10);
            s.on_delivered(c, c + SimTime::from_millis(d), 10);
        }
        assert_eq!(s.mean_delay_ms(), Some(20.0));
        let mut one = stats();
        one.on_created(SimTime::ZERO, 1);
        one.on_delivered(SimTime::ZERO, SimTime::from_millis(7), 1);
        assert_eq!(one.mean_delay_ms(), Some(7.0));
        assert_eq!(stats().mean_delay_ms(), None);
    }

    #[test]
    fn throughput_and_tx_bitrate() {
        let mut s = stats();
        for k in 0..125 {
            let t = SimTime::from_millis(k * 30);
            s.on_created(t, 1000);
            s.on_delivered(t, t + SimTime::from_millis(1), 1000);
        }
        assert!((s.throughput_kbps() - 250.0).abs() < 1e-9);
        assert!((s.tx_bitrate_kbps() - 250.0).abs() < 1e-9);
        assert_eq!(stats().throughput_kbps(), 0.0);
        assert_eq!(stats().tx_bitrate_kbps(), 0.0);
    }

    #[test]
    fn buckets_floor_to_seconds() {
        let mut s = stats();
        s.on_created(SimTime::from_millis(999), 5);
        s.on_delivered(SimTime::from_millis(999), SimTime::from_millis(1000), 5);
        assert_eq!(s.tx_buckets[0], 5);
        assert_eq!(s.rx_buckets[1], 5);
    }

    #[test]
    fn warmup_excludes_early_packets() {
        let mut s = FlowStats::new(0, 1, SimTime::from_secs(10), SimTime::from_secs(2));
        s.on_created(SimTime::from_secs(1), 100);
        s.on_lost(SimTime::from_secs(1));
        s.on_created(SimTime::from_secs(3), 100);
        assert_eq!(s.sent, 1);
        assert_eq!(s.lost, 0);
        assert_eq!(s.duration, SimTime::from_secs(8));
        assert!((s.tx_bitrate_kbps() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn streaming_matches_recompute() {
        let horizon = SimTime::from_secs(3);
        let mut s = FlowStats::new(4, 9, horizon, SimTime::ZERO);
        let mut records = Vec::new();
        for k in 0..50u64 {
            let c = SimTime::from_millis(k * 50);
            let mut r = PacketRecord::new(4, k, 200, c);
            s.on_created(c, 200);
            match k % 3 {
                0 => {
                    r.status = PacketStatus::Delivered;
                    r.rx = Some(c + SimTime::from_micros(700 + k));
                    s.on_delivered(c, r.rx.unwrap(), 200);
                }
                1 => {
                    r.status = PacketStatus::Lost;
                    s.on_lost(c);
                }
                _ => {}
            }
            records.push(r);
        }
        let re = recompute_from_records(&records, &[(4, 9)], horizon, SimTime::ZERO);
        verify_against(std::slice::from_ref(&s), &re).unwrap();
        assert_eq!(s.in_flight(), 16);

        let mut tampered = re.clone();
        tampered[0].lost += 1;
        let err = verify_against(&[s], &tampered).unwrap_err();
        assert_eq!(err.field, "lost");
    }

    #[test]
    fn empty_flow_is_absent_on_both_paths() {
        let s = stats();
        let re = recompute_from_records(
            std::iter::empty(),
            &[(0, 1)],
            SimTime::from_secs(4),
            SimTime::ZERO,
        );
        verify_against(std::slice::from_ref(&s), &re).unwrap();
        assert_eq!(re[0].packet_loss_ratio(), None);
        assert_eq!(re[0].mean_delay_ms(), None);
    }

    #[test]
    fn percentile_nearest_rank() {
        let mut v = vec![5, 1, 4, 2, 3];
        assert_eq!(percentile_ns(&mut v, 0.5), Some(3));
        assert_eq!(percentile_ns(&mut v, 0.95), Some(5));
        assert_eq!(percentile_ns(&mut [], 0.5), None);
    }

    #[test]
    fn mean_skips_absent() {
        assert_eq!(mean_present([Some(1.0), None, Some(3.0)]), Some(2.0));
        assert_eq!(mean_present([None, None]), None);
    }
}
