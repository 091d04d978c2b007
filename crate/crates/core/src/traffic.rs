//! Constant-bit-rate downlink flows from the remote host to each vehicle.

use rand::Rng;

use crate::engine::{RngStream, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub flow_id: u32,
    pub dest_node: u32,
    pub packet_size: u32,
    /// Application bits per second.
    pub offered_rate: f64,
    pub start: SimTime,
    pub stop: SimTime,
}

impl FlowSpec {
    pub fn interval_secs(&self) -> f64 {
        f64::from(self.packet_size) * 8.0 / self.offered_rate
    }

    /// Creation time of packet `seq` on the unjittered CBR grid. Exact in
    /// integer nanoseconds (floored), so the grid never drifts.
    pub fn nominal_creation(&self, seq: u64) -> SimTime {
        let bits = u128::from(self.packet_size) * 8;
        let offset_ns =
            u128::from(seq) * bits * 1_000_000_000 / self.offered_rate.round().max(1.0) as u128;
        self.start + SimTime::from_nanos(offset_ns as u64)
    }
}

/// Packet generator for one flow.
#[derive(Debug, Clone)]
pub struct CbrSource {
    pub spec: FlowSpec,
    next_seq: u64,
    /// Maximum jitter as a fraction of the inter-packet interval.
    jitter_fraction: f64,
}

impl CbrSource {
    pub fn new(spec: FlowSpec, jitter_fraction: f64) -> Self {
        assert!(spec.packet_size > 0 && spec.offered_rate > 0.0 && spec.start < spec.stop);
        CbrSource {
            spec,
            next_seq: 0,
            jitter_fraction,
        }
    }

    pub fn generated(&self) -> u64 {
        self.next_seq
    }

    /// Returns `(seq, creation time)` of the next packet if it falls before
    /// the flow's stop time.
    pub fn next_packet(&mut self, rng: &mut RngStream) -> Option<(u64, SimTime)> {
        let seq = self.next_seq;
        let nominal = self.spec.nominal_creation(seq);
        let at = if self.jitter_fraction > 0.0 && seq > 0 {
            let span = self.spec.interval_secs() * self.jitter_fraction;
            let shift: f64 = rng.random_range(-span..span);
            let t = nominal.as_secs_f64() + shift;
            SimTime::from_secs_f64(t.max(self.spec.start.as_secs_f64()))
        } else {
            nominal
        };
        if at >= self.spec.stop {
            return None;
        }
        self.next_seq += 1;
        Some((seq, at))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketStatus {
    Delivered,
    Lost,
    /// Still queued or in transit when the run ended.
    InFlight,
}

impl PacketStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketStatus::Delivered => "delivered",
            PacketStatus::Lost => "lost",
            PacketStatus::InFlight => "in_flight",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "delivered" => Some(PacketStatus::Delivered),
            "lost" => Some(PacketStatus::Lost),
            "in_flight" => Some(PacketStatus::InFlight),
            _ => None,
        }
    }
}

/// Lifecycle of one application packet.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketRecord {
    pub flow_id: u32,
    pub seq: u64,
    pub size: u32,
    pub created: SimTime,
    pub tx_first: Option<SimTime>,
    pub rx: Option<SimTime>,
    pub status: PacketStatus,
    pub attempts: u32,
    pub sinr_at_rx: Option<f64>,
}

impl PacketRecord {
    pub fn new(flow_id: u32, seq: u64, size: u32, created: SimTime) -> Self {
        PacketRecord {
            flow_id,
            seq,
            size,
            created,
            tx_first: None,
            rx: None,
            status: PacketStatus::InFlight,
            attempts: 0,
            sinr_at_rx: None,
        }
    }

    pub fn delay(&self) -> Option<SimTime> {
        self.rx.map(|rx| rx - self.created)
    }
}
