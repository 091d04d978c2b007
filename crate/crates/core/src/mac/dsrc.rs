//! DSRC roadside unit: one half-duplex channel, a tail-drop FIFO and
//! per-packet reception checks against a sensitivity threshold.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::channel::{friis_received_power, linear_to_db, nakagami_fading_draw};
use crate::engine::{RngStream, SimTime};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DsrcConfig {
    pub channel_bit_rate_bps: f64,
    /// Preamble, inter-frame spacing and ACK exchange per packet.
    pub per_packet_overhead_ms: f64,
    /// Packets buffered between the application and the air: a 500-packet
    /// MAC queue behind a 1000-packet interface queue.
    pub queue_capacity: usize,
    pub rx_sensitivity_dbm: f64,
    pub nakagami_m: f64,
    /// MAC retransmissions after a failed reception (0-7).
    pub max_retries: u32,
}

impl Default for DsrcConfig {
    fn default() -> Self {
        DsrcConfig {
            channel_bit_rate_bps: 6e6,
            per_packet_overhead_ms: 0.5,
            queue_capacity: 1500,
            rx_sensitivity_dbm: -85.0,
            nakagami_m: 3.0,
            max_retries: 0,
        }
    }
}

impl DsrcConfig {
    pub fn overhead(&self) -> SimTime {
        SimTime::from_secs_f64(self.per_packet_overhead_ms * 1e-3)
    }

    /// Share of channel time spent on payload for packets of `size` bytes.
    pub fn payload_fraction(&self, size: u32) -> f64 {
        let payload = f64::from(size) * 8.0 / self.channel_bit_rate_bps;
        payload / (payload + self.per_packet_overhead_ms * 1e-3)
    }
}

/// `size * 8 / rate + overhead`, seconds.
pub fn airtime(size: u32, cfg: &DsrcConfig) -> f64 {
    assert!(size > 0, "packet size must be positive");
    f64::from(size) * 8.0 / cfg.channel_bit_rate_bps + cfg.per_packet_overhead_ms * 1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueResult {
    Accepted,
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RsuEntry {
    pub packet: usize,
    pub flow: usize,
    pub size: u32,
    pub enqueued: SimTime,
}

#[derive(Debug, Clone)]
pub struct RsuQueue {
    capacity: usize,
    entries: VecDeque<RsuEntry>,
    drops: u64,
}

impl RsuQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1);
        RsuQueue {
            capacity,
            entries: VecDeque::new(),
            drops: 0,
        }
    }

    pub fn enqueue(&mut self, entry: RsuEntry) -> EnqueueResult {
        if self.entries.len() >= self.capacity {
            self.drops += 1;
            EnqueueResult::Dropped
        } else {
            self.entries.push_back(entry);
            EnqueueResult::Accepted
        }
    }

    pub fn pop(&mut self) -> Option<RsuEntry> {
        self.entries.pop_front()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn iter(&self) -> impl Iterator<Item = &RsuEntry> {
        self.entries.iter()
    }
}

/// Outcome of one over-the-air attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reception {
    pub rx_power_dbm: f64,
    pub delivered: bool,
}

/// Friis mean power plus a Nakagami-m fading draw, compared with the
/// receiver sensitivity.
pub fn attempt_delivery(
    tx_power_dbm: f64,
    gains_db: f64,
    distance: f64,
    wavelength: f64,
    cfg: &DsrcConfig,
    rng: &mut RngStream,
) -> Reception {
    let mean = friis_received_power(tx_power_dbm, gains_db, distance.max(1e-3), wavelength);
    let fading = nakagami_fading_draw(cfg.nakagami_m, rng);
    let rx_power_dbm = mean + linear_to_db(fading);
    Reception {
        rx_power_dbm,
        delivered: rx_power_dbm >= cfg.rx_sensitivity_dbm,
    }
}

/// Packet currently occupying the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InAir {
    pub entry: RsuEntry,
    pub attempt: u32,
    pub started: SimTime,
    pub ends: SimTime,
    pub reception: Reception,
}

/// Channel state machine. The caller supplies reception outcomes; this type
/// enforces FIFO service and non-overlapping busy intervals.
#[derive(Debug, Clone)]
pub struct DsrcMac {
    cfg: DsrcConfig,
    queue: RsuQueue,
    in_air: Option<InAir>,
    busy_until: SimTime,
    busy_time: SimTime,
}

impl DsrcMac {
    pub fn new(cfg: DsrcConfig) -> Self {
        let queue = RsuQueue::new(cfg.queue_capacity);
        DsrcMac {
            cfg,
            queue,
            in_air: None,
            busy_until: SimTime::ZERO,
            busy_time: SimTime::ZERO,
        }
    }

    pub fn config(&self) -> &DsrcConfig {
        &self.cfg
    }

    pub fn queue(&self) -> &RsuQueue {
        &self.queue
    }

    pub fn in_air(&self) -> Option<&InAir> {
        self.in_air.as_ref()
    }

    pub fn is_idle(&self) -> bool {
        self.in_air.is_none()
    }

    pub fn busy_time(&self) -> SimTime {
        self.busy_time
    }

    pub fn enqueue(&mut self, entry: RsuEntry) -> EnqueueResult {
        self.queue.enqueue(entry)
    }

    /// Takes the queue head onto the channel. `receive` decides the outcome
    /// for the packet's destination. Returns the busy-interval end.
    pub fn start_next<F>(&mut self, now: SimTime, receive: F) -> Option<SimTime>
    where
        F: FnOnce(&RsuEntry) -> Reception,
    {
        assert!(self.in_air.is_none(), "channel already busy");
        let entry = self.queue.pop()?;
        Some(self.transmit(now, entry, 0, receive))
    }

    fn transmit<F>(&mut self, now: SimTime, entry: RsuEntry, attempt: u32, receive: F) -> SimTime
    where
        F: FnOnce(&RsuEntry) -> Reception,
    {
        assert!(now >= self.busy_until, "overlapping transmissions");
        let ends = now + SimTime::from_secs_f64(airtime(entry.size, &self.cfg));
        let reception = receive(&entry);
        self.in_air = Some(InAir {
            entry,
            attempt,
            started: now,
            ends,
            reception,
        });
        self.busy_until = ends;
        self.busy_time = self.busy_time + (ends - now);
        ends
    }

    /// Ends the current transmission. Returns the finished attempt and, if
    /// it failed with retries left, the end time of the retransmission.
    pub fn finish<F>(&mut self, now: SimTime, retry_receive: F) -> (InAir, Option<SimTime>)
    where
        F: FnOnce(&RsuEntry) -> Reception,
    {
        let done = self.in_air.take().expect("finish without transmission");
        debug_assert_eq!(done.ends, now);
        if !done.reception.delivered && done.attempt < self.cfg.max_retries {
            let ends = self.transmit(now, done.entry, done.attempt + 1, retry_receive);
            return (done, Some(ends));
        }
        (done, None)
    }
}
