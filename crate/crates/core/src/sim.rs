//! One simulation run: mobility feeds the channel, the channel feeds the
//! MAC, CBR sources feed the MAC queues, and MAC outcomes feed the metrics.

use crate::channel::{
    self, dbm_to_mw, update_link, ChannelDraws, LinkGeometry, LinkState, SinrSample, Tech,
};
use crate::config::{MacConfig, MobilitySource, ScenarioConfig};
use crate::engine::{Event, RngStream, RngStreams, Scheduler, SimTime};
use crate::error::{ConfigError, Error};
use crate::mac::dsrc::{attempt_delivery, Reception, RsuEntry};
use crate::mac::mmwave::{PhyParams, QueuedPacket};
use crate::mac::{DsrcMac, EnqueueResult, LinkView, MacEvent, MmwaveMac};
use crate::metrics::FlowStats;
use crate::mobility::{
    parse_ns2_trace, CorridorMobility, MobilityModel, NodeKind, Position, Topology,
};
use crate::traffic::{CbrSource, FlowSpec, PacketRecord, PacketStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    ChannelUpdate,
    SubframeStart,
    PacketGenerate {
        flow: u32,
    },
    /// Packet reaches the base station or RSU after the backhaul.
    PacketArrival {
        packet: usize,
    },
    DsrcTxComplete,
    FlowStop {
        flow: u32,
    },
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub run_id: String,
    pub config: ScenarioConfig,
    pub flows: Vec<FlowStats>,
    /// Per-packet lifecycle, kept when `output.write_packets` is set.
    pub records: Option<Vec<PacketRecord>>,
    pub sinr: Vec<SinrSample>,
    /// Bits delivered over the whole run, warm-up included.
    pub delivered_bits: u64,
    /// Upper bound on delivered bits/s for this radio.
    pub capacity_bps: f64,
    pub events: u64,
}

impl RunResult {
    /// Aggregate delivered bit rate over the horizon.
    pub fn delivered_bps(&self) -> f64 {
        self.delivered_bits as f64 / self.config.horizon().as_secs_f64()
    }
}

pub fn run_id(cfg: &ScenarioConfig) -> String {
    format!("{}-seed{}", cfg.scenario.name, cfg.scenario.seed)
}

/// Builds the vehicles from the synthetic generator or the trace file.
pub fn build_mobility(
    cfg: &ScenarioConfig,
    streams: &mut RngStreams,
) -> Result<MobilityModel, Error> {
    match cfg.mobility.source {
        MobilitySource::Synthetic => Ok(MobilityModel::Synthetic(CorridorMobility::generate(
            cfg.mobility.corridor_params(),
            streams.stream("mobility"),
        ))),
        MobilitySource::Trace => {
            let path = cfg.mobility.trace_path.as_ref().expect("validated");
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.clone(),
                source,
            })?;
            Ok(MobilityModel::Trace(parse_ns2_trace(&text)?))
        }
    }
}

/// Compact per-packet state kept regardless of record retention.
#[derive(Debug, Clone, Copy)]
struct Pkt {
    flow: u32,
    size: u32,
    created: SimTime,
}

enum Mac {
    Mmwave {
        mac: MmwaveMac,
        phy: PhyParams,
        views: Vec<LinkView>,
        /// Subframe start currently scheduled, if any.
        pending: Option<SimTime>,
        /// No subframe may start before this (end of the last one).
        free_at: SimTime,
    },
    Dsrc {
        mac: DsrcMac,
        noise_dbm: f64,
    },
}

struct Sim<'a> {
    cfg: &'a ScenarioConfig,
    topo: Topology,
    ap: Position,
    sched: Scheduler<EventKind>,
    shadowing: RngStream,
    blockage: RngStream,
    fading: RngStream,
    traffic: RngStream,
    sources: Vec<Option<CbrSource>>,
    flow_open: Vec<bool>,
    stats: Vec<FlowStats>,
    pkts: Vec<Pkt>,
    records: Option<Vec<PacketRecord>>,
    links: Vec<Option<LinkState>>,
    sinr: Vec<SinrSample>,
    mac: Mac,
    backhaul: SimTime,
    horizon: SimTime,
    update_period: SimTime,
    delivered_bits: u64,
    mac_events: Vec<MacEvent>,
}

/// Runs one scenario to its horizon.
pub fn run(cfg: &ScenarioConfig) -> Result<RunResult, Error> {
    cfg.validate()?;
    let mut streams = RngStreams::new(cfg.scenario.seed);
    let vehicles = build_mobility(cfg, &mut streams)?;
    let access_kind = match cfg.tech() {
        Tech::Mmwave => NodeKind::BaseStation,
        Tech::Dsrc => NodeKind::Rsu,
    };
    let ap = cfg.mobility.access_point();
    let topo = Topology::new(vehicles, ap, access_kind);
    let n = topo.vehicles.vehicle_count();
    let horizon = cfg.horizon();
    let warmup = cfg.warmup();

    let stagger = SimTime::from_secs_f64(cfg.traffic.stagger_ms * 1e-3);
    let mut stats = Vec::with_capacity(n);
    let mut sources = Vec::with_capacity(n);
    for i in 0..n {
        let dest = topo.vehicles.vehicle_id(i);
        stats.push(FlowStats::new(i as u32, dest, horizon, warmup));
        let start =
            topo.vehicles.vehicle_entry(i) + SimTime::from_nanos(stagger.as_nanos() * i as u64);
        sources.push((start < horizon).then(|| {
            CbrSource::new(
                FlowSpec {
                    flow_id: i as u32,
                    dest_node: dest,
                    packet_size: cfg.traffic.packet_size,
                    offered_rate: cfg.traffic.offered_rate_bps,
                    start,
                    stop: horizon,
                },
                cfg.traffic.jitter_fraction,
            )
        }));
    }

    let (mac, capacity_bps) = match &cfg.mac {
        MacConfig::Mmwave(m) => (
            Mac::Mmwave {
                mac: MmwaveMac::new(m.clone(), n),
                phy: PhyParams {
                    bandwidth_hz: cfg.radio.bandwidth_hz,
                    noise_mw: dbm_to_mw(cfg.radio.noise_dbm()),
                    leakage_factor: cfg.radio.leakage_factor,
                    fading_m: cfg
                        .channel
                        .small_scale_fading
                        .then_some(cfg.channel.small_scale_m),
                },
                views: vec![
                    LinkView {
                        rx_power_mw: 0.0,
                        cqi_sinr_db: f64::NEG_INFINITY,
                    };
                    n
                ],
                pending: None,
                free_at: SimTime::ZERO,
            },
            cfg.radio.bandwidth_hz * m.mcs_table.top_efficiency(),
        ),
        MacConfig::Dsrc(d) => (
            Mac::Dsrc {
                mac: DsrcMac::new(d.clone()),
                noise_dbm: cfg.radio.noise_dbm(),
            },
            d.channel_bit_rate_bps * d.payload_fraction(cfg.traffic.packet_size),
        ),
    };

    let mut sim = Sim {
        cfg,
        topo,
        ap,
        sched: Scheduler::new(),
        shadowing: streams.detached("shadowing"),
        blockage: streams.detached("blockage"),
        fading: streams.detached("fading"),
        traffic: streams.detached("traffic"),
        sources,
        flow_open: vec![true; n],
        stats,
        pkts: Vec::new(),
        records: cfg.output.write_packets.then(Vec::new),
        links: vec![None; n],
        sinr: Vec::new(),
        mac,
        backhaul: SimTime::from_secs_f64(cfg.traffic.backhaul_latency_ms * 1e-3),
        horizon,
        update_period: cfg.channel_update_period(),
        delivered_bits: 0,
        mac_events: Vec::new(),
    };
    sim.start();
    while let Some(ev) = sim.sched.next_before(horizon) {
        sim.dispatch(ev);
    }
    sim.sched.advance_to(horizon);

    let events = sim.sched.dispatched();
    Ok(RunResult {
        run_id: run_id(cfg),
        config: cfg.clone(),
        flows: sim.stats,
        records: sim.records,
        sinr: sim.sinr,
        delivered_bits: sim.delivered_bits,
        capacity_bps,
        events,
    })
}

impl Sim<'_> {
    fn start(&mut self) {
        self.sched.schedule(SimTime::ZERO, EventKind::ChannelUpdate);
        for i in 0..self.sources.len() {
            if let Some(src) = self.sources[i].as_mut() {
                if let Some((_, at)) = src.next_packet(&mut self.traffic) {
                    self.sched
                        .schedule(at, EventKind::PacketGenerate { flow: i as u32 });
                }
                self.sched
                    .schedule(src.spec.stop, EventKind::FlowStop { flow: i as u32 });
            }
        }
    }

    fn dispatch(&mut self, ev: Event<EventKind>) {
        let now = ev.fire_time;
        debug_assert_eq!(now, self.sched.now());
        match ev.kind {
            EventKind::ChannelUpdate => self.channel_update(now),
            EventKind::PacketGenerate { flow } => self.generate(now, flow as usize),
            EventKind::PacketArrival { packet } => self.arrival(now, packet),
            EventKind::SubframeStart => self.subframe(now),
            EventKind::DsrcTxComplete => self.dsrc_complete(now),
            EventKind::FlowStop { flow } => self.flow_open[flow as usize] = false,
        }
    }

    fn channel_update(&mut self, now: SimTime) {
        let n = self.links.len();
        let states: Vec<_> = (0..n)
            .map(|i| self.topo.vehicles.vehicle_state(i, now))
            .collect();
        let blockers: Vec<Position> = states
            .iter()
            .filter(|s| s.active)
            .map(|s| s.position)
            .collect();
        for (i, st) in states.iter().enumerate() {
            if !st.active {
                continue;
            }
            let measured = match &mut self.mac {
                Mac::Mmwave { mac, .. } => mac.take_measured_interference(i),
                Mac::Dsrc { .. } => 0.0,
            };
            let link = update_link(
                now,
                &LinkGeometry {
                    tx: self.ap,
                    rx: st.position,
                    blockers: &blockers,
                },
                &self.cfg.radio,
                &self.cfg.channel.path_loss,
                &self.cfg.channel.blockage,
                measured,
                ChannelDraws {
                    shadowing: &mut self.shadowing,
                    blockage: &mut self.blockage,
                },
            );
            self.sinr.push(SinrSample {
                time: now,
                node_id: self.topo.vehicles.vehicle_id(i),
                sinr: link.sinr,
            });
            if let Mac::Mmwave { views, .. } = &mut self.mac {
                views[i] = LinkView {
                    rx_power_mw: link.rx_power_mw(),
                    cqi_sinr_db: link.sinr,
                };
            }
            self.links[i] = Some(link);
        }
        let next = now + self.update_period;
        if next <= self.horizon {
            self.sched.schedule(next, EventKind::ChannelUpdate);
        }
        self.wake_mmwave(now);
    }

    fn generate(&mut self, now: SimTime, flow: usize) {
        if !self.flow_open[flow] {
            return;
        }
        let size = self.cfg.traffic.packet_size;
        let id = self.pkts.len();
        self.pkts.push(Pkt {
            flow: flow as u32,
            size,
            created: now,
        });
        if let Some(records) = self.records.as_mut() {
            let seq = self.sources[flow].as_ref().map_or(0, |s| s.generated() - 1);
            records.push(PacketRecord::new(flow as u32, seq, size, now));
        }
        self.stats[flow].on_created(now, size);
        self.sched
            .schedule(now + self.backhaul, EventKind::PacketArrival { packet: id });
        let src = self.sources[flow]
            .as_mut()
            .expect("generating flow has a source");
        if let Some((_, at)) = src.next_packet(&mut self.traffic) {
            self.sched
                .schedule(at, EventKind::PacketGenerate { flow: flow as u32 });
        }
    }

    fn arrival(&mut self, now: SimTime, packet: usize) {
        let p = self.pkts[packet];
        match &mut self.mac {
            Mac::Mmwave { mac, .. } => {
                let dropped = mac.enqueue(
                    p.flow as usize,
                    QueuedPacket {
                        id: packet,
                        size: p.size,
                    },
                );
                for d in dropped {
                    self.lose(d, 0);
                }
                self.wake_mmwave(now);
            }
            Mac::Dsrc { mac, .. } => {
                let entry = RsuEntry {
                    packet,
                    flow: p.flow as usize,
                    size: p.size,
                    enqueued: now,
                };
                let dropped = mac.enqueue(entry) == EnqueueResult::Dropped;
                let idle = mac.is_idle();
                if dropped {
                    self.lose(packet, 0);
                }
                if idle {
                    self.dsrc_start(now);
                }
            }
        }
    }

    /// Schedules the next subframe boundary at which some flow can send.
    fn wake_mmwave(&mut self, now: SimTime) {
        let Mac::Mmwave {
            mac,
            views,
            pending,
            free_at,
            ..
        } = &mut self.mac
        else {
            return;
        };
        let Some(ready) = mac.next_ready(views) else {
            return;
        };
        let tick = mac.config().subframe.duration().as_nanos();
        let earliest = ready.max(now).max(*free_at).as_nanos();
        let at = SimTime::from_nanos(earliest.div_ceil(tick) * tick);
        if at.as_nanos() + tick > self.horizon.as_nanos() {
            return;
        }
        if pending.is_none_or(|p| at < p) {
            *pending = Some(at);
            self.sched.schedule(at, EventKind::SubframeStart);
        }
    }

    fn subframe(&mut self, now: SimTime) {
        let Mac::Mmwave {
            mac,
            phy,
            views,
            pending,
            free_at,
        } = &mut self.mac
        else {
            unreachable!("subframe event without mmWave MAC");
        };
        if *pending != Some(now) {
            return; // superseded by an earlier wakeup
        }
        *pending = None;
        let mut out = std::mem::take(&mut self.mac_events);
        mac.run_subframe(now, views, phy, &mut self.fading, &mut out);
        *free_at = now + mac.config().subframe.duration();
        for ev in out.drain(..) {
            match ev {
                MacEvent::FirstTransmission { packet, at } => {
                    if let Some(r) = self.records.as_mut() {
                        r[packet].tx_first = Some(at);
                    }
                }
                MacEvent::Delivered {
                    packet,
                    at,
                    attempts,
                    sinr_db,
                } => self.deliver(packet, at, attempts, sinr_db),
                MacEvent::Dropped {
                    packet, attempts, ..
                } => self.lose(packet, attempts),
            }
        }
        self.mac_events = out;
        self.wake_mmwave(now);
    }

    fn dsrc_start(&mut self, now: SimTime) {
        let Mac::Dsrc { mac, .. } = &mut self.mac else {
            return;
        };
        let receive = receiver(self.cfg, &self.topo, self.ap, now, &mut self.fading);
        if let Some(end) = mac.start_next(now, receive) {
            let packet = mac.in_air().expect("just started").entry.packet;
            if let Some(r) = self.records.as_mut() {
                r[packet].tx_first = Some(now);
            }
            self.sched.schedule(end, EventKind::DsrcTxComplete);
        }
    }

    fn dsrc_complete(&mut self, now: SimTime) {
        let Mac::Dsrc { mac, noise_dbm } = &mut self.mac else {
            unreachable!("DSRC event without DSRC MAC");
        };
        let noise_dbm = *noise_dbm;
        let receive = receiver(self.cfg, &self.topo, self.ap, now, &mut self.fading);
        let (done, retry) = mac.finish(now, receive);
        let attempts = done.attempt + 1;
        if done.reception.delivered {
            self.deliver(
                done.entry.packet,
                now,
                attempts,
                done.reception.rx_power_dbm - noise_dbm,
            );
        } else if retry.is_none() {
            self.lose(done.entry.packet, attempts);
        }
        match retry {
            Some(end) => self.sched.schedule(end, EventKind::DsrcTxComplete),
            None => self.dsrc_start(now),
        }
    }

    fn deliver(&mut self, packet: usize, at: SimTime, attempts: u32, sinr_db: f64) {
        let p = self.pkts[packet];
        self.delivered_bits += u64::from(p.size) * 8;
        self.stats[p.flow as usize].on_delivered(p.created, at, p.size);
        if let Some(r) = self.records.as_mut() {
            let r = &mut r[packet];
            r.rx = Some(at);
            r.status = PacketStatus::Delivered;
            r.attempts = attempts;
            r.sinr_at_rx = Some(sinr_db);
        }
    }

    fn lose(&mut self, packet: usize, attempts: u32) {
        let p = self.pkts[packet];
        self.stats[p.flow as usize].on_lost(p.created);
        if let Some(r) = self.records.as_mut() {
            let r = &mut r[packet];
            r.status = PacketStatus::Lost;
            r.attempts = attempts;
        }
    }
}

/// Reception oracle for a DSRC transmission starting at `now`.
fn receiver<'a>(
    cfg: &'a ScenarioConfig,
    topo: &'a Topology,
    ap: Position,
    now: SimTime,
    fading: &'a mut RngStream,
) -> impl FnOnce(&RsuEntry) -> Reception + 'a {
    move |e: &RsuEntry| {
        let MacConfig::Dsrc(d) = &cfg.mac else {
            unreachable!()
        };
        let pos = topo.vehicles.vehicle_state(e.flow, now).position;
        attempt_delivery(
            cfg.radio.tx_power_dbm,
            cfg.radio.antenna_gain_db,
            ap.distance(&pos).max(channel::MIN_DISTANCE_M),
            cfg.radio.wavelength(),
            d,
            fading,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{recompute_from_records, verify_against};

    fn short(tech: Tech) -> ScenarioConfig {
        let mut c = ScenarioConfig::for_tech(tech);
        c.scenario.duration_s = 3.0;
        c.mobility.cv_count = 5;
        c
    }

    #[test]
    fn mmwave_accounting_matches_records() {
        let r = run(&short(Tech::Mmwave)).unwrap();
        let recs = r.records.as_ref().unwrap();
        let ids: Vec<_> = r.flows.iter().map(|f| (f.flow_id, f.dest_node)).collect();
        let again = recompute_from_records(recs, &ids, r.config.horizon(), r.config.warmup());
        verify_against(&r.flows, &again).unwrap();
        for f in &r.flows {
            assert_eq!(f.sent, f.delivered + f.lost + f.in_flight());
            assert!(f.sent > 0);
        }
    }

    #[test]
    fn dsrc_accounting_matches_records() {
        let r = run(&short(Tech::Dsrc)).unwrap();
        let recs = r.records.as_ref().unwrap();
        let ids: Vec<_> = r.flows.iter().map(|f| (f.flow_id, f.dest_node)).collect();
        let again = recompute_from_records(recs, &ids, r.config.horizon(), r.config.warmup());
        verify_against(&r.flows, &again).unwrap();
        assert!(r.delivered_bps() <= r.capacity_bps);
    }

    #[test]
    fn delivered_packets_respect_causality() {
        for tech in [Tech::Mmwave, Tech::Dsrc] {
            let r = run(&short(tech)).unwrap();
            for p in r.records.unwrap() {
                if p.status == PacketStatus::Delivered {
                    let tx = p.tx_first.unwrap();
                    assert!(p.created <= tx && tx <= p.rx.unwrap());
                    assert!(p.attempts >= 1);
                }
            }
        }
    }

    #[test]
    fn lightly_loaded_mmwave_delay_is_backhaul_plus_a_subframe_or_two() {
        let mut c = short(Tech::Mmwave);
        c.channel.blockage = crate::channel::BlockageModel::Disabled;
        c.mobility.corridor_length_m = 200.0;
        let r = run(&c).unwrap();
        for f in &r.flows {
            let d = f.mean_delay_ms().unwrap();
            assert!((1.1..1.5).contains(&d), "delay {d}");
        }
    }

    #[test]
    fn sinr_sampled_per_vehicle_per_epoch() {
        let r = run(&short(Tech::Mmwave)).unwrap();
        // epochs at 0, 0.1, ..., 3.0 s
        assert_eq!(r.sinr.len(), 5 * 31);
    }
}
