use corridor_sim::engine::SimTime;
use corridor_sim::metrics::{recompute_from_records, verify_against, FlowStats};
use corridor_sim::traffic::{PacketRecord, PacketStatus};
use proptest::prelude::*;

const HORIZON_NS: u64 = 10_000_000_000;

fn record() -> impl Strategy<Value = PacketRecord> {
    (
        0u32..4,
        1u32..1500,
        0u64..HORIZON_NS,
        0u8..3,
        0u64..500_000_000,
        1u32..5,
    )
        .prop_map(|(flow, size, created, status, delay, attempts)| {
            let mut r = PacketRecord::new(flow, 0, size, SimTime::from_nanos(created));
            let rx = created + delay;
            match status {
                0 if rx <= HORIZON_NS => {
                    r.status = PacketStatus::Delivered;
                    r.tx_first = Some(SimTime::from_nanos(created));
                    r.rx = Some(SimTime::from_nanos(rx));
                    r.attempts = attempts;
                    r.sinr_at_rx = Some(1.0);
                }
                1 => r.status = PacketStatus::Lost,
                _ => {}
            }
            r
        })
}

fn stream(records: &[PacketRecord], horizon: SimTime, warmup: SimTime) -> Vec<FlowStats> {
    let mut s: Vec<FlowStats> = (0..4)
        .map(|f| FlowStats::new(f, 100 + f, horizon, warmup))
        .collect();
    for r in records {
        let f = &mut s[r.flow_id as usize];
        f.on_created(r.created, r.size);
        match r.status {
            PacketStatus::Delivered => f.on_delivered(r.created, r.rx.unwrap(), r.size),
            PacketStatus::Lost => f.on_lost(r.created),
            PacketStatus::InFlight => {}
        }
    }
    s
}

proptest! {
    #[test]
    fn streaming_equals_recomputation(records in prop::collection::vec(record(), 0..300), warm in 0u64..5) {
        let horizon = SimTime::from_nanos(HORIZON_NS);
        let warmup = SimTime::from_secs(warm);
        let ids: Vec<(u32, u32)> = (0..4).map(|f| (f, 100 + f)).collect();
        let s = stream(&records, horizon, warmup);
        let r = recompute_from_records(&records, &ids, horizon, warmup);
        prop_assert_eq!(verify_against(&s, &r), Ok(()));
        for f in &s {
            prop_assert_eq!(f.sent, f.delivered + f.lost + f.in_flight());
            prop_assert!(f.throughput_kbps() <= f.tx_bitrate_kbps() + 1e-9);
            let sent_bytes = f.bytes_transmitted as f64;
            if sent_bytes > 0.0 {
                let ratio = f.bytes_received as f64 / sent_bytes;
                prop_assert!((f.throughput_kbps() - f.tx_bitrate_kbps() * ratio).abs() < 1e-6);
            }
            prop_assert_eq!(f.packet_loss_ratio().is_none(), f.sent == 0);
            prop_assert_eq!(f.mean_delay_ms().is_none(), f.delivered == 0);
        }
    }

    #[test]
    fn a_dropped_record_is_caught(records in prop::collection::vec(record(), 1..100)) {
        let horizon = SimTime::from_nanos(HORIZON_NS);
        let ids: Vec<(u32, u32)> = (0..4).map(|f| (f, 100 + f)).collect();
        let s = stream(&records, horizon, SimTime::ZERO);
        let r = recompute_from_records(&records[1..], &ids, horizon, SimTime::ZERO);
        let err = verify_against(&s, &r).unwrap_err();
        prop_assert_eq!(err.flow_id, records[0].flow_id);
    }
}
