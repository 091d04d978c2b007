use corridor_sim::engine::{RngStreams, SimTime};
use corridor_sim::mobility::{parse_ns2_trace, CorridorMobility, CorridorParams};
use proptest::prelude::*;

fn params(cv: u32, max_speed: f64, warm: bool, bidi: bool) -> CorridorParams {
    CorridorParams {
        warm_start: warm,
        bidirectional: bidi,
        ..CorridorParams::new(cv, max_speed)
    }
}

proptest! {
    #[test]
    fn synthetic_vehicles_stay_on_the_road(
        cv in 1u32..60,
        max_speed in 1.0f64..40.0,
        seed in any::<u64>(),
        warm in any::<bool>(),
        bidi in any::<bool>(),
    ) {
        let p = params(cv, max_speed, warm, bidi);
        let g = p.geometry;
        let m = CorridorMobility::generate(p, RngStreams::new(seed).stream("mobility"));
        for v in m.vehicles() {
            prop_assert!(v.speed <= max_speed && v.speed >= 0.7 * max_speed - 1e-12);
        }
        for t in [0u64, 1, 7, 33, 100] {
            for i in 0..m.vehicle_count() {
                let s = m.state_at(i, SimTime::from_secs(t));
                prop_assert!((0.0..=g.length).contains(&s.position.x));
                prop_assert!((0.0..=g.width()).contains(&s.position.y));
            }
        }
    }

    #[test]
    fn synthetic_motion_is_continuous_apart_from_wrap(seed in any::<u64>(), max_speed in 5.0f64..30.0) {
        let p = params(10, max_speed, true, true);
        let length = p.geometry.length;
        let m = CorridorMobility::generate(p, RngStreams::new(seed).stream("mobility"));
        let dt = 0.1;
        for i in 0..m.vehicle_count() {
            let mut prev = m.state_at(i, SimTime::ZERO).position;
            for k in 1..1000u64 {
                let cur = m.state_at(i, SimTime::from_millis(100 * k)).position;
                let step = (cur.x - prev.x).abs();
                // Either one step of motion or the re-entry jump across the corridor.
                prop_assert!(step <= max_speed * dt + 1e-6 || (step - length).abs() <= max_speed * dt + 1e-6);
                prop_assert_eq!(cur.y, prev.y);
                prev = cur;
            }
        }
    }

    #[test]
    fn trace_reaches_every_destination(
        start in (0.0f64..500.0, 0.0f64..500.0),
        legs in prop::collection::vec((0.0f64..500.0, 0.0f64..500.0, 1.0f64..30.0), 1..6),
    ) {
        // Each leg starts after the previous one has arrived.
        let mut text = format!("$node_(0) set X_ {}\n$node_(0) set Y_ {}\n", start.0, start.1);
        let mut t = 0.0;
        let mut here = start;
        let mut arrivals = Vec::new();
        for (x, y, v) in &legs {
            t += 1.0;
            text.push_str(&format!("$ns_ at {t} \"$node_(0) setdest {x} {y} {v}\"\n"));
            let d = ((x - here.0).powi(2) + (y - here.1).powi(2)).sqrt();
            t += d / v;
            arrivals.push((t, *x, *y));
            here = (*x, *y);
        }
        let tr = parse_ns2_trace(&text).unwrap();
        for (at, x, y) in arrivals {
            let (p, _) = tr.position_at(0, SimTime::from_secs_f64(at + 0.5));
            prop_assert!((p.x - x).abs() < 1e-3 && (p.y - y).abs() < 1e-3, "{:?} vs ({}, {})", p, x, y);
        }
        let w = tr.waypoints(0);
        prop_assert!(w.windows(2).all(|w| w[0].time <= w[1].time));
    }

    #[test]
    fn trace_positions_are_continuous(
        legs in prop::collection::vec((0.0f64..300.0, 0.0f64..300.0, 1.0f64..40.0, 0.2f64..20.0), 1..6),
    ) {
        let mut text = "$node_(4) set X_ 0\n$node_(4) set Y_ 0\n".to_string();
        let mut t = 0.0;
        for (x, y, v, gap) in &legs {
            t += gap;
            text.push_str(&format!("$ns_ at {t} \"$node_(4) setdest {x} {y} {v}\"\n"));
        }
        let tr = parse_ns2_trace(&text).unwrap();
        let vmax = legs.iter().map(|l| l.2).fold(0.0, f64::max);
        let mut prev = tr.position_at(0, SimTime::ZERO).0;
        for k in 1..2000u64 {
            let cur = tr.position_at(0, SimTime::from_millis(50 * k)).0;
            prop_assert!(prev.distance(&cur) <= vmax * 0.05 + 1e-6);
            prev = cur;
        }
    }
}
