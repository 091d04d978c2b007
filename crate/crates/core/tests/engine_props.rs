use corridor_sim::engine::{RngStreams, Scheduler, SimTime};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #[test]
    fn dispatch_is_ordered_by_time_then_insertion(times in prop::collection::vec(0u64..1_000, 1..200)) {
        let mut s = Scheduler::new();
        for (i, t) in times.iter().enumerate() {
            s.schedule(SimTime::from_nanos(*t), i);
        }
        let mut seen = Vec::new();
        let mut clock = SimTime::ZERO;
        s.run_until(SimTime::from_nanos(1_000), |s, ev| {
            assert!(s.now() >= clock, "clock went backwards");
            assert_eq!(s.now(), ev.fire_time);
            clock = s.now();
            seen.push((ev.fire_time, ev.sequence, ev.kind));
        });
        prop_assert_eq!(seen.len(), times.len());
        prop_assert!(seen.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
        let mut expect: Vec<(u64, usize)> = times.iter().enumerate().map(|(i, t)| (*t, i)).collect();
        expect.sort();
        let got: Vec<(u64, usize)> = seen.iter().map(|e| (e.0.as_nanos(), e.2)).collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn events_after_end_stay_queued(times in prop::collection::vec(0u64..100, 0..50), end in 0u64..100) {
        let mut s = Scheduler::new();
        for t in &times {
            s.schedule(SimTime::from_nanos(*t), ());
        }
        let mut n = 0;
        s.run_until(SimTime::from_nanos(end), |_, _| n += 1);
        prop_assert_eq!(n, times.iter().filter(|t| **t <= end).count());
        prop_assert_eq!(s.pending(), times.len() - n);
        prop_assert_eq!(s.now(), SimTime::from_nanos(end));
    }

    #[test]
    fn same_seed_same_draws(seed in any::<u64>(), name in "[a-z]{1,12}") {
        let mut a = RngStreams::new(seed);
        let mut b = RngStreams::new(seed);
        let x: Vec<u64> = (0..16).map(|_| a.stream(&name).random()).collect();
        let y: Vec<u64> = (0..16).map(|_| b.stream(&name).random()).collect();
        prop_assert_eq!(x, y);
    }
}
