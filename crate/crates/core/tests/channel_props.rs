use corridor_sim::channel::{
    compute_sinr, friis_path_loss, is_blocked, leakage_interference_mw, mmwave_path_loss,
    nakagami_fading_draw, wavelength, PathLossParams,
};
use corridor_sim::engine::RngStreams;
use corridor_sim::mobility::Position;
use proptest::prelude::*;

proptest! {
    #[test]
    fn nlos_never_beats_los(d in 1.0f64..5_000.0) {
        let p = PathLossParams::default();
        prop_assert!(mmwave_path_loss(d, false, &p, 0.0) >= mmwave_path_loss(d, true, &p, 0.0));
    }

    #[test]
    fn path_loss_grows_with_distance(d in 0.0f64..5_000.0, extra in 0.0f64..1_000.0, los in any::<bool>(), shadow in -20.0f64..20.0) {
        let p = PathLossParams::default();
        prop_assert!(mmwave_path_loss(d + extra, los, &p, shadow) >= mmwave_path_loss(d, los, &p, shadow));
    }

    #[test]
    fn friis_grows_with_distance_and_frequency(d in 0.1f64..1e4, f in 1e9f64..1e11, k in 1.0f64..10.0) {
        let l = wavelength(f);
        prop_assert!(friis_path_loss(d * k, l) >= friis_path_loss(d, l));
        prop_assert!(friis_path_loss(d, wavelength(f * k)) >= friis_path_loss(d, l));
    }

    #[test]
    fn sinr_monotone(m in 1e-12f64..1.0, i in 0.0f64..1e-3, o in 1e-12f64..1e-3, k in 1.001f64..10.0) {
        let base = compute_sinr(m, i, o);
        prop_assert!(compute_sinr(m * k, i, o) > base);
        prop_assert!(compute_sinr(m, i * k + 1e-15, o) < base);
        prop_assert!(compute_sinr(m, i, o * k) < base);
    }

    #[test]
    fn more_co_scheduled_beams_never_reduce_interference(
        powers in prop::collection::vec(0.0f64..1e-3, 0..30),
        extra in prop::collection::vec(0.0f64..1e-3, 0..10),
        leak in 0.0f64..1.0,
    ) {
        let few = leakage_interference_mw(leak, powers.iter().copied());
        let many = leakage_interference_mw(leak, powers.iter().chain(&extra).copied());
        prop_assert!(many >= few);
    }

    #[test]
    fn nakagami_draws_are_positive(m in 0.5f64..20.0, seed in any::<u64>()) {
        let mut rng = RngStreams::new(seed).detached("fading");
        for _ in 0..200 {
            prop_assert!(nakagami_fading_draw(m, &mut rng) > 0.0);
        }
    }

    #[test]
    fn blockage_is_symmetric(
        a in (0.0f64..100.0, -20.0f64..20.0),
        b in (0.0f64..100.0, -20.0f64..20.0),
        blockers in prop::collection::vec((0.0f64..100.0, -20.0f64..20.0), 0..10),
        w in 0.0f64..4.0,
    ) {
        let a = Position::new(a.0, a.1);
        let b = Position::new(b.0, b.1);
        let bl: Vec<Position> = blockers.iter().map(|p| Position::new(p.0, p.1)).collect();
        prop_assert_eq!(is_blocked(a, b, &bl, w), is_blocked(b, a, &bl, w));
        // Removing blockers can only unblock.
        if !is_blocked(a, b, &bl, w) && !bl.is_empty() {
            prop_assert!(!is_blocked(a, b, &bl[1..], w));
        }
    }
}
