//! Synthetic straight multi-lane corridor.
//!
//! Vehicles enter at exponentially distributed inter-arrival times, keep a
//! constant speed and lane, and wrap back to the entry when they reach the
//! end, so the active population stays at `cv_count` once everyone has
//! entered.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{NodeState, Position};
use crate::engine::{RngStream, SimTime};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorridorGeometry {
    pub length: f64,
    pub lane_count: u32,
    pub lane_width: f64,
}

impl Default for CorridorGeometry {
    fn default() -> Self {
        CorridorGeometry {
            length: 2000.0,
            lane_count: 4,
            lane_width: 3.5,
        }
    }
}

impl CorridorGeometry {
    pub fn lane_center(&self, lane: u32) -> f64 {
        (f64::from(lane) + 0.5) * self.lane_width
    }

    pub fn width(&self) -> f64 {
        f64::from(self.lane_count) * self.lane_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorridorParams {
    pub cv_count: u32,
    /// m/s
    pub max_speed: f64,
    pub geometry: CorridorGeometry,
    /// Vehicles per second entering the corridor. `None` picks the rate at
    /// which `cv_count` vehicles at mean speed would fill the corridor.
    pub arrival_rate: Option<f64>,
    /// Lower bound of the speed draw as a fraction of `max_speed`.
    pub min_speed_factor: f64,
    /// Place arrivals before t=0 so the corridor is populated from the start.
    pub warm_start: bool,
    /// Upper half of the lanes carries traffic in the opposite direction.
    pub bidirectional: bool,
}

impl CorridorParams {
    pub fn new(cv_count: u32, max_speed: f64) -> Self {
        CorridorParams {
            cv_count,
            max_speed,
            geometry: CorridorGeometry::default(),
            arrival_rate: None,
            min_speed_factor: 0.7,
            warm_start: true,
            bidirectional: true,
        }
    }

    pub fn effective_arrival_rate(&self) -> f64 {
        self.arrival_rate.unwrap_or_else(|| {
            let mean_speed = self.max_speed * (1.0 + self.min_speed_factor) / 2.0;
            f64::from(self.cv_count) * mean_speed / self.geometry.length
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticVehicle {
    /// Seconds; negative under warm start.
    pub entry: f64,
    pub speed: f64,
    pub lane: u32,
    /// +1 travels toward increasing x, -1 toward decreasing x.
    pub heading: f64,
}

#[derive(Debug, Clone)]
pub struct CorridorMobility {
    params: CorridorParams,
    vehicles: Vec<SyntheticVehicle>,
}

impl CorridorMobility {
    /// Draws arrival times, speeds and lanes from `rng` in vehicle order.
    pub fn generate(params: CorridorParams, rng: &mut RngStream) -> Self {
        assert!(params.cv_count > 0, "cv_count must be positive");
        assert!(params.max_speed > 0.0, "max_speed must be positive");
        assert!(
            params.geometry.length > 0.0,
            "corridor length must be positive"
        );
        assert!(params.geometry.lane_count > 0, "need at least one lane");

        let rate = params.effective_arrival_rate();
        let exp = (rate.is_finite() && rate > 0.0).then(|| Exp::new(rate).expect("positive rate"));
        let lo = params.min_speed_factor.clamp(0.0, 1.0) * params.max_speed;
        let hi = params.max_speed;

        let mut clock = 0.0;
        let mut vehicles = Vec::with_capacity(params.cv_count as usize);
        for _ in 0..params.cv_count {
            if let Some(exp) = &exp {
                clock += exp.sample(rng);
            }
            let speed = if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                hi
            };
            let lane = rng.random_range(0..params.geometry.lane_count);
            let heading = if params.bidirectional
                && params.geometry.lane_count > 1
                && lane >= params.geometry.lane_count / 2
            {
                -1.0
            } else {
                1.0
            };
            vehicles.push(SyntheticVehicle {
                entry: clock,
                speed,
                lane,
                heading,
            });
        }
        if params.warm_start {
            // Shift so the latest arrival enters at t=0.
            let last = vehicles.last().map_or(0.0, |v| v.entry);
            for v in &mut vehicles {
                v.entry -= last;
            }
        }
        CorridorMobility { params, vehicles }
    }

    pub fn params(&self) -> &CorridorParams {
        &self.params
    }

    pub fn vehicles(&self) -> &[SyntheticVehicle] {
        &self.vehicles
    }

    pub fn vehicle_count(&self) -> usize {
        self.vehicles.len()
    }

    pub fn entry_time(&self, index: usize) -> SimTime {
        SimTime::from_secs_f64(self.vehicles[index].entry.max(0.0))
    }

    pub fn state_at(&self, index: usize, t: SimTime) -> NodeState {
        let v = &self.vehicles[index];
        let g = &self.params.geometry;
        let y = g.lane_center(v.lane);
        let along = |s: f64| if v.heading > 0.0 { s } else { g.length - s };
        let elapsed = t.as_secs_f64() - v.entry;
        if elapsed < 0.0 {
            return NodeState {
                position: Position::new(along(0.0), y),
                speed: 0.0,
                active: false,
            };
        }
        let s = (v.speed * elapsed).rem_euclid(g.length);
        NodeState {
            position: Position::new(along(s), y),
            speed: v.speed,
            active: true,
        }
    }

    pub fn active_count(&self, t: SimTime) -> usize {
        let secs = t.as_secs_f64();
        self.vehicles.iter().filter(|v| v.entry <= secs).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RngStreams;
    use crate::mobility::mph_to_mps;

    fn gen(params: CorridorParams, seed: u64) -> CorridorMobility {
        CorridorMobility::generate(params, RngStreams::new(seed).stream("mobility"))
    }

    #[test]
    fn twenty_vehicles_active_at_35_mph() {
        let c = gen(CorridorParams::new(20, mph_to_mps(35.0)), 1);
        assert_eq!(c.vehicle_count(), 20);
        for s in [0, 10, 50, 99] {
            assert_eq!(c.active_count(SimTime::from_secs(s)), 20);
        }
    }

    #[test]
    fn infinite_arrival_puts_everyone_at_entry_at_zero() {
        let mut p = CorridorParams::new(10, 20.0);
        p.arrival_rate = Some(f64::INFINITY);
        p.warm_start = false;
        let c = gen(p, 3);
        for i in 0..10 {
            let s = c.state_at(i, SimTime::ZERO);
            assert!(s.active);
        }
        assert_eq!(c.active_count(SimTime::ZERO), 10);
    }

    #[test]
    fn same_seed_same_trajectories() {
        let p = CorridorParams::new(15, 25.0);
        let a = gen(p.clone(), 77);
        let b = gen(p, 77);
        assert_eq!(a.vehicles(), b.vehicles());
        let c = gen(CorridorParams::new(15, 25.0), 78);
        assert_ne!(a.vehicles(), c.vehicles());
    }

    #[test]
    fn speeds_and_positions_respect_bounds() {
        let p = CorridorParams::new(40, mph_to_mps(55.0));
        let c = gen(p.clone(), 5);
        for v in c.vehicles() {
            assert!(v.speed <= p.max_speed && v.speed >= 0.7 * p.max_speed);
        }
        for step in 0..1000 {
            let t = SimTime::from_millis(step * 100);
            for i in 0..c.vehicle_count() {
                let s = c.state_at(i, t);
                assert!(s.position.x >= 0.0 && s.position.x <= p.geometry.length);
                assert!(s.position.y >= 0.0 && s.position.y <= p.geometry.width());
            }
        }
    }

    #[test]
    fn cold_start_population_converges_to_cv_count() {
        let mut p = CorridorParams::new(20, 20.0);
        p.warm_start = false;
        p.arrival_rate = Some(2.0);
        let c = gen(p, 11);
        let last_entry = c.vehicles().iter().map(|v| v.entry).fold(0.0, f64::max);
        assert!(last_entry < 100.0);
        let start = (last_entry.ceil() * 10.0) as u64;
        let samples: Vec<usize> = (start..1000)
            .map(|k| c.active_count(SimTime::from_millis(k * 100)))
            .collect();
        let mean = samples.iter().sum::<usize>() as f64 / samples.len() as f64;
        assert!((mean - 20.0).abs() / 20.0 < 0.05);
    }

    #[test]
    fn motion_is_continuous_apart_from_wrap() {
        let c = gen(CorridorParams::new(10, 30.0), 9);
        let dt = 0.01;
        for i in 0..c.vehicle_count() {
            let mut prev = c.state_at(i, SimTime::ZERO).position;
            for k in 1..10_000u64 {
                let p = c.state_at(i, SimTime::from_millis(k * 10)).position;
                let jump = p.distance(&prev);
                let wrapped = (jump - 2000.0).abs() < 1.0;
                assert!(jump <= 30.0 * dt + 1e-6 || wrapped, "jump {jump}");
                prev = p;
            }
        }
    }

    #[test]
    fn opposite_lanes_travel_backwards() {
        let mut p = CorridorParams::new(30, 20.0);
        p.bidirectional = true;
        let c = gen(p, 2);
        for (i, v) in c.vehicles().iter().enumerate() {
            let a = c.state_at(i, SimTime::from_secs(1)).position.x;
            let b = c.state_at(i, SimTime::from_millis(1100)).position.x;
            if (b - a).abs() < 100.0 {
                assert_eq!((b - a).signum(), v.heading);
            }
        }
    }
}
