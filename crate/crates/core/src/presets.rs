//! Named scenarios for the corridor experiment matrix.
//!
//! Baseline: 20 CVs, 45 mph, 1024 B packets at 250 Kbps per CV, mmWave.
//! Each family varies one or two of those.

use crate::channel::Tech;
use crate::config::{ScenarioConfig, Speed};
use crate::error::ConfigError;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    tech: Tech,
    cv_count: u32,
    mph: f64,
    packet_size: u32,
    offered_rate_bps: f64,
}

const fn p(
    name: &'static str,
    summary: &'static str,
    tech: Tech,
    cv_count: u32,
    mph: f64,
    packet_size: u32,
    offered_rate_bps: f64,
) -> Preset {
    Preset {
        name,
        summary,
        tech,
        cv_count,
        mph,
        packet_size,
        offered_rate_bps,
    }
}

use Tech::{Dsrc, Mmwave};

#[rustfmt::skip]
pub const PRESETS: &[Preset] = &[
    p("fig5-mmwave-35mph", "speed sweep, mmWave, 35 mph", Mmwave, 20, 35.0, 1024, 250e3),
    p("fig5-mmwave-45mph", "speed sweep, mmWave, 45 mph", Mmwave, 20, 45.0, 1024, 250e3),
    p("fig5-mmwave-55mph", "speed sweep, mmWave, 55 mph", Mmwave, 20, 55.0, 1024, 250e3),
    p("fig5-dsrc-35mph", "speed sweep, DSRC, 35 mph", Dsrc, 20, 35.0, 1024, 250e3),
    p("fig5-dsrc-45mph", "speed sweep, DSRC, 45 mph", Dsrc, 20, 45.0, 1024, 250e3),
    p("fig5-dsrc-55mph", "speed sweep, DSRC, 55 mph", Dsrc, 20, 55.0, 1024, 250e3),
    p("fig6-20cv-35mph", "penetration, 20 CVs at 35 mph", Mmwave, 20, 35.0, 1024, 250e3),
    p("fig6-40cv-35mph", "penetration, 40 CVs at 35 mph", Mmwave, 40, 35.0, 1024, 250e3),
    p("fig6-20cv-55mph", "penetration, 20 CVs at 55 mph", Mmwave, 20, 55.0, 1024, 250e3),
    p("fig6-40cv-55mph", "penetration, 40 CVs at 55 mph", Mmwave, 40, 55.0, 1024, 250e3),
    p("fig7-250kbps", "data rate, 250 Kbps per CV", Mmwave, 20, 45.0, 1024, 250e3),
    p("fig7-10mbps", "data rate, 10 Mbps per CV", Mmwave, 20, 45.0, 1024, 10e6),
    p("fig8-1024b", "packet size, 1024 B", Mmwave, 20, 45.0, 1024, 250e3),
    p("fig8-256b", "packet size, 256 B", Mmwave, 20, 45.0, 256, 250e3),
];

impl Preset {
    pub fn config(&self) -> ScenarioConfig {
        let mut c = ScenarioConfig::for_tech(self.tech);
        c.scenario.name = self.name.to_string();
        c.mobility.cv_count = self.cv_count;
        c.mobility.max_speed = Speed::mph(self.mph);
        c.traffic.packet_size = self.packet_size;
        c.traffic.offered_rate_bps = self.offered_rate_bps;
        c
    }
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(Preset::config)
        .ok_or_else(|| ConfigError::UnknownPreset {
            name: name.to_string(),
            available: names().into_iter().map(String::from).collect(),
        })
}
