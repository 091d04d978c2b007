//! Scenario configuration: a TOML file where every key has a default and
//! unknown keys are rejected.
//!
//! ```toml
//! [scenario]
//! name = "corridor"
//! seed = 42
//! duration_s = 100.0
//!
//! [radio]
//! tech = "mmwave"          # or "dsrc"; other radio keys default per tech
//!
//! [mobility]
//! cv_count = 20
//! max_speed = "45 mph"     # or "20.1 m/s"
//!
//! [traffic]
//! packet_size = 1024
//! offered_rate_bps = 250000
//!
//! [mmwave]                 # only with tech = "mmwave"; [dsrc] only with "dsrc"
//! harq_max_retransmissions = 3
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{BlockageModel, PathLossParams, RadioProfile, Tech};
use crate::engine::{fnv1a64, SimTime};
use crate::error::ConfigError;
use crate::mac::{DsrcConfig, MmwaveConfig};
use crate::mobility::{CorridorGeometry, CorridorParams, Position, MPH_TO_MPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedUnit {
    Mph,
    #[serde(rename = "m/s")]
    Mps,
}

/// A speed stored in m/s that remembers how it was written.
#[derive(Debug, Clone, Copy)]
pub struct Speed {
    mps: f64,
    written: f64,
    unit: SpeedUnit,
}

impl PartialEq for Speed {
    fn eq(&self, other: &Self) -> bool {
        self.mps == other.mps
    }
}

impl Speed {
    pub fn mph(v: f64) -> Self {
        Speed {
            mps: v * MPH_TO_MPS,
            written: v,
            unit: SpeedUnit::Mph,
        }
    }

    pub fn mps(v: f64) -> Self {
        Speed {
            mps: v,
            written: v,
            unit: SpeedUnit::Mps,
        }
    }

    pub fn as_mps(&self) -> f64 {
        self.mps
    }
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.unit {
            SpeedUnit::Mph => write!(f, "{} mph", self.written),
            SpeedUnit::Mps => write!(f, "{} m/s", self.written),
        }
    }
}

impl FromStr for Speed {
    type Err = String;

    /// Requires an explicit `mph` or `m/s` suffix.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (num, unit) = if let Some(n) = s.strip_suffix("mph") {
            (n, SpeedUnit::Mph)
        } else if let Some(n) = s.strip_suffix("m/s") {
            (n, SpeedUnit::Mps)
        } else {
            return Err(format!("speed `{s}` needs a unit suffix (mph or m/s)"));
        };
        let v: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("speed `{s}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("speed `{s}` is not finite"));
        }
        Ok(match unit {
            SpeedUnit::Mph => Speed::mph(v),
            SpeedUnit::Mps => Speed::mps(v),
        })
    }
}

impl Serialize for Speed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Speed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub name: String,
    pub seed: u64,
    pub duration_s: f64,
    /// Packets created before this time are excluded from the metrics.
    pub warmup_s: f64,
    pub channel_update_ms: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            name: "scenario".into(),
            seed: 1,
            duration_s: 100.0,
            warmup_s: 0.0,
            channel_update_ms: 100.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RadioSection {
    tech: Option<Tech>,
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_figure_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beam_gain_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    leakage_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    antenna_gain_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    /// Per-packet small-scale fading on mmWave links.
    pub small_scale_fading: bool,
    /// Nakagami shape of the mmWave small-scale fading.
    pub small_scale_m: f64,
    pub path_loss: PathLossParams,
    pub blockage: BlockageModel,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            small_scale_fading: true,
            small_scale_m: 1.0,
            path_loss: PathLossParams::default(),
            blockage: BlockageModel::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MobilitySource {
    Synthetic,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    pub source: MobilitySource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<PathBuf>,
    pub cv_count: u32,
    pub max_speed: Speed,
    pub corridor_length_m: f64,
    pub lane_count: u32,
    pub lane_width_m: f64,
    /// Vehicles per second; derived from cv_count and speed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arrival_rate: Option<f64>,
    pub min_speed_factor: f64,
    pub warm_start: bool,
    pub bidirectional: bool,
    /// Along-road position of the base station or RSU; mid-corridor when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub access_point_x_m: Option<f64>,
    /// Distance from the road edge to the base station or RSU.
    pub access_point_offset_m: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        let g = CorridorGeometry::default();
        MobilityConfig {
            source: MobilitySource::Synthetic,
            trace_path: None,
            cv_count: 20,
            max_speed: Speed::mph(45.0),
            corridor_length_m: g.length,
            lane_count: g.lane_count,
            lane_width_m: g.lane_width,
            arrival_rate: None,
            min_speed_factor: 0.7,
            warm_start: true,
            bidirectional: true,
            access_point_x_m: None,
            access_point_offset_m: 10.0,
        }
    }
}

impl MobilityConfig {
    pub fn geometry(&self) -> CorridorGeometry {
        CorridorGeometry {
            length: self.corridor_length_m,
            lane_count: self.lane_count,
            lane_width: self.lane_width_m,
        }
    }

    pub fn corridor_params(&self) -> CorridorParams {
        CorridorParams {
            cv_count: self.cv_count,
            max_speed: self.max_speed.as_mps(),
            geometry: self.geometry(),
            arrival_rate: self.arrival_rate,
            min_speed_factor: self.min_speed_factor,
            warm_start: self.warm_start,
            bidirectional: self.bidirectional,
        }
    }

    pub fn access_point(&self) -> Position {
        Position::new(
            self.access_point_x_m
                .unwrap_or(self.corridor_length_m / 2.0),
            -self.access_point_offset_m,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub packet_size: u32,
    pub offered_rate_bps: f64,
    /// Flow `k` starts `k * stagger_ms` after its vehicle enters.
    pub stagger_ms: f64,
    /// Remote host to base station one-way latency.
    pub backhaul_latency_ms: f64,
    /// Uniform jitter as a fraction of the packet interval; 0 is strict CBR.
    pub jitter_fraction: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            packet_size: 1024,
            offered_rate_bps: 250_000.0,
            stagger_ms: 1.0,
            backhaul_latency_ms: 1.0,
            jitter_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Keep per-packet records (packets.csv).
    pub write_packets: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            out_dir: None,
            write_packets: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MacConfig {
    Mmwave(MmwaveConfig),
    Dsrc(DsrcConfig),
}

impl MacConfig {
    pub fn default_for(tech: Tech) -> Self {
        match tech {
            Tech::Mmwave => MacConfig::Mmwave(MmwaveConfig::default()),
            Tech::Dsrc => MacConfig::Dsrc(DsrcConfig::default()),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    scenario: ScenarioSection,
    #[serde(default)]
    radio: RadioSection,
    #[serde(default)]
    channel: ChannelConfig,
    #[serde(default)]
    mobility: MobilityConfig,
    #[serde(default)]
    traffic: TrafficConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    mmwave: Option<MmwaveConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dsrc: Option<DsrcConfig>,
    #[serde(default)]
    output: OutputConfig,
}

/// Complete, validated description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub radio: RadioProfile,
    pub channel: ChannelConfig,
    pub mobility: MobilityConfig,
    pub traffic: TrafficConfig,
    pub mac: MacConfig,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::for_tech(Tech::Mmwave)
    }
}

/// Parameters a sweep may vary.
pub const SWEEP_AXES: [&str; 5] = [
    "cv_count",
    "max_speed",
    "offered_rate",
    "packet_size",
    "radio.tech",
];

impl ScenarioConfig {
    pub fn for_tech(tech: Tech) -> Self {
        ScenarioConfig {
            scenario: ScenarioSection::default(),
            radio: RadioProfile::default_for(tech),
            channel: ChannelConfig::default(),
            mobility: MobilityConfig::default(),
            traffic: TrafficConfig::default(),
            mac: MacConfig::default_for(tech),
            output: OutputConfig::default(),
        }
    }

    pub fn tech(&self) -> Tech {
        self.radio.tech
    }

    pub fn horizon(&self) -> SimTime {
        SimTime::from_secs_f64(self.scenario.duration_s)
    }

    pub fn warmup(&self) -> SimTime {
        SimTime::from_secs_f64(self.scenario.warmup_s)
    }

    pub fn channel_update_period(&self) -> SimTime {
        SimTime::from_secs_f64(self.scenario.channel_update_ms * 1e-3)
    }

    /// Parses and validates TOML text. Relative trace paths resolve against
    /// `base_dir`.
    pub fn from_toml(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let tech = file.radio.tech.unwrap_or(Tech::Mmwave);
        let mac = match (tech, file.mmwave, file.dsrc) {
            (Tech::Mmwave, _, Some(_)) => {
                return Err(ConfigError::Conflict {
                    first: "radio.tech".into(),
                    second: "dsrc".into(),
                    message: "a [dsrc] MAC section requires radio.tech = \"dsrc\"".into(),
                })
            }
            (Tech::Dsrc, Some(_), _) => {
                return Err(ConfigError::Conflict {
                    first: "radio.tech".into(),
                    second: "mmwave".into(),
                    message: "a [mmwave] MAC section requires radio.tech = \"mmwave\"".into(),
                })
            }
            (Tech::Mmwave, m, None) => MacConfig::Mmwave(m.unwrap_or_default()),
            (Tech::Dsrc, None, d) => MacConfig::Dsrc(d.unwrap_or_default()),
        };
        let r = file.radio;
        let base = RadioProfile::default_for(tech);
        let radio = RadioProfile {
            tech,
            carrier_hz: r.carrier_hz.unwrap_or(base.carrier_hz),
            bandwidth_hz: r.bandwidth_hz.unwrap_or(base.bandwidth_hz),
            tx_power_dbm: r.tx_power_dbm.unwrap_or(base.tx_power_dbm),
            noise_figure_db: r.noise_figure_db.unwrap_or(base.noise_figure_db),
            beam_gain_db: r.beam_gain_db.unwrap_or(base.beam_gain_db),
            leakage_factor: r.leakage_factor.unwrap_or(base.leakage_factor),
            antenna_gain_db: r.antenna_gain_db.unwrap_or(base.antenna_gain_db),
        };
        let mut mobility = file.mobility;
        if let (Some(dir), Some(p)) = (base_dir, mobility.trace_path.as_mut()) {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        let cfg = ScenarioConfig {
            scenario: file.scenario,
            radio,
            channel: file.channel,
            mobility,
            traffic: file.traffic,
            mac,
            output: file.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text, path.parent())
    }

    /// Fully expanded TOML; parsing it yields an equal config.
    pub fn to_toml(&self) -> String {
        let r = &self.radio;
        let file = ConfigFile {
            scenario: self.scenario.clone(),
            radio: RadioSection {
                tech: Some(r.tech),
                carrier_hz: Some(r.carrier_hz),
                bandwidth_hz: Some(r.bandwidth_hz),
                tx_power_dbm: Some(r.tx_power_dbm),
                noise_figure_db: Some(r.noise_figure_db),
                beam_gain_db: Some(r.beam_gain_db),
                leakage_factor: Some(r.leakage_factor),
                antenna_gain_db: Some(r.antenna_gain_db),
            },
            channel: self.channel.clone(),
            mobility: self.mobility.clone(),
            traffic: self.traffic.clone(),
            mmwave: match &self.mac {
                MacConfig::Mmwave(m) => Some(m.clone()),
                MacConfig::Dsrc(_) => None,
            },
            dsrc: match &self.mac {
                MacConfig::Dsrc(d) => Some(d.clone()),
                MacConfig::Mmwave(_) => None,
            },
            output: self.output.clone(),
        };
        toml::to_string(&file).expect("config serializes")
    }

    /// Stable digest of the expanded config, excluding the output section.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        format!("{:016x}", fnv1a64(c.to_toml().as_bytes()))
    }

    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = ConfigError::field;
        let s = &self.scenario;
        if !(s.duration_s > 0.0 && s.duration_s.is_finite()) {
            return Err(f("scenario.duration_s", "must be positive"));
        }
        if !(s.warmup_s >= 0.0 && s.warmup_s < s.duration_s) {
            return Err(f("scenario.warmup_s", "must be in [0, duration_s)"));
        }
        if !(s.channel_update_ms > 0.0) {
            return Err(f("scenario.channel_update_ms", "must be positive"));
        }
        let r = &self.radio;
        if !(r.carrier_hz > 0.0) {
            return Err(f("radio.carrier_hz", "must be positive"));
        }
        if !(r.bandwidth_hz > 0.0) {
            return Err(f("radio.bandwidth_hz", "must be positive"));
        }
        if !(0.0..=1.0).contains(&r.leakage_factor) {
            return Err(f("radio.leakage_factor", "must be in [0, 1]"));
        }
        let c = &self.channel;
        if !(c.path_loss.los_exponent > 0.0) {
            return Err(f("channel.path_loss.los_exponent", "must be positive"));
        }
        if !(c.path_loss.nlos_exponent > 0.0) {
            return Err(f("channel.path_loss.nlos_exponent", "must be positive"));
        }
        if !(c.path_loss.shadowing_sigma_los_db >= 0.0) {
            return Err(f(
                "channel.path_loss.shadowing_sigma_los_db",
                "must be >= 0",
            ));
        }
        if !(c.path_loss.shadowing_sigma_nlos_db >= 0.0) {
            return Err(f(
                "channel.path_loss.shadowing_sigma_nlos_db",
                "must be >= 0",
            ));
        }
        if !(c.small_scale_m >= 0.5) {
            return Err(f("channel.small_scale_m", "must be >= 0.5"));
        }
        match c.blockage {
            BlockageModel::Geometric { blocker_width_m } if !(blocker_width_m >= 0.0) => {
                return Err(f("channel.blockage.blocker_width_m", "must be >= 0"));
            }
            BlockageModel::Probabilistic { los_decay_m } if !(los_decay_m > 0.0) => {
                return Err(f("channel.blockage.los_decay_m", "must be positive"));
            }
            _ => {}
        }
        let m = &self.mobility;
        match m.source {
            MobilitySource::Synthetic => {
                if m.cv_count == 0 {
                    return Err(f("mobility.cv_count", "must be positive"));
                }
            }
            MobilitySource::Trace => {
                if m.trace_path.is_none() {
                    return Err(f("mobility.trace_path", "required when source = \"trace\""));
                }
            }
        }
        if !(m.max_speed.as_mps() > 0.0) {
            return Err(f("mobility.max_speed", "must be positive"));
        }
        if !(m.corridor_length_m > 0.0) {
            return Err(f("mobility.corridor_length_m", "must be positive"));
        }
        if m.lane_count == 0 {
            return Err(f("mobility.lane_count", "must be at least 1"));
        }
        if !(m.lane_width_m > 0.0) {
            return Err(f("mobility.lane_width_m", "must be positive"));
        }
        if !(0.0..=1.0).contains(&m.min_speed_factor) {
            return Err(f("mobility.min_speed_factor", "must be in [0, 1]"));
        }
        if let Some(a) = m.arrival_rate {
            if !(a > 0.0) {
                return Err(f("mobility.arrival_rate", "must be positive"));
            }
        }
        let t = &self.traffic;
        if t.packet_size == 0 {
            return Err(f("traffic.packet_size", "must be positive"));
        }
        if !(t.offered_rate_bps > 0.0 && t.offered_rate_bps.is_finite()) {
            return Err(f("traffic.offered_rate_bps", "must be positive"));
        }
        if !(t.stagger_ms >= 0.0) {
            return Err(f("traffic.stagger_ms", "must be >= 0"));
        }
        if !(t.backhaul_latency_ms >= 0.0) {
            return Err(f("traffic.backhaul_latency_ms", "must be >= 0"));
        }
        if !(0.0..0.5).contains(&t.jitter_fraction) {
            return Err(f("traffic.jitter_fraction", "must be in [0, 0.5)"));
        }
        match &self.mac {
            MacConfig::Mmwave(mm) => {
                if self.radio.tech != Tech::Mmwave {
                    return Err(ConfigError::Conflict {
                        first: "radio.tech".into(),
                        second: "mmwave".into(),
                        message: "mmWave MAC with a non-mmWave radio".into(),
                    });
                }
                let sf = &mm.subframe;
                if !(sf.subframe_us > 0.0) {
                    return Err(f("mmwave.subframe.subframe_us", "must be positive"));
                }
                if sf.control_symbols >= sf.symbols_per_subframe {
                    return Err(f(
                        "mmwave.subframe.control_symbols",
                        "must be less than symbols_per_subframe",
                    ));
                }
                let tick = mm.subframe.duration().as_nanos();
                if tick == 0 || !self.channel_update_period().as_nanos().is_multiple_of(tick) {
                    return Err(f(
                        "scenario.channel_update_ms",
                        "must be a whole number of subframes",
                    ));
                }
            }
            MacConfig::Dsrc(d) => {
                if self.radio.tech != Tech::Dsrc {
                    return Err(ConfigError::Conflict {
                        first: "radio.tech".into(),
                        second: "dsrc".into(),
                        message: "DSRC MAC with a non-DSRC radio".into(),
                    });
                }
                if !(d.channel_bit_rate_bps > 0.0) {
                    return Err(f("dsrc.channel_bit_rate_bps", "must be positive"));
                }
                if !(d.per_packet_overhead_ms >= 0.0) {
                    return Err(f("dsrc.per_packet_overhead_ms", "must be >= 0"));
                }
                if d.queue_capacity == 0 {
                    return Err(f("dsrc.queue_capacity", "must be at least 1"));
                }
                if d.max_retries > 7 {
                    return Err(f("dsrc.max_retries", "must be in 0..=7"));
                }
                if !(d.nakagami_m >= 0.5) {
                    return Err(f("dsrc.nakagami_m", "must be >= 0.5"));
                }
            }
        }
        Ok(())
    }

    /// Returns a copy with one sweep axis set to `value`.
    pub fn with_axis(&self, axis: &str, value: &str) -> Result<Self, ConfigError> {
        let mut c = self.clone();
        let bad = |msg: String| ConfigError::field(axis, msg);
        match axis {
            "cv_count" => {
                c.mobility.cv_count = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not a vehicle count")))?;
            }
            "max_speed" => {
                c.mobility.max_speed = value.parse().map_err(bad)?;
            }
            "offered_rate" => {
                c.traffic.offered_rate_bps =
                    parse_rate(value).ok_or_else(|| bad(format!("`{value}` is not a bit rate")))?;
            }
            "packet_size" => {
                c.traffic.packet_size = value
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("`{value}` is not a packet size")))?;
            }
            "radio.tech" => {
                let tech = match value.trim() {
                    "mmwave" => Tech::Mmwave,
                    "dsrc" => Tech::Dsrc,
                    other => return Err(bad(format!("unknown tech `{other}`"))),
                };
                if tech != c.radio.tech {
                    c.radio = RadioProfile::default_for(tech);
                    c.mac = MacConfig::default_for(tech);
                }
            }
            other => {
                return Err(ConfigError::UnknownAxis {
                    name: other.into(),
                    valid: SWEEP_AXES.iter().map(|s| s.to_string()).collect(),
                })
            }
        }
        c.validate()?;
        Ok(c)
    }
}

/// Bits per second from `250000`, `250kbps`, `10 Mbps`, `1e7`.
pub fn parse_rate(s: &str) -> Option<f64> {
    let lower = s.trim().to_ascii_lowercase();
    let (num, scale) = if let Some(n) = lower.strip_suffix("gbps") {
        (n, 1e9)
    } else if let Some(n) = lower.strip_suffix("mbps") {
        (n, 1e6)
    } else if let Some(n) = lower.strip_suffix("kbps") {
        (n, 1e3)
    } else if let Some(n) = lower.strip_suffix("bps") {
        (n, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let v: f64 = num.trim().parse().ok()?;
    (v.is_finite() && v > 0.0).then_some(v * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let c = ScenarioConfig::from_toml("", None).unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.radio.carrier_hz, 73e9);
        assert_eq!(c.scenario.duration_s, 100.0);
    }

    #[test]
    fn round_trips_through_toml() {
        let mut c = ScenarioConfig::for_tech(Tech::Dsrc);
        c.mobility.max_speed = Speed::mph(55.0);
        c.scenario.seed = 99;
        let back = ScenarioConfig::from_toml(&c.to_toml(), None).unwrap();
        assert_eq!(back, c);
        let m = ScenarioConfig::default();
        assert_eq!(ScenarioConfig::from_toml(&m.to_toml(), None).unwrap(), m);
    }

    #[test]
    fn dsrc_tech_defaults() {
        let c = ScenarioConfig::from_toml("[radio]\ntech = \"dsrc\"\n", None).unwrap();
        assert_eq!(c.radio.carrier_hz, 5.9e9);
        assert_eq!(c.radio.tx_power_dbm, 20.0);
        assert!(matches!(c.mac, MacConfig::Dsrc(_)));
    }

    #[test]
    fn mismatched_mac_section_names_both_fields() {
        let err = ScenarioConfig::from_toml(
            "[radio]\ntech = \"dsrc\"\n[mmwave]\nharq_max_retransmissions = 2\n",
            None,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("radio.tech") && msg.contains("mmwave"),
            "{msg}"
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScenarioConfig::from_toml("[traffic]\npacket_sise = 10\n", None).is_err());
        assert!(ScenarioConfig::from_toml("bogus = 1\n", None).is_err());
    }

    #[test]
    fn speeds_need_units() {
        assert_eq!("35 mph".parse::<Speed>().unwrap().as_mps(), 35.0 * 0.44704);
        assert_eq!("12.5 m/s".parse::<Speed>().unwrap().as_mps(), 12.5);
        assert_eq!("35mph".parse::<Speed>().unwrap(), Speed::mph(35.0));
        assert!("35".parse::<Speed>().is_err());
        assert!(ScenarioConfig::from_toml("[mobility]\nmax_speed = 35\n", None).is_err());
    }

    #[test]
    fn field_level_validation() {
        let err = ScenarioConfig::from_toml("[traffic]\npacket_size = 0\n", None).unwrap_err();
        assert!(err.to_string().contains("traffic.packet_size"));
        let err = ScenarioConfig::from_toml("[mmwave.subframe]\ncontrol_symbols = 24\n", None)
            .unwrap_err();
        assert!(err.to_string().contains("control_symbols"));
        let err =
            ScenarioConfig::from_toml("[radio]\ntech=\"dsrc\"\n[dsrc]\nmax_retries = 9\n", None)
                .unwrap_err();
        assert!(err.to_string().contains("max_retries"));
    }

    #[test]
    fn blockage_modes_parse() {
        let c = ScenarioConfig::from_toml(
            "[channel.blockage]\nmode = \"probabilistic\"\nlos_decay_m = 67.1\n",
            None,
        )
        .unwrap();
        assert_eq!(
            c.channel.blockage,
            BlockageModel::Probabilistic { los_decay_m: 67.1 }
        );
    }

    #[test]
    fn mcs_table_in_config() {
        let c =
            ScenarioConfig::from_toml("[mmwave]\nmcs_table = [[0.0, 1.0], [10.0, 3.0]]\n", None)
                .unwrap();
        let MacConfig::Mmwave(m) = c.mac else {
            panic!()
        };
        assert_eq!(m.mcs_table.rows().len(), 2);
        assert!(ScenarioConfig::from_toml(
            "[mmwave]\nmcs_table = [[0.0, 1.0], [-1.0, 3.0]]\n",
            None
        )
        .is_err());
    }

    #[test]
    fn axis_overrides() {
        let base = ScenarioConfig::default();
        assert_eq!(
            base.with_axis("cv_count", "40").unwrap().mobility.cv_count,
            40
        );
        assert_eq!(
            base.with_axis("max_speed", "55mph")
                .unwrap()
                .mobility
                .max_speed,
            Speed::mph(55.0)
        );
        assert_eq!(
            base.with_axis("offered_rate", "10Mbps")
                .unwrap()
                .traffic
                .offered_rate_bps,
            1e7
        );
        assert_eq!(
            base.with_axis("packet_size", "256")
                .unwrap()
                .traffic
                .packet_size,
            256
        );
        let d = base.with_axis("radio.tech", "dsrc").unwrap();
        assert!(matches!(d.mac, MacConfig::Dsrc(_)));
        assert!(matches!(
            base.with_axis("lanes", "3"),
            Err(ConfigError::UnknownAxis { .. })
        ));
    }

    #[test]
    fn rates() {
        assert_eq!(parse_rate("250kbps"), Some(250e3));
        assert_eq!(parse_rate("10 Mbps"), Some(1e7));
        assert_eq!(parse_rate("250000"), Some(250e3));
        assert_eq!(parse_rate("-1"), None);
    }

    #[test]
    fn digest_ignores_output_dir() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        b.output.out_dir = Some("/tmp/x".into());
        assert_eq!(a.digest(), b.digest());
        b.scenario.seed = 7;
        assert_ne!(a.digest(), b.digest());
    }
}
