//! Radio channel: LOS/NLOS path loss with shadowing, geometric blockage by
//! vehicle bodies, free-space (Friis) loss, Nakagami-m fading and SINR.
//!
//! Powers are carried in dBm at the interfaces and converted to milliwatts
//! wherever they are summed.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::engine::{RngStream, SimTime};
use crate::mobility::Position;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
/// Distances below this are clamped before evaluating log-distance models.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tech {
    Mmwave,
    Dsrc,
}

impl Tech {
    pub fn as_str(self) -> &'static str {
        match self {
            Tech::Mmwave => "mmwave",
            Tech::Dsrc => "dsrc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioProfile {
    pub tech: Tech,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_figure_db: f64,
    /// Combined tx+rx gain of aligned beams (mmWave).
    pub beam_gain_db: f64,
    /// Fraction of a co-scheduled beam's received power that leaks into
    /// other links (mmWave).
    pub leakage_factor: f64,
    /// Combined tx+rx antenna gain (DSRC).
    pub antenna_gain_db: f64,
}

impl RadioProfile {
    pub fn mmwave() -> Self {
        RadioProfile {
            tech: Tech::Mmwave,
            carrier_hz: 73e9,
            bandwidth_hz: 1e9,
            tx_power_dbm: 30.0,
            noise_figure_db: 5.0,
            beam_gain_db: 27.0,
            leakage_factor: 0.01,
            antenna_gain_db: 0.0,
        }
    }

    pub fn dsrc() -> Self {
        RadioProfile {
            tech: Tech::Dsrc,
            carrier_hz: 5.9e9,
            bandwidth_hz: 10e6,
            tx_power_dbm: 20.0,
            noise_figure_db: 5.0,
            beam_gain_db: 0.0,
            leakage_factor: 0.0,
            antenna_gain_db: 0.0,
        }
    }

    pub fn default_for(tech: Tech) -> Self {
        match tech {
            Tech::Mmwave => Self::mmwave(),
            Tech::Dsrc => Self::dsrc(),
        }
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_hz)
    }

    pub fn noise_dbm(&self) -> f64 {
        thermal_noise_dbm(self.bandwidth_hz, self.noise_figure_db)
    }
}

/// Floating-intercept log-distance parameters, one equation per LOS state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathLossParams {
    pub los_intercept_db: f64,
    pub los_exponent: f64,
    pub nlos_intercept_db: f64,
    pub nlos_exponent: f64,
    pub shadowing_sigma_los_db: f64,
    pub shadowing_sigma_nlos_db: f64,
}

impl Default for PathLossParams {
    /// 73 GHz model-family defaults.
    fn default() -> Self {
        PathLossParams {
            los_intercept_db: 69.8,
            los_exponent: 2.0,
            nlos_intercept_db: 82.7,
            nlos_exponent: 2.69,
            shadowing_sigma_los_db: 5.8,
            shadowing_sigma_nlos_db: 8.7,
        }
    }
}

impl PathLossParams {
    pub fn sigma(&self, los: bool) -> f64 {
        if los {
            self.shadowing_sigma_los_db
        } else {
            self.shadowing_sigma_nlos_db
        }
    }
}

/// How the LOS state of a link is decided at each channel update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum BlockageModel {
    /// Other vehicles of the given body width obstruct the direct path.
    Geometric { blocker_width_m: f64 },
    /// LOS with probability `exp(-d / los_decay_m)`, independent per update.
    Probabilistic { los_decay_m: f64 },
    /// Every link is LOS.
    Disabled,
}

impl Default for BlockageModel {
    fn default() -> Self {
        BlockageModel::Geometric {
            blocker_width_m: 2.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// kTB noise plus receiver noise figure, dBm.
pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// True iff some blocker's center lies within `width / 2` of the segment
/// `tx`-`rx` and projects strictly between its endpoints.
pub fn is_blocked(tx: Position, rx: Position, blockers: &[Position], width: f64) -> bool {
    let (dx, dy) = (rx.x - tx.x, rx.y - tx.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return false;
    }
    let half = width / 2.0;
    blockers.iter().any(|b| {
        let (bx, by) = (b.x - tx.x, b.y - tx.y);
        let proj = bx * dx + by * dy;
        if proj <= 0.0 || proj >= len2 {
            return false;
        }
        let cross = bx * dy - by * dx;
        // perpendicular distance = |cross| / len
        cross * cross < half * half * len2
    })
}

/// `PL = alpha + 10 n log10(d) + shadow`, choosing the LOS or NLOS pair.
pub fn mmwave_path_loss(distance: f64, los: bool, params: &PathLossParams, shadow_db: f64) -> f64 {
    let d = distance.max(MIN_DISTANCE_M);
    let (alpha, n) = if los {
        (params.los_intercept_db, params.los_exponent)
    } else {
        (params.nlos_intercept_db, params.nlos_exponent)
    };
    alpha + 10.0 * n * d.log10() + shadow_db
}

/// Free-space path loss in dB.
pub fn friis_path_loss(distance: f64, wavelength: f64) -> f64 {
    20.0 * (4.0 * PI * distance / wavelength).log10()
}

/// `Pr = Pt + G - 20 log10(4 pi d / lambda)`, dBm.
pub fn friis_received_power(
    tx_power_dbm: f64,
    gains_db: f64,
    distance: f64,
    wavelength: f64,
) -> f64 {
    tx_power_dbm + gains_db - friis_path_loss(distance, wavelength)
}

/// Unit-mean Gamma(m, 1/m) power gain.
pub fn nakagami_fading_draw(m: f64, rng: &mut RngStream) -> f64 {
    assert!(m >= 0.5, "Nakagami shape must be >= 0.5, got {m}");
    let gamma = Gamma::new(m, 1.0 / m).expect("valid Gamma parameters");
    loop {
        let g = gamma.sample(rng);
        if g > 0.0 {
            return g;
        }
    }
}

/// `10 log10(M / (I + O))`.
pub fn compute_sinr(signal_mw: f64, interference_mw: f64, noise_mw: f64) -> f64 {
    debug_assert!(noise_mw > 0.0 && signal_mw >= 0.0 && interference_mw >= 0.0);
    linear_to_db(signal_mw / (interference_mw + noise_mw))
}

/// Inter-beam leakage from links sharing the subframe.
pub fn leakage_interference_mw(
    leakage_factor: f64,
    co_scheduled_rx_mw: impl IntoIterator<Item = f64>,
) -> f64 {
    leakage_factor * co_scheduled_rx_mw.into_iter().sum::<f64>()
}

/// Large-scale snapshot of one downlink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub los: bool,
    pub distance: f64,
    /// Deterministic part of the loss, dB (no shadowing).
    pub path_loss: f64,
    pub shadowing: f64,
    pub beam_gain: f64,
    pub last_update: SimTime,
    /// Most recent small-scale power gain.
    pub small_scale: f64,
    /// Mean received power, dBm.
    pub rx_power_dbm: f64,
    pub interference_mw: f64,
    pub sinr: f64,
}

impl LinkState {
    pub fn rx_power_mw(&self) -> f64 {
        dbm_to_mw(self.rx_power_dbm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub time: SimTime,
    pub node_id: u32,
    pub sinr: f64,
}

/// Everything `update_link` needs to know about where the endpoints are.
#[derive(Debug, Clone, Copy)]
pub struct LinkGeometry<'a> {
    pub tx: Position,
    pub rx: Position,
    /// Positions of all other vehicles.
    pub blockers: &'a [Position],
}

/// Draws that a channel update consumes.
pub struct ChannelDraws<'a> {
    pub shadowing: &'a mut RngStream,
    pub blockage: &'a mut RngStream,
}

/// Re-evaluates LOS, path loss, shadowing and beam gain at a channel-update
/// epoch. `interference_mw` is the leakage currently attributed to the link.
pub fn update_link(
    now: SimTime,
    geometry: &LinkGeometry<'_>,
    profile: &RadioProfile,
    params: &PathLossParams,
    blockage: &BlockageModel,
    interference_mw: f64,
    draws: ChannelDraws<'_>,
) -> LinkState {
    let distance = geometry.tx.distance(&geometry.rx);
    let los = match *blockage {
        BlockageModel::Geometric { blocker_width_m } => {
            !is_blocked(geometry.tx, geometry.rx, geometry.blockers, blocker_width_m)
        }
        BlockageModel::Probabilistic { los_decay_m } => {
            let u: f64 = draws.blockage.random();
            u < (-distance / los_decay_m).exp()
        }
        BlockageModel::Disabled => true,
    };
    let z: f64 = StandardNormal.sample(draws.shadowing);

    let (path_loss, shadowing, gain) = match profile.tech {
        Tech::Mmwave => (
            mmwave_path_loss(distance, los, params, 0.0),
            z * params.sigma(los),
            profile.beam_gain_db,
        ),
        Tech::Dsrc => (
            friis_path_loss(distance.max(MIN_DISTANCE_M), profile.wavelength()),
            0.0,
            profile.antenna_gain_db,
        ),
    };
    let rx_power_dbm = profile.tx_power_dbm + gain - path_loss - shadowing;
    let noise_mw = dbm_to_mw(profile.noise_dbm());
    let interference_mw = match profile.tech {
        Tech::Mmwave => interference_mw,
        Tech::Dsrc => 0.0,
    };
    LinkState {
        los,
        distance,
        path_loss,
        shadowing,
        beam_gain: gain,
        last_update: now,
        small_scale: 1.0,
        rx_power_dbm,
        interference_mw,
        sinr: compute_sinr(dbm_to_mw(rx_power_dbm), interference_mw, noise_mw),
    }
}
