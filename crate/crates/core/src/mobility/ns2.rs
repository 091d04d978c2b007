//! ns-2 `setdest` movement traces, as exported by SUMO's traceExporter.
//!
//! Supported lines:
//!
//! ```text
//! $node_(0) set X_ 150.0
//! $node_(0) set Y_ 5.0
//! $node_(0) set Z_ 0.0
//! $ns_ at 2.0 "$node_(0) setdest 250.0 5.0 10.0"
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;

use super::Position;
use crate::engine::SimTime;
use crate::error::TraceError;

/// A node is at `position` at `time` and leaves toward the next waypoint at
/// `speed` m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub time: SimTime,
    pub position: Position,
    pub speed: f64,
}

/// Per-node waypoint lists, ordered by node id.
#[derive(Debug, Clone, Default)]
pub struct TraceMobility {
    ids: Vec<u32>,
    waypoints: Vec<Vec<Waypoint>>,
}

#[derive(Default)]
struct PendingNode {
    x: Option<f64>,
    y: Option<f64>,
    /// (time, dest, speed, line)
    moves: Vec<(f64, Position, f64, usize)>,
}

pub fn parse_ns2_trace(text: &str) -> Result<TraceMobility, TraceError> {
    let mut nodes: BTreeMap<u32, PendingNode> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |msg: &str| TraceError::Parse {
            line: line_no,
            message: format!("{msg}: `{line}`"),
        };

        if let Some(rest) = line.strip_prefix("$ns_") {
            // $ns_ at <t> "$node_(<i>) setdest <x> <y> <speed>"
            let rest = rest.trim_start();
            let rest = rest
                .strip_prefix("at")
                .ok_or_else(|| malformed("expected `at`"))?;
            let (time_str, cmd) = rest
                .trim_start()
                .split_once(char::is_whitespace)
                .ok_or_else(|| malformed("missing command"))?;
            let time: f64 = parse_num(time_str).ok_or_else(|| malformed("bad time"))?;
            if time < 0.0 {
                return Err(malformed("negative time"));
            }
            let cmd = cmd.trim().trim_matches('"').trim();
            let (node, rest) =
                parse_node_ref(cmd).ok_or_else(|| malformed("bad node reference"))?;
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "setdest" {
                return Err(malformed("expected `setdest x y speed`"));
            }
            let nums: Option<Vec<f64>> = fields[1..].iter().map(|f| parse_num(f)).collect();
            let nums = nums.ok_or_else(|| malformed("bad setdest argument"))?;
            if nums[2] < 0.0 {
                return Err(malformed("negative speed"));
            }
            let entry = nodes
                .get_mut(&node)
                .filter(|n| n.x.is_some() && n.y.is_some());
            let Some(entry) = entry else {
                return Err(TraceError::Validation {
                    line: line_no,
                    message: format!("setdest for node {node} before its initial position"),
                });
            };
            entry
                .moves
                .push((time, Position::new(nums[0], nums[1]), nums[2], line_no));
        } else if line.starts_with("$node_") {
            // $node_(<i>) set X_ <v>
            let (node, rest) =
                parse_node_ref(line).ok_or_else(|| malformed("bad node reference"))?;
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "set" {
                return Err(malformed("expected `set X_|Y_|Z_ value`"));
            }
            let value = parse_num(fields[2]).ok_or_else(|| malformed("bad coordinate"))?;
            let entry = nodes.entry(node).or_default();
            match fields[1] {
                "X_" => entry.x = Some(value),
                "Y_" => entry.y = Some(value),
                "Z_" => {}
                _ => return Err(malformed("unknown coordinate")),
            }
        } else {
            return Err(malformed("unrecognized line"));
        }
    }

    let mut ids = Vec::with_capacity(nodes.len());
    let mut waypoints = Vec::with_capacity(nodes.len());
    for (id, node) in nodes {
        let (Some(x), Some(y)) = (node.x, node.y) else {
            return Err(TraceError::Validation {
                line: 0,
                message: format!("node {id} has an incomplete initial position"),
            });
        };
        ids.push(id);
        waypoints.push(build_waypoints(id, Position::new(x, y), &node.moves)?);
    }
    Ok(TraceMobility { ids, waypoints })
}

fn parse_num(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Splits `$node_(<i>) rest` into `(i, rest)`.
fn parse_node_ref(s: &str) -> Option<(u32, &str)> {
    let rest = s.strip_prefix("$node_(")?;
    let (idx, rest) = rest.split_once(')')?;
    Some((idx.trim().parse().ok()?, rest))
}

fn build_waypoints(
    id: u32,
    start: Position,
    moves: &[(f64, Position, f64, usize)],
) -> Result<Vec<Waypoint>, TraceError> {
    let mut out = vec![Waypoint {
        time: SimTime::ZERO,
        position: start,
        speed: 0.0,
    }];
    let mut last_cmd: Option<f64> = None;
    for &(t, dest, speed, line) in moves {
        if let Some(prev) = last_cmd {
            if t <= prev {
                return Err(TraceError::Validation {
                    line,
                    message: format!("node {id}: command time {t} not after previous {prev}"),
                });
            }
        }
        last_cmd = Some(t);
        let time = SimTime::from_secs_f64(t);
        let here = interpolate(&out, time).0;
        // Drop any arrival waypoint that lies after this command.
        while out.len() > 1 && out.last().is_some_and(|w| w.time >= time) {
            out.pop();
        }
        if out.last().is_some_and(|w| w.time == time) {
            out.pop();
        }
        let dist = here.distance(&dest);
        let moving = speed > 0.0 && dist > 0.0;
        out.push(Waypoint {
            time,
            position: here,
            speed: if moving { speed } else { 0.0 },
        });
        if moving {
            let arrive = time + SimTime::from_secs_f64(dist / speed);
            if arrive > time {
                out.push(Waypoint {
                    time: arrive,
                    position: dest,
                    speed: 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// Piecewise-linear position and speed along a waypoint list.
fn interpolate(wps: &[Waypoint], t: SimTime) -> (Position, f64) {
    let Some(first) = wps.first() else {
        return (Position::default(), 0.0);
    };
    if t <= first.time {
        return (
            first.position,
            if t == first.time { first.speed } else { 0.0 },
        );
    }
    // Index of the last waypoint at or before t.
    let i = wps.partition_point(|w| w.time <= t) - 1;
    let w = &wps[i];
    match wps.get(i + 1) {
        None => (w.position, 0.0),
        Some(next) => {
            let span = (next.time - w.time).as_nanos() as f64;
            let frac = (t - w.time).as_nanos() as f64 / span;
            let p = Position::new(
                w.position.x + (next.position.x - w.position.x) * frac,
                w.position.y + (next.position.y - w.position.y) * frac,
            );
            (p, w.speed)
        }
    }
}

impl TraceMobility {
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn node_ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn waypoints(&self, index: usize) -> &[Waypoint] {
        &self.waypoints[index]
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn position_at(&self, index: usize, t: SimTime) -> (Position, f64) {
        interpolate(&self.waypoints[index], t)
    }
}
