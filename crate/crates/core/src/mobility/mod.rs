//! Node positions over time: fixed infrastructure, ns-2 movement traces, or a
//! synthetic multi-lane corridor.

mod corridor;
mod ns2;

pub use corridor::{CorridorGeometry, CorridorMobility, CorridorParams, SyntheticVehicle};
pub use ns2::{parse_ns2_trace, TraceMobility, Waypoint};

use crate::engine::SimTime;

/// Exact miles-per-hour to meters-per-second factor.
pub const MPH_TO_MPS: f64 = 0.44704;

pub fn mph_to_mps(mph: f64) -> f64 {
    mph * MPH_TO_MPS
}

/// Point on the flat road plane, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Kinematic state of a node at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub position: Position,
    /// Meters per second.
    pub speed: f64,
    /// False for vehicles that have not entered the corridor yet.
    pub active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    BaseStation,
    Rsu,
    Vehicle,
    RemoteHost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeMobility {
    Fixed(Position),
    /// Index into the vehicle mobility model.
    Vehicle(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeDescriptor {
    pub id: u32,
    pub kind: NodeKind,
    pub mobility: NodeMobility,
}

/// Vehicle movement source.
#[derive(Debug, Clone)]
pub enum MobilityModel {
    Trace(TraceMobility),
    Synthetic(CorridorMobility),
}

impl MobilityModel {
    pub fn vehicle_count(&self) -> usize {
        match self {
            MobilityModel::Trace(t) => t.node_count(),
            MobilityModel::Synthetic(c) => c.vehicle_count(),
        }
    }

    /// External node id of the vehicle at `index`.
    pub fn vehicle_id(&self, index: usize) -> u32 {
        match self {
            MobilityModel::Trace(t) => t.node_ids()[index],
            MobilityModel::Synthetic(_) => index as u32,
        }
    }

    pub fn vehicle_state(&self, index: usize, t: SimTime) -> NodeState {
        match self {
            MobilityModel::Trace(tr) => {
                let (position, speed) = tr.position_at(index, t);
                NodeState {
                    position,
                    speed,
                    active: true,
                }
            }
            MobilityModel::Synthetic(c) => c.state_at(index, t),
        }
    }

    /// Earliest time the vehicle is present on the road.
    pub fn vehicle_entry(&self, index: usize) -> SimTime {
        match self {
            MobilityModel::Trace(_) => SimTime::ZERO,
            MobilityModel::Synthetic(c) => c.entry_time(index),
        }
    }
}

/// All nodes of one scenario: vehicles, the serving base station or RSU and
/// the remote traffic source.
#[derive(Debug, Clone)]
pub struct Topology {
    pub nodes: Vec<NodeDescriptor>,
    pub vehicles: MobilityModel,
}

impl Topology {
    /// Vehicles take their model ids; the access point and remote host take
    /// the next two ids.
    pub fn new(vehicles: MobilityModel, access_point: Position, access_kind: NodeKind) -> Self {
        let n = vehicles.vehicle_count();
        let mut nodes: Vec<NodeDescriptor> = (0..n)
            .map(|i| NodeDescriptor {
                id: vehicles.vehicle_id(i),
                kind: NodeKind::Vehicle,
                mobility: NodeMobility::Vehicle(i),
            })
            .collect();
        let next = nodes.iter().map(|d| d.id + 1).max().unwrap_or(0);
        nodes.push(NodeDescriptor {
            id: next,
            kind: access_kind,
            mobility: NodeMobility::Fixed(access_point),
        });
        nodes.push(NodeDescriptor {
            id: next + 1,
            kind: NodeKind::RemoteHost,
            mobility: NodeMobility::Fixed(Position::new(access_point.x, access_point.y - 1000.0)),
        });
        Topology { nodes, vehicles }
    }

    pub fn access_point(&self) -> &NodeDescriptor {
        self.nodes
            .iter()
            .find(|d| matches!(d.kind, NodeKind::BaseStation | NodeKind::Rsu))
            .expect("topology always has an access point")
    }

    pub fn vehicle_nodes(&self) -> impl Iterator<Item = &NodeDescriptor> {
        self.nodes.iter().filter(|d| d.kind == NodeKind::Vehicle)
    }

    pub fn state_at(&self, node: &NodeDescriptor, t: SimTime) -> NodeState {
        match node.mobility {
            NodeMobility::Fixed(position) => NodeState {
                position,
                speed: 0.0,
                active: true,
            },
            NodeMobility::Vehicle(i) => self.vehicles.vehicle_state(i, t),
        }
    }

    pub fn position_at(&self, node: &NodeDescriptor, t: SimTime) -> (Position, f64) {
        let s = self.state_at(node, t);
        (s.position, s.speed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_node_never_moves() {
        let trace = parse_ns2_trace("").unwrap();
        let topo = Topology::new(
            MobilityModel::Trace(trace),
            Position::new(1000.0, 20.0),
            NodeKind::BaseStation,
        );
        let bs = topo.access_point().clone();
        for s in [0, 1, 50, 10_000] {
            let (p, v) = topo.position_at(&bs, SimTime::from_secs(s));
            assert_eq!(p, Position::new(1000.0, 20.0));
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn mph_conversion_is_exact() {
        assert_eq!(mph_to_mps(35.0), 35.0 * 0.44704);
        assert!((mph_to_mps(35.0) - 15.6464).abs() < 1e-12);
    }

    #[test]
    fn node_ids_are_unique() {
        let trace = parse_ns2_trace(
            "$node_(0) set X_ 1\n$node_(0) set Y_ 2\n$node_(3) set X_ 4\n$node_(3) set Y_ 5\n",
        )
        .unwrap();
        let topo = Topology::new(
            MobilityModel::Trace(trace),
            Position::new(0.0, 0.0),
            NodeKind::Rsu,
        );
        let mut ids: Vec<u32> = topo.nodes.iter().map(|d| d.id).collect();
        assert_eq!(ids, vec![0, 3, 4, 5]);
        ids.dedup();
        assert_eq!(ids.len(), 4);
        assert_eq!(topo.access_point().kind, NodeKind::Rsu);
    }
}
