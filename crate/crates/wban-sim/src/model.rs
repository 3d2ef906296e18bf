//! Shared domain types: nodes, packets and the deployment topology.

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};

/// Index of a node within a scenario. Sensors occupy `0..n_nodes`, sinks the
/// ids above them.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Sensor,
    Sink,
}

/// Per-node runtime record.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub pos: (f64, f64),
    pub role: Role,
    /// Residual energy in joules. Sinks keep their initial value; they are
    /// never charged.
    pub energy_j: f64,
    pub temperature_c: f64,
    /// Hotspot sleep mode: the node no longer relays.
    pub asleep: bool,
    /// Bits handled since the last thermal tick.
    pub tx_bits_window: u64,
    pub rx_bits_window: u64,
    /// Radio energy spent since the last thermal tick, the SAR heat source.
    pub radio_energy_window_j: f64,
    /// Running peak temperature over the whole run.
    pub peak_temperature_c: f64,
}

impl NodeState {
    pub fn new(id: NodeId, pos: (f64, f64), role: Role, energy_j: f64, t_body_c: f64) -> Self {
        NodeState {
            id,
            pos,
            role,
            energy_j,
            temperature_c: t_body_c,
            asleep: false,
            tx_bits_window: 0,
            rx_bits_window: 0,
            radio_energy_window_j: 0.0,
            peak_temperature_c: t_body_c,
        }
    }

    pub fn is_sink(&self) -> bool {
        self.role == Role::Sink
    }

    /// A sensor whose energy reached zero is dead and excluded from routing.
    pub fn is_dead(&self) -> bool {
        self.role == Role::Sensor && self.energy_j <= 0.0
    }

    /// Alive, awake nodes are eligible to relay.
    pub fn can_relay(&self) -> bool {
        !self.is_dead() && !self.asleep
    }
}

/// Traffic priority classes. `priority()` is the P of the waiting-time
/// formula: 3 for emergency, 2 for on-demand, 1 for normal data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PacketClass {
    Normal,
    OnDemand,
    Emergency,
}

impl PacketClass {
    pub const ALL: [PacketClass; 3] =
        [PacketClass::Normal, PacketClass::OnDemand, PacketClass::Emergency];

    pub fn priority(self) -> u32 {
        match self {
            PacketClass::Normal => 1,
            PacketClass::OnDemand => 2,
            PacketClass::Emergency => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PacketClass::Normal => "normal",
            PacketClass::OnDemand => "on_demand",
            PacketClass::Emergency => "emergency",
        }
    }

    pub fn index(self) -> usize {
        match self {
            PacketClass::Normal => 0,
            PacketClass::OnDemand => 1,
            PacketClass::Emergency => 2,
        }
    }
}

/// What a control packet carries. Payloads are simulation objects; only
/// their configured byte size matters for energy and load accounting.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlKind {
    /// Periodic neighbor broadcast: own status plus piggybacked view rows.
    Hello,
    /// Sink distance beacon (hop count seeds the greedy baseline).
    SinkBeacon { sink: NodeId, round: u64, hops: u32 },
    /// Reactive route request flood.
    RouteRequest { origin: NodeId, req_id: u64 },
    /// Route reply retracing the request path, one hop per transmission.
    RouteReply { origin: NodeId, req_id: u64, path: Vec<NodeId> },
    /// Link-state advertisement flood carrying one node's link stabilities
    /// as (peer, reception ratio) pairs measured at the origin.
    LinkStateAd { origin: NodeId, round: u64, links: Vec<(NodeId, f64)> },
    /// Hotspot enter/leave announcement flood.
    HotspotNotice { origin: NodeId, seq: u64, asleep: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Data,
    Control,
}

/// A unit of traffic. Control packets reuse the same record with
/// `kind == Control`; they are never counted as delivered application data.
#[derive(Debug, Clone)]
pub struct Packet {
    pub seq: u64,
    pub class: PacketClass,
    pub size_bits: u64,
    pub src: NodeId,
    /// Destination sink; fixed once the first forwarding decision is made.
    pub dst: Option<NodeId>,
    pub created_at: f64,
    pub delivered_at: Option<f64>,
    /// Nodes traversed, beginning with the source.
    pub hops: Vec<NodeId>,
    /// Arrival time at each hop, parallel to `hops`.
    pub hop_times: Vec<f64>,
    pub kind: PacketKind,
}

impl Packet {
    pub fn data(seq: u64, class: PacketClass, size_bits: u64, src: NodeId, now: f64) -> Self {
        Packet {
            seq,
            class,
            size_bits,
            src,
            dst: None,
            created_at: now,
            delivered_at: None,
            hops: vec![src],
            hop_times: vec![now],
            kind: PacketKind::Data,
        }
    }
}

/// Static deployment: node states at t = 0, adjacency within transmission
/// range, and the per-link ground-truth reception ratios that drive the
/// Bernoulli channel.
#[derive(Debug, Clone)]
pub struct Topology {
    pub nodes: Vec<NodeState>,
    pub area_m: f64,
    pub range_m: f64,
    /// Sorted neighbor lists, symmetric by construction.
    adjacency: Vec<Vec<NodeId>>,
    /// Ground-truth PRR per unordered pair, keyed by (min, max).
    link_prr: Vec<Vec<(NodeId, f64)>>,
}

impl Topology {
    /// Build from explicit positions: links exist exactly between distinct
    /// nodes within range. Used by fixtures and forced-placement tests.
    pub fn from_positions(
        sensors: &[(f64, f64)],
        sinks: &[(f64, f64)],
        cfg: &ScenarioConfig,
        rng: &mut impl Rng,
    ) -> Topology {
        let mut nodes = Vec::with_capacity(sensors.len() + sinks.len());
        for (i, &pos) in sensors.iter().enumerate() {
            nodes.push(NodeState::new(
                i as NodeId,
                pos,
                Role::Sensor,
                cfg.initial_energy_j,
                cfg.t_body_c,
            ));
        }
        for (i, &pos) in sinks.iter().enumerate() {
            nodes.push(NodeState::new(
                (sensors.len() + i) as NodeId,
                pos,
                Role::Sink,
                cfg.initial_energy_j,
                cfg.t_body_c,
            ));
        }
        let mut topo = Topology {
            nodes,
            area_m: cfg.area_m,
            range_m: cfg.range_m,
            adjacency: Vec::new(),
            link_prr: Vec::new(),
        };
        topo.rebuild_links(rng);
        topo
    }

    fn rebuild_links(&mut self, rng: &mut impl Rng) {
        let n = self.nodes.len();
        self.adjacency = vec![Vec::new(); n];
        self.link_prr = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = distance(self.nodes[i].pos, self.nodes[j].pos);
                if d <= self.range_m {
                    self.adjacency[i].push(j as NodeId);
                    self.adjacency[j].push(i as NodeId);
                    // Distance-decreasing reliability profile with seeded
                    // per-link jitter; symmetric across directions.
                    let base = (1.0 - 0.6 * (d / self.range_m).powi(2)).clamp(0.5, 1.0);
                    let jitter = rng.gen_range(-0.05..=0.05);
                    let prr = (base + jitter).clamp(0.0, 1.0);
                    self.link_prr[i].push((j as NodeId, prr));
                    self.link_prr[j].push((i as NodeId, prr));
                }
            }
        }
    }

    pub fn n_total(&self) -> usize {
        self.nodes.len()
    }

    pub fn sensor_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.role == Role::Sensor).map(|n| n.id)
    }

    pub fn sink_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|n| n.role == Role::Sink).map(|n| n.id)
    }

    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        &self.adjacency[id as usize]
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a as usize].binary_search(&b).is_ok()
            || self.adjacency[a as usize].contains(&b)
    }

    /// Ground-truth reception probability of link (a, b); 0 when not adjacent.
    pub fn link_prr(&self, a: NodeId, b: NodeId) -> f64 {
        self.link_prr[a as usize]
            .iter()
            .find(|(peer, _)| *peer == b)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        distance(self.nodes[a as usize].pos, self.nodes[b as usize].pos)
    }

    /// Every sensor can reach some sink over the adjacency.
    pub fn all_sensors_connected(&self) -> bool {
        let n = self.n_total();
        let mut seen = vec![false; n];
        let mut queue: Vec<NodeId> = self.sink_ids().collect();
        for &s in &queue {
            seen[s as usize] = true;
        }
        while let Some(v) = queue.pop() {
            for &next in self.neighbors(v) {
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    queue.push(next);
                }
            }
        }
        self.sensor_ids().all(|s| seen[s as usize])
    }
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Deterministic sink positions: midpoints of the area edges, opposite
/// pairs first, so runs are comparable across protocols.
pub fn sink_positions(area: f64, n_sinks: u32) -> Vec<(f64, f64)> {
    let half = area / 2.0;
    let spots = [(0.0, half), (area, half), (half, 0.0), (half, area)];
    spots.iter().copied().take(n_sinks as usize).collect()
}

const PLACEMENT_RETRIES: u32 = 1000;

/// Place sensors uniformly at random and sinks on opposite mid-edges,
/// re-sampling until every sensor reaches a sink, up to the retry bound.
pub fn build_topology(cfg: &ScenarioConfig, rng: &mut impl Rng) -> Result<Topology> {
    let sinks = sink_positions(cfg.area_m, cfg.n_sinks);
    for _ in 0..PLACEMENT_RETRIES {
        let sensors: Vec<(f64, f64)> = (0..cfg.n_nodes)
            .map(|_| (rng.gen_range(0.0..=cfg.area_m), rng.gen_range(0.0..=cfg.area_m)))
            .collect();
        let topo = Topology::from_positions(&sensors, &sinks, cfg, rng);
        if topo.all_sensors_connected() {
            return Ok(topo);
        }
    }
    Err(SimError::TopologyUnreachable { retries: PLACEMENT_RETRIES })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    #[test]
    fn nodes_within_range_are_linked() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let topo = Topology::from_positions(&[(0.0, 0.0), (0.0, 0.4)], &[], &cfg(), &mut rng);
        assert!(topo.has_link(0, 1));
        assert!(topo.has_link(1, 0));
    }

    #[test]
    fn nodes_beyond_range_are_not_linked() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let topo = Topology::from_positions(&[(0.0, 0.0), (0.0, 0.6)], &[], &cfg(), &mut rng);
        assert!(!topo.has_link(0, 1));
        assert_eq!(topo.link_prr(0, 1), 0.0);
    }

    #[test]
    fn generated_topology_reaches_a_sink_from_every_sensor() {
        let mut config = cfg();
        config.n_nodes = 50;
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let topo = build_topology(&config, &mut rng).unwrap();
        // Independent BFS reachability check over the produced adjacency.
        assert!(topo.all_sensors_connected());
        assert_eq!(topo.n_total(), 52);
        assert!(topo.nodes[50].is_sink() && topo.nodes[51].is_sink());
    }

    #[test]
    fn adjacency_is_symmetric() {
        let mut config = cfg();
        config.n_nodes = 40;
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let topo = build_topology(&config, &mut rng).unwrap();
        for i in 0..topo.n_total() as NodeId {
            for &j in topo.neighbors(i) {
                assert!(topo.neighbors(j).contains(&i), "link {i}->{j} not mirrored");
                assert_eq!(topo.link_prr(i, j), topo.link_prr(j, i));
            }
        }
    }

    #[test]
    fn same_seed_same_topology() {
        let config = cfg();
        let a = build_topology(&config, &mut ChaCha12Rng::seed_from_u64(9)).unwrap();
        let b = build_topology(&config, &mut ChaCha12Rng::seed_from_u64(9)).unwrap();
        for (na, nb) in a.nodes.iter().zip(&b.nodes) {
            assert_eq!(na.pos, nb.pos);
        }
        for i in 0..a.n_total() as NodeId {
            assert_eq!(a.neighbors(i), b.neighbors(i));
            for &j in a.neighbors(i) {
                assert_eq!(a.link_prr(i, j), b.link_prr(i, j));
            }
        }
    }

    #[test]
    fn unreachable_placement_errors() {
        let mut config = cfg();
        config.n_nodes = 2;
        config.range_m = 0.001;
        let err = build_topology(&config, &mut ChaCha12Rng::seed_from_u64(2)).unwrap_err();
        assert!(matches!(err, SimError::TopologyUnreachable { .. }));
    }

    #[test]
    fn link_prr_profile_monotone_and_bounded() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let topo = Topology::from_positions(
            &[(0.0, 0.0), (0.0, 0.1), (0.0, 0.49)],
            &[],
            &cfg(),
            &mut rng,
        );
        let near = topo.link_prr(0, 1);
        let far = topo.link_prr(0, 2);
        assert!((0.45..=1.0).contains(&near));
        assert!((0.45..=1.0).contains(&far));
        assert!(near > far, "closer link should be more reliable: {near} vs {far}");
    }
}
