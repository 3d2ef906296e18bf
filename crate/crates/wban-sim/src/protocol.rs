//! The protocol interface shared by the flagship method and the comparison
//! protocols, plus the flagship implementation: link-state views assembled
//! from HELLO gossip, multi-criteria route selection, hotspot announcement
//! floods, and congestion-based route demotion.

use crate::config::{ProtocolKind, ScenarioConfig};
use crate::link::NeighborTable;
use crate::metrics::DropCause;
use crate::model::{ControlKind, NodeId, NodeState, Topology};
use crate::routing::{
    congestion_threshold, find_route, link_cost, update_rci, CostGraph, CostNorms, CostWeights,
    Route, RouteDecision,
};
use crate::scheduler::{QueueDiscipline, QueueEntry};

/// A control packet a protocol wants transmitted in the next control phase.
#[derive(Debug, Clone)]
pub struct ControlEmit {
    pub from: NodeId,
    /// Unicast target; None broadcasts to every in-range neighbor.
    pub to: Option<NodeId>,
    pub kind: ControlKind,
}

/// Read access to the shared world plus the control emission queue; what
/// protocol callbacks are allowed to touch.
pub struct ProtoEnv<'a> {
    pub cfg: &'a ScenarioConfig,
    pub topo: &'a Topology,
    pub nodes: &'a [NodeState],
    pub tables: &'a [NeighborTable],
    pub now: f64,
    pub control_out: &'a mut Vec<ControlEmit>,
    pub trace: &'a mut Vec<RouteDecision>,
}

/// What to do with the packet at the head of a queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardDecision {
    NextHop {
        to: NodeId,
        /// Destination sink to stamp on the packet, set on the first hop.
        set_dst: Option<NodeId>,
    },
    /// Keep queued (route discovery in progress).
    Buffer,
    Drop(DropCause),
}

/// Routing policy callbacks invoked by the engine. All four protocols run
/// under identical physics, traffic and seeds; only these differ.
pub trait Protocol {
    fn kind(&self) -> ProtocolKind;
    fn discipline(&self) -> QueueDiscipline;

    /// Whether overheated nodes enter sleep and stop relaying.
    fn uses_hotspot_sleep(&self) -> bool {
        false
    }

    fn on_start(&mut self, _env: &mut ProtoEnv) {}

    /// Called once per HELLO interval, after the engine queued the plain
    /// HELLO broadcasts; protocols add beacons, advertisements, and refresh
    /// their own gossip records here.
    fn on_hello_tick(&mut self, _env: &mut ProtoEnv) {}

    fn on_control_rx(
        &mut self,
        _at: NodeId,
        _from: NodeId,
        _kind: &ControlKind,
        _env: &mut ProtoEnv,
    ) {
    }

    fn forward(&mut self, at: NodeId, entry: &QueueEntry, env: &mut ProtoEnv) -> ForwardDecision;

    /// Outcome feedback for a data transmission (link break detection).
    fn on_data_tx_result(&mut self, _from: NodeId, _to: NodeId, _ok: bool, _env: &mut ProtoEnv) {}

    /// The source put one of its own packets on the air (congestion index).
    fn on_data_sent_by_source(&mut self, _src: NodeId) {}

    fn on_sleep_transition(&mut self, _node: NodeId, _asleep: bool, _env: &mut ProtoEnv) {}

    /// Start of every TDMA frame; recompute routes marked dirty.
    fn on_frame_start(&mut self, _env: &mut ProtoEnv) {}

    fn on_route_refresh(&mut self, _env: &mut ProtoEnv) {}

    fn on_rci_window(&mut self, _env: &mut ProtoEnv) {}

    /// TDMA weight of a node given its queued emergency fraction.
    fn slot_weight(&self, _node: NodeId, _emergency_fraction: f64) -> f64 {
        1.0
    }

    /// Whether the node's primary route is currently demoted.
    fn primary_demoted(&self, _node: NodeId, _now: f64) -> bool {
        false
    }
}

/// What one node believes about another, gossiped inside HELLOs. `links`
/// holds the measurements taken at the record's origin: for each heard
/// peer, the reception ratio of peer-to-origin and the origin's smoothed
/// delay toward that peer.
#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub version: u64,
    pub refreshed_s: f64,
    pub energy_j: f64,
    pub temperature_c: f64,
    pub asleep: bool,
    pub dead: bool,
    pub hotspot_seq: u64,
    pub links: Vec<(NodeId, f64, f64)>,
}

impl NodeRecord {
    fn skeleton(t_body: f64, e_initial: f64) -> Self {
        NodeRecord {
            version: 0,
            refreshed_s: 0.0,
            energy_j: e_initial,
            temperature_c: t_body,
            asleep: false,
            dead: false,
            hotspot_seq: 0,
            links: Vec::new(),
        }
    }
}

/// A node's assembled picture of the whole network.
#[derive(Debug, Clone)]
pub struct NetworkView {
    pub records: Vec<Option<NodeRecord>>,
}

impl NetworkView {
    fn new(n: usize) -> Self {
        NetworkView { records: vec![None; n] }
    }

    /// Adopt every newer record from `other`. Returns true when a change
    /// was material: a new node, a sleep/death flip, or a relative move in
    /// energy or temperature beyond `dirty_threshold`.
    fn merge_from(&mut self, other: &NetworkView, dirty_threshold: f64) -> bool {
        let mut material = false;
        for (slot, theirs) in self.records.iter_mut().zip(&other.records) {
            let Some(theirs) = theirs else { continue };
            match slot {
                None => {
                    *slot = Some(theirs.clone());
                    material = true;
                }
                Some(mine) => {
                    if theirs.version > mine.version {
                        let rel = |a: f64, b: f64| {
                            if b == 0.0 {
                                if a == 0.0 {
                                    0.0
                                } else {
                                    f64::INFINITY
                                }
                            } else {
                                ((a - b) / b).abs()
                            }
                        };
                        if mine.asleep != theirs.asleep
                            || mine.dead != theirs.dead
                            || rel(theirs.energy_j, mine.energy_j) > dirty_threshold
                            || rel(theirs.temperature_c, mine.temperature_c) > dirty_threshold
                        {
                            material = true;
                        }
                        let keep_seq = mine.hotspot_seq;
                        let keep_asleep = mine.asleep;
                        *mine = theirs.clone();
                        if keep_seq > mine.hotspot_seq {
                            mine.hotspot_seq = keep_seq;
                            mine.asleep = keep_asleep;
                        }
                    } else if theirs.hotspot_seq > mine.hotspot_seq {
                        mine.hotspot_seq = theirs.hotspot_seq;
                        if mine.asleep != theirs.asleep {
                            mine.asleep = theirs.asleep;
                            material = true;
                        }
                    }
                }
            }
        }
        material
    }

    /// Apply a hotspot notice; returns true the first time this (origin,
    /// seq) is seen, which is the flood re-broadcast trigger.
    fn apply_notice(
        &mut self,
        origin: NodeId,
        seq: u64,
        asleep: bool,
        t_body: f64,
        e_init: f64,
    ) -> bool {
        let rec = self.records[origin as usize]
            .get_or_insert_with(|| NodeRecord::skeleton(t_body, e_init));
        if seq > rec.hotspot_seq {
            rec.hotspot_seq = seq;
            rec.asleep = asleep;
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, Default)]
struct SourceRouteState {
    primary: Option<Route>,
    secondary: Option<Route>,
    demoted_until: Option<f64>,
    sent_in_window: u64,
    divert_target: Option<NodeId>,
}

/// The flagship protocol.
pub struct Proposed {
    weights: CostWeights,
    norms: CostNorms,
    views: Vec<NetworkView>,
    state: Vec<SourceRouteState>,
    dirty: Vec<bool>,
    /// Nodes that have computed at least one route; before that, a missing
    /// route means the view has not converged yet, not unreachability.
    had_route: Vec<bool>,
    hello_round: u64,
    notice_seq: u64,
    rci_threshold: Option<f64>,
    default_delay_s: f64,
}

impl Proposed {
    pub fn new(cfg: &ScenarioConfig, n_total: usize) -> Self {
        Proposed {
            weights: CostWeights::from_config(cfg),
            norms: CostNorms::from_config(cfg),
            views: vec![NetworkView::new(n_total); n_total],
            state: vec![SourceRouteState::default(); n_total],
            dirty: vec![true; n_total],
            had_route: vec![false; n_total],
            hello_round: 0,
            notice_seq: 0,
            rci_threshold: None,
            default_delay_s: cfg.packet_size_bits() as f64 / cfg.link_rate_bps,
        }
    }

    /// Refresh a node's own gossip record from its live state and table.
    fn refresh_own_record(&mut self, node: NodeId, env: &ProtoEnv) {
        let ns = &env.nodes[node as usize];
        let links: Vec<(NodeId, f64, f64)> = env.tables[node as usize]
            .iter()
            .map(|e| (e.neighbor, e.prr(), e.delay_s.unwrap_or(self.default_delay_s)))
            .collect();
        let view = &mut self.views[node as usize];
        let prev_seq = view.records[node as usize].as_ref().map_or(0, |r| r.hotspot_seq);
        view.records[node as usize] = Some(NodeRecord {
            version: self.hello_round + 1,
            refreshed_s: env.now,
            energy_j: ns.energy_j,
            temperature_c: ns.temperature_c,
            asleep: ns.asleep,
            dead: ns.is_dead(),
            hotspot_seq: prev_seq,
            links,
        });
    }

    /// Cost graph as seen from one node's view. Edges into sleeping or dead
    /// nodes are absent; sinks always terminate.
    fn build_graph(&self, node: NodeId, env: &ProtoEnv) -> CostGraph {
        let n = env.topo.n_total();
        let view = &self.views[node as usize];
        let mut g = CostGraph::new(n, env.topo.sink_ids().collect());
        for j in 0..n {
            let Some(rec_j) = &view.records[j] else { continue };
            let j_id = j as NodeId;
            if rec_j.dead || (rec_j.asleep && !env.topo.nodes[j].is_sink()) {
                continue;
            }
            for &(peer, prr_in, _) in &rec_j.links {
                let delay = view.records[peer as usize]
                    .as_ref()
                    .and_then(|r| r.links.iter().find(|(p, _, _)| *p == j_id))
                    .map(|(_, _, d)| *d)
                    .unwrap_or(self.default_delay_s);
                let cost = link_cost(
                    rec_j.temperature_c,
                    prr_in,
                    rec_j.energy_j,
                    delay,
                    &self.weights,
                    &self.norms,
                );
                if cost.is_finite() {
                    g.add_edge(peer, j_id, cost);
                }
            }
        }
        g
    }

    fn recompute_route(&mut self, node: NodeId, trigger: &'static str, env: &mut ProtoEnv) {
        if env.nodes[node as usize].is_dead() || env.nodes[node as usize].is_sink() {
            return;
        }
        let graph = self.build_graph(node, env);
        let route = find_route(node, &graph, &[]);
        if let Some(r) = &route {
            env.trace.push(RouteDecision {
                time_s: env.now,
                src: node,
                hops: r.hops.clone(),
                cost: r.cost,
                trigger,
            });
        }
        if route.is_some() {
            self.had_route[node as usize] = true;
        }
        let st = &mut self.state[node as usize];
        st.primary = route;
        if st.demoted_until.is_none() {
            st.secondary = None;
        }
    }

    /// Second-best path: the primary's links cost-multiplied by the
    /// demotion factor, so an alternative wins only when it beats the
    /// demoted primary.
    fn compute_secondary(&mut self, node: NodeId, env: &mut ProtoEnv) {
        let Some(primary) = self.state[node as usize].primary.clone() else { return };
        let mut graph = self.build_graph(node, env);
        for pair in primary.hops.windows(2) {
            graph.scale_edge(pair[0], pair[1], env.cfg.demotion_factor);
        }
        let alt = find_route(node, &graph, &[]);
        let st = &mut self.state[node as usize];
        st.secondary = match alt {
            Some(r) if r.hops != primary.hops => {
                env.trace.push(RouteDecision {
                    time_s: env.now,
                    src: node,
                    hops: r.hops.clone(),
                    cost: r.cost,
                    trigger: "demote",
                });
                Some(r)
            }
            // Demotion never removes the only available route.
            _ => None,
        };
    }

    /// The coolest awake neighbor that still has a path to a sink, used
    /// when this node overheats. Ties break toward the cheaper link.
    fn pick_divert_target(&self, node: NodeId, env: &ProtoEnv) -> Option<NodeId> {
        let view = &self.views[node as usize];
        let graph = self.build_graph(node, env);
        let mut best: Option<(f64, f64, NodeId)> = None;
        let consider = |cand: (f64, f64, NodeId), best: &mut Option<(f64, f64, NodeId)>| {
            let better = match best {
                None => true,
                Some(b) => {
                    cand.0 < b.0 || (cand.0 == b.0 && (cand.1 < b.1 || (cand.1 == b.1 && cand.2 < b.2)))
                }
            };
            if better {
                *best = Some(cand);
            }
        };
        for entry in env.tables[node as usize].iter() {
            let nb = entry.neighbor;
            if nb == node {
                continue;
            }
            if env.topo.nodes[nb as usize].is_sink() {
                // A sink neighbor is the ideal stable target.
                consider((f64::NEG_INFINITY, 0.0, nb), &mut best);
                continue;
            }
            let rec = view.records[nb as usize].as_ref();
            let asleep = rec.map_or(entry.hotspot, |r| r.asleep);
            let dead = rec.map_or(false, |r| r.dead);
            if dead || asleep {
                continue;
            }
            if find_route(nb, &graph, &[node]).is_none() {
                continue;
            }
            let temp = rec.map_or(entry.reported_temp_c, |r| r.temperature_c);
            let cost = link_cost(
                temp,
                entry.prr(),
                rec.map_or(entry.reported_energy_j, |r| r.energy_j),
                entry.delay_s.unwrap_or(self.default_delay_s),
                &self.weights,
                &self.norms,
            );
            consider((temp, cost, nb), &mut best);
        }
        best.map(|(_, _, nb)| nb)
    }

    fn next_hop_ok(&self, node: NodeId, hop: NodeId, env: &ProtoEnv) -> bool {
        if env.topo.nodes[hop as usize].is_sink() {
            return true;
        }
        match &self.views[node as usize].records[hop as usize] {
            Some(r) => !r.dead && !r.asleep,
            None => true,
        }
    }
}

impl Protocol for Proposed {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Proposed
    }

    fn discipline(&self) -> QueueDiscipline {
        QueueDiscipline::WaitingScore
    }

    fn uses_hotspot_sleep(&self) -> bool {
        true
    }

    fn on_start(&mut self, env: &mut ProtoEnv) {
        for node in 0..env.topo.n_total() as NodeId {
            self.refresh_own_record(node, env);
        }
    }

    fn on_hello_tick(&mut self, env: &mut ProtoEnv) {
        self.hello_round += 1;
        for node in 0..env.topo.n_total() as NodeId {
            if !env.nodes[node as usize].is_dead() {
                self.refresh_own_record(node, env);
            }
        }
    }

    fn on_control_rx(&mut self, at: NodeId, from: NodeId, kind: &ControlKind, env: &mut ProtoEnv) {
        match kind {
            ControlKind::Hello => {
                let (a, f) = (at as usize, from as usize);
                if a == f {
                    return;
                }
                let (lo, hi) = (a.min(f), a.max(f));
                let (head, tail) = self.views.split_at_mut(hi);
                let (mine, theirs) =
                    if a < f { (&mut head[lo], &tail[0]) } else { (&mut tail[0], &head[lo]) };
                if mine.merge_from(theirs, env.cfg.route_dirty_threshold) {
                    self.dirty[a] = true;
                }
            }
            ControlKind::HotspotNotice { origin, seq, asleep } => {
                let fresh = self.views[at as usize].apply_notice(
                    *origin,
                    *seq,
                    *asleep,
                    env.cfg.t_body_c,
                    env.cfg.initial_energy_j,
                );
                if fresh {
                    self.dirty[at as usize] = true;
                    env.control_out.push(ControlEmit { from: at, to: None, kind: kind.clone() });
                }
            }
            _ => {}
        }
    }

    fn forward(&mut self, at: NodeId, entry: &QueueEntry, env: &mut ProtoEnv) -> ForwardDecision {
        let ns = &env.nodes[at as usize];
        let hot = ns.asleep || ns.temperature_c > env.cfg.t_thresh_c;
        if hot && !ns.is_sink() {
            // Hand traffic to the nearest stable node.
            let target = match self.state[at as usize].divert_target {
                Some(t) if self.next_hop_ok(at, t, env) => Some(t),
                _ => {
                    let t = self.pick_divert_target(at, env);
                    self.state[at as usize].divert_target = t;
                    t
                }
            };
            return match target {
                Some(t) if !entry.packet.hops.contains(&t) => {
                    ForwardDecision::NextHop { to: t, set_dst: None }
                }
                Some(_) => ForwardDecision::Drop(DropCause::RoutingLoop),
                None => ForwardDecision::Drop(DropCause::NoForwarder),
            };
        }

        if self.state[at as usize].primary.is_none() || self.dirty[at as usize] {
            self.recompute_route(at, "forward", env);
            self.dirty[at as usize] = false;
        }
        let st = &self.state[at as usize];
        let demoted = st.demoted_until.map_or(false, |until| env.now < until);
        let route =
            if demoted && st.secondary.is_some() { st.secondary.as_ref() } else { st.primary.as_ref() };
        let Some(route) = route else {
            // Cold start: the gossip view is still assembling.
            if !self.had_route[at as usize] {
                return ForwardDecision::Buffer;
            }
            return ForwardDecision::Drop(DropCause::NoRoute);
        };
        let mut hop = route.hops[1];
        let mut dst = route.sink();
        if !self.next_hop_ok(at, hop, env) {
            // Stale route: the chosen relay slept or died since selection.
            self.recompute_route(at, "stale", env);
            let st = &self.state[at as usize];
            let Some(route) = st.primary.as_ref() else {
                return ForwardDecision::Drop(DropCause::NoRoute);
            };
            hop = route.hops[1];
            dst = route.sink();
            if !self.next_hop_ok(at, hop, env) {
                return ForwardDecision::Drop(DropCause::NoRoute);
            }
        }
        if entry.packet.hops.contains(&hop) {
            // View disagreement ping-pong: route around the nodes this
            // packet has already visited.
            let graph = self.build_graph(at, env);
            match find_route(at, &graph, &entry.packet.hops) {
                Some(r) if self.next_hop_ok(at, r.hops[1], env) => {
                    hop = r.hops[1];
                    dst = r.sink();
                }
                _ => return ForwardDecision::Drop(DropCause::RoutingLoop),
            }
        }
        ForwardDecision::NextHop { to: hop, set_dst: Some(dst) }
    }

    fn on_data_sent_by_source(&mut self, src: NodeId) {
        self.state[src as usize].sent_in_window += 1;
    }

    fn on_sleep_transition(&mut self, node: NodeId, asleep: bool, env: &mut ProtoEnv) {
        self.notice_seq += 1;
        let seq = self.notice_seq;
        self.views[node as usize].apply_notice(
            node,
            seq,
            asleep,
            env.cfg.t_body_c,
            env.cfg.initial_energy_j,
        );
        env.control_out.push(ControlEmit {
            from: node,
            to: None,
            kind: ControlKind::HotspotNotice { origin: node, seq, asleep },
        });
        if asleep {
            self.state[node as usize].divert_target = self.pick_divert_target(node, env);
        } else {
            self.state[node as usize].divert_target = None;
        }
        self.dirty[node as usize] = true;
    }

    fn on_frame_start(&mut self, env: &mut ProtoEnv) {
        for node in 0..env.topo.n_total() as NodeId {
            if self.dirty[node as usize] {
                self.recompute_route(node, "update", env);
                self.dirty[node as usize] = false;
            }
        }
    }

    fn on_route_refresh(&mut self, env: &mut ProtoEnv) {
        for node in 0..env.topo.n_total() as NodeId {
            self.recompute_route(node, "refresh", env);
            self.dirty[node as usize] = false;
        }
    }

    fn on_rci_window(&mut self, env: &mut ProtoEnv) {
        let tau = env.cfg.rci_tau_s;
        if self.rci_threshold.is_none() {
            // Initialization phase: observe the mean index over the active
            // routes, then freeze the threshold.
            let mut sum = 0.0;
            let mut n = 0u64;
            for st in &self.state {
                if st.primary.is_some() && st.sent_in_window > 0 {
                    sum += st.sent_in_window as f64 / tau;
                    n += 1;
                }
            }
            if n > 0 {
                self.rci_threshold = Some(congestion_threshold(sum / n as f64, env.cfg.lambda));
            }
        } else {
            let threshold = self.rci_threshold.unwrap();
            for node in 0..self.state.len() {
                if let Some(until) = self.state[node].demoted_until {
                    if env.now >= until {
                        // Instant recovery at window expiry.
                        self.state[node].demoted_until = None;
                        self.state[node].secondary = None;
                        if let Some(r) = self.state[node].primary.as_mut() {
                            r.demoted_until = None;
                        }
                        self.dirty[node] = true;
                    }
                }
                let sent = self.state[node].sent_in_window;
                let not_demoted = self.state[node].demoted_until.is_none();
                let mut demote = false;
                if let Some(route) = self.state[node].primary.as_mut() {
                    update_rci(route, sent, tau);
                    if route.rci > threshold && not_demoted {
                        route.demoted_until = Some(env.now + tau);
                        demote = true;
                    }
                }
                if demote {
                    self.state[node].demoted_until = Some(env.now + tau);
                    self.compute_secondary(node as NodeId, env);
                }
            }
        }
        for st in &mut self.state {
            st.sent_in_window = 0;
        }
    }

    fn slot_weight(&self, _node: NodeId, emergency_fraction: f64) -> f64 {
        1.0 + emergency_fraction
    }

    fn primary_demoted(&self, node: NodeId, now: f64) -> bool {
        self.state[node as usize].demoted_until.map_or(false, |until| now < until)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn view_merge_adopts_newer_records() {
        let mut a = NetworkView::new(3);
        let mut b = NetworkView::new(3);
        let mut rec = NodeRecord::skeleton(37.0, 100.0);
        rec.version = 5;
        rec.energy_j = 80.0;
        b.records[2] = Some(rec);
        assert!(a.merge_from(&b, 0.1));
        assert_eq!(a.records[2].as_ref().unwrap().energy_j, 80.0);
        // Re-merging the same data changes nothing.
        assert!(!a.merge_from(&b, 0.1));
    }

    #[test]
    fn view_merge_ignores_older_versions() {
        let mut a = NetworkView::new(2);
        let mut b = NetworkView::new(2);
        let mut newer = NodeRecord::skeleton(37.0, 100.0);
        newer.version = 9;
        newer.energy_j = 50.0;
        a.records[0] = Some(newer);
        let mut older = NodeRecord::skeleton(37.0, 100.0);
        older.version = 3;
        older.energy_j = 99.0;
        b.records[0] = Some(older);
        assert!(!a.merge_from(&b, 0.1));
        assert_eq!(a.records[0].as_ref().unwrap().energy_j, 50.0);
    }

    #[test]
    fn small_changes_are_not_material() {
        let mut a = NetworkView::new(1);
        let mut b = NetworkView::new(1);
        let mut r1 = NodeRecord::skeleton(37.0, 100.0);
        r1.version = 1;
        r1.energy_j = 100.0;
        a.records[0] = Some(r1.clone());
        let mut r2 = r1;
        r2.version = 2;
        r2.energy_j = 95.0; // 5% move, below the 10% threshold
        b.records[0] = Some(r2);
        assert!(!a.merge_from(&b, 0.1));
        assert_eq!(a.records[0].as_ref().unwrap().version, 2);
    }

    #[test]
    fn notices_dedup_by_sequence() {
        let mut v = NetworkView::new(2);
        assert!(v.apply_notice(1, 4, true, 37.0, 100.0));
        assert!(!v.apply_notice(1, 4, true, 37.0, 100.0));
        assert!(!v.apply_notice(1, 3, false, 37.0, 100.0));
        assert!(v.records[1].as_ref().unwrap().asleep);
        assert!(v.apply_notice(1, 5, false, 37.0, 100.0));
        assert!(!v.records[1].as_ref().unwrap().asleep);
    }

    #[test]
    fn notice_survives_older_record_merge() {
        let mut a = NetworkView::new(1);
        a.apply_notice(0, 7, true, 37.0, 100.0);
        let mut b = NetworkView::new(1);
        let mut rec = NodeRecord::skeleton(37.0, 100.0);
        rec.version = 3;
        rec.hotspot_seq = 2;
        rec.asleep = false;
        b.records[0] = Some(rec);
        a.merge_from(&b, 0.1);
        let mine = a.records[0].as_ref().unwrap();
        assert!(mine.asleep, "newer hotspot state must win over older gossip");
        assert_eq!(mine.hotspot_seq, 7);
    }
}
