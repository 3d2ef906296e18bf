//! Behaviorally representative comparison protocols. Each shares the
//! flagship's physics, traffic and HELLO machinery; only the routing policy
//! and its control traffic differ:
//!
//! - `EnsaBan`: greedy next hop maximizing reliability times residual
//!   energy among neighbors closer to a sink. Hop distances come from
//!   periodic sink beacon floods. No temperature or congestion awareness.
//! - `PAodv`: on-demand minimum-hop discovery (request flood plus unicast
//!   reply), routes cached until the next hop times out of the neighbor
//!   table (three silent HELLO intervals), class-priority queueing only.
//! - `Rrls`: link-stability routing; every node periodically floods its
//!   measured per-link reception ratios and routes by minimum sum of
//!   1/PRR. No energy, temperature, or congestion terms.

use std::collections::BTreeMap;

use crate::config::{ProtocolKind, ScenarioConfig};
use crate::metrics::DropCause;
use crate::model::{ControlKind, NodeId, Topology};
use crate::protocol::{ControlEmit, ForwardDecision, ProtoEnv, Protocol};
use crate::routing::{find_route, CostGraph, Route, RouteDecision};
use crate::scheduler::{QueueDiscipline, QueueEntry};

/// Greedy forwarding score: link reliability times normalized residual
/// energy of the candidate.
pub fn ensa_score(prr: f64, energy_j: f64, e_initial_j: f64) -> f64 {
    prr * (energy_j / e_initial_j)
}

/// Pick the best candidate by score, ties to the lowest node id.
/// Candidates are (id, prr, reported energy).
pub fn ensa_pick(candidates: &[(NodeId, f64, f64)], e_initial_j: f64) -> Option<NodeId> {
    candidates
        .iter()
        .map(|&(id, prr, e)| (id, ensa_score(prr, e, e_initial_j)))
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(id, _)| id)
}

/// Minimum-hop route over a graph, unit cost per link.
pub fn min_hop_route(src: NodeId, graph: &CostGraph) -> Option<Route> {
    let mut unit = CostGraph::new(graph.n(), graph.sinks().to_vec());
    for from in 0..graph.n() as NodeId {
        for &(to, _) in graph.out_edges(from) {
            unit.add_edge(from, to, 1.0);
        }
    }
    find_route(src, &unit, &[])
}

/// Stability route: minimum sum of 1/PRR over a reliability-annotated
/// graph whose edge values are raw reception ratios.
pub fn rrls_route_over(src: NodeId, prr_graph: &CostGraph) -> Option<Route> {
    let mut g = CostGraph::new(prr_graph.n(), prr_graph.sinks().to_vec());
    for from in 0..prr_graph.n() as NodeId {
        for &(to, prr) in prr_graph.out_edges(from) {
            if prr > 0.0 {
                g.add_edge(from, to, 1.0 / prr);
            }
        }
    }
    find_route(src, &g, &[])
}

pub struct EnsaBan {
    /// Latest committed hop distance to any sink, per node.
    hop_dist: Vec<u32>,
    beacon_round: u64,
    /// Per node: (round, best distance seen in that round).
    round_seen: Vec<(u64, u32)>,
    ticks: u64,
    beacon_every: u64,
}

impl EnsaBan {
    pub fn new(cfg: &ScenarioConfig, topo: &Topology) -> Self {
        let n = topo.n_total();
        let mut hop_dist = vec![u32::MAX; n];
        for s in topo.sink_ids() {
            hop_dist[s as usize] = 0;
        }
        EnsaBan {
            hop_dist,
            beacon_round: 0,
            round_seen: vec![(0, u32::MAX); n],
            ticks: 0,
            beacon_every: (cfg.beacon_interval_s / cfg.hello_interval_s).round().max(1.0) as u64,
        }
    }

    fn emit_beacons(&mut self, env: &mut ProtoEnv) {
        self.beacon_round += 1;
        for sink in env.topo.sink_ids() {
            env.control_out.push(ControlEmit {
                from: sink,
                to: None,
                kind: ControlKind::SinkBeacon { sink, round: self.beacon_round, hops: 0 },
            });
        }
    }
}

impl Protocol for EnsaBan {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::EnsaBan
    }

    fn discipline(&self) -> QueueDiscipline {
        QueueDiscipline::Fifo
    }

    fn on_start(&mut self, env: &mut ProtoEnv) {
        self.emit_beacons(env);
    }

    fn on_hello_tick(&mut self, env: &mut ProtoEnv) {
        self.ticks += 1;
        if self.ticks % self.beacon_every == 0 {
            self.emit_beacons(env);
        }
    }

    fn on_control_rx(&mut self, at: NodeId, _from: NodeId, kind: &ControlKind, env: &mut ProtoEnv) {
        let ControlKind::SinkBeacon { sink, round, hops } = kind else { return };
        if env.topo.nodes[at as usize].is_sink() {
            return;
        }
        let d = hops + 1;
        let (seen_round, seen_dist) = self.round_seen[at as usize];
        let improved = *round > seen_round || (*round == seen_round && d < seen_dist);
        if improved {
            self.round_seen[at as usize] = (*round, d);
            self.hop_dist[at as usize] = d;
            env.control_out.push(ControlEmit {
                from: at,
                to: None,
                kind: ControlKind::SinkBeacon { sink: *sink, round: *round, hops: d },
            });
        }
    }

    fn forward(&mut self, at: NodeId, _entry: &QueueEntry, env: &mut ProtoEnv) -> ForwardDecision {
        let my_dist = self.hop_dist[at as usize];
        let mut candidates: Vec<(NodeId, f64, f64)> = Vec::new();
        for e in env.tables[at as usize].iter() {
            let nb = e.neighbor;
            if self.hop_dist[nb as usize] >= my_dist {
                continue;
            }
            let energy = if env.topo.nodes[nb as usize].is_sink() {
                env.cfg.initial_energy_j
            } else {
                e.reported_energy_j.min(env.cfg.initial_energy_j)
            };
            if energy <= 0.0 {
                continue;
            }
            candidates.push((nb, e.prr(), energy));
        }
        match ensa_pick(&candidates, env.cfg.initial_energy_j) {
            Some(next) => ForwardDecision::NextHop { to: next, set_dst: None },
            None => ForwardDecision::Drop(DropCause::NoForwarder),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PendingDiscovery {
    started_s: f64,
    retry_gap_s: f64,
}

pub struct PAodv {
    /// Per node: destination sink to believed next hop.
    next_hop: Vec<BTreeMap<NodeId, NodeId>>,
    /// Per node: (origin, req id) to the neighbor the request arrived from.
    reverse: Vec<BTreeMap<(NodeId, u64), NodeId>>,
    pending: Vec<Option<PendingDiscovery>>,
    req_counter: u64,
    retry_after_s: f64,
}

impl PAodv {
    pub fn new(_cfg: &ScenarioConfig, topo: &Topology) -> Self {
        let n = topo.n_total();
        PAodv {
            next_hop: vec![BTreeMap::new(); n],
            reverse: vec![BTreeMap::new(); n],
            pending: vec![None; n],
            req_counter: 0,
            retry_after_s: 1.0,
        }
    }

    fn start_discovery(&mut self, node: NodeId, env: &mut ProtoEnv) {
        self.req_counter += 1;
        let req_id = self.req_counter;
        // Exponential backoff between repeat floods for the same need.
        let gap = match self.pending[node as usize] {
            Some(p) => (p.retry_gap_s * 2.0).min(16.0),
            None => self.retry_after_s,
        };
        self.pending[node as usize] =
            Some(PendingDiscovery { started_s: env.now, retry_gap_s: gap });
        env.control_out.push(ControlEmit {
            from: node,
            to: None,
            kind: ControlKind::RouteRequest { origin: node, req_id },
        });
    }
}

impl Protocol for PAodv {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::PAodv
    }

    fn discipline(&self) -> QueueDiscipline {
        QueueDiscipline::ClassPriority
    }

    fn on_control_rx(&mut self, at: NodeId, from: NodeId, kind: &ControlKind, env: &mut ProtoEnv) {
        match kind {
            ControlKind::RouteRequest { origin, req_id } => {
                if *origin == at {
                    return;
                }
                let key = (*origin, *req_id);
                if self.reverse[at as usize].contains_key(&key) {
                    return; // already forwarded this request
                }
                // Keep only the freshest request per origin.
                self.reverse[at as usize].retain(|(o, r), _| *o != *origin || *r >= *req_id);
                self.reverse[at as usize].insert(key, from);
                if env.topo.nodes[at as usize].is_sink() {
                    env.control_out.push(ControlEmit {
                        from: at,
                        to: Some(from),
                        kind: ControlKind::RouteReply { origin: *origin, req_id: *req_id, path: vec![at] },
                    });
                } else {
                    env.control_out.push(ControlEmit { from: at, to: None, kind: kind.clone() });
                }
            }
            ControlKind::RouteReply { origin, req_id, path } => {
                let sink = path[0];
                // Learn the forward route: the reply's transmitter leads there.
                self.next_hop[at as usize].insert(sink, from);
                if at == *origin {
                    self.pending[at as usize] = None;
                } else if let Some(&back) = self.reverse[at as usize].get(&(*origin, *req_id)) {
                    let mut path = path.clone();
                    path.push(at);
                    env.control_out.push(ControlEmit {
                        from: at,
                        to: Some(back),
                        kind: ControlKind::RouteReply { origin: *origin, req_id: *req_id, path },
                    });
                }
            }
            _ => {}
        }
    }

    fn forward(&mut self, at: NodeId, entry: &QueueEntry, env: &mut ProtoEnv) -> ForwardDecision {
        // A cached next hop is valid while it is still heard from; silence
        // for three HELLO intervals breaks every route through it.
        let heard: Vec<NodeId> = env.tables[at as usize].iter().map(|e| e.neighbor).collect();
        self.next_hop[at as usize].retain(|_, hop| heard.contains(hop));
        let table = &self.next_hop[at as usize];
        let chosen = match entry.packet.dst {
            Some(dst) => table.get(&dst).map(|&h| (dst, h)),
            None => table.iter().next().map(|(&d, &h)| (d, h)),
        };
        if let Some((dst, hop)) = chosen {
            if entry.packet.hops.contains(&hop) {
                return ForwardDecision::Drop(DropCause::RoutingLoop);
            }
            return ForwardDecision::NextHop { to: hop, set_dst: Some(dst) };
        }
        // No route: flood a discovery, retrying if the last one stalled.
        let needs_flood = match self.pending[at as usize] {
            None => true,
            Some(p) => env.now - p.started_s >= p.retry_gap_s,
        };
        if needs_flood {
            self.start_discovery(at, env);
        }
        ForwardDecision::Buffer
    }

}

pub struct Rrls {
    /// Per node: origin -> (round, links measured at origin as (peer, prr)).
    stability: Vec<BTreeMap<NodeId, (u64, Vec<(NodeId, f64)>)>>,
    routes: Vec<Option<Route>>,
    dirty: Vec<bool>,
    had_route: Vec<bool>,
    lsa_round: u64,
    ticks: u64,
    lsa_every: u64,
}

impl Rrls {
    pub fn new(cfg: &ScenarioConfig, topo: &Topology) -> Self {
        let n = topo.n_total();
        Rrls {
            stability: vec![BTreeMap::new(); n],
            routes: vec![None; n],
            dirty: vec![true; n],
            had_route: vec![false; n],
            lsa_round: 0,
            ticks: 0,
            lsa_every: (cfg.lsa_interval_s / cfg.hello_interval_s).round().max(1.0) as u64,
        }
    }

    fn emit_lsas(&mut self, env: &mut ProtoEnv) {
        self.lsa_round += 1;
        for node in 0..env.topo.n_total() as NodeId {
            if env.nodes[node as usize].is_dead() {
                continue;
            }
            let links: Vec<(NodeId, f64)> =
                env.tables[node as usize].iter().map(|e| (e.neighbor, e.prr())).collect();
            self.stability[node as usize].insert(node, (self.lsa_round, links.clone()));
            self.dirty[node as usize] = true;
            env.control_out.push(ControlEmit {
                from: node,
                to: None,
                kind: ControlKind::LinkStateAd { origin: node, round: self.lsa_round, links },
            });
        }
    }

    fn stability_graph(&self, node: NodeId, env: &ProtoEnv) -> CostGraph {
        let mut g = CostGraph::new(env.topo.n_total(), env.topo.sink_ids().collect());
        for (origin, (_, links)) in &self.stability[node as usize] {
            for &(peer, prr) in links {
                if prr > 0.0 {
                    // The origin measured peer-to-origin receptions.
                    g.add_edge(peer, *origin, 1.0 / prr);
                }
            }
        }
        g
    }

    fn recompute(&mut self, node: NodeId, trigger: &'static str, env: &mut ProtoEnv) {
        if env.nodes[node as usize].is_dead() || env.nodes[node as usize].is_sink() {
            return;
        }
        let g = self.stability_graph(node, env);
        let route = find_route(node, &g, &[]);
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
        self.routes[node as usize] = route;
    }
}

impl Protocol for Rrls {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Rrls
    }

    fn discipline(&self) -> QueueDiscipline {
        QueueDiscipline::Fifo
    }

    fn on_start(&mut self, env: &mut ProtoEnv) {
        self.emit_lsas(env);
    }

    fn on_hello_tick(&mut self, env: &mut ProtoEnv) {
        self.ticks += 1;
        if self.ticks % self.lsa_every == 0 {
            self.emit_lsas(env);
        }
    }

    fn on_control_rx(&mut self, at: NodeId, _from: NodeId, kind: &ControlKind, env: &mut ProtoEnv) {
        let ControlKind::LinkStateAd { origin, round, links } = kind else { return };
        if *origin == at {
            return;
        }
        let known = self.stability[at as usize].get(origin).map_or(0, |(r, _)| *r);
        if *round > known {
            self.stability[at as usize].insert(*origin, (*round, links.clone()));
            self.dirty[at as usize] = true;
            env.control_out.push(ControlEmit { from: at, to: None, kind: kind.clone() });
        }
    }

    fn forward(&mut self, at: NodeId, entry: &QueueEntry, env: &mut ProtoEnv) -> ForwardDecision {
        if self.routes[at as usize].is_none() || self.dirty[at as usize] {
            self.recompute(at, "forward", env);
            self.dirty[at as usize] = false;
        }
        let Some(route) = self.routes[at as usize].as_ref() else {
            if !self.had_route[at as usize] {
                return ForwardDecision::Buffer; // first advertisements still flooding
            }
            return ForwardDecision::Drop(DropCause::NoRoute);
        };
        let mut hop = route.hops[1];
        let mut dst = route.sink();
        if entry.packet.hops.contains(&hop) {
            // Stability views disagree along the path: detour around the
            // nodes this packet has already visited.
            let g = self.stability_graph(at, env);
            match find_route(at, &g, &entry.packet.hops) {
                Some(r) => {
                    hop = r.hops[1];
                    dst = r.sink();
                }
                None => return ForwardDecision::Drop(DropCause::RoutingLoop),
            }
        }
        ForwardDecision::NextHop { to: hop, set_dst: Some(dst) }
    }

    fn on_frame_start(&mut self, env: &mut ProtoEnv) {
        for node in 0..env.topo.n_total() as NodeId {
            if self.dirty[node as usize] {
                self.recompute(node, "update", env);
                self.dirty[node as usize] = false;
            }
        }
    }

    fn on_route_refresh(&mut self, env: &mut ProtoEnv) {
        for node in 0..env.topo.n_total() as NodeId {
            self.recompute(node, "refresh", env);
            self.dirty[node as usize] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_candidate_wins() {
        let picked = ensa_pick(&[(3, 0.9, 100.0), (5, 0.9, 50.0)], 100.0);
        assert_eq!(picked, Some(3));
    }

    #[test]
    fn score_tie_breaks_to_lower_id() {
        // prr 0.5 at full energy vs prr 1.0 at half energy: both score 0.5.
        let picked = ensa_pick(&[(7, 0.5, 100.0), (2, 1.0, 50.0)], 100.0);
        assert_eq!(picked, Some(2));
    }

    #[test]
    fn empty_candidate_set_is_none() {
        assert_eq!(ensa_pick(&[], 100.0), None);
    }

    #[test]
    fn ensa_score_is_product() {
        assert!((ensa_score(0.8, 50.0, 100.0) - 0.4).abs() < 1e-12);
    }

    /// The ten-node example topology used across the routing tests.
    fn example_graph() -> CostGraph {
        let mut g = CostGraph::new(10, vec![9]);
        let links =
            [(0, 1), (1, 2), (2, 3), (3, 9), (1, 4), (4, 9), (0, 5), (5, 6), (6, 7), (7, 8), (8, 9)];
        for (a, b) in links {
            g.add_edge(a, b, 1.0);
            g.add_edge(b, a, 1.0);
        }
        g
    }

    #[test]
    fn min_hop_ignores_costs() {
        let mut g = example_graph();
        // Make the short path expensive; min-hop must still take it.
        g.add_edge(1, 4, 50.0);
        g.add_edge(4, 9, 50.0);
        let r = min_hop_route(0, &g).unwrap();
        assert_eq!(r.hops, vec![0, 1, 4, 9]);
    }

    #[test]
    fn rrls_prefers_balanced_reliability() {
        // Two 2-hop routes: reliabilities (0.9, 0.9) vs (1.0, 0.6);
        // 1/0.9 + 1/0.9 = 2.22 beats 1/1 + 1/0.6 = 2.67.
        let mut g = CostGraph::new(4, vec![3]);
        g.add_edge(0, 1, 0.9);
        g.add_edge(1, 3, 0.9);
        g.add_edge(0, 2, 1.0);
        g.add_edge(2, 3, 0.6);
        let r = rrls_route_over(0, &g).unwrap();
        assert_eq!(r.hops, vec![0, 1, 3]);
        assert!((r.cost - (1.0 / 0.9 + 1.0 / 0.9)).abs() < 1e-12);
    }

    #[test]
    fn rrls_uniform_reliability_reduces_to_min_hop() {
        let mut g = CostGraph::new(10, vec![9]);
        let links =
            [(0, 1), (1, 2), (2, 3), (3, 9), (1, 4), (4, 9), (0, 5), (5, 6), (6, 7), (7, 8), (8, 9)];
        for (a, b) in links {
            g.add_edge(a, b, 1.0);
            g.add_edge(b, a, 1.0);
        }
        let r = rrls_route_over(0, &g).unwrap();
        assert_eq!(r.hops, vec![0, 1, 4, 9]);
    }
}
