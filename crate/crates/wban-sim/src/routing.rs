//! Path selection: the multi-criteria link cost, minimum-cost route search
//! toward the cheapest sink, hotspot exclusion, and the congestion index
//! used to demote overused routes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::config::ScenarioConfig;
use crate::model::NodeId;

/// Non-negative weights for the four cost terms: temperature, inverse
/// reliability, inverse energy, delay.
#[derive(Debug, Clone, Copy)]
pub struct CostWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
}

impl CostWeights {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let (w1, w2, w3, w4) = cfg.weights();
        CostWeights { w1, w2, w3, w4 }
    }
}

/// Per-metric normalization constants. The four cost terms carry
/// incompatible units, so each is mapped to a dimensionless scale before
/// weighting; `raw_units` disables that for fidelity experiments.
#[derive(Debug, Clone, Copy)]
pub struct CostNorms {
    pub t_body: f64,
    pub t_thresh: f64,
    pub e_initial: f64,
    pub d_ref: f64,
    pub raw_units: bool,
}

impl CostNorms {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        CostNorms {
            t_body: cfg.t_body_c,
            t_thresh: cfg.t_thresh_c,
            e_initial: cfg.initial_energy_j,
            d_ref: cfg.d_ref_s,
            raw_units: cfg.cost_raw_units,
        }
    }
}

/// Saturation of the normalized delay term. Queue-driven delay estimates
/// can reach tens of D_ref under load; uncapped they drown the other three
/// terms and push routes into ever longer detours, which feeds the very
/// congestion being avoided.
pub const DELAY_TERM_CAP: f64 = 5.0;

/// Cost of forwarding over one link, using the next hop's reported
/// temperature and energy (forwarding burdens the receiver) and the
/// sender's measured reliability and delay toward it. Links with zero
/// reliability or a drained next hop cost infinity rather than erroring.
pub fn link_cost(
    next_hop_temp_c: f64,
    prr: f64,
    next_hop_energy_j: f64,
    delay_s: f64,
    w: &CostWeights,
    norms: &CostNorms,
) -> f64 {
    if prr <= 0.0 || next_hop_energy_j <= 0.0 {
        return f64::INFINITY;
    }
    if norms.raw_units {
        return w.w1 * next_hop_temp_c
            + w.w2 * (1.0 / prr)
            + w.w3 * (1.0 / next_hop_energy_j)
            + w.w4 * delay_s;
    }
    let t_hat = ((next_hop_temp_c - norms.t_body) / (norms.t_thresh - norms.t_body)).max(0.0);
    let e_hat = next_hop_energy_j / norms.e_initial;
    let d_hat = (delay_s / norms.d_ref).min(DELAY_TERM_CAP);
    w.w1 * t_hat + w.w2 * (1.0 / prr) + w.w3 * (1.0 / e_hat) + w.w4 * d_hat
}

/// A directed cost-annotated graph over node ids, the input to route search.
#[derive(Debug, Clone)]
pub struct CostGraph {
    /// Outgoing edges per node: (next hop, cost). Sorted by next hop id.
    edges: Vec<Vec<(NodeId, f64)>>,
    sinks: Vec<NodeId>,
}

impl CostGraph {
    pub fn new(n: usize, sinks: Vec<NodeId>) -> Self {
        CostGraph { edges: vec![Vec::new(); n], sinks }
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, cost: f64) {
        let list = &mut self.edges[from as usize];
        match list.binary_search_by_key(&to, |(id, _)| *id) {
            Ok(i) => list[i].1 = cost,
            Err(i) => list.insert(i, (to, cost)),
        }
    }

    pub fn edge_cost(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.edges[from as usize]
            .binary_search_by_key(&to, |(id, _)| *id)
            .ok()
            .map(|i| self.edges[from as usize][i].1)
    }

    pub fn scale_edge(&mut self, from: NodeId, to: NodeId, factor: f64) {
        if let Ok(i) = self.edges[from as usize].binary_search_by_key(&to, |(id, _)| *id) {
            self.edges[from as usize][i].1 *= factor;
        }
    }

    pub fn n(&self) -> usize {
        self.edges.len()
    }

    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    pub fn is_sink(&self, id: NodeId) -> bool {
        self.sinks.contains(&id)
    }

    pub fn out_edges(&self, from: NodeId) -> &[(NodeId, f64)] {
        &self.edges[from as usize]
    }

    /// Drop every edge incident to a reported hotspot. Sinks are never
    /// removable, and callers protect the packet source by passing it in
    /// `keep`; a hot source still originates its own traffic.
    pub fn exclude_hotspots(&self, hotspots: &[NodeId], keep: &[NodeId]) -> CostGraph {
        let removable =
            |id: NodeId| hotspots.contains(&id) && !self.is_sink(id) && !keep.contains(&id);
        let mut out = CostGraph::new(self.n(), self.sinks.clone());
        for from in 0..self.n() as NodeId {
            if removable(from) {
                continue;
            }
            for &(to, cost) in self.out_edges(from) {
                if !removable(to) {
                    out.add_edge(from, to, cost);
                }
            }
        }
        out
    }
}

/// An ordered node sequence from a source to a sink, with its selection
/// cost and congestion bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub hops: Vec<NodeId>,
    pub cost: f64,
    /// Packets-per-tau congestion index from the last window.
    pub rci: f64,
    pub demoted_until: Option<f64>,
}

impl Route {
    pub fn sink(&self) -> NodeId {
        *self.hops.last().expect("route has at least the source")
    }

    pub fn next_hop_after(&self, node: NodeId) -> Option<NodeId> {
        let idx = self.hops.iter().position(|&h| h == node)?;
        self.hops.get(idx + 1).copied()
    }

    pub fn is_demoted(&self, now: f64) -> bool {
        matches!(self.demoted_until, Some(until) if now < until)
    }

    /// Interior nodes: everything but the source and the sink.
    pub fn relays(&self) -> &[NodeId] {
        if self.hops.len() <= 2 {
            &[]
        } else {
            &self.hops[1..self.hops.len() - 1]
        }
    }
}

/// Search label ordered lexicographically by (cost, hops, max node id) so
/// equal-cost ties resolve deterministically: fewer hops first, then the
/// path whose largest node id is smallest.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Label {
    cost: f64,
    hops: u32,
    max_id: NodeId,
}

impl Label {
    const UNREACHED: Label = Label { cost: f64::INFINITY, hops: u32::MAX, max_id: NodeId::MAX };

    fn extend(&self, edge_cost: f64, to: NodeId) -> Label {
        Label {
            cost: self.cost + edge_cost,
            hops: self.hops + 1,
            max_id: self.max_id.max(to),
        }
    }

    fn cmp_total(&self, other: &Label) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.hops.cmp(&other.hops))
            .then_with(|| self.max_id.cmp(&other.max_id))
    }
}

#[derive(PartialEq)]
struct HeapItem {
    label: Label,
    node: NodeId,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we need the smallest label.
        other
            .label
            .cmp_total(&self.label)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-total-cost path from `src` to the cheapest reachable sink over
/// the graph with `excluded` nodes removed (the source and sinks are never
/// excluded). Returns None when no sink is reachable.
pub fn find_route(src: NodeId, graph: &CostGraph, excluded: &[NodeId]) -> Option<Route> {
    let n = graph.n();
    let blocked = |id: NodeId| id != src && !graph.is_sink(id) && excluded.contains(&id);

    let mut best = vec![Label::UNREACHED; n];
    let mut prev: Vec<Option<NodeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let start = Label { cost: 0.0, hops: 0, max_id: src };
    best[src as usize] = start;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem { label: start, node: src });

    while let Some(HeapItem { label, node }) = heap.pop() {
        if settled[node as usize] {
            continue;
        }
        settled[node as usize] = true;
        if graph.is_sink(node) {
            // Sinks terminate routes; do not relax through them.
            continue;
        }
        for &(to, cost) in graph.out_edges(node) {
            if !cost.is_finite() || blocked(to) || settled[to as usize] {
                continue;
            }
            let cand = label.extend(cost, to);
            if cand.cmp_total(&best[to as usize]) == Ordering::Less {
                best[to as usize] = cand;
                prev[to as usize] = Some(node);
                heap.push(HeapItem { label: cand, node: to });
            }
        }
    }

    let sink = graph
        .sinks()
        .iter()
        .copied()
        .filter(|&s| best[s as usize].cost.is_finite())
        .min_by(|&a, &b| best[a as usize].cmp_total(&best[b as usize]).then(a.cmp(&b)))?;

    let mut hops = vec![sink];
    let mut cur = sink;
    while let Some(p) = prev[cur as usize] {
        hops.push(p);
        cur = p;
    }
    hops.reverse();
    debug_assert_eq!(hops[0], src);
    Some(Route { hops, cost: best[sink as usize].cost, rci: 0.0, demoted_until: None })
}

/// Congestion index over an observation window: packets sent per second.
pub fn update_rci(route: &mut Route, packets_sent_in_window: u64, tau_s: f64) {
    route.rci = packets_sent_in_window as f64 / tau_s;
}

/// Demotion threshold: a tunable multiple of the mean index observed during
/// the initialization window.
pub fn congestion_threshold(mean_rci: f64, lambda: f64) -> f64 {
    lambda * mean_rci
}

/// One route decision for the trace log.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteDecision {
    pub time_s: f64,
    pub src: NodeId,
    pub hops: Vec<NodeId>,
    pub cost: f64,
    pub trigger: &'static str,
}

impl RouteDecision {
    /// One delimited line: `time|src|hops|cost|trigger` with hops dash-joined.
    pub fn to_line(&self) -> String {
        let mut hops = String::new();
        for (i, h) in self.hops.iter().enumerate() {
            if i > 0 {
                hops.push('-');
            }
            let _ = write!(hops, "{h}");
        }
        format!("{:.6}|{}|{}|{:.6}|{}", self.time_s, self.src, hops, self.cost, self.trigger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weights(w1: f64, w2: f64, w3: f64, w4: f64) -> CostWeights {
        CostWeights { w1, w2, w3, w4 }
    }

    fn norms() -> CostNorms {
        CostNorms { t_body: 37.0, t_thresh: 39.0, e_initial: 100.0, d_ref: 0.1, raw_units: false }
    }

    #[test]
    fn single_term_reliability_cost() {
        let c = link_cost(37.0, 0.5, 100.0, 0.0, &weights(0.0, 1.0, 0.0, 0.0), &norms());
        assert!((c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hotter_next_hop_costs_more() {
        let w = weights(0.3, 0.3, 0.2, 0.2);
        let cool = link_cost(37.5, 0.9, 80.0, 0.01, &w, &norms());
        let hot = link_cost(38.5, 0.9, 80.0, 0.01, &w, &norms());
        assert!(hot > cool);
    }

    #[test]
    fn normalized_cost_matches_hand_evaluation() {
        // T_hat 0.5, prr 0.8, E_hat 0.5, D_hat 0.1 with equal weights.
        let c = link_cost(38.0, 0.8, 50.0, 0.01, &weights(0.25, 0.25, 0.25, 0.25), &norms());
        assert!((c - 0.9625).abs() < 1e-12, "{c}");
    }

    #[test]
    fn drained_or_unreachable_next_hop_is_infinite() {
        let w = weights(0.25, 0.25, 0.25, 0.25);
        assert!(link_cost(37.0, 0.0, 50.0, 0.01, &w, &norms()).is_infinite());
        assert!(link_cost(37.0, 0.9, 0.0, 0.01, &w, &norms()).is_infinite());
    }

    /// The ten-node example topology: three candidate paths from node 0 to
    /// the sink 9 (0-1-4-9 short, 0-1-2-3-9 middle, 0-5-6-7-8-9 long).
    fn example_graph(cost: f64) -> CostGraph {
        let mut g = CostGraph::new(10, vec![9]);
        let links = [(0, 1), (1, 2), (2, 3), (3, 9), (1, 4), (4, 9), (0, 5), (5, 6), (6, 7), (7, 8), (8, 9)];
        for (a, b) in links {
            g.add_edge(a, b, cost);
            g.add_edge(b, a, cost);
        }
        g
    }

    #[test]
    fn uniform_costs_pick_fewest_hops() {
        let g = example_graph(1.0);
        let r = find_route(0, &g, &[]).unwrap();
        assert_eq!(r.hops, vec![0, 1, 4, 9]);
        assert!((r.cost - 3.0).abs() < 1e-12);
    }

    #[test]
    fn excluding_the_middle_relay_falls_back_to_second_path() {
        let g = example_graph(1.0);
        let filtered = g.exclude_hotspots(&[4], &[]);
        let r = find_route(0, &filtered, &[]).unwrap();
        assert_eq!(r.hops, vec![0, 1, 2, 3, 9]);
    }

    #[test]
    fn excluding_both_relays_uses_long_path() {
        let g = example_graph(1.0);
        let r = find_route(0, &g, &[4, 1]).unwrap();
        assert_eq!(r.hops, vec![0, 5, 6, 7, 8, 9]);
    }

    #[test]
    fn empty_hotspot_set_keeps_graph() {
        let g = example_graph(1.0);
        let same = g.exclude_hotspots(&[], &[]);
        for v in 0..10 {
            assert_eq!(g.out_edges(v), same.out_edges(v));
        }
    }

    #[test]
    fn no_route_when_all_sinks_cut_off() {
        let g = example_graph(1.0);
        let r = find_route(0, &g, &[1, 5]);
        assert!(r.is_none());
    }

    #[test]
    fn single_link_route() {
        let mut g = CostGraph::new(2, vec![1]);
        g.add_edge(0, 1, 0.7);
        let r = find_route(0, &g, &[]).unwrap();
        assert_eq!(r.hops, vec![0, 1]);
        assert!((r.cost - 0.7).abs() < 1e-12);
    }

    #[test]
    fn routes_never_relay_through_sinks() {
        // 0 - sink2 - 1 - sink3: node 0 must not reach sink 3 via sink 2.
        let mut g = CostGraph::new(4, vec![2, 3]);
        g.add_edge(0, 2, 1.0);
        g.add_edge(2, 1, 1.0);
        g.add_edge(1, 3, 1.0);
        let r = find_route(0, &g, &[]).unwrap();
        assert_eq!(r.hops, vec![0, 2]);
    }

    #[test]
    fn infinite_edges_are_ignored() {
        let mut g = CostGraph::new(3, vec![2]);
        g.add_edge(0, 1, f64::INFINITY);
        g.add_edge(1, 2, 1.0);
        assert!(find_route(0, &g, &[]).is_none());
    }

    #[test]
    fn rci_is_packets_over_window() {
        let mut r = Route { hops: vec![0, 1], cost: 1.0, rci: 0.0, demoted_until: None };
        update_rci(&mut r, 0, 10.0);
        assert_eq!(r.rci, 0.0);
        update_rci(&mut r, 40, 10.0);
        assert!((r.rci - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rci_invariant_to_window_split() {
        let mut whole = Route { hops: vec![0, 1], cost: 1.0, rci: 0.0, demoted_until: None };
        update_rci(&mut whole, 40, 10.0);
        let mut half = whole.clone();
        update_rci(&mut half, 20, 5.0);
        let mean_of_halves = (half.rci + half.rci) / 2.0;
        assert!((whole.rci - mean_of_halves).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_lambda_times_mean() {
        assert!((congestion_threshold(2.0, 1.5) - 3.0).abs() < 1e-12);
        assert!(congestion_threshold(2.0, 1e12) > 1e11);
    }

    #[test]
    fn scaling_weights_keeps_argmin() {
        // Uniformly scaling all four weights scales every path cost by the
        // same factor, so the selected route is unchanged.
        let mk = |scale: f64| {
            let w = weights(0.3 * scale, 0.3 * scale, 0.2 * scale, 0.2 * scale);
            let mut g = CostGraph::new(10, vec![9]);
            let params: [(NodeId, NodeId, f64, f64); 11] = [
                (0, 1, 0.95, 38.0),
                (1, 2, 0.9, 37.5),
                (2, 3, 0.8, 37.2),
                (3, 9, 0.99, 37.0),
                (1, 4, 0.6, 38.5),
                (4, 9, 0.7, 37.1),
                (0, 5, 0.85, 37.3),
                (5, 6, 0.92, 37.9),
                (6, 7, 0.88, 37.4),
                (7, 8, 0.97, 37.6),
                (8, 9, 0.66, 37.8),
            ];
            for (a, b, prr, temp) in params {
                let c = link_cost(temp, prr, 80.0, 0.02, &w, &norms());
                g.add_edge(a, b, c);
                g.add_edge(b, a, c);
            }
            find_route(0, &g, &[]).unwrap().hops
        };
        assert_eq!(mk(1.0), mk(0.1));
        assert_eq!(mk(1.0), mk(37.0));
    }

    #[test]
    fn route_decision_line_format() {
        let d = RouteDecision {
            time_s: 1.5,
            src: 0,
            hops: vec![0, 1, 4, 9],
            cost: 3.0,
            trigger: "refresh",
        };
        assert_eq!(d.to_line(), "1.500000|0|0-1-4-9|3.000000|refresh");
    }
}
