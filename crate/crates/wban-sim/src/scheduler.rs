//! Per-node transmit queues, TDMA slot allocation, and the adaptive replay
//! rules that divert traffic off hot or congested paths.

use crate::config::ScenarioConfig;
use crate::model::{NodeId, Packet, PacketClass};

/// How a protocol orders its transmit queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueDiscipline {
    /// Lowest waiting score first: (1/P) * (D / E_res).
    WaitingScore,
    /// Higher class first, FIFO within a class.
    ClassPriority,
    Fifo,
}

/// Waiting score of a queued packet: lower transmits earlier. Emergency
/// traffic (P = 3) always scores below normal traffic with the same budget,
/// and drained nodes push everything later.
pub fn waiting_score(priority: u32, allowed_delay_s: f64, e_res_j: f64) -> f64 {
    (1.0 / priority as f64) * (allowed_delay_s / e_res_j)
}

/// Per-class delay budget, the D of the waiting score.
pub fn allowed_delay_s(cfg: &ScenarioConfig, class: PacketClass) -> f64 {
    match class {
        PacketClass::Normal => cfg.allowed_delay_normal_s,
        PacketClass::OnDemand => cfg.allowed_delay_on_demand_s,
        PacketClass::Emergency => cfg.allowed_delay_emergency_s,
    }
}

#[derive(Debug, Clone)]
pub struct QueueEntry {
    pub packet: Packet,
    pub enqueued_at: f64,
    /// Set when the replay rules force this packet to the head of the queue.
    pub expedited: bool,
    /// Set on every entry a node holds when it enters hotspot sleep; these
    /// transfers to the stable neighbor are evacuations, not relaying.
    pub evacuate: bool,
}

/// A node's transmit queue. Ordering is evaluated at dequeue time so the
/// waiting score always reflects current residual energy.
#[derive(Debug, Clone, Default)]
pub struct TxQueue {
    entries: Vec<QueueEntry>,
}

impl TxQueue {
    pub fn push(&mut self, packet: Packet, now: f64) {
        self.entries.push(QueueEntry { packet, enqueued_at: now, expedited: false, evacuate: false });
    }

    /// Flag the whole queue for evacuation at a hotspot sleep transition.
    pub fn mark_evacuate_all(&mut self) {
        for e in &mut self.entries {
            e.evacuate = true;
            e.expedited = true;
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QueueEntry> {
        self.entries.iter()
    }

    /// Drop entries older than the starvation bound, returning them so the
    /// caller can count the loss; drops are never silent.
    pub fn expire(&mut self, now: f64, max_age_s: f64) -> Vec<QueueEntry> {
        let mut expired = Vec::new();
        self.entries.retain_mut(|e| {
            if now - e.enqueued_at >= max_age_s {
                expired.push(QueueEntry {
                    packet: e.packet.clone(),
                    enqueued_at: e.enqueued_at,
                    expedited: e.expedited,
                    evacuate: e.evacuate,
                });
                false
            } else {
                true
            }
        });
        expired
    }

    /// Drain the whole queue (dead node, or hotspot evacuation).
    pub fn drain_all(&mut self) -> Vec<QueueEntry> {
        std::mem::take(&mut self.entries)
    }

    /// Fraction of queued packets that are emergency class.
    pub fn emergency_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        let em = self.entries.iter().filter(|e| e.packet.class == PacketClass::Emergency).count();
        em as f64 / self.entries.len() as f64
    }

    /// Index of the entry that departs next under `discipline`. Expedited
    /// entries go first (oldest expedited wins); among equals the tie falls
    /// to earliest enqueue then lowest sequence number.
    pub fn next_index(&self, discipline: QueueDiscipline, cfg: &ScenarioConfig, e_res_j: f64) -> Option<usize> {
        if self.entries.is_empty() {
            return None;
        }
        let key = |e: &QueueEntry| -> (u8, f64, f64, u64) {
            let expedited = if e.expedited { 0 } else { 1 };
            let rank = match discipline {
                QueueDiscipline::WaitingScore => {
                    let d = allowed_delay_s(cfg, e.packet.class);
                    waiting_score(e.packet.class.priority(), d, e_res_j)
                }
                QueueDiscipline::ClassPriority => -(e.packet.class.priority() as f64),
                QueueDiscipline::Fifo => 0.0,
            };
            (expedited, rank, e.enqueued_at, e.packet.seq)
        };
        (0..self.entries.len()).min_by(|&a, &b| {
            let (xa, ra, ta, sa) = key(&self.entries[a]);
            let (xb, rb, tb, sb) = key(&self.entries[b]);
            xa.cmp(&xb)
                .then(ra.total_cmp(&rb))
                .then(ta.total_cmp(&tb))
                .then(sa.cmp(&sb))
        })
    }

    pub fn get(&self, idx: usize) -> &QueueEntry {
        &self.entries[idx]
    }

    pub fn get_mut(&mut self, idx: usize) -> &mut QueueEntry {
        &mut self.entries[idx]
    }

    pub fn remove(&mut self, idx: usize) -> QueueEntry {
        self.entries.remove(idx)
    }

    /// Mark every entry whose waited time exceeds its class budget as
    /// expedited so it bypasses the normal ordering.
    pub fn expedite_overdue(&mut self, now: f64, cfg: &ScenarioConfig) -> usize {
        let mut n = 0;
        for e in &mut self.entries {
            if !e.expedited && now - e.enqueued_at >= allowed_delay_s(cfg, e.packet.class) {
                e.expedited = true;
                n += 1;
            }
        }
        n
    }
}

/// One TDMA superframe: per-node transmit windows that exactly tile the
/// data region of the frame.
#[derive(Debug, Clone)]
pub struct TdmaFrame {
    pub frame_len_s: f64,
    /// (node, slot length in seconds), in transmission order.
    pub slots: Vec<(NodeId, f64)>,
}

impl TdmaFrame {
    pub fn total_slot_time(&self) -> f64 {
        self.slots.iter().map(|(_, s)| s).sum()
    }
}

/// Share the data region among active nodes proportionally to their
/// weights, rescaled so the slots sum to the region exactly. When the
/// nominal region cannot fit one packet per active node the frame stretches
/// (`min_slot_s` per node) instead of silently starving someone.
pub fn allocate_slots(
    data_region_s: f64,
    queue_weights: &[(NodeId, f64)],
    min_slot_s: f64,
) -> TdmaFrame {
    assert!(!queue_weights.is_empty(), "allocate_slots requires at least one active node");
    let n = queue_weights.len() as f64;
    let region = data_region_s.max(n * min_slot_s);
    let weight_sum: f64 = queue_weights.iter().map(|(_, w)| w).sum();
    // s_i = (region / N) * w_i, rescaled so the total is exactly the region:
    // equivalent to region * w_i / sum(w).
    let mut slots: Vec<(NodeId, f64)> = queue_weights
        .iter()
        .map(|&(id, w)| (id, region * w / weight_sum))
        .collect();
    // Enforce the per-node floor, taking the excess from the largest slots.
    let mut deficit = 0.0;
    for (_, s) in &mut slots {
        if *s < min_slot_s {
            deficit += min_slot_s - *s;
            *s = min_slot_s;
        }
    }
    if deficit > 0.0 {
        let surplus: f64 = slots.iter().map(|(_, s)| (s - min_slot_s).max(0.0)).sum();
        if surplus > 0.0 {
            for (_, s) in &mut slots {
                let extra = (*s - min_slot_s).max(0.0);
                *s -= deficit * extra / surplus;
            }
        }
    }
    // Absorb float residue into the last slot so the tiling is exact.
    let used: f64 = slots.iter().map(|(_, s)| s).sum();
    if let Some(last) = slots.last_mut() {
        last.1 += region - used;
    }
    TdmaFrame { frame_len_s: region, slots }
}

/// Head-of-queue action chosen by the adaptive replay rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayAction {
    SendPrimary,
    /// Node itself is hot: hand traffic to the coolest awake neighbor that
    /// still has a sink route.
    DivertToStableNeighbor,
    /// Primary route demoted or congested: use the second-best route.
    DivertToSecondRoute,
    /// Packet has exhausted its delay budget: bypass the queue order.
    ForwardImmediately,
}

impl ReplayAction {
    pub fn name(self) -> &'static str {
        match self {
            ReplayAction::SendPrimary => "send_primary",
            ReplayAction::DivertToStableNeighbor => "divert_to_stable_neighbor",
            ReplayAction::DivertToSecondRoute => "divert_to_second_route",
            ReplayAction::ForwardImmediately => "forward_immediately",
        }
    }
}

/// Inputs the replay decision needs about the node and its route state.
#[derive(Debug, Clone, Copy)]
pub struct ReplayContext {
    pub node_temp_c: f64,
    pub t_thresh_c: f64,
    pub primary_demoted: bool,
    pub waited_s: f64,
    pub allowed_delay_s: f64,
}

pub fn adaptive_replay(ctx: &ReplayContext) -> ReplayAction {
    if ctx.node_temp_c > ctx.t_thresh_c {
        ReplayAction::DivertToStableNeighbor
    } else if ctx.primary_demoted {
        ReplayAction::DivertToSecondRoute
    } else if ctx.waited_s >= ctx.allowed_delay_s {
        ReplayAction::ForwardImmediately
    } else {
        ReplayAction::SendPrimary
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Packet;

    fn cfg() -> ScenarioConfig {
        ScenarioConfig::default()
    }

    fn data(seq: u64, class: PacketClass, now: f64) -> Packet {
        Packet::data(seq, class, 4096, 0, now)
    }

    #[test]
    fn waiting_score_matches_hand_evaluation() {
        // P = 3, D = 100 ms, E_res = 50 J.
        let s = waiting_score(3, 0.1, 50.0);
        let expected = 0.1 / 150.0;
        assert!((s - expected).abs() <= 1e-9 * expected, "{s}");
    }

    #[test]
    fn emergency_scores_one_third_of_normal() {
        let em = waiting_score(3, 0.1, 50.0);
        let normal = waiting_score(1, 0.1, 50.0);
        assert!((normal / em - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lower_energy_doubles_score() {
        let full = waiting_score(2, 0.25, 100.0);
        let half = waiting_score(2, 0.25, 50.0);
        assert!((half / full - 2.0).abs() < 1e-12);
    }

    #[test]
    fn emergency_departs_before_normal() {
        let c = cfg();
        let mut q = TxQueue::default();
        q.push(data(1, PacketClass::Normal, 0.0), 0.0);
        q.push(data(2, PacketClass::Emergency, 0.0), 0.0);
        let idx = q.next_index(QueueDiscipline::WaitingScore, &c, 50.0).unwrap();
        assert_eq!(q.get(idx).packet.seq, 2);
    }

    #[test]
    fn fifo_ties_break_by_enqueue_then_seq() {
        let c = cfg();
        let mut q = TxQueue::default();
        q.push(data(5, PacketClass::Normal, 0.0), 1.0);
        q.push(data(3, PacketClass::Normal, 0.0), 0.5);
        let idx = q.next_index(QueueDiscipline::Fifo, &c, 50.0).unwrap();
        assert_eq!(q.get(idx).packet.seq, 3);
    }

    #[test]
    fn expedited_entries_jump_the_queue() {
        let c = cfg();
        let mut q = TxQueue::default();
        q.push(data(1, PacketClass::Emergency, 0.0), 0.0);
        q.push(data(2, PacketClass::Normal, 0.0), 0.0);
        // Age the normal packet past its 1 s budget.
        let n = q.expedite_overdue(1.5, &c);
        assert_eq!(n, 2); // emergency budget 50 ms is long gone too
        let idx = q.next_index(QueueDiscipline::WaitingScore, &c, 50.0).unwrap();
        // Both expedited: earliest enqueue then lowest seq wins.
        assert_eq!(q.get(idx).packet.seq, 1);
    }

    #[test]
    fn expiry_returns_dropped_entries() {
        let c = cfg();
        let mut q = TxQueue::default();
        q.push(data(1, PacketClass::Normal, 0.0), 0.0);
        q.push(data(2, PacketClass::Normal, 0.0), 4.0);
        let dropped = q.expire(5.0, c.queue_max_age_s);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].packet.seq, 1);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn equal_weights_split_evenly() {
        let f = allocate_slots(0.03, &[(0, 1.0), (1, 1.0), (2, 1.0)], 0.0);
        for (_, s) in &f.slots {
            assert!((s - 0.01).abs() < 1e-12);
        }
        assert!((f.total_slot_time() - f.frame_len_s).abs() < 1e-15);
    }

    #[test]
    fn weighted_slots_match_hand_evaluation() {
        // 2 nodes, weights (2, 1), 30 ms frame -> 20 ms and 10 ms.
        let f = allocate_slots(0.03, &[(0, 2.0), (1, 1.0)], 0.0);
        assert!((f.slots[0].1 - 0.02).abs() < 1e-12);
        assert!((f.slots[1].1 - 0.01).abs() < 1e-12);
    }

    #[test]
    fn single_node_gets_whole_frame() {
        let f = allocate_slots(0.03, &[(7, 1.3)], 0.0);
        assert_eq!(f.slots.len(), 1);
        assert!((f.slots[0].1 - 0.03).abs() < 1e-12);
    }

    #[test]
    fn frame_stretches_to_fit_minimum_slots() {
        let weights: Vec<(NodeId, f64)> = (0..10).map(|i| (i, 1.0)).collect();
        let f = allocate_slots(0.01, &weights, 0.002);
        assert!((f.frame_len_s - 0.02).abs() < 1e-12);
        for (_, s) in &f.slots {
            assert!(*s >= 0.002 - 1e-12);
        }
        assert!((f.total_slot_time() - f.frame_len_s).abs() < 1e-12);
    }

    #[test]
    fn floor_respected_with_skewed_weights() {
        let f = allocate_slots(0.1, &[(0, 100.0), (1, 1.0), (2, 1.0)], 0.002);
        for (_, s) in &f.slots {
            assert!(*s >= 0.002 - 1e-12, "slot {s}");
        }
        assert!((f.total_slot_time() - f.frame_len_s).abs() < 1e-12);
    }

    #[test]
    fn replay_rules_fire_in_order() {
        let base = ReplayContext {
            node_temp_c: 37.0,
            t_thresh_c: 39.0,
            primary_demoted: false,
            waited_s: 0.0,
            allowed_delay_s: 1.0,
        };
        assert_eq!(adaptive_replay(&base), ReplayAction::SendPrimary);
        assert_eq!(
            adaptive_replay(&ReplayContext { node_temp_c: 39.5, ..base }),
            ReplayAction::DivertToStableNeighbor
        );
        assert_eq!(
            adaptive_replay(&ReplayContext { primary_demoted: true, ..base }),
            ReplayAction::DivertToSecondRoute
        );
        assert_eq!(
            adaptive_replay(&ReplayContext { waited_s: 1.2, ..base }),
            ReplayAction::ForwardImmediately
        );
        // Heat wins over congestion, congestion over age.
        assert_eq!(
            adaptive_replay(&ReplayContext {
                node_temp_c: 39.5,
                primary_demoted: true,
                waited_s: 2.0,
                ..base
            }),
            ReplayAction::DivertToStableNeighbor
        );
    }

    #[test]
    fn emergency_fraction_counts_queue_mix() {
        let mut q = TxQueue::default();
        q.push(data(1, PacketClass::Normal, 0.0), 0.0);
        q.push(data(2, PacketClass::Emergency, 0.0), 0.0);
        q.push(data(3, PacketClass::Normal, 0.0), 0.0);
        q.push(data(4, PacketClass::Emergency, 0.0), 0.0);
        assert!((q.emergency_fraction() - 0.5).abs() < 1e-12);
    }
}
