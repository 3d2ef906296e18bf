//! Neighbor state acquisition: HELLO accounting, PRR estimation over a
//! sliding window, and EWMA one-hop delay tracking.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

use crate::model::NodeId;

/// What one node believes about a neighbor, assembled from HELLO exchanges.
#[derive(Debug, Clone)]
pub struct NeighborEntry {
    pub neighbor: NodeId,
    /// Outcome ring of the most recent HELLO slots, newest at the back.
    window: VecDeque<bool>,
    window_cap: usize,
    /// Smoothed one-hop delay in seconds; None until the first sample.
    pub delay_s: Option<f64>,
    pub reported_energy_j: f64,
    pub reported_temp_c: f64,
    pub hotspot: bool,
    pub last_heard_s: f64,
}

impl NeighborEntry {
    fn new(neighbor: NodeId, window_cap: usize, now: f64) -> Self {
        NeighborEntry {
            neighbor,
            window: VecDeque::with_capacity(window_cap),
            window_cap,
            delay_s: None,
            reported_energy_j: f64::INFINITY,
            reported_temp_c: 0.0,
            hotspot: false,
            last_heard_s: now,
        }
    }

    /// Received-over-sent ratio across the window. Never-measured links get
    /// the optimistic prior 1.0 so cold-start routing is possible.
    pub fn prr(&self) -> f64 {
        if self.window.is_empty() {
            1.0
        } else {
            let recv = self.window.iter().filter(|ok| **ok).count();
            recv as f64 / self.window.len() as f64
        }
    }

    pub fn sent_count(&self) -> usize {
        self.window.len()
    }

    pub fn recv_count(&self) -> usize {
        self.window.iter().filter(|ok| **ok).count()
    }

    fn record(&mut self, ok: bool) {
        if self.window.len() == self.window_cap {
            self.window.pop_front();
        }
        self.window.push_back(ok);
    }
}

/// Status carried by a HELLO broadcast.
#[derive(Debug, Clone, Copy)]
pub struct HelloPayload {
    pub origin: NodeId,
    pub energy_j: f64,
    pub temperature_c: f64,
    pub hotspot: bool,
    pub timestamp_s: f64,
}

/// One node's table of neighbor beliefs, mutated only by that node's event
/// handlers.
#[derive(Debug, Clone, Default)]
pub struct NeighborTable {
    entries: BTreeMap<NodeId, NeighborEntry>,
}

impl NeighborTable {
    /// Record one expected HELLO slot from `h.origin`. Every slot counts as
    /// sent; only successful receptions refresh the reported fields.
    pub fn record_hello(&mut self, h: &HelloPayload, link_succeeded: bool, now: f64, window: u32) {
        let entry = self
            .entries
            .entry(h.origin)
            .or_insert_with(|| NeighborEntry::new(h.origin, window as usize, now));
        entry.record(link_succeeded);
        if link_succeeded {
            entry.reported_energy_j = h.energy_j;
            entry.reported_temp_c = h.temperature_c;
            entry.hotspot = h.hotspot;
            entry.last_heard_s = h.timestamp_s;
        }
    }

    /// Update the smoothed delay estimate for `neighbor` with a new sample.
    pub fn record_delay(&mut self, neighbor: NodeId, measured_s: f64, alpha: f64, now: f64, window: u32) {
        let entry = self
            .entries
            .entry(neighbor)
            .or_insert_with(|| NeighborEntry::new(neighbor, window as usize, now));
        entry.delay_s = Some(match entry.delay_s {
            Some(prev) => update_delay(prev, measured_s, alpha),
            None => measured_s,
        });
    }

    /// Drop neighbors not heard from for three HELLO intervals.
    pub fn evict_stale(&mut self, now: f64, hello_interval_s: f64) {
        self.entries.retain(|_, e| now - e.last_heard_s <= 3.0 * hello_interval_s);
    }

    /// Relax delay estimates toward the unloaded transmission time. Queue
    /// spikes are transient; an estimate that stops receiving samples must
    /// not repel traffic forever.
    pub fn decay_delays(&mut self, floor_s: f64, factor: f64) {
        for e in self.entries.values_mut() {
            if let Some(d) = e.delay_s {
                e.delay_s = Some((d * factor).max(floor_s));
            }
        }
    }

    pub fn get(&self, neighbor: NodeId) -> Option<&NeighborEntry> {
        self.entries.get(&neighbor)
    }

    pub fn iter(&self) -> impl Iterator<Item = &NeighborEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Exponentially weighted moving average: `(1 - alpha) * prev + alpha * new`.
pub fn update_delay(prev_s: f64, measured_s: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * prev_s + alpha * measured_s
}

/// One Bernoulli draw against the link's ground-truth reception ratio.
pub fn simulate_link_delivery(prr_true: f64, rng: &mut impl Rng) -> bool {
    if prr_true >= 1.0 {
        true
    } else if prr_true <= 0.0 {
        false
    } else {
        rng.gen_bool(prr_true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn hello(origin: NodeId, ts: f64) -> HelloPayload {
        HelloPayload { origin, energy_j: 80.0, temperature_c: 37.2, hotspot: false, timestamp_s: ts }
    }

    #[test]
    fn prr_is_received_over_sent() {
        let mut table = NeighborTable::default();
        for i in 0..10 {
            table.record_hello(&hello(1, i as f64), i != 3, i as f64, 20);
        }
        let e = table.get(1).unwrap();
        assert_eq!(e.sent_count(), 10);
        assert_eq!(e.recv_count(), 9);
        assert!((e.prr() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn empty_window_defaults_to_optimistic_prior() {
        let e = NeighborEntry::new(3, 20, 0.0);
        assert_eq!(e.prr(), 1.0);
    }

    #[test]
    fn window_slides() {
        // 20 successes then 20 failures through a 20-slot window: the second
        // window fully displaces the first.
        let mut table = NeighborTable::default();
        for i in 0..20 {
            table.record_hello(&hello(1, i as f64), true, i as f64, 20);
        }
        assert_eq!(table.get(1).unwrap().prr(), 1.0);
        for i in 20..40 {
            table.record_hello(&hello(1, i as f64), false, i as f64, 20);
        }
        assert_eq!(table.get(1).unwrap().prr(), 0.0);
    }

    #[test]
    fn failed_hellos_do_not_refresh_reports() {
        let mut table = NeighborTable::default();
        table.record_hello(&hello(1, 0.0), true, 0.0, 20);
        let mut h = hello(1, 5.0);
        h.energy_j = 10.0;
        table.record_hello(&h, false, 5.0, 20);
        let e = table.get(1).unwrap();
        assert_eq!(e.reported_energy_j, 80.0);
        assert_eq!(e.last_heard_s, 0.0);
    }

    #[test]
    fn stale_neighbors_evicted_after_three_intervals() {
        let mut table = NeighborTable::default();
        table.record_hello(&hello(1, 0.0), true, 0.0, 20);
        table.record_hello(&hello(2, 3.5), true, 3.5, 20);
        table.evict_stale(3.2, 1.0);
        assert!(table.get(1).is_none(), "silent neighbor should disappear");
        assert!(table.get(2).is_some());
    }

    #[test]
    fn ewma_matches_hand_evaluation() {
        // prev 10 ms, measured 20 ms, alpha 0.3 -> 13 ms
        assert!((update_delay(0.010, 0.020, 0.3) - 0.013).abs() < 1e-15);
    }

    #[test]
    fn ewma_fixed_point() {
        assert!((update_delay(0.007, 0.007, 0.3) - 0.007).abs() < 1e-15);
    }

    #[test]
    fn ewma_geometric_contraction() {
        let mut d = 0.100;
        let target = 0.020;
        for n in 1..=30 {
            d = update_delay(d, target, 0.3);
            let bound = (0.100f64 - target).abs() * 0.7f64.powi(n);
            assert!((d - target).abs() <= bound + 1e-15);
        }
    }

    #[test]
    fn degenerate_bernoulli_links() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..100 {
            assert!(simulate_link_delivery(1.0, &mut rng));
            assert!(!simulate_link_delivery(0.0, &mut rng));
        }
    }

    #[test]
    fn bernoulli_mean_converges() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let n = 10_000;
        let hits = (0..n).filter(|_| simulate_link_delivery(0.7, &mut rng)).count();
        let mean = hits as f64 / n as f64;
        assert!((mean - 0.7).abs() < 0.02, "empirical mean {mean}");
    }

    #[test]
    fn estimator_tracks_ground_truth() {
        // Chernoff-style check at a fixed seed: window >= 100 keeps the
        // estimate within 0.05 of the true ratio on a static link.
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let mut table = NeighborTable::default();
        let truth = 0.8;
        for i in 0..300 {
            let ok = simulate_link_delivery(truth, &mut rng);
            table.record_hello(&hello(1, i as f64), ok, i as f64, 100);
        }
        let est = table.get(1).unwrap().prr();
        assert!((est - truth).abs() <= 0.05, "estimate {est}");
    }
}
