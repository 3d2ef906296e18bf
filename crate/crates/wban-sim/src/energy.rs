//! First-order radio energy accounting.
//!
//! Transmitting k bits over distance d costs `E_elec*k + E_amp*k*d^m`;
//! receiving costs `E_elec*k`. Sensor energy only ever decreases; sinks are
//! never charged. Control packets are charged exactly like data so routing
//! overhead has a real cost.

use crate::config::ScenarioConfig;
use crate::model::{NodeState, Role};

#[derive(Debug, Clone, Copy)]
pub struct EnergyParams {
    /// Joules per bit spent in the electronics, both directions.
    pub e_elec: f64,
    /// Joules per bit per m^m spent in the amplifier.
    pub e_amp: f64,
    /// Path-loss exponent, 2 or 4.
    pub m: u32,
}

impl EnergyParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        EnergyParams {
            e_elec: cfg.e_elec_j_per_bit,
            e_amp: cfg.e_amp_j_per_bit_per_m4,
            m: cfg.path_loss_exponent,
        }
    }
}

/// Energy to transmit `k` bits over `d` meters.
pub fn tx_energy(k: u64, d: f64, p: &EnergyParams) -> f64 {
    let k = k as f64;
    p.e_elec * k + p.e_amp * k * d.powi(p.m as i32)
}

/// Energy to receive `k` bits.
pub fn rx_energy(k: u64, p: &EnergyParams) -> f64 {
    p.e_elec * k as f64
}

/// Charge a node for `amount` joules of radio activity. Returns the energy
/// actually drawn (less than `amount` only when the battery empties, which
/// also kills the node). Sinks are unbounded and never charged; the window
/// accumulators still run so sink activity heats tissue like any other.
pub fn charge(node: &mut NodeState, amount: f64, bits: u64, is_tx: bool) -> f64 {
    if is_tx {
        node.tx_bits_window += bits;
    } else {
        node.rx_bits_window += bits;
    }
    node.radio_energy_window_j += amount;
    if node.role == Role::Sink {
        return 0.0;
    }
    let drawn = amount.min(node.energy_j);
    node.energy_j -= drawn;
    drawn
}

/// Apply one accounting step: a batch of transmissions (bits, distance) and
/// a count of received bits. Depletion is a state, not an error.
pub fn apply_energy_step(
    node: &mut NodeState,
    tx_bits_by_distance: &[(u64, f64)],
    rx_bits: u64,
    p: &EnergyParams,
) {
    for &(bits, d) in tx_bits_by_distance {
        let e = tx_energy(bits, d, p);
        charge(node, e, bits, true);
    }
    if rx_bits > 0 {
        let e = rx_energy(rx_bits, p);
        charge(node, e, rx_bits, false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeState;

    fn params() -> EnergyParams {
        EnergyParams { e_elec: 60e-9, e_amp: 1e-15, m: 4 }
    }

    #[test]
    fn tx_energy_matches_hand_evaluation() {
        // 512 B over 0.5 m: 60e-9*4096 + 1e-15*4096*0.5^4
        let e = tx_energy(4096, 0.5, &params());
        let expected = 2.4576e-4 + 2.56e-13;
        assert!((e - expected).abs() < 1e-18, "{e} vs {expected}");
    }

    #[test]
    fn amplifier_term_vanishes_at_zero_distance() {
        assert_eq!(tx_energy(1, 0.0, &params()), 60e-9);
    }

    #[test]
    fn tx_energy_linear_in_bits() {
        let p = params();
        let once = tx_energy(1000, 0.3, &p);
        let twice = tx_energy(2000, 0.3, &p);
        assert!((twice - 2.0 * once).abs() < 1e-18);
    }

    #[test]
    fn rx_energy_matches_hand_evaluation() {
        assert!((rx_energy(4096, &params()) - 2.4576e-4).abs() < 1e-18);
        assert_eq!(rx_energy(1, &params()), 60e-9);
    }

    #[test]
    fn rx_never_exceeds_tx() {
        let p = params();
        for d in [0.0, 0.1, 0.5, 1.0] {
            assert!(rx_energy(4096, &p) <= tx_energy(4096, d, &p));
        }
    }

    #[test]
    fn amp_term_negligible_at_sub_meter_range() {
        // Guards against unit mistakes in e_amp: at the 0.5 m transmission
        // range the amplifier contributes less than 1e-8 of the electronics.
        let p = params();
        let elec = p.e_elec * 4096.0;
        let amp = p.e_amp * 4096.0 * 0.5f64.powi(4);
        assert!(amp / elec <= 1e-8, "ratio {}", amp / elec);
    }

    #[test]
    fn idle_sensor_keeps_energy() {
        let mut node = NodeState::new(0, (0.0, 0.0), Role::Sensor, 100.0, 37.0);
        apply_energy_step(&mut node, &[], 0, &params());
        assert_eq!(node.energy_j, 100.0);
    }

    #[test]
    fn one_packet_each_way_matches_sum() {
        let mut node = NodeState::new(0, (0.0, 0.0), Role::Sensor, 100.0, 37.0);
        apply_energy_step(&mut node, &[(4096, 0.5)], 4096, &params());
        let expected = 100.0 - (2.4576e-4 + 2.56e-13) - 2.4576e-4;
        assert!((node.energy_j - expected).abs() < 1e-12, "{}", node.energy_j);
    }

    #[test]
    fn depletion_floors_at_zero_and_kills() {
        let mut node = NodeState::new(0, (0.0, 0.0), Role::Sensor, 1e-9, 37.0);
        apply_energy_step(&mut node, &[(4096, 0.5)], 0, &params());
        assert_eq!(node.energy_j, 0.0);
        assert!(node.is_dead());
    }

    #[test]
    fn sinks_are_never_depleted() {
        let mut node = NodeState::new(0, (0.0, 0.0), Role::Sink, 100.0, 37.0);
        apply_energy_step(&mut node, &[(4096, 0.5)], 4096, &params());
        assert_eq!(node.energy_j, 100.0);
        assert!(node.radio_energy_window_j > 0.0);
    }

    #[test]
    fn charge_reports_actual_draw() {
        let mut node = NodeState::new(0, (0.0, 0.0), Role::Sensor, 1e-5, 37.0);
        let drawn = charge(&mut node, 3e-5, 100, true);
        assert_eq!(drawn, 1e-5);
        assert_eq!(node.energy_j, 0.0);
    }
}
