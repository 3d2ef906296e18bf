//! Per-node temperature evolution and hotspot classification.
//!
//! Tissue temperature follows a lumped bioheat balance: perfusion cools the
//! node toward body temperature while metabolic heat and RF absorption heat
//! it. Nodes are points, so the spatial conduction term of the full PDE is
//! dropped and perfusion is the only cooling path:
//!
//! ```text
//! dT/dt = (-omega * (T - T_b) + Q_met + Q_sar) / (eta * C)
//! ```
//!
//! advanced with one explicit Euler step per thermal tick. `Q_sar` maps the
//! radio energy spent in the step to watts via `sar_coeff / dt`.

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};
use crate::model::NodeState;

#[derive(Debug, Clone, Copy)]
pub struct ThermalParams {
    /// Lumped volumetric heat capacity eta*C in J/degC.
    pub eta_c: f64,
    /// Blood-perfusion heat transfer rate in W/degC.
    pub omega: f64,
    /// Baseline body temperature in degC.
    pub t_body: f64,
    /// Metabolic heat in W.
    pub q_met: f64,
    /// Watts of SAR heating per joule of radio energy per second of step.
    pub sar_coeff: f64,
    /// Hotspot threshold in degC.
    pub t_thresh: f64,
    /// Re-admission margin below the threshold in degC.
    pub hysteresis: f64,
    /// Integration step in seconds.
    pub dt: f64,
}

impl ThermalParams {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        ThermalParams {
            eta_c: cfg.eta_c_product,
            omega: cfg.omega,
            t_body: cfg.t_body_c,
            q_met: cfg.q_met,
            sar_coeff: cfg.sar_coeff,
            t_thresh: cfg.t_thresh_c,
            hysteresis: cfg.hysteresis_c,
            dt: cfg.thermal_dt_s,
        }
    }

    /// Explicit Euler is unconditionally stable only for dt <= eta_c/omega.
    pub fn check_stable(&self) -> Result<()> {
        if self.omega > 0.0 && self.dt > self.eta_c / self.omega {
            return Err(SimError::UnstableStep { dt: self.dt, limit: self.eta_c / self.omega });
        }
        Ok(())
    }

    /// Steady-state temperature under a constant total source, the fixed
    /// point of the update.
    pub fn steady_state(&self, q_total: f64) -> f64 {
        if self.omega > 0.0 {
            self.t_body + q_total / self.omega
        } else {
            f64::INFINITY
        }
    }
}

/// Advance a temperature one step given the radio energy spent in the step.
/// The result never falls below body temperature.
pub fn step_temperature_value(t: f64, radio_energy_j: f64, tp: &ThermalParams) -> f64 {
    let q_sar = tp.sar_coeff * radio_energy_j / tp.dt;
    let dtemp = (-tp.omega * (t - tp.t_body) + tp.q_met + q_sar) / tp.eta_c;
    (t + dtemp * tp.dt).max(tp.t_body)
}

/// Step a node's temperature, consuming its per-window radio accumulators.
pub fn step_temperature(node: &mut NodeState, tp: &ThermalParams) {
    node.temperature_c = step_temperature_value(node.temperature_c, node.radio_energy_window_j, tp);
    node.peak_temperature_c = node.peak_temperature_c.max(node.temperature_c);
    node.radio_energy_window_j = 0.0;
    node.tx_bits_window = 0;
    node.rx_bits_window = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HotspotDecision {
    EnterSleep,
    Stay,
    Wake,
}

/// Threshold logic with a hysteresis band: an awake node above the threshold
/// goes to sleep; a sleeping node wakes only once it has cooled a full
/// hysteresis margin below it.
pub fn classify_hotspot(node: &NodeState, tp: &ThermalParams) -> HotspotDecision {
    if !node.asleep && node.temperature_c > tp.t_thresh {
        HotspotDecision::EnterSleep
    } else if node.asleep && node.temperature_c < tp.t_thresh - tp.hysteresis {
        HotspotDecision::Wake
    } else {
        HotspotDecision::Stay
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeState, Role};

    fn params() -> ThermalParams {
        ThermalParams {
            eta_c: 1.0,
            omega: 0.05,
            t_body: 37.0,
            q_met: 0.0,
            sar_coeff: 17.0,
            t_thresh: 39.0,
            hysteresis: 0.5,
            dt: 1.0,
        }
    }

    fn node_at(t: f64) -> NodeState {
        let mut n = NodeState::new(0, (0.0, 0.0), Role::Sensor, 100.0, 37.0);
        n.temperature_c = t;
        n
    }

    #[test]
    fn equilibrium_without_sources() {
        let tp = params();
        assert_eq!(step_temperature_value(37.0, 0.0, &tp), 37.0);
    }

    #[test]
    fn decays_toward_body_temperature() {
        let tp = params();
        let t = step_temperature_value(38.0, 0.0, &tp);
        assert!(t > 37.0 && t < 38.0, "got {t}");
    }

    #[test]
    fn never_falls_below_body_temperature() {
        let mut tp = params();
        tp.omega = 0.9;
        tp.dt = 1.0;
        let t = step_temperature_value(37.01, 0.0, &tp);
        assert!(t >= 37.0);
    }

    #[test]
    fn radio_energy_heats() {
        let tp = params();
        let t = step_temperature_value(37.0, 2e-3, &tp);
        assert!(t > 37.0);
        // Sustained relaying at ~2e-3 J/s should gain roughly 1 degC / 30 s
        // at the start of the ramp.
        let slope = t - 37.0;
        assert!((slope - 1.0 / 30.0).abs() < 5e-3, "slope {slope}");
    }

    #[test]
    fn fixed_point_matches_closed_form_steady_state() {
        let tp = params();
        let q = 0.12;
        let t_ss = tp.steady_state(q);
        // Feed the equivalent per-step radio energy and iterate to convergence.
        let radio = q * tp.dt / tp.sar_coeff;
        let mut t = 37.0;
        for _ in 0..4000 {
            t = step_temperature_value(t, radio, &tp);
        }
        assert!((t - t_ss).abs() < 1e-3, "{t} vs {t_ss}");
    }

    #[test]
    fn step_consumes_window_accumulators() {
        let tp = params();
        let mut n = node_at(37.0);
        n.radio_energy_window_j = 1e-3;
        n.tx_bits_window = 4096;
        step_temperature(&mut n, &tp);
        assert!(n.temperature_c > 37.0);
        assert_eq!(n.radio_energy_window_j, 0.0);
        assert_eq!(n.tx_bits_window, 0);
        assert_eq!(n.peak_temperature_c, n.temperature_c);
    }

    #[test]
    fn hotspot_threshold_crossing() {
        let tp = params();
        let n = node_at(39.1);
        assert_eq!(classify_hotspot(&n, &tp), HotspotDecision::EnterSleep);
    }

    #[test]
    fn hysteresis_band_holds_sleepers() {
        let tp = params();
        let mut n = node_at(39.0 - 0.25);
        n.asleep = true;
        assert_eq!(classify_hotspot(&n, &tp), HotspotDecision::Stay);
    }

    #[test]
    fn cooled_sleeper_wakes() {
        let tp = params();
        let mut n = node_at(39.0 - 1.0);
        n.asleep = true;
        assert_eq!(classify_hotspot(&n, &tp), HotspotDecision::Wake);
    }

    #[test]
    fn awake_below_threshold_stays() {
        let tp = params();
        let n = node_at(38.9);
        assert_eq!(classify_hotspot(&n, &tp), HotspotDecision::Stay);
    }
}
