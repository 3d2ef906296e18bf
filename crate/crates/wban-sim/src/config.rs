//! Scenario configuration: the full description of one experiment.
//!
//! Scenarios are flat `key = value` text documents, one key per line, with
//! `#` comments. Keys match the [`ScenarioConfig`] field names; unspecified
//! keys take the documented defaults. All units are SI except temperatures
//! (degrees Celsius) and packet sizes (bytes).

use std::fmt::Write as _;

use crate::error::{Result, SimError};

/// Which routing protocol drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Proposed,
    EnsaBan,
    PAodv,
    Rrls,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 4] = [
        ProtocolKind::Proposed,
        ProtocolKind::EnsaBan,
        ProtocolKind::PAodv,
        ProtocolKind::Rrls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Proposed => "proposed",
            ProtocolKind::EnsaBan => "ensa_ban",
            ProtocolKind::PAodv => "p_aodv",
            ProtocolKind::Rrls => "rrls",
        }
    }

    pub fn parse(s: &str) -> Option<ProtocolKind> {
        match s {
            "proposed" => Some(ProtocolKind::Proposed),
            "ensa_ban" => Some(ProtocolKind::EnsaBan),
            "p_aodv" => Some(ProtocolKind::PAodv),
            "rrls" => Some(ProtocolKind::Rrls),
            _ => None,
        }
    }
}

/// A full experiment description. Every field can be set from a scenario
/// file or a `--set key=value` override; defaults reproduce the reference
/// parameter table (3 m x 3 m area, 50 nodes, 2 sinks, 100 J, 512 B CBR at
/// 4 pkt/s for 500 s).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    // Topology
    pub n_nodes: u32,
    pub n_sinks: u32,
    pub area_m: f64,
    pub range_m: f64,

    // Radio energy model
    pub initial_energy_j: f64,
    pub e_elec_j_per_bit: f64,
    pub e_amp_j_per_bit_per_m4: f64,
    pub path_loss_exponent: u32,

    // Traffic
    pub packet_size_bytes: u32,
    pub rate_pkts_per_s: f64,
    pub sim_time_s: f64,
    /// Sensor ids that originate traffic; empty means every sensor.
    pub sources: Vec<u32>,

    // Link layer
    pub bandwidth_hz: f64,
    /// Effective link bit-rate used for serialization times. The nominal
    /// 20 MHz channel bandwidth above is not a bit-rate; this knob is what
    /// actually paces the shared medium.
    pub link_rate_bps: f64,
    pub hello_interval_s: f64,
    pub hello_bytes: u32,
    pub prr_window: u32,
    pub ewma_alpha: f64,

    // Route cost (Eq 7 weights, normalized to sum 1 at load time)
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    /// Skip per-term normalization and sum raw quantities instead.
    pub cost_raw_units: bool,
    /// Reference delay used to normalize the delay term, in seconds.
    pub d_ref_s: f64,

    // Thermal model
    pub t_body_c: f64,
    pub t_thresh_c: f64,
    pub hysteresis_c: f64,
    /// Lumped volumetric heat capacity eta*C in J/degC.
    pub eta_c_product: f64,
    /// Blood-perfusion heat transfer rate in W/degC.
    pub omega: f64,
    /// Metabolic heat in W.
    pub q_met: f64,
    /// Watts of SAR heating per joule-per-second of radio energy.
    pub sar_coeff: f64,
    pub thermal_dt_s: f64,

    // Congestion control (Eq 8-9)
    pub lambda: f64,
    pub rci_tau_s: f64,
    pub demotion_factor: f64,

    // Scheduling
    pub superframe_s: f64,
    pub queue_max_age_s: f64,
    pub allowed_delay_normal_s: f64,
    pub allowed_delay_on_demand_s: f64,
    pub allowed_delay_emergency_s: f64,
    pub class_mix_on_demand: f64,
    pub class_mix_emergency: f64,

    // Routing maintenance
    pub route_refresh_s: f64,
    /// Relative change in a reported metric that marks routes dirty.
    pub route_dirty_threshold: f64,

    // Baseline protocol knobs
    pub beacon_interval_s: f64,
    pub lsa_interval_s: f64,

    pub rng_seed: u64,
    pub protocol: ProtocolKind,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_nodes: 50,
            n_sinks: 2,
            area_m: 3.0,
            range_m: 0.5,
            initial_energy_j: 100.0,
            e_elec_j_per_bit: 60e-9,
            e_amp_j_per_bit_per_m4: 1e-15,
            path_loss_exponent: 4,
            packet_size_bytes: 512,
            rate_pkts_per_s: 4.0,
            sim_time_s: 500.0,
            sources: Vec::new(),
            bandwidth_hz: 20e6,
            link_rate_bps: 10000000.0,
            hello_interval_s: 1.0,
            hello_bytes: 32,
            prr_window: 20,
            ewma_alpha: 0.3,
            w1: 0.3,
            w2: 0.3,
            w3: 0.2,
            w4: 0.2,
            cost_raw_units: false,
            d_ref_s: 0.1,
            t_body_c: 37.0,
            t_thresh_c: 39.0,
            hysteresis_c: 0.5,
            eta_c_product: 1.0,
            omega: 0.12,
            q_met: 0.0,
            sar_coeff: 17.0,
            thermal_dt_s: 1.0,
            lambda: 1.5,
            rci_tau_s: 10.0,
            demotion_factor: 4.0,
            superframe_s: 0.1,
            queue_max_age_s: 5.0,
            allowed_delay_normal_s: 1.0,
            allowed_delay_on_demand_s: 0.25,
            allowed_delay_emergency_s: 0.05,
            class_mix_on_demand: 0.15,
            class_mix_emergency: 0.05,
            route_refresh_s: 5.0,
            route_dirty_threshold: 0.1,
            beacon_interval_s: 5.0,
            lsa_interval_s: 5.0,
            rng_seed: 1,
            protocol: ProtocolKind::Proposed,
        }
    }
}

macro_rules! config_keys {
    ($($field:ident : $kind:ident),* $(,)?) => {
        /// All scenario keys, in serialization order.
        pub const KEYS: &[&str] = &[$(stringify!($field)),*];

        fn set_key(cfg: &mut ScenarioConfig, key: &str, value: &str, line: usize) -> Result<()> {
            match key {
                $(stringify!($field) => {
                    cfg.$field = parse_value!($kind, value, stringify!($field), line)?;
                    Ok(())
                })*
                _ => Err(SimError::Parse {
                    line,
                    msg: format!("unknown key `{key}`"),
                }),
            }
        }

        fn write_key(cfg: &ScenarioConfig, key: &str, out: &mut String) {
            match key {
                $(stringify!($field) => { emit_value!($kind, cfg.$field, out); })*
                _ => unreachable!(),
            }
        }
    };
}

macro_rules! parse_value {
    (f64, $v:expr, $field:expr, $line:expr) => {
        $v.parse::<f64>().map_err(|_| SimError::Parse {
            line: $line,
            msg: format!("expected a number for `{}`, got `{}`", $field, $v),
        })
    };
    (u32, $v:expr, $field:expr, $line:expr) => {
        $v.parse::<u32>().map_err(|_| SimError::Parse {
            line: $line,
            msg: format!("expected a non-negative integer for `{}`, got `{}`", $field, $v),
        })
    };
    (u64, $v:expr, $field:expr, $line:expr) => {
        $v.parse::<u64>().map_err(|_| SimError::Parse {
            line: $line,
            msg: format!("expected a non-negative integer for `{}`, got `{}`", $field, $v),
        })
    };
    (bool, $v:expr, $field:expr, $line:expr) => {
        match $v {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => Err(SimError::Parse {
                line: $line,
                msg: format!("expected true/false for `{}`, got `{}`", $field, $v),
            }),
        }
    };
    (protocol, $v:expr, $field:expr, $line:expr) => {
        ProtocolKind::parse($v).ok_or_else(|| SimError::Parse {
            line: $line,
            msg: format!(
                "unknown protocol `{}` (expected proposed|ensa_ban|p_aodv|rrls)",
                $v
            ),
        })
    };
    (id_list, $v:expr, $field:expr, $line:expr) => {
        parse_id_list($v, $line)
    };
}

macro_rules! emit_value {
    (protocol, $v:expr, $out:expr) => {
        $out.push_str($v.name())
    };
    (id_list, $v:expr, $out:expr) => {
        for (i, id) in $v.iter().enumerate() {
            if i > 0 {
                $out.push(',');
            }
            let _ = write!($out, "{id}");
        }
    };
    ($kind:ident, $v:expr, $out:expr) => {
        let _ = write!($out, "{}", $v);
    };
}

fn parse_id_list(v: &str, line: usize) -> Result<Vec<u32>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|part| {
            part.trim().parse::<u32>().map_err(|_| SimError::Parse {
                line,
                msg: format!("expected a comma-separated id list, got `{v}`"),
            })
        })
        .collect()
}

config_keys! {
    n_nodes: u32,
    n_sinks: u32,
    area_m: f64,
    range_m: f64,
    initial_energy_j: f64,
    e_elec_j_per_bit: f64,
    e_amp_j_per_bit_per_m4: f64,
    path_loss_exponent: u32,
    packet_size_bytes: u32,
    rate_pkts_per_s: f64,
    sim_time_s: f64,
    sources: id_list,
    bandwidth_hz: f64,
    link_rate_bps: f64,
    hello_interval_s: f64,
    hello_bytes: u32,
    prr_window: u32,
    ewma_alpha: f64,
    w1: f64,
    w2: f64,
    w3: f64,
    w4: f64,
    cost_raw_units: bool,
    d_ref_s: f64,
    t_body_c: f64,
    t_thresh_c: f64,
    hysteresis_c: f64,
    eta_c_product: f64,
    omega: f64,
    q_met: f64,
    sar_coeff: f64,
    thermal_dt_s: f64,
    lambda: f64,
    rci_tau_s: f64,
    demotion_factor: f64,
    superframe_s: f64,
    queue_max_age_s: f64,
    allowed_delay_normal_s: f64,
    allowed_delay_on_demand_s: f64,
    allowed_delay_emergency_s: f64,
    class_mix_on_demand: f64,
    class_mix_emergency: f64,
    route_refresh_s: f64,
    route_dirty_threshold: f64,
    beacon_interval_s: f64,
    lsa_interval_s: f64,
    rng_seed: u64,
    protocol: protocol,
}

impl ScenarioConfig {
    /// Parse a scenario document. Unset keys keep their defaults; the result
    /// is validated and has its cost weights normalized to sum to one.
    pub fn load(text: &str) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.split_once('#') {
                Some((before, _)) => before,
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| SimError::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            set_key(&mut cfg, key.trim(), value.trim(), line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply a single `key=value` override (used by the CLI after file parsing).
    pub fn apply_override(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair.split_once('=').ok_or_else(|| SimError::Parse {
            line: 0,
            msg: format!("override must be `key=value`, got `{pair}`"),
        })?;
        set_key(self, key.trim(), value.trim(), 0)
    }

    /// Serialize to the scenario text format; `load` on the result yields an
    /// equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(key);
            out.push_str(" = ");
            write_key(self, key, &mut out);
            out.push('\n');
        }
        out
    }

    pub fn packet_size_bits(&self) -> u64 {
        self.packet_size_bytes as u64 * 8
    }

    pub fn hello_bits(&self) -> u64 {
        self.hello_bytes as u64 * 8
    }

    /// Cost weights normalized to sum to one.
    pub fn weights(&self) -> (f64, f64, f64, f64) {
        let sum = self.w1 + self.w2 + self.w3 + self.w4;
        (self.w1 / sum, self.w2 / sum, self.w3 / sum, self.w4 / sum)
    }

    /// Check every invariant; called by `load` and again by the engine.
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SimError::Validation {
                    field,
                    msg: format!("must be strictly positive, got {v}"),
                })
            }
        }

        if self.n_nodes == 0 {
            return Err(SimError::Validation {
                field: "n_nodes",
                msg: "at least one sensor is required".into(),
            });
        }
        if self.n_sinks == 0 || self.n_sinks > 4 {
            return Err(SimError::Validation {
                field: "n_sinks",
                msg: format!(
                    "sinks are placed on the four edge midpoints, so 1..=4 are supported, got {}",
                    self.n_sinks
                ),
            });
        }
        positive("area_m", self.area_m)?;
        positive("range_m", self.range_m)?;
        positive("initial_energy_j", self.initial_energy_j)?;
        positive("e_elec_j_per_bit", self.e_elec_j_per_bit)?;
        positive("e_amp_j_per_bit_per_m4", self.e_amp_j_per_bit_per_m4)?;
        if self.path_loss_exponent != 2 && self.path_loss_exponent != 4 {
            return Err(SimError::Validation {
                field: "path_loss_exponent",
                msg: format!("must be 2 or 4, got {}", self.path_loss_exponent),
            });
        }
        if self.packet_size_bytes == 0 {
            return Err(SimError::Validation {
                field: "packet_size_bytes",
                msg: "must be strictly positive".into(),
            });
        }
        positive("rate_pkts_per_s", self.rate_pkts_per_s)?;
        if self.sim_time_s < 0.0 || !self.sim_time_s.is_finite() {
            return Err(SimError::Validation {
                field: "sim_time_s",
                msg: format!("must be non-negative, got {}", self.sim_time_s),
            });
        }
        for &src in &self.sources {
            if src >= self.n_nodes {
                return Err(SimError::Validation {
                    field: "sources",
                    msg: format!("source id {src} is not a sensor (n_nodes = {})", self.n_nodes),
                });
            }
        }
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("link_rate_bps", self.link_rate_bps)?;
        positive("hello_interval_s", self.hello_interval_s)?;
        if self.hello_bytes == 0 {
            return Err(SimError::Validation {
                field: "hello_bytes",
                msg: "must be strictly positive".into(),
            });
        }
        if self.prr_window == 0 {
            return Err(SimError::Validation {
                field: "prr_window",
                msg: "window must hold at least one slot".into(),
            });
        }
        if !(self.ewma_alpha > 0.0 && self.ewma_alpha < 1.0) {
            return Err(SimError::Validation {
                field: "ewma_alpha",
                msg: format!("must lie strictly between 0 and 1, got {}", self.ewma_alpha),
            });
        }
        let ws = [self.w1, self.w2, self.w3, self.w4];
        if ws.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(SimError::Validation {
                field: "w1",
                msg: "cost weights must be non-negative".into(),
            });
        }
        if ws.iter().sum::<f64>() <= 0.0 {
            return Err(SimError::Validation {
                field: "w1",
                msg: "cost weights must not all be zero".into(),
            });
        }
        positive("d_ref_s", self.d_ref_s)?;
        if self.t_thresh_c <= self.t_body_c {
            return Err(SimError::Validation {
                field: "t_thresh_c",
                msg: format!(
                    "threshold {} must exceed body temperature {}",
                    self.t_thresh_c, self.t_body_c
                ),
            });
        }
        positive("hysteresis_c", self.hysteresis_c)?;
        positive("eta_c_product", self.eta_c_product)?;
        if self.omega < 0.0 || !self.omega.is_finite() {
            return Err(SimError::Validation {
                field: "omega",
                msg: format!("must be non-negative, got {}", self.omega),
            });
        }
        if self.q_met < 0.0 {
            return Err(SimError::Validation {
                field: "q_met",
                msg: "must be non-negative".into(),
            });
        }
        if self.sar_coeff < 0.0 {
            return Err(SimError::Validation {
                field: "sar_coeff",
                msg: "must be non-negative".into(),
            });
        }
        positive("thermal_dt_s", self.thermal_dt_s)?;
        if self.omega > 0.0 && self.thermal_dt_s > self.eta_c_product / self.omega {
            return Err(SimError::UnstableStep {
                dt: self.thermal_dt_s,
                limit: self.eta_c_product / self.omega,
            });
        }
        if self.lambda <= 1.0 {
            return Err(SimError::Validation {
                field: "lambda",
                msg: format!("congestion factor must exceed 1, got {}", self.lambda),
            });
        }
        positive("rci_tau_s", self.rci_tau_s)?;
        if self.demotion_factor < 1.0 {
            return Err(SimError::Validation {
                field: "demotion_factor",
                msg: "must be at least 1".into(),
            });
        }
        positive("superframe_s", self.superframe_s)?;
        positive("queue_max_age_s", self.queue_max_age_s)?;
        positive("allowed_delay_normal_s", self.allowed_delay_normal_s)?;
        positive("allowed_delay_on_demand_s", self.allowed_delay_on_demand_s)?;
        positive("allowed_delay_emergency_s", self.allowed_delay_emergency_s)?;
        let mix = self.class_mix_on_demand + self.class_mix_emergency;
        if self.class_mix_on_demand < 0.0 || self.class_mix_emergency < 0.0 || mix > 1.0 {
            return Err(SimError::Validation {
                field: "class_mix_on_demand",
                msg: "class fractions must be non-negative and sum to at most 1".into(),
            });
        }
        positive("route_refresh_s", self.route_refresh_s)?;
        positive("route_dirty_threshold", self.route_dirty_threshold)?;
        positive("beacon_interval_s", self.beacon_interval_s)?;
        positive("lsa_interval_s", self.lsa_interval_s)?;
        Ok(())
    }
}
