//! Metric computation and report serialization: throughput, end-to-end
//! delay, energy consumption and normalized routing load, plus the
//! comparison summaries used to rank protocols.

use std::fmt::Write as _;

use crate::config::{ProtocolKind, ScenarioConfig};
use crate::error::SimError;
use crate::model::{NodeState, PacketClass};

/// Why a data packet left the system without reaching a sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropCause {
    /// Lost on the air (Bernoulli channel).
    LinkLoss,
    /// No sink reachable from the holder.
    NoRoute,
    /// No eligible neighbor for a greedy or diverting forwarder.
    NoForwarder,
    /// Exceeded the queue starvation bound.
    MaxAge,
    /// Queue of a node that ran out of energy.
    DeadNode,
    /// Receiver was dead or sleeping when the packet arrived.
    ReceiverUnavailable,
    /// Forwarding would have revisited a node already in the hop trace.
    RoutingLoop,
}

impl DropCause {
    pub const ALL: [DropCause; 7] = [
        DropCause::LinkLoss,
        DropCause::NoRoute,
        DropCause::NoForwarder,
        DropCause::MaxAge,
        DropCause::DeadNode,
        DropCause::ReceiverUnavailable,
        DropCause::RoutingLoop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DropCause::LinkLoss => "link_loss",
            DropCause::NoRoute => "no_route",
            DropCause::NoForwarder => "no_forwarder",
            DropCause::MaxAge => "max_age",
            DropCause::DeadNode => "dead_node",
            DropCause::ReceiverUnavailable => "receiver_unavailable",
            DropCause::RoutingLoop => "routing_loop",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap()
    }
}

/// Raw per-run tallies filled by the engine.
#[derive(Debug, Clone, Default)]
pub struct Counters {
    pub originated: [u64; 3],
    pub delivered: [u64; 3],
    pub dropped: [[u64; 3]; 7],
    pub in_flight: [u64; 3],
    pub delivered_bits: u64,
    pub delay_sum_s: [f64; 3],
    /// Every per-hop control transmission: HELLOs, beacons, floods, replies.
    pub control_tx: u64,
    /// Control packets shed at the queue cap, never transmitted.
    pub control_dropped: u64,
    pub data_tx: u64,
    /// Queue evacuations transmitted by a node entering hotspot sleep.
    pub evacuation_tx: u64,
    /// Energy actually drawn from sensor batteries, per-event ledger.
    pub energy_charged_j: f64,
    /// Forwardings by a sleeping or above-threshold relay (evacuations
    /// excepted); the hotspot soundness audit requires zero.
    pub relay_violations: u64,
    /// Hop timestamps out of order; the causality audit requires zero.
    pub causality_violations: u64,
    /// Transmissions overlapping on the shared medium; must stay zero.
    pub medium_overlaps: u64,
    /// Slot tilings that failed to sum to their frame; must stay zero.
    pub slot_sum_violations: u64,
    pub sleep_events: u64,
    pub wake_events: u64,
    /// Diagnostics: ground-truth reliability summed over data transmissions,
    /// and hop counts summed over delivered packets.
    pub tx_prr_sum: f64,
    pub delivered_hops_sum: u64,
}

impl Counters {
    pub fn count_drop(&mut self, cause: DropCause, class: PacketClass) {
        self.dropped[cause.index()][class.index()] += 1;
    }

    pub fn originated_total(&self) -> u64 {
        self.originated.iter().sum()
    }

    pub fn delivered_total(&self) -> u64 {
        self.delivered.iter().sum()
    }

    pub fn dropped_total(&self) -> u64 {
        self.dropped.iter().flatten().sum()
    }

    pub fn dropped_by_cause(&self, cause: DropCause) -> u64 {
        self.dropped[cause.index()].iter().sum()
    }

    pub fn in_flight_total(&self) -> u64 {
        self.in_flight.iter().sum()
    }

    /// originated = delivered + dropped + in-flight, per class.
    pub fn closure_holds(&self) -> bool {
        PacketClass::ALL.iter().all(|c| {
            let i = c.index();
            let dropped: u64 = self.dropped.iter().map(|row| row[i]).sum();
            self.originated[i] == self.delivered[i] + dropped + self.in_flight[i]
        })
    }
}

/// The computed metrics of one run, together with the full scenario echo so
/// every number is reproducible from the report alone.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub n_nodes: u32,
    pub rate_pkts_per_s: f64,
    pub sim_time_s: f64,
    /// Delivered application bits / sim time / 1000.
    pub throughput_kbps: f64,
    /// Mean end-to-end delay over delivered data packets; absent when
    /// nothing was delivered.
    pub mean_delay_ms: Option<f64>,
    pub delay_ms_by_class: [Option<f64>; 3],
    /// Total energy drawn across sensors.
    pub energy_consumed_j: f64,
    /// Control transmissions per delivered data packet.
    pub nrl: Option<f64>,
    pub originated: [u64; 3],
    pub delivered: [u64; 3],
    pub dropped: [u64; 7],
    pub in_flight: u64,
    pub control_tx: u64,
    pub control_dropped: u64,
    pub data_tx: u64,
    pub evacuation_tx: u64,
    pub peak_temp_c: f64,
    pub sleep_events: u64,
    pub event_count: u64,
    /// Full scenario text, `load`-able.
    pub config_echo: String,
}

/// Compute the report from engine tallies and final node states.
pub fn compute_metrics(
    counters: &Counters,
    final_nodes: &[NodeState],
    cfg: &ScenarioConfig,
    event_count: u64,
) -> MetricsReport {
    let delivered_total = counters.delivered_total();
    let throughput_kbps = if cfg.sim_time_s > 0.0 {
        counters.delivered_bits as f64 / cfg.sim_time_s / 1000.0
    } else {
        0.0
    };
    let mean_delay_ms = if delivered_total > 0 {
        let total: f64 = counters.delay_sum_s.iter().sum();
        Some(total / delivered_total as f64 * 1000.0)
    } else {
        None
    };
    let delay_ms_by_class = PacketClass::ALL.map(|c| {
        let i = c.index();
        if counters.delivered[i] > 0 {
            Some(counters.delay_sum_s[i] / counters.delivered[i] as f64 * 1000.0)
        } else {
            None
        }
    });
    let energy_consumed_j: f64 = final_nodes
        .iter()
        .filter(|n| !n.is_sink())
        .map(|n| cfg.initial_energy_j - n.energy_j)
        .sum();
    let nrl = if delivered_total > 0 {
        Some(counters.control_tx as f64 / delivered_total as f64)
    } else {
        None
    };
    let peak_temp_c = final_nodes
        .iter()
        .filter(|n| !n.is_sink())
        .map(|n| n.peak_temperature_c)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut dropped = [0u64; 7];
    for (i, row) in counters.dropped.iter().enumerate() {
        dropped[i] = row.iter().sum();
    }
    MetricsReport {
        protocol: cfg.protocol,
        seed: cfg.rng_seed,
        n_nodes: cfg.n_nodes,
        rate_pkts_per_s: cfg.rate_pkts_per_s,
        sim_time_s: cfg.sim_time_s,
        throughput_kbps,
        mean_delay_ms,
        delay_ms_by_class,
        energy_consumed_j,
        nrl,
        originated: counters.originated,
        delivered: counters.delivered,
        dropped,
        in_flight: counters.in_flight_total(),
        control_tx: counters.control_tx,
        control_dropped: counters.control_dropped,
        data_tx: counters.data_tx,
        evacuation_tx: counters.evacuation_tx,
        peak_temp_c,
        sleep_events: counters.sleep_events,
        event_count,
        config_echo: cfg.to_text(),
    }
}

const COLUMNS: &[&str] = &[
    "protocol",
    "seed",
    "n_nodes",
    "rate_pkts_per_s",
    "sim_time_s",
    "throughput_kbps",
    "mean_delay_ms",
    "delay_normal_ms",
    "delay_on_demand_ms",
    "delay_emergency_ms",
    "energy_j",
    "nrl",
    "originated_normal",
    "originated_on_demand",
    "originated_emergency",
    "delivered_normal",
    "delivered_on_demand",
    "delivered_emergency",
    "dropped_link_loss",
    "dropped_no_route",
    "dropped_no_forwarder",
    "dropped_max_age",
    "dropped_dead_node",
    "dropped_receiver_unavailable",
    "dropped_routing_loop",
    "in_flight",
    "control_tx",
    "control_dropped",
    "data_tx",
    "evacuation_tx",
    "peak_temp_c",
    "sleep_events",
    "event_count",
];

fn opt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".to_string(),
    }
}

impl MetricsReport {
    pub fn originated_total(&self) -> u64 {
        self.originated.iter().sum()
    }

    pub fn delivered_total(&self) -> u64 {
        self.delivered.iter().sum()
    }

    pub fn dropped_total(&self) -> u64 {
        self.dropped.iter().sum()
    }

    /// One row of machine-readable values in column order.
    fn row(&self) -> Vec<String> {
        let mut row = vec![
            self.protocol.name().to_string(),
            self.seed.to_string(),
            self.n_nodes.to_string(),
            format!("{}", self.rate_pkts_per_s),
            format!("{}", self.sim_time_s),
            format!("{}", self.throughput_kbps),
            opt_f64(self.mean_delay_ms),
            opt_f64(self.delay_ms_by_class[0]),
            opt_f64(self.delay_ms_by_class[1]),
            opt_f64(self.delay_ms_by_class[2]),
            format!("{}", self.energy_consumed_j),
            opt_f64(self.nrl),
        ];
        for v in self.originated {
            row.push(v.to_string());
        }
        for v in self.delivered {
            row.push(v.to_string());
        }
        for v in self.dropped {
            row.push(v.to_string());
        }
        row.push(self.in_flight.to_string());
        row.push(self.control_tx.to_string());
        row.push(self.control_dropped.to_string());
        row.push(self.data_tx.to_string());
        row.push(self.evacuation_tx.to_string());
        row.push(format!("{}", self.peak_temp_c));
        row.push(self.sleep_events.to_string());
        row.push(self.event_count.to_string());
        row
    }

    /// Machine table: `#cfg` echo lines, a tab-separated header row in fixed
    /// column order, then one data row per report.
    pub fn to_machine_table(reports: &[&MetricsReport]) -> String {
        let mut out = String::new();
        if let Some(first) = reports.first() {
            for line in first.config_echo.lines() {
                let _ = writeln!(out, "#cfg {line}");
            }
        }
        out.push_str(&COLUMNS.join("\t"));
        out.push('\n');
        for r in reports {
            out.push_str(&r.row().join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_machine_row(&self) -> String {
        Self::to_machine_table(&[self])
    }

    /// Parse a machine table back into reports. Inverse of
    /// [`MetricsReport::to_machine_table`] up to the shared config echo.
    pub fn parse_machine_table(text: &str) -> Result<Vec<MetricsReport>, SimError> {
        let mut echo = String::new();
        let mut saw_header = false;
        let mut reports = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("#cfg") {
                echo.push_str(rest.strip_prefix(' ').unwrap_or(rest));
                echo.push('\n');
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !saw_header {
                let cols: Vec<&str> = line.split('\t').collect();
                if cols != COLUMNS {
                    return Err(SimError::ReportParse(format!("unexpected header: {line}")));
                }
                saw_header = true;
            } else {
                reports.push(parse_row(line, &echo)?);
            }
        }
        if !saw_header {
            return Err(SimError::ReportParse("missing header row".into()));
        }
        Ok(reports)
    }

    /// Human-oriented summary of one run.
    pub fn to_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} run (seed {}, {} nodes, {} pkt/s, {} s)",
            self.protocol.name(),
            self.seed,
            self.n_nodes,
            self.rate_pkts_per_s,
            self.sim_time_s
        );
        let _ = writeln!(s, "  throughput        {:>12.3} kbps", self.throughput_kbps);
        match self.mean_delay_ms {
            Some(d) => {
                let _ = writeln!(s, "  mean delay        {d:>12.3} ms");
            }
            None => {
                let _ = writeln!(s, "  mean delay        {:>12} (nothing delivered)", "-");
            }
        }
        for (c, d) in PacketClass::ALL.iter().zip(self.delay_ms_by_class) {
            if let Some(d) = d {
                let _ = writeln!(s, "    {:<12}    {d:>12.3} ms", c.name());
            }
        }
        let _ = writeln!(s, "  energy consumed   {:>12.3} J", self.energy_consumed_j);
        match self.nrl {
            Some(n) => {
                let _ = writeln!(s, "  routing load      {n:>12.3} control tx / delivered");
            }
            None => {
                let _ = writeln!(s, "  routing load      {:>12} (nothing delivered)", "-");
            }
        }
        let _ = writeln!(
            s,
            "  packets           {} originated, {} delivered, {} dropped, {} in flight",
            self.originated_total(),
            self.delivered_total(),
            self.dropped_total(),
            self.in_flight
        );
        for (cause, n) in DropCause::ALL.iter().zip(self.dropped) {
            if n > 0 {
                let _ = writeln!(s, "    dropped {:<21} {n}", cause.name());
            }
        }
        let _ = writeln!(
            s,
            "  control           {} tx ({} shed), data {} tx",
            self.control_tx, self.control_dropped, self.data_tx
        );
        let _ = writeln!(
            s,
            "  peak temperature  {:>12.3} C ({} hotspot sleeps)",
            self.peak_temp_c, self.sleep_events
        );
        s
    }
}

fn parse_row(line: &str, echo: &str) -> Result<MetricsReport, SimError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != COLUMNS.len() {
        return Err(SimError::ReportParse(format!(
            "expected {} columns, got {}",
            COLUMNS.len(),
            fields.len()
        )));
    }
    let mut it = fields.into_iter();
    let mut next = || it.next().expect("length checked");
    fn err(what: &str, v: &str) -> SimError {
        SimError::ReportParse(format!("bad {what}: `{v}`"))
    }
    fn parse_f(v: &str, what: &str) -> Result<f64, SimError> {
        v.parse::<f64>().map_err(|_| err(what, v))
    }
    fn parse_u(v: &str, what: &str) -> Result<u64, SimError> {
        v.parse::<u64>().map_err(|_| err(what, v))
    }
    fn parse_opt(v: &str, what: &str) -> Result<Option<f64>, SimError> {
        if v == "NA" {
            Ok(None)
        } else {
            Ok(Some(parse_f(v, what)?))
        }
    }

    let protocol_s = next();
    let protocol = ProtocolKind::parse(protocol_s).ok_or_else(|| err("protocol", protocol_s))?;
    let seed = parse_u(next(), "seed")?;
    let n_nodes = parse_u(next(), "n_nodes")? as u32;
    let rate_pkts_per_s = parse_f(next(), "rate")?;
    let sim_time_s = parse_f(next(), "sim_time")?;
    let throughput_kbps = parse_f(next(), "throughput")?;
    let mean_delay_ms = parse_opt(next(), "mean_delay")?;
    let mut delay_ms_by_class = [None; 3];
    for slot in &mut delay_ms_by_class {
        *slot = parse_opt(next(), "class delay")?;
    }
    let energy_consumed_j = parse_f(next(), "energy")?;
    let nrl = parse_opt(next(), "nrl")?;
    let mut originated = [0u64; 3];
    for slot in &mut originated {
        *slot = parse_u(next(), "originated")?;
    }
    let mut delivered = [0u64; 3];
    for slot in &mut delivered {
        *slot = parse_u(next(), "delivered")?;
    }
    let mut dropped = [0u64; 7];
    for slot in &mut dropped {
        *slot = parse_u(next(), "dropped")?;
    }
    let in_flight = parse_u(next(), "in_flight")?;
    let control_tx = parse_u(next(), "control_tx")?;
    let control_dropped = parse_u(next(), "control_dropped")?;
    let data_tx = parse_u(next(), "data_tx")?;
    let evacuation_tx = parse_u(next(), "evacuation_tx")?;
    let peak_temp_c = parse_f(next(), "peak_temp")?;
    let sleep_events = parse_u(next(), "sleep_events")?;
    let event_count = parse_u(next(), "event_count")?;
    Ok(MetricsReport {
        protocol,
        seed,
        n_nodes,
        rate_pkts_per_s,
        sim_time_s,
        throughput_kbps,
        mean_delay_ms,
        delay_ms_by_class,
        energy_consumed_j,
        nrl,
        originated,
        delivered,
        dropped,
        in_flight,
        control_tx,
        control_dropped,
        data_tx,
        evacuation_tx,
        peak_temp_c,
        sleep_events,
        event_count,
        config_echo: echo.to_string(),
    })
}

/// Relative standing of the flagship protocol against one baseline.
#[derive(Debug, Clone)]
pub struct BaselineComparison {
    pub baseline: ProtocolKind,
    /// proposed / baseline per metric; delay and nrl may be absent.
    pub throughput_ratio: f64,
    pub delay_ratio: Option<f64>,
    pub energy_ratio: f64,
    pub nrl_ratio: Option<f64>,
}

/// Directional standing of the flagship against every baseline.
#[derive(Debug, Clone)]
pub struct ComparisonSummary {
    pub per_baseline: Vec<BaselineComparison>,
    pub throughput_up: bool,
    pub delay_down: bool,
    pub energy_down: bool,
    pub nrl_down: bool,
    /// Gain vs the strongest baseline per metric, as a fraction; positive
    /// means the flagship is better.
    pub throughput_gain_vs_best: f64,
    pub delay_gain_vs_best: Option<f64>,
    pub energy_gain_vs_best: f64,
    pub nrl_gain_vs_best: Option<f64>,
}

/// Compare one flagship report against baseline reports from the same
/// scenario and seed. Panics if the flagship report is missing.
pub fn compare_runs(reports: &[(ProtocolKind, &MetricsReport)]) -> ComparisonSummary {
    let proposed = reports
        .iter()
        .find(|(k, _)| *k == ProtocolKind::Proposed)
        .map(|(_, r)| *r)
        .expect("comparison requires a proposed-protocol report");
    let baselines: Vec<(ProtocolKind, &MetricsReport)> = reports
        .iter()
        .filter(|(k, _)| *k != ProtocolKind::Proposed)
        .map(|(k, r)| (*k, *r))
        .collect();
    assert!(!baselines.is_empty(), "comparison requires at least one baseline");

    let per_baseline: Vec<BaselineComparison> = baselines
        .iter()
        .map(|(kind, b)| BaselineComparison {
            baseline: *kind,
            throughput_ratio: ratio(proposed.throughput_kbps, b.throughput_kbps),
            delay_ratio: opt_ratio(proposed.mean_delay_ms, b.mean_delay_ms),
            energy_ratio: ratio(proposed.energy_consumed_j, b.energy_consumed_j),
            nrl_ratio: opt_ratio(proposed.nrl, b.nrl),
        })
        .collect();

    let best_throughput =
        baselines.iter().map(|(_, b)| b.throughput_kbps).fold(0.0, f64::max);
    let best_delay =
        baselines.iter().filter_map(|(_, b)| b.mean_delay_ms).fold(f64::INFINITY, f64::min);
    let best_energy =
        baselines.iter().map(|(_, b)| b.energy_consumed_j).fold(f64::INFINITY, f64::min);
    let best_nrl = baselines.iter().filter_map(|(_, b)| b.nrl).fold(f64::INFINITY, f64::min);

    ComparisonSummary {
        throughput_up: baselines
            .iter()
            .all(|(_, b)| proposed.throughput_kbps >= b.throughput_kbps),
        delay_down: baselines.iter().all(|(_, b)| {
            match (proposed.mean_delay_ms, b.mean_delay_ms) {
                (Some(p), Some(q)) => p <= q,
                _ => false,
            }
        }),
        energy_down: baselines
            .iter()
            .all(|(_, b)| proposed.energy_consumed_j <= b.energy_consumed_j),
        nrl_down: baselines.iter().all(|(_, b)| match (proposed.nrl, b.nrl) {
            (Some(p), Some(q)) => p <= q,
            _ => false,
        }),
        throughput_gain_vs_best: safe_gain(proposed.throughput_kbps, best_throughput),
        delay_gain_vs_best: proposed
            .mean_delay_ms
            .filter(|_| best_delay.is_finite())
            .map(|p| safe_gain(best_delay, p)),
        energy_gain_vs_best: safe_gain(best_energy, proposed.energy_consumed_j),
        nrl_gain_vs_best: proposed
            .nrl
            .filter(|_| best_nrl.is_finite())
            .map(|p| safe_gain(best_nrl, p)),
        per_baseline,
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

fn opt_ratio(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(a), Some(b)) if b != 0.0 => Some(a / b),
        _ => None,
    }
}

/// (a - b) / b: how much larger `a` is than `b`, as a fraction.
fn safe_gain(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (a - b) / b
    }
}

/// Serialize (x, y) series rows for plotting tools.
pub fn emit_series(points: &[(f64, f64)]) -> String {
    let mut out = String::from("x\ty\n");
    for (x, y) in points {
        let _ = writeln!(out, "{x}\t{y}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(protocol: ProtocolKind, throughput: f64) -> MetricsReport {
        MetricsReport {
            protocol,
            seed: 1,
            n_nodes: 50,
            rate_pkts_per_s: 4.0,
            sim_time_s: 10.0,
            throughput_kbps: throughput,
            mean_delay_ms: Some(12.5),
            delay_ms_by_class: [Some(13.0), Some(11.0), None],
            energy_consumed_j: 3.25,
            nrl: Some(1.5),
            originated: [32, 6, 2],
            delivered: [30, 6, 2],
            dropped: [2, 0, 0, 0, 0, 0, 0],
            in_flight: 0,
            control_tx: 57,
            control_dropped: 0,
            data_tx: 95,
            evacuation_tx: 0,
            peak_temp_c: 37.8,
            sleep_events: 0,
            event_count: 1234,
            config_echo: ScenarioConfig::default().to_text(),
        }
    }

    #[test]
    fn throughput_arithmetic() {
        let mut counters = Counters::default();
        counters.delivered = [40, 0, 0];
        counters.delivered_bits = 40 * 4096;
        counters.delay_sum_s = [40.0 * 0.012, 0.0, 0.0];
        let mut cfg = ScenarioConfig::default();
        cfg.sim_time_s = 10.0;
        let report = compute_metrics(&counters, &[], &cfg, 0);
        assert!((report.throughput_kbps - 16.384).abs() < 1e-9);
        assert!((report.mean_delay_ms.unwrap() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn empty_run_marks_delay_absent() {
        let counters = Counters::default();
        let report = compute_metrics(&counters, &[], &ScenarioConfig::default(), 0);
        assert_eq!(report.throughput_kbps, 0.0);
        assert!(report.mean_delay_ms.is_none());
        assert!(report.nrl.is_none());
    }

    #[test]
    fn nrl_is_control_over_delivered() {
        let mut counters = Counters::default();
        counters.delivered = [100, 0, 0];
        counters.control_tx = 300;
        let report = compute_metrics(&counters, &[], &ScenarioConfig::default(), 0);
        assert!((report.nrl.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn machine_table_round_trips() {
        let report = sample_report(ProtocolKind::Proposed, 16.384);
        let text = report.to_machine_row();
        let parsed = MetricsReport::parse_machine_table(&text).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0], report);
    }

    #[test]
    fn multi_row_table_round_trips() {
        let a = sample_report(ProtocolKind::Proposed, 16.384);
        let b = sample_report(ProtocolKind::Rrls, 11.02);
        let text = MetricsReport::to_machine_table(&[&a, &b]);
        let parsed = MetricsReport::parse_machine_table(&text).unwrap();
        assert_eq!(parsed, vec![a, b]);
    }

    #[test]
    fn header_only_table_parses_empty() {
        let text = COLUMNS.join("\t") + "\n";
        let parsed = MetricsReport::parse_machine_table(&text).unwrap();
        assert!(parsed.is_empty());
    }

    #[test]
    fn comparison_flags_and_gains() {
        let proposed = sample_report(ProtocolKind::Proposed, 230.0);
        let ensa = sample_report(ProtocolKind::EnsaBan, 200.0);
        let summary = compare_runs(&[
            (ProtocolKind::Proposed, &proposed),
            (ProtocolKind::EnsaBan, &ensa),
        ]);
        assert!(summary.throughput_up);
        assert!((summary.per_baseline[0].throughput_ratio - 1.15).abs() < 1e-12);
        assert!((summary.throughput_gain_vs_best - 0.15).abs() < 1e-12);
    }

    #[test]
    fn identical_reports_compare_neutral() {
        let proposed = sample_report(ProtocolKind::Proposed, 100.0);
        let mut twin = proposed.clone();
        twin.protocol = ProtocolKind::PAodv;
        let summary =
            compare_runs(&[(ProtocolKind::Proposed, &proposed), (ProtocolKind::PAodv, &twin)]);
        assert!((summary.per_baseline[0].throughput_ratio - 1.0).abs() < 1e-12);
        assert_eq!(summary.throughput_gain_vs_best, 0.0);
        assert!(summary.throughput_up && summary.delay_down && summary.energy_down);
    }

    #[test]
    fn nrl_reduction_example() {
        let mut proposed = sample_report(ProtocolKind::Proposed, 100.0);
        proposed.nrl = Some(1.78);
        let mut rrls = sample_report(ProtocolKind::Rrls, 90.0);
        rrls.nrl = Some(4.0);
        let summary =
            compare_runs(&[(ProtocolKind::Proposed, &proposed), (ProtocolKind::Rrls, &rrls)]);
        let drop = 1.0 - summary.per_baseline[0].nrl_ratio.unwrap();
        assert!((drop - 0.555).abs() < 1e-3, "drop {drop}");
    }

    #[test]
    fn closure_check() {
        let mut counters = Counters::default();
        counters.originated = [10, 2, 1];
        counters.delivered = [7, 2, 0];
        counters.dropped[DropCause::LinkLoss.index()] = [2, 0, 1];
        counters.in_flight = [1, 0, 0];
        assert!(counters.closure_holds());
        counters.in_flight = [0, 0, 0];
        assert!(!counters.closure_holds());
    }

    #[test]
    fn series_format() {
        let s = emit_series(&[(50.0, 230.0), (100.0, 210.5)]);
        assert_eq!(s, "x\ty\n50\t230\n100\t210.5\n");
    }
}
