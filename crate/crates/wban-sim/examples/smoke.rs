use wban_sim::*;
use wban_sim::metrics::DropCause;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u32 = args.next().map(|s| s.parse().unwrap()).unwrap_or(50);
    let sim: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(120.0);
    let rate: f64 = args.next().map(|s| s.parse().unwrap()).unwrap_or(4.0);
    for proto in ProtocolKind::ALL {
        let mut cfg = ScenarioConfig::default();
        cfg.n_nodes = n;
        cfg.sim_time_s = sim;
        cfg.rate_pkts_per_s = rate;
        cfg.protocol = proto;
        let t0 = std::time::Instant::now();
        let r = run(&cfg).unwrap();
        let m = &r.metrics;
        let pct = 100.0 * m.delivered_total() as f64 / m.originated_total().max(1) as f64;
        println!("{:>9}: thr={:8.2} ({:4.1}%) delay={:8.1?}ms energy={:8.3}J nrl={:6.2?} ctrl={:6} sleeps={:3} peakT={:.2} viol={},{},{},{} [{:.1?}]",
            proto.name(), m.throughput_kbps, pct,
            m.mean_delay_ms.unwrap_or(f64::NAN),
            m.energy_consumed_j,
            m.nrl.unwrap_or(f64::NAN),
            m.control_tx, m.sleep_events, m.peak_temp_c,
            r.counters.relay_violations, r.counters.causality_violations,
            r.counters.medium_overlaps, r.counters.slot_sum_violations,
            t0.elapsed());
        print!("           drops: ");
        for c in DropCause::ALL {
            let n = r.counters.dropped_by_cause(c);
            if n > 0 { print!("{}={} ", c.name(), n); }
        }
        let avg_prr = r.counters.tx_prr_sum / r.counters.data_tx.max(1) as f64;
        let avg_hops = r.counters.delivered_hops_sum as f64 / m.delivered_total().max(1) as f64;
        println!("in_flight={} closure={} avg_tx_prr={:.3} avg_hops={:.2} data_tx={}", m.in_flight, r.counters.closure_holds(), avg_prr, avg_hops, r.counters.data_tx);
    }
}
