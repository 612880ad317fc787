use crate::model::FailSlowEvent;
use crate::sim::closed_loop::RunReport;

/// Line-delimited timeline records, one JSON object per iteration with
/// fixed 6-decimal durations so reports are byte-stable.
pub fn timeline_lines(report: &RunReport) -> String {
    let mut out = String::new();
    for r in &report.iterations {
        let ids: Vec<String> = r.active_events.iter().map(|i| i.to_string()).collect();
        let strategy = match r.active_strategy {
            Some(s) => format!("\"{s}\""),
            None => "null".to_string(),
        };
        out.push_str(&format!(
            "{{\"iter\":{},\"time_s\":{:.6},\"active_events\":[{}],\"active_strategy\":{}}}\n",
            r.iter,
            r.time_s,
            ids.join(","),
            strategy
        ));
    }
    out
}

fn event_json(id: usize, ev: &FailSlowEvent) -> String {
    let recovery = match ev.recovery_iter {
        Some(r) => r.to_string(),
        None => "null".to_string(),
    };
    let located = match &ev.located {
        Some(cs) => {
            let names: Vec<String> = cs.iter().map(|c| format!("\"{c}\"")).collect();
            format!("[{}]", names.join(","))
        }
        None => "null".to_string(),
    };
    format!(
        "{{\"record\":\"event\",\"id\":{id},\"onset_iter\":{},\"recovery_iter\":{recovery},\"kind\":\"{}\",\"located\":{located},\"severity\":{:.6}}}",
        ev.onset_iter, ev.kind, ev.severity
    )
}

/// Event log: detected events and the mitigation actions they triggered,
/// one record per line in a stable order.
pub fn event_lines(report: &RunReport) -> String {
    let mut out = String::new();
    for e in &report.events {
        out.push_str(&event_json(e.id, &e.event));
        out.push('\n');
    }
    for a in &report.actions {
        out.push_str(&format!(
            "{{\"record\":\"action\",\"iter\":{},\"event_id\":{},\"strategy\":\"{}\",\"accumulated_impact\":{:.6},\"detail\":\"{}\"}}\n",
            a.iter, a.event_id, a.strategy, a.accumulated_impact, a.detail
        ));
    }
    out
}

/// Slowdown of an arm versus the healthy throughput, in percent.
pub fn slowdown_pct(healthy_throughput: f64, arm_throughput: f64) -> f64 {
    (healthy_throughput - arm_throughput) / healthy_throughput * 100.0
}

/// Cross-arm summary in the healthy / fail-slow / mitigated layout. Every
/// figure is recomputable from the corresponding timeline files.
pub fn summary_text(
    healthy: &RunReport,
    failslow: Option<&RunReport>,
    mitigated: Option<&RunReport>,
) -> String {
    let mut out = String::new();
    let h = healthy.throughput_iters_per_s;
    out.push_str(&format!("healthy_throughput_iters_per_s: {h:.6}\n"));
    let slow = failslow.map(|r| {
        let t = r.throughput_iters_per_s;
        out.push_str(&format!("failslow_throughput_iters_per_s: {t:.6}\n"));
        let s = slowdown_pct(h, t);
        out.push_str(&format!("failslow_slowdown_pct: {s:.1}\n"));
        s
    });
    if let Some(r) = mitigated {
        let t = r.throughput_iters_per_s;
        out.push_str(&format!("mitigated_throughput_iters_per_s: {t:.6}\n"));
        let s = slowdown_pct(h, t);
        out.push_str(&format!("mitigated_slowdown_pct: {s:.1}\n"));
        if let Some(base) = slow {
            let reduction = if base.abs() < 1e-12 {
                0.0
            } else {
                (base - s) / base * 100.0
            };
            out.push_str(&format!("slowdown_reduction_pct: {reduction:.1}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::closed_loop::{run_closed_loop, LoopConfig};

    #[test]
    fn summary_figures_recompute_from_timelines() {
        let mut s = crate::sim::engine::tests::scenario_4dp_4pp();
        s.horizon = 50;
        s.jitter_sigma = 0.0;
        let healthy = run_closed_loop(&s, &LoopConfig::default()).unwrap();
        let text = summary_text(&healthy, Some(&healthy), None);

        // Recompute throughput from the timeline text.
        let lines = timeline_lines(&healthy);
        let mut total = 0.0;
        let mut count = 0;
        for line in lines.lines() {
            let t = line
                .split("\"time_s\":")
                .nth(1)
                .unwrap()
                .split(',')
                .next()
                .unwrap();
            total += t.parse::<f64>().unwrap();
            count += 1;
        }
        let recomputed = count as f64 / total;
        let reported: f64 = text
            .lines()
            .next()
            .unwrap()
            .split(": ")
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert!(
            (recomputed - reported).abs() < 1e-4,
            "{recomputed} vs {reported}"
        );
        assert!(text.contains("failslow_slowdown_pct: 0.0"));
    }
}
