use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use failslow_core::detector::{
    detect_failslow, detect_period, iteration_times, DetectorConfig,
};
use failslow_core::locator::{ring_schedule, tree_schedule, TreeTopology};
use failslow_core::mitigator::{consolidate_stragglers, solve_microbatch, stages_holding};
use failslow_core::model::CallTrace;
use failslow_core::sim::report::{event_lines, summary_text, timeline_lines};
use failslow_core::sim::{emit_trace, run_closed_loop, RunReport};
use failslow_core::Error;

use crate::config::ScenarioConfig;
use crate::output::write_atomic;
use crate::CliError;

fn input_error(e: Error) -> CliError {
    match e {
        Error::Io(io) => CliError::Runtime(io.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

pub fn cmd_simulate(
    config_path: &Path,
    mitigate: bool,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut config = ScenarioConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let out_dir = out
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let scenario = config.scenario()?;
    let healthy = run_closed_loop(&scenario.healthy_clone(), &config.loop_config(false))
        .map_err(input_error)?;
    let failslow = run_closed_loop(&scenario, &config.loop_config(false)).map_err(input_error)?;
    let mitigated = if mitigate {
        Some(run_closed_loop(&scenario, &config.loop_config(true)).map_err(input_error)?)
    } else {
        None
    };
    let primary: &RunReport = mitigated.as_ref().unwrap_or(&failslow);

    write_atomic(
        &out_dir.join("timeline_healthy.jsonl"),
        &timeline_lines(&healthy),
    )?;
    write_atomic(
        &out_dir.join("timeline_failslow.jsonl"),
        &timeline_lines(&failslow),
    )?;
    if let Some(m) = &mitigated {
        write_atomic(&out_dir.join("timeline_mitigated.jsonl"), &timeline_lines(m))?;
    }
    write_atomic(&out_dir.join("events.jsonl"), &event_lines(primary))?;

    let times: Vec<f64> = primary.iterations.iter().map(|r| r.time_s).collect();
    let trace = emit_trace(&scenario, &times);
    let mut trace_text = Vec::new();
    trace
        .write_csv(&mut trace_text)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_atomic(
        &out_dir.join("trace.csv"),
        &String::from_utf8(trace_text).expect("trace text is utf-8"),
    )?;

    let summary = summary_text(&healthy, Some(&failslow), mitigated.as_ref());
    write_atomic(&out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn cmd_detect(trace_path: &Path, max_lag: usize) -> Result<(), CliError> {
    let trace = CallTrace::read_csv_path(trace_path).map_err(input_error)?;
    if trace.per_rank.is_empty() {
        return Err(CliError::Input(
            "insufficient data: trace contains no calls".into(),
        ));
    }
    let config = DetectorConfig::default();
    let mut lines = Vec::new();
    for rank in trace.ranks().collect::<Vec<_>>() {
        let codes = trace.codes(rank);
        let lag_bound = max_lag.min(codes.len() / 2);
        if lag_bound == 0 {
            return Err(CliError::Input(format!(
                "insufficient data: rank {rank} has only {} calls",
                codes.len()
            )));
        }
        let period = detect_period(&codes, lag_bound, config.acf_threshold)
            .map_err(input_error)?;
        let Some(period) = period else {
            lines.push(format!("rank={rank} no_recurring_period"));
            continue;
        };
        let inference =
            iteration_times(rank, trace.calls(rank), period).map_err(input_error)?;
        let Some(series) = inference.main_segment() else {
            lines.push(format!("rank={rank} no_iterations"));
            continue;
        };
        for ev in detect_failslow(series, &config) {
            let recovery = ev
                .recovery_iter
                .map(|r| r.to_string())
                .unwrap_or_else(|| "none".into());
            lines.push(format!(
                "rank={rank} onset={} recovery={recovery} severity={:.6} kind={}",
                ev.onset_iter, ev.severity, ev.kind
            ));
        }
    }
    for line in lines {
        println!("{line}");
    }
    Ok(())
}

pub fn cmd_schedule_ring(n: usize) -> Result<(), CliError> {
    let schedule = ring_schedule(n).map_err(input_error)?;
    print!("{}", schedule.to_text());
    Ok(())
}

pub fn cmd_schedule_tree(file: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", file.display())))?;
    let raw: BTreeMap<String, usize> = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("invalid tree file {}: {e}", file.display())))?;
    let mut parent = BTreeMap::new();
    for (child, p) in raw {
        let c: usize = child
            .parse()
            .map_err(|_| CliError::Input(format!("bad rank id {child:?} in tree file")))?;
        parent.insert(c, p);
    }
    let schedule = tree_schedule(&TreeTopology::new(parent)).map_err(input_error)?;
    print!("{}", schedule.to_text());
    Ok(())
}

pub fn cmd_plan_microbatch(total: usize, times: &str) -> Result<(), CliError> {
    let times: Vec<f64> = times
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("bad micro-batch time {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    let plan = solve_microbatch(total, &times).map_err(input_error)?;
    let counts: Vec<String> = plan.counts.iter().map(|c| c.to_string()).collect();
    println!("counts: {}", counts.join(","));
    println!("makespan: {:.6}", plan.makespan(&times));
    Ok(())
}

pub fn cmd_plan_consolidate(
    config_path: &Path,
    stragglers: &str,
) -> Result<(), CliError> {
    let config = ScenarioConfig::load(config_path)?;
    let scenario = config.scenario()?;
    let gpus: Vec<usize> = stragglers
        .split(',')
        .map(|g| {
            g.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("bad gpu id {g:?}")))
        })
        .collect::<Result<_, _>>()?;
    let placement = consolidate_stragglers(&gpus, &scenario.topo, &scenario.topo.placement)
        .map_err(input_error)?;
    for (rank, slot) in placement.iter().enumerate() {
        println!("rank {rank}: node {} slot {}", slot.node, slot.slot);
    }
    let stages: Vec<String> = stages_holding(&gpus, &scenario.topo, &placement)
        .into_iter()
        .map(|s| s.to_string())
        .collect();
    println!("straggler_stages: {}", stages.join(","));
    Ok(())
}
