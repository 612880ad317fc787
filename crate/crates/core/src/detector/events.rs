use crate::detector::bocd::{BocdConfig, BocdState};
use crate::detector::iteration::IterationSeries;
use crate::detector::verify::{verify_changepoint, ChangeDirection, Verification};
use crate::model::FailSlowEvent;

/// End-to-end detection settings shared by the offline pipeline and the
/// closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub acf_threshold: f64,
    pub bocd: BocdConfig,
    /// Samples ignored before change-points may be reported.
    pub burn_in: usize,
    /// Relative mean difference below which a change-point is jitter.
    pub verify_margin: f64,
    /// Max samples per side for mean comparison.
    pub verify_window: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            acf_threshold: crate::detector::acf::DEFAULT_ACF_THRESHOLD,
            bocd: BocdConfig::default(),
            burn_in: 10,
            verify_margin: crate::detector::verify::DEFAULT_VERIFY_MARGIN,
            verify_window: crate::detector::verify::DEFAULT_VERIFY_WINDOW,
        }
    }
}

/// Runs BOCD over the series, verifies each fired change-point against the
/// mean-comparison rule, and pairs verified degrade/recover points into
/// fail-slow events. An unclosed degrade yields an open event.
pub fn detect_failslow(series: &IterationSeries, config: &DetectorConfig) -> Vec<FailSlowEvent> {
    let durations = &series.durations;
    let mut state = BocdState::new(config.bocd);
    let mut events: Vec<FailSlowEvent> = Vec::new();
    let mut open: Option<FailSlowEvent> = None;

    for (i, &x) in durations.iter().enumerate() {
        let p = state.update(x);
        if i == 0 || i < config.burn_in || p < config.bocd.threshold {
            continue;
        }
        match verify_changepoint(durations, i, config.verify_window, config.verify_margin) {
            Verification::Jitter => {}
            Verification::Verified(cp) => match cp.direction {
                ChangeDirection::Degrade => {
                    if open.is_none() {
                        open = Some(FailSlowEvent::open(i, cp.mean_after / cp.mean_before));
                    }
                }
                ChangeDirection::Recover => {
                    if let Some(mut ev) = open.take() {
                        ev.recovery_iter = Some(i);
                        events.push(ev);
                    }
                }
            },
        }
    }
    if let Some(ev) = open {
        events.push(ev);
    }
    events
}

/// Sliding-window baseline: flags an iteration whenever it deviates from
/// the trailing window median by more than `threshold`, then groups
/// consecutive flagged runs into events.
pub fn slide_window_detect(durations: &[f64], window: usize, threshold: f64) -> Vec<FailSlowEvent> {
    assert!(window >= 2, "window must be at least 2");
    let mut flagged: Vec<usize> = Vec::new();
    let mut buf: Vec<f64> = Vec::with_capacity(window);
    for i in window..durations.len() {
        buf.clear();
        buf.extend_from_slice(&durations[i - window..i]);
        buf.sort_by(f64::total_cmp);
        let median = if window % 2 == 1 {
            buf[window / 2]
        } else {
            (buf[window / 2 - 1] + buf[window / 2]) / 2.0
        };
        if (durations[i] - median).abs() / median > threshold {
            flagged.push(i);
        }
    }

    let mut events = Vec::new();
    let mut it = flagged.into_iter().peekable();
    while let Some(start) = it.next() {
        let mut end = start;
        while let Some(&next) = it.peek() {
            if next == end + 1 {
                end = next;
                it.next();
            } else {
                break;
            }
        }
        let severity = (durations[start] / durations[start.saturating_sub(1)]).max(1.0);
        events.push(FailSlowEvent {
            onset_iter: start,
            recovery_iter: Some(end + 1),
            kind: crate::model::FailSlowKind::Unknown,
            located: None,
            severity,
        });
    }
    events
}
