use crate::error::{Error, Result};
use crate::model::{CommCall, RankId};

/// Per-iteration durations inferred from one rank's call trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSeries {
    pub rank: RankId,
    /// Seconds per iteration, strictly positive.
    pub durations: Vec<f64>,
    /// Call-trace index anchoring each iteration.
    pub start_indices: Vec<usize>,
}

impl IterationSeries {
    pub fn from_durations(rank: RankId, durations: Vec<f64>) -> Self {
        let start_indices = (0..durations.len()).collect();
        Self {
            rank,
            durations,
            start_indices,
        }
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }
}

/// A point where the periodic call pattern broke and inference restarted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resync {
    /// Call index where the expected anchor signature was missing.
    pub at_call: usize,
    /// Call index where inference resumed, if an anchor was found again.
    pub resumed_at: Option<usize>,
}

/// Result of iteration-time inference: contiguous series segments split at
/// pattern breaks.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationInference {
    pub segments: Vec<IterationSeries>,
    pub resyncs: Vec<Resync>,
}

impl IterationInference {
    /// The longest inferred segment, for detectors that need one series.
    pub fn main_segment(&self) -> Option<&IterationSeries> {
        self.segments.iter().max_by_key(|s| s.len())
    }
}

/// Derives per-iteration durations by anchoring on the first call of each
/// period block: `duration_i = ts(anchor_{i+1}) - ts(anchor_i)`. When the
/// signature at an expected anchor differs, a resynchronization event is
/// recorded and the series splits at the next occurrence of the anchor
/// signature.
pub fn iteration_times(rank: RankId, calls: &[CommCall], period: usize) -> Result<IterationInference> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be positive".into()));
    }
    if calls.len() < 2 * period {
        return Err(Error::InsufficientData {
            needed: 2 * period,
            got: calls.len(),
        });
    }
    let anchor_sig = calls[0].signature();
    let mut segments = Vec::new();
    let mut resyncs = Vec::new();
    let mut durations = Vec::new();
    let mut starts = Vec::new();
    let mut pos = 0usize;

    let flush =
        |durations: &mut Vec<f64>, starts: &mut Vec<usize>, segments: &mut Vec<IterationSeries>| {
            if !durations.is_empty() {
                segments.push(IterationSeries {
                    rank,
                    durations: std::mem::take(durations),
                    start_indices: std::mem::take(starts),
                });
            }
        };

    while pos + period < calls.len() {
        let next = pos + period;
        if calls[next].signature() == anchor_sig {
            durations.push(calls[next].timestamp - calls[pos].timestamp);
            starts.push(pos);
            pos = next;
        } else {
            // Pattern broke: close the running segment and scan forward for
            // the anchor signature.
            flush(&mut durations, &mut starts, &mut segments);
            let resumed = calls[next + 1..]
                .iter()
                .position(|c| c.signature() == anchor_sig)
                .map(|off| next + 1 + off);
            resyncs.push(Resync {
                at_call: next,
                resumed_at: resumed,
            });
            match resumed {
                Some(r) => pos = r,
                None => break,
            }
        }
    }
    flush(&mut durations, &mut starts, &mut segments);
    Ok(IterationInference { segments, resyncs })
}
