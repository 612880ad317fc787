use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::topology::RankId;

/// Collective-communication call kinds recorded in traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CollectiveKind {
    AllReduce,
    ReduceScatter,
    AllGather,
    Send,
    Recv,
}

impl CollectiveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CollectiveKind::AllReduce => "allreduce",
            CollectiveKind::ReduceScatter => "reducescatter",
            CollectiveKind::AllGather => "allgather",
            CollectiveKind::Send => "send",
            CollectiveKind::Recv => "recv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "allreduce" => Some(CollectiveKind::AllReduce),
            "reducescatter" => Some(CollectiveKind::ReduceScatter),
            "allgather" => Some(CollectiveKind::AllGather),
            "send" => Some(CollectiveKind::Send),
            "recv" => Some(CollectiveKind::Recv),
            _ => None,
        }
    }

    fn code(&self) -> u64 {
        match self {
            CollectiveKind::AllReduce => 1,
            CollectiveKind::ReduceScatter => 2,
            CollectiveKind::AllGather => 3,
            CollectiveKind::Send => 4,
            CollectiveKind::Recv => 5,
        }
    }
}

/// One timestamped communication call on one rank.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommCall {
    pub rank: RankId,
    /// Seconds since job start; nondecreasing per rank.
    pub timestamp: f64,
    pub kind: CollectiveKind,
    /// Communication-group id.
    pub group: u64,
    pub bytes: u64,
}

impl CommCall {
    /// Stable integer code for exact-repetition matching: collective kind,
    /// group id and log2 size bucket packed into one value.
    pub fn signature(&self) -> u64 {
        let bucket = if self.bytes == 0 {
            0
        } else {
            64 - u64::from(self.bytes.leading_zeros())
        };
        (self.kind.code() << 56) | (self.group << 8) | bucket
    }
}

/// Per-rank communication call logs.
#[derive(Debug, Clone, Default)]
pub struct CallTrace {
    pub per_rank: BTreeMap<RankId, Vec<CommCall>>,
}

impl CallTrace {
    pub fn push(&mut self, call: CommCall) {
        self.per_rank.entry(call.rank).or_default().push(call);
    }

    pub fn ranks(&self) -> impl Iterator<Item = RankId> + '_ {
        self.per_rank.keys().copied()
    }

    pub fn calls(&self, rank: RankId) -> &[CommCall] {
        self.per_rank.get(&rank).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Signature code sequence for one rank.
    pub fn codes(&self, rank: RankId) -> Vec<u64> {
        self.calls(rank).iter().map(CommCall::signature).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (rank, calls) in &self.per_rank {
            for pair in calls.windows(2) {
                if pair[1].timestamp < pair[0].timestamp {
                    return Err(Error::InvalidArgument(format!(
                        "rank {rank}: timestamps decrease ({} -> {})",
                        pair[0].timestamp, pair[1].timestamp
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes the trace as `rank,timestamp_s,kind,group,bytes` CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rank,timestamp_s,kind,group,bytes")?;
        for calls in self.per_rank.values() {
            for c in calls {
                writeln!(
                    w,
                    "{},{:.6},{},{},{}",
                    c.rank,
                    c.timestamp,
                    c.kind.as_str(),
                    c.group,
                    c.bytes
                )?;
            }
        }
        Ok(())
    }

    /// Parses the CSV trace format; errors carry 1-based line numbers.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::InsufficientData { needed: 1, got: 0 });
            }
        };
        if header.trim() != "rank,timestamp_s,kind,group,bytes" {
            return Err(Error::TraceParse {
                line: 1,
                message: format!("bad header {header:?}"),
            });
        }
        let mut trace = CallTrace::default();
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::TraceParse {
                    line: lineno,
                    message: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let parse_err = |field: &str, what: &str| Error::TraceParse {
                line: lineno,
                message: format!("bad {what} {field:?}"),
            };
            let rank: RankId = fields[0]
                .trim()
                .parse()
                .map_err(|_| parse_err(fields[0], "rank"))?;
            let timestamp: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| parse_err(fields[1], "timestamp_s"))?;
            let kind = CollectiveKind::parse(fields[2].trim())
                .ok_or_else(|| parse_err(fields[2], "kind"))?;
            let group: u64 = fields[3]
                .trim()
                .parse()
                .map_err(|_| parse_err(fields[3], "group"))?;
            let bytes: u64 = fields[4]
                .trim()
                .parse()
                .map_err(|_| parse_err(fields[4], "bytes"))?;
            trace.push(CommCall {
                rank,
                timestamp,
                kind,
                group,
                bytes,
            });
        }
        trace.validate()?;
        Ok(trace)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn call(rank: usize, ts: f64, kind: CollectiveKind, group: u64, bytes: u64) -> CommCall {
        CommCall {
            rank,
            timestamp: ts,
            kind,
            group,
            bytes,
        }
    }

    #[test]
    fn signature_is_stable_and_distinguishes_groups() {
        let a = call(0, 1.0, CollectiveKind::AllReduce, 3, 4096);
        let b = call(1, 2.0, CollectiveKind::AllReduce, 3, 4100);
        let c = call(0, 3.0, CollectiveKind::AllReduce, 4, 4096);
        // Same kind/group/size bucket -> same code, even across ranks/times.
        assert_eq!(a.signature(), b.signature());
        assert_ne!(a.signature(), c.signature());
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        let mut t = CallTrace::default();
        t.push(call(0, 2.0, CollectiveKind::Send, 0, 8));
        t.push(call(0, 1.0, CollectiveKind::Send, 0, 8));
        assert!(t.validate().is_err());
    }

    #[test]
    fn parse_error_reports_line_number() {
        let text = "rank,timestamp_s,kind,group,bytes\n0,0.5,allreduce,1,64\n0,oops,send,1,64\n";
        match CallTrace::read_csv(text.as_bytes()) {
            Err(Error::TraceParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_header_rejected() {
        let text = "0,0.5,allreduce,1,64\n";
        assert!(matches!(
            CallTrace::read_csv(text.as_bytes()),
            Err(Error::TraceParse { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn csv_round_trip(records in proptest::collection::vec(
            (0usize..8, 0u32..1_000_000, 0u8..5, 0u64..16, 0u64..1u64<<32),
            1..50,
        )) {
            let mut trace = CallTrace::default();
            let mut clocks: BTreeMap<usize, u64> = BTreeMap::new();
            for (rank, dt, kind, group, bytes) in records {
                let kind = match kind {
                    0 => CollectiveKind::AllReduce,
                    1 => CollectiveKind::ReduceScatter,
                    2 => CollectiveKind::AllGather,
                    3 => CollectiveKind::Send,
                    _ => CollectiveKind::Recv,
                };
                // Whole-microsecond clocks keep the 6-decimal text form exact.
                let clock = clocks.entry(rank).or_insert(0);
                *clock += u64::from(dt);
                let timestamp = *clock as f64 / 1e6;
                trace.push(CommCall { rank, timestamp, kind, group, bytes });
            }
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).unwrap();
            let back = CallTrace::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(format!("{trace:?}"), format!("{back:?}"));
        }
    }
}
