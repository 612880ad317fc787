use crate::model::topology::ComponentId;

/// Root-cause class of a detected degradation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FailSlowKind {
    Computation,
    Communication,
    Unknown,
}

impl std::fmt::Display for FailSlowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FailSlowKind::Computation => "computation",
            FailSlowKind::Communication => "communication",
            FailSlowKind::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

/// A detected degradation interval with its located root cause, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct FailSlowEvent {
    /// Iteration index where the degradation was confirmed.
    pub onset_iter: usize,
    /// Iteration index of the verified recovery; `None` while open.
    pub recovery_iter: Option<usize>,
    pub kind: FailSlowKind,
    /// Components pinned down by validation, if localization ran.
    pub located: Option<Vec<ComponentId>>,
    /// `t_slow / t_healthy`, always >= 1.
    pub severity: f64,
}

impl FailSlowEvent {
    pub fn open(onset_iter: usize, severity: f64) -> Self {
        Self {
            onset_iter,
            recovery_iter: None,
            kind: FailSlowKind::Unknown,
            located: None,
            severity,
        }
    }

    pub fn is_open(&self) -> bool {
        self.recovery_iter.is_none()
    }

    pub fn validate(&self) -> bool {
        self.severity >= 1.0
            && self
                .recovery_iter
                .map(|r| r > self.onset_iter)
                .unwrap_or(true)
    }
}
