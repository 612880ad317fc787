/// Measured behaviour of one communication group during profiling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupProfile {
    pub group: u64,
    /// Seconds spent actually moving data.
    pub transfer_time: f64,
    /// Seconds spent waiting for peers.
    pub idle_time: f64,
}

pub const SUSPICIOUS_FACTOR: f64 = 1.1;

/// Groups whose transfer time exceeds 1.1x the median transfer time across
/// all groups. Prolonged transfer marks a degraded group; eager waiting
/// (idle) marks a healthy one.
pub fn classify_groups(profiles: &[GroupProfile]) -> Vec<u64> {
    if profiles.is_empty() {
        return Vec::new();
    }
    let cutoff = SUSPICIOUS_FACTOR * median(profiles.iter().map(|p| p.transfer_time));
    profiles
        .iter()
        .filter(|p| p.transfer_time > cutoff)
        .map(|p| p.group)
        .collect()
}

pub(crate) fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
