/// Direction of a verified change-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeDirection {
    Degrade,
    Recover,
}

/// A change-point that survived the mean-comparison check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangePoint {
    pub index: usize,
    pub direction: ChangeDirection,
    pub mean_before: f64,
    pub mean_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verification {
    /// Performance difference below the margin: not a real change.
    Jitter,
    Verified(ChangePoint),
}

pub const DEFAULT_VERIFY_MARGIN: f64 = 0.10;
pub const DEFAULT_VERIFY_WINDOW: usize = 20;

/// Compares mean iteration time on each side of `index` over at most
/// `window` samples per side; differences under `margin` (relative to the
/// before-mean) are classified as jitter.
pub fn verify_changepoint(
    durations: &[f64],
    index: usize,
    window: usize,
    margin: f64,
) -> Verification {
    assert!(
        index >= 1 && index < durations.len(),
        "change-point needs at least one sample on each side"
    );
    let before_from = index.saturating_sub(window);
    let after_to = (index + window).min(durations.len());
    let before = &durations[before_from..index];
    let after = &durations[index..after_to];
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mean_before = mean(before);
    let mean_after = mean(after);
    if (mean_after - mean_before).abs() / mean_before < margin {
        return Verification::Jitter;
    }
    let direction = if mean_after > mean_before {
        ChangeDirection::Degrade
    } else {
        ChangeDirection::Recover
    };
    Verification::Verified(ChangePoint {
        index,
        direction,
        mean_before,
        mean_after,
    })
}
