use crate::error::{Error, Result};

/// Lag-k autocorrelation of a code window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcfValue {
    pub value: f64,
    /// Set when the window has no variance; the value is defined as 0
    /// because no periodic signal is distinguishable.
    pub zero_variance: bool,
}

/// Autocorrelation over the first `window` codes at lag `lag`:
/// numerator sums `(x_t - mu)(x_{t+lag} - mu)` over the `window - lag`
/// overlapping pairs, the denominator sums `(x_t - mu)^2` over the full
/// window. The term counts are deliberately unequal, so the statistic is
/// biased low at large lags.
pub fn acf(codes: &[u64], lag: usize, window: usize) -> Result<AcfValue> {
    if lag == 0 || lag >= window {
        return Err(Error::InvalidArgument(format!(
            "lag {lag} must satisfy 1 <= lag < window {window}"
        )));
    }
    if window > codes.len() {
        return Err(Error::InsufficientData {
            needed: window,
            got: codes.len(),
        });
    }
    let xs = &codes[..window];
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / window as f64;
    let denom: f64 = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum();
    if denom == 0.0 {
        return Ok(AcfValue {
            value: 0.0,
            zero_variance: true,
        });
    }
    let numer: f64 = xs[..window - lag]
        .iter()
        .zip(&xs[lag..])
        .map(|(&a, &b)| (a as f64 - mean) * (b as f64 - mean))
        .sum();
    Ok(AcfValue {
        value: numer / denom,
        zero_variance: false,
    })
}

pub const DEFAULT_ACF_THRESHOLD: f64 = 0.95;

/// Finds the recurring period of a signature-code sequence: the smallest
/// lag whose ACF over the whole sequence reaches `threshold`. A sequence
/// with no variance is trivially periodic with period 1.
pub fn detect_period(codes: &[u64], max_lag: usize, threshold: f64) -> Result<Option<usize>> {
    if max_lag == 0 {
        return Err(Error::InvalidArgument("max_lag must be positive".into()));
    }
    if codes.len() < 2 * max_lag {
        return Err(Error::InsufficientData {
            needed: 2 * max_lag,
            got: codes.len(),
        });
    }
    let window = codes.len();
    for lag in 1..=max_lag {
        let r = acf(codes, lag, window)?;
        if r.zero_variance {
            return Ok(Some(1));
        }
        if r.value >= threshold {
            return Ok(Some(lag));
        }
    }
    Ok(None)
}
