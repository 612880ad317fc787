//! Tracking phase: period inference from signature codes, iteration-time
//! derivation, Bayesian online change-point detection with verification,
//! and the sliding-window baseline.

mod acf;
mod bocd;
mod events;
mod iteration;
mod verify;

pub use acf::{acf, detect_period, AcfValue, DEFAULT_ACF_THRESHOLD};
pub use bocd::{bocd_fire_indices, BocdConfig, BocdState, NigPrior};
pub use events::{detect_failslow, slide_window_detect, DetectorConfig};
pub use iteration::{iteration_times, IterationInference, IterationSeries, Resync};
pub use verify::{
    verify_changepoint, ChangeDirection, ChangePoint, Verification, DEFAULT_VERIFY_MARGIN,
    DEFAULT_VERIFY_WINDOW,
};
