//! Fail-slow laboratory for hybrid-parallel training: detection of slow
//! iterations from communication-call traces, localization of degraded
//! GPUs and links, adaptive multi-level mitigation, and a deterministic
//! cluster simulator that closes the loop.

pub mod detector;
mod error;
pub mod locator;
pub mod mitigator;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
