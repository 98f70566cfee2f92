//! Closed-form optimal stopping for two-sided stable processes under
//! state-dependent (omega-clock) killing, with an independent Monte Carlo
//! cross-check.

pub mod error;
pub mod levy;
pub mod model;
pub mod numerics;
pub mod simulate;
pub mod stopping;

pub use error::{Error, Result};
pub use model::{GainSpec, OmegaClock, StableModel, StableParams};
pub use simulate::{CrossDirection, PathConfig, PathEnsembleReport, PathSample};
pub use stopping::{Regime, StoppingSolution, Value};
