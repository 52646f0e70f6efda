//! Mixed moving averages driven by Lévy bases: executable existence and
//! path-regularity conditions, a truncated shot-noise simulator, and Monte
//! Carlo diagnostics. See `examples/` for one runnable program per capability.

pub mod error;
pub mod ext;
pub mod measure;
pub mod quad;
pub mod kernel;
pub mod stats;
pub mod conditions;
pub mod simulation;
pub mod diagnostics;
pub mod config;
pub mod cli;
