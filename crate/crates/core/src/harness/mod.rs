//! Scenario configuration, experiment runners and output writers.
mod breaking;
mod config;
mod convergence;
mod output;
mod presets;
mod scenario;
mod studies;

pub use breaking::detect_breaking;
pub use config::*;
pub use convergence::*;
pub use output::*;
pub use presets::*;
pub use scenario::*;
pub use studies::*;
