//! Host-side tooling around `otfs-core`: configuration presets, file
//! formats and the experiment harness behind the `otfs-sim` binary.

pub mod harness;
pub mod io;
pub mod presets;

pub use harness::{run_link, sweep_doppler, LinkResult, SweepRow, SweepSpec};
pub use presets::{preset, SimConfig, PRESET_NAMES};
