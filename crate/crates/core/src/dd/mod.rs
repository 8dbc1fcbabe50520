//! Delay-Doppler receiver: the sparse channel operator, embedded-pilot
//! estimation and the message-passing detector.

mod estimate;
mod mp;
mod pilot;
mod sparse;

pub use estimate::{
    detect_taps, estimate_channel_dd, estimate_groups, estimate_noise_sigma, interpolate_groups, taps_to_groups, DdTap,
    EstimatorParams,
};
pub use mp::{mp_equalize, posteriors_to_llrs, MpParams, MpReport, SymbolPosteriors};
pub use pilot::{embed_pilot, PilotLayout};
pub use sparse::{DelayGroup, SparseDdChannel};
