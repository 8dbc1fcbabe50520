//! Signal-processing core for comparing OTFS and OFDM over doubly-selective
//! channels.
//!
//! Everything here is `no_std` with `alloc`: transforms, modems, the channel
//! emulator, the bit pipeline (CRC, LDPC, interleaver, QAM), synchronization,
//! the delay-Doppler receiver (pilot estimation and message passing) and the
//! baseline OFDM receiver. File formats, presets and the CLI live in the
//! `otfs-sim` crate.

#![cfg_attr(not(test), no_std)]
// Whenever std is in the build graph the inherent float methods shadow `Float`.
#![allow(unused_imports)]

extern crate alloc;

pub mod channel;
pub mod dd;
pub mod error;
pub mod fec;
pub mod fft;
pub mod frame;
pub mod link;
pub mod matrix;
pub mod ofdm;
pub mod ofdm_rx;
pub mod otfs;
pub mod psd;
pub mod signal;
pub mod sync;

pub use error::{Error, Result};
pub use matrix::CMatrix;
pub use num_complex::Complex64 as C64;
pub use signal::SampleBlock;
