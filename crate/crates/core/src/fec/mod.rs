//! Bit pipeline: CRC, LDPC, block interleaver and QAM mapping.
//!
//! Bits are `u8` values 0 or 1. LLRs are positive when bit 0 is more likely.

pub mod crc;
pub mod interleave;
pub mod ldpc;
pub mod qam;

pub use crc::{crc24_attach, crc24_check, crc24_remainder};
pub use interleave::{deinterleave, interleave, interleaver_rows};
pub use ldpc::{DecodeResult, LdpcCode, LdpcDecoder, ParityCheckMatrix};
pub use qam::{constellation, qam_demap_llr, qam_demap_llr_per_symbol, qam_map};
