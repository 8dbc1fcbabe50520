use alloc::vec::Vec;

/// CRC-24 generator with the `x^24` term, as in 3GPP CRC24A.
pub const CRC24_POLY: u32 = 0x1864CFB;

/// Remainder of `bits * x^24` (MSB first, zero initial state).
pub fn crc24_remainder(bits: &[u8]) -> u32 {
    let mut reg: u32 = 0;
    for &b in bits {
        let fb = ((reg >> 23) & 1) ^ (b as u32 & 1);
        reg = (reg << 1) & 0xFF_FFFF;
        if fb == 1 {
            reg ^= CRC24_POLY & 0xFF_FFFF;
        }
    }
    reg
}

pub fn crc24_attach(bits: &[u8]) -> Vec<u8> {
    let r = crc24_remainder(bits);
    let mut out = Vec::with_capacity(bits.len() + 24);
    out.extend_from_slice(bits);
    out.extend((0..24).rev().map(|i| ((r >> i) & 1) as u8));
    out
}

/// True iff the trailing 24 bits are the CRC of the rest.
pub fn crc24_check(bits: &[u8]) -> bool {
    bits.len() >= 24 && crc24_remainder(bits) == 0
}
