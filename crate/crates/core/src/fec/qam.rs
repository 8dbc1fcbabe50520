//! Gray-mapped square QAM with unit average energy.
//!
//! Labels follow the 3GPP mapping: with bits `b0 b1 ...` of a symbol, the
//! even-indexed bits drive I and the odd-indexed bits drive Q, and a 0 bit
//! maps to the positive half. QPSK is `((1 - 2 b0) + j (1 - 2 b1)) / sqrt 2`.
//! Symbol label `s` has `b0` as its most significant bit.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

/// Constellation points indexed by label, for 2, 4 or 6 bits per symbol.
pub fn constellation(bits_per_symbol: u32) -> Result<Vec<Complex64>> {
    let q = bits_per_symbol as usize;
    let norm = match bits_per_symbol {
        2 => 2f64.sqrt(),
        4 => 10f64.sqrt(),
        6 => 42f64.sqrt(),
        o => return Err(Error::UnsupportedOrder(o)),
    };
    let mut out = Vec::with_capacity(1 << q);
    for s in 0..(1usize << q) {
        let bit = |i: usize| ((s >> (q - 1 - i)) & 1) as f64;
        let axis = |first: usize| {
            // 64QAM I: (1-2b0)(4 - (1-2b2)(2 - (1-2b4))), built inside out.
            let mut level = 1.0 - 2.0 * bit(first + 2 * (q / 2 - 1));
            for j in (0..q / 2 - 1).rev() {
                let amp = (1usize << (q / 2 - 1 - j)) as f64;
                level = (1.0 - 2.0 * bit(first + 2 * j)) * (amp - level);
            }
            level
        };
        out.push(Complex64::new(axis(0), axis(1)) / norm);
    }
    Ok(out)
}

pub fn qam_map(bits: &[u8], bits_per_symbol: u32) -> Result<Vec<Complex64>> {
    let c = constellation(bits_per_symbol)?;
    let q = bits_per_symbol as usize;
    if bits.len() % q != 0 {
        return Err(Error::NotDivisible { len: bits.len(), rows: q });
    }
    Ok(bits
        .chunks_exact(q)
        .map(|b| c[b.iter().fold(0usize, |acc, &x| (acc << 1) | (x as usize & 1))])
        .collect())
}

/// Exact (log-sum-exp) bit LLRs for symbols observed in complex AWGN of
/// variance `noise_var`.
pub fn qam_demap_llr(symbols: &[Complex64], noise_var: f64, bits_per_symbol: u32) -> Result<Vec<f64>> {
    if !(noise_var > 0.0) {
        return Err(Error::NonPositiveNoise);
    }
    let vars: Vec<f64> = symbols.iter().map(|_| noise_var).collect();
    qam_demap_llr_per_symbol(symbols, &vars, bits_per_symbol)
}

/// As [`qam_demap_llr`], one noise variance per symbol. A variance of
/// `+inf` marks an erasure and yields zero LLRs.
pub fn qam_demap_llr_per_symbol(symbols: &[Complex64], noise_vars: &[f64], bits_per_symbol: u32) -> Result<Vec<f64>> {
    let c = constellation(bits_per_symbol)?;
    let q = bits_per_symbol as usize;
    if symbols.len() != noise_vars.len() {
        return Err(Error::LengthMismatch {
            expected: symbols.len(),
            got: noise_vars.len(),
        });
    }
    let mut out = Vec::with_capacity(symbols.len() * q);
    let mut metric = alloc::vec![0.0f64; c.len()];
    for (y, &nv) in symbols.iter().zip(noise_vars) {
        if !(nv > 0.0) {
            return Err(Error::NonPositiveNoise);
        }
        if nv.is_infinite() {
            out.extend(core::iter::repeat(0.0).take(q));
            continue;
        }
        for (m, s) in metric.iter_mut().zip(&c) {
            *m = -(y - s).norm_sqr() / nv;
        }
        for b in 0..q {
            let shift = q - 1 - b;
            let (mut m0, mut m1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (s, &m) in metric.iter().enumerate() {
                if (s >> shift) & 1 == 0 {
                    m0 = m0.max(m);
                } else {
                    m1 = m1.max(m);
                }
            }
            let (mut a0, mut a1) = (0.0, 0.0);
            for (s, &m) in metric.iter().enumerate() {
                if (s >> shift) & 1 == 0 {
                    a0 += (m - m0).exp();
                } else {
                    a1 += (m - m1).exp();
                }
            }
            out.push(m0 + a0.ln() - m1 - a1.ln());
        }
    }
    Ok(out)
}
