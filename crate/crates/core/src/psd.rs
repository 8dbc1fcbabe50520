//! Welch power spectral density estimate.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fft::Fft;

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Bin frequencies in Hz relative to the carrier, ascending.
    pub freqs: Vec<f64>,
    /// Power in dB relative to the strongest bin.
    pub power_db: Vec<f64>,
}

/// Hann-windowed, segment-averaged periodogram over segments of `nfft`
/// samples advancing by `nfft - overlap`.
pub fn compute_psd(samples: &[Complex64], sample_rate: f64, nfft: usize, overlap: usize) -> Result<Psd> {
    if nfft == 0 || overlap >= nfft {
        return Err(Error::InvalidConfig("need nfft > overlap".into()));
    }
    if samples.len() < nfft {
        return Err(Error::TooShort {
            need: nfft,
            got: samples.len(),
        });
    }
    // Periodic Hann.
    let win: Vec<f64> = (0..nfft)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / nfft as f64).cos())
        .collect();
    let fft = Fft::new(nfft);
    let step = nfft - overlap;
    let mut acc = vec![0.0f64; nfft];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut start = 0;
    while start + nfft <= samples.len() {
        for ((b, s), w) in buf.iter_mut().zip(&samples[start..start + nfft]).zip(&win) {
            *b = s * w;
        }
        fft.forward(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        start += step;
    }
    let peak = acc.iter().cloned().fold(0.0, f64::max);
    let half = nfft / 2;
    let mut freqs = Vec::with_capacity(nfft);
    let mut power_db = Vec::with_capacity(nfft);
    for i in 0..nfft {
        let f = i as i64 - half as i64;
        let bin = f.rem_euclid(nfft as i64) as usize;
        freqs.push(f as f64 * sample_rate / nfft as f64);
        let p = acc[bin];
        power_db.push(if peak > 0.0 { 10.0 * (p / peak).max(1e-30).log10() } else { f64::NEG_INFINITY });
    }
    Ok(Psd { freqs, power_db })
}

/// Span between the outermost bins within 3 dB of the peak, plus one bin.
pub fn occupied_bandwidth_3db(psd: &Psd) -> f64 {
    let inside: Vec<usize> = (0..psd.power_db.len()).filter(|&i| psd.power_db[i] >= -3.0).collect();
    match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) => {
            let df = if psd.freqs.len() > 1 { psd.freqs[1] - psd.freqs[0] } else { 0.0 };
            psd.freqs[b] - psd.freqs[a] + df
        }
        _ => 0.0,
    }
}
