//! Baseline OFDM receiver: least-squares estimates on the pilot symbols,
//! linear interpolation in time, one-tap equalization.

use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fec::qam::{constellation, qam_demap_llr_per_symbol};
use crate::frame::OfdmFrameConfig;
use crate::matrix::CMatrix;
use crate::ofdm::OfdmGrid;

/// Seed of the pilot sequence generator.
pub const PILOT_SEED: u64 = 0x0F0F_5EED;

/// Pilot grid: unit-modulus QPSK on the pilot symbols from a fixed seeded
/// sequence, zero on the DC row when it is nulled.
pub fn pilot_grid(cfg: &OfdmFrameConfig) -> OfdmGrid {
    let qpsk = constellation(2).expect("QPSK is supported");
    let mut rng = ChaCha8Rng::seed_from_u64(PILOT_SEED);
    let mut g = OfdmGrid::zeros(cfg);
    for &m in &cfg.pilot_sym_indices {
        for k in 0..cfg.n_sc {
            let s = qpsk[rng.random_range(0..4usize)];
            if !(cfg.dc_null && k == 0) {
                g.values.set(k, m, s);
            }
        }
    }
    g
}

/// Per-RE channel estimate from the pilot symbols. Between two pilot
/// symbols the estimate is linear in the symbol index; before the first and
/// after the last it is held constant.
pub fn ls_estimate(y: &OfdmGrid, pilots: &OfdmGrid, cfg: &OfdmFrameConfig) -> Result<CMatrix> {
    y.values.ensure_shape((cfg.n_sc, cfg.m_sym))?;
    pilots.values.ensure_shape((cfg.n_sc, cfg.m_sym))?;
    let mut idx = cfg.pilot_sym_indices.clone();
    idx.sort_unstable();
    if idx.is_empty() {
        return Err(Error::InvalidConfig("no pilot symbols".into()));
    }
    let mut h = CMatrix::zeros(cfg.n_sc, cfg.m_sym);
    for k in 0..cfg.n_sc {
        if cfg.dc_null && k == 0 {
            continue;
        }
        let mut at_pilots = Vec::with_capacity(idx.len());
        for &m in &idx {
            let p = pilots.values.get(k, m);
            if p.is_zero() {
                return Err(Error::ZeroPilot(k, m));
            }
            at_pilots.push(y.values.get(k, m) / p);
        }
        for m in 0..cfg.m_sym {
            let v = match idx.iter().position(|&p| p >= m) {
                Some(0) => at_pilots[0],
                None => at_pilots[idx.len() - 1],
                Some(j) if idx[j] == m => at_pilots[j],
                Some(j) => {
                    let (m0, m1) = (idx[j - 1] as f64, idx[j] as f64);
                    let a = (m as f64 - m0) / (m1 - m0);
                    at_pilots[j - 1] * (1.0 - a) + at_pilots[j] * a
                }
            };
            h.set(k, m, v);
        }
    }
    Ok(h)
}

/// Equalized symbols and their post-equalization noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub symbols: Vec<Complex64>,
    /// `noise_var / |h|^2`, infinite where the channel estimate vanishes.
    pub noise_vars: Vec<f64>,
}

impl Equalized {
    pub fn llrs(&self, bits_per_symbol: u32) -> Result<Vec<f64>> {
        qam_demap_llr_per_symbol(&self.symbols, &self.noise_vars, bits_per_symbol)
    }
}

/// Zero-forcing per resource element. Bins with `|h| < 1e-6` become erasures.
pub fn one_tap_equalize(y: &[Complex64], h: &[Complex64], noise_var: f64) -> Result<Equalized> {
    if y.len() != h.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: h.len(),
        });
    }
    if !(noise_var > 0.0) {
        return Err(Error::NonPositiveNoise);
    }
    let mut symbols = Vec::with_capacity(y.len());
    let mut noise_vars = Vec::with_capacity(y.len());
    for (yv, hv) in y.iter().zip(h) {
        let g = hv.norm_sqr();
        if hv.norm() < 1e-6 {
            symbols.push(Complex64::zero());
            noise_vars.push(f64::INFINITY);
        } else {
            symbols.push(yv * hv.conj() / g);
            noise_vars.push(noise_var / g);
        }
    }
    Ok(Equalized { symbols, noise_vars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, ChannelTap};
    use crate::fft::naive_dft;
    use crate::ofdm::{ofdm_demodulate, ofdm_modulate};
    use alloc::vec;
    use core::f64::consts::PI;

    fn cfg() -> OfdmFrameConfig {
        OfdmFrameConfig {
            n_sc: 16,
            m_sym: 14,
            pilot_sym_indices: vec![2, 11],
            cp_len: 4,
            dc_null: true,
            sample_rate: 1e6,
            carrier_freq: 0.0,
        }
    }

    #[test]
    fn flat_channel_estimate() {
        let c = cfg();
        let p = pilot_grid(&c);
        let mut y = p.clone();
        y.values.scale(Complex64::new(2.0, 0.0));
        let h = ls_estimate(&y, &p, &c).unwrap();
        for m in 0..14 {
            for k in 1..16 {
                assert!((h.get(k, m) - Complex64::new(2.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_time_variation_is_exact() {
        let c = cfg();
        let p = pilot_grid(&c);
        let gain = |m: usize| Complex64::new(1.0 + 0.1 * m as f64, -0.05 * m as f64);
        let mut y = p.clone();
        for m in 0..14 {
            for k in 0..16 {
                y.values.set(k, m, p.values.get(k, m) * gain(m));
            }
        }
        let h = ls_estimate(&y, &p, &c).unwrap();
        for m in 2..=11 {
            for k in 1..16 {
                assert!((h.get(k, m) - gain(m)).norm() < 1e-12);
            }
        }
        // Held at the edges.
        assert!((h.get(3, 0) - gain(2)).norm() < 1e-12);
        assert!((h.get(3, 13) - gain(11)).norm() < 1e-12);
    }

    #[test]
    fn static_multipath_gives_frequency_response() {
        let c = cfg();
        let p = pilot_grid(&c);
        let taps = [
            ChannelTap::new(Complex64::new(0.9, 0.1), 0.0, 0.0),
            ChannelTap::new(Complex64::new(-0.3, 0.4), 2e-6, 0.0),
        ];
        let s = ofdm_modulate(&p, &c).unwrap();
        let r = apply_channel(&s, &taps, 0.0).unwrap();
        let y = ofdm_demodulate(&r, &c).unwrap();
        let h = ls_estimate(&y, &p, &c).unwrap();
        let mut imp = vec![Complex64::zero(); 16];
        imp[0] = taps[0].gain;
        imp[2] = taps[1].gain;
        let freq = naive_dft(&imp, false);
        for k in 1..16 {
            for m in 0..14 {
                assert!((h.get(k, m) - freq[k]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_pilot_is_rejected() {
        let mut c = cfg();
        let p = OfdmGrid::zeros(&c);
        assert_eq!(ls_estimate(&p, &p, &c), Err(Error::ZeroPilot(1, 2)));
        c.pilot_sym_indices.clear();
        assert!(ls_estimate(&p, &p, &c).is_err());
    }

    #[test]
    fn one_tap_cases() {
        let y = [Complex64::new(0.3, -0.7), Complex64::new(1.0, 1.0), Complex64::new(2.0, 0.0)];
        let e = one_tap_equalize(&y, &[Complex64::new(1.0, 0.0); 3], 0.1).unwrap();
        assert_eq!(e.symbols, y.to_vec());
        let th = Complex64::from_polar(1.0, 0.7 * PI);
        let yr: Vec<Complex64> = y.iter().map(|v| v * th).collect();
        let e = one_tap_equalize(&yr, &[th; 3], 0.1).unwrap();
        for (a, b) in e.symbols.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
        let hs = [Complex64::new(0.5, 0.0), Complex64::new(1e-7, 0.0), Complex64::new(2.0, 0.0)];
        let e = one_tap_equalize(&y, &hs, 0.1).unwrap();
        assert!((e.noise_vars[0] - 0.4).abs() < 1e-12);
        assert!(e.noise_vars[1].is_infinite());
        let l = e.llrs(2).unwrap();
        assert_eq!(&l[2..4], &[0.0, 0.0]);
    }
}
