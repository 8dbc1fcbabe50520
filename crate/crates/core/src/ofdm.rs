//! Baseline CP-OFDM modem.
//!
//! Grid rows are subcarriers in FFT order (DC at row 0, negative frequencies
//! in the upper half), columns are symbols. Every symbol gets its own CP.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::frame::OfdmFrameConfig;
use crate::matrix::CMatrix;
use crate::signal::SampleBlock;

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmGrid {
    pub values: CMatrix,
    /// Column-major, same shape as `values`.
    pub pilot_mask: Vec<bool>,
}

impl OfdmGrid {
    pub fn zeros(cfg: &OfdmFrameConfig) -> Self {
        Self {
            values: CMatrix::zeros(cfg.n_sc, cfg.m_sym),
            pilot_mask: pilot_mask(cfg),
        }
    }

    pub fn is_pilot(&self, k: usize, m: usize) -> bool {
        self.pilot_mask[k + self.values.rows() * m]
    }
}

/// Pilot symbols marked over all subcarriers.
pub fn pilot_mask(cfg: &OfdmFrameConfig) -> Vec<bool> {
    let mut mask = vec![false; cfg.n_sc * cfg.m_sym];
    for &m in &cfg.pilot_sym_indices {
        mask[m * cfg.n_sc..(m + 1) * cfg.n_sc].fill(true);
    }
    mask
}

#[derive(Debug, Clone)]
pub struct OfdmModem {
    fft: Fft,
}

impl OfdmModem {
    pub fn new(n_sc: usize) -> Self {
        Self { fft: Fft::new(n_sc) }
    }

    pub fn modulate(&self, g: &OfdmGrid, cfg: &OfdmFrameConfig) -> Result<SampleBlock> {
        g.values.ensure_shape((cfg.n_sc, cfg.m_sym))?;
        let n = cfg.n_sc;
        let mut out = Vec::with_capacity(cfg.frame_samples());
        let mut sym = vec![Complex64::new(0.0, 0.0); n];
        for m in 0..cfg.m_sym {
            sym.copy_from_slice(g.values.col(m));
            self.fft.inverse_unitary(&mut sym);
            out.extend_from_slice(&sym[n - cfg.cp_len..]);
            out.extend_from_slice(&sym);
        }
        Ok(SampleBlock::new(out, cfg.sample_rate))
    }

    pub fn demodulate(&self, r: &[Complex64], cfg: &OfdmFrameConfig) -> Result<OfdmGrid> {
        if r.len() != cfg.frame_samples() {
            return Err(Error::LengthMismatch {
                expected: cfg.frame_samples(),
                got: r.len(),
            });
        }
        let n = cfg.n_sc;
        let step = n + cfg.cp_len;
        let mut values = CMatrix::zeros(n, cfg.m_sym);
        for m in 0..cfg.m_sym {
            let col = values.col_mut(m);
            col.copy_from_slice(&r[m * step + cfg.cp_len..(m + 1) * step]);
            self.fft.forward_unitary(col);
        }
        Ok(OfdmGrid {
            values,
            pilot_mask: pilot_mask(cfg),
        })
    }
}

pub fn ofdm_modulate(g: &OfdmGrid, cfg: &OfdmFrameConfig) -> Result<SampleBlock> {
    OfdmModem::new(cfg.n_sc).modulate(g, cfg)
}

pub fn ofdm_demodulate(r: &SampleBlock, cfg: &OfdmFrameConfig) -> Result<OfdmGrid> {
    OfdmModem::new(cfg.n_sc).demodulate(&r.samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(n_sc: usize, m_sym: usize, cp_len: usize) -> OfdmFrameConfig {
        OfdmFrameConfig {
            n_sc,
            m_sym,
            pilot_sym_indices: vec![],
            cp_len,
            dc_null: false,
            sample_rate: 1e6,
            carrier_freq: 0.0,
        }
    }

    fn random_grid(c: &OfdmFrameConfig, seed: u64) -> OfdmGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = OfdmGrid::zeros(c);
        for v in g.values.as_mut_slice() {
            *v = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        g
    }

    #[test]
    fn single_subcarrier_is_cyclic_exponential() {
        let c = cfg(8, 1, 3);
        let mut g = OfdmGrid::zeros(&c);
        g.values.set(2, 0, Complex64::new(1.0, 0.0));
        let s = ofdm_modulate(&g, &c).unwrap();
        assert_eq!(s.len(), 11);
        for (t, v) in s.samples.iter().enumerate() {
            let n = t as f64 - 3.0;
            let want = Complex64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * 2.0 * n / 8.0);
            assert!((v - want).norm() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn round_trip_and_length() {
        let c = cfg(256, 14, 40);
        let g = random_grid(&c, 1);
        let s = ofdm_modulate(&g, &c).unwrap();
        assert_eq!(s.len(), 4144);
        let back = ofdm_demodulate(&s, &c).unwrap();
        assert!(back.values.max_abs_diff(&g.values) < 1e-9);
        let back32 = ofdm_demodulate(&s.quantize_f32(), &c).unwrap();
        assert!(back32.values.max_abs_diff(&g.values) < 1e-6);
    }

    #[test]
    fn rejects_bad_shapes() {
        let c = cfg(8, 4, 2);
        let g = OfdmGrid::zeros(&cfg(8, 3, 2));
        assert!(ofdm_modulate(&g, &c).is_err());
        let r = SampleBlock::new(vec![Complex64::zero(); 39], 1e6);
        assert!(matches!(ofdm_demodulate(&r, &c), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn delay_within_cp_is_phase_ramp() {
        let c = cfg(8, 4, 3);
        let g = random_grid(&c, 2);
        let s = ofdm_modulate(&g, &c).unwrap();
        for d in 0..=3usize {
            let mut delayed = vec![Complex64::zero(); s.len()];
            delayed[d..].copy_from_slice(&s.samples[..s.len() - d]);
            // The first symbol's CP region is partly zero, which is fine as
            // long as d <= cp_len: the FFT window only reads s[n - d].
            let y = ofdm_demodulate(&SampleBlock::new(delayed, 1e6), &c).unwrap();
            for m in 0..4 {
                for k in 0..8 {
                    let ramp = Complex64::from_polar(1.0, -2.0 * PI * (k * d) as f64 / 8.0);
                    let want = g.values.get(k, m) * ramp;
                    assert!((y.values.get(k, m) - want).norm() < 1e-9, "d={d} k={k} m={m}");
                }
            }
        }
    }

    #[test]
    fn demodulate_is_linear() {
        let c = cfg(16, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r: Vec<Complex64> = (0..c.frame_samples())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = Complex64::new(-0.7, 2.0);
        let y = OfdmModem::new(16).demodulate(&r, &c).unwrap();
        let ya = OfdmModem::new(16)
            .demodulate(&r.iter().map(|v| v * a).collect::<Vec<_>>(), &c)
            .unwrap();
        let mut scaled = y.values.clone();
        scaled.scale(a);
        assert!(ya.values.max_abs_diff(&scaled) < 1e-12);
    }

    #[test]
    fn pilot_mask_marks_full_columns() {
        let c = OfdmFrameConfig {
            pilot_sym_indices: vec![2, 11],
            ..cfg(256, 14, 6)
        };
        let g = OfdmGrid::zeros(&c);
        assert_eq!(g.pilot_mask.iter().filter(|&&p| p).count(), 2 * 256);
        assert!(g.is_pilot(100, 11) && !g.is_pilot(100, 10));
    }
}
