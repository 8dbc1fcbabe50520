//! Single-carrier synchronization preamble: NR PSS sequence, RRC pulse
//! shaping and timing acquisition by normalized cross-correlation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::signal::SampleBlock;

pub const PSS_LEN: usize = 127;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreambleSpec {
    pub pss_id: u8,
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    pub span_symbols: usize,
}

impl Default for PreambleSpec {
    fn default() -> Self {
        Self {
            pss_id: 0,
            rolloff: 0.5,
            samples_per_symbol: 1,
            span_symbols: 8,
        }
    }
}

impl PreambleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pss_id > 2 {
            return Err(Error::InvalidConfig("PSS id must be 0, 1 or 2".into()));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::InvalidConfig("roll-off must lie in [0, 1]".into()));
        }
        if self.samples_per_symbol == 0 || self.span_symbols == 0 {
            return Err(Error::InvalidConfig("samples per symbol and span must be positive".into()));
        }
        Ok(())
    }

    /// Pulse-shaped preamble at `sample_rate`.
    pub fn waveform(&self, sample_rate: f64) -> Result<SampleBlock> {
        self.validate()?;
        let sym: Vec<Complex64> = gen_pss(self.pss_id)?
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        let taps = rrc_taps(self.rolloff, self.samples_per_symbol, self.span_symbols);
        Ok(SampleBlock::new(
            pulse_shape(&sym, &taps, self.samples_per_symbol),
            sample_rate,
        ))
    }

    pub fn len(&self) -> usize {
        PSS_LEN * self.samples_per_symbol + self.span_symbols * self.samples_per_symbol
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// NR primary synchronization sequence for `N_ID2 = id`, as BPSK values.
pub fn gen_pss(id: u8) -> Result<Vec<f64>> {
    if id > 2 {
        return Err(Error::InvalidConfig("PSS id must be 0, 1 or 2".into()));
    }
    let mut x = [0u8; PSS_LEN];
    x[..7].copy_from_slice(&[0, 1, 1, 0, 1, 1, 1]);
    for i in 0..PSS_LEN - 7 {
        x[i + 7] = (x[i + 4] + x[i]) % 2;
    }
    Ok((0..PSS_LEN)
        .map(|n| 1.0 - 2.0 * x[(n + 43 * id as usize) % PSS_LEN] as f64)
        .collect())
}

/// Root-raised-cosine taps, `span * sps + 1` long, unit energy.
pub fn rrc_taps(beta: f64, sps: usize, span: usize) -> Vec<f64> {
    let len = span * sps + 1;
    let mid = (len / 2) as f64;
    let mut h: Vec<f64> = (0..len)
        .map(|k| {
            let t = (k as f64 - mid) / sps as f64;
            rrc_at(beta, t)
        })
        .collect();
    let e = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    h.iter_mut().for_each(|v| *v /= e);
    h
}

/// RRC impulse response at `t` symbol periods, up to scale.
fn rrc_at(beta: f64, t: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Upsample by `sps` (zero stuffing) and filter with `taps`.
pub fn pulse_shape(symbols: &[Complex64], taps: &[f64], sps: usize) -> Vec<Complex64> {
    if symbols.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let len = symbols.len() * sps + taps.len() - 1;
    let mut out = vec![Complex64::zero(); len];
    for (i, s) in symbols.iter().enumerate() {
        for (k, &t) in taps.iter().enumerate() {
            out[i * sps + k] += s * t;
        }
    }
    out
}

/// Filter with the time-reversed taps; RRC taps are symmetric, so this is
/// the same convolution as [`pulse_shape`] without upsampling.
pub fn matched_filter(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let rev: Vec<f64> = taps.iter().rev().copied().collect();
    pulse_shape(x, &rev, 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    pub offset: usize,
    pub peak_metric: f64,
    pub detected: bool,
}

/// Normalized cross-correlation of `template` against every lag of `rx`:
/// `|<rx[l..l+L], t>| / (|rx[l..l+L]| |t|)`.
pub fn correlate_and_sync(rx: &[Complex64], template: &[Complex64], threshold: f64) -> Result<SyncResult> {
    let l = template.len();
    if l == 0 {
        return Err(Error::Empty);
    }
    if rx.len() < l {
        return Err(Error::TooShort { need: l, got: rx.len() });
    }
    let t_norm = template.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if t_norm == 0.0 {
        return Err(Error::ZeroPower);
    }
    let mut window: f64 = rx[..l].iter().map(|v| v.norm_sqr()).sum();
    let (mut best, mut best_lag) = (0.0f64, 0usize);
    for lag in 0..=rx.len() - l {
        if lag > 0 {
            window += rx[lag + l - 1].norm_sqr() - rx[lag - 1].norm_sqr();
        }
        if window <= 1e-300 {
            continue;
        }
        let mut acc = Complex64::zero();
        for (a, b) in rx[lag..lag + l].iter().zip(template) {
            acc += a * b.conj();
        }
        // Recompute the energy now and then; the running sum drifts.
        let e = if lag % 1024 == 0 {
            window = rx[lag..lag + l].iter().map(|v| v.norm_sqr()).sum();
            window
        } else {
            window.max(0.0)
        };
        let metric = acc.norm() / (e.sqrt() * t_norm);
        if metric > best {
            best = metric;
            best_lag = lag;
        }
    }
    let best = best.min(1.0);
    Ok(SyncResult {
        offset: best_lag,
        peak_metric: best,
        detected: best >= threshold,
    })
}

/// Normalized correlation per lag, as in [`correlate_and_sync`], kept complex.
fn normalized_correlation(rx: &[Complex64], template: &[Complex64]) -> Result<Vec<Complex64>> {
    let l = template.len();
    if l == 0 {
        return Err(Error::Empty);
    }
    if rx.len() < l {
        return Err(Error::TooShort { need: l, got: rx.len() });
    }
    let t_norm = template.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if t_norm == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok((0..=rx.len() - l)
        .map(|lag| {
            let w = &rx[lag..lag + l];
            let e: f64 = w.iter().map(|v| v.norm_sqr()).sum();
            if e <= 1e-300 {
                return Complex64::zero();
            }
            let acc: Complex64 = w.iter().zip(template).map(|(a, b)| a * b.conj()).sum();
            acc / (e.sqrt() * t_norm)
        })
        .collect())
}

/// Timing acquisition that collects preamble energy spread over up to
/// `spread` consecutive lags by multipath.
///
/// The metric at lag `l` is `sqrt(sum_j |c(l + j)|^2)` over `j < spread`,
/// with `c` the normalized correlation. The reported offset is the earliest
/// lag inside the best window whose power is at least a quarter of the
/// window's strongest lag, i.e. the first significant path. With
/// `spread = 1` this is plain [`correlate_and_sync`].
pub fn correlate_multipath(
    rx: &[Complex64],
    template: &[Complex64],
    threshold: f64,
    spread: usize,
) -> Result<SyncResult> {
    let c: Vec<f64> = normalized_correlation(rx, template)?
        .iter()
        .map(|v| v.norm_sqr())
        .collect();
    let w = spread.clamp(1, c.len());
    let mut acc: f64 = c[..w].iter().sum();
    let (mut best, mut best_lag) = (acc, 0usize);
    for lag in 1..=c.len() - w {
        acc += c[lag + w - 1] - c[lag - 1];
        if acc > best {
            best = acc;
            best_lag = lag;
        }
    }
    let win = &c[best_lag..best_lag + w];
    let strongest = win.iter().cloned().fold(0.0, f64::max);
    let first = win.iter().position(|&v| v >= 0.25 * strongest).unwrap_or(0);
    let metric = best.max(0.0).sqrt().min(1.0);
    Ok(SyncResult {
        offset: best_lag + first,
        peak_metric: metric,
        detected: metric >= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pss_shape_and_determinism() {
        for id in 0..3 {
            let p = gen_pss(id).unwrap();
            assert_eq!(p.len(), 127);
            assert!(p.iter().all(|&v| v == 1.0 || v == -1.0));
            assert_eq!(p, gen_pss(id).unwrap());
        }
        assert!(gen_pss(3).is_err());
    }

    #[test]
    fn pss_first_values_follow_recursion() {
        // x(7) = x(4) + x(0) = 1, so d(7) = -1; d(0..7) mirror the seed.
        let p = gen_pss(0).unwrap();
        assert_eq!(&p[..8], &[1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn pss_cross_correlation_is_low() {
        let a = gen_pss(0).unwrap();
        let b = gen_pss(1).unwrap();
        let c = gen_pss(2).unwrap();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        assert_eq!(dot(&a, &a), 127.0);
        assert!(dot(&a, &b).abs() / 127.0 < 0.3);
        assert!(dot(&a, &c).abs() / 127.0 < 0.3);
        assert!(dot(&b, &c).abs() / 127.0 < 0.3);
    }

    #[test]
    fn rrc_symmetric_unit_energy() {
        for (beta, sps, span) in [(0.5, 8, 16), (0.25, 4, 8), (0.5, 1, 8), (0.0, 4, 6), (1.0, 4, 6)] {
            let h = rrc_taps(beta, sps, span);
            assert_eq!(h.len(), span * sps + 1);
            for k in 0..h.len() {
                assert!((h[k] - h[h.len() - 1 - k]).abs() < 1e-12);
            }
            assert!((h.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(h.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn rrc_singular_points_are_continuous() {
        // beta = 0.5 puts t = 1/(4 beta) = 0.5 on the sps = 2 grid.
        let beta = 0.5;
        let at = rrc_at(beta, 0.5);
        let near = (rrc_at(beta, 0.5 - 1e-6) + rrc_at(beta, 0.5 + 1e-6)) / 2.0;
        assert!((at - near).abs() < 1e-6);
        let near0 = rrc_at(beta, 1e-7);
        assert!((rrc_at(beta, 0.0) - near0).abs() < 1e-6);
    }

    #[test]
    fn rrc_pair_is_nyquist() {
        let (sps, span) = (8usize, 16usize);
        let h = rrc_taps(0.5, sps, span);
        let rc: Vec<f64> = (0..2 * h.len() - 1)
            .map(|n| {
                (0..h.len())
                    .filter(|&k| n >= k && n - k < h.len())
                    .map(|k| h[k] * h[n - k])
                    .sum()
            })
            .collect();
        let mid = h.len() - 1;
        let peak = rc[mid];
        for j in 1..=span {
            for idx in [mid + j * sps, mid - j * sps] {
                assert!(rc[idx].abs() / peak < 1e-3, "ISI at {j} symbols: {}", rc[idx] / peak);
            }
        }
    }

    #[test]
    fn pulse_shape_impulse_and_matched_recovery() {
        let taps = rrc_taps(0.5, 4, 8);
        let imp = pulse_shape(&[Complex64::new(1.0, 0.0)], &taps, 4);
        for (a, b) in imp.iter().zip(&taps) {
            assert_eq!(a.re, *b);
        }
        let bits = gen_pss(1).unwrap();
        let sym: Vec<Complex64> = bits.iter().map(|&b| Complex64::new(b, 0.0)).collect();
        let tx = pulse_shape(&sym, &taps, 4);
        assert_eq!(tx.len(), 127 * 4 + taps.len() - 1);
        let mf = matched_filter(&tx, &taps);
        let delay = taps.len() - 1;
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(mf[delay + i * 4].re.signum(), b);
        }
    }

    #[test]
    fn noiseless_offset_is_exact() {
        let t = PreambleSpec::default().waveform(1e6).unwrap().samples;
        let mut rx = vec![Complex64::zero(); 100];
        rx.extend_from_slice(&t);
        rx.extend(vec![Complex64::zero(); 50]);
        let r = correlate_and_sync(&rx, &t, 0.6).unwrap();
        assert_eq!(r.offset, 100);
        assert!((r.peak_metric - 1.0).abs() < 1e-9);
        assert!(r.detected);

        let scaled: Vec<Complex64> = rx.iter().map(|v| v * Complex64::new(-0.2, 3.0)).collect();
        let s = correlate_and_sync(&scaled, &t, 0.6).unwrap();
        assert_eq!(s.offset, r.offset);
        assert!((s.peak_metric - r.peak_metric).abs() < 1e-9);
    }

    fn with_paths(t: &[Complex64], lead: usize, paths: &[(usize, Complex64)]) -> Vec<Complex64> {
        let mut rx = vec![Complex64::zero(); lead + t.len() + 40];
        for &(d, g) in paths {
            for (i, v) in t.iter().enumerate() {
                rx[lead + d + i] += v * g;
            }
        }
        rx
    }

    #[test]
    fn multipath_window_of_one_is_plain_correlation() {
        let t = PreambleSpec::default().waveform(1e6).unwrap().samples;
        let rx = with_paths(&t, 37, &[(0, Complex64::new(0.8, 0.1)), (2, Complex64::new(0.0, 0.5))]);
        let a = correlate_and_sync(&rx, &t, 0.6).unwrap();
        let b = correlate_multipath(&rx, &t, 0.6, 1).unwrap();
        assert_eq!(a.offset, b.offset);
        assert!((a.peak_metric - b.peak_metric).abs() < 1e-9);
    }

    #[test]
    fn multipath_energy_rescues_spread_channels() {
        let t = PreambleSpec::default().waveform(1e6).unwrap().samples;
        let g = Complex64::new(0.5, 0.0);
        let paths = [(0, g), (1, g * Complex64::i()), (2, -g), (3, g)];
        let rx = with_paths(&t, 60, &paths);
        let plain = correlate_and_sync(&rx, &t, 0.6).unwrap();
        assert!(!plain.detected, "single-lag metric {}", plain.peak_metric);
        let r = correlate_multipath(&rx, &t, 0.6, 6).unwrap();
        assert!(r.detected && r.peak_metric > 0.9, "{}", r.peak_metric);
        assert_eq!(r.offset, 60);
    }

    #[test]
    fn multipath_offset_is_first_strong_path() {
        let t = PreambleSpec::default().waveform(1e6).unwrap().samples;
        let rx = with_paths(&t, 20, &[(0, Complex64::new(0.7, 0.0)), (3, Complex64::new(1.0, 0.0))]);
        assert_eq!(correlate_multipath(&rx, &t, 0.6, 6).unwrap().offset, 20);
        let weak = with_paths(&t, 20, &[(0, Complex64::new(0.05, 0.0)), (3, Complex64::new(1.0, 0.0))]);
        assert_eq!(correlate_multipath(&weak, &t, 0.6, 6).unwrap().offset, 23);
    }

    #[test]
    fn short_input_is_an_error() {
        let t = vec![Complex64::new(1.0, 0.0); 10];
        assert!(matches!(
            correlate_and_sync(&t[..5], &t, 0.5),
            Err(Error::TooShort { need: 10, got: 5 })
        ));
    }
}
