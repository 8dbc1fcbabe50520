use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::{Float, Zero};

use super::pilot::PilotLayout;
use super::sparse::{DelayGroup, SparseDdChannel};
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::otfs::DdGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    /// Detection threshold in units of the per-bin noise standard deviation.
    pub threshold_factor: f64,
    /// Per-bin noise standard deviation; estimated from the guard when `None`.
    pub noise_sigma: Option<f64>,
    pub n_cp: usize,
    /// Operator entries at or below this magnitude are dropped.
    pub entry_threshold: f64,
    /// Lagrange order used to interpolate per-delay gains in time; 0 keeps
    /// every detected bin as an integer-Doppler tap.
    pub interp_order: usize,
}

impl EstimatorParams {
    pub fn new(n_cp: usize) -> Self {
        Self {
            threshold_factor: 3.0,
            noise_sigma: None,
            n_cp,
            entry_threshold: 1e-6,
            interp_order: 0,
        }
    }
}

/// One above-threshold guard bin, `delay` and `doppler` relative to the pilot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdTap {
    pub delay: usize,
    pub doppler: i64,
    /// Path gain referred to the start of the slot (CP included).
    pub gain: Complex64,
}

/// Noise standard deviation from guard bins just before the pilot in delay.
///
/// A causal channel never spreads the pilot to negative delays, and the bins
/// closest to the pilot are also farthest from the data, so these bins hold
/// noise only.
pub fn estimate_noise_sigma(y: &DdGrid, layout: &PilotLayout) -> Option<f64> {
    let before = layout.del - layout.del_start;
    let reach = (before / 2).max(1).min(before);
    if reach == 0 {
        return None;
    }
    let mut acc = 0.0;
    let mut count = 0usize;
    for k in layout.dopp_start..layout.dopp_start + layout.dopp_span {
        for off in 1..=reach {
            acc += y.get(layout.del - off, k).norm_sqr();
            count += 1;
        }
    }
    Some((acc / count as f64).sqrt())
}

/// Read channel taps off the guard region around the pilot.
pub fn detect_taps(y: &DdGrid, layout: &PilotLayout, params: &EstimatorParams) -> Result<Vec<DdTap>> {
    let (m, n) = (y.rows(), y.cols());
    let mn = (m * n) as i64;
    let sigma = match params.noise_sigma {
        Some(s) => s,
        None => estimate_noise_sigma(y, layout).unwrap_or(0.0),
    };
    let threshold = (params.threshold_factor * sigma).max(1e-8 * layout.amplitude);
    let max_delay = layout.del_span - 1 - layout.del_span / 2;
    let dopp_lo = -((layout.dopp_span / 2) as i64);
    let dopp_hi = (layout.dopp_span - 1 - layout.dopp_span / 2) as i64;

    let mut taps = Vec::new();
    for dl in 0..=max_delay {
        let row = layout.del + dl;
        if row >= m {
            break;
        }
        for dk in dopp_lo..=dopp_hi {
            let col = (layout.dopp as i64 + dk).rem_euclid(n as i64) as usize;
            let v = y.get(row, col);
            if v.norm() <= threshold {
                continue;
            }
            let q = (dk * (row + params.n_cp) as i64).rem_euclid(mn);
            let phase = Complex64::from_polar(1.0, 2.0 * PI * q as f64 / mn as f64);
            taps.push(DdTap {
                delay: dl,
                doppler: dk,
                gain: v / layout.amplitude / phase,
            });
        }
    }
    if taps.is_empty() {
        return Err(Error::EstimationFailed);
    }
    Ok(taps)
}

/// Turn detected taps into per-delay gain sequences over the frame.
pub fn taps_to_groups(taps: &[DdTap], n_del: usize, n_dopp: usize, n_cp: usize) -> Vec<DelayGroup> {
    let mn = n_del * n_dopp;
    let rot: Vec<Complex64> = (0..mn)
        .map(|q| Complex64::from_polar(1.0, 2.0 * PI * q as f64 / mn as f64))
        .collect();
    let mut groups: Vec<DelayGroup> = Vec::new();
    for t in taps {
        let gi = match groups.iter().position(|g| g.delay == t.delay) {
            Some(i) => i,
            None => {
                groups.push(DelayGroup {
                    delay: t.delay,
                    gains: vec![Complex64::zero(); mn],
                });
                groups.len() - 1
            }
        };
        let step = t.doppler.rem_euclid(mn as i64) as usize;
        let mut q = step * (n_cp % mn) % mn;
        for g in groups[gi].gains.iter_mut() {
            *g += t.gain * rot[q];
            q = (q + step) % mn;
        }
    }
    groups
}

/// Per-delay gain sequences sampled through the pilot and interpolated in time.
///
/// The pilot column of the operator at delay `d` is `A[k'-k] / N`, where `A`
/// is the length-`N` DFT of the gain seen at samples `p_del + d + M i`. The
/// detected bins of that delay (undetected ones read as zero) therefore give
/// those `N` gain samples by an inverse DFT, and Lagrange interpolation of
/// order `order` in between fills in every sample of the frame.
pub fn interpolate_groups(y: &DdGrid, layout: &PilotLayout, taps: &[DdTap], order: usize) -> Vec<DelayGroup> {
    let (m, n) = (y.rows(), y.cols());
    let p = order.clamp(1, n);
    let fft = Fft::new(n);
    let mut delays: Vec<usize> = taps.iter().map(|t| t.delay).collect();
    delays.sort_unstable();
    delays.dedup();
    let mut groups = Vec::with_capacity(delays.len());
    let mut w = vec![0.0f64; p];
    for d in delays {
        let row = layout.del + d;
        let mut a = vec![Complex64::zero(); n];
        for t in taps.iter().filter(|t| t.delay == d) {
            let k = t.doppler.rem_euclid(n as i64) as usize;
            let col = (layout.dopp + k) % n;
            a[k] = y.get(row, col) / layout.amplitude;
        }
        fft.inverse(&mut a);

        let mut gains = vec![Complex64::zero(); m * n];
        for (s, g) in gains.iter_mut().enumerate() {
            let t = (s as f64 - row as f64) / m as f64;
            let base = (t.floor() as i64 - (p as i64 / 2 - 1)).clamp(0, (n - p) as i64) as usize;
            for (j, wj) in w.iter_mut().enumerate() {
                let xj = (base + j) as f64;
                *wj = (0..p)
                    .filter(|&q| q != j)
                    .map(|q| {
                        let xq = (base + q) as f64;
                        (t - xq) / (xj - xq)
                    })
                    .product();
            }
            *g = w.iter().zip(&a[base..base + p]).map(|(wj, aj)| aj * *wj).sum();
        }
        groups.push(DelayGroup { delay: d, gains });
    }
    groups
}

/// Delay groups for the detected taps under `params.interp_order`.
pub fn estimate_groups(y: &DdGrid, layout: &PilotLayout, taps: &[DdTap], params: &EstimatorParams) -> Vec<DelayGroup> {
    if params.interp_order == 0 {
        taps_to_groups(taps, y.rows(), y.cols(), params.n_cp)
    } else {
        interpolate_groups(y, layout, taps, params.interp_order)
    }
}

/// Embedded-pilot channel estimate expanded into the full operator.
pub fn estimate_channel_dd(y: &DdGrid, layout: &PilotLayout, params: &EstimatorParams) -> Result<SparseDdChannel> {
    layout.validate()?;
    let taps = detect_taps(y, layout, params)?;
    let groups = estimate_groups(y, layout, &taps, params);
    SparseDdChannel::from_delay_groups(y.rows(), y.cols(), params.n_cp, &groups, params.entry_threshold)
}
