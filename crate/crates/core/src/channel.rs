//! Time-varying multipath channel: per-tap delay, Doppler and complex gain,
//! tapped-delay-line profiles with random fading, and calibrated AWGN.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::{Float, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dd::{DelayGroup, SparseDdChannel};
use crate::error::{Error, Result};
use crate::frame::OtfsFrameConfig;
use crate::otfs::{DdGrid, OtfsModem, WindowSpec};
use crate::signal::SampleBlock;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// One propagation path: complex gain, delay in seconds, Doppler in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelTap {
    pub gain: Complex64,
    pub delay: f64,
    pub doppler: f64,
}

impl ChannelTap {
    pub fn new(gain: Complex64, delay: f64, doppler: f64) -> Self {
        Self { gain, delay, doppler }
    }

    /// Delay rounded to the nearest sample.
    pub fn delay_samples(&self, fs: f64) -> usize {
        (self.delay * fs).round().max(0.0) as usize
    }
}

/// Tapped-delay-line power-delay profile.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TdlProfile {
    pub normalized_delays: Vec<f64>,
    pub power_db: Vec<f64>,
    /// Scale applied to the normalized delays, seconds.
    pub rms_delay_spread: f64,
    pub max_doppler: f64,
}

/// TDL-A normalized delays and powers (dB).
const TDL_A: [(f64, f64); 23] = [
    (0.0000, -13.4),
    (0.3819, 0.0),
    (0.4025, -2.2),
    (0.5868, -4.0),
    (0.4610, -6.0),
    (0.5375, -8.2),
    (0.6708, -9.9),
    (0.5750, -10.5),
    (0.7618, -7.5),
    (1.5375, -15.9),
    (1.8978, -6.6),
    (2.2242, -16.7),
    (2.1717, -12.4),
    (2.4942, -15.2),
    (2.5119, -10.8),
    (3.0582, -11.3),
    (4.0810, -12.7),
    (4.4579, -16.2),
    (4.5695, -18.3),
    (4.7966, -18.9),
    (5.0066, -16.6),
    (5.3043, -19.9),
    (9.6586, -29.7),
];

impl TdlProfile {
    pub fn tdl_a(rms_delay_spread: f64, max_doppler: f64) -> Self {
        Self {
            normalized_delays: TDL_A.iter().map(|t| t.0).collect(),
            power_db: TDL_A.iter().map(|t| t.1).collect(),
            rms_delay_spread,
            max_doppler,
        }
    }

    /// Single-path profile (flat Rayleigh fading).
    pub fn flat(max_doppler: f64) -> Self {
        Self {
            normalized_delays: vec![0.0],
            power_db: vec![0.0],
            rms_delay_spread: 0.0,
            max_doppler,
        }
    }

    pub fn len(&self) -> usize {
        self.normalized_delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized_delays.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidConfig("profile has no taps".into()));
        }
        if self.normalized_delays.len() != self.power_db.len() {
            return Err(Error::LengthMismatch {
                expected: self.normalized_delays.len(),
                got: self.power_db.len(),
            });
        }
        if self.normalized_delays.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidConfig("tap delays must be finite and non-negative".into()));
        }
        if self.power_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("tap powers must be finite".into()));
        }
        if !(self.rms_delay_spread >= 0.0) || !(self.max_doppler >= 0.0) {
            return Err(Error::InvalidConfig("delay spread and Doppler must be non-negative".into()));
        }
        Ok(())
    }

    /// Linear tap powers scaled to sum to one.
    pub fn linear_powers(&self) -> Vec<f64> {
        let lin: Vec<f64> = self.power_db.iter().map(|p| 10f64.powf(p / 10.0)).collect();
        let s: f64 = lin.iter().sum();
        lin.into_iter().map(|p| p / s).collect()
    }

    pub fn delays(&self) -> Vec<f64> {
        self.normalized_delays.iter().map(|d| d * self.rms_delay_spread).collect()
    }
}

/// How per-tap Doppler shifts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DopplerMode {
    /// `nu = nu_max cos(theta)`, `theta` uniform; the sum approximates a Jakes spectrum.
    #[default]
    Jakes,
    /// Every tap shifted by exactly `nu_max`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseSpec {
    /// Ratio of mean signal power to noise power; `+inf` disables noise.
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64) -> Self {
        Self { snr_db }
    }

    pub fn noiseless() -> Self {
        Self { snr_db: f64::INFINITY }
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    pub fn noise_var(&self, signal_power: f64) -> f64 {
        if self.is_noiseless() {
            0.0
        } else {
            signal_power / 10f64.powf(self.snr_db / 10.0)
        }
    }
}

pub fn doppler_from_speed(speed_kmh: f64, carrier_freq: f64) -> f64 {
    speed_kmh / 3.6 * carrier_freq / SPEED_OF_LIGHT
}

pub fn speed_from_doppler(doppler: f64, carrier_freq: f64) -> f64 {
    doppler * SPEED_OF_LIGHT / carrier_freq * 3.6
}

/// `r[n] = sum_l a_l e^{j 2 pi nu_l (t0 + n / fs)} s[n - d_l]`, zero before the block.
pub fn apply_channel(s: &SampleBlock, taps: &[ChannelTap], t0: f64) -> Result<SampleBlock> {
    if taps.is_empty() {
        return Err(Error::Empty);
    }
    let fs = s.sample_rate;
    let len = s.len();
    for t in taps {
        let d = t.delay_samples(fs);
        if d >= len.max(1) {
            return Err(Error::DelayOutOfRange { delay: d, limit: len });
        }
    }
    let mut out = vec![Complex64::zero(); len];
    for t in taps {
        let d = t.delay_samples(fs);
        let w = 2.0 * PI * t.doppler;
        for n in d..len {
            let rot = if t.doppler == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, w * (t0 + n as f64 / fs))
            };
            out[n] += t.gain * rot * s.samples[n - d];
        }
    }
    Ok(SampleBlock::new(out, fs))
}

/// Circular complex Gaussian sample with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let sd = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * sd, im * sd)
}

/// AWGN referenced to the block's own mean power.
pub fn add_awgn<R: Rng + ?Sized>(s: &SampleBlock, noise: NoiseSpec, rng: &mut R) -> Result<SampleBlock> {
    if s.is_empty() {
        return Err(Error::Empty);
    }
    add_awgn_with_power(s, noise, s.mean_power(), rng)
}

/// AWGN with variance `signal_power / 10^(snr_db/10)`.
pub fn add_awgn_with_power<R: Rng + ?Sized>(
    s: &SampleBlock,
    noise: NoiseSpec,
    signal_power: f64,
    rng: &mut R,
) -> Result<SampleBlock> {
    if noise.is_noiseless() {
        return Ok(s.clone());
    }
    if !(signal_power > 0.0) {
        return Err(Error::ZeroPower);
    }
    if !noise.snr_db.is_finite() {
        return Err(Error::InvalidConfig("SNR must be finite or +inf".into()));
    }
    let var = noise.noise_var(signal_power);
    let samples = s.samples.iter().map(|x| x + complex_gaussian(rng, var)).collect();
    Ok(SampleBlock::new(samples, s.sample_rate))
}

/// Draw one realization of a TDL profile: Rayleigh gains with the profile's
/// mean powers and per-tap Doppler shifts.
pub fn make_tdl<R: Rng + ?Sized>(profile: &TdlProfile, mode: DopplerMode, rng: &mut R) -> Vec<ChannelTap> {
    let powers = profile.linear_powers();
    profile
        .delays()
        .into_iter()
        .zip(powers)
        .map(|(delay, p)| {
            let gain = complex_gaussian(rng, p);
            let doppler = match mode {
                DopplerMode::Jakes => {
                    let theta: f64 = rng.random::<f64>() * 2.0 * PI;
                    profile.max_doppler * theta.cos()
                }
                DopplerMode::Fixed => profile.max_doppler,
            };
            ChannelTap::new(gain, delay, doppler)
        })
        .collect()
}

/// Per-delay gain sequences over the post-CP samples of one frame whose CP
/// starts at absolute time `t0`.
pub fn delay_groups(taps: &[ChannelTap], cfg: &OtfsFrameConfig, t0: f64) -> Vec<DelayGroup> {
    let fs = cfg.sample_rate;
    let mn = cfg.grid_bins();
    let mut groups: Vec<DelayGroup> = Vec::new();
    for t in taps {
        let d = t.delay_samples(fs);
        let gi = match groups.iter().position(|g| g.delay == d) {
            Some(i) => i,
            None => {
                groups.push(DelayGroup {
                    delay: d,
                    gains: vec![Complex64::zero(); mn],
                });
                groups.len() - 1
            }
        };
        let w = 2.0 * PI * t.doppler;
        for (n, g) in groups[gi].gains.iter_mut().enumerate() {
            let rot = if t.doppler == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, w * (t0 + (n + cfg.n_cp) as f64 / fs))
            };
            *g += t.gain * rot;
        }
    }
    groups
}

/// Delay-Doppler operator of the taps for a rectangular window and `t0 = 0`.
pub fn dd_effective_channel(taps: &[ChannelTap], cfg: &OtfsFrameConfig) -> Result<SparseDdChannel> {
    dd_effective_channel_at(taps, cfg, 0.0, &WindowSpec::rectangular(cfg.n_del, cfg.n_dopp))
}

/// Delay-Doppler operator equal to the composition
/// demodulate, channel, modulate for a frame starting at `t0`.
///
/// The rectangular window has a closed form; other windows are probed one
/// basis grid at a time.
pub fn dd_effective_channel_at(
    taps: &[ChannelTap],
    cfg: &OtfsFrameConfig,
    t0: f64,
    window: &WindowSpec,
) -> Result<SparseDdChannel> {
    if taps.is_empty() {
        return Err(Error::Empty);
    }
    for t in taps {
        let d = t.delay_samples(cfg.sample_rate);
        if d >= cfg.n_del {
            return Err(Error::DelayOutOfRange {
                delay: d,
                limit: cfg.n_del,
            });
        }
    }
    if window.is_rectangular() {
        let groups = delay_groups(taps, cfg, t0);
        return SparseDdChannel::from_delay_groups(cfg.n_del, cfg.n_dopp, cfg.n_cp, &groups, 1e-8);
    }
    let modem = OtfsModem::new(cfg.n_del, cfg.n_dopp);
    let dim = cfg.grid_bins();
    let mut entries = Vec::new();
    for c in 0..dim {
        let mut x = DdGrid::zeros(cfg.n_del, cfg.n_dopp);
        x.as_mut_slice()[c] = Complex64::new(1.0, 0.0);
        let s = modem.modulate(&x, window, cfg)?;
        let r = apply_channel(&s, taps, t0)?;
        let y = modem.demodulate(&r.samples, window, cfg)?;
        for (row, v) in y.as_slice().iter().enumerate() {
            if v.norm() > 1e-8 {
                entries.push((row, c, *v));
            }
        }
    }
    SparseDdChannel::from_entries(cfg.n_del, cfg.n_dopp, entries)
}
