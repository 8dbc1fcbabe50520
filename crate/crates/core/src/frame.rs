//! Frame geometry, timing and MCS parameters for both waveforms, plus payload
//! and overhead accounting.
//!
//! The OTFS pilot region is a rectangle of `pilot_del_span x pilot_dopp_span`
//! bins whose corner is at `(pilot_del_pos, pilot_dopp_pos)`; the impulse sits
//! at the region center. The region must not wrap around the grid.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize), serde(rename_all = "lowercase"))]
pub enum Waveform {
    Otfs,
    Ofdm,
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Waveform::Otfs => "otfs",
            Waveform::Ofdm => "ofdm",
        })
    }
}

impl FromStr for Waveform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "otfs" => Ok(Waveform::Otfs),
            "ofdm" => Ok(Waveform::Ofdm),
            other => Err(Error::InvalidConfig(format!("unknown waveform `{other}`"))),
        }
    }
}

/// Exact rational code rate, so `floor(bits * rate)` never suffers from
/// binary rounding of values such as 1/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CodeRate {
    pub num: u32,
    pub den: u32,
}

impl CodeRate {
    pub const fn new(num: u32, den: u32) -> Self {
        Self { num, den }
    }

    /// `floor(bits * num / den)`.
    pub fn info_bits(&self, coded_bits: usize) -> usize {
        (coded_bits as u128 * self.num as u128 / self.den as u128) as usize
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct McsConfig {
    /// Bits per QAM symbol: 2, 4 or 6.
    pub modulation_order: u32,
    pub code_rate: CodeRate,
    pub crc_bits: usize,
}

impl McsConfig {
    pub const fn qpsk_third() -> Self {
        Self {
            modulation_order: 2,
            code_rate: CodeRate::new(1, 3),
            crc_bits: 24,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.modulation_order, 2 | 4 | 6) {
            return Err(Error::UnsupportedOrder(self.modulation_order));
        }
        let r = self.code_rate;
        if r.den == 0 || r.num == 0 || r.num >= r.den {
            return Err(Error::InvalidConfig(format!(
                "code rate {}/{} outside (0, 1)",
                r.num, r.den
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct OtfsFrameConfig {
    pub n_del: usize,
    pub n_dopp: usize,
    pub n_cp: usize,
    pub pilot_del_span: usize,
    pub pilot_dopp_span: usize,
    pub pilot_del_pos: usize,
    pub pilot_dopp_pos: usize,
    pub sample_rate: f64,
    pub carrier_freq: f64,
}

impl OtfsFrameConfig {
    /// A grid without any pilot region (receiver given the channel).
    pub fn without_pilot(n_del: usize, n_dopp: usize, n_cp: usize, sample_rate: f64) -> Self {
        Self {
            n_del,
            n_dopp,
            n_cp,
            pilot_del_span: 0,
            pilot_dopp_span: 0,
            pilot_del_pos: 0,
            pilot_dopp_pos: 0,
            sample_rate,
            carrier_freq: 5.0e9,
        }
    }

    /// Pilot region of the given size centered in the grid.
    pub fn with_centered_pilot(
        n_del: usize,
        n_dopp: usize,
        n_cp: usize,
        del_span: usize,
        dopp_span: usize,
        sample_rate: f64,
    ) -> Self {
        Self {
            n_del,
            n_dopp,
            n_cp,
            pilot_del_span: del_span,
            pilot_dopp_span: dopp_span,
            pilot_del_pos: (n_del - del_span.min(n_del)) / 2,
            pilot_dopp_pos: (n_dopp - dopp_span.min(n_dopp)) / 2,
            sample_rate,
            carrier_freq: 5.0e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_del == 0 || self.n_dopp == 0 {
            return Err(Error::InvalidConfig("grid dimensions must be positive".into()));
        }
        if self.n_cp >= self.grid_bins() {
            return Err(Error::CpOutOfRange {
                n_cp: self.n_cp,
                len: self.grid_bins(),
            });
        }
        if (self.pilot_del_span == 0) != (self.pilot_dopp_span == 0) {
            return Err(Error::InvalidConfig(
                "pilot spans must both be zero or both positive".into(),
            ));
        }
        if self.pilot_del_pos + self.pilot_del_span > self.n_del
            || self.pilot_dopp_pos + self.pilot_dopp_span > self.n_dopp
        {
            return Err(Error::InvalidConfig("pilot region does not fit the grid".into()));
        }
        if self.data_bins() == 0 {
            return Err(Error::Infeasible("pilot region covers the whole grid".into()));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(())
    }

    pub fn grid_bins(&self) -> usize {
        self.n_del * self.n_dopp
    }

    pub fn has_pilot(&self) -> bool {
        self.pilot_del_span > 0
    }

    pub fn guard_bins(&self) -> usize {
        self.pilot_del_span * self.pilot_dopp_span
    }

    pub fn data_bins(&self) -> usize {
        self.grid_bins().saturating_sub(self.guard_bins())
    }

    /// Impulse location (delay, Doppler), if a pilot region exists.
    pub fn pilot_position(&self) -> Option<(usize, usize)> {
        self.has_pilot().then(|| {
            (
                self.pilot_del_pos + self.pilot_del_span / 2,
                self.pilot_dopp_pos + self.pilot_dopp_span / 2,
            )
        })
    }

    pub fn in_guard(&self, del: usize, dopp: usize) -> bool {
        self.has_pilot()
            && (self.pilot_del_pos..self.pilot_del_pos + self.pilot_del_span).contains(&del)
            && (self.pilot_dopp_pos..self.pilot_dopp_pos + self.pilot_dopp_span).contains(&dopp)
    }

    /// Column-major linear indices (`del + n_del * dopp`) of the data bins.
    pub fn data_bin_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.data_bins());
        for k in 0..self.n_dopp {
            for l in 0..self.n_del {
                if !self.in_guard(l, k) {
                    out.push(l + self.n_del * k);
                }
            }
        }
        out
    }

    /// Samples of one frame including its single cyclic prefix.
    pub fn frame_samples(&self) -> usize {
        self.grid_bins() + self.n_cp
    }

    /// Doppler bin spacing `1 / (N_dopp * T_sym)` in Hz.
    pub fn doppler_resolution(&self) -> f64 {
        self.sample_rate / self.grid_bins() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct OfdmFrameConfig {
    pub n_sc: usize,
    pub m_sym: usize,
    pub pilot_sym_indices: Vec<usize>,
    pub cp_len: usize,
    pub dc_null: bool,
    pub sample_rate: f64,
    pub carrier_freq: f64,
}

impl OfdmFrameConfig {
    pub fn m_pilot(&self) -> usize {
        self.pilot_sym_indices.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sc == 0 || self.m_sym == 0 {
            return Err(Error::InvalidConfig("grid dimensions must be positive".into()));
        }
        if self.cp_len >= self.n_sc {
            return Err(Error::CpOutOfRange {
                n_cp: self.cp_len,
                len: self.n_sc,
            });
        }
        for (i, &p) in self.pilot_sym_indices.iter().enumerate() {
            if p >= self.m_sym {
                return Err(Error::InvalidConfig(format!(
                    "pilot symbol index {p} outside {} symbols",
                    self.m_sym
                )));
            }
            if self.pilot_sym_indices[..i].contains(&p) {
                return Err(Error::InvalidConfig(format!("duplicate pilot symbol {p}")));
            }
        }
        if self.data_res() == 0 {
            return Err(Error::Infeasible("no data resource elements remain".into()));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        Ok(())
    }

    pub fn is_pilot_symbol(&self, m: usize) -> bool {
        self.pilot_sym_indices.contains(&m)
    }

    /// Subcarriers carrying energy (DC excluded when nulled).
    pub fn active_subcarriers(&self) -> usize {
        self.n_sc - usize::from(self.dc_null)
    }

    pub fn data_res(&self) -> usize {
        (self.m_sym.saturating_sub(self.m_pilot())) * self.active_subcarriers()
    }

    /// Column-major linear indices (`sc + n_sc * sym`) of the data REs.
    pub fn data_re_indices(&self) -> Vec<usize> {
        let first = usize::from(self.dc_null);
        let mut out = Vec::with_capacity(self.data_res());
        for m in 0..self.m_sym {
            if self.is_pilot_symbol(m) {
                continue;
            }
            for k in first..self.n_sc {
                out.push(k + self.n_sc * m);
            }
        }
        out
    }

    pub fn frame_samples(&self) -> usize {
        self.m_sym * (self.n_sc + self.cp_len)
    }
}

/// Payload accounting for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadSize {
    /// Data bins (OTFS) or data resource elements (OFDM).
    pub data_units: usize,
    pub coded_bits: usize,
    /// LDPC information length, `floor(coded_bits * rate)`.
    pub code_info_bits: usize,
    /// User bits after removing the CRC.
    pub payload_bits: usize,
}

fn payload(data_units: usize, mcs: &McsConfig) -> Result<PayloadSize> {
    mcs.validate()?;
    let coded_bits = data_units * mcs.modulation_order as usize;
    let code_info_bits = mcs.code_rate.info_bits(coded_bits);
    if code_info_bits <= mcs.crc_bits {
        return Err(Error::Infeasible(format!(
            "{code_info_bits} information bits cannot carry a {}-bit CRC",
            mcs.crc_bits
        )));
    }
    Ok(PayloadSize {
        data_units,
        coded_bits,
        code_info_bits,
        payload_bits: code_info_bits - mcs.crc_bits,
    })
}

pub fn payload_bits_otfs(cfg: &OtfsFrameConfig, mcs: &McsConfig) -> Result<PayloadSize> {
    if cfg.data_bins() == 0 {
        return Err(Error::Infeasible("pilot region covers the whole grid".into()));
    }
    cfg.validate()?;
    payload(cfg.data_bins(), mcs)
}

pub fn payload_bits_ofdm(cfg: &OfdmFrameConfig, mcs: &McsConfig) -> Result<PayloadSize> {
    if cfg.data_res() == 0 {
        return Err(Error::Infeasible("all symbols are pilots".into()));
    }
    cfg.validate()?;
    payload(cfg.data_res(), mcs)
}

/// Either waveform's frame configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveformConfig {
    Otfs(OtfsFrameConfig),
    Ofdm(OfdmFrameConfig),
}

impl WaveformConfig {
    pub fn waveform(&self) -> Waveform {
        match self {
            WaveformConfig::Otfs(_) => Waveform::Otfs,
            WaveformConfig::Ofdm(_) => Waveform::Ofdm,
        }
    }

    pub fn sample_rate(&self) -> f64 {
        match self {
            WaveformConfig::Otfs(c) => c.sample_rate,
            WaveformConfig::Ofdm(c) => c.sample_rate,
        }
    }

    pub fn frame_samples(&self) -> usize {
        match self {
            WaveformConfig::Otfs(c) => c.frame_samples(),
            WaveformConfig::Ofdm(c) => c.frame_samples(),
        }
    }

    /// Sample-equivalent overhead of one slot whose sync signal occupies
    /// `sync_samples`. Pilots count one sample per pilot/guard bin or RE.
    pub fn overhead(&self, sync_samples: usize) -> Overhead {
        let (cp, pilot) = match self {
            WaveformConfig::Otfs(c) => (c.n_cp, c.guard_bins()),
            WaveformConfig::Ofdm(c) => (c.m_sym * c.cp_len, c.m_pilot() * c.n_sc),
        };
        Overhead {
            sync: sync_samples,
            cp,
            pilot,
            total: sync_samples + self.frame_samples(),
        }
    }

    pub fn timing(&self, sync_samples: usize) -> SlotTiming {
        let fs = self.sample_rate();
        let (cp, sym, n_sym) = match self {
            WaveformConfig::Otfs(c) => (c.n_cp, c.n_del, c.n_dopp),
            WaveformConfig::Ofdm(c) => (c.cp_len, c.n_sc, c.m_sym),
        };
        let t_sync = sync_samples as f64 / fs;
        let t_cp = cp as f64 / fs;
        let t_sym = sym as f64 / fs;
        let t_slot = match self {
            WaveformConfig::Otfs(_) => t_sync + t_cp + n_sym as f64 * t_sym,
            WaveformConfig::Ofdm(_) => t_sync + n_sym as f64 * (t_cp + t_sym),
        };
        SlotTiming {
            t_sync,
            t_cp,
            t_sym,
            t_slot,
        }
    }
}

/// Overhead of one slot in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Overhead {
    pub sync: usize,
    pub cp: usize,
    pub pilot: usize,
    pub total: usize,
}

impl Overhead {
    pub fn fraction(&self) -> f64 {
        (self.sync + self.cp + self.pilot) as f64 / self.total as f64
    }

    pub fn cp_fraction(&self) -> f64 {
        self.cp as f64 / self.total as f64
    }
}

pub fn overhead_fraction(cfg: &WaveformConfig, sync_samples: usize) -> f64 {
    cfg.overhead(sync_samples).fraction()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotTiming {
    pub t_sync: f64,
    pub t_cp: f64,
    /// Useful symbol duration (one delay column for OTFS).
    pub t_sym: f64,
    pub t_slot: f64,
}
