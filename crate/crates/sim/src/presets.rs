//! Named presets and the JSON configuration file.

use std::path::PathBuf;

use otfs_core::fec::{LdpcCode, ParityCheckMatrix};
use otfs_core::frame::{
    payload_bits_ofdm, payload_bits_otfs, McsConfig, OfdmFrameConfig, OtfsFrameConfig, PayloadSize, Waveform,
    WaveformConfig,
};
use otfs_core::link::{Link, OfdmLink, OtfsLink, ReceiverParams, SlotLayout};
use otfs_core::sync::PreambleSpec;
use serde::{Deserialize, Serialize};

use crate::io::{self, FormatError};

pub const PRESET_NAMES: [&str; 3] = ["table1-15khz", "table1-30khz", "fig4-grid"];

/// Seed of the built-in LDPC codes.
pub const DEFAULT_CODE_SEED: u64 = 0x07F5;

const CARRIER: f64 = 5.0e9;

/// Built-in parity-check matrices, keyed by `(n, k)`.
const BUILTIN_CODES: [(usize, usize, &str); 3] = [
    (9120, 3040, include_str!("../data/ldpc_9120_3040.alist")),
    (6120, 2040, include_str!("../data/ldpc_6120_2040.alist")),
    (15008, 5002, include_str!("../data/ldpc_15008_5002.alist")),
];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown preset `{0}` (known: table1-15khz, table1-30khz, fig4-grid)")]
    UnknownPreset(String),
    #[error("config file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] otfs_core::Error),
}

/// Everything a run needs besides the channel, the SNR and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub name: String,
    pub subcarrier_spacing: f64,
    pub otfs: OtfsFrameConfig,
    pub ofdm: OfdmFrameConfig,
    pub mcs: McsConfig,
    pub preamble: PreambleSpec,
    pub slot: SlotLayout,
    /// Impulse pilot amplitude; data symbols have unit energy.
    pub pilot_amplitude: f64,
    /// RMS delay spread of the default TDL channel, seconds.
    pub rms_delay_spread: f64,
    pub snr_db: f64,
    /// Seed for generated codes when no alist file is given.
    pub code_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub otfs_code: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ofdm_code: Option<PathBuf>,
    /// Default Doppler values for `sweep`, Hz.
    pub doppler_grid: Vec<f64>,
}

fn grid(stop: f64, step: f64) -> Vec<f64> {
    let n = (stop / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn ofdm(scs: f64, cp_len: usize) -> OfdmFrameConfig {
    OfdmFrameConfig {
        n_sc: 256,
        m_sym: 14,
        pilot_sym_indices: vec![2, 11],
        cp_len,
        dc_null: true,
        sample_rate: 256.0 * scs,
        carrier_freq: CARRIER,
    }
}

fn otfs(n_del: usize, n_dopp: usize, n_cp: usize, del_span: usize, dopp_span: usize, fs: f64) -> OtfsFrameConfig {
    OtfsFrameConfig {
        carrier_freq: CARRIER,
        ..OtfsFrameConfig::with_centered_pilot(n_del, n_dopp, n_cp, del_span, dopp_span, fs)
    }
}

pub fn preset(name: &str) -> Result<SimConfig, ConfigError> {
    let base = |name: &str, scs: f64, cp: usize, o: OtfsFrameConfig, stop: f64, step: f64| SimConfig {
        name: name.to_string(),
        subcarrier_spacing: scs,
        otfs: o,
        ofdm: ofdm(scs, cp),
        mcs: McsConfig::qpsk_third(),
        preamble: PreambleSpec::default(),
        slot: SlotLayout::default(),
        pilot_amplitude: 10f64.sqrt(),
        rms_delay_spread: 100e-9,
        snr_db: 30.0,
        code_seed: DEFAULT_CODE_SEED,
        otfs_code: None,
        ofdm_code: None,
        doppler_grid: grid(stop, step),
    };
    Ok(match name {
        // T_CP = 1.56 us is 6 samples at 3.84 Msps and 12 at 7.68 Msps.
        "table1-15khz" => base(name, 15e3, 6, otfs(330, 15, 6, 26, 15, 3.84e6), 2000.0, 100.0),
        "table1-30khz" => base(name, 30e3, 12, otfs(330, 15, 12, 26, 15, 7.68e6), 4000.0, 200.0),
        "fig4-grid" => base(name, 15e3, 6, otfs(60, 156, 6, 58, 32, 3.84e6), 2000.0, 100.0),
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    })
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(FormatError::from)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.otfs.validate()?;
        self.ofdm.validate()?;
        self.preamble.validate()?;
        payload_bits_otfs(&self.otfs, &self.mcs)?;
        payload_bits_ofdm(&self.ofdm, &self.mcs)?;
        if !(self.pilot_amplitude > 0.0) || !self.pilot_amplitude.is_finite() {
            return Err(otfs_core::Error::InvalidConfig("pilot amplitude must be positive".into()).into());
        }
        Ok(())
    }

    pub fn frame_config(&self, waveform: Waveform) -> WaveformConfig {
        match waveform {
            Waveform::Otfs => WaveformConfig::Otfs(self.otfs.clone()),
            Waveform::Ofdm => WaveformConfig::Ofdm(self.ofdm.clone()),
        }
    }

    pub fn payload(&self, waveform: Waveform) -> Result<PayloadSize, ConfigError> {
        Ok(match waveform {
            Waveform::Otfs => payload_bits_otfs(&self.otfs, &self.mcs)?,
            Waveform::Ofdm => payload_bits_ofdm(&self.ofdm, &self.mcs)?,
        })
    }

    /// The LDPC code for a waveform: the configured alist file, else a
    /// built-in matrix of the right size, else a freshly generated one.
    pub fn code(&self, waveform: Waveform) -> Result<LdpcCode, ConfigError> {
        let path = match waveform {
            Waveform::Otfs => &self.otfs_code,
            Waveform::Ofdm => &self.ofdm_code,
        };
        if let Some(p) = path {
            return Ok(LdpcCode::new(io::read_alist(p)?));
        }
        let size = self.payload(waveform)?;
        let (n, k) = (size.coded_bits, size.code_info_bits);
        if self.code_seed == DEFAULT_CODE_SEED {
            if let Some(h) = builtin_code(n, k) {
                return Ok(LdpcCode::new(h?));
            }
        }
        Ok(LdpcCode::ira(n, k, self.code_seed)?)
    }

    pub fn receiver(&self, waveform: Waveform) -> ReceiverParams {
        let cp = match waveform {
            Waveform::Otfs => self.otfs.n_cp,
            Waveform::Ofdm => self.ofdm.cp_len,
        };
        ReceiverParams {
            sync_spread: cp.max(1),
            ..ReceiverParams::new(cp / 3)
        }
    }

    pub fn build_link(&self, waveform: Waveform) -> Result<Link, ConfigError> {
        self.build_link_with(waveform, self.receiver(waveform))
    }

    pub fn build_link_with(&self, waveform: Waveform, rx: ReceiverParams) -> Result<Link, ConfigError> {
        let code = self.code(waveform)?;
        Ok(match waveform {
            Waveform::Otfs => Link::Otfs(OtfsLink::new(
                self.otfs.clone(),
                &self.mcs,
                code,
                &self.preamble,
                self.slot,
                rx,
                self.pilot_amplitude,
            )?),
            Waveform::Ofdm => Link::Ofdm(OfdmLink::new(
                self.ofdm.clone(),
                &self.mcs,
                code,
                &self.preamble,
                self.slot,
                rx,
            )?),
        })
    }
}

/// Parse the shipped matrix for `(n, k)`, if there is one.
pub fn builtin_code(n: usize, k: usize) -> Option<Result<ParityCheckMatrix, ConfigError>> {
    BUILTIN_CODES
        .iter()
        .find(|(bn, bk, _)| *bn == n && *bk == k)
        .map(|(_, _, text)| io::parse_alist(text).map_err(ConfigError::from))
}
