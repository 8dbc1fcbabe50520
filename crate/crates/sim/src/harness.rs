//! Monte-Carlo link runs, Doppler sweeps and PSD export.
//!
//! Frame `i` of a run draws everything (payload, lead-in, channel, noise)
//! from `ChaCha8Rng::seed_from_u64(seed)` switched to stream `i`, so results
//! do not depend on thread count or scheduling, and two runs with the same
//! seed see the same channels whatever the waveform.

use std::io::Write;
use std::path::Path;

use otfs_core::channel::{DopplerMode, NoiseSpec, TdlProfile};
use otfs_core::frame::Waveform;
use otfs_core::link::{ChannelModel, FrameOutcome, Link};
use otfs_core::psd::{compute_psd, Psd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::presets::{ConfigError, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub frames_sent: usize,
    pub frames_ok: usize,
    /// Frames whose preamble was found.
    pub frames_synced: usize,
    pub bit_errors: usize,
    pub bits_sent: usize,
    pub info_bits_per_slot: usize,
    pub slot_duration: f64,
    pub throughput_bps: f64,
    pub normalized_throughput: f64,
}

impl LinkResult {
    pub fn ber(&self) -> f64 {
        if self.bits_sent == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits_sent as f64
        }
    }
}

pub fn frame_rng(seed: u64, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame as u64);
    rng
}

/// Run `n_frames` slots through `channel` at the given noise level.
pub fn run_link(
    link: &Link,
    channel: &ChannelModel,
    noise: NoiseSpec,
    n_frames: usize,
    seed: u64,
) -> Result<LinkResult, ConfigError> {
    let slot = link.slot_duration();
    let outcomes: Vec<FrameOutcome> = (0..n_frames)
        .into_par_iter()
        .map(|i| {
            let mut rng = frame_rng(seed, i);
            link.run_frame(channel, noise, i as f64 * slot, &mut rng)
        })
        .collect::<Result<_, _>>()?;
    Ok(summarize(&outcomes, link.payload_bits(), slot))
}

pub fn summarize(outcomes: &[FrameOutcome], info_bits_per_slot: usize, slot_duration: f64) -> LinkResult {
    let frames_sent = outcomes.len();
    let frames_ok = outcomes.iter().filter(|o| o.ok).count();
    let peak = info_bits_per_slot as f64 / slot_duration;
    let normalized = if frames_sent == 0 {
        0.0
    } else {
        frames_ok as f64 / frames_sent as f64
    };
    LinkResult {
        frames_sent,
        frames_ok,
        frames_synced: outcomes.iter().filter(|o| o.synced).count(),
        bit_errors: outcomes.iter().map(|o| o.bit_errors).sum(),
        bits_sent: outcomes.iter().map(|o| o.bits).sum(),
        info_bits_per_slot,
        slot_duration,
        throughput_bps: normalized * peak,
        normalized_throughput: normalized,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub waveform: Waveform,
    pub preset: String,
    pub doppler_values: Vec<f64>,
    pub snr_db: f64,
    pub n_frames: usize,
    pub seed: u64,
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub waveform: Waveform,
    pub scs: f64,
    pub doppler_hz: f64,
    pub snr_db: f64,
    pub frames: usize,
    pub frames_ok: usize,
    pub ber: f64,
    pub throughput_bps: f64,
    pub normalized_throughput: f64,
}

/// Sweep the maximum Doppler of `profile` (Jakes taps) over `spec`.
pub fn sweep_doppler(cfg: &SimConfig, profile: &TdlProfile, spec: &SweepSpec) -> Result<Vec<SweepRow>, ConfigError> {
    if spec.n_frames == 0 || spec.doppler_values.is_empty() {
        return Err(otfs_core::Error::InvalidConfig("a sweep needs frames and Doppler values".into()).into());
    }
    let link = cfg.build_link(spec.waveform)?;
    let noise = NoiseSpec::new(spec.snr_db);
    spec.doppler_values
        .iter()
        .map(|&nu| {
            let channel = ChannelModel::Tdl {
                profile: TdlProfile {
                    max_doppler: nu,
                    ..profile.clone()
                },
                mode: DopplerMode::Jakes,
            };
            let r = run_link(&link, &channel, noise, spec.n_frames, spec.seed)?;
            Ok(SweepRow {
                waveform: spec.waveform,
                scs: cfg.subcarrier_spacing,
                doppler_hz: nu,
                snr_db: spec.snr_db,
                frames: r.frames_sent,
                frames_ok: r.frames_ok,
                ber: r.ber(),
                throughput_bps: r.throughput_bps,
                normalized_throughput: r.normalized_throughput,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("flush to Vec")).expect("CSV is UTF-8")
}

/// JSON mirror of a sweep with the full configuration echoed.
pub fn sweep_json(cfg: &SimConfig, spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let v = serde_json::json!({ "config": cfg, "sweep": spec, "rows": rows });
    serde_json::to_string_pretty(&v).expect("serializable")
}

/// Concatenated frames carrying random payloads, preamble excluded.
pub fn waveform_samples(link: &Link, n_frames: usize, seed: u64) -> Result<Vec<otfs_core::C64>, ConfigError> {
    let mut out = Vec::new();
    for i in 0..n_frames {
        let mut rng = frame_rng(seed, i);
        let payload: Vec<u8> = (0..link.payload_bits()).map(|_| rng.random_range(0..2u8)).collect();
        out.extend(link.modulate_payload(&payload)?.samples);
    }
    Ok(out)
}

pub const PSD_NFFT: usize = 1024;

pub fn waveform_psd(link: &Link, n_frames: usize, seed: u64) -> Result<Psd, ConfigError> {
    let x = waveform_samples(link, n_frames, seed)?;
    Ok(compute_psd(&x, link.config().sample_rate(), PSD_NFFT, PSD_NFFT / 2)?)
}

pub fn psd_csv(psd: &Psd) -> String {
    let mut s = String::from("freq_hz,power_db\n");
    for (f, p) in psd.freqs.iter().zip(&psd.power_db) {
        s.push_str(&format!("{f},{p:.6}\n"));
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())
}
