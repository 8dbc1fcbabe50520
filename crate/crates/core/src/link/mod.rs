//! End-to-end slot transmission and reception for one frame.
//!
//! A slot on the air is `lead zeros | preamble | guard zeros | frame | tail
//! zeros`. The lead length is random per frame so the receiver has to find
//! the preamble; the tail gives late timing room. Only the preamble, guard
//! and frame count towards the slot duration.

mod ofdm;
mod otfs;

pub use ofdm::OfdmLink;
pub use otfs::OtfsLink;

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::{Float, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn_with_power, apply_channel, make_tdl, ChannelTap, DopplerMode, NoiseSpec, TdlProfile};
use crate::dd::MpParams;
use crate::error::Result;
use crate::fec::LdpcDecoder;
use crate::frame::{SlotTiming, Waveform, WaveformConfig};
use crate::signal::{mean_power, SampleBlock};
use crate::sync::{correlate_multipath, PreambleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SlotLayout {
    /// Lead-in zeros are drawn uniformly from `0..=max_lead`.
    pub max_lead: usize,
    /// Zeros between preamble and frame.
    pub guard: usize,
    pub tail: usize,
}

impl Default for SlotLayout {
    fn default() -> Self {
        Self {
            max_lead: 64,
            guard: 16,
            tail: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// Distortion-free channel.
    Identity,
    /// Fresh TDL realization per frame.
    Tdl { profile: TdlProfile, mode: DopplerMode },
    /// The same taps for every frame.
    Fixed(Vec<ChannelTap>),
}

impl ChannelModel {
    pub fn realize(&self, rng: &mut ChaCha8Rng) -> Vec<ChannelTap> {
        match self {
            ChannelModel::Identity => vec![ChannelTap::new(Complex64::new(1.0, 0.0), 0.0, 0.0)],
            ChannelModel::Tdl { profile, mode } => make_tdl(profile, *mode, rng),
            ChannelModel::Fixed(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverParams {
    pub sync_threshold: f64,
    /// Lags over which the sync metric collects multipath energy; 1 is plain
    /// correlation.
    pub sync_spread: usize,
    /// Samples by which the receiver opens its frame window early.
    pub timing_backoff: usize,
    pub ldpc: LdpcDecoder,
    pub mp: MpParams,
    pub estimator_threshold: f64,
    /// Time interpolation order of the channel estimate, see
    /// [`EstimatorParams::interp_order`](crate::dd::EstimatorParams).
    pub interp_order: usize,
    /// Estimated operator entries at or below this magnitude are dropped.
    pub entry_threshold: f64,
    /// Use the emulator's noise level instead of estimating it.
    pub known_noise: bool,
}

impl ReceiverParams {
    /// Link receiver defaults. Message passing runs ten heavily damped
    /// iterations: strong fractional-Doppler channels make the lighter default
    /// damping oscillate, and the LDPC decoder cleans up what is left.
    pub fn new(timing_backoff: usize) -> Self {
        Self {
            sync_threshold: 0.6,
            sync_spread: 1,
            timing_backoff,
            ldpc: LdpcDecoder::default(),
            mp: MpParams {
                max_iter: 10,
                damping: 0.3,
                ..MpParams::default()
            },
            estimator_threshold: 3.0,
            interp_order: 4,
            entry_threshold: 1e-2,
            known_noise: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    pub synced: bool,
    /// CRC passed on the decoded block.
    pub ok: bool,
    pub bit_errors: usize,
    pub bits: usize,
}

/// A transmitted slot and where its pieces sit.
#[derive(Debug, Clone, PartialEq)]
pub struct TxSlot {
    pub samples: SampleBlock,
    pub preamble_start: usize,
    pub frame_start: usize,
    pub frame_len: usize,
    pub frame_power: f64,
    pub payload: Vec<u8>,
}

/// Either link, behind one interface.
#[derive(Debug, Clone)]
pub enum Link {
    Otfs(OtfsLink),
    Ofdm(OfdmLink),
}

impl Link {
    pub fn waveform(&self) -> Waveform {
        match self {
            Link::Otfs(_) => Waveform::Otfs,
            Link::Ofdm(_) => Waveform::Ofdm,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Link::Otfs(l) => &l.common,
            Link::Ofdm(l) => &l.common,
        }
    }

    pub fn config(&self) -> WaveformConfig {
        match self {
            Link::Otfs(l) => WaveformConfig::Otfs(l.cfg.clone()),
            Link::Ofdm(l) => WaveformConfig::Ofdm(l.cfg.clone()),
        }
    }

    pub fn payload_bits(&self) -> usize {
        self.common().payload_bits
    }

    pub fn sync_samples(&self) -> usize {
        self.common().preamble.len() + self.common().slot.guard
    }

    pub fn timing(&self) -> SlotTiming {
        self.config().timing(self.sync_samples())
    }

    pub fn slot_duration(&self) -> f64 {
        self.timing().t_slot
    }

    /// Frame samples for a payload (no preamble, no padding).
    pub fn modulate_payload(&self, payload: &[u8]) -> Result<SampleBlock> {
        match self {
            Link::Otfs(l) => l.modulate_payload(payload),
            Link::Ofdm(l) => l.modulate_payload(payload),
        }
    }

    pub fn transmit(&self, rng: &mut ChaCha8Rng) -> Result<TxSlot> {
        let c = self.common();
        let payload: Vec<u8> = (0..c.payload_bits).map(|_| rng.random_range(0..2u8)).collect();
        let lead = rng.random_range(0..=c.slot.max_lead);
        let frame = self.modulate_payload(&payload)?;
        let frame_power = frame.mean_power();
        let pre_power = mean_power(&c.preamble.samples);
        let scale = (frame_power / pre_power).sqrt();
        let mut s = vec![Complex64::zero(); lead];
        s.extend(c.preamble.samples.iter().map(|v| v * scale));
        s.extend(core::iter::repeat(Complex64::zero()).take(c.slot.guard));
        let frame_start = s.len();
        s.extend_from_slice(&frame.samples);
        s.extend(core::iter::repeat(Complex64::zero()).take(c.slot.tail));
        Ok(TxSlot {
            samples: SampleBlock::new(s, frame.sample_rate),
            preamble_start: lead,
            frame_start,
            frame_len: frame.len(),
            frame_power,
            payload,
        })
    }

    /// Send one slot through `channel` and noise, then receive it.
    /// `t0` is the absolute start time of the slot.
    pub fn run_frame(
        &self,
        channel: &ChannelModel,
        noise: NoiseSpec,
        t0: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<FrameOutcome> {
        let tx = self.transmit(rng)?;
        let taps = channel.realize(rng);
        let faded = apply_channel(&tx.samples, &taps, t0)?;
        let rx = add_awgn_with_power(&faded, noise, tx.frame_power, rng)?;
        let noise_var = noise.noise_var(tx.frame_power);
        self.receive(&rx.samples, &tx.payload, noise_var, tx.frame_power)
    }

    /// Find the preamble, cut out the frame and decode it.
    pub fn receive(&self, rx: &[Complex64], payload: &[u8], noise_var: f64, frame_power: f64) -> Result<FrameOutcome> {
        let c = self.common();
        let lost = FrameOutcome {
            synced: false,
            ok: false,
            bit_errors: payload.len(),
            bits: payload.len(),
        };
        let pre_len = c.preamble.len();
        let search = (c.slot.max_lead + pre_len + c.slot.guard).min(rx.len());
        if search < pre_len {
            return Ok(lost);
        }
        let sync = correlate_multipath(&rx[..search], &c.preamble.samples, c.rx.sync_threshold, c.rx.sync_spread)?;
        if !sync.detected {
            return Ok(lost);
        }
        let start = (sync.offset + pre_len + c.slot.guard).saturating_sub(c.rx.timing_backoff);
        let frame_len = self.config().frame_samples();
        if start + frame_len > rx.len() {
            return Ok(lost);
        }
        let window = &rx[start..start + frame_len];
        let decoded = match self {
            Link::Otfs(l) => l.decode_frame(window, noise_var, frame_power)?,
            Link::Ofdm(l) => l.decode_frame(window, noise_var, frame_power)?,
        };
        let (ok, bit_errors) = match decoded {
            Some(block) if block.len() >= payload.len() => {
                let errors = block[..payload.len()].iter().zip(payload).filter(|(a, b)| a != b).count();
                (c.crc_ok(&block), errors)
            }
            _ => (false, payload.len()),
        };
        Ok(FrameOutcome {
            synced: true,
            ok,
            bit_errors,
            bits: payload.len(),
        })
    }
}

/// Parts shared by both links: MCS, code, preamble and receiver settings.
#[derive(Debug, Clone)]
pub(crate) struct Common {
    pub bits_per_symbol: u32,
    pub code: crate::fec::LdpcCode,
    pub payload_bits: usize,
    pub crc_bits: usize,
    pub interleaver_rows: usize,
    pub preamble: SampleBlock,
    pub slot: SlotLayout,
    pub rx: ReceiverParams,
}

impl Common {
    pub fn new(
        mcs: &crate::frame::McsConfig,
        payload: &crate::frame::PayloadSize,
        code: crate::fec::LdpcCode,
        preamble: &PreambleSpec,
        sample_rate: f64,
        slot: SlotLayout,
        rx: ReceiverParams,
    ) -> Result<Self> {
        use crate::error::Error;
        if code.n() != payload.coded_bits || code.k() != payload.code_info_bits {
            return Err(Error::InvalidConfig(alloc::format!(
                "code is ({}, {}) but the frame needs ({}, {})",
                code.n(),
                code.k(),
                payload.coded_bits,
                payload.code_info_bits
            )));
        }
        if mcs.crc_bits != 0 && mcs.crc_bits != 24 {
            return Err(Error::InvalidConfig("only CRC-24 is supported".into()));
        }
        Ok(Self {
            bits_per_symbol: mcs.modulation_order,
            payload_bits: payload.payload_bits,
            crc_bits: mcs.crc_bits,
            interleaver_rows: crate::fec::interleaver_rows(code.n()),
            code,
            preamble: preamble.waveform(sample_rate)?,
            slot,
            rx,
        })
    }

    /// Payload to interleaved coded bits.
    pub fn encode(&self, payload: &[u8]) -> Result<Vec<u8>> {
        use crate::error::Error;
        if payload.len() != self.payload_bits {
            return Err(Error::LengthMismatch {
                expected: self.payload_bits,
                got: payload.len(),
            });
        }
        let block = if self.crc_bits == 24 {
            crate::fec::crc24_attach(payload)
        } else {
            payload.to_vec()
        };
        let cw = self.code.encode(&block)?;
        crate::fec::interleave(&cw, self.interleaver_rows)
    }

    /// Interleaved LLRs to the decoded block (payload plus CRC).
    pub fn decode(&self, llrs: &[f64]) -> Result<Vec<u8>> {
        let d = crate::fec::deinterleave(llrs, self.interleaver_rows)?;
        let r = self.rx.ldpc.decode(&self.code, &d)?;
        Ok(self.code.extract_info(&r.codeword))
    }

    /// CRC check of a decoded block (always true without a CRC).
    pub fn crc_ok(&self, bits: &[u8]) -> bool {
        if self.crc_bits == 24 {
            crate::fec::crc24_check(bits)
        } else {
            true
        }
    }
}

/// Noise variance the receiver works with: the emulator's value, floored so
/// a noiseless run still gives the detectors a positive variance.
pub(crate) fn working_noise_var(noise_var: f64, frame_power: f64) -> f64 {
    noise_var.max(1e-6 * frame_power.max(1e-300))
}
