use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;

use super::{working_noise_var, Common, ReceiverParams, SlotLayout};
use crate::dd::{detect_taps, estimate_groups, mp_equalize, posteriors_to_llrs, EstimatorParams, PilotLayout, SparseDdChannel};
use crate::error::{Error, Result};
use crate::fec::qam::{constellation, qam_map};
use crate::fec::LdpcCode;
use crate::frame::{payload_bits_otfs, McsConfig, OtfsFrameConfig};
use crate::otfs::{DdGrid, OtfsModem, WindowSpec};
use crate::signal::SampleBlock;
use crate::sync::PreambleSpec;

/// OTFS transmitter and receiver for one frame geometry.
#[derive(Debug, Clone)]
pub struct OtfsLink {
    pub cfg: OtfsFrameConfig,
    pub(crate) common: Common,
    modem: OtfsModem,
    window: WindowSpec,
    layout: PilotLayout,
    data_bins: Vec<usize>,
    points: Vec<Complex64>,
}

impl OtfsLink {
    pub fn new(
        cfg: OtfsFrameConfig,
        mcs: &McsConfig,
        code: LdpcCode,
        preamble: &PreambleSpec,
        slot: SlotLayout,
        rx: ReceiverParams,
        pilot_amplitude: f64,
    ) -> Result<Self> {
        cfg.validate()?;
        let payload = payload_bits_otfs(&cfg, mcs)?;
        let layout = PilotLayout::from_config(&cfg, pilot_amplitude)
            .ok_or_else(|| Error::InvalidConfig("the OTFS link needs a pilot region".into()))?;
        layout.validate()?;
        let common = Common::new(mcs, &payload, code, preamble, cfg.sample_rate, slot, rx)?;
        Ok(Self {
            modem: OtfsModem::new(cfg.n_del, cfg.n_dopp),
            window: WindowSpec::rectangular(cfg.n_del, cfg.n_dopp),
            data_bins: cfg.data_bin_indices(),
            points: constellation(mcs.modulation_order)?,
            layout,
            common,
            cfg,
        })
    }

    pub fn layout(&self) -> &PilotLayout {
        &self.layout
    }

    pub fn data_bins(&self) -> &[usize] {
        &self.data_bins
    }

    /// Delay-Doppler grid carrying a payload and the pilot.
    pub fn payload_grid(&self, payload: &[u8]) -> Result<DdGrid> {
        let bits = self.common.encode(payload)?;
        let symbols = qam_map(&bits, self.common.bits_per_symbol)?;
        let mut x = self.layout.pilot_grid(self.cfg.n_del, self.cfg.n_dopp);
        for (&b, s) in self.data_bins.iter().zip(symbols) {
            x.as_mut_slice()[b] = s;
        }
        Ok(x)
    }

    pub fn modulate_payload(&self, payload: &[u8]) -> Result<SampleBlock> {
        let x = self.payload_grid(payload)?;
        self.modem.modulate(&x, &self.window, &self.cfg)
    }

    /// Estimate the channel from the pilot and equalize; `None` when no
    /// pilot response is found.
    pub fn equalize(&self, y: &DdGrid, noise_var: f64, frame_power: f64) -> Result<Option<Vec<f64>>> {
        let rx = &self.common.rx;
        let params = EstimatorParams {
            threshold_factor: rx.estimator_threshold,
            noise_sigma: rx.known_noise.then(|| noise_var.max(0.0).sqrt()),
            interp_order: rx.interp_order,
            entry_threshold: rx.entry_threshold,
            ..EstimatorParams::new(self.cfg.n_cp)
        };
        let taps = match detect_taps(y, &self.layout, &params) {
            Ok(t) => t,
            Err(Error::EstimationFailed) => return Ok(None),
            Err(e) => return Err(e),
        };
        let groups = estimate_groups(y, &self.layout, &taps, &params);
        let h = SparseDdChannel::from_delay_groups(
            self.cfg.n_del,
            self.cfg.n_dopp,
            self.cfg.n_cp,
            &groups,
            params.entry_threshold,
        )?;
        let sigma2 = if rx.known_noise {
            noise_var
        } else {
            crate::dd::estimate_noise_sigma(y, &self.layout).map_or(0.0, |s| s * s)
        };
        // Each tap estimate carries noise of variance sigma2 / amplitude^2,
        // which reaches every observation as extra interference.
        let amp2 = self.layout.amplitude * self.layout.amplitude;
        let nv = working_noise_var(sigma2, frame_power) * (1.0 + taps.len() as f64 / amp2);
        let known = self.layout.pilot_grid(self.cfg.n_del, self.cfg.n_dopp);
        let report = mp_equalize(y, &h, Some(&known), &self.data_bins, &self.points, nv, &rx.mp)?;
        Ok(Some(posteriors_to_llrs(&report.posteriors, self.common.bits_per_symbol)))
    }

    pub(crate) fn decode_frame(&self, window: &[Complex64], noise_var: f64, frame_power: f64) -> Result<Option<Vec<u8>>> {
        let y = self.modem.demodulate(window, &self.window, &self.cfg)?;
        match self.equalize(&y, noise_var, frame_power)? {
            Some(llrs) => Ok(Some(self.common.decode(&llrs)?)),
            None => Ok(None),
        }
    }
}
