use alloc::vec::Vec;
use num_complex::Complex64;

use super::{working_noise_var, Common, ReceiverParams, SlotLayout};
use crate::error::Result;
use crate::fec::qam::qam_map;
use crate::fec::LdpcCode;
use crate::frame::{payload_bits_ofdm, McsConfig, OfdmFrameConfig};
use crate::ofdm::{OfdmGrid, OfdmModem};
use crate::ofdm_rx::{ls_estimate, one_tap_equalize, pilot_grid};
use crate::signal::SampleBlock;
use crate::sync::PreambleSpec;

/// CP-OFDM transmitter and pilot-aided one-tap receiver.
#[derive(Debug, Clone)]
pub struct OfdmLink {
    pub cfg: OfdmFrameConfig,
    pub(crate) common: Common,
    modem: OfdmModem,
    pilots: OfdmGrid,
    data_res: Vec<usize>,
}

impl OfdmLink {
    pub fn new(
        cfg: OfdmFrameConfig,
        mcs: &McsConfig,
        code: LdpcCode,
        preamble: &PreambleSpec,
        slot: SlotLayout,
        rx: ReceiverParams,
    ) -> Result<Self> {
        cfg.validate()?;
        let payload = payload_bits_ofdm(&cfg, mcs)?;
        let common = Common::new(mcs, &payload, code, preamble, cfg.sample_rate, slot, rx)?;
        Ok(Self {
            modem: OfdmModem::new(cfg.n_sc),
            pilots: pilot_grid(&cfg),
            data_res: cfg.data_re_indices(),
            common,
            cfg,
        })
    }

    pub fn payload_grid(&self, payload: &[u8]) -> Result<OfdmGrid> {
        let bits = self.common.encode(payload)?;
        let symbols = qam_map(&bits, self.common.bits_per_symbol)?;
        let mut g = self.pilots.clone();
        for (&re, s) in self.data_res.iter().zip(symbols) {
            g.values.as_mut_slice()[re] = s;
        }
        Ok(g)
    }

    pub fn modulate_payload(&self, payload: &[u8]) -> Result<SampleBlock> {
        self.modem.modulate(&self.payload_grid(payload)?, &self.cfg)
    }

    pub(crate) fn decode_frame(&self, window: &[Complex64], noise_var: f64, frame_power: f64) -> Result<Option<Vec<u8>>> {
        let y = self.modem.demodulate(window, &self.cfg)?;
        let h = ls_estimate(&y, &self.pilots, &self.cfg)?;
        let ys: Vec<Complex64> = self.data_res.iter().map(|&i| y.values.as_slice()[i]).collect();
        let hs: Vec<Complex64> = self.data_res.iter().map(|&i| h.as_slice()[i]).collect();
        let eq = one_tap_equalize(&ys, &hs, working_noise_var(noise_var, frame_power))?;
        let llrs = eq.llrs(self.common.bits_per_symbol)?;
        Ok(Some(self.common.decode(&llrs)?))
    }
}
