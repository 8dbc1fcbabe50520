use crate::error::{Error, Result};
use crate::frame::OtfsFrameConfig;
use crate::otfs::DdGrid;
use num_complex::Complex64;
use num_traits::Zero;

/// Single impulse pilot inside a zero guard rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotLayout {
    pub del: usize,
    pub dopp: usize,
    pub amplitude: f64,
    pub del_start: usize,
    pub dopp_start: usize,
    pub del_span: usize,
    pub dopp_span: usize,
}

impl PilotLayout {
    /// Layout of a frame config's pilot region, `None` without one.
    pub fn from_config(cfg: &OtfsFrameConfig, amplitude: f64) -> Option<Self> {
        let (del, dopp) = cfg.pilot_position()?;
        Some(Self {
            del,
            dopp,
            amplitude,
            del_start: cfg.pilot_del_pos,
            dopp_start: cfg.pilot_dopp_pos,
            del_span: cfg.pilot_del_span,
            dopp_span: cfg.pilot_dopp_span,
        })
    }

    pub fn contains(&self, del: usize, dopp: usize) -> bool {
        (self.del_start..self.del_start + self.del_span).contains(&del)
            && (self.dopp_start..self.dopp_start + self.dopp_span).contains(&dopp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidConfig("pilot amplitude must be positive".into()));
        }
        if !self.contains(self.del, self.dopp) {
            return Err(Error::InvalidConfig(
                "pilot position lies outside its guard region".into(),
            ));
        }
        Ok(())
    }

    /// Grid with only the pilot impulse set.
    pub fn pilot_grid(&self, n_del: usize, n_dopp: usize) -> DdGrid {
        let mut g = DdGrid::zeros(n_del, n_dopp);
        g.set(self.del, self.dopp, Complex64::new(self.amplitude, 0.0));
        g
    }
}

/// Place the pilot impulse; the guard region of `x_data` must be empty.
pub fn embed_pilot(x_data: &DdGrid, layout: &PilotLayout) -> Result<DdGrid> {
    layout.validate()?;
    if layout.del_start + layout.del_span > x_data.rows()
        || layout.dopp_start + layout.dopp_span > x_data.cols()
    {
        return Err(Error::InvalidConfig("guard region does not fit the grid".into()));
    }
    for k in layout.dopp_start..layout.dopp_start + layout.dopp_span {
        for l in layout.del_start..layout.del_start + layout.del_span {
            if !x_data.get(l, k).is_zero() {
                return Err(Error::GuardViolation(l, k));
            }
        }
    }
    let mut out = x_data.clone();
    out.set(layout.del, layout.dopp, Complex64::new(layout.amplitude, 0.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> PilotLayout {
        let cfg = OtfsFrameConfig::with_centered_pilot(16, 8, 0, 6, 4, 1e6);
        PilotLayout::from_config(&cfg, 3.0).unwrap()
    }

    #[test]
    fn pilot_only_grid_has_one_nonzero() {
        let g = embed_pilot(&DdGrid::zeros(16, 8), &layout()).unwrap();
        assert_eq!(g.as_slice().iter().filter(|v| !v.is_zero()).count(), 1);
        assert_eq!(g.get(8, 4), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn energy_adds_pilot_power() {
        let l = layout();
        let mut x = DdGrid::zeros(16, 8);
        for k in 0..8 {
            for d in 0..16 {
                if !l.contains(d, k) {
                    x.set(d, k, Complex64::new(0.5, -0.5));
                }
            }
        }
        let g = embed_pilot(&x, &l).unwrap();
        assert!((g.energy() - (x.energy() + 9.0)).abs() < 1e-12);
    }

    #[test]
    fn data_in_guard_is_rejected() {
        let mut x = DdGrid::zeros(16, 8);
        x.set(5, 2, Complex64::new(1.0, 0.0));
        assert_eq!(embed_pilot(&x, &layout()), Err(Error::GuardViolation(5, 2)));
    }
}
