//! OTFS modulation: ISFFT, time-frequency windowing, Heisenberg transform and
//! single-CP framing, plus the exact inverse chain.
//!
//! All DFTs are unitary. Grids are `n_del x n_dopp` with delay along rows; the
//! ISFFT is `F_del * X * F_dopp^H` and the Heisenberg transform applies
//! `F_del^H` to every column, so column `i` of the result is OFDM symbol `i`.

use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::frame::OtfsFrameConfig;
use crate::matrix::CMatrix;
use crate::signal::SampleBlock;

macro_rules! grid_newtype {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub CMatrix);

        impl $name {
            pub fn zeros(n_del: usize, n_dopp: usize) -> Self {
                Self(CMatrix::zeros(n_del, n_dopp))
            }

            pub fn into_inner(self) -> CMatrix {
                self.0
            }
        }

        impl Deref for $name {
            type Target = CMatrix;
            fn deref(&self) -> &CMatrix {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut CMatrix {
                &mut self.0
            }
        }

        impl From<CMatrix> for $name {
            fn from(m: CMatrix) -> Self {
                Self(m)
            }
        }
    };
}

grid_newtype!(
    /// Delay-Doppler grid, indexed (delay bin, Doppler bin).
    DdGrid
);
grid_newtype!(
    /// Frequency-time grid, indexed (subcarrier, symbol).
    FtGrid
);

/// Time-frequency window applied after the ISFFT.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub values: CMatrix,
}

impl WindowSpec {
    pub fn rectangular(n_del: usize, n_dopp: usize) -> Self {
        Self {
            values: CMatrix::from_elem(n_del, n_dopp, Complex64::one()),
        }
    }

    pub fn is_rectangular(&self) -> bool {
        self.values.as_slice().iter().all(|v| *v == Complex64::one())
    }
}

/// Cached transform plans for one grid shape.
#[derive(Debug, Clone)]
pub struct OtfsModem {
    n_del: usize,
    n_dopp: usize,
    fft_del: Fft,
    fft_dopp: Fft,
}

impl OtfsModem {
    pub fn new(n_del: usize, n_dopp: usize) -> Self {
        Self {
            n_del,
            n_dopp,
            fft_del: Fft::new(n_del),
            fft_dopp: Fft::new(n_dopp),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_del, self.n_dopp)
    }

    pub fn isfft(&self, x: &DdGrid) -> Result<FtGrid> {
        x.ensure_shape(self.shape())?;
        let mut m = x.0.clone();
        m.transform_cols(&self.fft_del, false);
        m.transform_rows(&self.fft_dopp, true);
        Ok(FtGrid(m))
    }

    pub fn sfft(&self, x: &FtGrid) -> Result<DdGrid> {
        x.ensure_shape(self.shape())?;
        let mut m = x.0.clone();
        m.transform_cols(&self.fft_del, true);
        m.transform_rows(&self.fft_dopp, false);
        Ok(DdGrid(m))
    }

    /// Per-column inverse DFT: frequency-time grid to the time-domain block `S`.
    pub fn heisenberg(&self, x: &FtGrid) -> Result<CMatrix> {
        x.ensure_shape(self.shape())?;
        let mut m = x.0.clone();
        m.transform_cols(&self.fft_del, true);
        Ok(m)
    }

    /// Per-column DFT, the receive-side adjoint of [`Self::heisenberg`].
    pub fn wigner(&self, s: &CMatrix) -> Result<FtGrid> {
        s.ensure_shape(self.shape())?;
        let mut m = s.clone();
        m.transform_cols(&self.fft_del, false);
        Ok(FtGrid(m))
    }

    pub fn modulate(&self, x: &DdGrid, w: &WindowSpec, cfg: &OtfsFrameConfig) -> Result<SampleBlock> {
        let ft = apply_window(&self.isfft(x)?, w)?;
        let s = self.heisenberg(&ft)?;
        Ok(SampleBlock::new(add_cp_single(&s, cfg.n_cp)?, cfg.sample_rate))
    }

    pub fn demodulate(&self, r: &[Complex64], w: &WindowSpec, cfg: &OtfsFrameConfig) -> Result<DdGrid> {
        let s = remove_cp_single(r, self.n_del, self.n_dopp, cfg.n_cp)?;
        let ft = remove_window(&self.wigner(&s)?, w)?;
        self.sfft(&ft)
    }
}

pub fn isfft(x: &DdGrid) -> FtGrid {
    OtfsModem::new(x.rows(), x.cols())
        .isfft(x)
        .expect("modem built for this shape")
}

pub fn sfft(x: &FtGrid) -> DdGrid {
    OtfsModem::new(x.rows(), x.cols())
        .sfft(x)
        .expect("modem built for this shape")
}

pub fn heisenberg(x: &FtGrid) -> CMatrix {
    OtfsModem::new(x.rows(), x.cols())
        .heisenberg(x)
        .expect("modem built for this shape")
}

pub fn apply_window(x: &FtGrid, w: &WindowSpec) -> Result<FtGrid> {
    w.values.ensure_shape(x.shape())?;
    let mut out = x.clone();
    for (v, t) in out.as_mut_slice().iter_mut().zip(w.values.as_slice()) {
        *v *= t;
    }
    Ok(out)
}

/// Elementwise division by the window; fails on zero entries.
pub fn remove_window(x: &FtGrid, w: &WindowSpec) -> Result<FtGrid> {
    w.values.ensure_shape(x.shape())?;
    let mut out = x.clone();
    for (v, t) in out.as_mut_slice().iter_mut().zip(w.values.as_slice()) {
        if t.is_zero() {
            return Err(Error::SingularWindow);
        }
        *v /= t;
    }
    Ok(out)
}

/// Column-major vectorization with the last `n_cp` samples prepended.
pub fn add_cp_single(s: &CMatrix, n_cp: usize) -> Result<Vec<Complex64>> {
    let v = s.as_slice();
    if n_cp >= v.len().max(1) && n_cp > 0 {
        return Err(Error::CpOutOfRange {
            n_cp,
            len: v.len(),
        });
    }
    let mut out = Vec::with_capacity(v.len() + n_cp);
    out.extend_from_slice(&v[v.len() - n_cp..]);
    out.extend_from_slice(v);
    Ok(out)
}

/// Strip the single CP and reshape column-major into `n_del x n_dopp`.
pub fn remove_cp_single(r: &[Complex64], n_del: usize, n_dopp: usize, n_cp: usize) -> Result<CMatrix> {
    let body = n_del * n_dopp;
    if r.len() != body + n_cp {
        return Err(Error::LengthMismatch {
            expected: body + n_cp,
            got: r.len(),
        });
    }
    CMatrix::from_col_major(n_del, n_dopp, r[n_cp..].to_vec())
}

pub fn otfs_modulate(x: &DdGrid, w: &WindowSpec, cfg: &OtfsFrameConfig) -> Result<SampleBlock> {
    x.ensure_shape((cfg.n_del, cfg.n_dopp))?;
    OtfsModem::new(cfg.n_del, cfg.n_dopp).modulate(x, w, cfg)
}

pub fn otfs_demodulate(r: &SampleBlock, w: &WindowSpec, cfg: &OtfsFrameConfig) -> Result<DdGrid> {
    OtfsModem::new(cfg.n_del, cfg.n_dopp).demodulate(&r.samples, w, cfg)
}
