use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::matrix::CMatrix;
use crate::otfs::DdGrid;

/// Sparse delay-Doppler input-output operator: `vec(Y) = H vec(X)` with the
/// column-major grid indexing `del + n_del * dopp`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDdChannel {
    n_del: usize,
    n_dopp: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<Complex64>,
    row_ptr: Vec<usize>,
    /// Entry positions (into `values`) grouped by row.
    row_entries: Vec<usize>,
}

/// Time-domain taps sharing one integer delay: `r[n] += gains[n] * s[n - delay]`,
/// with `n` counted from the end of the cyclic prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayGroup {
    pub delay: usize,
    pub gains: Vec<Complex64>,
}

impl SparseDdChannel {
    pub fn from_entries(n_del: usize, n_dopp: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        let dim = n_del * n_dopp;
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::InvalidConfig(alloc::format!(
                "operator entry ({r}, {c}) outside dimension {dim}"
            )));
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidConfig(alloc::format!(
                "duplicate operator entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut col_ptr = vec![0usize; dim + 1];
        for &(_, c, _) in &entries {
            col_ptr[c + 1] += 1;
        }
        for c in 0..dim {
            col_ptr[c + 1] += col_ptr[c];
        }
        let row_idx: Vec<usize> = entries.iter().map(|e| e.0).collect();
        let values: Vec<Complex64> = entries.iter().map(|e| e.2).collect();

        let mut row_ptr = vec![0usize; dim + 1];
        for &r in &row_idx {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut fill = row_ptr.clone();
        let mut row_entries = vec![0usize; values.len()];
        for (e, &r) in row_idx.iter().enumerate() {
            row_entries[fill[r]] = e;
            fill[r] += 1;
        }
        Ok(Self {
            n_del,
            n_dopp,
            col_ptr,
            row_idx,
            values,
            row_ptr,
            row_entries,
        })
    }

    pub fn identity(n_del: usize, n_dopp: usize) -> Self {
        let dim = n_del * n_dopp;
        Self::from_entries(n_del, n_dopp, (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
            .expect("diagonal entries are in range")
    }

    /// Build the delay-Doppler operator of a time-varying multipath channel
    /// for the rectangular-window OTFS chain, dropping entries with magnitude
    /// at or below `threshold`.
    ///
    /// For the basis grid with a one at `(m, k)` the transmit block carries
    /// `N^{-1/2} e^{j 2 pi k i / N}` at sample `m + M i`. A delay `d` moves it
    /// to delay row `m + d` (wrapping into the next symbol when that exceeds
    /// `M`), so each output column is the length-`N` DFT of the gain sequence
    /// seen along that path, circularly shifted by `k`.
    pub fn from_delay_groups(
        n_del: usize,
        n_dopp: usize,
        n_cp: usize,
        groups: &[DelayGroup],
        threshold: f64,
    ) -> Result<Self> {
        let (m, n) = (n_del, n_dopp);
        let mn = m * n;
        let merged = merge_groups(groups, mn)?;
        for g in &merged {
            if g.delay >= m {
                return Err(Error::DelayOutOfRange {
                    delay: g.delay,
                    limit: m,
                });
            }
        }
        let fft = Fft::new(n);
        let wrap_phase: Vec<Complex64> = (0..n)
            .map(|t| Complex64::from_polar(1.0, -2.0 * PI * t as f64 / n as f64))
            .collect();
        let inv_n = 1.0 / n as f64;
        let mut entries = Vec::new();
        let mut spectra = vec![Complex64::zero(); merged.len() * n];
        for col_m in 0..m {
            for (gi, g) in merged.iter().enumerate() {
                let a = &mut spectra[gi * n..(gi + 1) * n];
                for (i, ai) in a.iter_mut().enumerate() {
                    let src = col_m + m * i;
                    let dst = (src + g.delay) % mn;
                    // Samples before the frame start read zero instead of CP.
                    *ai = if dst + n_cp >= g.delay {
                        g.gains[dst]
                    } else {
                        Complex64::zero()
                    };
                }
                fft.forward(a);
            }
            for k in 0..n {
                let col = col_m + m * k;
                for (gi, g) in merged.iter().enumerate() {
                    let shifted = col_m + g.delay;
                    let (row_m, wrap) = if shifted < m { (shifted, 0) } else { (shifted - m, 1) };
                    let a = &spectra[gi * n..(gi + 1) * n];
                    for kp in 0..n {
                        let mut v = a[(kp + n - k) % n] * inv_n;
                        if wrap == 1 {
                            v *= wrap_phase[kp];
                        }
                        if v.norm() > threshold {
                            entries.push((row_m + m * kp, col, v));
                        }
                    }
                }
            }
        }
        Self::from_entries(n_del, n_dopp, entries)
    }

    pub fn n_del(&self) -> usize {
        self.n_del
    }

    pub fn n_dopp(&self) -> usize {
        self.n_dopp
    }

    pub fn dim(&self) -> usize {
        self.n_del * self.n_dopp
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col(&self, c: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |e| (self.row_idx[e], self.values[e]))
    }

    /// Entries of row `r` as (column, value).
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.row_entries[self.row_ptr[r]..self.row_ptr[r + 1]]
            .iter()
            .map(move |&e| (self.entry_col(e), self.values[e]))
    }

    fn entry_col(&self, e: usize) -> usize {
        // col_ptr is non-decreasing; the last column whose start is <= e.
        self.col_ptr.partition_point(|&p| p <= e) - 1
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let lo = self.col_ptr[c];
        let hi = self.col_ptr[c + 1];
        match self.row_idx[lo..hi].binary_search(&r) {
            Ok(i) => self.values[lo + i],
            Err(_) => Complex64::zero(),
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim());
        let mut y = vec![Complex64::zero(); self.dim()];
        for (c, xc) in x.iter().enumerate() {
            if xc.is_zero() {
                continue;
            }
            for e in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[e]] += self.values[e] * xc;
            }
        }
        y
    }

    pub fn apply_grid(&self, x: &DdGrid) -> DdGrid {
        let y = self.apply(x.as_slice());
        DdGrid(CMatrix::from_col_major(self.n_del, self.n_dopp, y).expect("dimension matches"))
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut d = CMatrix::zeros(self.dim(), self.dim());
        for c in 0..self.dim() {
            for (r, v) in self.col(c) {
                d.set(r, c, v);
            }
        }
        d
    }

    /// Root-mean-square difference over all `dim^2` operator entries.
    pub fn rms_difference(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let mut acc = 0.0;
        for c in 0..self.dim() {
            let (mut a, mut b) = (self.col(c).peekable(), other.col(c).peekable());
            loop {
                let d = match (a.peek().copied(), b.peek().copied()) {
                    (None, None) => break,
                    (Some((ra, va)), Some((rb, vb))) => match ra.cmp(&rb) {
                        Ordering::Equal => {
                            a.next();
                            b.next();
                            va - vb
                        }
                        Ordering::Less => {
                            a.next();
                            va
                        }
                        Ordering::Greater => {
                            b.next();
                            -vb
                        }
                    },
                    (Some((_, va)), None) => {
                        a.next();
                        va
                    }
                    (None, Some((_, vb))) => {
                        b.next();
                        -vb
                    }
                };
                acc += d.norm_sqr();
            }
        }
        acc.sqrt() / self.dim() as f64
    }
}

fn merge_groups(groups: &[DelayGroup], mn: usize) -> Result<Vec<DelayGroup>> {
    let mut merged: Vec<DelayGroup> = Vec::new();
    for g in groups {
        if g.gains.len() != mn {
            return Err(Error::LengthMismatch {
                expected: mn,
                got: g.gains.len(),
            });
        }
        match merged.iter_mut().find(|m| m.delay == g.delay) {
            Some(m) => m.gains.iter_mut().zip(&g.gains).for_each(|(a, b)| *a += b),
            None => merged.push(g.clone()),
        }
    }
    merged.sort_by_key(|g| g.delay);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_out_of_range() {
        let one = Complex64::new(1.0, 0.0);
        assert!(SparseDdChannel::from_entries(2, 2, vec![(0, 0, one), (0, 0, one)]).is_err());
        assert!(SparseDdChannel::from_entries(2, 2, vec![(4, 0, one)]).is_err());
    }

    #[test]
    fn row_and_column_views_agree() {
        let e = vec![
            (0, 1, Complex64::new(1.0, 0.0)),
            (3, 1, Complex64::new(2.0, 0.0)),
            (3, 2, Complex64::new(0.0, 1.0)),
            (1, 0, Complex64::new(-1.0, 0.0)),
        ];
        let h = SparseDdChannel::from_entries(2, 2, e.clone()).unwrap();
        for (r, c, v) in e {
            assert_eq!(h.get(r, c), v);
            assert!(h.row(r).any(|(cc, vv)| cc == c && vv == v));
        }
        assert_eq!(h.row(3).count(), 2);
        assert_eq!(h.row(2).count(), 0);
    }

    #[test]
    fn identity_delay_group_is_identity() {
        let g = DelayGroup {
            delay: 0,
            gains: vec![Complex64::new(1.0, 0.0); 32],
        };
        let h = SparseDdChannel::from_delay_groups(8, 4, 0, &[g], 1e-8).unwrap();
        assert_eq!(h, SparseDdChannel::identity(8, 4));
        assert!(h.rms_difference(&SparseDdChannel::identity(8, 4)) == 0.0);
    }
}
