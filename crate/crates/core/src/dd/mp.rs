use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::{Float, Zero};

use super::sparse::SparseDdChannel;
use crate::error::{Error, Result};
use crate::otfs::DdGrid;

const LLR_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpParams {
    pub max_iter: usize,
    /// Weight of the new message in the damped update.
    pub damping: f64,
    /// Stop once no message probability moves by more than this.
    pub tol: f64,
}

impl Default for MpParams {
    fn default() -> Self {
        Self {
            max_iter: 30,
            damping: 0.6,
            tol: 1e-4,
        }
    }
}

/// Per-data-bin probability vectors over the constellation, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPosteriors {
    q: usize,
    probs: Vec<f64>,
}

impl SymbolPosteriors {
    pub fn new(q: usize, probs: Vec<f64>) -> Self {
        assert!(q > 0 && probs.len() % q == 0);
        Self { q, probs }
    }

    pub fn constellation_size(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.probs.len() / self.q
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.probs[i * self.q..(i + 1) * self.q]
    }

    pub fn hard_decisions(&self) -> Vec<usize> {
        self.probs
            .chunks_exact(self.q)
            .map(|p| {
                p.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpReport {
    pub posteriors: SymbolPosteriors,
    pub iterations: usize,
    pub converged: bool,
}

/// Message-passing detection of the data bins of `y = H x + w`.
///
/// `known` holds the non-data bins (pilot impulse, zero guard). Their
/// contribution is removed from `y` first, so only `data_bins` (column-major
/// grid indices) become variable nodes. `constellation[s]` is the point with
/// label `s`.
pub fn mp_equalize(
    y: &DdGrid,
    h: &SparseDdChannel,
    known: Option<&DdGrid>,
    data_bins: &[usize],
    constellation: &[Complex64],
    noise_var: f64,
    params: &MpParams,
) -> Result<MpReport> {
    let dim = h.dim();
    if y.as_slice().len() != dim || y.shape() != (h.n_del(), h.n_dopp()) {
        return Err(Error::ShapeMismatch {
            expected: (h.n_del(), h.n_dopp()),
            got: y.shape(),
        });
    }
    if !(noise_var > 0.0) {
        return Err(Error::NonPositiveNoise);
    }
    if constellation.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&b) = data_bins.iter().find(|&&b| b >= dim) {
        return Err(Error::InvalidConfig(alloc::format!("data bin {b} outside grid")));
    }

    let mut obs: Vec<Complex64> = y.as_slice().to_vec();
    if let Some(kn) = known {
        kn.ensure_shape(y.shape())?;
        let mut x = kn.as_slice().to_vec();
        for &b in data_bins {
            x[b] = Complex64::zero();
        }
        for (o, hx) in obs.iter_mut().zip(h.apply(&x)) {
            *o -= hx;
        }
    }

    let q = constellation.len();
    let energy: Vec<f64> = constellation.iter().map(|s| s.norm_sqr()).collect();

    // Edges grouped by variable node.
    let mut var_ptr = Vec::with_capacity(data_bins.len() + 1);
    let mut e_row = Vec::new();
    let mut e_h = Vec::new();
    var_ptr.push(0);
    for &c in data_bins {
        for (r, v) in h.col(c) {
            e_row.push(r);
            e_h.push(v);
        }
        var_ptr.push(e_row.len());
    }
    let n_edges = e_row.len();
    let uniform = 1.0 / q as f64;
    let mut p = vec![uniform; n_edges * q];
    let mut e_mean = vec![Complex64::zero(); n_edges];
    let mut e_var = vec![0.0f64; n_edges];
    let mut row_mean = vec![Complex64::zero(); dim];
    let mut row_var = vec![0.0f64; dim];
    let mut ll = vec![0.0f64; n_edges * q];
    let mut total = vec![0.0f64; q];
    let mut scratch = vec![0.0f64; q];
    let var_floor = noise_var * 1e-9;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter.max(1) {
        iterations += 1;

        // Observation nodes: Gaussian interference statistics.
        row_mean.iter_mut().for_each(|v| *v = Complex64::zero());
        row_var.iter_mut().for_each(|v| *v = noise_var);
        for e in 0..n_edges {
            let pe = &p[e * q..(e + 1) * q];
            let mut m = Complex64::zero();
            let mut s2 = 0.0;
            for (i, &pi) in pe.iter().enumerate() {
                m += constellation[i] * pi;
                s2 += energy[i] * pi;
            }
            let hm = e_h[e] * m;
            let hv = e_h[e].norm_sqr() * (s2 - m.norm_sqr()).max(0.0);
            e_mean[e] = hm;
            e_var[e] = hv;
            row_mean[e_row[e]] += hm;
            row_var[e_row[e]] += hv;
        }
        for e in 0..n_edges {
            let r = e_row[e];
            let mu = obs[r] - (row_mean[r] - e_mean[e]);
            let s2 = (row_var[r] - e_var[e]).max(var_floor);
            let inv = 1.0 / s2;
            let le = &mut ll[e * q..(e + 1) * q];
            for (i, l) in le.iter_mut().enumerate() {
                *l = -(mu - e_h[e] * constellation[i]).norm_sqr() * inv;
            }
        }

        // Variable nodes: damped extrinsic updates.
        let mut max_change = 0.0f64;
        for v in 0..data_bins.len() {
            let (lo, hi) = (var_ptr[v], var_ptr[v + 1]);
            total.iter_mut().for_each(|t| *t = 0.0);
            for e in lo..hi {
                for (t, l) in total.iter_mut().zip(&ll[e * q..(e + 1) * q]) {
                    *t += l;
                }
            }
            for e in lo..hi {
                for i in 0..q {
                    scratch[i] = total[i] - ll[e * q + i];
                }
                softmax(&mut scratch);
                for i in 0..q {
                    let old = p[e * q + i];
                    let new = params.damping * scratch[i] + (1.0 - params.damping) * old;
                    max_change = max_change.max((new - old).abs());
                    p[e * q + i] = new;
                }
            }
        }
        if max_change < params.tol {
            converged = true;
            break;
        }
    }

    let mut probs = vec![0.0; data_bins.len() * q];
    for v in 0..data_bins.len() {
        let out = &mut probs[v * q..(v + 1) * q];
        if var_ptr[v] == var_ptr[v + 1] {
            out.fill(uniform);
            continue;
        }
        for e in var_ptr[v]..var_ptr[v + 1] {
            for (o, l) in out.iter_mut().zip(&ll[e * q..(e + 1) * q]) {
                *o += l;
            }
        }
        softmax(out);
    }
    Ok(MpReport {
        posteriors: SymbolPosteriors::new(q, probs),
        iterations,
        converged,
    })
}

fn softmax(v: &mut [f64]) {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for x in v.iter_mut() {
        *x = (*x - m).exp();
        s += *x;
    }
    for x in v.iter_mut() {
        *x /= s;
    }
}

/// Bit LLRs from symbol posteriors; label bit 0 is the most significant.
pub fn posteriors_to_llrs(p: &SymbolPosteriors, bits_per_symbol: u32) -> Vec<f64> {
    let nb = bits_per_symbol as usize;
    assert_eq!(1usize << nb, p.constellation_size(), "labeling does not match constellation");
    let mut out = Vec::with_capacity(p.len() * nb);
    for i in 0..p.len() {
        let probs = p.get(i);
        for b in 0..nb {
            let shift = nb - 1 - b;
            let (mut p0, mut p1) = (0.0, 0.0);
            for (s, &ps) in probs.iter().enumerate() {
                if (s >> shift) & 1 == 0 {
                    p0 += ps;
                } else {
                    p1 += ps;
                }
            }
            let llr = if p1 <= 0.0 {
                LLR_CLAMP
            } else if p0 <= 0.0 {
                -LLR_CLAMP
            } else {
                (p0.ln() - p1.ln()).clamp(-LLR_CLAMP, LLR_CLAMP)
            };
            out.push(llr);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fec::qam::constellation;

    fn qpsk() -> Vec<Complex64> {
        constellation(2).unwrap()
    }

    #[test]
    fn identity_channel_noiseless_is_certain() {
        let c = qpsk();
        let labels = [0usize, 3, 1, 2, 2, 1, 0, 3];
        let mut y = DdGrid::zeros(4, 2);
        for (i, &s) in labels.iter().enumerate() {
            y.as_mut_slice()[i] = c[s];
        }
        let h = SparseDdChannel::identity(4, 2);
        let bins: Vec<usize> = (0..8).collect();
        let params = MpParams {
            max_iter: 1,
            ..MpParams::default()
        };
        let r = mp_equalize(&y, &h, None, &bins, &c, 1e-3, &params).unwrap();
        for (i, &s) in labels.iter().enumerate() {
            assert!(r.posteriors.get(i)[s] >= 1.0 - 1e-6);
        }
        assert_eq!(r.posteriors.hard_decisions(), labels.to_vec());
    }

    #[test]
    fn diagonal_channel_matches_per_bin_map_in_one_iteration() {
        let c = qpsk();
        let gains = [
            Complex64::new(0.3, 0.9),
            Complex64::new(-1.2, 0.1),
            Complex64::new(0.5, -0.5),
            Complex64::new(2.0, 0.0),
        ];
        let h = SparseDdChannel::from_entries(2, 2, gains.iter().enumerate().map(|(i, &g)| (i, i, g)).collect())
            .unwrap();
        let y = DdGrid(
            crate::matrix::CMatrix::from_col_major(
                2,
                2,
                vec![
                    Complex64::new(0.1, 0.4),
                    Complex64::new(-0.9, -0.2),
                    Complex64::new(0.7, 0.0),
                    Complex64::new(-1.0, 1.3),
                ],
            )
            .unwrap(),
        );
        let nv = 0.4;
        let params = MpParams {
            damping: 1.0,
            ..MpParams::default()
        };
        let r = mp_equalize(&y, &h, None, &[0, 1, 2, 3], &c, nv, &params).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        for i in 0..4 {
            let w: Vec<f64> = c
                .iter()
                .map(|s| (-(y.as_slice()[i] - gains[i] * s).norm_sqr() / nv).exp())
                .collect();
            let z: f64 = w.iter().sum();
            for (a, b) in r.posteriors.get(i).iter().zip(&w) {
                assert!((a - b / z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_noise_and_shape() {
        let h = SparseDdChannel::identity(4, 2);
        let y = DdGrid::zeros(4, 2);
        let p = MpParams::default();
        assert_eq!(
            mp_equalize(&y, &h, None, &[0], &qpsk(), 0.0, &p),
            Err(Error::NonPositiveNoise)
        );
        assert!(mp_equalize(&DdGrid::zeros(2, 4), &h, None, &[0], &qpsk(), 1.0, &p).is_err());
    }

    #[test]
    fn llrs_from_posteriors() {
        let uniform = SymbolPosteriors::new(4, vec![0.25; 8]);
        assert!(posteriors_to_llrs(&uniform, 2).iter().all(|&l| l == 0.0));

        let certain = SymbolPosteriors::new(4, vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(posteriors_to_llrs(&certain, 2), vec![-30.0, -30.0]);

        let p = SymbolPosteriors::new(4, vec![0.9, 0.1, 0.0, 0.0]);
        let l = posteriors_to_llrs(&p, 2);
        assert_eq!(l[0], 30.0);
        assert!((l[1] - 9f64.ln()).abs() < 1e-9);
    }
}
