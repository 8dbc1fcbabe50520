//! Binary LDPC codes: parity-check matrix, systematic encoding and
//! belief-propagation decoding in the LLR domain.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const LLR_LIMIT: f64 = 50.0;

/// Sparse `m x n` binary matrix kept as both check and variable adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    checks: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// `checks[i]` lists the codeword positions in parity check `i`.
    pub fn new(n: usize, mut checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut vars = vec![Vec::new(); n];
        for (i, row) in checks.iter_mut().enumerate() {
            row.sort_unstable();
            if row.is_empty() {
                return Err(Error::InvalidConfig(alloc::format!("check {i} is empty")));
            }
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidConfig(alloc::format!("check {i} repeats a position")));
            }
            if let Some(&j) = row.iter().find(|&&j| j >= n) {
                return Err(Error::InvalidConfig(alloc::format!("check {i} references bit {j} >= {n}")));
            }
            for &j in row.iter() {
                vars[j].push(i);
            }
        }
        if let Some(j) = vars.iter().position(|v| v.is_empty()) {
            return Err(Error::InvalidConfig(alloc::format!("bit {j} is in no check")));
        }
        Ok(Self { n, checks, vars })
    }

    /// Repeat-accumulate style code: each of the first `k` columns joins
    /// `info_weight` checks spread evenly over the rows, and the last
    /// `n - k` columns form a dual-diagonal staircase, which makes encoding
    /// a running XOR. Deterministic for a given seed.
    pub fn ira(n: usize, k: usize, info_weight: usize, seed: u64) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidConfig("need 0 < k < n".into()));
        }
        let m = n - k;
        let w = info_weight.clamp(1, m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sockets = Vec::with_capacity(k * w);
        while sockets.len() < k * w {
            let mut perm: Vec<usize> = (0..m).collect();
            perm.shuffle(&mut rng);
            sockets.extend(perm);
        }
        sockets.truncate(k * w);
        // Break up columns that hit a row twice or two adjacent rows (the
        // latter would close a 4-cycle with a staircase column).
        let clash = |s: &[usize], col: usize| -> bool {
            let c = &s[col * w..(col + 1) * w];
            c.iter()
                .enumerate()
                .any(|(a, &ra)| c[a + 1..].iter().any(|&rb| ra == rb || ra.abs_diff(rb) == 1))
        };
        for col in 0..k {
            let mut tries = 0;
            while clash(&sockets, col) && tries < 1000 {
                let a = col * w + rng.random_range(0..w);
                let b = rng.random_range(0..sockets.len());
                sockets.swap(a, b);
                let other = b / w;
                if other != col && clash(&sockets, other) {
                    sockets.swap(a, b);
                }
                tries += 1;
            }
        }
        let mut checks = vec![Vec::new(); m];
        for col in 0..k {
            for &r in &sockets[col * w..(col + 1) * w] {
                if !checks[r].contains(&col) {
                    checks[r].push(col);
                }
            }
        }
        for (j, row) in checks.iter_mut().enumerate() {
            if j > 0 {
                row.push(k + j - 1);
            }
            row.push(k + j);
        }
        Self::new(n, checks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.checks.len()
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    pub fn vars(&self) -> &[Vec<usize>] {
        &self.vars
    }

    pub fn edges(&self) -> usize {
        self.checks.iter().map(|c| c.len()).sum()
    }

    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.n && self.checks.iter().all(|row| row.iter().fold(0u8, |a, &j| a ^ (c[j] & 1)) == 0)
    }

    /// GF(2) rank.
    pub fn rank(&self) -> usize {
        Elimination::run(self).pivots.len()
    }

    /// Whether the last `m` columns form the staircase of [`Self::ira`].
    fn is_staircase(&self) -> bool {
        let m = self.m();
        if m >= self.n {
            return false;
        }
        let k = self.n - m;
        (0..m).all(|j| {
            let want: &[usize] = if j + 1 < m { &[j, j + 1] } else { &[j] };
            self.vars[k + j] == want
        })
    }
}

/// Row-reduced form over GF(2); pivots are taken from the rightmost columns
/// so the free (information) columns come first whenever possible.
struct Elimination {
    pivots: Vec<usize>,
    rows: Vec<Vec<u64>>,
}

impl Elimination {
    fn run(h: &ParityCheckMatrix) -> Self {
        let words = h.n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = h
            .checks
            .iter()
            .map(|c| {
                let mut r = vec![0u64; words];
                for &j in c {
                    r[j / 64] |= 1 << (j % 64);
                }
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in (0..h.n).rev() {
            if next == rows.len() {
                break;
            }
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (next..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(next, p);
            let pivot = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row[w] & b != 0 {
                    row.iter_mut().zip(&pivot).for_each(|(a, p)| *a ^= p);
                }
            }
            pivots.push(col);
            next += 1;
        }
        rows.truncate(pivots.len());
        Self { pivots, rows }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Encoder {
    Staircase,
    Dense {
        info_cols: Vec<usize>,
        pivots: Vec<usize>,
        rows: Vec<Vec<u64>>,
    },
}

/// A parity-check matrix together with a systematic encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    k: usize,
    encoder: Encoder,
}

impl LdpcCode {
    pub fn new(h: ParityCheckMatrix) -> Self {
        if h.is_staircase() {
            let k = h.n - h.m();
            return Self {
                h,
                k,
                encoder: Encoder::Staircase,
            };
        }
        let e = Elimination::run(&h);
        let mut is_pivot = vec![false; h.n];
        e.pivots.iter().for_each(|&p| is_pivot[p] = true);
        let info_cols: Vec<usize> = (0..h.n).filter(|&j| !is_pivot[j]).collect();
        Self {
            k: info_cols.len(),
            h,
            encoder: Encoder::Dense {
                info_cols,
                pivots: e.pivots,
                rows: e.rows,
            },
        }
    }

    /// The default construction for a `(n, k)` code.
    pub fn ira(n: usize, k: usize, seed: u64) -> Result<Self> {
        Ok(Self::new(ParityCheckMatrix::ira(n, k, 3, seed)?))
    }

    pub fn parity_check(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.h.n as f64
    }

    /// Codeword positions that carry the information bits, in order.
    pub fn info_positions(&self) -> Vec<usize> {
        match &self.encoder {
            Encoder::Staircase => (0..self.k).collect(),
            Encoder::Dense { info_cols, .. } => info_cols.clone(),
        }
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: info.len(),
            });
        }
        let n = self.h.n;
        let mut c = vec![0u8; n];
        match &self.encoder {
            Encoder::Staircase => {
                c[..self.k].copy_from_slice(info);
                let mut acc = 0u8;
                for (j, row) in self.h.checks.iter().enumerate() {
                    let s = row.iter().filter(|&&v| v < self.k).fold(0u8, |a, &v| a ^ (info[v] & 1));
                    acc ^= s;
                    c[self.k + j] = acc;
                }
            }
            Encoder::Dense {
                info_cols,
                pivots,
                rows,
            } => {
                for (&j, &b) in info_cols.iter().zip(info) {
                    c[j] = b & 1;
                }
                for (row, &p) in rows.iter().zip(pivots) {
                    let mut s = 0u8;
                    for &j in info_cols {
                        if row[j / 64] >> (j % 64) & 1 == 1 {
                            s ^= c[j];
                        }
                    }
                    c[p] = s;
                }
            }
        }
        Ok(c)
    }

    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        match &self.encoder {
            Encoder::Staircase => codeword[..self.k].to_vec(),
            Encoder::Dense { info_cols, .. } => info_cols.iter().map(|&j| codeword[j]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Hard decisions for the whole codeword.
    pub codeword: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdpcDecoder {
    pub max_iter: usize,
    /// Min-sum check update instead of the exact tanh rule.
    pub min_sum: bool,
    /// Scale applied to min-sum check messages.
    pub min_sum_scale: f64,
}

impl Default for LdpcDecoder {
    fn default() -> Self {
        Self {
            max_iter: 20,
            min_sum: false,
            min_sum_scale: 0.75,
        }
    }
}

/// `-ln tanh(x / 2)`, its own inverse on `x > 0`.
fn phi(x: f64) -> f64 {
    let e = (-x.clamp(1e-12, 60.0)).exp();
    e.ln_1p() - (-e).ln_1p()
}

impl LdpcDecoder {
    /// Flooding belief propagation. Stops as soon as the hard decisions
    /// satisfy every check and no decision is a tie.
    pub fn decode(&self, code: &LdpcCode, llrs: &[f64]) -> Result<DecodeResult> {
        let h = &code.h;
        if llrs.len() != h.n {
            return Err(Error::LengthMismatch {
                expected: h.n,
                got: llrs.len(),
            });
        }
        let ch: Vec<f64> = llrs.iter().map(|l| l.clamp(-LLR_LIMIT, LLR_LIMIT)).collect();
        // Edge order is check-major; var_edges lists each bit's edges.
        let mut check_ptr = Vec::with_capacity(h.m() + 1);
        let mut edge_var = Vec::with_capacity(h.edges());
        check_ptr.push(0);
        for row in &h.checks {
            edge_var.extend_from_slice(row);
            check_ptr.push(edge_var.len());
        }
        let mut var_ptr = vec![0usize; h.n + 1];
        for &v in &edge_var {
            var_ptr[v + 1] += 1;
        }
        for v in 0..h.n {
            var_ptr[v + 1] += var_ptr[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }

        let mut v2c: Vec<f64> = edge_var.iter().map(|&v| ch[v]).collect();
        let mut c2v = vec![0.0f64; edge_var.len()];
        let mut hard = vec![0u8; h.n];
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            iterations += 1;
            for c in 0..h.m() {
                let (lo, hi) = (check_ptr[c], check_ptr[c + 1]);
                let mut sign = 1.0f64;
                for &m in &v2c[lo..hi] {
                    if m < 0.0 {
                        sign = -sign;
                    }
                }
                if self.min_sum {
                    let (mut m1, mut m2, mut at) = (f64::INFINITY, f64::INFINITY, lo);
                    for e in lo..hi {
                        let a = v2c[e].abs();
                        if a < m1 {
                            m2 = m1;
                            m1 = a;
                            at = e;
                        } else if a < m2 {
                            m2 = a;
                        }
                    }
                    for e in lo..hi {
                        let s = if v2c[e] < 0.0 { -sign } else { sign };
                        let mag = if e == at { m2 } else { m1 };
                        c2v[e] = s * self.min_sum_scale * mag.min(LLR_LIMIT);
                    }
                } else {
                    // An exactly-zero input forces a zero output on every
                    // other edge; the clamped phi would only make it tiny.
                    let zeros = v2c[lo..hi].iter().filter(|m| **m == 0.0).count();
                    let total: f64 = v2c[lo..hi].iter().filter(|m| **m != 0.0).map(|m| phi(m.abs())).sum();
                    for e in lo..hi {
                        let own_zero = v2c[e] == 0.0;
                        if zeros > own_zero as usize {
                            c2v[e] = 0.0;
                            continue;
                        }
                        let s = if v2c[e] < 0.0 { -sign } else { sign };
                        let rest = if own_zero { total } else { (total - phi(v2c[e].abs())).max(0.0) };
                        c2v[e] = s * phi(rest).min(LLR_LIMIT);
                    }
                }
            }
            let mut tie = false;
            for v in 0..h.n {
                let edges = &var_edges[var_ptr[v]..var_ptr[v + 1]];
                let total = ch[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                tie |= total == 0.0;
                hard[v] = (total < 0.0) as u8;
                for &e in edges {
                    v2c[e] = total - c2v[e];
                }
            }
            if !tie && h.is_codeword(&hard) {
                converged = true;
                break;
            }
        }
        Ok(DecodeResult {
            codeword: hard,
            converged,
            iterations,
        })
    }
}
