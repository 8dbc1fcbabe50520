//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 transform. Every other length
//! goes through Bluestein's chirp-z identity on top of a power-of-two
//! transform, so the 330- and 15-point sizes of the default frame work without
//! a mixed-radix planner.
//!
//! `forward` computes `X[k] = sum_n x[n] e^{-j 2 pi k n / N}` and `inverse`
//! the conjugate kernel, both unnormalized. The `_unitary` variants scale by
//! `1/sqrt(N)`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::{Float, Zero};

#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    plan: Plan,
}

#[derive(Debug, Clone)]
enum Plan {
    Identity,
    Radix2(Radix2),
    Bluestein(Box<Bluestein>),
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    /// `e^{-j 2 pi k / len}` for `k < len / 2`.
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    /// `e^{-j pi n^2 / N}` for `n < N`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp, laid out circularly.
    kernel: Vec<Complex64>,
}

impl Fft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let plan = if len == 1 {
            Plan::Identity
        } else if len.is_power_of_two() {
            Plan::Radix2(Radix2::new(len))
        } else {
            Plan::Bluestein(Box::new(Bluestein::new(len)))
        };
        Self { len, plan }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len);
        match &self.plan {
            Plan::Identity => {}
            Plan::Radix2(r) => r.run(buf),
            Plan::Bluestein(b) => b.run(buf),
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        buf.iter_mut().for_each(|v| *v = v.conj());
        self.forward(buf);
        buf.iter_mut().for_each(|v| *v = v.conj());
    }

    pub fn forward_unitary(&self, buf: &mut [Complex64]) {
        self.forward(buf);
        let s = 1.0 / (self.len as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= s);
    }

    pub fn inverse_unitary(&self, buf: &mut [Complex64]) {
        self.inverse(buf);
        let s = 1.0 / (self.len as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= s);
    }
}

impl Radix2 {
    fn new(len: usize) -> Self {
        let bits = len.trailing_zeros();
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        let bitrev = (0..len as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        Self {
            len,
            twiddles,
            bitrev,
        }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }
}

impl Bluestein {
    fn new(len: usize) -> Self {
        let m = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // n^2 mod 2N keeps the chirp phase argument small for large n.
        let chirp: Vec<Complex64> = (0..len)
            .map(|n| {
                let q = (n as u128 * n as u128 % (2 * len as u128)) as f64;
                Complex64::from_polar(1.0, -PI * q / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::zero(); m];
        kernel[0] = chirp[0].conj();
        for n in 1..len {
            kernel[n] = chirp[n].conj();
            kernel[m - n] = chirp[n].conj();
        }
        inner.run(&mut kernel);
        Self {
            inner,
            chirp,
            kernel,
        }
    }

    fn run(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        let m = self.inner.len;
        let mut work = vec![Complex64::zero(); m];
        for i in 0..n {
            work[i] = buf[i] * self.chirp[i];
        }
        self.inner.run(&mut work);
        for (w, k) in work.iter_mut().zip(&self.kernel) {
            *w = (*w * k).conj();
        }
        // Inverse via conjugation; the 1/m scale is folded into the output.
        self.inner.run(&mut work);
        let s = 1.0 / m as f64;
        for i in 0..n {
            buf[i] = work[i].conj() * s * self.chirp[i];
        }
    }
}

/// Reference `O(N^2)` DFT. Test oracle, also handy for tiny sizes.
pub fn naive_dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = x.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, v)| {
                    let q = (k * t % n) as f64;
                    v * Complex64::from_polar(1.0, sign * 2.0 * PI * q / n as f64)
                })
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_naive_dft_on_mixed_sizes() {
        for &n in &[1usize, 2, 3, 4, 5, 8, 14, 15, 16, 60, 156, 256, 330] {
            let x = random_vec(n, n as u64);
            let fft = Fft::new(n);
            for inverse in [false, true] {
                let mut got = x.clone();
                if inverse {
                    fft.inverse(&mut got);
                } else {
                    fft.forward(&mut got);
                }
                let want = naive_dft(&x, inverse);
                let err = got
                    .iter()
                    .zip(&want)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-9 * n as f64, "n={n} inverse={inverse} err={err}");
            }
        }
    }

    #[test]
    fn unitary_pair_is_identity() {
        let x = random_vec(330, 7);
        let fft = Fft::new(330);
        let mut y = x.clone();
        fft.forward_unitary(&mut y);
        let e0: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let e1: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        assert!((e0 - e1).abs() < 1e-9 * e0);
        fft.inverse_unitary(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
