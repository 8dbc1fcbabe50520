use alloc::vec::Vec;
use num_complex::{Complex32, Complex64};

/// A block of complex baseband samples at a known rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBlock {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
}

impl SampleBlock {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Mean of `|s[n]|^2`, zero for an empty block.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Round every sample through 32-bit float storage.
    pub fn quantize_f32(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let q = Complex32::new(s.re as f32, s.im as f32);
                Complex64::new(q.re as f64, q.im as f64)
            })
            .collect();
        Self::new(samples, self.sample_rate)
    }
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}
