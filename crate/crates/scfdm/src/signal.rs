//! Complex baseband signal container.
//!
//! Every stage of the transmit and receive chains exchanges [`ComplexSignal`]
//! values: an ordered block of complex samples tagged with the domain
//! (time or frequency) they live in. The tag lets frequency-domain
//! operations reject time-domain inputs early instead of silently producing
//! garbage.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Domain a [`ComplexSignal`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Time,
    Frequency,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Time => "time",
            Domain::Frequency => "frequency",
        }
    }
}

/// Ordered block of complex samples with a domain tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    domain: Domain,
}

impl ComplexSignal {
    /// Build a signal from samples; rejects empty input.
    pub fn new(samples: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument(
                "signal must contain at least one sample".into(),
            ));
        }
        Ok(Self { samples, domain })
    }

    /// Time-domain signal from complex samples.
    pub fn time(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, Domain::Time)
    }

    /// Frequency-domain signal from complex samples.
    pub fn frequency(samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, Domain::Frequency)
    }

    /// Time-domain signal from real sample values.
    pub fn time_from_real(samples: &[f64]) -> Result<Self> {
        Self::time(samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Sum of |x|^2 over all samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Mean of |x|^2 over all samples.
    pub fn mean_power(&self) -> f64 {
        self.energy() / self.len() as f64
    }

    /// Rejects the signal unless it carries the expected domain tag.
    pub fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain != expected {
            return Err(Error::DomainMismatch {
                expected: expected.name(),
                got: self.domain.name(),
            });
        }
        Ok(())
    }

    /// Rejects the signal unless it has exactly `expected` samples.
    pub fn expect_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Elementwise scale by a real factor.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * factor).collect(),
            domain: self.domain,
        }
    }

    /// Largest absolute difference from another signal, ignoring domain tags.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "signals must have equal length");
        self.samples
            .iter()
            .zip(other.samples.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}
