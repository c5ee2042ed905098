//! Modulation symbols and reference sequences.
//!
//! Covers pi/2-BPSK symbol mapping, the binary low-PAPR pilot sequence
//! registry, Zadoff-Chu comparison sequences and periodic correlation.

use crate::dsp::phase_rotation_factor;
use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::Path;

/// Ordered binary sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSequence {
    bits: Vec<u8>,
}

impl BitSequence {
    /// Builds a sequence, rejecting anything outside {0, 1}.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument("bit sequence must be non-empty".into()));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "bit sequence contains non-binary value {bad}"
            )));
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Antipodal map `s = 1 - 2 b`: bit 0 -> +1, bit 1 -> -1.
    pub fn to_antipodal(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| 1.0 - 2.0 * b as f64).collect()
    }
}

/// pi/2-BPSK mapping: `s(m) = exp(i pi/4) exp(i (m mod 2) pi/2) (1 - 2 b(m))`.
///
/// Every output has unit magnitude and consecutive samples differ in phase by
/// exactly +-pi/2, which is what removes the zero crossings of plain BPSK.
pub fn pi_half_bpsk(bits: &BitSequence) -> Result<ComplexSignal> {
    let samples = bits
        .to_antipodal()
        .iter()
        .enumerate()
        .map(|(m, &s)| phase_rotation_factor(m) * s)
        .collect();
    ComplexSignal::time(samples)
}

/// Where pilot bit sequences come from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SequenceSource {
    /// The single built-in length-6 sequence.
    #[default]
    BuiltIn,
    /// A sequence-table file: one row of whitespace-separated 0/1 digits per
    /// sequence, `#` comments ignored, line order defines the index.
    File(std::path::PathBuf),
}

/// Built-in pilot table. Ships only the length-6 reference entry; production
/// tables are loaded from sequence-table files.
const BUILTIN_TABLE: &[&[u8]] = &[&[1, 1, 1, 0, 1, 1]];

/// Looks up a pilot bit sequence of `length` at `index` from `source`.
pub fn load_dmrs_bits(length: usize, index: usize, source: &SequenceSource) -> Result<BitSequence> {
    match source {
        SequenceSource::BuiltIn => {
            let matching: Vec<&&[u8]> = BUILTIN_TABLE.iter().filter(|s| s.len() == length).collect();
            let row = matching.get(index).ok_or_else(|| {
                Error::Config(format!(
                    "built-in sequence table has no entry for length {length}, index {index}"
                ))
            })?;
            BitSequence::new(row.to_vec())
        }
        SequenceSource::File(path) => {
            let table = read_sequence_table(path)?;
            let matching: Vec<&Vec<u8>> = table.iter().filter(|s| s.len() == length).collect();
            let row = matching.get(index).ok_or_else(|| {
                Error::Config(format!(
                    "sequence table {} has no entry for length {length}, index {index}",
                    path.display()
                ))
            })?;
            BitSequence::new((*row).clone())
        }
    }
}

fn read_sequence_table(path: &Path) -> Result<Vec<Vec<u8>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            match tok {
                "0" => row.push(0u8),
                "1" => row.push(1u8),
                other => {
                    return Err(Error::Config(format!(
                        "{}:{}: expected 0/1 digits, found {other:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parameters of a Zadoff-Chu sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZcSpec {
    /// Sequence length.
    pub length: usize,
    /// Root, coprime with the length.
    pub root: usize,
    /// Cyclic shift applied in time before any transform.
    pub shift: usize,
}

impl ZcSpec {
    pub fn new(length: usize, root: usize, shift: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("ZC length must be positive".into()));
        }
        if gcd(root, length) != 1 {
            return Err(Error::InvalidArgument(format!(
                "ZC root {root} is not coprime with length {length}"
            )));
        }
        if shift >= length {
            return Err(Error::InvalidArgument(format!(
                "ZC cyclic shift {shift} out of range for length {length}"
            )));
        }
        Ok(Self { length, root, shift })
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Generates `x_q(m) = exp(-i pi q m (m+1) / N)` with the configured cyclic
/// shift applied as a time-domain rotation.
pub fn zc_sequence(spec: &ZcSpec) -> Result<ComplexSignal> {
    let n = spec.length;
    let q = spec.root as f64;
    let samples: Vec<Complex64> = (0..n)
        .map(|i| {
            let m = ((i + spec.shift) % n) as f64;
            Complex64::from_polar(1.0, -PI * q * m * (m + 1.0) / n as f64)
        })
        .collect();
    ComplexSignal::time(samples)
}

/// Largest prime strictly below `n`, if any. Pilot-length ZC sequences are
/// built from the largest prime below the target length and cyclically
/// extended to fill it.
pub fn largest_prime_below(n: usize) -> Option<usize> {
    (2..n).rev().find(|&p| is_prime(p))
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// ZC-based pilot of arbitrary length: a root sequence of the largest prime
/// below `length`, cyclically extended.
pub fn zc_pilot(length: usize, root: usize, shift: usize) -> Result<ComplexSignal> {
    let prime = largest_prime_below(length).ok_or_else(|| {
        Error::InvalidArgument(format!("no prime below pilot length {length}"))
    })?;
    let spec = ZcSpec::new(prime, root, shift)?;
    let base = zc_sequence(&spec)?;
    let samples = (0..length).map(|n| base.samples()[n % prime]).collect();
    ComplexSignal::time(samples)
}

/// Draws a random pilot bit sequence whose pi/2-BPSK spectrum has no deep
/// nulls, standing in for the curated low-PAPR sequence pools.
///
/// Least-squares estimation divides received pilot tones by the sequence
/// spectrum, so sequences with spectral nulls are unusable as pilots;
/// candidates are redrawn until the weakest tone stays above 20% of the RMS
/// tone magnitude.
pub fn random_pilot_bits(length: usize, rng: &mut impl rand::Rng) -> Result<BitSequence> {
    if length == 0 {
        return Err(Error::InvalidArgument("pilot length must be positive".into()));
    }
    let floor = 0.2 * (length as f64).sqrt();
    for _ in 0..10_000 {
        let bits = BitSequence::new((0..length).map(|_| rng.gen_range(0..=1u8)).collect())?;
        let spectrum = crate::dsp::dft_vec(pi_half_bpsk(&bits)?.samples());
        if spectrum.iter().all(|v| v.norm() >= floor) {
            return Ok(bits);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no null-free pilot of length {length} found"
    )))
}

/// Periodic correlation `c(tau) = sum_n a(n) conj(b((n+tau) mod L))`.
pub fn periodic_correlation(a: &ComplexSignal, b: &ComplexSignal) -> Result<ComplexSignal> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let l = a.len();
    let xs = a.samples();
    let ys = b.samples();
    let out = (0..l)
        .map(|tau| (0..l).map(|n| xs[n] * ys[(n + tau) % l].conj()).sum())
        .collect();
    ComplexSignal::new(out, a.domain())
}
