//! Transmit chains for data and reference-signal waveforms.
//!
//! Two equivalent architectures are provided and selected through
//! [`ShapingDomain`]:
//!
//! * frequency-domain shaping — the DFT-precoded vector is multiplied by the
//!   DFT of the shaping filter;
//! * time-domain shaping — the symbol vector is circularly convolved with the
//!   filter taps before DFT precoding.
//!
//! Reference signals for the two FDM ports are generated so that the nonzero
//! tone values are identical on both ports: port-1 applies a one-bin tone
//! shift before precoding and uses the cyclically shifted filter response, so
//! the shaping seen on its odd-tone comb matches the shaping port-0 sees on
//! its even-tone comb.

use crate::dsp::{
    apply_precoder, circular_convolve, cyclic_extend, dft, dft_vec, idft, PrecoderKind,
    PrecoderSpec,
};
use crate::error::{Error, Result};
use crate::sequences::{pi_half_bpsk, BitSequence};
use crate::signal::{ComplexSignal, Domain};
use num_complex::Complex64;

/// Tap normalization policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Use the taps as given. Matches the frozen reference vectors.
    #[default]
    None,
    /// Scale taps to unit energy, for fair comparisons across filters.
    UnitEnergy,
}

/// Short spectrum-shaping filter applied to every transmitted vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapingFilter {
    taps: Vec<Complex64>,
    normalization: Normalization,
}

impl ShapingFilter {
    pub fn new(taps: Vec<Complex64>, normalization: Normalization) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidArgument("filter needs at least one tap".into()));
        }
        if taps.iter().all(|t| t.norm_sqr() == 0.0) {
            return Err(Error::InvalidArgument("filter taps are all zero".into()));
        }
        Ok(Self {
            taps,
            normalization,
        })
    }

    pub fn from_real(taps: &[f64], normalization: Normalization) -> Result<Self> {
        Self::new(
            taps.iter().map(|&t| Complex64::new(t, 0.0)).collect(),
            normalization,
        )
    }

    /// Pass-through single-tap filter.
    pub fn identity() -> Self {
        Self::from_real(&[1.0], Normalization::None).unwrap()
    }

    /// Conventional 2-tap profile. The taps are oriented so the per-tone
    /// response peaks mid-allocation and tapers toward both band edges, the
    /// same orientation the 3-tap profile has under the uncentered per-tone
    /// multiply used here.
    pub fn two_tap() -> Self {
        Self::from_real(&[1.0, -1.0], Normalization::None).unwrap()
    }

    /// Default 3-tap profile.
    pub fn three_tap() -> Self {
        Self::from_real(&[-0.28, 1.0, -0.28], Normalization::None).unwrap()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Taps after the normalization policy is applied.
    pub fn effective_taps(&self) -> Vec<Complex64> {
        match self.normalization {
            Normalization::None => self.taps.clone(),
            Normalization::UnitEnergy => {
                let energy: f64 = self.taps.iter().map(|t| t.norm_sqr()).sum();
                let scale = 1.0 / energy.sqrt();
                self.taps.iter().map(|t| t * scale).collect()
            }
        }
    }

    /// Taps zero-padded to `len` as a time-domain signal.
    pub fn padded(&self, len: usize) -> Result<ComplexSignal> {
        if self.len() > len {
            return Err(Error::InvalidArgument(format!(
                "filter length {} exceeds target length {len}",
                self.len()
            )));
        }
        let mut taps = self.effective_taps();
        taps.resize(len, Complex64::new(0.0, 0.0));
        ComplexSignal::time(taps)
    }

    /// Per-tone response: the `len`-point DFT of the zero-padded taps.
    pub fn response(&self, len: usize) -> Result<Vec<Complex64>> {
        Ok(dft_vec(self.padded(len)?.samples()))
    }
}

/// Subcarrier mapping style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mapping {
    #[default]
    Localized,
    Interleaved,
}

/// Which architecture performs the spectrum shaping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapingDomain {
    /// Shape after DFT precoding by a per-tone multiply.
    #[default]
    Frequency,
    /// Shape before DFT precoding by circular convolution.
    Time,
}

/// Static waveform parameters shared by transmitter and receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveformConfig {
    /// Allocation size in subcarriers; a multiple of 12.
    pub m: usize,
    /// IFFT size, at least `m`.
    pub n_fft: usize,
    /// Cyclic prefix length in samples.
    pub cp_len: usize,
    /// First allocated tone for localized mapping.
    pub start_tone: usize,
    pub mapping: Mapping,
    pub shaping: ShapingDomain,
}

impl WaveformConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m % 12 != 0 {
            return Err(Error::InvalidArgument(format!(
                "allocation size {} must be a positive multiple of 12",
                self.m
            )));
        }
        if self.n_fft < self.m {
            return Err(Error::InvalidArgument(format!(
                "IFFT size {} smaller than allocation {}",
                self.n_fft, self.m
            )));
        }
        match self.mapping {
            Mapping::Localized => {
                if self.start_tone + self.m > self.n_fft {
                    return Err(Error::InvalidArgument(format!(
                        "allocation [{}, {}) exceeds IFFT size {}",
                        self.start_tone,
                        self.start_tone + self.m,
                        self.n_fft
                    )));
                }
            }
            Mapping::Interleaved => {
                if self.n_fft % self.m != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "interleaved mapping requires IFFT size {} divisible by allocation {}",
                        self.n_fft, self.m
                    )));
                }
                let stride = self.n_fft / self.m;
                if self.start_tone + (self.m - 1) * stride >= self.n_fft {
                    return Err(Error::InvalidArgument(
                        "interleaved placement exceeds IFFT size".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Absolute tone index of relative tone `k`.
    pub fn tone_index(&self, k: usize) -> usize {
        match self.mapping {
            Mapping::Localized => self.start_tone + k,
            Mapping::Interleaved => self.start_tone + k * (self.n_fft / self.m),
        }
    }

    /// Samples per transmitted symbol, body plus prefix.
    pub fn symbol_len(&self) -> usize {
        self.n_fft + self.cp_len
    }
}

/// FDM antenna port identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    /// Even relative tones {0, 2, ..., M-2}.
    Port0,
    /// Odd relative tones {1, 3, ..., M-1}.
    Port1,
}

impl Port {
    /// Offset of the port's comb within the allocation.
    pub fn comb_offset(self) -> usize {
        match self {
            Port::Port0 => 0,
            Port::Port1 => 1,
        }
    }

    pub fn index(self) -> usize {
        self.comb_offset()
    }

    pub fn all() -> [Port; 2] {
        [Port::Port0, Port::Port1]
    }
}

impl std::fmt::Display for Port {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A reference-signal transmission: the port plus its half-length pilot bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DmrsResource {
    pub port: Port,
    pub bits: BitSequence,
}

/// Per-tone multiply of an M-tone vector with the filter response.
pub fn shape_freq(
    x_f: &ComplexSignal,
    filter: &ShapingFilter,
    m: usize,
) -> Result<ComplexSignal> {
    x_f.expect_domain(Domain::Frequency)?;
    x_f.expect_len(m)?;
    let response = filter.response(m)?;
    let out = x_f
        .samples()
        .iter()
        .zip(response.iter())
        .map(|(x, w)| x * w)
        .collect();
    ComplexSignal::frequency(out)
}

/// Places M tones into the N-tone grid; injective by construction.
pub fn map_subcarriers(x: &ComplexSignal, cfg: &WaveformConfig) -> Result<ComplexSignal> {
    cfg.validate()?;
    x.expect_domain(Domain::Frequency)?;
    x.expect_len(cfg.m)?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.n_fft];
    for (k, &v) in x.samples().iter().enumerate() {
        out[cfg.tone_index(k)] = v;
    }
    ComplexSignal::frequency(out)
}

/// Inverse of [`map_subcarriers`]: extracts the M allocated tones.
pub fn demap_subcarriers(x: &ComplexSignal, cfg: &WaveformConfig) -> Result<ComplexSignal> {
    cfg.validate()?;
    x.expect_domain(Domain::Frequency)?;
    x.expect_len(cfg.n_fft)?;
    let out = (0..cfg.m).map(|k| x.samples()[cfg.tone_index(k)]).collect();
    ComplexSignal::frequency(out)
}

/// Converts an M-tone vector to the transmitted symbol: subcarrier mapping,
/// N-point inverse DFT and cyclic prefix.
pub fn assemble_symbol(tones: &ComplexSignal, cfg: &WaveformConfig) -> Result<ComplexSignal> {
    let mapped = map_subcarriers(tones, cfg)?;
    let body = idft(&mapped)?;
    let mut out = Vec::with_capacity(cfg.symbol_len());
    out.extend_from_slice(&body.samples()[cfg.n_fft - cfg.cp_len..]);
    out.extend_from_slice(body.samples());
    ComplexSignal::time(out)
}

/// M-tone spectrum of one data symbol before subcarrier mapping.
pub fn data_tones(
    bits: &BitSequence,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    cfg.validate()?;
    if bits.len() != cfg.m {
        return Err(Error::LengthMismatch {
            expected: cfg.m,
            got: bits.len(),
        });
    }
    let symbols = pi_half_bpsk(bits)?;
    match cfg.shaping {
        ShapingDomain::Frequency => {
            let precoded = dft(&symbols, cfg.m)?;
            shape_freq(&precoded, filter, cfg.m)
        }
        ShapingDomain::Time => {
            let shaped = circular_convolve(&symbols, &filter.padded(cfg.m)?)?;
            dft(&shaped, cfg.m)
        }
    }
}

/// Full data symbol: pi/2-BPSK, shaping, mapping, IDFT and cyclic prefix.
pub fn tx_data(
    bits: &BitSequence,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    assemble_symbol(&data_tones(bits, filter, cfg)?, cfg)
}

/// M-tone reference-signal spectrum for a port, from an arbitrary half-length
/// base sequence (already modulated; pi/2-BPSK pilots use
/// [`pi_half_bpsk`], the Zadoff-Chu baseline uses the raw sequence).
pub fn dmrs_tones_from_base(
    base: &ComplexSignal,
    port: Port,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    cfg.validate()?;
    let half = cfg.m / 2;
    base.expect_len(half)?;
    if filter.len() > half {
        return Err(Error::InvalidArgument(format!(
            "filter length {} exceeds half allocation {half}",
            filter.len()
        )));
    }
    match cfg.shaping {
        ShapingDomain::Frequency => {
            let extended = cyclic_extend(base, 2)?;
            // The M-point DFT of the repeated sequence doubles the half-length
            // DFT values, so the shaped output is halved to keep the pilot
            // per-tone gain equal to the data per-tone gain.
            match port {
                Port::Port0 => {
                    let precoded = dft(&extended, cfg.m)?;
                    Ok(shape_freq(&precoded, filter, cfg.m)?.scaled(0.5))
                }
                Port::Port1 => {
                    let shifted = apply_precoder(
                        PrecoderSpec::new(PrecoderKind::ToneShift, cfg.m),
                        &extended,
                    )?;
                    let precoded = dft(&shifted, cfg.m)?;
                    let response =
                        ComplexSignal::frequency(filter.response(cfg.m)?)?;
                    let aligned = apply_precoder(
                        PrecoderSpec::new(PrecoderKind::CyclicShift, cfg.m),
                        &response,
                    )?;
                    let out = precoded
                        .samples()
                        .iter()
                        .zip(aligned.samples().iter())
                        .map(|(x, w)| x * w * 0.5)
                        .collect();
                    ComplexSignal::frequency(out)
                }
            }
        }
        ShapingDomain::Time => {
            let shaped = circular_convolve(base, &filter.padded(half)?)?;
            let half_tones = dft(&shaped, half)?;
            let mut out = vec![Complex64::new(0.0, 0.0); cfg.m];
            let offset = port.comb_offset();
            for (k, &v) in half_tones.samples().iter().enumerate() {
                out[2 * k + offset] = v;
            }
            ComplexSignal::frequency(out)
        }
    }
}

/// M-tone spectrum for a pilot defined directly in the frequency domain:
/// `seq(k)` lands on the port's comb tone `2k + offset`, scaled by the data
/// shaping response at that same tone so pilot and data see identical
/// per-tone gains. This is how sequence-valued pilots (the Zadoff-Chu
/// baseline) are placed, with no DFT precoding involved.
pub fn dmrs_tones_freq_mapped(
    seq: &ComplexSignal,
    port: Port,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    cfg.validate()?;
    seq.expect_len(cfg.m / 2)?;
    let response = filter.response(cfg.m)?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.m];
    let offset = port.comb_offset();
    for (k, &v) in seq.samples().iter().enumerate() {
        let tone = 2 * k + offset;
        out[tone] = v * response[tone];
    }
    ComplexSignal::frequency(out)
}

/// Port-1 frequency-domain shaping with the comb realignment disabled.
///
/// Regression-test helper: without the cyclic shift of the filter response,
/// the nonzero tone values on port-1 no longer match port-0.
pub fn dmrs_tones_port1_unaligned(
    base: &ComplexSignal,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    cfg.validate()?;
    base.expect_len(cfg.m / 2)?;
    let extended = cyclic_extend(base, 2)?;
    let shifted = apply_precoder(PrecoderSpec::new(PrecoderKind::ToneShift, cfg.m), &extended)?;
    let precoded = dft(&shifted, cfg.m)?;
    Ok(shape_freq(&precoded, filter, cfg.m)?.scaled(0.5))
}

/// M-tone reference-signal spectrum for a pi/2-BPSK pilot resource.
pub fn dmrs_tones(
    res: &DmrsResource,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    cfg.validate()?;
    if cfg.m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "allocation size {} must be even for two FDM ports",
            cfg.m
        )));
    }
    if res.bits.len() != cfg.m / 2 {
        return Err(Error::LengthMismatch {
            expected: cfg.m / 2,
            got: res.bits.len(),
        });
    }
    let base = pi_half_bpsk(&res.bits)?;
    dmrs_tones_from_base(&base, res.port, filter, cfg)
}

/// Full reference-signal symbol for a pilot resource.
pub fn tx_dmrs(
    res: &DmrsResource,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    assemble_symbol(&dmrs_tones(res, filter, cfg)?, cfg)
}

/// Full reference-signal symbol from an arbitrary base sequence.
pub fn tx_dmrs_from_base(
    base: &ComplexSignal,
    port: Port,
    filter: &ShapingFilter,
    cfg: &WaveformConfig,
) -> Result<ComplexSignal> {
    assemble_symbol(&dmrs_tones_from_base(base, port, filter, cfg)?, cfg)
}
