//! Base-station receiver: OFDM front end, per-port pilot extraction,
//! DFT-based joint estimation of the shaping filter and the wireless channel,
//! time-domain denoising, full-band reconstruction, MMSE equalization and
//! pi/2-BPSK demodulation.
//!
//! The shaping filter is implementation-specific and unknown here, so the
//! estimator recovers the joint impulse response `w (*) h` from the port's
//! half-length pilot comb and reconstructs all M allocated tones from it.

use crate::dsp::{dft_vec, idft, idft_vec, phase_rotation_factor};
use crate::error::{Error, Result};
use crate::sequences::pi_half_bpsk;
use crate::signal::{ComplexSignal, Domain};
use crate::tx::{demap_subcarriers, DmrsResource, Port, ShapingFilter, WaveformConfig};
use num_complex::Complex64;

/// Time-domain denoising window over the half-length impulse response:
/// samples `[0, cutoff)` and the `tail_keep` samples at the end survive,
/// everything else is zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenoiseWindow {
    pub cutoff: usize,
    pub tail_keep: usize,
}

impl DenoiseWindow {
    pub fn new(cutoff: usize, tail_keep: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidArgument(
                "denoise cutoff must be at least 1".into(),
            ));
        }
        Ok(Self { cutoff, tail_keep })
    }

    /// Window that keeps the entire half-length response (no denoising).
    pub fn full(m: usize) -> Result<Self> {
        Self::new(m / 2, 0)
    }

    /// Default window when the channel length is unknown: the cyclic prefix
    /// length mapped onto the half-allocation grid.
    pub fn from_waveform(cfg: &WaveformConfig) -> Result<Self> {
        let fc = (cfg.cp_len * cfg.m).div_ceil(cfg.n_fft);
        Self::new(fc.clamp(1, cfg.m / 2), 0)
    }

    fn validate(&self, half: usize) -> Result<()> {
        if self.cutoff + self.tail_keep > half {
            return Err(Error::InvalidArgument(format!(
                "denoise window {} + {} exceeds half allocation {half}",
                self.cutoff, self.tail_keep
            )));
        }
        Ok(())
    }

    fn keeps(&self, n: usize, half: usize) -> bool {
        n < self.cutoff || n >= half - self.tail_keep
    }
}

/// Joint filter+channel estimate for one port.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    port: Port,
    effective_cir: ComplexSignal,
    denoised_cir: ComplexSignal,
    fullband: ComplexSignal,
}

impl ChannelEstimate {
    pub fn port(&self) -> Port {
        self.port
    }

    /// Raw joint impulse response of filter and channel, M/2 samples.
    pub fn effective_cir(&self) -> &ComplexSignal {
        &self.effective_cir
    }

    /// Impulse response after the denoising window.
    pub fn denoised_cir(&self) -> &ComplexSignal {
        &self.denoised_cir
    }

    /// Reconstructed composite response on all M allocated tones.
    pub fn fullband(&self) -> &ComplexSignal {
        &self.fullband
    }
}

/// OFDM front end for one received symbol on one antenna: strips the cyclic
/// prefix, takes the N-point DFT and extracts the M allocated tones.
pub fn front_end(rx: &ComplexSignal, cfg: &WaveformConfig) -> Result<ComplexSignal> {
    cfg.validate()?;
    rx.expect_domain(Domain::Time)?;
    rx.expect_len(cfg.symbol_len())?;
    let body = &rx.samples()[cfg.cp_len..];
    let spectrum = ComplexSignal::frequency(dft_vec(body))?;
    demap_subcarriers(&spectrum, cfg)
}

/// Joint estimation from the known unshaped pilot tone values on `port`'s
/// comb.
///
/// Steps: extract the comb, least-squares divide by the reference tone
/// values, inverse DFT to the joint impulse response, zero everything outside
/// the denoising window, and DFT the zero-padded result back onto all M
/// tones.
pub fn estimate_from_tones(
    y: &ComplexSignal,
    reference: &[Complex64],
    port: Port,
    window: &DenoiseWindow,
) -> Result<ChannelEstimate> {
    y.expect_domain(Domain::Frequency)?;
    let m = y.len();
    if m % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "allocation size {m} must be even for comb extraction"
        )));
    }
    let half = m / 2;
    if reference.len() != half {
        return Err(Error::LengthMismatch {
            expected: half,
            got: reference.len(),
        });
    }
    window.validate(half)?;

    let offset = port.comb_offset();
    let comb: Vec<Complex64> = (0..half).map(|k| y.samples()[2 * k + offset]).collect();
    let mut ls = Vec::with_capacity(half);
    for (k, (&obs, &r)) in comb.iter().zip(reference.iter()).enumerate() {
        if r.norm_sqr() < 1e-24 {
            return Err(Error::ZeroReferenceTone { tone: k });
        }
        ls.push(obs / r);
    }
    let effective = idft_vec(&ls);
    let denoised: Vec<Complex64> = effective
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            if window.keeps(n, half) {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut padded = denoised.clone();
    padded.resize(m, Complex64::new(0.0, 0.0));
    let fullband = dft_vec(&padded);

    Ok(ChannelEstimate {
        port,
        effective_cir: ComplexSignal::time(effective)?,
        denoised_cir: ComplexSignal::time(denoised)?,
        fullband: ComplexSignal::frequency(fullband)?,
    })
}

/// Joint estimation from a time-domain base sequence: the reference tone
/// values are its half-length DFT.
pub fn estimate_from_base(
    y: &ComplexSignal,
    base: &ComplexSignal,
    port: Port,
    window: &DenoiseWindow,
) -> Result<ChannelEstimate> {
    estimate_from_tones(y, &dft_vec(base.samples()), port, window)
}

/// Joint estimation for a pi/2-BPSK pilot resource.
pub fn estimate_port(
    y: &ComplexSignal,
    res: &DmrsResource,
    window: &DenoiseWindow,
) -> Result<ChannelEstimate> {
    let base = pi_half_bpsk(&res.bits)?;
    estimate_from_base(y, &base, res.port, window)
}

/// One equalized stream: per-tone symbol estimates plus the per-tone MMSE
/// error variance used for LLR scaling.
#[derive(Debug, Clone)]
pub struct EqualizedStream {
    pub tones: ComplexSignal,
    pub error_var: Vec<f64>,
}

impl EqualizedStream {
    /// Post-equalization noise variance per time-domain sample after the
    /// length-M inverse DFT.
    pub fn time_noise_var(&self) -> f64 {
        let m = self.error_var.len() as f64;
        self.error_var.iter().sum::<f64>() / (m * m)
    }
}

/// Per-tone MMSE equalizer for one or two streams.
///
/// `y[a]` holds the M data tones on antenna `a`; `responses[s][a]` the
/// composite per-tone response of stream `s` at antenna `a`. Solves
/// `(H^H H + noise_var I) x = H^H y` tone by tone with closed 1x1/2x2 forms.
pub fn mmse_equalize_responses(
    y: &[ComplexSignal],
    responses: &[Vec<Vec<Complex64>>],
    noise_var: f64,
) -> Result<Vec<EqualizedStream>> {
    let streams = responses.len();
    let antennas = y.len();
    if !(1..=2).contains(&streams) {
        return Err(Error::InvalidArgument(format!(
            "streams must be 1 or 2, got {streams}"
        )));
    }
    if antennas < streams {
        return Err(Error::InvalidArgument(format!(
            "{antennas} antennas cannot separate {streams} streams"
        )));
    }
    if noise_var < 0.0 {
        return Err(Error::InvalidArgument("noise variance must be >= 0".into()));
    }
    let m = y[0].len();
    for sig in y {
        sig.expect_domain(Domain::Frequency)?;
        sig.expect_len(m)?;
    }
    for per_stream in responses {
        if per_stream.len() != antennas {
            return Err(Error::LengthMismatch {
                expected: antennas,
                got: per_stream.len(),
            });
        }
        for resp in per_stream {
            if resp.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    got: resp.len(),
                });
            }
        }
    }

    let mut out: Vec<(Vec<Complex64>, Vec<f64>)> = (0..streams)
        .map(|_| (Vec::with_capacity(m), Vec::with_capacity(m)))
        .collect();

    for k in 0..m {
        match streams {
            1 => {
                let mut energy = 0.0;
                let mut matched = Complex64::new(0.0, 0.0);
                for a in 0..antennas {
                    let h = responses[0][a][k];
                    energy += h.norm_sqr();
                    matched += h.conj() * y[a].samples()[k];
                }
                let denom = energy + noise_var;
                if denom <= f64::EPSILON * energy.max(1.0) && noise_var == 0.0 {
                    return Err(Error::SingularEqualizer { tone: k });
                }
                out[0].0.push(matched / denom);
                out[0].1.push(noise_var / denom);
            }
            _ => {
                // A = H^H H + noise_var I, Hermitian 2x2 with real diagonal.
                let mut a00 = noise_var;
                let mut a11 = noise_var;
                let mut a01 = Complex64::new(0.0, 0.0);
                let mut b0 = Complex64::new(0.0, 0.0);
                let mut b1 = Complex64::new(0.0, 0.0);
                for a in 0..antennas {
                    let h0 = responses[0][a][k];
                    let h1 = responses[1][a][k];
                    a00 += h0.norm_sqr();
                    a11 += h1.norm_sqr();
                    a01 += h0.conj() * h1;
                    b0 += h0.conj() * y[a].samples()[k];
                    b1 += h1.conj() * y[a].samples()[k];
                }
                let det = a00 * a11 - a01.norm_sqr();
                if det <= f64::EPSILON * 16.0 * (a00 * a11).max(f64::MIN_POSITIVE) {
                    return Err(Error::SingularEqualizer { tone: k });
                }
                let x0 = (b0 * a11 - a01 * b1) / det;
                let x1 = (b1 * a00 - a01.conj() * b0) / det;
                out[0].0.push(x0);
                out[0].1.push(noise_var * a11 / det);
                out[1].0.push(x1);
                out[1].1.push(noise_var * a00 / det);
            }
        }
    }

    out.into_iter()
        .map(|(tones, error_var)| {
            Ok(EqualizedStream {
                tones: ComplexSignal::frequency(tones)?,
                error_var,
            })
        })
        .collect()
}

/// MMSE equalization from per-stream, per-antenna channel estimates.
pub fn mmse_equalize(
    y: &[ComplexSignal],
    estimates: &[Vec<ChannelEstimate>],
    noise_var: f64,
) -> Result<Vec<EqualizedStream>> {
    let responses: Vec<Vec<Vec<Complex64>>> = estimates
        .iter()
        .map(|per_stream| {
            per_stream
                .iter()
                .map(|e| e.fullband().samples().to_vec())
                .collect()
        })
        .collect();
    mmse_equalize_responses(y, &responses, noise_var)
}

/// Demodulated stream: soft LLRs and hard bits.
#[derive(Debug, Clone)]
pub struct Demodulated {
    pub llrs: Vec<f64>,
    pub bits: Vec<u8>,
}

/// Despreads equalized tones back to bits.
///
/// If the receiver happens to know the shaping filter (`known_shaping`), its
/// per-tone response is divided out first; with composite-channel
/// equalization the shaping is already gone and `None` is the normal case.
/// Inverse DFT, per-sample de-rotation of the pi/2 constellation, then
/// `llr(m) = 2 Re(z(m)) / noise_var_per_sample`; the hard bit is 1 exactly
/// when the real part is negative, matching the `1 - 2b` symbol map.
pub fn despread_demod(
    equalized: &ComplexSignal,
    noise_var_per_sample: f64,
    known_shaping: Option<&ShapingFilter>,
) -> Result<Demodulated> {
    equalized.expect_domain(Domain::Frequency)?;
    let m = equalized.len();
    let tones = match known_shaping {
        None => equalized.clone(),
        Some(filter) => {
            let response = filter.response(m)?;
            let deshaped: Result<Vec<Complex64>> = equalized
                .samples()
                .iter()
                .zip(response.iter())
                .enumerate()
                .map(|(k, (&v, &w))| {
                    if w.norm_sqr() < 1e-24 {
                        Err(Error::ZeroReferenceTone { tone: k })
                    } else {
                        Ok(v / w)
                    }
                })
                .collect();
            ComplexSignal::frequency(deshaped?)?
        }
    };
    let time = idft(&tones)?;
    let nu = noise_var_per_sample.max(f64::MIN_POSITIVE);
    let mut llrs = Vec::with_capacity(m);
    let mut bits = Vec::with_capacity(m);
    for (i, &z) in time.samples().iter().enumerate() {
        let derotated = z * phase_rotation_factor(i).conj();
        llrs.push(2.0 * derotated.re / nu);
        bits.push(u8::from(derotated.re < 0.0));
    }
    Ok(Demodulated { llrs, bits })
}
