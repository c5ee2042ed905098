//! Propagation and noise: block-fading tapped-delay-line channels with AWGN.
//!
//! A [`ChannelRealization`] holds one draw of complex tap gains per
//! (transmit-port, receive-antenna) pair and is shared by every symbol of a
//! slot; the fading is static across the symbols of one transmission.

use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, Domain};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::path::Path;

/// Fading behavior of the tap gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// Deterministic gains: the square roots of the tap powers.
    #[default]
    Static,
    /// Independent complex Gaussian gains per tap, redrawn each block.
    RayleighBlock,
}

/// Tapped-delay-line description: sample-grid delays and linear powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    delays: Vec<usize>,
    powers: Vec<f64>,
    fading: Fading,
}

impl ChannelProfile {
    pub fn new(delays: Vec<usize>, powers: Vec<f64>, fading: Fading) -> Result<Self> {
        if delays.is_empty() || delays.len() != powers.len() {
            return Err(Error::InvalidArgument(
                "profile needs matching non-empty delay and power lists".into(),
            ));
        }
        if !delays.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "tap delays must be strictly increasing".into(),
            ));
        }
        if powers.iter().any(|&p| p <= 0.0 || !p.is_finite()) {
            return Err(Error::InvalidArgument("tap powers must be positive".into()));
        }
        Ok(Self {
            delays,
            powers,
            fading,
        })
    }

    /// Single unit tap at delay zero: the AWGN-equivalent channel.
    pub fn flat(fading: Fading) -> Self {
        Self::new(vec![0], vec![1.0], fading).unwrap()
    }

    /// Built-in 3-tap exponential profile: delays [0,1,2] samples, powers
    /// [0, -3, -6] dB. The desk-scale default for fading runs.
    pub fn default_exponential(fading: Fading) -> Self {
        let powers = [0.0f64, -3.0, -6.0]
            .iter()
            .map(|db| 10f64.powf(db / 10.0))
            .collect();
        Self::new(vec![0, 1, 2], powers, fading).unwrap()
    }

    /// Parses a profile file: lines of `delay_samples power_db`, `#` comments.
    pub fn from_file(path: &Path, fading: Fading) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut delays = Vec::new();
        let mut powers = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |tok: Option<&str>, what: &str| -> Result<f64> {
                tok.ok_or_else(|| {
                    Error::Config(format!(
                        "{}:{}: missing {what}",
                        path.display(),
                        lineno + 1
                    ))
                })?
                .parse::<f64>()
                .map_err(|_| {
                    Error::Config(format!(
                        "{}:{}: invalid {what}",
                        path.display(),
                        lineno + 1
                    ))
                })
            };
            let delay = parse(parts.next(), "delay_samples")?;
            let power_db = parse(parts.next(), "power_db")?;
            if delay < 0.0 || delay.fract() != 0.0 {
                return Err(Error::Config(format!(
                    "{}:{}: delay must be a non-negative integer sample count",
                    path.display(),
                    lineno + 1
                )));
            }
            delays.push(delay as usize);
            powers.push(10f64.powf(power_db / 10.0));
        }
        Self::new(delays, powers, fading)
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn max_delay(&self) -> usize {
        *self.delays.last().unwrap()
    }

    pub fn num_taps(&self) -> usize {
        self.delays.len()
    }

    pub fn fading(&self) -> Fading {
        self.fading
    }

    /// Tap powers normalized to unit total power.
    pub fn normalized_powers(&self) -> Vec<f64> {
        let total: f64 = self.powers.iter().sum();
        self.powers.iter().map(|p| p / total).collect()
    }
}

/// One draw of tap gains for every (port, antenna) pair of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    delays: Vec<usize>,
    /// gains[port][antenna][tap]
    gains: Vec<Vec<Vec<Complex64>>>,
}

impl ChannelRealization {
    pub fn ports(&self) -> usize {
        self.gains.len()
    }

    pub fn antennas(&self) -> usize {
        self.gains[0].len()
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn max_delay(&self) -> usize {
        *self.delays.last().unwrap()
    }

    pub fn gains(&self, port: usize, antenna: usize) -> &[Complex64] {
        &self.gains[port][antenna]
    }

    /// Frequency response over an `n_fft`-tone grid for one (port, antenna).
    pub fn frequency_response(&self, port: usize, antenna: usize, n_fft: usize) -> Vec<Complex64> {
        let gains = self.gains(port, antenna);
        (0..n_fft)
            .map(|k| {
                gains
                    .iter()
                    .zip(self.delays.iter())
                    .map(|(&g, &d)| {
                        g * Complex64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * (k * d) as f64 / n_fft as f64,
                        )
                    })
                    .sum()
            })
            .collect()
    }

    /// Builds a realization directly from tap gains; test and harness helper.
    pub fn from_gains(delays: Vec<usize>, gains: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        if gains.is_empty() || gains[0].is_empty() {
            return Err(Error::InvalidArgument("empty gain tensor".into()));
        }
        for per_port in &gains {
            for per_ant in per_port {
                if per_ant.len() != delays.len() {
                    return Err(Error::LengthMismatch {
                        expected: delays.len(),
                        got: per_ant.len(),
                    });
                }
            }
        }
        Ok(Self { delays, gains })
    }
}

/// Draws one block-fading realization for `ports` transmit ports and `rx`
/// receive antennas. Gains are normalized so the expected total tap energy
/// per (port, antenna) pair is one.
pub fn draw_realization(
    profile: &ChannelProfile,
    ports: usize,
    rx: usize,
    rng: &mut impl Rng,
) -> Result<ChannelRealization> {
    if !(1..=2).contains(&ports) {
        return Err(Error::InvalidArgument(format!(
            "ports must be 1 or 2, got {ports}"
        )));
    }
    if ![1, 2, 4].contains(&rx) {
        return Err(Error::InvalidArgument(format!(
            "rx antennas must be 1, 2 or 4, got {rx}"
        )));
    }
    let powers = profile.normalized_powers();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let gains = (0..ports)
        .map(|_| {
            (0..rx)
                .map(|_| {
                    powers
                        .iter()
                        .map(|&p| match profile.fading {
                            Fading::Static => Complex64::new(p.sqrt(), 0.0),
                            Fading::RayleighBlock => {
                                let sigma = (p / 2.0).sqrt();
                                Complex64::new(
                                    sigma * unit.sample(rng),
                                    sigma * unit.sample(rng),
                                )
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(ChannelRealization {
        delays: profile.delays.clone(),
        gains,
    })
}

/// Per-tone noise variance for a given SNR, assuming unit signal power on
/// occupied tones. Infinite SNR yields zero noise.
pub fn noise_variance_per_tone(snr_db: f64) -> f64 {
    if snr_db.is_infinite() && snr_db > 0.0 {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

fn convolve_taps(
    signal: &[Complex64],
    delays: &[usize],
    gains: &[Complex64],
) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); signal.len()];
    for (&d, &g) in delays.iter().zip(gains.iter()) {
        for (n, o) in out.iter_mut().enumerate().skip(d) {
            *o += g * signal[n - d];
        }
    }
    out
}

/// Propagates per-port symbols to every receive antenna and adds i.i.d.
/// complex Gaussian noise per antenna.
///
/// `signals[p]` is the transmitted symbol of port `p` (body plus cyclic
/// prefix, `n_fft + cp_len` samples, scaled to unit power on its occupied
/// tones). The noise variance per time sample is `noise_variance_per_tone /
/// n_fft`, so after the receiver's unnormalized DFT each tone sees the
/// configured per-tone variance. Requires every tap delay to be below the
/// cyclic prefix length.
pub fn apply_multi(
    signals: &[&ComplexSignal],
    realization: &ChannelRealization,
    snr_db: f64,
    n_fft: usize,
    cp_len: usize,
    rng: &mut impl Rng,
) -> Result<Vec<ComplexSignal>> {
    if signals.is_empty() {
        return Err(Error::InvalidArgument("no port signals".into()));
    }
    if signals.len() > realization.ports() {
        return Err(Error::InvalidArgument(format!(
            "{} port signals but realization has {} ports",
            signals.len(),
            realization.ports()
        )));
    }
    if realization.max_delay() >= cp_len {
        return Err(Error::InvalidArgument(format!(
            "max tap delay {} must be below the cyclic prefix length {}",
            realization.max_delay(),
            cp_len
        )));
    }
    for s in signals {
        s.expect_domain(Domain::Time)?;
        s.expect_len(n_fft + cp_len)?;
    }
    let sigma_tone = noise_variance_per_tone(snr_db);
    let sigma_time = (sigma_tone / n_fft as f64 / 2.0).sqrt();
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut outputs = Vec::with_capacity(realization.antennas());
    for a in 0..realization.antennas() {
        let mut acc = vec![Complex64::new(0.0, 0.0); n_fft + cp_len];
        for (p, s) in signals.iter().enumerate() {
            let conv = convolve_taps(s.samples(), &realization.delays, realization.gains(p, a));
            for (o, v) in acc.iter_mut().zip(conv) {
                *o += v;
            }
        }
        if sigma_time > 0.0 {
            for o in acc.iter_mut() {
                *o += Complex64::new(sigma_time * unit.sample(rng), sigma_time * unit.sample(rng));
            }
        }
        outputs.push(ComplexSignal::time(acc)?);
    }
    Ok(outputs)
}

/// Single-port convenience wrapper over [`apply_multi`].
pub fn apply(
    signal: &ComplexSignal,
    realization: &ChannelRealization,
    snr_db: f64,
    n_fft: usize,
    cp_len: usize,
    rng: &mut impl Rng,
) -> Result<Vec<ComplexSignal>> {
    apply_multi(&[signal], realization, snr_db, n_fft, cp_len, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::dft_vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn profile_rejects_bad_shapes() {
        assert!(ChannelProfile::new(vec![], vec![], Fading::Static).is_err());
        assert!(ChannelProfile::new(vec![0, 0], vec![1.0, 1.0], Fading::Static).is_err());
        assert!(ChannelProfile::new(vec![0, 1], vec![1.0, -1.0], Fading::Static).is_err());
    }

    #[test]
    fn static_single_tap_draws_unit_gain() {
        let profile = ChannelProfile::flat(Fading::Static);
        let real = draw_realization(&profile, 1, 1, &mut rng(1)).unwrap();
        assert_eq!(real.gains(0, 0), &[Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn same_seed_same_realization() {
        let profile = ChannelProfile::default_exponential(Fading::RayleighBlock);
        let a = draw_realization(&profile, 2, 2, &mut rng(7)).unwrap();
        let b = draw_realization(&profile, 2, 2, &mut rng(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_invalid_counts() {
        let profile = ChannelProfile::flat(Fading::Static);
        assert!(draw_realization(&profile, 3, 2, &mut rng(1)).is_err());
        assert!(draw_realization(&profile, 1, 3, &mut rng(1)).is_err());
    }

    #[test]
    fn rayleigh_tap_energies_match_profile() {
        let profile = ChannelProfile::default_exponential(Fading::RayleighBlock);
        let powers = profile.normalized_powers();
        let mut sums = vec![0.0f64; 3];
        let mut r = rng(42);
        let draws = 10_000;
        for _ in 0..draws {
            let real = draw_realization(&profile, 1, 1, &mut r).unwrap();
            for (s, g) in sums.iter_mut().zip(real.gains(0, 0)) {
                *s += g.norm_sqr();
            }
        }
        for (s, p) in sums.iter().zip(powers.iter()) {
            let mean = s / draws as f64;
            assert!(
                (mean - p).abs() / p < 0.03,
                "tap energy {mean} vs profile {p}"
            );
        }
    }

    #[test]
    fn infinite_snr_flat_channel_is_identity() {
        let profile = ChannelProfile::flat(Fading::Static);
        let real = draw_realization(&profile, 1, 1, &mut rng(1)).unwrap();
        let sig = ComplexSignal::time(
            (0..20)
                .map(|i| Complex64::new((i as f64).sin(), (i as f64).cos()))
                .collect(),
        )
        .unwrap();
        let out = apply(&sig, &real, f64::INFINITY, 16, 4, &mut rng(2)).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].max_abs_diff(&sig) < 1e-15);
    }

    #[test]
    fn delayed_tap_gives_linear_phase_across_tones() {
        // Single tap at delay d: after CP removal and DFT each tone k is
        // rotated by exp(-i 2 pi k d / N).
        let n = 16;
        let cp = 4;
        let d = 3;
        let real = ChannelRealization::from_gains(
            vec![d],
            vec![vec![vec![Complex64::new(1.0, 0.0)]]],
        )
        .unwrap();
        let body: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((0.3 * i as f64).cos(), (0.9 * i as f64).sin()))
            .collect();
        let mut sym = body[n - cp..].to_vec();
        sym.extend_from_slice(&body);
        let sig = ComplexSignal::time(sym).unwrap();
        let out = apply(&sig, &real, f64::INFINITY, n, cp, &mut rng(3)).unwrap();
        let rx_body = &out[0].samples()[cp..];
        let rx_tones = dft_vec(rx_body);
        let tx_tones = dft_vec(&body);
        for k in 0..n {
            let rot = Complex64::from_polar(
                1.0,
                -2.0 * std::f64::consts::PI * (k * d) as f64 / n as f64,
            );
            assert!((rx_tones[k] - tx_tones[k] * rot).norm() < 1e-9, "tone {k}");
        }
    }

    #[test]
    fn rejects_delay_reaching_cp() {
        let real = ChannelRealization::from_gains(
            vec![4],
            vec![vec![vec![Complex64::new(1.0, 0.0)]]],
        )
        .unwrap();
        let sig = ComplexSignal::time(vec![Complex64::new(1.0, 0.0); 20]).unwrap();
        assert!(apply(&sig, &real, f64::INFINITY, 16, 4, &mut rng(1)).is_err());
    }

    #[test]
    fn zero_db_noise_power_matches_signal_power() {
        // Fully occupied allocation with unit-power tones: at 0 dB the added
        // noise power equals the time-domain signal power.
        let n = 100;
        let cp = 4;
        let trials = 1000; // 1000 * 104 > 1e5 noise samples
        let profile = ChannelProfile::flat(Fading::Static);
        let real = draw_realization(&profile, 1, 1, &mut rng(1)).unwrap();
        let tones: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.4 * k as f64))
            .collect();
        let body = crate::dsp::idft_vec(&tones);
        let mut sym = body[n - cp..].to_vec();
        sym.extend_from_slice(&body);
        let clean = ComplexSignal::time(sym).unwrap();
        let signal_power = clean.mean_power();
        let mut noise_power = 0.0;
        let mut samples = 0usize;
        let mut r = rng(99);
        for _ in 0..trials {
            let out = apply(&clean, &real, 0.0, n, cp, &mut r).unwrap();
            for (a, b) in out[0].samples().iter().zip(clean.samples()) {
                noise_power += (a - b).norm_sqr();
                samples += 1;
            }
        }
        let measured = noise_power / samples as f64;
        assert!(
            (measured - signal_power).abs() / signal_power < 0.05,
            "noise power {measured} vs signal power {signal_power}"
        );
    }

    #[test]
    fn frequency_response_matches_time_convolution() {
        let n = 24;
        let cp = 4;
        let profile = ChannelProfile::default_exponential(Fading::RayleighBlock);
        let real = draw_realization(&profile, 1, 1, &mut rng(5)).unwrap();
        let body: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((0.7 * i as f64).sin(), (0.2 * i as f64).cos()))
            .collect();
        let mut sym = body[n - cp..].to_vec();
        sym.extend_from_slice(&body);
        let sig = ComplexSignal::time(sym).unwrap();
        let out = apply(&sig, &real, f64::INFINITY, n, cp, &mut rng(6)).unwrap();
        let rx_tones = dft_vec(&out[0].samples()[cp..]);
        let tx_tones = dft_vec(&body);
        let h = real.frequency_response(0, 0, n);
        for k in 0..n {
            assert!((rx_tones[k] - tx_tones[k] * h[k]).norm() < 1e-9, "tone {k}");
        }
    }

    #[test]
    fn profile_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.txt");
        std::fs::write(&path, "# taps\n0 0.0\n1 -3.0\n2 -6.0\n").unwrap();
        let profile = ChannelProfile::from_file(&path, Fading::RayleighBlock).unwrap();
        assert_eq!(profile.delays(), &[0, 1, 2]);
        let expected = ChannelProfile::default_exponential(Fading::RayleighBlock);
        for (a, b) in profile
            .normalized_powers()
            .iter()
            .zip(expected.normalized_powers())
        {
            assert!((a - b).abs() < 1e-12);
        }
        std::fs::write(&path, "0 zero\n").unwrap();
        assert!(ChannelProfile::from_file(&path, Fading::Static).is_err());
    }
}
