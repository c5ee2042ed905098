//! Frozen reference vectors for regression checks.
//!
//! The desk-scale reference case: length-6 pilot bits `[1,1,1,0,1,1]`,
//! 3-tap filter `[-0.28, 1, -0.28]`, 12-tone allocation, flat unit channel,
//! no noise. The frequency-domain pilot values (4-decimal precision) and the
//! estimated effective impulse response are pinned here and verified by the
//! `golden` experiment and the acceptance suite.

use crate::error::{Error, Result};
use crate::rx::{estimate_port, DenoiseWindow};
use crate::sequences::{load_dmrs_bits, SequenceSource};
use crate::signal::ComplexSignal;
use crate::tx::{dmrs_tones, DmrsResource, Mapping, Port, ShapingDomain, ShapingFilter, WaveformConfig};
use num_complex::Complex64;

/// Nonzero pilot tone values shared by both ports (port-0 carries them on
/// even tones, port-1 on odd tones).
pub const PILOT_TONE_VALUES: [(f64, f64); 6] = [
    (-0.6223, -1.2445),
    (-0.3727, -1.3909),
    (2.4728, 0.6626),
    (4.4123, 2.2062),
    (-0.6626, -2.4728),
    (1.3909, 0.3727),
];

/// Effective impulse response recovered from either port in the reference
/// case: the filter taps, zero elsewhere.
pub const PILOT_EFFECTIVE_CIR: [f64; 6] = [-0.28, 1.0, -0.28, 0.0, 0.0, 0.0];

/// Tolerance of the frequency-domain pilot check (values are printed to four
/// decimals).
pub const TONE_TOLERANCE: f64 = 1e-3;

/// Tolerance of the effective-impulse-response check.
pub const CIR_TOLERANCE: f64 = 1e-10;

/// Expected value of tone `k` on `port` in the reference case.
pub fn pilot_tone(port: Port, k: usize) -> Complex64 {
    let comb = port.comb_offset();
    if k % 2 == comb {
        let (re, im) = PILOT_TONE_VALUES[k / 2];
        Complex64::new(re, im)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// One golden comparison: an expected/observed pair within a named table.
#[derive(Debug, Clone)]
pub struct GoldenRecord {
    pub table: String,
    pub index: usize,
    pub expected: Complex64,
    pub got: Complex64,
    pub tolerance: f64,
}

impl GoldenRecord {
    pub fn abs_err(&self) -> f64 {
        (self.expected - self.got).norm()
    }

    pub fn pass(&self) -> bool {
        self.abs_err() <= self.tolerance
    }
}

fn reference_config(shaping: ShapingDomain) -> WaveformConfig {
    WaveformConfig {
        m: 12,
        n_fft: 12,
        cp_len: 0,
        start_tone: 0,
        mapping: Mapping::Localized,
        shaping,
    }
}

/// Runs every golden comparison and returns the records.
pub fn run_golden_checks() -> Result<Vec<GoldenRecord>> {
    let bits = load_dmrs_bits(6, 0, &SequenceSource::BuiltIn)?;
    let filter = ShapingFilter::three_tap();
    let mut records = Vec::new();

    for shaping in [ShapingDomain::Frequency, ShapingDomain::Time] {
        let cfg = reference_config(shaping);
        let tag = match shaping {
            ShapingDomain::Frequency => "freq",
            ShapingDomain::Time => "time",
        };
        for port in Port::all() {
            let res = DmrsResource {
                port,
                bits: bits.clone(),
            };
            let tones = dmrs_tones(&res, &filter, &cfg)?;
            for (k, &got) in tones.samples().iter().enumerate() {
                records.push(GoldenRecord {
                    table: format!("pilot_tones_port{port}_{tag}"),
                    index: k,
                    expected: pilot_tone(port, k),
                    got,
                    tolerance: TONE_TOLERANCE,
                });
            }

            // Effective impulse response through the estimator: flat unit
            // channel, no noise, so the received tones are the transmitted
            // tones themselves.
            let window = DenoiseWindow::full(cfg.m)?;
            let est = estimate_port(&tones, &res, &window)?;
            for (n, &got) in est.effective_cir().samples().iter().enumerate() {
                records.push(GoldenRecord {
                    table: format!("effective_cir_port{port}_{tag}"),
                    index: n,
                    expected: Complex64::new(PILOT_EFFECTIVE_CIR[n], 0.0),
                    got,
                    tolerance: CIR_TOLERANCE,
                });
            }
        }
    }
    Ok(records)
}

/// Runs the golden checks and fails loudly on the first mismatch.
pub fn verify_golden() -> Result<Vec<GoldenRecord>> {
    let records = run_golden_checks()?;
    if let Some(bad) = records.iter().find(|r| !r.pass()) {
        return Err(Error::GoldenMismatch(format!(
            "{} index {}: expected {}, got {}, abs err {:.3e} (tolerance {:.0e})",
            bad.table,
            bad.index,
            bad.expected,
            bad.got,
            bad.abs_err(),
            bad.tolerance
        )));
    }
    Ok(records)
}

/// Signal holding the reference pilot tones; used by tests needing the
/// transmitted reference spectrum directly.
pub fn reference_tones(port: Port) -> ComplexSignal {
    ComplexSignal::frequency((0..12).map(|k| pilot_tone(port, k)).collect()).unwrap()
}
