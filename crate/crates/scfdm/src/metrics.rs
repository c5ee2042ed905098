//! Waveform quality metrics: PAPR and its CCDF.

use crate::dsp::{dft_vec, idft_vec};
use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, Domain};
use num_complex::Complex64;

/// Peak-to-average power ratio of a symbol body in dB.
///
/// The body spectrum is zero-padded to `oversample` times its length (split
/// at the Nyquist bin so positive and negative frequencies keep their
/// places), transformed back to time and the ratio of peak to mean power is
/// returned. `oversample = 1` reproduces the exact-sample PAPR. Callers pass
/// the symbol body, cyclic prefix excluded.
pub fn compute_papr(signal: &ComplexSignal, oversample: usize) -> Result<f64> {
    signal.expect_domain(Domain::Time)?;
    if oversample < 1 {
        return Err(Error::InvalidArgument("oversample must be >= 1".into()));
    }
    if signal.energy() <= 0.0 {
        return Err(Error::InvalidArgument("zero-energy signal".into()));
    }
    let n = signal.len();
    let samples = if oversample == 1 {
        signal.samples().to_vec()
    } else {
        let spectrum = dft_vec(signal.samples());
        let padded_len = n * oversample;
        let mut padded = vec![Complex64::new(0.0, 0.0); padded_len];
        let split = n.div_ceil(2);
        padded[..split].copy_from_slice(&spectrum[..split]);
        padded[padded_len - (n - split)..].copy_from_slice(&spectrum[split..]);
        idft_vec(&padded)
    };
    let mean: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64;
    let peak = samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// Complementary CDF of PAPR samples over a dB threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    /// Ascending dB thresholds.
    pub grid_db: Vec<f64>,
    /// Fraction of samples exceeding each threshold.
    pub exceedance: Vec<f64>,
    /// Number of PAPR samples behind the curve.
    pub samples: usize,
}

impl CcdfCurve {
    /// Exceedance probability at the grid point nearest to `papr_db`.
    pub fn exceedance_at(&self, papr_db: f64) -> f64 {
        let idx = self
            .grid_db
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - papr_db)
                    .abs()
                    .partial_cmp(&(b.1 - papr_db).abs())
                    .unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        self.exceedance[idx]
    }

    /// Smallest grid threshold whose exceedance drops to `target` or below;
    /// the conventional way to read "PAPR at the 10^-3 point" off a curve.
    pub fn papr_at_probability(&self, target: f64) -> Option<f64> {
        self.grid_db
            .iter()
            .zip(self.exceedance.iter())
            .find(|(_, &p)| p <= target)
            .map(|(&g, _)| g)
    }
}

/// Builds the CCDF of `samples_db` over `grid_db`.
pub fn ccdf(samples_db: &[f64], grid_db: &[f64]) -> Result<CcdfCurve> {
    if samples_db.is_empty() {
        return Err(Error::InvalidArgument("no PAPR samples".into()));
    }
    if grid_db.is_empty() {
        return Err(Error::InvalidArgument("empty CCDF grid".into()));
    }
    if !grid_db.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument(
            "CCDF grid must be strictly ascending".into(),
        ));
    }
    let n = samples_db.len() as f64;
    let exceedance = grid_db
        .iter()
        .map(|&g| samples_db.iter().filter(|&&s| s > g).count() as f64 / n)
        .collect();
    Ok(CcdfCurve {
        grid_db: grid_db.to_vec(),
        exceedance,
        samples: samples_db.len(),
    })
}
