//! Desk-scale stand-ins for the standardized pilot sequence pools.
//!
//! The deployed low-PAPR pilot tables were designed by searching binary
//! candidates for low shaped PAPR and usable spectral flatness; the tables
//! themselves are not shipped here. These helpers reproduce the selection
//! procedure at desk scale, deterministically, so experiments can draw from a
//! curated-quality pool of any length.

use crate::dsp::dft_vec;
use crate::error::Result;
use crate::metrics::compute_papr;
use crate::sequences::{pi_half_bpsk, BitSequence};
use crate::signal::ComplexSignal;
use crate::tx::ShapingFilter;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Pool size, matching the 30 sequences per length of the deployed tables.
pub const POOL_SIZE: usize = 30;
/// Candidates examined per pool; fixed so the pool is a deterministic
/// function of the sequence length alone.
const POOL_CANDIDATES: usize = 1000;
/// Internal seed for candidate generation; independent of experiment seeds,
/// like a published table would be.
const DESIGN_SEED: u64 = 0x5CFD_0001;

fn papr_cache() -> &'static Mutex<HashMap<usize, Vec<BitSequence>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<BitSequence>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn flat_cache() -> &'static Mutex<HashMap<usize, BitSequence>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, BitSequence>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// 4x-oversampled PAPR of the DFT-s-OFDM pilot waveform shaped by `filter`,
/// with the length-L allocation occupying the lower half of a 2L grid.
fn shaped_papr(spectrum: &[Complex64], filter: &ShapingFilter) -> Result<f64> {
    let l = spectrum.len();
    let response = filter.response(l)?;
    let mut tones = vec![Complex64::new(0.0, 0.0); 2 * l];
    for (k, (&x, &w)) in spectrum.iter().zip(response.iter()).enumerate() {
        tones[k] = x * w;
    }
    let body = crate::dsp::idft_vec(&tones);
    compute_papr(&ComplexSignal::time(body)?, 4)
}

fn spectral_min_ok(spectrum: &[Complex64], length: usize) -> bool {
    let floor = 0.2 * (length as f64).sqrt();
    spectrum.iter().all(|v| v.norm() >= floor)
}

/// `mean_k(mean(|R|^2) / |R(k)|^2)`: 1.0 for a perfectly flat pilot spectrum.
/// Least-squares estimation noise scales with this factor.
pub fn flatness_cost(spectrum: &[Complex64]) -> f64 {
    let mean: f64 =
        spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() / spectrum.len() as f64;
    spectrum.iter().map(|v| mean / v.norm_sqr()).sum::<f64>() / spectrum.len() as f64
}

/// The curated low-PAPR pilot pool for `length`: the [`POOL_SIZE`] candidates
/// (of [`POOL_CANDIDATES`] examined) with the lowest worst-case shaped PAPR
/// over the two standard filters, spectral nulls rejected.
pub fn low_papr_pilot_pool(length: usize) -> Result<Vec<BitSequence>> {
    if let Some(pool) = papr_cache().lock().unwrap().get(&length) {
        return Ok(pool.clone());
    }
    let filters = [ShapingFilter::two_tap(), ShapingFilter::three_tap()];
    let mut rng = ChaCha8Rng::seed_from_u64(DESIGN_SEED ^ length as u64);
    let mut scored: Vec<(f64, Vec<u8>)> = Vec::with_capacity(POOL_CANDIDATES);
    while scored.len() < POOL_CANDIDATES {
        let bits: Vec<u8> = (0..length).map(|_| rng.gen_range(0..=1u8)).collect();
        let seq = BitSequence::new(bits.clone())?;
        let spectrum = dft_vec(pi_half_bpsk(&seq)?.samples());
        if !spectral_min_ok(&spectrum, length) {
            continue;
        }
        let mut worst = 0.0f64;
        for f in &filters {
            worst = worst.max(shaped_papr(&spectrum, f)?);
        }
        scored.push((worst, bits));
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let pool: Vec<BitSequence> = scored
        .into_iter()
        .take(POOL_SIZE)
        .map(|(_, bits)| BitSequence::new(bits))
        .collect::<Result<_>>()?;
    papr_cache().lock().unwrap().insert(length, pool.clone());
    Ok(pool)
}

/// The spectrally flattest pilot of `length`: exhaustive for short lengths,
/// a deterministic 20000-candidate search otherwise. Ties break toward lower
/// 3-tap shaped PAPR, then lexicographically.
pub fn flattest_pilot(length: usize) -> Result<BitSequence> {
    if let Some(seq) = flat_cache().lock().unwrap().get(&length) {
        return Ok(seq.clone());
    }
    let filter = ShapingFilter::three_tap();
    let mut best: Option<(f64, f64, Vec<u8>)> = None;
    let mut consider = |bits: Vec<u8>| -> Result<()> {
        let seq = BitSequence::new(bits.clone())?;
        let spectrum = dft_vec(pi_half_bpsk(&seq)?.samples());
        if !spectral_min_ok(&spectrum, length) {
            return Ok(());
        }
        let cost = flatness_cost(&spectrum);
        let papr = shaped_papr(&spectrum, &filter)?;
        let candidate = (cost, papr, bits);
        let better = match &best {
            None => true,
            Some(cur) => {
                (candidate.0, candidate.1, &candidate.2) < (cur.0, cur.1, &cur.2)
            }
        };
        if better {
            best = Some(candidate);
        }
        Ok(())
    };
    if length <= 16 {
        for word in 0..(1usize << length) {
            let bits: Vec<u8> = (0..length).map(|i| ((word >> i) & 1) as u8).collect();
            consider(bits)?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(DESIGN_SEED ^ (length as u64) << 16);
        for _ in 0..20_000 {
            let bits: Vec<u8> = (0..length).map(|_| rng.gen_range(0..=1u8)).collect();
            consider(bits)?;
        }
    }
    let (_, _, bits) = best.ok_or_else(|| {
        crate::error::Error::InvalidArgument(format!(
            "no null-free pilot of length {length} exists"
        ))
    })?;
    let seq = BitSequence::new(bits)?;
    flat_cache().lock().unwrap().insert(length, seq.clone());
    Ok(seq)
}

/// Standard root set for Zadoff-Chu pilots of prime length `n_zc`: the
/// 30-group selection rule for lengths beyond 31, every root otherwise.
pub fn zc_group_roots(n_zc: usize) -> Vec<usize> {
    if n_zc <= 31 {
        return (1..n_zc).collect();
    }
    let mut roots: Vec<usize> = (0..30)
        .map(|u| {
            let qbar = n_zc as f64 * (u as f64 + 1.0) / 31.0;
            (qbar + 0.5).floor() as usize
        })
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots
}
