//! Deterministic numerical kernels shared by every chain stage.
//!
//! Conventions used throughout the crate:
//!
//! * Forward DFT is unnormalized: `X(k) = sum_m x(m) exp(-i 2 pi k m / M)`.
//! * Inverse DFT carries the `1/M` factor, so `idft(dft(x)) == x`.
//!
//! Precoders and mapping matrices are realized as elementwise or permutation
//! operations, never as dense matrices.

use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, Domain};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::new());
}

struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl PlanCache {
    fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            forward: HashMap::new(),
            inverse: HashMap::new(),
        }
    }

    fn plan(&mut self, n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
        let (map, planner) = if inverse {
            (&mut self.inverse, &mut self.planner)
        } else {
            (&mut self.forward, &mut self.planner)
        };
        map.entry(n)
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    }
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANS.with(|cell| {
        let plan = cell.borrow_mut().plan(buf.len(), inverse);
        plan.process(buf);
    });
}

/// Unnormalized forward DFT of raw complex samples.
pub fn dft_vec(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf, false);
    buf
}

/// Inverse DFT of raw complex samples, scaled by `1/len`.
pub fn idft_vec(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf, true);
    let scale = 1.0 / buf.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Forward DFT of a time-domain signal of exactly `size` samples.
pub fn dft(x: &ComplexSignal, size: usize) -> Result<ComplexSignal> {
    x.expect_domain(Domain::Time)?;
    x.expect_len(size)?;
    ComplexSignal::frequency(dft_vec(x.samples()))
}

/// Inverse DFT of a frequency-domain signal.
pub fn idft(x: &ComplexSignal) -> Result<ComplexSignal> {
    x.expect_domain(Domain::Frequency)?;
    ComplexSignal::time(idft_vec(x.samples()))
}

/// Circular convolution of two equal-length time-domain vectors.
///
/// `y(n) = sum_m x(m) w((n - m) mod M)`, evaluated by direct summation.
pub fn circular_convolve(x: &ComplexSignal, w: &ComplexSignal) -> Result<ComplexSignal> {
    x.expect_domain(Domain::Time)?;
    w.expect_domain(Domain::Time)?;
    if x.len() != w.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            got: w.len(),
        });
    }
    let m = x.len();
    let xs = x.samples();
    let ws = w.samples();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (n, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &xv) in xs.iter().enumerate() {
            acc += xv * ws[(n + m - i) % m];
        }
        *o = acc;
    }
    ComplexSignal::time(out)
}

/// Repeats a vector `factor` times: `out(n) = r(n mod r.len())`.
pub fn cyclic_extend(r: &ComplexSignal, factor: usize) -> Result<ComplexSignal> {
    if factor < 1 {
        return Err(Error::InvalidArgument(
            "cyclic extension factor must be >= 1".into(),
        ));
    }
    let base = r.samples();
    let mut out = Vec::with_capacity(base.len() * factor);
    for _ in 0..factor {
        out.extend_from_slice(base);
    }
    ComplexSignal::new(out, r.domain())
}

/// Kinds of precoder applied during reference-signal generation.
///
/// All of them are O(M) elementwise or permutation operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecoderKind {
    /// Alternating pi/2 phase rotation with the global `exp(i pi/4)` factor:
    /// diagonal entry `exp(i pi/4) * exp(i (m mod 2) pi/2)`.
    PhaseRotation,
    /// Per-sample modulation `exp(i 2 pi m / M)`; shifts the spectrum down by
    /// exactly one bin, which is what moves a comb from even onto odd tones.
    ToneShift,
    /// Cyclic shift down by one position: `v'(k) = v((k-1) mod M)`.
    CyclicShift,
}

/// A precoder bound to the vector length it operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecoderSpec {
    pub kind: PrecoderKind,
    pub size: usize,
}

impl PrecoderSpec {
    pub fn new(kind: PrecoderKind, size: usize) -> Self {
        Self { kind, size }
    }
}

/// Applies a precoder to a vector of matching length.
pub fn apply_precoder(spec: PrecoderSpec, v: &ComplexSignal) -> Result<ComplexSignal> {
    v.expect_len(spec.size)?;
    let n = v.len();
    let s = v.samples();
    let out = match spec.kind {
        PrecoderKind::PhaseRotation => s
            .iter()
            .enumerate()
            .map(|(m, &x)| x * phase_rotation_factor(m))
            .collect(),
        PrecoderKind::ToneShift => s
            .iter()
            .enumerate()
            .map(|(m, &x)| x * Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64))
            .collect(),
        PrecoderKind::CyclicShift => (0..n).map(|k| s[(k + n - 1) % n]).collect(),
    };
    ComplexSignal::new(out, v.domain())
}

/// `exp(i pi/4) * exp(i (m mod 2) pi/2)`, the per-sample pi/2-BPSK rotation.
pub fn phase_rotation_factor(m: usize) -> Complex64 {
    Complex64::from_polar(1.0, FRAC_PI_4 + (m % 2) as f64 * FRAC_PI_2)
}
