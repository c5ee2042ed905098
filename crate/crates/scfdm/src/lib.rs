//! Link-level simulator for a low-PAPR DFT-s-OFDM uplink.
//!
//! The crate models the full transmit/receive chain for pi/2-BPSK data and
//! reference signals with spectrum shaping: two equivalent transmitter
//! architectures (frequency-domain and time-domain shaping), two FDM
//! reference-signal ports whose waveforms carry identical tone values,
//! tapped-delay-line block-fading channels, a DFT-based joint estimator of
//! the shaping filter and the wireless channel, MMSE equalization for one or
//! two streams, and an experiment harness with seeded, reproducible
//! Monte-Carlo loops for PAPR, error-rate and estimation-quality runs.

pub mod channel;
pub mod dsp;
pub mod error;
pub mod golden;
pub mod harness;
pub mod metrics;
pub mod rx;
pub mod sequences;
pub mod signal;
pub mod tx;

pub use error::{Error, Result};
pub use signal::{ComplexSignal, Domain};
