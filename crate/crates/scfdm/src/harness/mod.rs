//! Experiment orchestration: config parsing, seeded Monte-Carlo loops,
//! metric collection and CSV/JSON emission.
//!
//! Reproducibility contract: a run is a pure function of its
//! [`ExperimentConfig`]. Per-trial randomness comes from seeds derived with
//! [`derive_seed`], so results are byte-identical across reruns and
//! independent of how many workers execute the trials.

mod config;
mod emit;
pub mod pool;
mod runner;

pub use config::parse_config;
pub use emit::{
    parse_bler_csv, parse_chanest_csv, parse_golden_csv, parse_papr_csv, OutputFormat,
};
pub use runner::run_experiment;

use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::rx::DenoiseWindow;
use crate::sequences::SequenceSource;
use crate::tx::{Port, ShapingFilter, WaveformConfig};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// What a run measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Per-symbol PAPR samples reduced to a CCDF.
    Papr,
    /// Full chain block/bit error rates over an SNR grid.
    Bler,
    /// Channel-estimation MSE over an SNR grid.
    Chanest,
    /// Frozen reference-vector regression.
    Golden,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Papr => "papr",
            ExperimentKind::Bler => "bler",
            ExperimentKind::Chanest => "chanest",
            ExperimentKind::Golden => "golden",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "papr" => Ok(ExperimentKind::Papr),
            "bler" => Ok(ExperimentKind::Bler),
            "chanest" => Ok(ExperimentKind::Chanest),
            "golden" => Ok(ExperimentKind::Golden),
            other => Err(Error::Config(format!(
                "kind: unknown experiment kind {other:?} (expected papr|bler|chanest|golden)"
            ))),
        }
    }
}

/// Reference-sequence family used for pilots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DmrsType {
    #[default]
    PiHalfBpsk,
    Zc,
}

/// Where pilot sequences come from for an experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PilotSource {
    /// A table: built-in or file, addressed by `dmrs_index`.
    Table(SequenceSource),
    /// Freshly drawn from the experiment seed: once per run for error-rate
    /// and estimation experiments, per trial for PAPR sampling.
    Random,
    /// The deterministic curated stand-in pool (see [`pool`]); PAPR runs draw
    /// members per trial, other kinds use the `dmrs_index`-th member.
    DesignedPool,
}

/// Which waveform the PAPR experiment samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignalKind {
    #[default]
    Dmrs,
    Data,
}

/// Denoising window selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DenoiseMode {
    /// Cutoff from the cyclic prefix mapped to the half-allocation grid.
    #[default]
    Auto,
    /// Keep the whole half-length response.
    Full,
    /// Explicit cutoff and tail.
    Explicit { cutoff: usize, tail_keep: usize },
}

impl DenoiseMode {
    pub fn window(&self, cfg: &WaveformConfig) -> Result<DenoiseWindow> {
        match *self {
            DenoiseMode::Auto => DenoiseWindow::from_waveform(cfg),
            DenoiseMode::Full => DenoiseWindow::full(cfg.m),
            DenoiseMode::Explicit { cutoff, tail_keep } => {
                DenoiseWindow::new(cutoff, tail_keep)
            }
        }
    }
}

/// Complete description of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub waveform: WaveformConfig,
    pub filter: ShapingFilter,
    pub profile: ChannelProfile,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub streams: usize,
    pub rx_antennas: usize,
    pub dmrs_type: DmrsType,
    pub pilot_source: PilotSource,
    pub dmrs_index: usize,
    pub signal: SignalKind,
    pub port: Port,
    pub papr_grid_db: Vec<f64>,
    pub oversample: usize,
    pub denoise: DenoiseMode,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.waveform
            .validate()
            .map_err(|e| Error::Config(format!("waveform: {e}")))?;
        if self.trials < 1 {
            return Err(Error::Config("trials: must be at least 1".into()));
        }
        if matches!(self.kind, ExperimentKind::Bler | ExperimentKind::Chanest)
            && self.snr_grid_db.is_empty()
        {
            return Err(Error::Config(format!(
                "snr_db: must be non-empty for {} runs",
                self.kind.name()
            )));
        }
        if !(1..=2).contains(&self.streams) {
            return Err(Error::Config(format!(
                "streams: must be 1 or 2, got {}",
                self.streams
            )));
        }
        if ![1, 2, 4].contains(&self.rx_antennas) {
            return Err(Error::Config(format!(
                "rx_antennas: must be 1, 2 or 4, got {}",
                self.rx_antennas
            )));
        }
        if self.rx_antennas < self.streams {
            return Err(Error::Config(format!(
                "rx_antennas: {} antennas cannot separate {} streams",
                self.rx_antennas, self.streams
            )));
        }
        if self.oversample < 1 {
            return Err(Error::Config("oversample: must be at least 1".into()));
        }
        if self.kind == ExperimentKind::Papr {
            if self.papr_grid_db.is_empty() {
                return Err(Error::Config("papr_grid_db: must be non-empty".into()));
            }
            if !self.papr_grid_db.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Config(
                    "papr_grid_db: must be strictly ascending".into(),
                ));
            }
        }
        if matches!(self.kind, ExperimentKind::Bler | ExperimentKind::Chanest)
            && self.profile.max_delay() >= self.waveform.cp_len
        {
            return Err(Error::Config(format!(
                "channel: max tap delay {} must be below cp_len {}",
                self.profile.max_delay(),
                self.waveform.cp_len
            )));
        }
        Ok(())
    }
}

/// Seed-derivation domains; each randomness consumer gets its own stream.
pub mod seed_domain {
    pub const PILOT: u64 = 0x50;
    pub const PAYLOAD: u64 = 0x51;
    pub const CHANNEL: u64 = 0x52;
    pub const NOISE: u64 = 0x53;
    pub const PAPR: u64 = 0x54;
}

/// Splittable per-trial seed derivation (SplitMix64 finalizer over the master
/// seed, a domain constant and the trial coordinates). Order-free: any worker
/// can compute the seed of any trial.
pub fn derive_seed(master: u64, domain: u64, snr_index: usize, trial: usize) -> u64 {
    let index = ((snr_index as u64) << 40) ^ trial as u64;
    let mut z = master
        ^ domain.wrapping_mul(0xA076_1D64_78BD_642F)
        ^ index.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One CCDF output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaprRow {
    pub papr_db: f64,
    pub exceedance: f64,
    pub samples: usize,
}

/// Block-error result at one SNR point for one port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlerRecord {
    pub snr_db: f64,
    pub port: usize,
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
}

/// Estimation MSE at one SNR point for one port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanestRecord {
    pub snr_db: f64,
    pub port: usize,
    pub mse: f64,
}

/// One golden-vector comparison row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub table: String,
    pub index: usize,
    pub expected_re: f64,
    pub expected_im: f64,
    pub got_re: f64,
    pub got_im: f64,
    pub abs_err: f64,
}

/// Record payload of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Papr(Vec<PaprRow>),
    Bler(Vec<BlerRecord>),
    Chanest(Vec<ChanestRecord>),
    Golden(Vec<GoldenRow>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Papr(v) => v.len(),
            Records::Bler(v) => v.len(),
            Records::Chanest(v) => v.len(),
            Records::Golden(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Output of [`run_experiment`]: records plus everything needed to reproduce
/// and emit them.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub records: Records,
    /// True when every golden comparison passed (always true for other
    /// kinds).
    pub golden_pass: bool,
}

impl RunOutput {
    /// Serializes the records and writes `<dir>/<kind>.<ext>`. The file is
    /// written in one shot after full serialization, so a failed run never
    /// leaves partial results.
    pub fn emit(&self, dir: &std::path::Path, format: OutputFormat) -> Result<PathBuf> {
        emit::emit(self, dir, format)
    }
}
