//! Flat key-value experiment configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment. Unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use super::{
    DenoiseMode, DmrsType, ExperimentConfig, ExperimentKind, OutputFormat, PilotSource,
    SignalKind,
};
use crate::channel::{ChannelProfile, Fading};
use crate::error::{Error, Result};
use crate::sequences::SequenceSource;
use crate::tx::{Mapping, Normalization, Port, ShapingDomain, ShapingFilter, WaveformConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "m",
    "n_fft",
    "cp_len",
    "start_tone",
    "mapping",
    "shaping_domain",
    "filter",
    "filter_norm",
    "channel",
    "fading",
    "snr_db",
    "trials",
    "seed",
    "streams",
    "rx_antennas",
    "dmrs_type",
    "dmrs_source",
    "dmrs_index",
    "signal",
    "port",
    "papr_grid_db",
    "oversample",
    "denoise",
    "out",
    "format",
    "workers",
];

struct Raw {
    map: BTreeMap<String, String>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}"))),
        }
    }
}

fn parse_raw(text: &str, origin: &str) -> Result<Raw> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{origin}:{}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "{origin}:{}: unknown key {key:?}",
                lineno + 1
            )));
        }
        if map
            .insert(key.clone(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::Config(format!(
                "{origin}:{}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    Ok(Raw { map })
}

fn parse_f64_list(key: &str, value: &str) -> Result<Vec<f64>> {
    // Either `a,b,c` or `start:step:stop`.
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "{key}: range form is start:step:stop, got {value:?}"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse {p:?}")))
            })
            .collect::<Result<_>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 {
            return Err(Error::Config(format!("{key}: step must be positive")));
        }
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let v = start + step * i as f64;
            if v > stop + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        Ok(out)
    } else {
        value
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse {p:?}")))
            })
            .collect()
    }
}

fn parse_filter(raw: &Raw) -> Result<ShapingFilter> {
    let norm = match raw.get("filter_norm").unwrap_or("none") {
        "none" => Normalization::None,
        "unit-energy" => Normalization::UnitEnergy,
        other => {
            return Err(Error::Config(format!(
                "filter_norm: expected none|unit-energy, got {other:?}"
            )))
        }
    };
    let filter = match raw.get("filter").unwrap_or("3tap") {
        "none" | "identity" => ShapingFilter::from_real(&[1.0], norm),
        "2tap" => ShapingFilter::from_real(&[1.0, -1.0], norm),
        "3tap" => ShapingFilter::from_real(&[-0.28, 1.0, -0.28], norm),
        custom => {
            let taps = parse_f64_list("filter", custom)?;
            ShapingFilter::from_real(&taps, norm)
        }
    };
    filter.map_err(|e| Error::Config(format!("filter: {e}")))
}

fn parse_profile(raw: &Raw, base_dir: &Path) -> Result<ChannelProfile> {
    let fading = match raw.get("fading").unwrap_or("rayleigh") {
        "static" => Fading::Static,
        "rayleigh" => Fading::RayleighBlock,
        other => {
            return Err(Error::Config(format!(
                "fading: expected static|rayleigh, got {other:?}"
            )))
        }
    };
    match raw.get("channel").unwrap_or("exp3") {
        "flat" => Ok(ChannelProfile::flat(fading)),
        "exp3" => Ok(ChannelProfile::default_exponential(fading)),
        path => ChannelProfile::from_file(&base_dir.join(path), fading)
            .map_err(|e| Error::Config(format!("channel: {e}"))),
    }
}

fn parse_denoise(value: Option<&str>) -> Result<DenoiseMode> {
    match value {
        None | Some("auto") => Ok(DenoiseMode::Auto),
        Some("full") => Ok(DenoiseMode::Full),
        Some(spec) => {
            let (fc, tail) = match spec.split_once(':') {
                None => (spec, "0"),
                Some((a, b)) => (a, b),
            };
            let cutoff = fc
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("denoise: cannot parse cutoff {fc:?}")))?;
            let tail_keep = tail
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("denoise: cannot parse tail {tail:?}")))?;
            Ok(DenoiseMode::Explicit { cutoff, tail_keep })
        }
    }
}

/// Parses a config file into an [`ExperimentConfig`].
///
/// `expected_kind`, when given (from the CLI subcommand), overrides and
/// cross-checks the file's `kind` key. Relative paths inside the file resolve
/// against the file's directory.
pub fn parse_config(path: &Path, expected_kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    parse_config_str(&text, &path.display().to_string(), &base_dir, expected_kind)
}

/// Parses config text; exposed for tests and the FFI layer.
pub fn parse_config_str(
    text: &str,
    origin: &str,
    base_dir: &Path,
    expected_kind: Option<ExperimentKind>,
) -> Result<ExperimentConfig> {
    let raw = parse_raw(text, origin)?;

    let kind = match (raw.get("kind"), expected_kind) {
        (Some(k), Some(expected)) => {
            let parsed = ExperimentKind::from_name(k)?;
            if parsed != expected {
                return Err(Error::Config(format!(
                    "kind: config says {k:?} but the {} subcommand was invoked",
                    expected.name()
                )));
            }
            parsed
        }
        (Some(k), None) => ExperimentKind::from_name(k)?,
        (None, Some(expected)) => expected,
        (None, None) => {
            return Err(Error::Config(
                "kind: missing (and no subcommand context)".into(),
            ))
        }
    };

    let m: usize = raw.parse("m", 24)?;
    let waveform = WaveformConfig {
        m,
        n_fft: raw.parse("n_fft", m.max(32))?,
        cp_len: raw.parse("cp_len", 8)?,
        start_tone: raw.parse("start_tone", 0)?,
        mapping: match raw.get("mapping").unwrap_or("localized") {
            "localized" => Mapping::Localized,
            "interleaved" => Mapping::Interleaved,
            other => {
                return Err(Error::Config(format!(
                    "mapping: expected localized|interleaved, got {other:?}"
                )))
            }
        },
        shaping: match raw.get("shaping_domain").unwrap_or("freq") {
            "freq" | "method1" => ShapingDomain::Frequency,
            "time" | "method2" => ShapingDomain::Time,
            other => {
                return Err(Error::Config(format!(
                    "shaping_domain: expected freq|time (or method1|method2), got {other:?}"
                )))
            }
        },
    };

    let snr_grid_db = match raw.get("snr_db") {
        Some(v) => parse_f64_list("snr_db", v)?,
        None => vec![],
    };
    let papr_grid_db = match raw.get("papr_grid_db") {
        Some(v) => parse_f64_list("papr_grid_db", v)?,
        None => (0..=120).map(|i| i as f64 * 0.1).collect(),
    };

    let pilot_source = match raw.get("dmrs_source").unwrap_or("builtin") {
        "builtin" => PilotSource::Table(SequenceSource::BuiltIn),
        "random" => PilotSource::Random,
        "pool" => PilotSource::DesignedPool,
        path => PilotSource::Table(SequenceSource::File(base_dir.join(path))),
    };

    let config = ExperimentConfig {
        kind,
        waveform,
        filter: parse_filter(&raw)?,
        profile: parse_profile(&raw, base_dir)?,
        snr_grid_db,
        trials: raw.parse("trials", 1000)?,
        seed: raw.parse("seed", 1)?,
        streams: raw.parse("streams", 1)?,
        rx_antennas: raw.parse("rx_antennas", 2)?,
        dmrs_type: match raw.get("dmrs_type").unwrap_or("bpsk") {
            "bpsk" => DmrsType::PiHalfBpsk,
            "zc" => DmrsType::Zc,
            other => {
                return Err(Error::Config(format!(
                    "dmrs_type: expected bpsk|zc, got {other:?}"
                )))
            }
        },
        pilot_source,
        dmrs_index: raw.parse("dmrs_index", 0)?,
        signal: match raw.get("signal").unwrap_or("dmrs") {
            "dmrs" => SignalKind::Dmrs,
            "data" => SignalKind::Data,
            other => {
                return Err(Error::Config(format!(
                    "signal: expected dmrs|data, got {other:?}"
                )))
            }
        },
        port: match raw.get("port").unwrap_or("0") {
            "0" => Port::Port0,
            "1" => Port::Port1,
            other => return Err(Error::Config(format!("port: expected 0|1, got {other:?}"))),
        },
        papr_grid_db,
        oversample: raw.parse("oversample", 4)?,
        denoise: parse_denoise(raw.get("denoise"))?,
        out_dir: PathBuf::from(raw.get("out").unwrap_or(".")),
        format: match raw.get("format").unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(Error::Config(format!(
                    "format: expected csv|json, got {other:?}"
                )))
            }
        },
        workers: raw.parse("workers", 0)?,
    };
    config.validate()?;
    Ok(config)
}
