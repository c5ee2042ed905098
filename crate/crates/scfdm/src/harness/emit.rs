//! Result emission and re-parsing.
//!
//! CSV files start with a `# seed=<u64>` metadata line (enough to reproduce
//! the run bit-exactly) followed by a header row and one row per record. JSON
//! mirrors the same records under a `records` array.

use super::{BlerRecord, ChanestRecord, GoldenRow, PaprRow, Records, RunOutput};
use crate::error::{Error, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "format: expected csv|json, got {other:?}"
            ))),
        }
    }
}

#[derive(Serialize)]
struct JsonEnvelope<'a, T: Serialize> {
    kind: &'a str,
    seed: u64,
    records: &'a [T],
}

fn render_json<T: Serialize>(kind: &str, seed: u64, records: &[T]) -> Result<String> {
    serde_json::to_string_pretty(&JsonEnvelope {
        kind,
        seed,
        records,
    })
    .map_err(|e| Error::Config(format!("json serialization failed: {e}")))
}

/// Renders the full output as a string; nothing touches the filesystem here.
pub fn render(output: &RunOutput, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => match &output.records {
            Records::Papr(v) => render_json(output.kind.name(), output.seed, v),
            Records::Bler(v) => render_json(output.kind.name(), output.seed, v),
            Records::Chanest(v) => render_json(output.kind.name(), output.seed, v),
            Records::Golden(v) => render_json(output.kind.name(), output.seed, v),
        },
        OutputFormat::Csv => {
            let mut s = format!("# seed={}\n", output.seed);
            match &output.records {
                Records::Papr(rows) => {
                    s.push_str("papr_db,exceedance,samples\n");
                    for r in rows {
                        s.push_str(&format!("{},{},{}\n", r.papr_db, r.exceedance, r.samples));
                    }
                }
                Records::Bler(rows) => {
                    s.push_str("snr_db,port,errors,trials,rate\n");
                    for r in rows {
                        s.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.snr_db, r.port, r.errors, r.trials, r.rate
                        ));
                    }
                }
                Records::Chanest(rows) => {
                    s.push_str("snr_db,port,mse\n");
                    for r in rows {
                        s.push_str(&format!("{},{},{}\n", r.snr_db, r.port, r.mse));
                    }
                }
                Records::Golden(rows) => {
                    s.push_str("table,index,expected_re,expected_im,got_re,got_im,abs_err\n");
                    for r in rows {
                        s.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            r.table,
                            r.index,
                            r.expected_re,
                            r.expected_im,
                            r.got_re,
                            r.got_im,
                            r.abs_err
                        ));
                    }
                }
            }
            Ok(s)
        }
    }
}

pub(super) fn emit(output: &RunOutput, dir: &Path, format: OutputFormat) -> Result<PathBuf> {
    let rendered = render(output, format)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let path = dir.join(format!("{}.{}", output.kind.name(), format.extension()));
    std::fs::write(&path, rendered).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

struct CsvBody<'a> {
    seed: u64,
    rows: Vec<Vec<&'a str>>,
}

fn parse_csv_body<'a>(text: &'a str, expected_header: &str) -> Result<CsvBody<'a>> {
    let mut seed = None;
    let mut header = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(value) = meta.strip_prefix("seed=") {
                seed = Some(value.trim().parse().map_err(|_| {
                    Error::Config(format!("cannot parse seed metadata {value:?}"))
                })?);
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            if line != expected_header {
                return Err(Error::Config(format!(
                    "unexpected CSV header {line:?}, want {expected_header:?}"
                )));
            }
            header = Some(line);
            continue;
        }
        rows.push(line.split(',').collect());
    }
    if header.is_none() {
        return Err(Error::Config("missing CSV header".into()));
    }
    Ok(CsvBody {
        seed: seed.ok_or_else(|| Error::Config("missing `# seed=` metadata line".into()))?,
        rows,
    })
}

fn field<T: std::str::FromStr>(row: &[&str], idx: usize) -> Result<T> {
    row.get(idx)
        .ok_or_else(|| Error::Config(format!("CSV row too short: {row:?}")))?
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse CSV field {:?}", row[idx])))
}

/// Parses a PAPR CCDF CSV back into records.
pub fn parse_papr_csv(text: &str) -> Result<(u64, Vec<PaprRow>)> {
    let body = parse_csv_body(text, "papr_db,exceedance,samples")?;
    let rows = body
        .rows
        .iter()
        .map(|r| {
            Ok(PaprRow {
                papr_db: field(r, 0)?,
                exceedance: field(r, 1)?,
                samples: field(r, 2)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((body.seed, rows))
}

/// Parses a block-error-rate CSV back into records.
pub fn parse_bler_csv(text: &str) -> Result<(u64, Vec<BlerRecord>)> {
    let body = parse_csv_body(text, "snr_db,port,errors,trials,rate")?;
    let rows = body
        .rows
        .iter()
        .map(|r| {
            Ok(BlerRecord {
                snr_db: field(r, 0)?,
                port: field(r, 1)?,
                errors: field(r, 2)?,
                trials: field(r, 3)?,
                rate: field(r, 4)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((body.seed, rows))
}

/// Parses an estimation-MSE CSV back into records.
pub fn parse_chanest_csv(text: &str) -> Result<(u64, Vec<ChanestRecord>)> {
    let body = parse_csv_body(text, "snr_db,port,mse")?;
    let rows = body
        .rows
        .iter()
        .map(|r| {
            Ok(ChanestRecord {
                snr_db: field(r, 0)?,
                port: field(r, 1)?,
                mse: field(r, 2)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((body.seed, rows))
}

/// Parses a golden-regression CSV back into records.
pub fn parse_golden_csv(text: &str) -> Result<(u64, Vec<GoldenRow>)> {
    let body = parse_csv_body(text, "table,index,expected_re,expected_im,got_re,got_im,abs_err")?;
    let rows = body
        .rows
        .iter()
        .map(|r| {
            Ok(GoldenRow {
                table: r
                    .first()
                    .ok_or_else(|| Error::Config("empty CSV row".into()))?
                    .to_string(),
                index: field(r, 1)?,
                expected_re: field(r, 2)?,
                expected_im: field(r, 3)?,
                got_re: field(r, 4)?,
                got_im: field(r, 5)?,
                abs_err: field(r, 6)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((body.seed, rows))
}
