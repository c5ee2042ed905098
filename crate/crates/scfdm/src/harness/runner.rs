//! Experiment implementations behind [`run_experiment`].

use super::pool::{low_papr_pilot_pool, zc_group_roots};
use super::{
    derive_seed, seed_domain, BlerRecord, ChanestRecord, DmrsType, ExperimentConfig,
    ExperimentKind, GoldenRow, PaprRow, PilotSource, Records, RunOutput, SignalKind,
};
use crate::channel::{apply_multi, draw_realization, noise_variance_per_tone, ChannelRealization};
use crate::dsp::dft_vec;
use crate::error::{Error, Result};
use crate::golden::run_golden_checks;
use crate::metrics::{ccdf, compute_papr};
use crate::rx::{despread_demod, estimate_from_tones, front_end, mmse_equalize, ChannelEstimate};
use crate::sequences::{
    largest_prime_below, load_dmrs_bits, pi_half_bpsk, random_pilot_bits, zc_pilot, BitSequence,
};
use crate::signal::ComplexSignal;
use crate::tx::{
    assemble_symbol, data_tones, dmrs_tones_freq_mapped, dmrs_tones_from_base, Port,
    WaveformConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Runs the configured experiment and returns its records. Deterministic for
/// a fixed config: per-trial seeds are derived, never drawn from shared
/// state, so worker count cannot change the result.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let records = with_pool(cfg.workers, || match cfg.kind {
        ExperimentKind::Papr => run_papr(cfg),
        ExperimentKind::Bler => run_bler(cfg),
        ExperimentKind::Chanest => run_chanest(cfg),
        ExperimentKind::Golden => run_golden(cfg),
    })?;
    let golden_pass = match &records {
        Records::Golden(rows) => rows.iter().all(|r| {
            let tol = golden_tolerance(&r.table);
            r.abs_err <= tol
        }),
        _ => true,
    };
    Ok(RunOutput {
        kind: cfg.kind,
        seed: cfg.seed,
        records,
        golden_pass,
    })
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("worker pool")
            .install(f)
    }
}

fn golden_tolerance(table: &str) -> f64 {
    if table.starts_with("effective_cir") {
        crate::golden::CIR_TOLERANCE
    } else {
        crate::golden::TONE_TOLERANCE
    }
}

fn rng_for(cfg: &ExperimentConfig, domain: u64, snr_index: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, domain, snr_index, trial))
}

fn random_payload(len: usize, rng: &mut impl Rng) -> BitSequence {
    BitSequence::new((0..len).map(|_| rng.gen_range(0..=1u8)).collect()).expect("payload bits")
}

/// One pilot draw: either a pi/2-BPSK base (DFT-precoded transmit chain) or a
/// sequence mapped directly onto frequency tones.
enum Pilot {
    /// Time-domain base sequence; pilot tones are built through the DFT
    /// precoding chain and the LS reference is its half-length DFT.
    Base(ComplexSignal),
    /// Frequency-domain sequence placed straight onto the comb; the values
    /// themselves are the LS reference.
    Tones(ComplexSignal),
}

impl Pilot {
    fn dmrs_tones(
        &self,
        port: Port,
        cfg: &ExperimentConfig,
    ) -> Result<ComplexSignal> {
        match self {
            Pilot::Base(base) => dmrs_tones_from_base(base, port, &cfg.filter, &cfg.waveform),
            Pilot::Tones(seq) => dmrs_tones_freq_mapped(seq, port, &cfg.filter, &cfg.waveform),
        }
    }

    fn ls_reference(&self) -> Vec<Complex64> {
        match self {
            Pilot::Base(base) => dft_vec(base.samples()),
            Pilot::Tones(seq) => seq.samples().to_vec(),
        }
    }
}

/// Multiplies a phase ramp `exp(i 2 pi cs n / 12)` onto a sequence, the
/// standard cyclic-shift separation for sequence-valued pilots.
fn phase_ramp(seq: &ComplexSignal, cs: usize) -> ComplexSignal {
    let rotated = seq
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            v * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (cs * n) as f64 / 12.0)
        })
        .collect();
    ComplexSignal::new(rotated, seq.domain()).expect("non-empty")
}

fn zc_prime(half: usize) -> Result<usize> {
    largest_prime_below(half)
        .ok_or_else(|| Error::InvalidArgument(format!("no prime below pilot length {half}")))
}

/// The pilot for one draw. `per_trial` marks PAPR-style sampling where pools
/// are drawn from per trial instead of fixed per run.
fn pilot_draw(cfg: &ExperimentConfig, rng: &mut impl Rng, per_trial: bool) -> Result<Pilot> {
    let half = cfg.waveform.m / 2;
    match cfg.dmrs_type {
        DmrsType::PiHalfBpsk => {
            let bits = match &cfg.pilot_source {
                PilotSource::Table(source) => load_dmrs_bits(half, cfg.dmrs_index, source)?,
                PilotSource::Random => random_pilot_bits(half, rng)?,
                PilotSource::DesignedPool => {
                    let pool = low_papr_pilot_pool(half)?;
                    if per_trial {
                        pool[rng.gen_range(0..pool.len())].clone()
                    } else {
                        pool[cfg.dmrs_index % pool.len()].clone()
                    }
                }
            };
            Ok(Pilot::Base(pi_half_bpsk(&bits)?))
        }
        DmrsType::Zc => {
            let roots = zc_group_roots(zc_prime(half)?);
            let (root, cs) = match &cfg.pilot_source {
                PilotSource::Table(_) | PilotSource::DesignedPool => {
                    (roots[cfg.dmrs_index % roots.len()], 0)
                }
                PilotSource::Random => {
                    if per_trial {
                        (roots[rng.gen_range(0..roots.len())], rng.gen_range(0..12))
                    } else {
                        (roots[rng.gen_range(0..roots.len())], 0)
                    }
                }
            };
            Ok(Pilot::Tones(phase_ramp(&zc_pilot(half, root, 0)?, cs)))
        }
    }
}

/// Scales an M-tone vector to unit mean power over its occupied tones and
/// assembles the transmit symbol. Returns the symbol and the applied scale.
fn normalized_symbol(
    tones: &ComplexSignal,
    occupied: usize,
    wf: &WaveformConfig,
) -> Result<(ComplexSignal, f64)> {
    let es = tones.energy() / occupied as f64;
    if es <= 0.0 {
        return Err(Error::InvalidArgument("zero-energy symbol".into()));
    }
    let scale = 1.0 / es.sqrt();
    Ok((assemble_symbol(&tones.scaled(scale), wf)?, scale))
}

fn body_of(symbol: &ComplexSignal, wf: &WaveformConfig) -> Result<ComplexSignal> {
    ComplexSignal::time(symbol.samples()[wf.cp_len..].to_vec())
}

// ---------------------------------------------------------------------------
// papr
// ---------------------------------------------------------------------------

fn run_papr(cfg: &ExperimentConfig) -> Result<Records> {
    let wf = &cfg.waveform;
    let samples: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let mut rng = rng_for(cfg, seed_domain::PAPR, 0, trial);
            let tones = match cfg.signal {
                SignalKind::Data => {
                    let bits = random_payload(wf.m, &mut rng);
                    data_tones(&bits, &cfg.filter, wf)?
                }
                SignalKind::Dmrs => {
                    let pilot = pilot_draw(cfg, &mut rng, true)?;
                    pilot.dmrs_tones(cfg.port, cfg)?
                }
            };
            let symbol = assemble_symbol(&tones, wf)?;
            compute_papr(&body_of(&symbol, wf)?, cfg.oversample)
        })
        .collect::<Result<_>>()?;
    let curve = ccdf(&samples, &cfg.papr_grid_db)?;
    let rows = curve
        .grid_db
        .iter()
        .zip(curve.exceedance.iter())
        .map(|(&papr_db, &exceedance)| PaprRow {
            papr_db,
            exceedance,
            samples: curve.samples,
        })
        .collect();
    Ok(Records::Papr(rows))
}

// ---------------------------------------------------------------------------
// bler
// ---------------------------------------------------------------------------

struct SlotOutcome {
    /// One flag per stream: did the block decode with any bit error?
    block_err: Vec<bool>,
}

/// Everything fixed across trials of a bler/chanest run.
struct SlotFixture {
    ls_reference: Vec<Complex64>,
    dmrs_symbols: Vec<ComplexSignal>,
    dmrs_scales: Vec<f64>,
    window: crate::rx::DenoiseWindow,
}

fn slot_fixture(cfg: &ExperimentConfig) -> Result<SlotFixture> {
    let wf = &cfg.waveform;
    let mut pilot_rng = rng_for(cfg, seed_domain::PILOT, 0, 0);
    let pilot = pilot_draw(cfg, &mut pilot_rng, false)?;
    let mut dmrs_symbols = Vec::with_capacity(cfg.streams);
    let mut dmrs_scales = Vec::with_capacity(cfg.streams);
    for port in Port::all().into_iter().take(cfg.streams) {
        let tones = pilot.dmrs_tones(port, cfg)?;
        let (symbol, scale) = normalized_symbol(&tones, wf.m / 2, wf)?;
        dmrs_symbols.push(symbol);
        dmrs_scales.push(scale);
    }
    Ok(SlotFixture {
        ls_reference: pilot.ls_reference(),
        dmrs_symbols,
        dmrs_scales,
        window: cfg.denoise.window(wf)?,
    })
}

fn estimate_all(
    fixture: &SlotFixture,
    rx_dmrs: &[ComplexSignal],
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<ChannelEstimate>>> {
    let wf = &cfg.waveform;
    let mut estimates = Vec::with_capacity(cfg.streams);
    for port in Port::all().into_iter().take(cfg.streams) {
        let mut per_antenna = Vec::with_capacity(rx_dmrs.len());
        for rx in rx_dmrs {
            let tones = front_end(rx, wf)?;
            per_antenna.push(estimate_from_tones(
                &tones,
                &fixture.ls_reference,
                port,
                &fixture.window,
            )?);
        }
        estimates.push(per_antenna);
    }
    Ok(estimates)
}

fn run_slot(
    cfg: &ExperimentConfig,
    fixture: &SlotFixture,
    snr_index: usize,
    trial: usize,
) -> Result<SlotOutcome> {
    let wf = &cfg.waveform;
    let snr_db = cfg.snr_grid_db[snr_index];
    let mut payload_rng = rng_for(cfg, seed_domain::PAYLOAD, snr_index, trial);
    let mut channel_rng = rng_for(cfg, seed_domain::CHANNEL, snr_index, trial);
    let mut noise_rng = rng_for(cfg, seed_domain::NOISE, snr_index, trial);

    let realization = draw_realization(&cfg.profile, cfg.streams, cfg.rx_antennas, &mut channel_rng)?;

    let payloads: Vec<BitSequence> = (0..cfg.streams)
        .map(|_| random_payload(wf.m, &mut payload_rng))
        .collect();
    let mut data_symbols = Vec::with_capacity(cfg.streams);
    for payload in &payloads {
        let tones = data_tones(payload, &cfg.filter, wf)?;
        let (symbol, _) = normalized_symbol(&tones, wf.m, wf)?;
        data_symbols.push(symbol);
    }

    let dmrs_refs: Vec<&ComplexSignal> = fixture.dmrs_symbols.iter().collect();
    let rx_dmrs = apply_multi(&dmrs_refs, &realization, snr_db, wf.n_fft, wf.cp_len, &mut noise_rng)?;
    let data_refs: Vec<&ComplexSignal> = data_symbols.iter().collect();
    let rx_data = apply_multi(&data_refs, &realization, snr_db, wf.n_fft, wf.cp_len, &mut noise_rng)?;

    let estimates = estimate_all(fixture, &rx_dmrs, cfg)?;
    let data_tones_rx: Vec<ComplexSignal> = rx_data
        .iter()
        .map(|rx| front_end(rx, wf))
        .collect::<Result<_>>()?;
    let equalized = mmse_equalize(&data_tones_rx, &estimates, noise_variance_per_tone(snr_db))?;

    let mut block_err = Vec::with_capacity(cfg.streams);
    for (stream, eq) in equalized.iter().enumerate() {
        let demod = despread_demod(&eq.tones, eq.time_noise_var(), None)?;
        block_err.push(demod.bits != payloads[stream].bits());
    }
    Ok(SlotOutcome { block_err })
}

fn run_bler(cfg: &ExperimentConfig) -> Result<Records> {
    let fixture = slot_fixture(cfg)?;
    let mut records = Vec::new();
    for (snr_index, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let outcomes: Vec<SlotOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_slot(cfg, &fixture, snr_index, trial))
            .collect::<Result<_>>()?;
        for stream in 0..cfg.streams {
            let errors = outcomes.iter().filter(|o| o.block_err[stream]).count() as u64;
            records.push(BlerRecord {
                snr_db,
                port: stream,
                errors,
                trials: cfg.trials as u64,
                rate: errors as f64 / cfg.trials as f64,
            });
        }
    }
    Ok(Records::Bler(records))
}

// ---------------------------------------------------------------------------
// chanest
// ---------------------------------------------------------------------------

/// Normalized estimation error of one port at one trial, averaged over
/// antennas: |est - truth|^2 / |truth|^2 summed over the M tones, where truth
/// is the composite filter-times-channel response seen by the receiver.
fn estimation_nmse(
    cfg: &ExperimentConfig,
    fixture: &SlotFixture,
    realization: &ChannelRealization,
    estimates: &[Vec<ChannelEstimate>],
) -> Vec<f64> {
    let wf = &cfg.waveform;
    let response = cfg.filter.response(wf.m).expect("filter response");
    let mut out = Vec::with_capacity(cfg.streams);
    for (stream, per_antenna) in estimates.iter().enumerate() {
        let scale = fixture.dmrs_scales[stream];
        let mut acc = 0.0;
        for (antenna, est) in per_antenna.iter().enumerate() {
            let h: Vec<Complex64> = (0..wf.m)
                .map(|k| {
                    let tone = wf.tone_index(k);
                    realization
                        .gains(stream, antenna)
                        .iter()
                        .zip(realization.delays().iter())
                        .map(|(&g, &d)| {
                            g * Complex64::from_polar(
                                1.0,
                                -2.0 * std::f64::consts::PI * (tone * d) as f64
                                    / wf.n_fft as f64,
                            )
                        })
                        .sum()
                })
                .collect();
            let mut err = 0.0;
            let mut energy = 0.0;
            for k in 0..wf.m {
                let truth = response[k] * h[k] * scale;
                err += (est.fullband().samples()[k] - truth).norm_sqr();
                energy += truth.norm_sqr();
            }
            acc += err / energy;
        }
        out.push(acc / per_antenna.len() as f64);
    }
    out
}

fn run_chanest(cfg: &ExperimentConfig) -> Result<Records> {
    let fixture = slot_fixture(cfg)?;
    let mut records = Vec::new();
    for (snr_index, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        let trial_mses: Vec<Vec<f64>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| -> Result<Vec<f64>> {
                let wf = &cfg.waveform;
                let mut channel_rng = rng_for(cfg, seed_domain::CHANNEL, snr_index, trial);
                let mut noise_rng = rng_for(cfg, seed_domain::NOISE, snr_index, trial);
                let realization =
                    draw_realization(&cfg.profile, cfg.streams, cfg.rx_antennas, &mut channel_rng)?;
                let dmrs_refs: Vec<&ComplexSignal> = fixture.dmrs_symbols.iter().collect();
                let rx_dmrs = apply_multi(
                    &dmrs_refs,
                    &realization,
                    snr_db,
                    wf.n_fft,
                    wf.cp_len,
                    &mut noise_rng,
                )?;
                let estimates = estimate_all(&fixture, &rx_dmrs, cfg)?;
                Ok(estimation_nmse(cfg, &fixture, &realization, &estimates))
            })
            .collect::<Result<_>>()?;
        for stream in 0..cfg.streams {
            let mse =
                trial_mses.iter().map(|m| m[stream]).sum::<f64>() / cfg.trials as f64;
            records.push(ChanestRecord {
                snr_db,
                port: stream,
                mse,
            });
        }
    }
    Ok(Records::Chanest(records))
}

// ---------------------------------------------------------------------------
// golden
// ---------------------------------------------------------------------------

fn run_golden(_cfg: &ExperimentConfig) -> Result<Records> {
    let rows = run_golden_checks()?
        .into_iter()
        .map(|r| GoldenRow {
            table: r.table.clone(),
            index: r.index,
            expected_re: r.expected.re,
            expected_im: r.expected.im,
            got_re: r.got.re,
            got_im: r.got.im,
            abs_err: r.abs_err(),
        })
        .collect();
    Ok(Records::Golden(rows))
}

// Used by tests to confirm spectra stay deterministic across plan reuse.
#[allow(dead_code)]
fn spectrum_fingerprint(sig: &ComplexSignal) -> f64 {
    dft_vec(sig.samples()).iter().map(|v| v.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelProfile, Fading};
    use crate::harness::{DenoiseMode, OutputFormat};
    use crate::tx::{Mapping, Normalization, ShapingDomain, ShapingFilter};
    use std::path::PathBuf;

    fn base_cfg(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            waveform: WaveformConfig {
                m: 24,
                n_fft: 32,
                cp_len: 8,
                start_tone: 0,
                mapping: Mapping::Localized,
                shaping: ShapingDomain::Frequency,
            },
            filter: ShapingFilter::three_tap(),
            profile: ChannelProfile::default_exponential(Fading::RayleighBlock),
            snr_grid_db: vec![0.0, 10.0],
            trials: 50,
            seed: 7,
            streams: 1,
            rx_antennas: 2,
            dmrs_type: DmrsType::PiHalfBpsk,
            pilot_source: PilotSource::Random,
            dmrs_index: 0,
            signal: SignalKind::Dmrs,
            port: Port::Port0,
            papr_grid_db: (0..=100).map(|i| i as f64 * 0.1).collect(),
            oversample: 4,
            denoise: DenoiseMode::Auto,
            out_dir: PathBuf::from("."),
            format: OutputFormat::Csv,
            workers: 0,
        }
    }

    #[test]
    fn papr_run_produces_monotone_ccdf() {
        let cfg = base_cfg(ExperimentKind::Papr);
        let out = run_experiment(&cfg).unwrap();
        match out.records {
            Records::Papr(rows) => {
                assert_eq!(rows.len(), cfg.papr_grid_db.len());
                assert!(rows.windows(2).all(|w| w[1].exceedance <= w[0].exceedance));
                assert!(rows.iter().all(|r| r.samples == cfg.trials));
            }
            other => panic!("wrong records: {other:?}"),
        }
    }

    #[test]
    fn papr_port_choice_does_not_change_samples() {
        let mut cfg = base_cfg(ExperimentKind::Papr);
        cfg.trials = 20;
        let p0 = run_experiment(&cfg).unwrap();
        cfg.port = Port::Port1;
        let p1 = run_experiment(&cfg).unwrap();
        assert_eq!(p0.records, p1.records);
    }

    #[test]
    fn bler_run_counts_blocks_per_port() {
        let mut cfg = base_cfg(ExperimentKind::Bler);
        cfg.streams = 2;
        cfg.rx_antennas = 4;
        cfg.trials = 30;
        let out = run_experiment(&cfg).unwrap();
        match out.records {
            Records::Bler(rows) => {
                assert_eq!(rows.len(), cfg.snr_grid_db.len() * 2);
                for r in &rows {
                    assert_eq!(r.trials, 30);
                    assert!((r.rate - r.errors as f64 / 30.0).abs() < 1e-12);
                }
            }
            other => panic!("wrong records: {other:?}"),
        }
    }

    #[test]
    fn bler_high_snr_beats_low_snr() {
        let mut cfg = base_cfg(ExperimentKind::Bler);
        cfg.snr_grid_db = vec![-10.0, 30.0];
        cfg.trials = 60;
        let out = run_experiment(&cfg).unwrap();
        match out.records {
            Records::Bler(rows) => {
                assert!(rows[0].errors >= rows[1].errors);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn chanest_mse_improves_with_snr() {
        let mut cfg = base_cfg(ExperimentKind::Chanest);
        cfg.snr_grid_db = vec![0.0, 20.0];
        cfg.trials = 100;
        let out = run_experiment(&cfg).unwrap();
        match out.records {
            Records::Chanest(rows) => {
                assert!(rows[0].mse > rows[1].mse, "{rows:?}");
                assert!(rows.iter().all(|r| r.mse.is_finite() && r.mse > 0.0));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn golden_run_passes() {
        let cfg = base_cfg(ExperimentKind::Golden);
        let out = run_experiment(&cfg).unwrap();
        assert!(out.golden_pass);
        assert_eq!(out.records.len(), (12 + 6) * 4);
    }

    #[test]
    fn runs_are_deterministic_and_worker_independent() {
        let mut cfg = base_cfg(ExperimentKind::Bler);
        cfg.trials = 40;
        let a = run_experiment(&cfg).unwrap();
        cfg.workers = 1;
        let b = run_experiment(&cfg).unwrap();
        cfg.workers = 4;
        let c = run_experiment(&cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(b.records, c.records);
    }

    #[test]
    fn zc_pilot_chanest_runs() {
        let mut cfg = base_cfg(ExperimentKind::Chanest);
        cfg.dmrs_type = DmrsType::Zc;
        cfg.trials = 20;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 2);
    }
}
