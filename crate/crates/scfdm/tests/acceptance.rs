//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scfdm::channel::{apply_multi, draw_realization, ChannelProfile, ChannelRealization, Fading};
use scfdm::harness::pool::flattest_pilot;
use scfdm::harness::{
    parse_config, run_experiment, DenoiseMode, DmrsType, ExperimentConfig, ExperimentKind,
    OutputFormat, PilotSource, Records, SignalKind,
};
use scfdm::metrics::compute_papr;
use scfdm::rx::{
    despread_demod, estimate_port, front_end, mmse_equalize, DenoiseWindow,
};
use scfdm::sequences::{load_dmrs_bits, pi_half_bpsk, random_pilot_bits, BitSequence, SequenceSource};
use scfdm::tx::{
    data_tones, dmrs_tones, dmrs_tones_port1_unaligned, tx_data, tx_dmrs, DmrsResource, Mapping,
    Port, ShapingDomain, ShapingFilter, WaveformConfig,
};
use scfdm::ComplexSignal;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {criterion}: {verdict} — {detail}");
    assert!(pass, "{criterion} failed: {detail}");
}

fn wf(m: usize, n: usize, cp: usize, shaping: ShapingDomain) -> WaveformConfig {
    WaveformConfig {
        m,
        n_fft: n,
        cp_len: cp,
        start_tone: 0,
        mapping: Mapping::Localized,
        shaping,
    }
}

fn body(symbol: &ComplexSignal, cp: usize) -> ComplexSignal {
    ComplexSignal::time(symbol.samples()[cp..].to_vec()).unwrap()
}

fn base_experiment(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        waveform: wf(24, 32, 8, ShapingDomain::Frequency),
        filter: ShapingFilter::three_tap(),
        profile: ChannelProfile::default_exponential(Fading::RayleighBlock),
        snr_grid_db: vec![],
        trials: 1,
        seed: 20_260_809,
        streams: 1,
        rx_antennas: 2,
        dmrs_type: DmrsType::PiHalfBpsk,
        pilot_source: PilotSource::Random,
        dmrs_index: 0,
        signal: SignalKind::Dmrs,
        port: Port::Port0,
        papr_grid_db: (0..=600).map(|i| i as f64 * 0.02).collect(),
        oversample: 4,
        denoise: DenoiseMode::Auto,
        out_dir: std::env::temp_dir(),
        format: OutputFormat::Csv,
        workers: 0,
    }
}

// -----------------------------------------------------------------------
// 1. Golden vectors
// -----------------------------------------------------------------------

#[test]
fn criterion_1_golden_vectors() {
    let start = Instant::now();
    let records = scfdm::golden::verify_golden().expect("golden verification");
    let elapsed = start.elapsed();
    let worst_tone = records
        .iter()
        .filter(|r| r.table.starts_with("pilot_tones"))
        .map(|r| r.abs_err())
        .fold(0.0f64, f64::max);
    let worst_cir = records
        .iter()
        .filter(|r| r.table.starts_with("effective_cir"))
        .map(|r| r.abs_err())
        .fold(0.0f64, f64::max);
    report(
        "criterion 1 (golden vectors)",
        worst_tone <= 1e-3 && worst_cir <= 1e-10 && elapsed.as_secs_f64() < 1.0,
        &format!(
            "tone err {worst_tone:.2e} (tol 1e-3), cir err {worst_cir:.2e} (tol 1e-10), {} checks in {:.0} ms",
            records.len(),
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

// -----------------------------------------------------------------------
// 2. Method equivalence
// -----------------------------------------------------------------------

#[test]
fn criterion_2_method_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..60 {
        for m in [12usize, 24, 48] {
            for filter in [ShapingFilter::two_tap(), ShapingFilter::three_tap()] {
                let freq = wf(m, 2 * m, 8, ShapingDomain::Frequency);
                let time = wf(m, 2 * m, 8, ShapingDomain::Time);

                let payload = BitSequence::new(
                    (0..m).map(|_| rng.gen_range(0..=1u8)).collect(),
                )
                .unwrap();
                let a = tx_data(&payload, &filter, &freq).unwrap();
                let b = tx_data(&payload, &filter, &time).unwrap();
                worst = worst.max(a.max_abs_diff(&b));
                cases += 1;

                let pilot = BitSequence::new(
                    (0..m / 2).map(|_| rng.gen_range(0..=1u8)).collect(),
                )
                .unwrap();
                for port in Port::all() {
                    let res = DmrsResource {
                        port,
                        bits: pilot.clone(),
                    };
                    let a = tx_dmrs(&res, &filter, &freq).unwrap();
                    let b = tx_dmrs(&res, &filter, &time).unwrap();
                    worst = worst.max(a.max_abs_diff(&b));
                    cases += 1;
                }
            }
        }
    }
    report(
        "criterion 2 (method equivalence)",
        cases >= 1000 && worst < 1e-9,
        &format!("{cases} randomized cases, worst deviation {worst:.2e} (tol 1e-9)"),
    );
}

// -----------------------------------------------------------------------
// 3. Port identity
// -----------------------------------------------------------------------

#[test]
fn criterion_3_port_identity() {
    // (a) per-trial reference-signal PAPR is identical across ports.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = wf(48, 96, 8, ShapingDomain::Frequency);
    let mut worst_papr_gap = 0.0f64;
    for _ in 0..200 {
        let bits = random_pilot_bits(24, &mut rng).unwrap();
        for filter in [ShapingFilter::two_tap(), ShapingFilter::three_tap()] {
            let paprs: Vec<f64> = Port::all()
                .into_iter()
                .map(|port| {
                    let sym = tx_dmrs(
                        &DmrsResource {
                            port,
                            bits: bits.clone(),
                        },
                        &filter,
                        &cfg,
                    )
                    .unwrap();
                    compute_papr(&body(&sym, cfg.cp_len), 4).unwrap()
                })
                .collect();
            worst_papr_gap = worst_papr_gap.max((paprs[0] - paprs[1]).abs());
        }
    }

    // (b) two-stream error rates are identical when both ports carry the
    // same payload over mirrored (identical) per-antenna channels. The
    // reference symbol is received cleanly so the estimates are exact and
    // the two streams see a perfectly symmetric equalization problem; data
    // noise is still present.
    let m = 24;
    let chain = wf(m, 32, 8, ShapingDomain::Frequency);
    let filter = ShapingFilter::three_tap();
    let pilot = flattest_pilot(m / 2).unwrap();
    let window = DenoiseWindow::from_waveform(&chain).unwrap();
    let flat = ChannelProfile::flat(Fading::RayleighBlock);
    let snr_db = 4.0;
    let noise_var = scfdm::channel::noise_variance_per_tone(snr_db);
    let mut bit_errors = [0u64; 2];
    let mut block_errors = [0u64; 2];
    let trials = 400;
    for trial in 0..trials {
        let mut chan_rng = ChaCha8Rng::seed_from_u64(3000 + trial);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(9000 + trial);
        // One flat draw per antenna, assigned to both ports (mirrored).
        let single = draw_realization(&flat, 1, 2, &mut chan_rng).unwrap();
        let gains = vec![
            vec![single.gains(0, 0).to_vec(), single.gains(0, 1).to_vec()],
            vec![single.gains(0, 0).to_vec(), single.gains(0, 1).to_vec()],
        ];
        let real = ChannelRealization::from_gains(vec![0], gains).unwrap();

        let payload = BitSequence::new(
            (0..m).map(|i| (((trial as usize) >> (i % 8)) as u8 ^ i as u8) & 1).collect(),
        )
        .unwrap();
        let dtones = data_tones(&payload, &filter, &chain).unwrap();
        let es = dtones.energy() / m as f64;
        let dsym = scfdm::tx::assemble_symbol(&dtones.scaled(1.0 / es.sqrt()), &chain).unwrap();

        let mut dmrs_syms = Vec::new();
        for port in Port::all() {
            let tones = dmrs_tones(
                &DmrsResource {
                    port,
                    bits: pilot.clone(),
                },
                &filter,
                &chain,
            )
            .unwrap();
            let es = tones.energy() / (m / 2) as f64;
            dmrs_syms
                .push(scfdm::tx::assemble_symbol(&tones.scaled(1.0 / es.sqrt()), &chain).unwrap());
        }

        let rx_dmrs = apply_multi(
            &[&dmrs_syms[0], &dmrs_syms[1]],
            &real,
            f64::INFINITY,
            chain.n_fft,
            chain.cp_len,
            &mut noise_rng,
        )
        .unwrap();
        let rx_data = apply_multi(
            &[&dsym, &dsym],
            &real,
            snr_db,
            chain.n_fft,
            chain.cp_len,
            &mut noise_rng,
        )
        .unwrap();

        let mut estimates = Vec::new();
        for port in Port::all() {
            let mut per_antenna = Vec::new();
            for rx in &rx_dmrs {
                let tones = front_end(rx, &chain).unwrap();
                per_antenna.push(
                    estimate_port(
                        &tones,
                        &DmrsResource {
                            port,
                            bits: pilot.clone(),
                        },
                        &window,
                    )
                    .unwrap(),
                );
            }
            estimates.push(per_antenna);
        }
        let data_rx: Vec<ComplexSignal> = rx_data
            .iter()
            .map(|rx| front_end(rx, &chain).unwrap())
            .collect();
        let eq = mmse_equalize(&data_rx, &estimates, noise_var).unwrap();
        let mut decoded = Vec::new();
        for stream in &eq {
            decoded.push(despread_demod(&stream.tones, stream.time_noise_var(), None).unwrap());
        }
        assert_eq!(
            decoded[0].bits, decoded[1].bits,
            "streams decoded differently at trial {trial}"
        );
        for (s, d) in decoded.iter().enumerate() {
            let errs = d
                .bits
                .iter()
                .zip(payload.bits())
                .filter(|(a, b)| a != b)
                .count() as u64;
            bit_errors[s] += errs;
            block_errors[s] += u64::from(errs > 0);
        }
    }
    report(
        "criterion 3 (port identity)",
        worst_papr_gap < 1e-9 && bit_errors[0] == bit_errors[1] && bit_errors[0] > 0,
        &format!(
            "PAPR gap {worst_papr_gap:.2e} (tol 1e-9); two-stream errors port0 {} == port1 {} over {trials} trials (block errors {}/{})",
            bit_errors[0], bit_errors[1], block_errors[0], block_errors[1]
        ),
    );
}

// -----------------------------------------------------------------------
// 4. PAPR gaps at desk scale
// -----------------------------------------------------------------------

fn papr_at_1e3(cfg: &ExperimentConfig) -> f64 {
    let out = run_experiment(cfg).unwrap();
    match out.records {
        Records::Papr(rows) => rows
            .iter()
            .find(|r| r.exceedance <= 1e-3)
            .map(|r| r.papr_db)
            .expect("CCDF never reached 1e-3"),
        _ => unreachable!(),
    }
}

#[test]
fn criterion_4_papr_gaps() {
    let trials = 100_000;

    // 3-tap shaped pi/2-BPSK pilots from the curated stand-in pool.
    let mut bpsk = base_experiment(ExperimentKind::Papr);
    bpsk.waveform = wf(192, 384, 0, ShapingDomain::Time);
    bpsk.trials = trials;
    bpsk.pilot_source = PilotSource::DesignedPool;
    let b = papr_at_1e3(&bpsk);

    // Sequence-valued ZC pilots, standard root set, with and without shaping.
    let mut zc_raw = bpsk.clone();
    zc_raw.dmrs_type = DmrsType::Zc;
    zc_raw.pilot_source = PilotSource::Random;
    zc_raw.filter = ShapingFilter::identity();
    let u = papr_at_1e3(&zc_raw);

    let mut zc_shaped = zc_raw.clone();
    zc_shaped.filter = ShapingFilter::three_tap();
    let s = papr_at_1e3(&zc_shaped);

    // 3-tap shaped pi/2-BPSK data, length 96.
    let mut data = base_experiment(ExperimentKind::Papr);
    data.waveform = wf(96, 192, 0, ShapingDomain::Time);
    data.trials = trials;
    data.signal = SignalKind::Data;
    let d = papr_at_1e3(&data);

    let unshaped_gap = u - b;
    let shaped_gap = s - b;
    report(
        "criterion 4 (PAPR gaps)",
        (2.3..=3.3).contains(&unshaped_gap) && (1.5..=2.5).contains(&shaped_gap) && d < 2.5,
        &format!(
            "at CCDF 1e-3 over {trials} symbols: unshaped ZC {u:.2} dB - shaped pilot {b:.2} dB = {unshaped_gap:.2} dB (want 2.8±0.5); \
             shaped ZC {s:.2} dB gap {shaped_gap:.2} dB (want 2.0±0.5); shaped data {d:.2} dB (< 2.5)"
        ),
    );
}

// -----------------------------------------------------------------------
// 5. Channel-estimation exactness and pilot-family equivalence
// -----------------------------------------------------------------------

#[test]
fn criterion_5_channel_estimation() {
    // (a) Noiseless exactness at M = 24 and end-to-end error-free decoding.
    let m = 24;
    let chain = wf(m, m, 4, ShapingDomain::Frequency);
    let filter = ShapingFilter::three_tap();
    let pilot = flattest_pilot(m / 2).unwrap();
    let res = DmrsResource {
        port: Port::Port0,
        bits: pilot,
    };
    let window = DenoiseWindow::new(5, 0).unwrap(); // filter 3 + channel 3 - 1
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_tone_err = 0.0f64;
    let mut bit_errors = 0usize;
    for _ in 0..50 {
        let taps: Vec<Complex64> = (0..3)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let real =
            ChannelRealization::from_gains(vec![0, 1, 2], vec![vec![taps.clone()]]).unwrap();

        let dmrs_sym = tx_dmrs(&res, &filter, &chain).unwrap();
        let rx_dmrs = apply_multi(
            &[&dmrs_sym],
            &real,
            f64::INFINITY,
            chain.n_fft,
            chain.cp_len,
            &mut rng,
        )
        .unwrap();
        let est = estimate_port(&front_end(&rx_dmrs[0], &chain).unwrap(), &res, &window).unwrap();
        let response = filter.response(m).unwrap();
        let h = real.frequency_response(0, 0, chain.n_fft);
        for k in 0..m {
            let truth = response[k] * h[k];
            worst_tone_err = worst_tone_err.max((est.fullband().samples()[k] - truth).norm());
        }

        let payload = BitSequence::new((0..m).map(|_| rng.gen_range(0..=1u8)).collect()).unwrap();
        let data_sym = tx_data(&payload, &filter, &chain).unwrap();
        let rx_data = apply_multi(
            &[&data_sym],
            &real,
            f64::INFINITY,
            chain.n_fft,
            chain.cp_len,
            &mut rng,
        )
        .unwrap();
        let eq = mmse_equalize(
            &[front_end(&rx_data[0], &chain).unwrap()],
            &[vec![est]],
            0.0,
        )
        .unwrap();
        let decoded = despread_demod(&eq[0].tones, eq[0].time_noise_var(), None).unwrap();
        bit_errors += decoded
            .bits
            .iter()
            .zip(payload.bits())
            .filter(|(a, b)| a != b)
            .count();
    }

    // (b) Estimation quality of pi/2-BPSK pilots tracks the flat Zadoff-Chu
    // baseline within 0.5 dB across 0..20 dB SNR, 1e4 paired trials/point.
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("pilots.txt");
    let flattest = flattest_pilot(12).unwrap();
    let row: Vec<String> = flattest.bits().iter().map(|b| b.to_string()).collect();
    std::fs::write(&table, format!("{}\n", row.join(" "))).unwrap();

    let mut bpsk = base_experiment(ExperimentKind::Chanest);
    bpsk.waveform = wf(24, 32, 8, ShapingDomain::Frequency);
    bpsk.profile = ChannelProfile::from_file(
        std::path::Path::new(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/assets/tdlc300_desk.txt"
        )),
        Fading::RayleighBlock,
    )
    .unwrap();
    bpsk.snr_grid_db = vec![0.0, 5.0, 10.0, 15.0, 20.0];
    bpsk.trials = 10_000;
    bpsk.pilot_source = PilotSource::Table(SequenceSource::File(table));

    let mut zc = bpsk.clone();
    zc.dmrs_type = DmrsType::Zc;
    zc.pilot_source = PilotSource::DesignedPool;
    zc.dmrs_index = 2; // root 3 of the length-11 prime

    let mse_b = match run_experiment(&bpsk).unwrap().records {
        Records::Chanest(rows) => rows,
        _ => unreachable!(),
    };
    let mse_z = match run_experiment(&zc).unwrap().records {
        Records::Chanest(rows) => rows,
        _ => unreachable!(),
    };
    let mut worst_ratio_db = 0.0f64;
    let mut detail = String::new();
    for (b, z) in mse_b.iter().zip(mse_z.iter()) {
        assert_eq!(b.snr_db, z.snr_db);
        let ratio_db = 10.0 * (b.mse / z.mse).log10();
        worst_ratio_db = worst_ratio_db.max(ratio_db.abs());
        detail.push_str(&format!("{}dB:{:+.2} ", b.snr_db, ratio_db));
    }

    report(
        "criterion 5 (channel estimation)",
        worst_tone_err < 1e-9 && bit_errors == 0 && worst_ratio_db <= 0.5,
        &format!(
            "noiseless fullband err {worst_tone_err:.2e} (tol 1e-9), end-to-end bit errors {bit_errors}; \
             pilot-family MSE ratio per SNR [{}] worst {worst_ratio_db:.3} dB (tol 0.5)",
            detail.trim_end()
        ),
    );
}

// -----------------------------------------------------------------------
// 6. Negative control: comb realignment disabled
// -----------------------------------------------------------------------

#[test]
fn criterion_6_negative_control() {
    let chain = wf(12, 12, 0, ShapingDomain::Frequency);
    let filter = ShapingFilter::three_tap();
    let bits = load_dmrs_bits(6, 0, &SequenceSource::BuiltIn).unwrap();
    let p0 = dmrs_tones(
        &DmrsResource {
            port: Port::Port0,
            bits: bits.clone(),
        },
        &filter,
        &chain,
    )
    .unwrap();
    let base = pi_half_bpsk(&bits).unwrap();
    let broken = dmrs_tones_port1_unaligned(&base, &filter, &chain).unwrap();
    let mut max_rel = 0.0f64;
    for k in 0..6 {
        let a = p0.samples()[2 * k];
        let b = broken.samples()[2 * k + 1];
        max_rel = max_rel.max((a - b).norm() / a.norm());
    }
    report(
        "criterion 6 (negative control)",
        max_rel > 0.01,
        &format!("without realignment the shaped port tones deviate by {:.1}% (> 1%)", max_rel * 100.0),
    );
}

// -----------------------------------------------------------------------
// 7. Reproducibility
// -----------------------------------------------------------------------

#[test]
fn criterion_7_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bler.cfg");
    std::fs::write(
        &cfg_path,
        "kind = bler\nm = 24\nn_fft = 32\ncp_len = 8\nsnr_db = 0,6\ntrials = 200\n\
         seed = 99\nstreams = 2\nrx_antennas = 2\ndmrs_source = pool\n",
    )
    .unwrap();

    let mut outputs = Vec::new();
    for workers in [0usize, 1, 3] {
        let mut cfg = parse_config(&cfg_path, None).unwrap();
        cfg.workers = workers;
        let out = run_experiment(&cfg).unwrap();
        let sub = dir.path().join(format!("w{workers}"));
        let path = out.emit(&sub, OutputFormat::Csv).unwrap();
        outputs.push(std::fs::read(path).unwrap());
    }
    // And a straight rerun of the first configuration.
    let cfg = parse_config(&cfg_path, None).unwrap();
    let out = run_experiment(&cfg).unwrap();
    let path = out.emit(&dir.path().join("rerun"), OutputFormat::Csv).unwrap();
    outputs.push(std::fs::read(path).unwrap());

    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    report(
        "criterion 7 (reproducibility)",
        identical && !outputs[0].is_empty(),
        &format!(
            "byte-identical CSV across worker counts 0/1/3 and rerun ({} bytes)",
            outputs[0].len()
        ),
    );
}
