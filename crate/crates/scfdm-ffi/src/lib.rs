//! C ABI for the scfdm link-level simulator.
//!
//! Handles are opaque pointers created and destroyed by this library; every
//! fallible call returns a [`ScfdmStatus`] and leaves a human-readable
//! message retrievable with [`scfdm_last_error_message`]. Complex sample
//! buffers are interleaved `re, im` pairs of `f64`, so a symbol of N complex
//! samples needs a buffer of `2 * N` doubles.

use scfdm::harness::{parse_config, run_experiment, OutputFormat};
use scfdm::metrics::compute_papr;
use scfdm::sequences::BitSequence;
use scfdm::tx::{
    tx_data, tx_dmrs, DmrsResource, Mapping, Normalization, Port, ShapingDomain, ShapingFilter,
    WaveformConfig,
};
use scfdm::ComplexSignal;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScfdmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was outside its allowed range.
    InvalidArgument = 2,
    /// Configuration file or key error.
    Config = 3,
    /// Filesystem error.
    Io = 4,
    /// Golden-vector regression failed.
    GoldenMismatch = 5,
    /// An output buffer was too small.
    BufferTooSmall = 6,
    /// Any other internal error.
    Internal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &scfdm::Error) -> ScfdmStatus {
    match err {
        scfdm::Error::Config(_) => ScfdmStatus::Config,
        scfdm::Error::Io { .. } => ScfdmStatus::Io,
        scfdm::Error::GoldenMismatch(_) => ScfdmStatus::GoldenMismatch,
        _ => ScfdmStatus::InvalidArgument,
    }
}

fn fail(err: scfdm::Error) -> ScfdmStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scfdm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error message of the calling thread into `buf` (truncated
/// to `cap - 1` bytes, always NUL-terminated) and returns the full message
/// length in bytes.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null (then only the
/// length is returned).
#[no_mangle]
pub unsafe extern "C" fn scfdm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Opaque transmitter handle: a waveform configuration plus shaping filter.
pub struct ScfdmTx {
    cfg: WaveformConfig,
    filter: ShapingFilter,
}

/// Creates a transmitter.
///
/// `mapping`: 0 localized, 1 interleaved. `shaping`: 0 frequency-domain,
/// 1 time-domain. `taps`/`taps_len` give the real-valued shaping filter
/// impulse response; `unit_energy` selects tap normalization. Returns null
/// on error (see [`scfdm_last_error_message`]).
///
/// # Safety
/// `taps` must point to `taps_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn scfdm_tx_new(
    m: usize,
    n_fft: usize,
    cp_len: usize,
    start_tone: usize,
    mapping: u32,
    shaping: u32,
    taps: *const f64,
    taps_len: usize,
    unit_energy: bool,
) -> *mut ScfdmTx {
    if taps.is_null() || taps_len == 0 {
        set_error("taps must be a non-empty array");
        return std::ptr::null_mut();
    }
    let mapping = match mapping {
        0 => Mapping::Localized,
        1 => Mapping::Interleaved,
        other => {
            set_error(&format!("mapping must be 0 or 1, got {other}"));
            return std::ptr::null_mut();
        }
    };
    let shaping = match shaping {
        0 => ShapingDomain::Frequency,
        1 => ShapingDomain::Time,
        other => {
            set_error(&format!("shaping must be 0 or 1, got {other}"));
            return std::ptr::null_mut();
        }
    };
    let cfg = WaveformConfig {
        m,
        n_fft,
        cp_len,
        start_tone,
        mapping,
        shaping,
    };
    if let Err(e) = cfg.validate() {
        set_error(&e.to_string());
        return std::ptr::null_mut();
    }
    let norm = if unit_energy {
        Normalization::UnitEnergy
    } else {
        Normalization::None
    };
    let taps = std::slice::from_raw_parts(taps, taps_len);
    match ShapingFilter::from_real(taps, norm) {
        Ok(filter) => Box::into_raw(Box::new(ScfdmTx { cfg, filter })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Destroys a transmitter handle; null is accepted.
///
/// # Safety
/// `tx` must be a pointer from [`scfdm_tx_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn scfdm_tx_free(tx: *mut ScfdmTx) {
    if !tx.is_null() {
        drop(Box::from_raw(tx));
    }
}

/// Complex samples per transmitted symbol (body plus cyclic prefix).
///
/// # Safety
/// `tx` must be a valid transmitter handle.
#[no_mangle]
pub unsafe extern "C" fn scfdm_tx_symbol_len(tx: *const ScfdmTx) -> usize {
    if tx.is_null() {
        return 0;
    }
    (*tx).cfg.symbol_len()
}

unsafe fn write_signal(sig: &ComplexSignal, out_iq: *mut f64, out_len: usize) -> ScfdmStatus {
    if out_iq.is_null() {
        set_error("output buffer is null");
        return ScfdmStatus::NullArgument;
    }
    if out_len < 2 * sig.len() {
        set_error(&format!(
            "output buffer holds {out_len} doubles, need {}",
            2 * sig.len()
        ));
        return ScfdmStatus::BufferTooSmall;
    }
    for (i, v) in sig.samples().iter().enumerate() {
        *out_iq.add(2 * i) = v.re;
        *out_iq.add(2 * i + 1) = v.im;
    }
    ScfdmStatus::Ok
}

unsafe fn bits_from(bits: *const u8, bits_len: usize) -> Result<BitSequence, ScfdmStatus> {
    if bits.is_null() {
        set_error("bits pointer is null");
        return Err(ScfdmStatus::NullArgument);
    }
    BitSequence::new(std::slice::from_raw_parts(bits, bits_len).to_vec()).map_err(fail)
}

/// Generates one shaped data symbol from `bits_len == m` payload bits into
/// `out_iq` (interleaved, at least `2 * symbol_len` doubles).
///
/// # Safety
/// `tx` must be valid; `bits` must point to `bits_len` bytes; `out_iq` must
/// point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn scfdm_tx_data(
    tx: *const ScfdmTx,
    bits: *const u8,
    bits_len: usize,
    out_iq: *mut f64,
    out_len: usize,
) -> ScfdmStatus {
    if tx.is_null() {
        set_error("transmitter handle is null");
        return ScfdmStatus::NullArgument;
    }
    let tx = &*tx;
    let payload = match bits_from(bits, bits_len) {
        Ok(b) => b,
        Err(status) => return status,
    };
    match tx_data(&payload, &tx.filter, &tx.cfg) {
        Ok(sig) => write_signal(&sig, out_iq, out_len),
        Err(e) => fail(e),
    }
}

/// Generates one reference-signal symbol for `port` (0 or 1) from
/// `bits_len == m / 2` pilot bits into `out_iq`.
///
/// # Safety
/// Same contracts as [`scfdm_tx_data`].
#[no_mangle]
pub unsafe extern "C" fn scfdm_tx_dmrs(
    tx: *const ScfdmTx,
    port: u32,
    bits: *const u8,
    bits_len: usize,
    out_iq: *mut f64,
    out_len: usize,
) -> ScfdmStatus {
    if tx.is_null() {
        set_error("transmitter handle is null");
        return ScfdmStatus::NullArgument;
    }
    let tx = &*tx;
    let port = match port {
        0 => Port::Port0,
        1 => Port::Port1,
        other => {
            set_error(&format!("port must be 0 or 1, got {other}"));
            return ScfdmStatus::InvalidArgument;
        }
    };
    let pilot = match bits_from(bits, bits_len) {
        Ok(b) => b,
        Err(status) => return status,
    };
    let res = DmrsResource { port, bits: pilot };
    match tx_dmrs(&res, &tx.filter, &tx.cfg) {
        Ok(sig) => write_signal(&sig, out_iq, out_len),
        Err(e) => fail(e),
    }
}

/// PAPR in dB of `samples` interleaved complex values with the given
/// frequency-domain oversampling factor.
///
/// # Safety
/// `iq` must point to `2 * samples` doubles; `out_db` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scfdm_papr_db(
    iq: *const f64,
    samples: usize,
    oversample: usize,
    out_db: *mut f64,
) -> ScfdmStatus {
    if iq.is_null() || out_db.is_null() {
        set_error("iq and out_db must be non-null");
        return ScfdmStatus::NullArgument;
    }
    if samples == 0 {
        set_error("need at least one sample");
        return ScfdmStatus::InvalidArgument;
    }
    let raw = std::slice::from_raw_parts(iq, 2 * samples);
    let sig = match ComplexSignal::time(
        raw.chunks_exact(2)
            .map(|p| num_complex::Complex64::new(p[0], p[1]))
            .collect(),
    ) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    match compute_papr(&sig, oversample) {
        Ok(v) => {
            *out_db = v;
            ScfdmStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Runs the frozen reference-vector regression.
#[no_mangle]
pub extern "C" fn scfdm_golden_check() -> ScfdmStatus {
    match scfdm::golden::verify_golden() {
        Ok(_) => ScfdmStatus::Ok,
        Err(e) => fail(e),
    }
}

/// Parses an experiment config file and runs it, writing results under
/// `out_dir` (or the config's `out` key when `out_dir` is null) as CSV, or
/// JSON when `use_json` is set.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_dir` likewise or null.
#[no_mangle]
pub unsafe extern "C" fn scfdm_run_config_file(
    path: *const c_char,
    out_dir: *const c_char,
    use_json: bool,
) -> ScfdmStatus {
    if path.is_null() {
        set_error("config path is null");
        return ScfdmStatus::NullArgument;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => PathBuf::from(s),
        Err(_) => {
            set_error("config path is not valid UTF-8");
            return ScfdmStatus::InvalidArgument;
        }
    };
    let mut cfg = match parse_config(&path, None) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if !out_dir.is_null() {
        match CStr::from_ptr(out_dir).to_str() {
            Ok(s) => cfg.out_dir = PathBuf::from(s),
            Err(_) => {
                set_error("out_dir is not valid UTF-8");
                return ScfdmStatus::InvalidArgument;
            }
        }
    }
    if use_json {
        cfg.format = OutputFormat::Json;
    }
    let output = match run_experiment(&cfg) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    if let Err(e) = output.emit(&cfg.out_dir, cfg.format) {
        return fail(e);
    }
    if output.golden_pass {
        ScfdmStatus::Ok
    } else {
        set_error("golden vector mismatch; see the emitted records");
        ScfdmStatus::GoldenMismatch
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn new_tx() -> *mut ScfdmTx {
        let taps = [-0.28, 1.0, -0.28];
        unsafe { scfdm_tx_new(24, 32, 8, 0, 0, 0, taps.as_ptr(), taps.len(), false) }
    }

    #[test]
    fn version_is_non_empty() {
        let v = unsafe { CStr::from_ptr(scfdm_version()) };
        assert!(!v.to_str().unwrap().is_empty());
    }

    #[test]
    fn tx_round_trip_through_the_c_surface() {
        let tx = new_tx();
        assert!(!tx.is_null());
        let symbol_len = unsafe { scfdm_tx_symbol_len(tx) };
        assert_eq!(symbol_len, 40);

        let bits: Vec<u8> = (0..24).map(|i| (i % 3 == 0) as u8).collect();
        let mut iq = vec![0.0f64; 2 * symbol_len];
        let status = unsafe {
            scfdm_tx_data(tx, bits.as_ptr(), bits.len(), iq.as_mut_ptr(), iq.len())
        };
        assert_eq!(status, ScfdmStatus::Ok);
        assert!(iq.iter().any(|&v| v != 0.0));

        // Must agree with the Rust API bit for bit.
        let expected = tx_data(
            &BitSequence::new(bits).unwrap(),
            &ShapingFilter::three_tap(),
            &WaveformConfig {
                m: 24,
                n_fft: 32,
                cp_len: 8,
                start_tone: 0,
                mapping: Mapping::Localized,
                shaping: ShapingDomain::Frequency,
            },
        )
        .unwrap();
        for (i, v) in expected.samples().iter().enumerate() {
            assert_eq!(iq[2 * i], v.re);
            assert_eq!(iq[2 * i + 1], v.im);
        }
        unsafe { scfdm_tx_free(tx) };
    }

    #[test]
    fn dmrs_ports_and_errors() {
        let tx = new_tx();
        let bits = vec![1u8, 1, 1, 0, 1, 1, 0, 0, 1, 0, 1, 1];
        let mut iq = vec![0.0f64; 2 * 40];
        for port in [0u32, 1] {
            let status = unsafe {
                scfdm_tx_dmrs(tx, port, bits.as_ptr(), bits.len(), iq.as_mut_ptr(), iq.len())
            };
            assert_eq!(status, ScfdmStatus::Ok);
        }
        let status = unsafe {
            scfdm_tx_dmrs(tx, 2, bits.as_ptr(), bits.len(), iq.as_mut_ptr(), iq.len())
        };
        assert_eq!(status, ScfdmStatus::InvalidArgument);

        // Wrong pilot length reports through the status and message.
        let status = unsafe {
            scfdm_tx_dmrs(tx, 0, bits.as_ptr(), 5, iq.as_mut_ptr(), iq.len())
        };
        assert_eq!(status, ScfdmStatus::InvalidArgument);
        let mut buf = vec![0 as c_char; 128];
        let len = unsafe { scfdm_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert!(len > 0);
        unsafe { scfdm_tx_free(tx) };
    }

    #[test]
    fn buffer_too_small_is_reported() {
        let tx = new_tx();
        let bits: Vec<u8> = vec![0; 24];
        let mut iq = vec![0.0f64; 10];
        let status = unsafe {
            scfdm_tx_data(tx, bits.as_ptr(), bits.len(), iq.as_mut_ptr(), iq.len())
        };
        assert_eq!(status, ScfdmStatus::BufferTooSmall);
        unsafe { scfdm_tx_free(tx) };
    }

    #[test]
    fn papr_of_constant_envelope_is_zero() {
        let iq: Vec<f64> = (0..64)
            .flat_map(|i| {
                let p = 0.3 * i as f64;
                [p.cos(), p.sin()]
            })
            .collect();
        let mut out = f64::NAN;
        let status = unsafe { scfdm_papr_db(iq.as_ptr(), 64, 1, &mut out) };
        assert_eq!(status, ScfdmStatus::Ok);
        assert!(out.abs() < 1e-9);
    }

    #[test]
    fn golden_check_passes() {
        assert_eq!(scfdm_golden_check(), ScfdmStatus::Ok);
    }

    #[test]
    fn run_config_file_smoke() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("golden.cfg");
        std::fs::write(&cfg_path, "kind = golden\n").unwrap();
        let c_path = CString::new(cfg_path.to_str().unwrap()).unwrap();
        let c_out = CString::new(dir.path().to_str().unwrap()).unwrap();
        let status =
            unsafe { scfdm_run_config_file(c_path.as_ptr(), c_out.as_ptr(), false) };
        assert_eq!(status, ScfdmStatus::Ok);
        assert!(dir.path().join("golden.csv").exists());
    }
}
