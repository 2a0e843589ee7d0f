//! C ABI over the multifault library.
//!
//! Every function returns an [`MfStatus`]; on failure a description is kept
//! per thread and read with [`mf_last_error_message`]. Objects cross the
//! boundary as opaque handles that the caller releases with the matching
//! `_free` function. Buffers are caller-owned: functions that fill a buffer
//! take its capacity, always report the required length through `written`,
//! and return `MF_STATUS_BUFFER_TOO_SMALL` without writing when it is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use multifault::features::{MachineSignals, Observation, FEATURE_COUNT};
use multifault::mlc::{iso_severity_lookup, MachineClass, Severity};
use multifault::pipeline::ModelBundle;
use multifault::sigsim::{SignalRecord, Units};
use multifault::spectral::{self, TaperSet};
use multifault::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Number of channels in one observation: generator currents a, b, c and
/// vibration, then the same four for the motor.
pub const MF_CHANNEL_COUNT: usize = 8;
pub const MF_LABEL_COUNT: usize = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MfDiagnosis {
    pub is_unbalance: u8,
    pub is_misalignment: u8,
    /// Tree prediction, 0 = good through 3 = unacceptable.
    pub severity: i32,
    /// Chart lookup of the larger vibration RMS, same coding.
    pub chart_severity: i32,
    pub vibration_rms_mm_s: [f64; 2],
}

/// DPSS taper set.
pub struct MfTaperSet(TaperSet);

/// Trained model bundle.
pub struct MfModel(ModelBundle);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let mut msg = msg.into();
    msg.retain(|c| c != '\0');
    let text = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(MfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = status_of(&e);
        let mut msg = e.to_string();
        let mut src = std::error::Error::source(&e);
        while let Some(s) = src {
            msg.push_str(": ");
            msg.push_str(&s.to_string());
            src = s.source();
        }
        Failure(status, msg)
    }
}

fn status_of(e: &Error) -> MfStatus {
    match e {
        Error::Io { .. } => MfStatus::Io,
        Error::Csv(_)
        | Error::Json(_)
        | Error::CsvRow { .. }
        | Error::MissingColumn(_)
        | Error::UnknownSeverity(_) => MfStatus::Parse,
        Error::NonConvergence(_) => MfStatus::Numerical,
        Error::Sample { source, .. } => status_of(source),
        _ => MfStatus::InvalidArgument,
    }
}

fn fail(status: MfStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

type FfiResult = std::result::Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> MfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            MfStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> std::result::Result<(), Failure> {
    if p.is_null() {
        Err(fail(MfStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

unsafe fn input<'a>(
    p: *const f64,
    len: usize,
    name: &str,
) -> std::result::Result<&'a [f64], Failure> {
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies `values` into the caller's buffer after checking its capacity.
unsafe fn emit(values: &[f64], out: *mut f64, out_len: usize, written: *mut usize) -> FfiResult {
    non_null(written, "written")?;
    *written = values.len();
    if out_len < values.len() {
        return Err(fail(
            MfStatus::BufferTooSmall,
            format!("buffer holds {out_len} values, {} needed", values.len()),
        ));
    }
    non_null(out, "out")?;
    std::ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn machine_class(code: i32) -> std::result::Result<MachineClass, Failure> {
    usize::try_from(code)
        .ok()
        .and_then(|i| MachineClass::ALL.get(i).copied())
        .ok_or_else(|| {
            fail(
                MfStatus::InvalidArgument,
                format!("machine class {code} is not 0..=3"),
            )
        })
}

fn severity_code(s: Severity) -> i32 {
    Severity::ALL.iter().position(|&v| v == s).unwrap_or(0) as i32
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn mf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Looks up the severity zone (0..=3) of an RMS vibration velocity in mm/s
/// for machine class 0..=3 (I..IV).
///
/// # Safety
/// `out_severity` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_iso_severity(
    v_rms_mm_s: f64,
    machine_class_code: i32,
    out_severity: *mut i32,
) -> MfStatus {
    guard(|| {
        non_null(out_severity, "out_severity")?;
        let s = iso_severity_lookup(v_rms_mm_s, machine_class(machine_class_code)?)?;
        *out_severity = severity_code(s);
        Ok(())
    })
}

/// Computes `k` DPSS tapers of length `n` with time-bandwidth product `nw`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_taper_set_new(
    n: usize,
    nw: f64,
    k: usize,
    out: *mut *mut MfTaperSet,
) -> MfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = std::ptr::null_mut();
        let set = spectral::dpss_tapers(n, nw, k)?;
        *out = Box::into_raw(Box::new(MfTaperSet(set)));
        Ok(())
    })
}

/// Copies taper `index` (length `n`) into `out`.
///
/// # Safety
/// `set` must come from [`mf_taper_set_new`]; `out` must hold `out_len`
/// values; `written` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_taper_set_get(
    set: *const MfTaperSet,
    index: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> MfStatus {
    guard(|| {
        non_null(set, "set")?;
        let set = &(*set).0;
        let taper = set.tapers.get(index).ok_or_else(|| {
            fail(
                MfStatus::InvalidArgument,
                format!("taper {index} of {}", set.k),
            )
        })?;
        emit(taper, out, out_len, written)
    })
}

/// Fraction of taper `index`'s energy inside the design band.
///
/// # Safety
/// `set` must come from [`mf_taper_set_new`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_taper_set_concentration(
    set: *const MfTaperSet,
    index: usize,
    out: *mut f64,
) -> MfStatus {
    guard(|| {
        non_null(set, "set")?;
        non_null(out, "out")?;
        let set = &(*set).0;
        *out = *set.concentrations.get(index).ok_or_else(|| {
            fail(
                MfStatus::InvalidArgument,
                format!("taper {index} of {}", set.k),
            )
        })?;
        Ok(())
    })
}

/// # Safety
/// `set` must come from [`mf_taper_set_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mf_taper_set_free(set: *mut MfTaperSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// One-sided FFT amplitude spectrum of `n` samples; bin `i` is at
/// `i * fs_hz / n` and `n / 2 + 1` values are produced.
///
/// # Safety
/// `samples` must hold `n` values, `out` `out_len` values; `written` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_fft_magnitude(
    samples: *const f64,
    n: usize,
    fs_hz: f64,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> MfStatus {
    guard(|| {
        let sig = SignalRecord::new(
            "x",
            fs_hz,
            input(samples, n, "samples")?.to_vec(),
            Units::Ampere,
        )?;
        emit(
            &spectral::fft_magnitude(&sig)?.magnitudes,
            out,
            out_len,
            written,
        )
    })
}

/// One-sided multitaper PSD of `n` samples with `k` DPSS tapers; bin `i` is
/// at `i * fs_hz / n` and `n / 2 + 1` values are produced.
///
/// # Safety
/// `samples` must hold `n` values, `out` `out_len` values; `written` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_multitaper_psd(
    samples: *const f64,
    n: usize,
    fs_hz: f64,
    nw: f64,
    k: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> MfStatus {
    guard(|| {
        let sig = SignalRecord::new(
            "x",
            fs_hz,
            input(samples, n, "samples")?.to_vec(),
            Units::Ampere,
        )?;
        emit(
            &spectral::multitaper_psd(&sig, nw, k)?.power,
            out,
            out_len,
            written,
        )
    })
}

/// Loads a model bundle written by the `train` command.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_model_load(path: *const c_char, out: *mut *mut MfModel) -> MfStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        *out = std::ptr::null_mut();
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(MfStatus::InvalidArgument, "path is not UTF-8"))?;
        let bundle = ModelBundle::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(MfModel(bundle)));
        Ok(())
    })
}

/// Length of the raw feature vector the model expects.
///
/// # Safety
/// `model` must come from [`mf_model_load`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_model_num_features(model: *const MfModel, out: *mut usize) -> MfStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = FEATURE_COUNT;
        Ok(())
    })
}

/// Number of samples per channel the model's feature extractor expects.
///
/// # Safety
/// `model` must come from [`mf_model_load`]; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_model_samples_per_channel(
    model: *const MfModel,
    out: *mut usize,
) -> MfStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        *out = (*model).0.setup.timebase.len();
        Ok(())
    })
}

/// Predicts the unbalance and misalignment labels from an unscaled feature
/// vector; `labels` receives [`MF_LABEL_COUNT`] values.
///
/// # Safety
/// `model` must come from [`mf_model_load`]; `features` must hold `len`
/// values and `labels` two.
#[no_mangle]
pub unsafe extern "C" fn mf_model_predict(
    model: *const MfModel,
    features: *const f64,
    len: usize,
    labels: *mut u8,
) -> MfStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(labels, "labels")?;
        let raw =
            multifault::features::FeatureVector::new(input(features, len, "features")?.to_vec())?;
        let pred = (*model).0.predict_labels(&raw)?;
        std::ptr::copy_nonoverlapping(pred.as_ptr(), labels, MF_LABEL_COUNT);
        Ok(())
    })
}

/// Predicts the severity zone from the generator and motor vibration RMS.
///
/// # Safety
/// `model` must come from [`mf_model_load`]; `out_severity` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_model_predict_severity(
    model: *const MfModel,
    vib_rms_generator: f64,
    vib_rms_motor: f64,
    out_severity: *mut i32,
) -> MfStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out_severity, "out_severity")?;
        let s = (*model)
            .0
            .severity
            .predict(&[vib_rms_generator, vib_rms_motor])?;
        *out_severity = severity_code(s);
        Ok(())
    })
}

unsafe fn observation(
    bundle: &ModelBundle,
    channels: *const f64,
    n_per_channel: usize,
) -> std::result::Result<Observation, Failure> {
    let all = input(channels, n_per_channel * MF_CHANNEL_COUNT, "channels")?;
    let fs = bundle.setup.timebase.fs_hz;
    let mut chunks = all.chunks_exact(n_per_channel.max(1));
    let mut machine = |name: &str| -> std::result::Result<MachineSignals, Failure> {
        let mut next = |suffix: &str, units| -> std::result::Result<SignalRecord, Failure> {
            let data = chunks
                .next()
                .ok_or_else(|| fail(MfStatus::InvalidArgument, "no samples"))?;
            Ok(SignalRecord::new(
                format!("{name}.{suffix}"),
                fs,
                data.to_vec(),
                units,
            )?)
        };
        Ok(MachineSignals {
            currents: [
                next("ia", Units::Ampere)?,
                next("ib", Units::Ampere)?,
                next("ic", Units::Ampere)?,
            ],
            vibration: next("vib", Units::MmPerS)?,
        })
    };
    let generator = machine(&bundle.setup.machines[0].name)?;
    let motor = machine(&bundle.setup.machines[1].name)?;
    Ok(Observation {
        machines: [generator, motor],
    })
}

/// Extracts the unscaled feature vector of one observation. `channels`
/// holds [`MF_CHANNEL_COUNT`] consecutive blocks of `n_per_channel` samples.
///
/// # Safety
/// `model` must come from [`mf_model_load`]; `channels` must hold
/// `8 * n_per_channel` values, `out` `out_len` values; `written` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_model_extract_features(
    model: *const MfModel,
    channels: *const f64,
    n_per_channel: usize,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> MfStatus {
    guard(|| {
        non_null(model, "model")?;
        let bundle = &(*model).0;
        let obs = observation(bundle, channels, n_per_channel)?;
        let extractor = bundle.setup.extractor()?;
        let cfgs = [&bundle.setup.machines[0], &bundle.setup.machines[1]];
        let raw = extractor.extract(&obs, &bundle.baseline, cfgs)?;
        emit(&raw.values, out, out_len, written)
    })
}

/// Full diagnosis of one observation laid out as for
/// [`mf_model_extract_features`].
///
/// # Safety
/// `model` must come from [`mf_model_load`]; `channels` must hold
/// `8 * n_per_channel` values; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_model_diagnose(
    model: *const MfModel,
    channels: *const f64,
    n_per_channel: usize,
    out: *mut MfDiagnosis,
) -> MfStatus {
    guard(|| {
        non_null(model, "model")?;
        non_null(out, "out")?;
        let bundle = &(*model).0;
        let d = bundle.diagnose(&observation(bundle, channels, n_per_channel)?)?;
        *out = MfDiagnosis {
            is_unbalance: d.is_unbalance,
            is_misalignment: d.is_misalignment,
            severity: severity_code(d.severity),
            chart_severity: severity_code(d.chart_severity),
            vibration_rms_mm_s: d.vibration_rms_mm_s,
        };
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`mf_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mf_model_free(model: *mut MfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
