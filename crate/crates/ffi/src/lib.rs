//! C interface to the random-grating library.
//!
//! Objects are exposed as opaque handles created by `rg_*_new`/`rg_*_load`
//! style functions and released with the matching `rg_*_free`. Every
//! fallible call returns an [`RgStatus`]; the message of the most recent
//! failure on the calling thread is available from [`rg_last_error`].
//! Array getters follow one convention: the required length is always
//! written to `*len`, and data is copied only if `capacity` suffices.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use random_grating::config::RunConfig;
use random_grating::forward::dataset::{generate_dataset, ScatterDataset};
use random_grating::harness;
use random_grating::stats::{mcch_run, reconstruction_stats, McchOutcome, ReconstructionStats};
use random_grating::surface::sample_realization;
use random_grating::{Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Numerical = 3,
    Io = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Run configuration handle.
pub struct RgConfig(RunConfig);
/// Measurement dataset handle.
pub struct RgDataset(ScatterDataset);
/// Reconstructed ensemble handle.
pub struct RgEnsemble(McchOutcome);
/// Ensemble statistics handle.
pub struct RgStats(ReconstructionStats);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RgStatus {
    match e.kind() {
        ErrorKind::Config => RgStatus::Config,
        ErrorKind::Numerical => RgStatus::Numerical,
        ErrorKind::Io => RgStatus::Io,
    }
}

enum Fail {
    Null,
    Lib(Error),
    Small,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RgStatus::Ok,
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            RgStatus::NullPointer
        }
        Ok(Err(Fail::Small)) => {
            set_error("output buffer too small".into());
            RgStatus::BufferTooSmall
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Lib(Error::Config("argument is not valid UTF-8".into())))
}

unsafe fn obj<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, capacity: usize, len: *mut usize) -> Result<(), Fail> {
    if len.is_null() {
        return Err(Fail::Null);
    }
    *len = src.len();
    if capacity < src.len() {
        return Err(Fail::Small);
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(Fail::Null);
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `capacity`). Returns the full message length excluding the
/// terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn rg_last_error(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && capacity > 0 {
                let n = bytes.len().min(capacity - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create a configuration from a built-in preset name (`"ex1"`..`"ex5"`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_config_from_preset(name: *const c_char, out: *mut *mut RgConfig) -> RgStatus {
    guard(|| put(out, RgConfig(RunConfig::preset(str_arg(name)?)?)))
}

/// Create a configuration from a JSON object of preset overrides.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_config_from_json(json: *const c_char, out: *mut *mut RgConfig) -> RgStatus {
    guard(|| put(out, RgConfig(RunConfig::from_json_overrides(str_arg(json)?, None)?)))
}

/// Override sample counts and seed. The configuration is re-validated.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rg_config_set_run_size(
    config: *mut RgConfig,
    samples: usize,
    warm_samples: usize,
    seed: u64,
) -> RgStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or(Fail::Null)?;
        let mut next = cfg.0.clone();
        next.samples = samples;
        next.mcch.warm_samples = warm_samples;
        next.seed = seed;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rg_config_free(config: *mut RgConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Node heights `f_0..=f_N` of realization `m`.
///
/// # Safety
/// `config` must be a live handle; `buf` must hold `capacity` doubles;
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_sample_surface(
    config: *const RgConfig,
    m: u64,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RgStatus {
    guard(|| {
        let cfg = &obj(config)?.0;
        let r = sample_realization(&cfg.model()?, cfg.seed, m)?;
        copy_out(&r.node_values, buf, capacity, len)
    })
}

/// Synthesise the dataset described by `config`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_dataset_generate(
    config: *const RgConfig,
    workers: usize,
    out: *mut *mut RgDataset,
) -> RgStatus {
    guard(|| {
        let plan = obj(config)?.0.plan()?;
        let (ds, _) = generate_dataset(&plan, workers)?;
        put(out, RgDataset(ds))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_dataset_load(path: *const c_char, out: *mut *mut RgDataset) -> RgStatus {
    guard(|| put(out, RgDataset(harness::read_dataset(Path::new(str_arg(path)?))?)))
}

/// # Safety
/// `dataset` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rg_dataset_save(dataset: *const RgDataset, path: *const c_char) -> RgStatus {
    guard(|| {
        let ds = &obj(dataset)?.0;
        let file = std::fs::File::create(str_arg(path)?).map_err(Error::from)?;
        ds.write_jsonl(std::io::BufWriter::new(file))?;
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_dataset_record_count(dataset: *const RgDataset, count: *mut usize) -> RgStatus {
    guard(|| {
        let n = obj(dataset)?.0.records.len();
        *count.as_mut().ok_or(Fail::Null)? = n;
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rg_dataset_free(dataset: *mut RgDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Reconstruct every sample of `dataset` with the inversion settings of
/// `config`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_ensemble_invert(
    config: *const RgConfig,
    dataset: *const RgDataset,
    workers: usize,
    out: *mut *mut RgEnsemble,
) -> RgStatus {
    guard(|| {
        let outcome = mcch_run(&obj(dataset)?.0, &obj(config)?.0.mcch, workers, false)?;
        put(out, RgEnsemble(outcome))
    })
}

/// Number of successfully reconstructed samples.
///
/// # Safety
/// `ensemble` must be a live handle; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_ensemble_size(ensemble: *const RgEnsemble, count: *mut usize) -> RgStatus {
    guard(|| {
        let n = obj(ensemble)?.0.ensemble.len();
        *count.as_mut().ok_or(Fail::Null)? = n;
        Ok(())
    })
}

/// Fourier coefficients of ensemble member `index`.
///
/// # Safety
/// `ensemble` must be a live handle; `buf` must hold `capacity` doubles;
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_ensemble_coeffs(
    ensemble: *const RgEnsemble,
    index: usize,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RgStatus {
    guard(|| {
        let members = &obj(ensemble)?.0.ensemble;
        let member = members
            .get(index)
            .ok_or_else(|| Error::Config(format!("index {index} out of range")))?;
        copy_out(member.coeffs.coeffs(), buf, capacity, len)
    })
}

/// # Safety
/// `ensemble` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rg_ensemble_free(ensemble: *mut RgEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// Node statistics of a reconstructed ensemble.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_stats_compute(
    config: *const RgConfig,
    ensemble: *const RgEnsemble,
    out: *mut *mut RgStats,
) -> RgStatus {
    guard(|| {
        let cfg = &obj(config)?.0;
        let stats = reconstruction_stats(
            &obj(ensemble)?.0.surfaces(),
            cfg.nodes,
            cfg.sign_prior,
            cfg.outlier_threshold,
        )?;
        put(out, RgStats(stats))
    })
}

/// Mean Fourier coefficients.
///
/// # Safety
/// `stats` must be a live handle; `buf` must hold `capacity` doubles;
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_stats_mean_coeffs(
    stats: *const RgStats,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RgStatus {
    guard(|| copy_out(&obj(stats)?.0.mean_coeffs, buf, capacity, len))
}

/// Estimated squared intensity at the nodes.
///
/// # Safety
/// `stats` must be a live handle; `buf` must hold `capacity` doubles;
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rg_stats_intensity_squared(
    stats: *const RgStats,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> RgStatus {
    guard(|| copy_out(&obj(stats)?.0.intensity_squared, buf, capacity, len))
}

/// # Safety
/// `stats` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rg_stats_free(stats: *mut RgStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

/// Full pipeline writing artifacts and a manifest into `out_dir`.
///
/// # Safety
/// `config` must be a live handle; `out_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rg_pipeline_run(config: *const RgConfig, out_dir: *const c_char, workers: usize) -> RgStatus {
    guard(|| {
        harness::cmd_pipeline(&obj(config)?.0, Path::new(str_arg(out_dir)?), workers, false)?;
        Ok(())
    })
}
