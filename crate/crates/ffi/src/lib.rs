//! C ABI over the seedbench engine.
//!
//! Tensors and reports are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`SbStatus`]; on
//! failure [`sb_last_error`] describes the error until the next call on the
//! same thread. Strings handed out by the library are NUL-terminated UTF-8
//! and must be released with [`sb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seedbench::render::{render_cd_svg, CdStyle};
use seedbench::report::{
    cache_load, cache_save, to_latex, BenchmarkReport, LatexOptions, LatexTable,
};
use seedbench::stats::{holm_adjust, paired_t, t_quantile, wilcoxon_signed_rank};
use seedbench::{
    build_report, nemenyi_cd, CacheError, Error, MetricTensor, PairwiseMethod, ReportConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InvalidTensor = 3,
    NotFound = 4,
    InsufficientData = 5,
    Untabulated = 6,
    CacheVersion = 7,
    CacheChecksum = 8,
    Io = 9,
    TrialFailed = 10,
    Panic = 255,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbLatexTable {
    Summary = 0,
    PairwiseT = 1,
    PairwiseWilcoxon = 2,
    PairwiseBoth = 3,
}

/// Opaque metric tensor.
pub struct SbTensor(MetricTensor);

/// Opaque benchmark report.
pub struct SbReport(BenchmarkReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SbStatus {
    match e {
        Error::InvalidTensor(_) | Error::NonFinite | Error::LengthMismatch { .. } => {
            SbStatus::InvalidTensor
        }
        Error::UnknownTask(_) | Error::UnknownModel(_) | Error::UnknownCategory(_) => {
            SbStatus::NotFound
        }
        Error::InsufficientSamples { .. }
        | Error::NotEnoughModels { .. }
        | Error::NotEnoughForRanking { .. }
        | Error::EmptySelection(_) => SbStatus::InsufficientData,
        Error::Untabulated { .. } => SbStatus::Untabulated,
        Error::Cache(CacheError::VersionMismatch { .. }) => SbStatus::CacheVersion,
        Error::Cache(CacheError::Checksum(_)) => SbStatus::CacheChecksum,
        Error::Io(_) => SbStatus::Io,
        Error::TrialFailed { .. } => SbStatus::TrialFailed,
        _ => SbStatus::InvalidArgument,
    }
}

struct Fail(SbStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SbStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(SbStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s)
        .map_err(|_| Fail(SbStatus::InvalidArgument, "output contains NUL".into()))?;
    put(out, c.into_raw(), "out")
}

/// Library version; a static string, do not free.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a tensor document (JSON) and validates it.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_tensor_from_json(
    json: *const c_char,
    out: *mut *mut SbTensor,
) -> SbStatus {
    guard(|| {
        let t = MetricTensor::from_json(str_arg(json, "json")?)?;
        put(out, Box::into_raw(Box::new(SbTensor(t))), "out")
    })
}

/// # Safety
/// `tensor` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sb_tensor_free(tensor: *mut SbTensor) {
    if !tensor.is_null() {
        drop(Box::from_raw(tensor));
    }
}

/// Builds a report. `config_json` may be NULL for the defaults.
///
/// # Safety
/// `tensor` must be a live handle; strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_build(
    tensor: *const SbTensor,
    config_json: *const c_char,
    out: *mut *mut SbReport,
) -> SbStatus {
    guard(|| {
        let tensor = tensor.as_ref().ok_or_else(|| null("tensor"))?;
        let config: ReportConfig = match opt_str_arg(config_json, "config_json")? {
            Some(text) => serde_json::from_str(text).map_err(Error::from)?,
            None => ReportConfig::default(),
        };
        let report = build_report(&tensor.0, &config)?;
        put(out, Box::into_raw(Box::new(SbReport(report))), "out")
    })
}

/// Loads and verifies a cached report.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_load(path: *const c_char, out: *mut *mut SbReport) -> SbStatus {
    guard(|| {
        let report = cache_load(str_arg(path, "path")?)?;
        put(out, Box::into_raw(Box::new(SbReport(report))), "out")
    })
}

/// Writes the report cache atomically.
///
/// # Safety
/// `report` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sb_report_save(report: *const SbReport, path: *const c_char) -> SbStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        cache_save(&report.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sb_report_free(report: *mut SbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// The full report as JSON.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_to_json(
    report: *const SbReport,
    out: *mut *mut c_char,
) -> SbStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        put_string(out, report.0.to_json())
    })
}

/// A LaTeX table. The macro names may be NULL.
///
/// # Safety
/// `report` must be a live handle; strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_to_latex(
    report: *const SbReport,
    which: SbLatexTable,
    winner_macro: *const c_char,
    tie_macro: *const c_char,
    out: *mut *mut c_char,
) -> SbStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let opts = LatexOptions {
            winner_macro: opt_str_arg(winner_macro, "winner_macro")?.map(str::to_owned),
            tie_macro: opt_str_arg(tie_macro, "tie_macro")?.map(str::to_owned),
        };
        let table = match which {
            SbLatexTable::Summary => LatexTable::Summary,
            SbLatexTable::PairwiseT => LatexTable::Pairwise(PairwiseMethod::T),
            SbLatexTable::PairwiseWilcoxon => LatexTable::Pairwise(PairwiseMethod::Wilcoxon),
            SbLatexTable::PairwiseBoth => LatexTable::Pairwise(PairwiseMethod::Both),
        };
        put_string(out, to_latex(&report.0, table, &opts))
    })
}

/// The critical-difference diagram as SVG.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_cd_svg(
    report: *const SbReport,
    out: *mut *mut c_char,
) -> SbStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let cd = report.0.cd.as_ref().ok_or_else(|| {
            Fail(
                SbStatus::InsufficientData,
                "the report has no critical-difference analysis".into(),
            )
        })?;
        put_string(out, render_cd_svg(cd, &CdStyle::default()))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_nemenyi_cd(
    k: usize,
    n_tasks: usize,
    alpha: f64,
    out: *mut f64,
) -> SbStatus {
    guard(|| put(out, nemenyi_cd(k, n_tasks, alpha)?, "out"))
}

/// Quantile `p` of Student's t with `df` degrees of freedom.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_t_quantile(df: f64, p: f64, out: *mut f64) -> SbStatus {
    guard(|| put(out, t_quantile(df, p)?, "out"))
}

/// Holm-adjusts `m` p-values from `p` into `out` (may alias `p`).
///
/// # Safety
/// `p` and `out` must point to `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn sb_holm_adjust(p: *const f64, m: usize, out: *mut f64) -> SbStatus {
    guard(|| {
        let adjusted = holm_adjust(slice_arg(p, m, "p")?)?;
        if m > 0 && out.is_null() {
            return Err(null("out"));
        }
        for (i, v) in adjusted.into_iter().enumerate() {
            out.add(i).write(v);
        }
        Ok(())
    })
}

/// Two-sided Wilcoxon signed-rank test on `xs - ys`.
///
/// # Safety
/// `xs` and `ys` must point to `n` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sb_wilcoxon(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    w_stat: *mut f64,
    p_value: *mut f64,
) -> SbStatus {
    guard(|| {
        let r = wilcoxon_signed_rank(slice_arg(xs, n, "xs")?, slice_arg(ys, n, "ys")?)?;
        put(w_stat, r.w_stat, "w_stat")?;
        put(p_value, r.p_value, "p_value")
    })
}

/// Two-sided paired t test on `xs - ys`.
///
/// # Safety
/// `xs` and `ys` must point to `n` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sb_paired_t(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    t_stat: *mut f64,
    p_value: *mut f64,
) -> SbStatus {
    guard(|| {
        let r = paired_t(slice_arg(xs, n, "xs")?, slice_arg(ys, n, "ys")?)?;
        put(t_stat, r.t_stat, "t_stat")?;
        put(p_value, r.p_value, "p_value")
    })
}
