//! C ABI for netsamp.
//!
//! Networks and analysis outcomes are opaque handles created and released by
//! this library. Fallible calls return an [`NsStatus`]; the message of the
//! most recent failure on the calling thread is available from
//! [`ns_last_error`]. Strings returned as `char *` are owned by the caller
//! and must be released with [`ns_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netsamp::assemble::Pattern;
use netsamp::netmodel::{parse_network_spec, MultilayerNetwork};
use netsamp::report::{csv_row, render_report};
use netsamp::verdicts::{analyze, AnalysisOutcome, AnalysisRequest, MethodChoice, Status};
use netsamp::{Error, RankTol, Tolerances};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The network description could not be parsed or failed validation.
    InvalidNetwork = 3,
    /// An analysis parameter was out of range or inconsistent.
    InvalidArgument = 4,
    /// The network structure does not support the requested method.
    Unsupported = 5,
    /// A numerical kernel failed (non-convergence, unresolvable structure).
    Numerical = 6,
    /// Reading a file failed.
    Io = 7,
    /// The requested quantity does not exist (e.g. no witness).
    NotAvailable = 8,
    /// An internal panic was caught at the boundary.
    Internal = 9,
}

/// Controllability verdict, numerically equal to the CLI exit code.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsVerdict {
    Controllable = 0,
    Uncontrollable = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsPattern {
    Single = 0,
    SlowInter = 1,
    MultiScale = 2,
    FastControl = 3,
}

/// Analysis parameters. `method` may be NULL for automatic selection;
/// non-positive `tol_rank` / `tol_eig` select the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsAnalysisParams {
    pub h: f64,
    pub l: u32,
    pub pattern: NsPattern,
    pub method: *const c_char,
    pub tol_rank: f64,
    pub tol_eig: f64,
}

/// Opaque network handle.
pub struct NsNetwork {
    inner: MultilayerNetwork,
}

/// Opaque analysis outcome.
pub struct NsOutcome {
    inner: AnalysisOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NsStatus {
    match e {
        Error::Syntax { .. }
        | Error::Dimension { .. }
        | Error::Invalid(_)
        | Error::NonSquare { .. } => NsStatus::InvalidNetwork,
        Error::Argument(_) => NsStatus::InvalidArgument,
        Error::Structure(_) | Error::Unsupported(_) => NsStatus::Unsupported,
        Error::NoConvergence(_) | Error::ChainAmbiguity { .. } => NsStatus::Numerical,
        Error::Io(_) => NsStatus::Io,
    }
}

fn fail(status: NsStatus, msg: &str) -> NsStatus {
    set_error(msg);
    status
}

/// Run `f`, converting library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (NsStatus, String)>) -> NsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsStatus::Ok,
        Ok(Err((status, msg))) => fail(status, &msg),
        Err(_) => fail(
            NsStatus::Internal,
            "internal error (panic caught at the C boundary)",
        ),
    }
}

fn lib_err(e: Error) -> (NsStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (NsStatus, String)> {
    if p.is_null() {
        return Err((NsStatus::NullPointer, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (NsStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread (empty if none). The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a JSON network description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_network_from_json(
    json: *const c_char,
    out: *mut *mut NsNetwork,
) -> NsStatus {
    guard(|| {
        if out.is_null() {
            return Err((NsStatus::NullPointer, "out is NULL".into()));
        }
        *out = ptr::null_mut();
        let text = str_arg(json, "json")?;
        let net = parse_network_spec(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NsNetwork { inner: net }));
        Ok(())
    })
}

/// Read and parse a JSON network file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ns_network_from_file(
    path: *const c_char,
    out: *mut *mut NsNetwork,
) -> NsStatus {
    guard(|| {
        if out.is_null() {
            return Err((NsStatus::NullPointer, "out is NULL".into()));
        }
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| lib_err(Error::Io(e)))?;
        let net = parse_network_spec(&text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NsNetwork { inner: net }));
        Ok(())
    })
}

/// Release a network. NULL is ignored.
///
/// # Safety
/// `net` must come from `ns_network_from_*` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ns_network_free(net: *mut NsNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of layers (0 for NULL).
///
/// # Safety
/// `net` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_network_layers(net: *const NsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.layer_count())
}

/// Nodes per layer (0 for NULL).
///
/// # Safety
/// `net` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_network_nodes(net: *const NsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.nodes())
}

/// Dimension of the assembled state (0 for NULL).
///
/// # Safety
/// `net` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_network_state_dim(net: *const NsNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.state_dim())
}

/// Default parameters for a single-rate analysis at period `h`.
#[no_mangle]
pub extern "C" fn ns_params_default(h: f64) -> NsAnalysisParams {
    NsAnalysisParams {
        h,
        l: 1,
        pattern: NsPattern::Single,
        method: ptr::null(),
        tol_rank: 0.0,
        tol_eig: 0.0,
    }
}

unsafe fn request(p: &NsAnalysisParams) -> Result<AnalysisRequest, (NsStatus, String)> {
    let method = if p.method.is_null() {
        MethodChoice::Auto
    } else {
        MethodChoice::parse(str_arg(p.method, "method")?).map_err(lib_err)?
    };
    let pattern = match p.pattern {
        NsPattern::Single => Pattern::SingleRate,
        NsPattern::SlowInter => Pattern::SlowInterLayer,
        NsPattern::MultiScale => Pattern::MultiScale,
        NsPattern::FastControl => Pattern::FastControl,
    };
    let mut tol = Tolerances::default();
    if p.tol_rank > 0.0 {
        tol.rank = RankTol::Absolute(p.tol_rank);
    }
    if p.tol_eig > 0.0 {
        tol.eig = p.tol_eig;
    }
    Ok(AnalysisRequest {
        h: p.h,
        l: p.l as usize,
        pattern,
        method,
        tol,
    })
}

/// Analyze `net` with `params`.
///
/// # Safety
/// `net` must be a live handle, `params` a valid pointer (its `method` NULL
/// or NUL-terminated), `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_analyze(
    net: *const NsNetwork,
    params: *const NsAnalysisParams,
    out: *mut *mut NsOutcome,
) -> NsStatus {
    guard(|| {
        if out.is_null() {
            return Err((NsStatus::NullPointer, "out is NULL".into()));
        }
        *out = ptr::null_mut();
        let net = net
            .as_ref()
            .ok_or((NsStatus::NullPointer, "net is NULL".to_string()))?;
        let params = params
            .as_ref()
            .ok_or((NsStatus::NullPointer, "params is NULL".to_string()))?;
        let req = request(params)?;
        let outcome = analyze(&net.inner, &req).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(NsOutcome { inner: outcome }));
        Ok(())
    })
}

/// Release an outcome. NULL is ignored.
///
/// # Safety
/// `o` must come from [`ns_analyze`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_free(o: *mut NsOutcome) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Overall verdict (Inconclusive for NULL).
///
/// # Safety
/// `o` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_verdict(o: *const NsOutcome) -> NsVerdict {
    match o.as_ref().map(|o| o.inner.status) {
        Some(Status::Controllable) => NsVerdict::Controllable,
        Some(Status::Uncontrollable) => NsVerdict::Uncontrollable,
        _ => NsVerdict::Inconclusive,
    }
}

/// State dimension of the analysed (possibly lifted) pair.
///
/// # Safety
/// `o` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_state_dim(o: *const NsOutcome) -> usize {
    o.as_ref().map_or(0, |o| o.inner.state_dim())
}

/// Reachable-subspace dimension, when a rank-based method reported one.
///
/// # Safety
/// `o` must be a live handle and `rank` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_reach_rank(o: *const NsOutcome, rank: *mut usize) -> NsStatus {
    guard(|| {
        let o = o
            .as_ref()
            .ok_or((NsStatus::NullPointer, "outcome is NULL".to_string()))?;
        let rank = rank
            .as_mut()
            .ok_or((NsStatus::NullPointer, "rank is NULL".to_string()))?;
        *rank = o.inner.reach_rank().ok_or((
            NsStatus::NotAvailable,
            "no reachability rank was computed".to_string(),
        ))?;
        Ok(())
    })
}

/// Eigenvalue of the primary verdict's witness.
///
/// # Safety
/// `o` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_witness_eigenvalue(
    o: *const NsOutcome,
    re: *mut f64,
    im: *mut f64,
) -> NsStatus {
    guard(|| {
        let o = o
            .as_ref()
            .ok_or((NsStatus::NullPointer, "outcome is NULL".to_string()))?;
        if re.is_null() || im.is_null() {
            return Err((NsStatus::NullPointer, "re or im is NULL".into()));
        }
        let w = o
            .inner
            .primary()
            .witness
            .as_ref()
            .ok_or((NsStatus::NotAvailable, "verdict has no witness".to_string()))?;
        *re = w.eigenvalue.re;
        *im = w.eigenvalue.im;
        Ok(())
    })
}

/// Copy the primary witness vector into `re[0..len)` / `im[0..len)`; `len`
/// must equal the state dimension.
///
/// # Safety
/// `o` must be a live handle; `re` and `im` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_witness_vector(
    o: *const NsOutcome,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> NsStatus {
    guard(|| {
        let o = o
            .as_ref()
            .ok_or((NsStatus::NullPointer, "outcome is NULL".to_string()))?;
        if re.is_null() || im.is_null() {
            return Err((NsStatus::NullPointer, "re or im is NULL".into()));
        }
        let w = o
            .inner
            .primary()
            .witness
            .as_ref()
            .ok_or((NsStatus::NotAvailable, "verdict has no witness".to_string()))?;
        if len != w.vector.len() {
            return Err((
                NsStatus::InvalidArgument,
                format!(
                    "buffer length {len} does not match witness length {}",
                    w.vector.len()
                ),
            ));
        }
        let (re, im) = (
            std::slice::from_raw_parts_mut(re, len),
            std::slice::from_raw_parts_mut(im, len),
        );
        for (k, z) in w.vector.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Text report (as printed by the CLI); `source` labels the input and may be
/// NULL. Returns NULL on failure. Free with [`ns_string_free`].
///
/// # Safety
/// `o` must be a live handle; `source` NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_report(
    o: *const NsOutcome,
    source: *const c_char,
) -> *mut c_char {
    let Some(o) = o.as_ref() else {
        set_error("outcome is NULL");
        return ptr::null_mut();
    };
    let label = if source.is_null() {
        "<memory>".to_string()
    } else {
        CStr::from_ptr(source).to_string_lossy().into_owned()
    };
    match catch_unwind(AssertUnwindSafe(|| render_report(&label, &o.inner))) {
        Ok(text) => into_c_string(text),
        Err(_) => {
            set_error("internal error while rendering the report");
            ptr::null_mut()
        }
    }
}

/// One CSV row (no header, no newline) in the CLI's column layout.
///
/// # Safety
/// `o` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ns_outcome_csv_row(o: *const NsOutcome) -> *mut c_char {
    match o.as_ref() {
        Some(o) => into_c_string(csv_row(&o.inner)),
        None => {
            set_error("outcome is NULL");
            ptr::null_mut()
        }
    }
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ns_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
