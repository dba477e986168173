//! C interface to `otfs-core`.
//!
//! Channels and receivers are opaque handles created by `*_new` functions
//! and released with the matching `*_free`. Every fallible call returns an
//! [`OtfsStatus`]; on failure [`otfs_last_error_message`] describes the
//! error for the calling thread. Complex vectors are interleaved
//! `(re, im)` doubles ([`OtfsComplex`]).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use otfs_core::channel::{
    apply_channel, build_channel_from_profile, DdChannel, DdPath, PowerDelayProfile,
};
use otfs_core::equalizer::LmmseFastReceiver;
use otfs_core::grid::{DdFrame, OtfsGrid};
use otfs_core::modem::{ModulationScheme, SchemeKind};
use otfs_core::Error;

/// Result codes. `OTFS_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtfsStatus {
    Ok = 0,
    NullPointer = 1,
    InputShape = 2,
    Config = 3,
    Singular = 4,
    Resource = 5,
    Parse = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtfsScheme {
    Otfs = 0,
    Ofdm = 1,
}

impl From<OtfsScheme> for SchemeKind {
    fn from(s: OtfsScheme) -> Self {
        match s {
            OtfsScheme::Otfs => SchemeKind::Otfs,
            OtfsScheme::Ofdm => SchemeKind::Ofdm,
        }
    }
}

/// Layout-compatible with `double _Complex` and `std::complex<double>`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtfsComplex {
    pub re: f64,
    pub im: f64,
}

/// One delay-Doppler path.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtfsPath {
    pub gain: OtfsComplex,
    pub delay_bin: usize,
    pub doppler_bin: i64,
}

/// Opaque channel handle.
pub struct OtfsChannel(DdChannel);

/// Opaque receiver handle; owns its factorization.
pub struct OtfsReceiver(LmmseFastReceiver);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OtfsStatus {
    match e {
        Error::InputShape(_) => OtfsStatus::InputShape,
        Error::Config(_) => OtfsStatus::Config,
        Error::Singular { .. } => OtfsStatus::Singular,
        Error::Resource(_) => OtfsStatus::Resource,
        Error::Parse { .. } => OtfsStatus::Parse,
        Error::Io(_) | Error::Csv(_) => OtfsStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OtfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OtfsStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            OtfsStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            OtfsStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    // SAFETY: caller promises p is null or valid for the duration of the call
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

/// # Safety
/// `p` must be null or point to `len` readable elements.
unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or point to `len` writable elements.
unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn to_c64(v: &[OtfsComplex]) -> Vec<Complex64> {
    v.iter().map(|c| Complex64::new(c.re, c.im)).collect()
}

fn write_out(dst: &mut [OtfsComplex], src: &[Complex64]) -> Result<(), Fail> {
    if dst.len() != src.len() {
        return Err(Error::InputShape(format!(
            "output has {} entries, expected {}",
            dst.len(),
            src.len()
        ))
        .into());
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d = OtfsComplex { re: s.re, im: s.im };
    }
    Ok(())
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn otfs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn otfs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a channel on an `m x n` grid from explicit paths.
///
/// # Safety
/// `paths` must point to `count` paths (or be null with `count == 0`);
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_new(
    m: usize,
    n: usize,
    delta_f: f64,
    paths: *const OtfsPath,
    count: usize,
    out: *mut *mut OtfsChannel,
) -> OtfsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let taps = input(paths, count, "paths")?
            .iter()
            .map(|p| {
                DdPath::new(
                    Complex64::new(p.gain.re, p.gain.im),
                    p.delay_bin,
                    p.doppler_bin,
                )
            })
            .collect();
        let ch = DdChannel::new(OtfsGrid::new(m, n, delta_f)?, taps)?;
        *out = Box::into_raw(Box::new(OtfsChannel(ch)));
        Ok(())
    })
}

/// Draws a random channel from a built-in profile name (`"eva"`, `"evb"`)
/// or a profile file path.
///
/// # Safety
/// `profile` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_from_profile(
    m: usize,
    n: usize,
    delta_f: f64,
    profile: *const c_char,
    speed_kmh: f64,
    fc_ghz: f64,
    seed: u64,
    out: *mut *mut OtfsChannel,
) -> OtfsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        if profile.is_null() {
            return Err(Fail::Null("profile"));
        }
        let name = CStr::from_ptr(profile)
            .to_str()
            .map_err(|_| Error::Config("profile: not valid UTF-8".into()))?;
        let pdp = PowerDelayProfile::resolve(name)?;
        let grid = OtfsGrid::new(m, n, delta_f)?;
        let ch = build_channel_from_profile(&pdp, speed_kmh / 3.6, fc_ghz * 1e9, &grid, seed)?;
        *out = Box::into_raw(Box::new(OtfsChannel(ch)));
        Ok(())
    })
}

/// Delay length `alpha` of the channel, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_alpha(ch: *const OtfsChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.0.alpha())
}

/// Doppler length `beta` of the channel, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live channel handle.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_beta(ch: *const OtfsChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.0.beta())
}

/// `out = H s`; both vectors have `len = MN` entries.
///
/// # Safety
/// `ch` must be a live handle; `s` and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_apply(
    ch: *const OtfsChannel,
    s: *const OtfsComplex,
    len: usize,
    out: *mut OtfsComplex,
) -> OtfsStatus {
    guard(|| {
        let ch = non_null(ch, "channel")?;
        let r = apply_channel(&to_c64(input(s, len, "s")?), &ch.0)?;
        write_out(output(out, len, "out")?, &r)
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `ch` must be null or a handle from `otfs_channel_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn otfs_channel_free(ch: *mut OtfsChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Modulates a row-major `m x n` delay-Doppler frame (`len = m n`) into
/// `len` time-domain samples.
///
/// # Safety
/// `frame` and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn otfs_modulate(
    scheme: OtfsScheme,
    m: usize,
    n: usize,
    frame: *const OtfsComplex,
    len: usize,
    out: *mut OtfsComplex,
) -> OtfsStatus {
    guard(|| {
        let grid = OtfsGrid::new(m, n, 1.0)?;
        let d = DdFrame::from_row_major(grid, to_c64(input(frame, len, "frame")?))?;
        let s = ModulationScheme::new(scheme.into(), grid).modulate(&d)?;
        write_out(output(out, len, "out")?, &s)
    })
}

/// Factors the LMMSE receiver for `ch` at noise-to-signal ratio `nsr`.
/// The channel is copied; it may be freed afterwards.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn otfs_receiver_new(
    ch: *const OtfsChannel,
    nsr: f64,
    scheme: OtfsScheme,
    out: *mut *mut OtfsReceiver,
) -> OtfsStatus {
    guard(|| {
        let ch = non_null(ch, "channel")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let rx = LmmseFastReceiver::new(ch.0.clone(), nsr, scheme.into())?;
        *out = Box::into_raw(Box::new(OtfsReceiver(rx)));
        Ok(())
    })
}

/// Equalizes `len = MN` received samples into a row-major estimate of the
/// delay-Doppler frame. Safe to call concurrently on one receiver.
///
/// # Safety
/// `rx` must be a live handle; `r` and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn otfs_receiver_equalize(
    rx: *const OtfsReceiver,
    r: *const OtfsComplex,
    len: usize,
    out: *mut OtfsComplex,
) -> OtfsStatus {
    guard(|| {
        let rx = non_null(rx, "receiver")?;
        let est = rx.0.equalize(&to_c64(input(r, len, "r")?))?;
        write_out(output(out, len, "out")?, est.row_major())
    })
}

/// Releases a receiver. Null is ignored.
///
/// # Safety
/// `rx` must be null or a handle from `otfs_receiver_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn otfs_receiver_free(rx: *mut OtfsReceiver) {
    if !rx.is_null() {
        drop(Box::from_raw(rx));
    }
}
