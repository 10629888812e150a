//! C interface to the `nugs` reconstruction toolkit.
//!
//! Objects cross the boundary as opaque handles created by `*_new`-style
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`NugsStatus`]; on failure the message is available from
//! [`nugs_last_error`] on the same thread until the next failing call.
//! Passing a null handle to a `*_free` function is a no-op.

use nugs::fourier::{sample_function, FourierData, FunctionSpec};
use nugs::sampling::{generate, SampleSet, SchemeKind, SchemeSpec, WeightVector};
use nugs::solver::{reconstruct, stability_constant, Reconstruction};
use nugs::spaces::{OrthoBasis, SpaceSpec};
use nugs::Error;
use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NugsStatus {
    Ok = 0,
    InvalidInput = 1,
    Unstable = 2,
    Quadrature = 3,
    BandwidthTooSmall = 4,
    Parse = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Sampling pattern family for [`nugs_samples_generate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NugsScheme {
    Uniform = 0,
    Jittered = 1,
    Log = 2,
}

/// A complex number, laid out as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NugsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for NugsComplex {
    fn from(c: Complex64) -> Self {
        NugsComplex { re: c.re, im: c.im }
    }
}

impl From<NugsComplex> for Complex64 {
    fn from(c: NugsComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// Sorted frequencies with their bandwidth.
pub struct NugsSamples(SampleSet);

/// A reconstruction space with its orthonormal basis.
pub struct NugsSpace {
    spec: SpaceSpec,
    basis: OrthoBasis,
}

/// Least-squares coefficients in a space's basis.
pub struct NugsReconstruction(Reconstruction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> NugsStatus {
    match err {
        Error::InvalidInput(_) => NugsStatus::InvalidInput,
        Error::Unstable { .. } => NugsStatus::Unstable,
        Error::Quadrature { .. } => NugsStatus::Quadrature,
        Error::BandwidthTooSmall { .. } => NugsStatus::BandwidthTooSmall,
        Error::Parse { .. } | Error::Json(_) => NugsStatus::Parse,
        Error::Io(_) => NugsStatus::Io,
    }
}

enum Fail {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NugsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NugsStatus::Ok,
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            NugsStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            NugsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Core(Error::InvalidInput(format!("{what} is not valid UTF-8"))))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn check_len(want: usize, got: usize, what: &str) -> Result<(), Fail> {
    if want == got {
        Ok(())
    } else {
        Err(Fail::Core(Error::InvalidInput(format!(
            "{what}: expected length {want}, got {got}"
        ))))
    }
}

/// Message of the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nugs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nugs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a sample set from `n` frequencies inside `[-bandwidth, bandwidth]`.
///
/// # Safety
/// `points` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_new(
    points: *const f64,
    n: usize,
    bandwidth: f64,
    out: *mut *mut NugsSamples,
) -> NugsStatus {
    guard(|| {
        let pts = slice(points, n, "points")?.to_vec();
        store(out, NugsSamples(SampleSet::new(pts, bandwidth)?))
    })
}

/// Generates `n` frequencies of the given pattern on `[-k, k]`. `theta` and
/// `seed` apply to the jittered pattern only.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_generate(
    scheme: NugsScheme,
    n: usize,
    k: f64,
    theta: f64,
    seed: u64,
    out: *mut *mut NugsSamples,
) -> NugsStatus {
    guard(|| {
        let kind = match scheme {
            NugsScheme::Uniform => SchemeKind::Uniform,
            NugsScheme::Jittered => SchemeKind::Jittered,
            NugsScheme::Log => SchemeKind::Log,
        };
        let spec = SchemeSpec {
            kind,
            n,
            k,
            theta,
            seed,
        };
        store(out, NugsSamples(generate(&spec)?))
    })
}

/// Number of frequencies, or 0 for a null handle.
///
/// # Safety
/// `samples` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_len(samples: *const NugsSamples) -> usize {
    samples.as_ref().map_or(0, |s| s.0.len())
}

/// Copies the sorted frequencies into `out`, which must hold `len` doubles.
///
/// # Safety
/// `samples` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_points(samples: *const NugsSamples, out: *mut f64, len: usize) -> NugsStatus {
    guard(|| {
        let s = &deref(samples, "samples")?.0;
        check_len(s.len(), len, "points")?;
        slice_mut(out, len, "out")?.copy_from_slice(s.points());
        Ok(())
    })
}

/// Copies the density-compensation weights into `out`.
///
/// # Safety
/// `samples` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_weights(samples: *const NugsSamples, out: *mut f64, len: usize) -> NugsStatus {
    guard(|| {
        let s = &deref(samples, "samples")?.0;
        check_len(s.len(), len, "weights")?;
        let w = s.weights();
        slice_mut(out, len, "out")?.copy_from_slice(&w.values);
        Ok(())
    })
}

/// Largest gap between consecutive frequencies, counting the ghost points
/// reflected about the bandwidth.
///
/// # Safety
/// `samples` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_density(samples: *const NugsSamples, out: *mut f64) -> NugsStatus {
    guard(|| {
        let s = &deref(samples, "samples")?.0;
        *out.as_mut().ok_or(Fail::Null("out"))? = s.density();
        Ok(())
    })
}

/// Releases a sample set.
///
/// # Safety
/// `samples` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nugs_samples_free(samples: *mut NugsSamples) {
    if !samples.is_null() {
        drop(Box::from_raw(samples));
    }
}

/// Parses a space descriptor such as `"legendre:8"` or `"spline:3:16"`.
///
/// # Safety
/// `descriptor` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_space_parse(descriptor: *const c_char, out: *mut *mut NugsSpace) -> NugsStatus {
    guard(|| {
        let spec: SpaceSpec = text(descriptor, "descriptor")?.parse()?;
        let basis = spec.build_basis()?;
        store(out, NugsSpace { spec, basis })
    })
}

/// Dimension of the space, or 0 for a null handle.
///
/// # Safety
/// `space` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nugs_space_dimension(space: *const NugsSpace) -> usize {
    space.as_ref().map_or(0, |s| s.spec.dimension())
}

/// Releases a space.
///
/// # Safety
/// `space` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nugs_space_free(space: *mut NugsSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Fourier transform of a described test function at every frequency of
/// `samples`, written to `out` (length `len`).
///
/// # Safety
/// `function` must be a NUL-terminated string; `samples` a live handle;
/// `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn nugs_transform_function(
    function: *const c_char,
    samples: *const NugsSamples,
    out: *mut NugsComplex,
    len: usize,
) -> NugsStatus {
    guard(|| {
        let f = FunctionSpec::parse(text(function, "function")?)?;
        let s = &deref(samples, "samples")?.0;
        check_len(s.len(), len, "out")?;
        let data = sample_function(&f, s)?;
        for (o, v) in slice_mut(out, len, "out")?.iter_mut().zip(data.values) {
            *o = v.into();
        }
        Ok(())
    })
}

/// Stability ratio `(1 + delta) / sqrt(C1)` of the weighted least-squares
/// problem, infinite when the problem is singular.
///
/// # Safety
/// `space` and `samples` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_stability_constant(
    space: *const NugsSpace,
    samples: *const NugsSamples,
    out: *mut f64,
) -> NugsStatus {
    guard(|| {
        let space = deref(space, "space")?;
        let s = &deref(samples, "samples")?.0;
        *out.as_mut().ok_or(Fail::Null("out"))? = stability_constant(&space.basis, s).c_ratio;
        Ok(())
    })
}

/// Solves the weighted least-squares problem for `values` sampled at
/// `samples`. `weights` may be null to use the midpoint weights.
///
/// # Safety
/// `space` and `samples` must be live handles; `values` (and `weights` if
/// non-null) must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_reconstruct(
    space: *const NugsSpace,
    samples: *const NugsSamples,
    values: *const NugsComplex,
    weights: *const f64,
    len: usize,
    out: *mut *mut NugsReconstruction,
) -> NugsStatus {
    guard(|| {
        let space = deref(space, "space")?;
        let s = deref(samples, "samples")?.0.clone();
        check_len(s.len(), len, "values")?;
        let v: Vec<Complex64> = slice(values, len, "values")?.iter().map(|&c| c.into()).collect();
        let data = if weights.is_null() {
            FourierData::with_default_weights(s, v)?
        } else {
            let w = slice(weights, len, "weights")?.to_vec();
            if w.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                return Err(Error::InvalidInput("weights must be positive and finite".into()).into());
            }
            FourierData::new(s, v, WeightVector { values: w })?
        };
        store(out, NugsReconstruction(reconstruct(&space.basis, &data)?))
    })
}

/// Number of coefficients, or 0 for a null handle.
///
/// # Safety
/// `rec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nugs_reconstruction_len(rec: *const NugsReconstruction) -> usize {
    rec.as_ref().map_or(0, |r| r.0.coefficients.len())
}

/// Copies the coefficients into `out`.
///
/// # Safety
/// `rec` must be a live handle; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn nugs_reconstruction_coefficients(
    rec: *const NugsReconstruction,
    out: *mut NugsComplex,
    len: usize,
) -> NugsStatus {
    guard(|| {
        let r = &deref(rec, "reconstruction")?.0;
        check_len(r.coefficients.len(), len, "out")?;
        for (o, &c) in slice_mut(out, len, "out")?.iter_mut().zip(&r.coefficients) {
            *o = c.into();
        }
        Ok(())
    })
}

/// Weighted residual norm of the fit.
///
/// # Safety
/// `rec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nugs_reconstruction_residual(rec: *const NugsReconstruction, out: *mut f64) -> NugsStatus {
    guard(|| {
        *out.as_mut().ok_or(Fail::Null("out"))? = deref(rec, "reconstruction")?.0.residual;
        Ok(())
    })
}

/// Evaluates the reconstruction at `len` points of `[0, 1]`.
///
/// # Safety
/// `rec` and `space` must be live handles, `space` the one used to build
/// `rec`; `xs` and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn nugs_reconstruction_evaluate(
    rec: *const NugsReconstruction,
    space: *const NugsSpace,
    xs: *const f64,
    out: *mut NugsComplex,
    len: usize,
) -> NugsStatus {
    guard(|| {
        let r = &deref(rec, "reconstruction")?.0;
        let space = deref(space, "space")?;
        check_len(space.basis.dim(), r.coefficients.len(), "space dimension")?;
        let xs = slice(xs, len, "xs")?;
        for (o, v) in slice_mut(out, len, "out")?
            .iter_mut()
            .zip(r.evaluate_grid(&space.basis, xs))
        {
            *o = v.into();
        }
        Ok(())
    })
}

/// Releases a reconstruction.
///
/// # Safety
/// `rec` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nugs_reconstruction_free(rec: *mut NugsReconstruction) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}
