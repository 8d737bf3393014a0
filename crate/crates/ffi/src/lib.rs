//! C ABI over `waveshell`.
//!
//! Every fallible function returns a [`WsStatus`]; on failure the message is
//! available from [`ws_last_error_message`] on the same thread. Objects cross
//! the boundary as opaque pointers and are released with their `*_free`
//! function. Strings returned by the library are freed with
//! [`ws_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use waveshell::cli::{self, ExperimentConfig};
use waveshell::dispersion::{DispersionKind, DispersionSpec};
use waveshell::error::Error;
use waveshell::initial_data::named_spectrum;
use waveshell::operators::{reconstruct, Regularizer, ShellField};
use waveshell::spectral::Grid1D;
use waveshell::stationary_phase::{
    fresnel_oracle, oscillatory_integral, stationary_phase_functional, to_vec3, HalfSphereTestFn,
    OscillatoryIntegralSpec, SphereQuadrature,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    InvalidArgument = 1,
    ConfigError = 2,
    Resolution = 3,
    OutOfDomain = 4,
    TheoremScope = 5,
    QuadratureFailure = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsDispersion {
    Zero = 0,
    Cubic = 1,
    FullSqrt = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsCommand {
    Converge = 0,
    StationaryPhase = 1,
    Fresnel = 2,
    Bench = 3,
    Reconstruct = 4,
}

/// Dispersion law and constants. `b3` is used by `Cubic`, `d0` by `FullSqrt`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WsDispersionParams {
    pub kind: WsDispersion,
    pub c: f64,
    pub d0: f64,
    pub b3: f64,
    pub epsilon: f64,
}

/// Inputs of [`ws_reconstruction_new`]. `rho <= 0` selects the plain
/// restriction. `n_polar` is ignored in `d = 1`, `n_azimuth` outside `d = 3`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WsReconstructionParams {
    pub dim: usize,
    pub dispersion: WsDispersionParams,
    pub rho: f64,
    pub t: f64,
    /// NUL-terminated built-in data name (`default` or `gaussian`).
    pub initial_data: *const c_char,
    pub n_polar: usize,
    pub n_azimuth: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub z_nodes: usize,
}

/// Opaque shell field.
pub struct WsReconstruction {
    field: ShellField,
}

/// Opaque parsed experiment configuration.
pub struct WsConfig {
    config: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> WsStatus {
    match e {
        Error::UnderResolved { .. } | Error::MisalignedQuadrature { .. } => WsStatus::Resolution,
        Error::OutOfDomain { .. } => WsStatus::OutOfDomain,
        Error::TheoremScope(_) => WsStatus::TheoremScope,
        Error::QuadratureFailure(_) => WsStatus::QuadratureFailure,
        Error::Config { .. } => WsStatus::ConfigError,
        Error::Io(_) => WsStatus::Io,
        _ => WsStatus::InvalidArgument,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
    Arg(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            WsStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed for `{name}`"));
            WsStatus::NullPointer
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_last_error(msg);
            WsStatus::InvalidArgument
        }
        Err(_) => {
            set_last_error("internal panic".into());
            WsStatus::Panic
        }
    }
}

fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    // SAFETY: caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or(Failure::Null(name))
}

fn c_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::Arg(format!("`{name}` is not valid UTF-8")))
}

fn slice<'a>(p: *const f64, len: usize, name: &'static str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    // SAFETY: caller guarantees `len` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn dispersion(p: &WsDispersionParams) -> Result<DispersionSpec, Error> {
    let kind = match p.kind {
        WsDispersion::Zero => DispersionKind::Zero,
        WsDispersion::Cubic => DispersionKind::Cubic { b3: p.b3 },
        WsDispersion::FullSqrt => DispersionKind::FullSqrt { d0: p.d0 },
    };
    DispersionSpec::new(kind, p.c, p.epsilon)
}

/// Message of the most recent call on this thread if it failed, else NULL. The pointer stays
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ws_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Total phase `Φ(k, t)` of the exact multiplier `e^{-iΦ}`.
///
/// # Safety
/// `params` and `out_phase` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ws_dispersion_phase(
    params: *const WsDispersionParams,
    k_norm: f64,
    t: f64,
    out_phase: *mut f64,
) -> WsStatus {
    guard(|| {
        // SAFETY: null checked by `as_ref`.
        let p = unsafe { params.as_ref() }.ok_or(Failure::Null("params"))?;
        if !(k_norm >= 0.0 && t >= 0.0) {
            return Err(Failure::Arg(format!(
                "k_norm and t must be non-negative, got {k_norm}, {t}"
            )));
        }
        *out(out_phase, "out_phase")? = dispersion(p)?.exact_multiplier_phase(k_norm, t);
        Ok(())
    })
}

/// Value of the smooth low-frequency cutoff weight.
///
/// # Safety
/// `out_value` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_regularizer_eval(rho: f64, dim: usize, xi: f64, out_value: *mut f64) -> WsStatus {
    guard(|| {
        *out(out_value, "out_value")? = Regularizer::new(rho, dim)?.eval(xi);
        Ok(())
    })
}

/// `∫₀^∞ cos(x²) dx` and `∫₀^∞ sin(x²) dx`.
///
/// # Safety
/// Both outputs must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_fresnel(out_cos: *mut f64, out_sin: *mut f64) -> WsStatus {
    guard(|| {
        let (c, s) = fresnel_oracle();
        *out(out_cos, "out_cos")? = c;
        *out(out_sin, "out_sin")? = s;
        Ok(())
    })
}

/// # Safety
/// Both outputs must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ws_oscillatory_integral(beta: f64, n: f64, out_re: *mut f64, out_im: *mut f64) -> WsStatus {
    guard(|| {
        let v = oscillatory_integral(&OscillatoryIntegralSpec::new(beta, n)?)?;
        *out(out_re, "out_re")? = v.re;
        *out(out_im, "out_im")? = v.im;
        Ok(())
    })
}

/// Stationary-phase functional of a shipped test function centered at
/// `kappa` (`dim` components), on the smallest admissible sphere rule scaled
/// by `quad_scale`.
///
/// # Safety
/// `test_fn` must be null or NUL-terminated, `kappa` null or readable for `dim` values, outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn ws_stationary_phase(
    dim: usize,
    test_fn: *const c_char,
    kappa: *const f64,
    n: f64,
    quad_scale: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> WsStatus {
    guard(|| {
        let name = c_str(test_fn, "test_fn")?;
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim).into());
        }
        let kappa = to_vec3(slice(kappa, dim, "kappa")?);
        let phi = HalfSphereTestFn::named(name, dim, kappa)?;
        let quad = SphereQuadrature::for_oscillation(dim, n, phi.kappa(), quad_scale, 16)?;
        let v = stationary_phase_functional(&phi, n, &quad)?;
        *out(out_re, "out_re")? = v.re;
        *out(out_im, "out_im")? = v.im;
        Ok(())
    })
}

/// Builds the shell field of a built-in initial spectrum at time `t`.
///
/// # Safety
/// `params` must be null or valid, with `initial_data` null or NUL-terminated; `out_handle` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ws_reconstruction_new(
    params: *const WsReconstructionParams,
    out_handle: *mut *mut WsReconstruction,
) -> WsStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = ptr::null_mut();
        // SAFETY: null checked by `as_ref`.
        let p = unsafe { params.as_ref() }.ok_or(Failure::Null("params"))?;
        let u0 = named_spectrum(c_str(p.initial_data, "initial_data")?, p.dim)?;
        let spec = dispersion(&p.dispersion)?;
        let reg = if p.rho > 0.0 {
            Some(Regularizer::new(p.rho, p.dim)?)
        } else {
            None
        };
        let dirs = match p.dim {
            1 => SphereQuadrature::pair(),
            2 => SphereQuadrature::circle(p.n_polar)?,
            3 => SphereQuadrature::sphere(p.n_polar, p.n_azimuth, [0.0, 0.0, 1.0])?,
            d => return Err(Error::UnsupportedDimension(d).into()),
        };
        let z = Grid1D::new(p.z_min, p.z_max, p.z_nodes)?;
        let field = reconstruct(&u0, &spec, reg.as_ref(), Arc::new(dirs), z, p.t)?;
        *slot = Box::into_raw(Box::new(WsReconstruction { field }));
        Ok(())
    })
}

/// Evaluates the field at `count` points stored row-major in `points`
/// (`count × dim`), writing interleaved `re, im` pairs to `out_values`.
///
/// # Safety
/// `handle` must come from `ws_reconstruction_new`; `points` readable for `count × dim` values and `out_values` writable for `2 × count`.
#[no_mangle]
pub unsafe extern "C" fn ws_reconstruction_eval(
    handle: *const WsReconstruction,
    points: *const f64,
    count: usize,
    out_values: *mut f64,
) -> WsStatus {
    guard(|| {
        // SAFETY: handle comes from `ws_reconstruction_new` and is not yet freed.
        let h = unsafe { handle.as_ref() }.ok_or(Failure::Null("handle"))?;
        let d = h.field.dim();
        let xs = slice(points, count * d, "points")?;
        if out_values.is_null() {
            return Err(Failure::Null("out_values"));
        }
        // SAFETY: caller provides room for `2 * count` values.
        let dst = unsafe { std::slice::from_raw_parts_mut(out_values, 2 * count) };
        for (x, pair) in xs.chunks_exact(d).zip(dst.chunks_exact_mut(2)) {
            let v = h.field.eval(x);
            pair[0] = v.re;
            pair[1] = v.im;
        }
        Ok(())
    })
}

/// Number of evaluations that hit the origin, where the field is set to zero.
///
/// # Safety
/// `handle` must be null or come from `ws_reconstruction_new`.
#[no_mangle]
pub unsafe extern "C" fn ws_reconstruction_degenerate_hits(handle: *const WsReconstruction) -> usize {
    // SAFETY: as in `ws_reconstruction_eval`.
    unsafe { handle.as_ref() }.map_or(0, |h| h.field.degenerate_hits())
}

/// # Safety
/// `handle` must be null or come from `ws_reconstruction_new`, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_reconstruction_free(handle: *mut WsReconstruction) {
    if !handle.is_null() {
        // SAFETY: pointer was produced by `Box::into_raw` in `ws_reconstruction_new`.
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Parses `key = value` config text. Relative `tabulated:` paths resolve
/// against the working directory.
///
/// # Safety
/// `text` must be null or NUL-terminated; `out_config` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ws_config_parse(text: *const c_char, out_config: *mut *mut WsConfig) -> WsStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        *slot = ptr::null_mut();
        let config = ExperimentConfig::parse(c_str(text, "text")?, None)?;
        *slot = Box::into_raw(Box::new(WsConfig { config }));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or come from `ws_config_parse`, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_config_free(config: *mut WsConfig) {
    if !config.is_null() {
        // SAFETY: pointer was produced by `Box::into_raw` in `ws_config_parse`.
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Runs one experiment and returns its CSV text; free it with
/// [`ws_string_free`].
///
/// # Safety
/// `config` must be null or come from `ws_config_parse`; `out_csv` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ws_config_run(
    config: *const WsConfig,
    command: WsCommand,
    out_csv: *mut *mut c_char,
) -> WsStatus {
    guard(|| {
        let slot = out(out_csv, "out_csv")?;
        *slot = ptr::null_mut();
        // SAFETY: handle comes from `ws_config_parse` and is not yet freed.
        let cfg = &unsafe { config.as_ref() }.ok_or(Failure::Null("config"))?.config;
        let csv = match command {
            WsCommand::Converge => cli::run_converge(cfg)?.1,
            WsCommand::StationaryPhase => cli::run_stationary_phase(cfg)?,
            WsCommand::Fresnel => cli::run_fresnel(cfg)?,
            WsCommand::Bench => cli::run_bench(cfg)?.1,
            WsCommand::Reconstruct => cli::run_reconstruct(cfg)?,
        };
        *slot = CString::new(csv).expect("CSV has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ws_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: pointer was produced by `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}
