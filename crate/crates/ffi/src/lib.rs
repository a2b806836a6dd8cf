//! C interface to `gwldp`.
//!
//! Models live behind an opaque [`GwldpModel`] handle created from a JSON
//! configuration and released with [`gwldp_model_free`]. Every fallible
//! function returns a [`GwldpStatus`]; on failure the message is kept per
//! thread and can be read with [`gwldp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gwldp::config::{parse_json, ModelConfig};
use gwldp::empirical::PairMeasure;
use gwldp::exact::size_law;
use gwldp::model::GWSpec;
use gwldp::rates::{cramer_rate, pair_rate};
use gwldp::sampler::{ExactSampler, RngHandle};
use gwldp::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GwldpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The JSON configuration was malformed or named unknown fields/types.
    Config = 3,
    /// The model was rejected (not critical, not weakly irreducible, ...).
    InvalidModel = 4,
    /// An argument was out of range or the operation does not apply.
    InvalidArgument = 5,
    /// The conditioning event has probability zero.
    NullConditioning = 6,
    /// A numerical routine failed to converge or certify its result.
    Numerical = 7,
    /// An output buffer was too small.
    BufferTooSmall = 8,
    /// An internal panic was caught at the boundary.
    Panic = 9,
}

/// Opaque model handle.
pub struct GwldpModel {
    spec: GWSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GwldpStatus {
    match e {
        Error::Config { .. } | Error::Parse(_) | Error::Io(_) => GwldpStatus::Config,
        Error::InvalidModel(_)
        | Error::NotWeaklyIrreducible(_)
        | Error::TiltUndefined(_)
        | Error::MeanUnreachable(_) => GwldpStatus::InvalidModel,
        Error::NullConditioning(_) | Error::NotAdmissible(_) => GwldpStatus::NullConditioning,
        Error::EigenNoConvergence { .. } | Error::DualNoConvergence { .. } | Error::Certificate(_) => {
            GwldpStatus::Numerical
        }
        _ => GwldpStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (GwldpStatus, String)>) -> GwldpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GwldpStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GwldpStatus::Panic
        }
    }
}

fn lift(e: Error) -> (GwldpStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GwldpStatus, String) {
    (GwldpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(model: *const GwldpModel) -> Result<&'a GwldpModel, (GwldpStatus, String)> {
    model.as_ref().ok_or_else(|| null("model"))
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn gwldp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a model from a NUL-terminated JSON configuration.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwldp_model_from_json(json: *const c_char, out: *mut *mut GwldpModel) -> GwldpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (GwldpStatus::InvalidUtf8, e.to_string()))?;
        let spec = parse_json::<ModelConfig>(text).and_then(|c| c.build()).map_err(lift)?;
        *out = Box::into_raw(Box::new(GwldpModel { spec }));
        Ok(())
    })
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`gwldp_model_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn gwldp_model_free(model: *mut GwldpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of types of the model.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwldp_model_num_types(model: *const GwldpModel, out: *mut usize) -> GwldpStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.spec.num_types();
        Ok(())
    })
}

/// Perron root of the mean matrix.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwldp_model_rho(model: *const GwldpModel, out: *mut f64) -> GwldpStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.spec.spectral().map_err(lift)?.rho;
        Ok(())
    })
}

/// Write `log P{|T| = n}` for `n = 1..=n_max` into `out[0..n_max]`
/// (`-inf` where the probability is zero).
///
/// # Safety
/// `model` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gwldp_size_law(
    model: *const GwldpModel,
    n_max: usize,
    out: *mut f64,
    len: usize,
) -> GwldpStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < n_max {
            return Err((GwldpStatus::BufferTooSmall, format!("need {n_max} entries, got {len}")));
        }
        let table = size_law(&m.spec, n_max).map_err(lift)?;
        let out = std::slice::from_raw_parts_mut(out, n_max);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = table.log_total(m.spec.root_dist(), i + 1);
        }
        Ok(())
    })
}

/// Cramér rate of the offspring-number law at `x` (product models only).
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwldp_cramer_rate(model: *const GwldpModel, x: f64, out: *mut f64) -> GwldpStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (law, _) = m
            .spec
            .product_parts()
            .ok_or_else(|| (GwldpStatus::InvalidArgument, "model has no single offspring law".into()))?;
        *out = cramer_rate(law, x).value;
        Ok(())
    })
}

/// Pair rate of the measure `mass` (row-major `K x K`, parent first) for a
/// product model; `+inf` outside the effective domain.
///
/// # Safety
/// `model` must be a live handle, `mass` must hold `len` doubles and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwldp_pair_rate(
    model: *const GwldpModel,
    mass: *const f64,
    len: usize,
    out: *mut f64,
) -> GwldpStatus {
    guard(|| {
        let m = model_ref(model)?;
        if mass.is_null() {
            return Err(null("mass"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let k = m.spec.num_types();
        if len != k * k {
            return Err((GwldpStatus::InvalidArgument, format!("expected {} entries, got {len}", k * k)));
        }
        let (law, pair) = m
            .spec
            .product_parts()
            .ok_or_else(|| (GwldpStatus::InvalidArgument, "model has no pair kernel".into()))?;
        let mu = PairMeasure::new(k, std::slice::from_raw_parts(mass, len).to_vec()).map_err(lift)?;
        *out = pair_rate(&mu, law, pair).map_err(lift)?.value;
        Ok(())
    })
}

/// Draw one tree conditioned on `|T| = n` and return it rendered as text,
/// e.g. `a(b,a(b,b))`. Release the string with [`gwldp_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gwldp_sample_tree(
    model: *const GwldpModel,
    n: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> GwldpStatus {
    guard(|| {
        let m = model_ref(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let table = size_law(&m.spec, n).map_err(lift)?;
        let tree = ExactSampler::new(&m.spec, &table)
            .and_then(|s| s.sample(n, &mut RngHandle::new(seed, 0)))
            .map_err(lift)?;
        let text = CString::new(tree.render(m.spec.alphabet())).expect("rendered trees contain no NUL");
        *out = text.into_raw();
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn gwldp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
