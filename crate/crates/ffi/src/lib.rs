//! C ABI over the feplab predictors, rate selection and link simulator.
//!
//! Every fallible function returns a [`FeplabStatus`]; on failure a
//! description is available from [`feplab_last_error`] on the same thread.
//! Objects cross the boundary as opaque handles created by `*_load` /
//! `*_new` and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use feplab::channel::ChannelRealization;
use feplab::eesm::{compress_with, load_predictor, EesmPredictor, EesmSign};
use feplab::link::{estimate_fep_mc, LinkChain};
use feplab::neural::{load_model, MlpModel};
use feplab::selection::select_rate;
use feplab::types::LinkConfig;
use feplab::{Error, SinrVector};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeplabStatus {
    Ok = 0,
    InvalidArgument = 1,
    Dimension = 2,
    Parse = 3,
    Io = 4,
    Config = 5,
    Data = 6,
    Numeric = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Trained neural predictor.
pub struct FeplabMlp(MlpModel);

/// Calibrated EESM predictor.
pub struct FeplabEesm(EesmPredictor);

/// Link chain (codec plus interleaver seed).
pub struct FeplabLink(LinkChain);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> FeplabStatus {
    match e {
        Error::InvalidArgument(_) => FeplabStatus::InvalidArgument,
        Error::Dimension { .. } => FeplabStatus::Dimension,
        Error::Parse { .. } => FeplabStatus::Parse,
        Error::Io { .. } => FeplabStatus::Io,
        Error::Config(_) => FeplabStatus::Config,
        Error::Data(_) => FeplabStatus::Data,
        Error::Numeric(_) => FeplabStatus::Numeric,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FeplabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FeplabStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FeplabStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic");
            FeplabStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    what: &'static str,
) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("path is not valid UTF-8".into()))?;
    Ok(Path::new(s))
}

unsafe fn sinr_arg(p: *const f64, len: usize) -> Result<SinrVector, Failure> {
    Ok(SinrVector::new(slice(p, len, "sinr")?.to_vec())?)
}

fn copy_out(values: &[f64], dst: &mut [f64]) -> Result<(), Failure> {
    if dst.len() != values.len() {
        return Err(Error::Dimension {
            expected: values.len(),
            got: dst.len(),
        }
        .into());
    }
    dst.copy_from_slice(values);
    Ok(())
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn feplab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn feplab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a model file. On success `*out` owns a handle for
/// [`feplab_mlp_free`].
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn feplab_mlp_load(
    path: *const c_char,
    out_model: *mut *mut FeplabMlp,
) -> FeplabStatus {
    guard(|| {
        let slot = out(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let model = load_model(path_arg(path)?)?;
        *slot = Box::into_raw(Box::new(FeplabMlp(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`feplab_mlp_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn feplab_mlp_free(model: *mut FeplabMlp) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of subcarriers the model expects; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn feplab_mlp_input_dim(model: *const FeplabMlp) -> usize {
    model.as_ref().map_or(0, |m| m.0.input_dim())
}

/// Number of configurations the model predicts; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn feplab_mlp_output_dim(model: *const FeplabMlp) -> usize {
    model.as_ref().map_or(0, |m| m.0.output_dim())
}

/// Predicted FEP of every configuration from linear per-subcarrier SINRs.
///
/// # Safety
/// `sinr` must point to `sinr_len` doubles and `fep_out` to `fep_len`.
#[no_mangle]
pub unsafe extern "C" fn feplab_mlp_predict(
    model: *const FeplabMlp,
    sinr: *const f64,
    sinr_len: usize,
    fep_out: *mut f64,
    fep_len: usize,
) -> FeplabStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Failure::Null("model"))?;
        let p = m.0.predict(&sinr_arg(sinr, sinr_len)?)?;
        copy_out(&p, slice_mut(fep_out, fep_len, "fep_out")?)
    })
}

/// Loads an EESM predictor manifest together with its β and curve files.
///
/// # Safety
/// `manifest` must be a NUL-terminated string and `out_eesm` valid.
#[no_mangle]
pub unsafe extern "C" fn feplab_eesm_load(
    manifest: *const c_char,
    out_eesm: *mut *mut FeplabEesm,
) -> FeplabStatus {
    guard(|| {
        let slot = out(out_eesm, "out_eesm")?;
        *slot = ptr::null_mut();
        let pred = load_predictor(path_arg(manifest)?)?;
        *slot = Box::into_raw(Box::new(FeplabEesm(pred)));
        Ok(())
    })
}

/// # Safety
/// `eesm` must come from [`feplab_eesm_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn feplab_eesm_free(eesm: *mut FeplabEesm) {
    if !eesm.is_null() {
        drop(Box::from_raw(eesm));
    }
}

/// # Safety
/// `eesm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn feplab_eesm_num_configs(eesm: *const FeplabEesm) -> usize {
    eesm.as_ref().map_or(0, |e| e.0.num_configs())
}

/// Calibrated β of configuration `k` (1-based).
///
/// # Safety
/// `eesm` must be a live handle and `beta_out` valid.
#[no_mangle]
pub unsafe extern "C" fn feplab_eesm_beta(
    eesm: *const FeplabEesm,
    k: usize,
    beta_out: *mut f64,
) -> FeplabStatus {
    guard(|| {
        let e = eesm.as_ref().ok_or(Failure::Null("eesm"))?;
        let entry =
            e.0.entry(k)
                .ok_or_else(|| Error::InvalidArgument(format!("no configuration {k}")))?;
        *out(beta_out, "beta_out")? = entry.beta;
        Ok(())
    })
}

/// # Safety
/// `sinr` must point to `sinr_len` doubles and `fep_out` to `fep_len`.
#[no_mangle]
pub unsafe extern "C" fn feplab_eesm_predict(
    eesm: *const FeplabEesm,
    sinr: *const f64,
    sinr_len: usize,
    fep_out: *mut f64,
    fep_len: usize,
) -> FeplabStatus {
    guard(|| {
        let e = eesm.as_ref().ok_or(Failure::Null("eesm"))?;
        let p = e.0.predict_all(&sinr_arg(sinr, sinr_len)?);
        copy_out(&p, slice_mut(fep_out, fep_len, "fep_out")?)
    })
}

/// Effective SINR (linear) of `sinr` for parameter `beta`. `as_printed`
/// selects the optimistic variant of the mapping.
///
/// # Safety
/// `sinr` must point to `sinr_len` doubles and `out_gamma` be valid.
#[no_mangle]
pub unsafe extern "C" fn feplab_eesm_compress(
    sinr: *const f64,
    sinr_len: usize,
    beta: f64,
    as_printed: bool,
    out_gamma: *mut f64,
) -> FeplabStatus {
    guard(|| {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(
                Error::InvalidArgument(format!("beta must be positive, got {beta}")).into(),
            );
        }
        let sign = if as_printed {
            EesmSign::AsPrinted
        } else {
            EesmSign::Standard
        };
        *out(out_gamma, "out_gamma")? = compress_with(&sinr_arg(sinr, sinr_len)?, beta, sign);
        Ok(())
    })
}

/// 1-based configuration maximizing `payload_k (1 - fep_k)`, ties to the
/// smaller k.
///
/// # Safety
/// `fep` and `payloads` must each point to `len` elements.
#[no_mangle]
pub unsafe extern "C" fn feplab_select_rate(
    fep: *const f64,
    payloads: *const usize,
    len: usize,
    k_out: *mut usize,
) -> FeplabStatus {
    guard(|| {
        let k = select_rate(slice(fep, len, "fep")?, slice(payloads, len, "payloads")?)?;
        *out(k_out, "k_out")? = k;
        Ok(())
    })
}

/// Creates a link chain for the named codec (`"conv_k7_r13"`).
///
/// # Safety
/// `codec` must be a NUL-terminated string and `out_link` valid.
#[no_mangle]
pub unsafe extern "C" fn feplab_link_new(
    codec: *const c_char,
    interleaver_seed: u64,
    out_link: *mut *mut FeplabLink,
) -> FeplabStatus {
    guard(|| {
        let slot = out(out_link, "out_link")?;
        *slot = ptr::null_mut();
        if codec.is_null() {
            return Err(Failure::Null("codec"));
        }
        let name = CStr::from_ptr(codec)
            .to_str()
            .map_err(|_| Error::InvalidArgument("codec name is not valid UTF-8".into()))?;
        *slot = Box::into_raw(Box::new(FeplabLink(LinkChain::from_codec_name(
            name,
            interleaver_seed,
        )?)));
        Ok(())
    })
}

/// # Safety
/// `link` must come from [`feplab_link_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn feplab_link_free(link: *mut FeplabLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Monte Carlo FEP of one configuration over `trials` frames on the
/// channel with linear SINRs `sinr` (one per subcarrier).
///
/// # Safety
/// `sinr` must point to `sinr_len` doubles and `fep_out` be valid.
#[no_mangle]
pub unsafe extern "C" fn feplab_link_estimate_fep(
    link: *const FeplabLink,
    frame_symbols: usize,
    code_rate: f64,
    sinr: *const f64,
    sinr_len: usize,
    trials: usize,
    seed: u64,
    fep_out: *mut f64,
) -> FeplabStatus {
    guard(|| {
        let l = link.as_ref().ok_or(Failure::Null("link"))?;
        let gamma = sinr_arg(sinr, sinr_len)?;
        let cfg = LinkConfig::new(1, gamma.len(), frame_symbols, 2, code_rate)?;
        let est = estimate_fep_mc(
            &l.0,
            &cfg,
            &ChannelRealization::from_sinrs(&gamma),
            trials,
            seed,
        )?;
        *out(fep_out, "fep_out")? = est.estimate;
        Ok(())
    })
}
