//! C ABI over `vrlite`.
//!
//! Every fallible call returns a [`VrStatus`]. On failure the message is kept
//! per thread and can be read with [`vr_last_error`]. Handles are opaque and
//! must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use vrlite::data::{gen_gaussian_classification, gen_linear_regression, read_libsvm_file, SyntheticSpec};
use vrlite::dist::codec::{decode_message, encode_message, message_payload_len, LEN_PREFIX};
use vrlite::dist::{MessageTag, ProtocolMessage};
use vrlite::optim::SequentialRun;
use vrlite::{Algorithm, Dataset, DenseVector, Error, GradientPoint, LabeledSample, LossModel, Task};

pub const VR_ALGO_SGD: u32 = 0;
pub const VR_ALGO_SVRG: u32 = 1;
pub const VR_ALGO_SAGA: u32 = 2;
pub const VR_ALGO_VRLITE: u32 = 3;

pub const VR_TASK_CLASSIFICATION: u32 = 0;
pub const VR_TASK_REGRESSION: u32 = 1;

pub const VR_DEFAULT_LAMBDA: f64 = 1e-4;

pub const VR_TAG_SYNC_REPORT: u8 = 0;
pub const VR_TAG_ASYNC_DELTA: u8 = 1;
pub const VR_TAG_GLOBAL_STATE: u8 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Parse = 4,
    Io = 5,
    Decode = 6,
    Diverged = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Opaque dataset handle.
pub struct VrDataset {
    inner: Dataset,
}

/// Opaque optimizer handle. Owns a copy of the dataset it trains on.
pub struct VrRun {
    run: SequentialRun,
    model: LossModel,
    data: Dataset,
    base_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: VrStatus, msg: impl Into<String>) -> VrStatus {
    set_last_error(msg.into());
    status
}

fn status_of(err: &Error) -> VrStatus {
    match err {
        Error::DimensionMismatch { .. } => VrStatus::DimensionMismatch,
        Error::Parse { .. } => VrStatus::Parse,
        Error::Io(_) | Error::PathIo { .. } => VrStatus::Io,
        Error::Decode(_) => VrStatus::Decode,
        Error::Diverged { .. } | Error::AllDiverged => VrStatus::Diverged,
        _ => VrStatus::InvalidArgument,
    }
}

impl From<Error> for VrStatus {
    fn from(err: Error) -> Self {
        let status = status_of(&err);
        set_last_error(err.to_string());
        status
    }
}

/// Runs `f`, turning a panic into [`VrStatus::Panic`] so it never crosses
/// the C boundary.
fn guard(f: impl FnOnce() -> Result<(), VrStatus>) -> VrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VrStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(VrStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], VrStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(VrStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], VrStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(VrStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, VrStatus> {
    p.as_ref()
        .ok_or_else(|| fail(VrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, VrStatus> {
    p.as_mut()
        .ok_or_else(|| fail(VrStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), VrStatus> {
    if out.is_null() {
        return Err(fail(VrStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

fn task_from(code: u32) -> Result<Task, VrStatus> {
    match code {
        VR_TASK_CLASSIFICATION => Ok(Task::Classification),
        VR_TASK_REGRESSION => Ok(Task::Regression),
        _ => Err(fail(
            VrStatus::InvalidArgument,
            format!("unknown task code {code}"),
        )),
    }
}

fn algo_from(code: u32) -> Result<Algorithm, VrStatus> {
    match code {
        VR_ALGO_SGD => Ok(Algorithm::Sgd),
        VR_ALGO_SVRG => Ok(Algorithm::Svrg),
        VR_ALGO_SAGA => Ok(Algorithm::Saga),
        VR_ALGO_VRLITE => Ok(Algorithm::VrLite),
        _ => Err(fail(
            VrStatus::InvalidArgument,
            format!("unknown algorithm code {code}"),
        )),
    }
}

fn tag_from(code: u8) -> Result<MessageTag, VrStatus> {
    MessageTag::from_u8(code)
        .ok_or_else(|| fail(VrStatus::InvalidArgument, format!("unknown message tag {code}")))
}

fn box_out<T>(out: *mut *mut T, value: T) -> Result<(), VrStatus> {
    unsafe { write_out(out, Box::into_raw(Box::new(value)), "out") }
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a dataset from a row-major `n x d` feature matrix and `n` labels.
///
/// # Safety
/// `features` must point to `n * d` doubles and `labels` to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn vr_dataset_from_dense(
    features: *const f64,
    labels: *const f64,
    n: usize,
    d: usize,
    task: u32,
    out: *mut *mut VrDataset,
) -> VrStatus {
    guard(|| {
        let task = task_from(task)?;
        let total = n
            .checked_mul(d)
            .ok_or_else(|| fail(VrStatus::InvalidArgument, "n * d overflows"))?;
        let feats = input(features, total, "features")?;
        let labels = input(labels, n, "labels")?;
        let samples = labels
            .iter()
            .enumerate()
            .map(|(i, &b)| LabeledSample::new(feats[i * d..(i + 1) * d].to_vec(), b))
            .collect();
        let inner = Dataset::new(samples, task)?;
        box_out(out, VrDataset { inner })
    })
}

/// Generates the 5000 x 20 synthetic toy problem for `task`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn vr_dataset_toy(task: u32, seed: u64, out: *mut *mut VrDataset) -> VrStatus {
    guard(|| {
        let task = task_from(task)?;
        let spec = SyntheticSpec::toy(task, seed);
        let inner = match task {
            Task::Classification => gen_gaussian_classification(&spec)?,
            Task::Regression => gen_linear_regression(&spec)?.dataset,
        };
        box_out(out, VrDataset { inner })
    })
}

/// Reads a LIBSVM file. The task is inferred from the labels.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vr_dataset_read_libsvm(path: *const c_char, out: *mut *mut VrDataset) -> VrStatus {
    guard(|| {
        if path.is_null() {
            return Err(fail(VrStatus::NullPointer, "path is null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(VrStatus::InvalidArgument, "path is not valid UTF-8"))?;
        let inner = read_libsvm_file(path, None, None)?;
        box_out(out, VrDataset { inner })
    })
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vr_dataset_len(ds: *const VrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.len())
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vr_dataset_dim(ds: *const VrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.dim())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vr_dataset_free(ds: *mut VrDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Starts an optimizer at `x = 0`. The loss follows the dataset task.
/// With `reuse_step_gradient` set, the averaged gradient reuses the one
/// computed for the step instead of a fresh evaluation after it.
///
/// # Safety
/// `ds` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vr_run_new(
    ds: *const VrDataset,
    algo: u32,
    eta: f64,
    lambda: f64,
    seed: u64,
    reuse_step_gradient: bool,
    out: *mut *mut VrRun,
) -> VrStatus {
    guard(|| {
        let data = handle(ds, "dataset")?.inner.clone();
        let algo = algo_from(algo)?;
        let model = LossModel::for_task(data.task(), lambda)?;
        let grad_point = if reuse_step_gradient {
            GradientPoint::PreUpdate
        } else {
            GradientPoint::PostUpdate
        };
        let base_norm = model
            .full_gradient(data.samples(), &DenseVector::zeros(data.dim()))?
            .norm();
        if base_norm == 0.0 {
            return Err(Error::ZeroInitialGradient.into());
        }
        let run = SequentialRun::new(algo, model, &data, eta, seed, grad_point)?;
        box_out(
            out,
            VrRun {
                run,
                model,
                data,
                base_norm,
            },
        )
    })
}

/// Runs `epochs` more epochs. Stops with [`VrStatus::Diverged`] as soon as
/// the iterate is no longer finite.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn vr_run_advance(run: *mut VrRun, epochs: usize) -> VrStatus {
    guard(|| {
        let r = handle_mut(run, "run")?;
        for _ in 0..epochs {
            r.run.advance(&r.data)?;
            if !r.run.x().is_finite() {
                return Err(Error::Diverged {
                    epoch: r.run.epochs(),
                }
                .into());
            }
        }
        Ok(())
    })
}

/// Epochs completed so far, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vr_run_epochs(run: *const VrRun) -> usize {
    run.as_ref().map_or(0, |r| r.run.epochs())
}

/// Copies the current iterate into `out`, which must hold exactly the
/// dataset dimension.
///
/// # Safety
/// `run` must be a live handle and `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vr_run_copy_x(run: *const VrRun, out: *mut f64, len: usize) -> VrStatus {
    guard(|| {
        let r = handle(run, "run")?;
        let x = r.run.x();
        if len != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                actual: len,
            }
            .into());
        }
        output(out, len, "out")?.copy_from_slice(x);
        Ok(())
    })
}

/// `||grad f(x)|| / ||grad f(0)||` over the whole dataset.
///
/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vr_run_rel_grad_norm(run: *const VrRun, out: *mut f64) -> VrStatus {
    guard(|| {
        let r = handle(run, "run")?;
        let g = r.model.full_gradient(r.data.samples(), r.run.x())?;
        write_out(out, g.norm() / r.base_norm, "out")
    })
}

/// # Safety
/// `run` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vr_run_objective(run: *const VrRun, out: *mut f64) -> VrStatus {
    guard(|| {
        let r = handle(run, "run")?;
        let f = r.model.objective(r.data.samples(), r.run.x())?;
        write_out(out, f, "out")
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vr_run_free(run: *mut VrRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Size in bytes of one encoded message frame, length prefix included.
#[no_mangle]
pub extern "C" fn vr_message_frame_len(d: usize) -> usize {
    LEN_PREFIX + message_payload_len(d)
}

/// Encodes a protocol message into `buf`. `written` receives the frame size;
/// on [`VrStatus::BufferTooSmall`] it receives the size required.
///
/// # Safety
/// `v1`, `v2` and `v3` must each point to `d` doubles, `buf` to `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn vr_message_encode(
    tag: u8,
    worker_id: u32,
    epoch: u32,
    v1: *const f64,
    v2: *const f64,
    v3: *const f64,
    d: usize,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> VrStatus {
    guard(|| {
        let tag = tag_from(tag)?;
        let need = vr_message_frame_len(d);
        write_out(written, need, "written")?;
        if cap < need {
            return Err(fail(
                VrStatus::BufferTooSmall,
                format!("frame needs {need} bytes, buffer holds {cap}"),
            ));
        }
        let vec = |p, name| input(p, d, name).map(DenseVector::from);
        let msg = ProtocolMessage::new(
            tag,
            worker_id,
            epoch,
            vec(v1, "v1")?,
            vec(v2, "v2")?,
            vec(v3, "v3")?,
        )?;
        output(buf, need, "buf")?.copy_from_slice(&encode_message(&msg));
        Ok(())
    })
}

/// Decodes one complete frame of dimension `d`. The vectors are written to
/// `v1`, `v2` and `v3`, each of which must hold `d` doubles.
///
/// # Safety
/// `buf` must point to `len` bytes and every output pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn vr_message_decode(
    buf: *const u8,
    len: usize,
    d: usize,
    tag: *mut u8,
    worker_id: *mut u32,
    epoch: *mut u32,
    v1: *mut f64,
    v2: *mut f64,
    v3: *mut f64,
) -> VrStatus {
    guard(|| {
        let bytes = input(buf, len, "buf")?;
        let msg = decode_message(bytes, d).map_err(Error::from)?;
        output(v1, d, "v1")?.copy_from_slice(&msg.v1);
        output(v2, d, "v2")?.copy_from_slice(&msg.v2);
        output(v3, d, "v3")?.copy_from_slice(&msg.v3);
        write_out(tag, msg.tag as u8, "tag")?;
        write_out(worker_id, msg.worker_id, "worker_id")?;
        write_out(epoch, msg.epoch, "epoch")
    })
}
