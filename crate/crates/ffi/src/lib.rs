//! C ABI for the adia-check library.
//!
//! Opaque handles (`AdiaModel`, `AdiaTrajectory`), integer status codes, and
//! a thread-local error message. The header is generated by cbindgen at
//! build time into `include/adia_check.h`.
//!
//! Conventions:
//! * Every fallible function returns an [`AdiaStatus`]; results come back
//!   through out-pointers that are written only on `ADIA_OK`.
//! * Handles are created by `adia_*_new`-style constructors and released
//!   with the matching `adia_*_free`; `free` on NULL is a no-op.
//! * [`adia_last_error_message`] describes the most recent failure on the
//!   calling thread; the pointer stays valid until the next failing call on
//!   that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use adia_check::diagnostics;
use adia_check::error::AdiaError;
use adia_check::hamiltonians::HamiltonianModel;
use adia_check::mat2::RealVec3;
use adia_check::propagation::{self, IntegratorConfig, Method, TimeGrid, Trajectory};
use adia_check::scenario;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdiaStatus {
    AdiaOk = 0,
    AdiaErrInvalidArgument = 1,
    AdiaErrDegenerateSpectrum = 2,
    AdiaErrIntegrationDiverged = 3,
    AdiaErrUnsupportedModel = 4,
    AdiaErrConfig = 5,
    AdiaErrIo = 6,
    AdiaErrNullPointer = 7,
    AdiaErrUtf8 = 8,
    AdiaErrIndex = 9,
    AdiaErrPanic = 10,
}

/// Opaque model handle.
pub struct AdiaModel {
    inner: HamiltonianModel,
}

/// Opaque trajectory handle: propagator samples plus spectral frames.
pub struct AdiaTrajectory {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn record_error(status: AdiaStatus, message: &str) -> AdiaStatus {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
    status
}

fn status_of(err: &AdiaError) -> AdiaStatus {
    match err {
        AdiaError::InvalidArgument(_) => AdiaStatus::AdiaErrInvalidArgument,
        AdiaError::DegenerateSpectrum { .. } => AdiaStatus::AdiaErrDegenerateSpectrum,
        AdiaError::IntegrationDiverged { .. } => AdiaStatus::AdiaErrIntegrationDiverged,
        AdiaError::UnsupportedModel { .. } => AdiaStatus::AdiaErrUnsupportedModel,
        AdiaError::Config { .. } => AdiaStatus::AdiaErrConfig,
        AdiaError::Io { .. } => AdiaStatus::AdiaErrIo,
        AdiaError::EnsembleMember { source, .. } => status_of(source),
    }
}

fn from_error(err: AdiaError) -> AdiaStatus {
    record_error(status_of(&err), &err.to_string())
}

/// Run `f` with panics converted to `ADIA_ERR_PANIC`.
fn guarded<F: FnOnce() -> AdiaStatus>(f: F) -> AdiaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => record_error(AdiaStatus::AdiaErrPanic, "internal panic"),
    }
}

fn null_error(what: &str) -> AdiaStatus {
    record_error(
        AdiaStatus::AdiaErrNullPointer,
        &format!("{what} must not be NULL"),
    )
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated C string valid for reads.
unsafe fn utf8_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, AdiaStatus> {
    if ptr.is_null() {
        return Err(null_error(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        record_error(
            AdiaStatus::AdiaErrUtf8,
            &format!("{what} is not valid UTF-8"),
        )
    })
}

fn deliver_model(model: HamiltonianModel, out: *mut *mut AdiaModel) -> AdiaStatus {
    let handle = Box::new(AdiaModel { inner: model });
    unsafe { *out = Box::into_raw(handle) };
    AdiaStatus::AdiaOk
}

/// Message describing the most recent failure on this thread. Never NULL;
/// empty when nothing failed yet. Valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn adia_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Resonantly modulated rotating-field model with the closed-form
/// propagator (the one whose frame prediction fails at half period).
///
/// # Safety
/// `out` must be a valid pointer to an `AdiaModel*`.
#[no_mangle]
pub unsafe extern "C" fn adia_model_counterexample(
    omega0: f64,
    tau: f64,
    out: *mut *mut AdiaModel,
) -> AdiaStatus {
    guarded(|| {
        if out.is_null() {
            return null_error("out");
        }
        match HamiltonianModel::counterexample(omega0, tau) {
            Ok(m) => deliver_model(m, out),
            Err(e) => from_error(e),
        }
    })
}

/// Plain rotating-field model `R(t) = ω₀ n(t)`.
///
/// # Safety
/// `out` must be a valid pointer to an `AdiaModel*`.
#[no_mangle]
pub unsafe extern "C" fn adia_model_rotating_field(
    omega0: f64,
    tau: f64,
    out: *mut *mut AdiaModel,
) -> AdiaStatus {
    guarded(|| {
        if out.is_null() {
            return null_error("out");
        }
        match HamiltonianModel::rotating_field(omega0, tau) {
            Ok(m) => deliver_model(m, out),
            Err(e) => from_error(e),
        }
    })
}

/// Landau–Zener sweep `R(t) = Ω e_x − (Δ̇₀ t / 2) e_z`.
///
/// # Safety
/// `out` must be a valid pointer to an `AdiaModel*`.
#[no_mangle]
pub unsafe extern "C" fn adia_model_landau_zener(
    rabi: f64,
    sweep_rate: f64,
    out: *mut *mut AdiaModel,
) -> AdiaStatus {
    guarded(|| {
        if out.is_null() {
            return null_error("out");
        }
        match HamiltonianModel::landau_zener(rabi, sweep_rate) {
            Ok(m) => deliver_model(m, out),
            Err(e) => from_error(e),
        }
    })
}

/// Constant-field model.
///
/// # Safety
/// `out` must be a valid pointer to an `AdiaModel*`.
#[no_mangle]
pub unsafe extern "C" fn adia_model_constant(
    rx: f64,
    ry: f64,
    rz: f64,
    out: *mut *mut AdiaModel,
) -> AdiaStatus {
    guarded(|| {
        if out.is_null() {
            return null_error("out");
        }
        match HamiltonianModel::constant(RealVec3::new(rx, ry, rz)) {
            Ok(m) => deliver_model(m, out),
            Err(e) => from_error(e),
        }
    })
}

/// Load a tabulated model (`# adia-model v1` format) from a file.
///
/// # Safety
/// `path` must be a NUL-terminated C string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn adia_model_from_table_file(
    path: *const c_char,
    out: *mut *mut AdiaModel,
) -> AdiaStatus {
    guarded(|| {
        if out.is_null() {
            return null_error("out");
        }
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match adia_check::hamiltonians::TabulatedField::load(Path::new(path)) {
            Ok(table) => deliver_model(HamiltonianModel::Tabulated(table), out),
            Err(e) => from_error(e),
        }
    })
}

/// Release a model handle. NULL is a no-op.
///
/// # Safety
/// `model` must be NULL or a pointer from an `adia_model_*` constructor not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn adia_model_free(model: *mut AdiaModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Field vector at time `t`: writes `a0` and `r_out[3]` with
/// `H = a0·1 + r·σ`.
///
/// # Safety
/// `model` must be a live handle; `a0_out` and `r_out` valid for writes
/// (`r_out` for 3 doubles).
#[no_mangle]
pub unsafe extern "C" fn adia_model_field(
    model: *const AdiaModel,
    t: f64,
    a0_out: *mut f64,
    r_out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        if model.is_null() {
            return null_error("model");
        }
        if a0_out.is_null() || r_out.is_null() {
            return null_error("a0_out/r_out");
        }
        if !t.is_finite() {
            return record_error(AdiaStatus::AdiaErrInvalidArgument, "t must be finite");
        }
        let (a0, r) = (*model).inner.field_vector(t);
        *a0_out = a0;
        *r_out.add(0) = r.x;
        *r_out.add(1) = r.y;
        *r_out.add(2) = r.z;
        AdiaStatus::AdiaOk
    })
}

/// Instantaneous eigenvalues `±|R| + a0` at time `t`.
///
/// # Safety
/// `model` must be a live handle; `e_plus_out`, `e_minus_out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn adia_model_energies(
    model: *const AdiaModel,
    t: f64,
    e_plus_out: *mut f64,
    e_minus_out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        if model.is_null() {
            return null_error("model");
        }
        if e_plus_out.is_null() || e_minus_out.is_null() {
            return null_error("e_plus_out/e_minus_out");
        }
        match (*model).inner.spectral_frame(t, None) {
            Ok(frame) => {
                *e_plus_out = frame.e_plus;
                *e_minus_out = frame.e_minus;
                AdiaStatus::AdiaOk
            }
            Err(e) => from_error(e),
        }
    })
}

/// Slowness ratio `|⟨E₊|Ė₋⟩| / |E₊ − E₋|` at time `t`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_model_adiabaticity_ratio(
    model: *const AdiaModel,
    t: f64,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        if model.is_null() {
            return null_error("model");
        }
        if out.is_null() {
            return null_error("out");
        }
        match (*model).inner.adiabaticity_ratio(t) {
            Ok(v) => {
                *out = v;
                AdiaStatus::AdiaOk
            }
            Err(e) => from_error(e),
        }
    })
}

/// Closed-form survival probability for models with an explicit propagator
/// parametrization (counterexample, rotating field).
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_q_analytic(
    model: *const AdiaModel,
    t: f64,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        if model.is_null() {
            return null_error("model");
        }
        if out.is_null() {
            return null_error("out");
        }
        match diagnostics::q_analytic(&(*model).inner, t) {
            Ok(v) => {
                *out = v;
                AdiaStatus::AdiaOk
            }
            Err(e) => from_error(e),
        }
    })
}

fn build_grid_cfg(
    t0: f64,
    t1: f64,
    steps: usize,
    substeps: usize,
) -> Result<(TimeGrid, IntegratorConfig), AdiaError> {
    let grid = TimeGrid::new(t0, t1, steps)?;
    let cfg = IntegratorConfig {
        method: Method::Rk4Fixed,
        substeps: substeps.max(1),
        ..Default::default()
    };
    Ok((grid, cfg))
}

/// Propagate `i U̇ = H U` over `[t0, t1]` with `steps` output intervals and
/// `substeps` internal RK4 sub-steps per interval (0 means 1).
///
/// # Safety
/// `model` must be a live handle; `out` a valid pointer to an
/// `AdiaTrajectory*`.
#[no_mangle]
pub unsafe extern "C" fn adia_propagate(
    model: *const AdiaModel,
    t0: f64,
    t1: f64,
    steps: usize,
    substeps: usize,
    out: *mut *mut AdiaTrajectory,
) -> AdiaStatus {
    guarded(|| {
        if model.is_null() {
            return null_error("model");
        }
        if out.is_null() {
            return null_error("out");
        }
        let run = build_grid_cfg(t0, t1, steps, substeps)
            .and_then(|(grid, cfg)| propagation::propagate(&(*model).inner, &grid, &cfg));
        match run {
            Ok(traj) => {
                *out = Box::into_raw(Box::new(AdiaTrajectory { inner: traj }));
                AdiaStatus::AdiaOk
            }
            Err(e) => from_error(e),
        }
    })
}

/// Release a trajectory handle. NULL is a no-op.
///
/// # Safety
/// `traj` must be NULL or a pointer from [`adia_propagate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn adia_trajectory_free(traj: *mut AdiaTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples (grid steps + 1); 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn adia_trajectory_samples(traj: *const AdiaTrajectory) -> usize {
    if traj.is_null() {
        return 0;
    }
    (*traj).inner.len()
}

unsafe fn sample_scalar<F>(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
    f: F,
) -> AdiaStatus
where
    F: FnOnce(&Trajectory, usize) -> Result<f64, AdiaError>,
{
    if traj.is_null() {
        return null_error("trajectory");
    }
    if out.is_null() {
        return null_error("out");
    }
    let inner = &(*traj).inner;
    if index >= inner.len() {
        return record_error(
            AdiaStatus::AdiaErrIndex,
            &format!("index {index} out of range ({} samples)", inner.len()),
        );
    }
    match f(inner, index) {
        Ok(v) => {
            *out = v;
            AdiaStatus::AdiaOk
        }
        Err(e) => from_error(e),
    }
}

/// Time of sample `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_trajectory_time(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| sample_scalar(traj, index, out, |tr, i| Ok(tr.time(i))))
}

/// `‖U†U − 1‖_F` at sample `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_trajectory_unitarity_error(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| sample_scalar(traj, index, out, |tr, i| Ok(tr.unitarity_errors()[i])))
}

/// Propagator sample as interleaved re/im, row-major: 8 doubles.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes of 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn adia_trajectory_unitary(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        if traj.is_null() {
            return null_error("trajectory");
        }
        if out.is_null() {
            return null_error("out");
        }
        let inner = &(*traj).inner;
        if index >= inner.len() {
            return record_error(
                AdiaStatus::AdiaErrIndex,
                &format!("index {index} out of range ({} samples)", inner.len()),
            );
        }
        let u = inner.u(index);
        let mut k = 0;
        for row in 0..2 {
            for col in 0..2 {
                *out.add(k) = u.m[row][col].re;
                *out.add(k + 1) = u.m[row][col].im;
                k += 2;
            }
        }
        AdiaStatus::AdiaOk
    })
}

/// Survival probability `Q` at sample `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_survival_q(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| sample_scalar(traj, index, out, diagnostics::survival_q))
}

/// Eigenstate overlap `F₀` at sample `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_overlap_f0(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        sample_scalar(traj, index, out, |tr, i| {
            diagnostics::overlap_f0(tr.frames()?, i)
        })
    })
}

/// Projected-prediction residual `‖U P₊(0) U† − P₊(t)‖_F` at sample `index`.
///
/// # Safety
/// `traj` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_prediction_residual(
    traj: *const AdiaTrajectory,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| sample_scalar(traj, index, out, diagnostics::prediction_residual_at))
}

/// Fidelity between exact evolution and evolution under the
/// spectral-projection generator, evaluated at sample `index` of a fresh
/// propagation of both over `[t0, t1]`.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn adia_avron_fidelity(
    model: *const AdiaModel,
    t0: f64,
    t1: f64,
    steps: usize,
    index: usize,
    out: *mut f64,
) -> AdiaStatus {
    guarded(|| {
        if model.is_null() {
            return null_error("model");
        }
        if out.is_null() {
            return null_error("out");
        }
        let run = build_grid_cfg(t0, t1, steps, 1).and_then(|(grid, cfg)| {
            diagnostics::avron_fidelity(&(*model).inner, &grid, &cfg, index)
        });
        match run {
            Ok(v) => {
                *out = v;
                AdiaStatus::AdiaOk
            }
            Err(e) => from_error(e),
        }
    })
}

/// Run a scenario config file end to end and write the CSV report.
///
/// # Safety
/// `config_path` and `out_csv_path` must be NUL-terminated C strings.
#[no_mangle]
pub unsafe extern "C" fn adia_run_scenario_file(
    config_path: *const c_char,
    out_csv_path: *const c_char,
) -> AdiaStatus {
    guarded(|| {
        let config_path = match utf8_arg(config_path, "config_path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let out_csv_path = match utf8_arg(out_csv_path, "out_csv_path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let run = scenario::load_config(Path::new(config_path))
            .and_then(|config| scenario::run_scenario(&config))
            .and_then(|report| report.write_to(Path::new(out_csv_path)));
        match run {
            Ok(()) => AdiaStatus::AdiaOk,
            Err(e) => from_error(e),
        }
    })
}
