//! C ABI over the wavefront tracker.
//!
//! Every function returns a [`WftStatus`]. On failure a message is kept per
//! thread and can be fetched with [`wft_last_error`]. Handles are opaque and
//! must be released with the matching `*_free` function. Panics never cross
//! the boundary; they are reported as `WFT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavefront::tracker::{validate_solution, Tracker};
use wavefront::{Error, FluxFamily, FluxModel, Scenario};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WftStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Model = 4,
    Scenario = 5,
    OutOfRange = 6,
    Validation = 7,
    GlimmViolation = 8,
    EventCap = 9,
    Io = 10,
    Internal = 11,
    Panic = 12,
}

/// Values of the `family` argument of [`wft_flux_model_new`].
pub const WFT_FAMILY_GREENSHIELDS: u32 = 0;
pub const WFT_FAMILY_SKEWED_CUBIC: u32 = 1;

/// Bottleneck quantities at one control speed.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WftGeometry {
    pub u: f64,
    pub tilde_rho: f64,
    pub check_rho: f64,
    pub hat_rho: f64,
    pub star_rho: f64,
    pub capacity: f64,
}

/// One row of the interaction ledger. `kind`: 0 init, 1 collision,
/// 2 AV interaction, 3 control jump.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WftLedgerEntry {
    pub t: f64,
    pub kind: u32,
    pub tv: f64,
    pub gamma: f64,
    pub tv_u: f64,
    pub upsilon: f64,
    pub waves: usize,
    pub delta_upsilon: f64,
}

/// Opaque flux model.
pub struct WftFluxModel(FluxModel);

/// Opaque simulation: a parsed scenario and a tracker that can be advanced.
pub struct WftSimulation {
    scenario: Scenario,
    tracker: Tracker,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> WftStatus {
    match e {
        Error::Domain(_) => WftStatus::Domain,
        Error::Model(_) => WftStatus::Model,
        Error::Scenario(_) => WftStatus::Scenario,
        Error::OutOfRange { .. } => WftStatus::OutOfRange,
        Error::Validation(_) | Error::Cfl { .. } | Error::SnapshotMismatch(_) => WftStatus::Validation,
        Error::GlimmViolation { .. } => WftStatus::GlimmViolation,
        Error::EventCap { .. } => WftStatus::EventCap,
        Error::Io(_) => WftStatus::Io,
        Error::Internal(_) => WftStatus::Internal,
    }
}

struct Fail(WftStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WftStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> WftStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            WftStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            WftStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies `s` into `buf` as a NUL-terminated string, truncating if needed.
/// Returns the buffer size needed to hold all of `s`.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize) -> usize {
    if !buf.is_null() && len > 0 {
        let n = s.len().min(len - 1);
        ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    s.len() + 1
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wft_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` and returns the
/// buffer size needed for the full message. An empty string means the last
/// call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wft_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, len))
}

/// Creates a flux model. `skew` is ignored for Greenshields.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_flux_model_new(
    family: u32,
    rho_max: f64,
    v_max: f64,
    alpha: f64,
    skew: f64,
    out: *mut *mut WftFluxModel,
) -> WftStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let family = match family {
            WFT_FAMILY_GREENSHIELDS => FluxFamily::Greenshields,
            WFT_FAMILY_SKEWED_CUBIC => FluxFamily::SkewedCubic { skew },
            other => return Err(Fail(WftStatus::InvalidArgument, format!("unknown flux family {other}"))),
        };
        let model = FluxModel::new(family, rho_max, v_max, alpha)?;
        *out = Box::into_raw(Box::new(WftFluxModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`wft_flux_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wft_flux_model_free(model: *mut WftFluxModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_flux(model: *const WftFluxModel, rho: f64, out: *mut f64) -> WftStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out_ref(out, "out")?;
        if !(0.0..=m.0.rho_max()).contains(&rho) {
            return Err(Fail(
                WftStatus::Domain,
                format!("density {rho} outside [0, {}]", m.0.rho_max()),
            ));
        }
        *out = m.0.flux(rho);
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_geometry_at(model: *const WftFluxModel, u: f64, out: *mut WftGeometry) -> WftStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let out = out_ref(out, "out")?;
        let g = m.0.geometry_at(u)?;
        *out = WftGeometry {
            u: g.u,
            tilde_rho: g.tilde_rho,
            check_rho: g.check_rho,
            hat_rho: g.hat_rho,
            star_rho: g.star_rho,
            capacity: g.capacity,
        };
        Ok(())
    })
}

/// Parses scenario text and sets up a tracker at time 0.
///
/// # Safety
/// `text` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_new(text: *const c_char, out: *mut *mut WftSimulation) -> WftStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Fail(WftStatus::InvalidArgument, format!("scenario text is not UTF-8: {e}")))?;
        let scenario = Scenario::parse(text)?;
        let tracker = Tracker::init(
            scenario.grids()?,
            &scenario.initial_profile()?,
            &scenario.control_signal()?,
            scenario.y0,
        )?;
        *out = Box::into_raw(Box::new(WftSimulation { scenario, tracker }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle from [`wft_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_free(sim: *mut WftSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn sim_ref<'a>(sim: *const WftSimulation) -> Result<&'a WftSimulation, Fail> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

/// Advances the simulation to `t`, which must exceed the current time. A
/// negative `t` means the scenario's `t_end`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_run(sim: *mut WftSimulation, t: f64) -> WftStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("sim"))?;
        let t = if t < 0.0 { s.scenario.t_end } else { t };
        s.tracker.run(t)?;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_time(sim: *const WftSimulation, out: *mut f64) -> WftStatus {
    guard(|| {
        *out_ref(out, "out")? = sim_ref(sim)?.tracker.time();
        Ok(())
    })
}

/// Density at the current time at each of the `n` positions in `xs`.
///
/// # Safety
/// `xs` and `out` must be valid for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_sample_density(
    sim: *const WftSimulation,
    xs: *const f64,
    n: usize,
    out: *mut f64,
) -> WftStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if n == 0 {
            return Ok(());
        }
        if xs.is_null() || out.is_null() {
            return Err(null("xs or out"));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let out = std::slice::from_raw_parts_mut(out, n);
        let snap = s.tracker.snapshot();
        for (o, &x) in out.iter_mut().zip(xs) {
            *o = snap.value_at(x);
        }
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_av_position(sim: *const WftSimulation, out: *mut f64) -> WftStatus {
    guard(|| {
        *out_ref(out, "out")? = sim_ref(sim)?.tracker.av_position();
        Ok(())
    })
}

/// Current value of the interaction functional.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_upsilon(sim: *const WftSimulation, out: *mut f64) -> WftStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let last = s
            .tracker
            .ledger()
            .last()
            .ok_or_else(|| Fail(WftStatus::Internal, "empty ledger".into()))?;
        *out_ref(out, "out")? = last.upsilon;
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_ledger_len(sim: *const WftSimulation, out: *mut usize) -> WftStatus {
    guard(|| {
        *out_ref(out, "out")? = sim_ref(sim)?.tracker.ledger().len();
        Ok(())
    })
}

/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_ledger_entry(
    sim: *const WftSimulation,
    index: usize,
    out: *mut WftLedgerEntry,
) -> WftStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let out = out_ref(out, "out")?;
        let ledger = s.tracker.ledger();
        let e = ledger.get(index).ok_or_else(|| {
            Fail(
                WftStatus::InvalidArgument,
                format!("ledger index {index} out of range (len {})", ledger.len()),
            )
        })?;
        *out = WftLedgerEntry {
            t: e.t,
            kind: e.kind as u32,
            tv: e.tv,
            gamma: e.gamma,
            tv_u: e.tv_u,
            upsilon: e.upsilon,
            waves: e.waves,
            delta_upsilon: e.delta_upsilon,
        };
        Ok(())
    })
}

/// Re-checks the run so far at `samples` time slices and stores the number
/// of violations found.
///
/// # Safety
/// `sim` must be a live handle and `violations` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_validate(
    sim: *const WftSimulation,
    samples: usize,
    violations: *mut usize,
) -> WftStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let out = out_ref(violations, "violations")?;
        if s.tracker.time() <= 0.0 {
            return Err(Fail(
                WftStatus::InvalidArgument,
                "run the simulation before validating".into(),
            ));
        }
        *out = validate_solution(&s.tracker.history(), samples).violations.len();
        Ok(())
    })
}

/// Copies the scenario hash (64 hex digits) into `buf`; `needed` receives the
/// buffer size required, including the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes; `needed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn wft_simulation_scenario_hash(
    sim: *const WftSimulation,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> WftStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let n = copy_out(&s.scenario.hash(), buf, len);
        if let Some(needed) = needed.as_mut() {
            *needed = n;
        }
        Ok(())
    })
}
