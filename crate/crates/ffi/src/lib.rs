//! C ABI over `sicluster`.
//!
//! Every fallible call returns a [`SicStatus`]; on failure the message is
//! available from [`sic_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sicluster::defects::{preparation_time, DefectError, TimingMode, TimingModel};
use sicluster::donor::{predicted_edge_set, run_protocol, Backend, DonorError, DonorLattice, ProtocolKind, ProtocolRun};
use sicluster::graph::GraphState;
use sicluster::pulse::{fidelity_sweep, PulseError, TwoSpinSystem, TWO_PI};
use sicluster::rng::SeedStream;
use sicluster::statevector::DenseError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SicStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A backend or memory cap was exceeded.
    ResourceLimit = 3,
    SimulationFailed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SicProtocol {
    Standard = 0,
    Square = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SicBackend {
    Stabilizer = 0,
    Statevector = 1,
}

/// Donor lattice with its dead sites.
pub struct SicLattice(DonorLattice);

/// Result of a cluster-preparation run.
pub struct SicCluster {
    lattice: DonorLattice,
    kind: ProtocolKind,
    run: ProtocolRun,
    /// Graph with the measurement frame applied.
    graph: GraphState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: SicStatus, msg: impl Into<String>) -> SicStatus {
    set_error(msg);
    status
}

trait Classify {
    fn status(&self) -> SicStatus;
}

impl Classify for DonorError {
    fn status(&self) -> SicStatus {
        match self {
            DonorError::InvalidSize { .. } | DonorError::DeadOutOfBounds(..) | DonorError::InvalidPolarization(_) => {
                SicStatus::InvalidArgument
            }
            DonorError::BackendCap { .. } | DonorError::Dense(DenseError::TooManyQubits { .. }) => SicStatus::ResourceLimit,
            _ => SicStatus::SimulationFailed,
        }
    }
}

impl Classify for PulseError {
    fn status(&self) -> SicStatus {
        SicStatus::InvalidArgument
    }
}

impl Classify for DefectError {
    fn status(&self) -> SicStatus {
        SicStatus::InvalidArgument
    }
}

fn check<T, E: Classify + std::fmt::Display>(r: Result<T, E>) -> Result<T, SicStatus> {
    r.map_err(|e| fail(e.status(), e.to_string()))
}

/// Runs `f`, clearing the last error first and turning panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), SicStatus>) -> SicStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SicStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SicStatus::Panic, msg)
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), SicStatus> {
    if p.is_null() {
        return Err(fail(SicStatus::NullPointer, format!("{name} is null")));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates an `lx` by `ly` lattice. `dead` holds `n_dead` `(i, j)` pairs
/// (`2 * n_dead` values) and may be null when `n_dead` is 0.
///
/// # Safety
/// `dead` must point to `2 * n_dead` readable values and `out` must be a
/// valid pointer to write to.
#[no_mangle]
pub unsafe extern "C" fn sic_lattice_new(
    lx: usize,
    ly: usize,
    dead: *const usize,
    n_dead: usize,
    out: *mut *mut SicLattice,
) -> SicStatus {
    guard(|| {
        non_null(out, "out")?;
        let sites: &[usize] = if n_dead == 0 {
            &[]
        } else {
            non_null(dead, "dead")?;
            // SAFETY: caller guarantees 2 * n_dead readable values.
            unsafe { std::slice::from_raw_parts(dead, 2 * n_dead) }
        };
        let lattice = check(DonorLattice::with_dead(lx, ly, sites.chunks_exact(2).map(|p| (p[0], p[1]))))?;
        // SAFETY: `out` checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(SicLattice(lattice))) };
        Ok(())
    })
}

/// # Safety
/// `lattice` must be null or a handle from `sic_lattice_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sic_lattice_free(lattice: *mut SicLattice) {
    if !lattice.is_null() {
        // SAFETY: caller passes a live handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(lattice) });
    }
}

/// # Safety
/// `lattice` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sic_lattice_live_count(lattice: *const SicLattice, out: *mut usize) -> SicStatus {
    guard(|| {
        non_null(lattice, "lattice")?;
        non_null(out, "out")?;
        // SAFETY: both pointers checked non-null; validity is the caller's contract.
        unsafe { *out = (*lattice).0.live_count() };
        Ok(())
    })
}

/// Runs a preparation protocol on `lattice` with outcomes drawn from `seed`.
///
/// # Safety
/// `lattice` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sic_cluster_build(
    lattice: *const SicLattice,
    protocol: SicProtocol,
    backend: SicBackend,
    seed: u64,
    out: *mut *mut SicCluster,
) -> SicStatus {
    guard(|| {
        non_null(lattice, "lattice")?;
        non_null(out, "out")?;
        // SAFETY: checked non-null; validity is the caller's contract.
        let lattice = unsafe { &(*lattice).0 };
        let kind = match protocol {
            SicProtocol::Standard => ProtocolKind::Standard,
            SicProtocol::Square => ProtocolKind::Square,
        };
        let backend = match backend {
            SicBackend::Stabilizer => Backend::Stabilizer,
            SicBackend::Statevector => Backend::Statevector,
        };
        let mut rng = SeedStream::new(seed).rng("protocol");
        let run = check(run_protocol(lattice, &kind.steps(), backend, &mut rng))?;
        let graph = run.corrected_graph();
        let cluster = SicCluster { lattice: lattice.clone(), kind, run, graph };
        // SAFETY: `out` checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(cluster)) };
        Ok(())
    })
}

/// # Safety
/// `cluster` must be null or a handle from `sic_cluster_build` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sic_cluster_free(cluster: *mut SicCluster) {
    if !cluster.is_null() {
        // SAFETY: caller passes a live handle created by Box::into_raw.
        drop(unsafe { Box::from_raw(cluster) });
    }
}

/// Vertex count (one per lattice site, dead sites included).
///
/// # Safety
/// `cluster` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sic_cluster_vertex_count(cluster: *const SicCluster, out: *mut usize) -> SicStatus {
    guard(|| {
        non_null(cluster, "cluster")?;
        non_null(out, "out")?;
        // SAFETY: both pointers checked non-null.
        unsafe { *out = (*cluster).graph.len() };
        Ok(())
    })
}

/// Copies the edges as `(a, b)` pairs with `a < b` into `buf`, which holds
/// `capacity` pairs. `n_edges` receives the edge count even when the buffer
/// is too small; `buf` may then be null.
///
/// # Safety
/// `buf` must have room for `2 * capacity` values; `n_edges` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sic_cluster_edges(
    cluster: *const SicCluster,
    buf: *mut usize,
    capacity: usize,
    n_edges: *mut usize,
) -> SicStatus {
    guard(|| {
        non_null(cluster, "cluster")?;
        non_null(n_edges, "n_edges")?;
        // SAFETY: checked non-null.
        let edges = unsafe { (*cluster).graph.edges() };
        unsafe { *n_edges = edges.len() };
        if edges.len() > capacity {
            return Err(fail(SicStatus::BufferTooSmall, format!("{} edges, buffer holds {capacity}", edges.len())));
        }
        if edges.is_empty() {
            return Ok(());
        }
        non_null(buf, "buf")?;
        // SAFETY: caller guarantees room for 2 * capacity >= 2 * edges.len() values.
        let dst = unsafe { std::slice::from_raw_parts_mut(buf, 2 * edges.len()) };
        for (pair, (a, b)) in dst.chunks_exact_mut(2).zip(edges) {
            pair[0] = a;
            pair[1] = b;
        }
        Ok(())
    })
}

/// Whether the raw measured graph has exactly the predicted edge set.
///
/// # Safety
/// `cluster` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sic_cluster_matches_prediction(cluster: *const SicCluster, out: *mut bool) -> SicStatus {
    guard(|| {
        non_null(cluster, "cluster")?;
        non_null(out, "out")?;
        // SAFETY: both pointers checked non-null.
        let c = unsafe { &*cluster };
        unsafe { *out = predicted_edge_set(&c.lattice, c.kind) == c.run.graph.edges() };
        Ok(())
    })
}

/// The corrected graph as JSON; free the result with `sic_string_free`.
/// Returns null on failure.
///
/// # Safety
/// `cluster` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sic_cluster_to_json(cluster: *const SicCluster) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        non_null(cluster, "cluster")?;
        // SAFETY: checked non-null.
        let json = unsafe { (*cluster).graph.to_json() };
        result = CString::new(json).map_err(|e| fail(SicStatus::SimulationFailed, e.to_string()))?.into_raw();
        Ok(())
    });
    result
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sic_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: caller passes a string created by CString::into_raw.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Fidelity of the composite controlled-phase `C(theta)` on the default
/// two-spin system. `rabi_hz` is the drive frequency in Hz; infinity or a
/// non-positive value selects instantaneous pulses.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sic_composite_fidelity(theta: f64, rabi_hz: f64, out: *mut f64) -> SicStatus {
    guard(|| {
        non_null(out, "out")?;
        let omega = (rabi_hz.is_finite() && rabi_hz > 0.0).then(|| TWO_PI * rabi_hz);
        let sweep = check(fidelity_sweep(&TwoSpinSystem::default(), &[theta], &[omega]))?;
        // SAFETY: checked non-null.
        unsafe { *out = sweep.rows[0].fidelity };
        Ok(())
    })
}

/// Preparation time in seconds for `n` donors with default timing
/// parameters, sequential or parallel shuttling.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sic_preparation_time(n: usize, parallel: bool, out: *mut f64) -> SicStatus {
    guard(|| {
        non_null(out, "out")?;
        let tm = TimingModel {
            mode: if parallel { TimingMode::Parallel } else { TimingMode::Sequential },
            ..TimingModel::default()
        };
        let t = check(preparation_time(n, &tm))?;
        // SAFETY: checked non-null.
        unsafe { *out = t };
        Ok(())
    })
}
