//! C ABI over `coassoc-core`.
//!
//! Every fallible call returns a [`CoassocStatus`]. On failure the message is
//! kept per thread and can be read with [`coassoc_last_error`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coassoc_core::harness::{cluster_ensemble, ConsensusParams, Method};
use coassoc_core::metrics::{score, NmiNorm};
use coassoc_core::pool::{EnsemblePool, Partition};
use coassoc_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoassocStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Dimension = 5,
    Config = 6,
    Numeric = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoassocMethod {
    Eac = 0,
    Lwca = 1,
    Nwca = 2,
    Sdgca = 3,
    OnlySStar = 4,
    NwcaOnly = 5,
    NoSManifold = 6,
    NoDManifold = 7,
    NoBothManifold = 8,
}

impl From<CoassocMethod> for Method {
    fn from(m: CoassocMethod) -> Method {
        match m {
            CoassocMethod::Eac => Method::Eac,
            CoassocMethod::Lwca => Method::Lwca,
            CoassocMethod::Nwca => Method::Nwca,
            CoassocMethod::Sdgca => Method::Sdgca,
            CoassocMethod::OnlySStar => Method::OnlySStar,
            CoassocMethod::NwcaOnly => Method::NwcaOnly,
            CoassocMethod::NoSManifold => Method::NoSManifold,
            CoassocMethod::NoDManifold => Method::NoDManifold,
            CoassocMethod::NoBothManifold => Method::NoBothManifold,
        }
    }
}

/// Consensus parameters. Start from [`coassoc_params_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CoassocParams {
    pub lambda: f64,
    pub eta: f64,
    pub theta: f64,
    pub tau: f64,
    pub beta: f64,
    pub k_steps: usize,
    pub rho: f64,
    pub gamma_max: f64,
    pub gamma_init: f64,
    pub epsilon: f64,
    pub max_iters: usize,
}

impl CoassocParams {
    fn to_core(self) -> ConsensusParams {
        let mut p = ConsensusParams {
            lambda: self.lambda,
            eta: self.eta,
            theta: self.theta,
            tau: self.tau,
            beta: self.beta,
            k_steps: self.k_steps,
            ..ConsensusParams::default()
        };
        p.solver.rho = self.rho;
        p.solver.gamma_max = self.gamma_max;
        p.solver.gamma_init = self.gamma_init;
        p.solver.epsilon = self.epsilon;
        p.solver.max_iters = self.max_iters;
        p
    }
}

/// A pool of base partitions over the same samples.
pub struct CoassocPool {
    inner: EnsemblePool,
}

/// Consensus labels and solver summary.
pub struct CoassocResult {
    labels: Vec<usize>,
    n_clusters: usize,
    iterations: usize,
    converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> CoassocStatus {
    match e {
        Error::MalformedInput { .. } | Error::Format(_) => CoassocStatus::Format,
        Error::Dimension(_) | Error::Bounds(_) => CoassocStatus::Dimension,
        Error::Config(_) => CoassocStatus::Config,
        Error::Numeric(_) => CoassocStatus::Numeric,
        Error::Io { .. } => CoassocStatus::Io,
        Error::Repetition { source, .. } => status_of(source),
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (CoassocStatus, String)>) -> CoassocStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CoassocStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CoassocStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (CoassocStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CoassocStatus, String) {
    (CoassocStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn coassoc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn coassoc_params_default() -> CoassocParams {
    let p = ConsensusParams::default();
    CoassocParams {
        lambda: p.lambda,
        eta: p.eta,
        theta: p.theta,
        tau: p.tau,
        beta: p.beta,
        k_steps: p.k_steps,
        rho: p.solver.rho,
        gamma_max: p.solver.gamma_max,
        gamma_init: p.solver.gamma_init,
        epsilon: p.solver.epsilon,
        max_iters: p.solver.max_iters,
    }
}

/// Builds a pool from `m` partitions of `n` labels each, stored row-major in
/// `labels`. Labels within a partition may be any values; they are
/// re-encoded densely.
///
/// # Safety
/// `labels` must point to `m * n` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coassoc_pool_from_labels(
    labels: *const usize,
    n: usize,
    m: usize,
    seed: u64,
    out: *mut *mut CoassocPool,
) -> CoassocStatus {
    guard(|| {
        if labels.is_null() {
            return Err(null("labels"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let total = n
            .checked_mul(m)
            .ok_or((CoassocStatus::InvalidArgument, "n * m overflows".to_owned()))?;
        let flat = std::slice::from_raw_parts(labels, total);
        let parts = flat.chunks(n.max(1)).take(m).map(Partition::from_labels).collect();
        let inner = EnsemblePool::new(parts, seed).map_err(core_err)?;
        *out = Box::into_raw(Box::new(CoassocPool { inner }));
        Ok(())
    })
}

/// Reads a pool file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coassoc_pool_load(path: *const c_char, out: *mut *mut CoassocPool) -> CoassocStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (CoassocStatus::InvalidArgument, "path is not UTF-8".to_owned()))?;
        let inner = EnsemblePool::load(path).map_err(core_err)?;
        *out = Box::into_raw(Box::new(CoassocPool { inner }));
        Ok(())
    })
}

/// Writes a pool file.
///
/// # Safety
/// `pool` must come from this library and `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn coassoc_pool_save(pool: *const CoassocPool, path: *const c_char) -> CoassocStatus {
    guard(|| {
        let pool = pool.as_ref().ok_or_else(|| null("pool"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (CoassocStatus::InvalidArgument, "path is not UTF-8".to_owned()))?;
        pool.inner.save(path).map_err(core_err)
    })
}

/// Number of samples, or 0 for a null pool.
///
/// # Safety
/// `pool` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn coassoc_pool_n_samples(pool: *const CoassocPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.n_samples())
}

/// Number of partitions, or 0 for a null pool.
///
/// # Safety
/// `pool` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn coassoc_pool_len(pool: *const CoassocPool) -> usize {
    pool.as_ref().map_or(0, |p| p.inner.len())
}

/// # Safety
/// `pool` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn coassoc_pool_free(pool: *mut CoassocPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

/// Clusters the whole pool into `k` groups with `method`. A null `params`
/// means the defaults.
///
/// # Safety
/// `pool` must come from this library, `method` must be one of the declared
/// enumerators, `params` must be null or readable and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coassoc_cluster(
    pool: *const CoassocPool,
    k: usize,
    method: CoassocMethod,
    params: *const CoassocParams,
    out: *mut *mut CoassocResult,
) -> CoassocStatus {
    guard(|| {
        let pool = pool.as_ref().ok_or_else(|| null("pool"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = params.as_ref().copied().unwrap_or_else(|| coassoc_params_default()).to_core();
        params.solver.validate().map_err(core_err)?;
        let res = cluster_ensemble(&pool.inner, k, method.into(), &params).map_err(core_err)?;
        let last = res.trace.as_ref();
        *out = Box::into_raw(Box::new(CoassocResult {
            n_clusters: res.labels.n_clusters(),
            labels: res.labels.labels().to_vec(),
            iterations: last.map_or(0, |t| t.iterations()),
            converged: last.is_none_or(|t| t.converged),
        }));
        Ok(())
    })
}

/// Number of labelled samples, or 0 for a null result.
///
/// # Safety
/// `result` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn coassoc_result_len(result: *const CoassocResult) -> usize {
    result.as_ref().map_or(0, |r| r.labels.len())
}

/// # Safety
/// `result` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn coassoc_result_n_clusters(result: *const CoassocResult) -> usize {
    result.as_ref().map_or(0, |r| r.n_clusters)
}

/// Solver iterations; 0 for methods without a solver.
///
/// # Safety
/// `result` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn coassoc_result_iterations(result: *const CoassocResult) -> usize {
    result.as_ref().map_or(0, |r| r.iterations)
}

/// # Safety
/// `result` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn coassoc_result_converged(result: *const CoassocResult) -> bool {
    result.as_ref().is_some_and(|r| r.converged)
}

/// Copies the labels into `dst`, which holds `len` values.
///
/// # Safety
/// `result` must come from this library and `dst` must hold `len` writable
/// values.
#[no_mangle]
pub unsafe extern "C" fn coassoc_result_labels(
    result: *const CoassocResult,
    dst: *mut usize,
    len: usize,
) -> CoassocStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if dst.is_null() {
            return Err(null("dst"));
        }
        if len < r.labels.len() {
            return Err((
                CoassocStatus::InvalidArgument,
                format!("buffer holds {len} labels, need {}", r.labels.len()),
            ));
        }
        ptr::copy_nonoverlapping(r.labels.as_ptr(), dst, r.labels.len());
        Ok(())
    })
}

/// # Safety
/// `result` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn coassoc_result_free(result: *mut CoassocResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// NMI (arithmetic normalization), ARI and pairwise F of `pred` against
/// `truth`. Any output pointer may be null.
///
/// # Safety
/// `pred` and `truth` must each hold `n` readable values.
#[no_mangle]
pub unsafe extern "C" fn coassoc_score(
    pred: *const usize,
    truth: *const usize,
    n: usize,
    nmi: *mut f64,
    ari: *mut f64,
    f: *mut f64,
) -> CoassocStatus {
    guard(|| {
        if pred.is_null() || truth.is_null() {
            return Err(null("labels"));
        }
        let p = Partition::from_labels(std::slice::from_raw_parts(pred, n));
        let t = Partition::from_labels(std::slice::from_raw_parts(truth, n));
        let s = score(&p, &t, NmiNorm::Arithmetic).map_err(core_err)?;
        for (dst, v) in [(nmi, s.nmi), (ari, s.ari), (f, s.f)] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}
