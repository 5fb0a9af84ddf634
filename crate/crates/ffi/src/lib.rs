//! C ABI over the benchmark catalog, the optimizers and the rank statistics.
//!
//! Every fallible call returns an [`HhoStatus`]; on failure the message is
//! kept per thread and read back with [`hho_last_error_message`]. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use hhofenn::benchfns::{FunctionId, ObjectiveFunction};
use hhofenn::optimizer::{adaptive_threshold, run_benchmark, Algorithm, OptimizerConfig, RunRecord};
use hhofenn::stats::{self, RankSumOutcome, RankTable};
use hhofenn::{rng, Error};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HhoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownId = 3,
    DimensionMismatch = 4,
    NonFinite = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

/// A benchmark objective of fixed dimension.
pub struct HhoObjective {
    inner: ObjectiveFunction,
}

/// The outcome of one optimizer run.
pub struct HhoRun {
    inner: RunRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> HhoStatus {
    match e {
        Error::UnknownId(_) => HhoStatus::UnknownId,
        Error::DimensionMismatch { .. } => HhoStatus::DimensionMismatch,
        Error::NonFinite(_) | Error::NonFiniteFitness { .. } => HhoStatus::NonFinite,
        Error::Contract(_) | Error::Usage(_) => HhoStatus::InvalidArgument,
        _ => HhoStatus::Internal,
    }
}

fn fail(status: HhoStatus, msg: impl Into<String>) -> HhoStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping errors and panics onto status codes.
fn guard(f: impl FnOnce() -> Result<(), HhoStatus>) -> HhoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            HhoStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(HhoStatus::Internal, "panic inside the library"),
    }
}

fn lift<T>(r: hhofenn::Result<T>) -> Result<T, HhoStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), HhoStatus> {
    if p.is_null() {
        Err(fail(HhoStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HhoStatus> {
    non_null(p, what)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HhoStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], HhoStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, what)?;
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, capacity: usize) -> Result<(), HhoStatus> {
    if capacity < src.len() {
        return Err(fail(
            HhoStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        non_null(dst, "output buffer")?;
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// always NUL-terminated when `capacity > 0`). Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hho_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && capacity > 0 {
            let n = msg.len().min(capacity - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates the benchmark `name` (e.g. "sphere", "rastrigin") at dimension `dim`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hho_objective_new(name: *const c_char, dim: usize, out: *mut *mut HhoObjective) -> HhoStatus {
    guard(|| {
        non_null(out, "out")?;
        let id: FunctionId = lift(str_arg(name, "name")?.parse())?;
        let inner = lift(ObjectiveFunction::new(id, dim))?;
        *out = Box::into_raw(Box::new(HhoObjective { inner }));
        Ok(())
    })
}

/// Releases an objective. Null is ignored.
///
/// # Safety
/// `obj` must come from [`hho_objective_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hho_objective_free(obj: *mut HhoObjective) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

/// Dimension of the objective, 0 for null.
///
/// # Safety
/// `obj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hho_objective_dim(obj: *const HhoObjective) -> usize {
    obj.as_ref().map_or(0, |o| o.inner.dim)
}

/// Writes the box bounds into `lower` and `upper`, each of `capacity` values.
///
/// # Safety
/// `obj` must be a live handle; the buffers must hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn hho_objective_bounds(
    obj: *const HhoObjective,
    lower: *mut f64,
    upper: *mut f64,
    capacity: usize,
) -> HhoStatus {
    guard(|| {
        non_null(obj, "objective")?;
        let o = &(*obj).inner;
        copy_out(&o.lower, lower, capacity)?;
        copy_out(&o.upper, upper, capacity)
    })
}

/// Known optimum value, written to `out`; `*has_optimum` is 0 when the
/// function has none.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hho_objective_optimum(
    obj: *const HhoObjective,
    has_optimum: *mut i32,
    out: *mut f64,
) -> HhoStatus {
    guard(|| {
        non_null(obj, "objective")?;
        non_null(has_optimum, "has_optimum")?;
        non_null(out, "out")?;
        match (*obj).inner.known_optimum {
            Some(v) => {
                *has_optimum = 1;
                *out = v;
            }
            None => {
                *has_optimum = 0;
                *out = f64::NAN;
            }
        }
        Ok(())
    })
}

/// Evaluates the objective at `x`. `noise_seed` only matters for the noisy
/// quartic.
///
/// # Safety
/// `x` must hold `len` values and `out` be valid.
#[no_mangle]
pub unsafe extern "C" fn hho_objective_evaluate(
    obj: *const HhoObjective,
    x: *const f64,
    len: usize,
    noise_seed: u64,
    out: *mut f64,
) -> HhoStatus {
    guard(|| {
        non_null(obj, "objective")?;
        non_null(out, "out")?;
        let x = slice_arg(x, len, "x")?;
        let mut r = rng::stream(noise_seed);
        *out = lift((*obj).inner.evaluate(x, &mut r))?.value;
        Ok(())
    })
}

/// Minimizes the objective with `algorithm` ("hho_plus", "hho",
/// "gwo_baseline", "random_search").
///
/// # Safety
/// `obj` must be a live handle, `algorithm` a NUL-terminated string and
/// `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hho_run(
    obj: *const HhoObjective,
    algorithm: *const c_char,
    population: usize,
    iterations: usize,
    seed: u64,
    out: *mut *mut HhoRun,
) -> HhoStatus {
    guard(|| {
        non_null(obj, "objective")?;
        non_null(out, "out")?;
        let alg: Algorithm = lift(str_arg(algorithm, "algorithm")?.parse())?;
        let config = OptimizerConfig::new(alg, population, iterations, seed);
        let inner = lift(run_benchmark(&(*obj).inner, &config))?;
        *out = Box::into_raw(Box::new(HhoRun { inner }));
        Ok(())
    })
}

/// Releases a run. Null is ignored.
///
/// # Safety
/// `run` must come from [`hho_run`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hho_run_free(run: *mut HhoRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Best fitness found, NaN for null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hho_run_final_fitness(run: *const HhoRun) -> f64 {
    run.as_ref().map_or(f64::NAN, |r| r.inner.final_fitness)
}

/// Objective evaluations spent, 0 for null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hho_run_evaluations(run: *const HhoRun) -> u64 {
    run.as_ref().map_or(0, |r| r.inner.evaluations)
}

/// Number of entries in the best-so-far trace, 0 for null.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hho_run_trace_len(run: *const HhoRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.best_trace.len())
}

/// Copies the best-so-far fitness after each iteration.
///
/// # Safety
/// `run` must be a live handle and `buf` hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn hho_run_trace(run: *const HhoRun, buf: *mut f64, capacity: usize) -> HhoStatus {
    guard(|| {
        non_null(run, "run")?;
        copy_out(&(*run).inner.best_trace, buf, capacity)
    })
}

/// Copies the best position found.
///
/// # Safety
/// `run` must be a live handle and `buf` hold `capacity` values.
#[no_mangle]
pub unsafe extern "C" fn hho_run_position(run: *const HhoRun, buf: *mut f64, capacity: usize) -> HhoStatus {
    guard(|| {
        non_null(run, "run")?;
        copy_out(&(*run).inner.final_position, buf, capacity)
    })
}

/// Two-sided rank-sum p-value of samples `a` and `b`. NaN when every
/// pooled value is identical.
///
/// # Safety
/// `a` and `b` must hold `n_a` and `n_b` values; `p_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hho_rank_sum_test(
    a: *const f64,
    n_a: usize,
    b: *const f64,
    n_b: usize,
    p_value: *mut f64,
) -> HhoStatus {
    guard(|| {
        non_null(p_value, "p_value")?;
        let a = slice_arg(a, n_a, "a")?;
        let b = slice_arg(b, n_b, "b")?;
        *p_value = match lift(stats::wilcoxon_rank_sum(a, b))? {
            RankSumOutcome::Degenerate => f64::NAN,
            RankSumOutcome::Test(t) => t.p_value,
        };
        Ok(())
    })
}

/// Friedman mean ranks (1 = best, lower values rank better) of a row-major
/// `n_functions x n_algorithms` table of mean fitness values.
///
/// # Safety
/// `cells` must hold `n_functions * n_algorithms` values and `mean_ranks`
/// `n_algorithms`.
#[no_mangle]
pub unsafe extern "C" fn hho_friedman_mean_ranks(
    cells: *const f64,
    n_functions: usize,
    n_algorithms: usize,
    mean_ranks: *mut f64,
) -> HhoStatus {
    guard(|| {
        let total = n_functions
            .checked_mul(n_algorithms)
            .ok_or_else(|| fail(HhoStatus::InvalidArgument, "table size overflows"))?;
        let flat = slice_arg(cells, total, "cells")?;
        let table = RankTable {
            functions: (0..n_functions).map(|i| format!("f{i}")).collect(),
            algorithms: (0..n_algorithms).map(|j| format!("a{j}")).collect(),
            cells: flat.chunks(n_algorithms.max(1)).map(<[f64]>::to_vec).collect(),
        };
        let ranking = lift(stats::friedman_mean_rank(&table))?;
        copy_out(&ranking.mean_ranks, mean_ranks, n_algorithms)
    })
}

/// Exploration threshold used by the elite evolution step at iteration `t`
/// of `max_iterations`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hho_adaptive_threshold(t: usize, max_iterations: usize, out: *mut f64) -> HhoStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lift(adaptive_threshold(t, max_iterations))?;
        Ok(())
    })
}
