//! C ABI over the `offmoo` library.
//!
//! Every fallible function returns an [`OffmooStatus`] and writes its result through an out
//! pointer. On failure the message is available from [`offmoo_last_error`] on the same thread.
//! Handles are opaque; each `*_new`/`*_load`/`*_generate` result must be released with the
//! matching `*_free`. Arrays are row-major and their lengths are passed explicitly.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use offmoo::estimators::{estimate, EstimateOptions};
use offmoo::optimize::{build_value_model, policy_gradient_ascent};
use offmoo::{
    BenchmarkProblem, ConfidenceConfig, Error, EstimatorKind, GradientConfig, HvObjective, Hypervolume,
    HypervolumeMethod, LoggedDataset, LoggingPolicy, ObjectiveKind, OffPolicyData, PolicySet, ProblemSpec,
    SoftmaxPolicy,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffmooStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numeric = 4,
    Data = 5,
    Validation = 6,
    Method = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

/// A benchmark problem turned into a contextual bandit.
pub struct OffmooProblem {
    spec: ProblemSpec,
    problem: BenchmarkProblem,
}

/// A logged dataset with its rebuilt logging policy.
pub struct OffmooDataset {
    dataset: LoggedDataset,
    data: OffPolicyData,
    logging: LoggingPolicy,
}

/// A set of softmax policies sharing one parameter dimension.
pub struct OffmooPolicySet {
    set: PolicySet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    // Interior NULs would truncate the message on the C side anyway.
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(OffmooStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) => OffmooStatus::Config,
            Error::Numeric(_) => OffmooStatus::Numeric,
            Error::Data(_) => OffmooStatus::Data,
            Error::Validation(_) => OffmooStatus::Validation,
            Error::Method(_) => OffmooStatus::Method,
            Error::Parse { .. } => OffmooStatus::Parse,
            Error::Io { .. } => OffmooStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OffmooStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(OffmooStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OffmooStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            OffmooStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            OffmooStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len < needed {
        return Err(invalid(format!("{what} holds {len} values but {needed} are needed")));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// The message of the last failed call on this thread, or null after a successful call.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn offmoo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a benchmark problem (`"ZDT1"`, `"DTLZ2"`, ...) with `d` features, `m` objectives and
/// `num_actions` actions drawn with `seed`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_problem_new(
    name: *const c_char,
    d: usize,
    m: usize,
    num_actions: usize,
    seed: u64,
    out: *mut *mut OffmooProblem,
) -> OffmooStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        let spec = ProblemSpec {
            num_actions,
            seed,
            ..ProblemSpec::new(name, d, m)
        };
        let problem = spec.build()?;
        *out = boxed(OffmooProblem { spec, problem });
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn offmoo_problem_free(problem: *mut OffmooProblem) {
    free(problem);
}

/// Number of objectives, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn offmoo_problem_num_objectives(problem: *const OffmooProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.num_objectives())
}

/// Length of a policy parameter vector, or 0 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn offmoo_problem_feature_dim(problem: *const OffmooProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.feature_dim())
}

/// Logs `n` interactions with the ε-greedy Pareto logging policy and reward noise `sigma`.
///
/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_dataset_generate(
    problem: *const OffmooProblem,
    n: usize,
    epsilon: f64,
    sigma: f64,
    seed: u64,
    out: *mut *mut OffmooDataset,
) -> OffmooStatus {
    guard(|| {
        let p = ref_arg(problem, "problem")?;
        let out = out_arg(out, "out")?;
        let logging = LoggingPolicy::new(p.problem.clone(), epsilon)?;
        let dataset = LoggedDataset::generate(&p.spec, &logging, n, sigma, seed)?;
        let data = OffPolicyData::new(&logging, &dataset)?;
        *out = boxed(OffmooDataset { dataset, data, logging });
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_dataset_load(path: *const c_char, out: *mut *mut OffmooDataset) -> OffmooStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let dataset = LoggedDataset::load(Path::new(path))?;
        let (data, logging) = OffPolicyData::from_dataset(&dataset)?;
        *out = boxed(OffmooDataset { dataset, data, logging });
        Ok(())
    })
}

/// # Safety
/// `dataset` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn offmoo_dataset_save(dataset: *const OffmooDataset, path: *const c_char) -> OffmooStatus {
    guard(|| {
        let ds = ref_arg(dataset, "dataset")?;
        let path = str_arg(path, "path")?;
        ds.dataset.save(Path::new(path))?;
        Ok(())
    })
}

/// Number of logged records, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn offmoo_dataset_len(dataset: *const OffmooDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.dataset.len())
}

/// # Safety
/// `dataset` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn offmoo_dataset_free(dataset: *mut OffmooDataset) {
    free(dataset);
}

/// Builds `k` policies from `k * dim` parameters, one policy per row.
///
/// # Safety
/// `theta` must point to `k * dim` readable values and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_new(
    theta: *const f64,
    k: usize,
    dim: usize,
    out: *mut *mut OffmooPolicySet,
) -> OffmooStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if k == 0 || dim == 0 {
            return Err(invalid("a policy set needs k >= 1 and dim >= 1"));
        }
        let len = k.checked_mul(dim).ok_or_else(|| invalid("k * dim overflows"))?;
        let flat = slice_arg(theta, len, "theta")?;
        let set = PolicySet::new(flat.chunks(dim).map(|c| SoftmaxPolicy::new(c.to_vec())).collect())?;
        *out = boxed(OffmooPolicySet { set });
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_load(path: *const c_char, out: *mut *mut OffmooPolicySet) -> OffmooStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let set = PolicySet::load(Path::new(path))?;
        *out = boxed(OffmooPolicySet { set });
        Ok(())
    })
}

/// # Safety
/// `policies` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_save(policies: *const OffmooPolicySet, path: *const c_char) -> OffmooStatus {
    guard(|| {
        let ps = ref_arg(policies, "policies")?;
        let path = str_arg(path, "path")?;
        ps.set.save(Path::new(path))?;
        Ok(())
    })
}

/// Number of policies, or 0 for a null handle.
///
/// # Safety
/// `policies` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_len(policies: *const OffmooPolicySet) -> usize {
    policies.as_ref().map_or(0, |p| p.set.len())
}

/// Parameter dimension, or 0 for a null handle.
///
/// # Safety
/// `policies` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_dim(policies: *const OffmooPolicySet) -> usize {
    policies.as_ref().map_or(0, |p| p.set.dim())
}

/// Copies the `len * dim` parameters, one policy per row, into `out`.
///
/// # Safety
/// `policies` must be a live handle and `out` must point to `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_theta(
    policies: *const OffmooPolicySet,
    out: *mut f64,
    out_len: usize,
) -> OffmooStatus {
    guard(|| {
        let ps = ref_arg(policies, "policies")?;
        let flat = ps.set.flatten();
        out_slice(out, out_len, flat.len(), "out")?.copy_from_slice(&flat);
        Ok(())
    })
}

/// # Safety
/// `policies` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn offmoo_policy_set_free(policies: *mut OffmooPolicySet) {
    free(policies);
}

/// Hypervolume of `count` points in `[0,1]^m` against the origin.
///
/// `method` is `"exact2d"`, `"incl-excl"`, `"scalarized:<N>"` or `"mc:<N>"`; null picks the
/// default for `m`. `seed` drives the randomized methods.
///
/// # Safety
/// `points` must point to `count * m` readable values, `method` must be null or a
/// NUL-terminated string and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_hypervolume(
    points: *const f64,
    count: usize,
    m: usize,
    method: *const c_char,
    seed: u64,
    out: *mut f64,
) -> OffmooStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if m == 0 {
            return Err(invalid("m must be at least 1"));
        }
        let method = if method.is_null() {
            HypervolumeMethod::default_for(m)
        } else {
            str_arg(method, "method")?.parse()?
        };
        let len = count.checked_mul(m).ok_or_else(|| invalid("count * m overflows"))?;
        let flat = slice_arg(points, len, "points")?;
        let pts: Vec<Vec<f64>> = flat.chunks(m).map(<[f64]>::to_vec).collect();
        *out = Hypervolume::new(method, m, seed)?.value(&pts)?;
        Ok(())
    })
}

/// Estimates every policy's per-objective value and confidence width from logged data.
///
/// `estimator` is one of `ips`, `clipped`, `pess`, `dm`, `dr`, `snips`. `clip` is the clipping
/// level of `clipped` (pass infinity to disable). Both outputs receive `len * m` values, one
/// policy per row.
///
/// # Safety
/// Handles must be live, `estimator` NUL-terminated, and `values`/`widths` must each point to
/// `out_len` writable values.
#[no_mangle]
pub unsafe extern "C" fn offmoo_estimate(
    dataset: *const OffmooDataset,
    policies: *const OffmooPolicySet,
    estimator: *const c_char,
    beta: f64,
    clip: f64,
    values: *mut f64,
    widths: *mut f64,
    out_len: usize,
) -> OffmooStatus {
    guard(|| {
        let ds = ref_arg(dataset, "dataset")?;
        let ps = ref_arg(policies, "policies")?;
        let kind: EstimatorKind = str_arg(estimator, "estimator")?.parse()?;
        if kind == EstimatorKind::True {
            return Err(invalid("the true value is not an off-policy estimator"));
        }
        let m = ds.logging.problem().num_objectives();
        let needed = ps.set.len() * m;
        let values = out_slice(values, out_len, needed, "values")?;
        let widths = out_slice(widths, out_len, needed, "widths")?;
        let opts = EstimateOptions {
            confidence: ConfidenceConfig::new(beta, ds.data.sigma)?,
            clip,
        };
        for (p, policy) in ps.set.iter().enumerate() {
            let probs = ds.data.softmax_probs(policy)?;
            let est = estimate(kind, &ds.data, &probs, &opts)?;
            values[p * m..(p + 1) * m].copy_from_slice(&est.values);
            widths[p * m..(p + 1) * m].copy_from_slice(&est.widths);
        }
        Ok(())
    })
}

/// Optimizes `k` policies for the hypervolume of their estimated values by policy gradient.
///
/// `objective` is `true`, `mean`, `pess` or `ehvi:<N>`. Optimizer settings other than
/// `iterations`, `restarts` and `seed` keep their library defaults. `value_out` may be null.
///
/// # Safety
/// `dataset` must be a live handle, `objective` NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn offmoo_optimize(
    dataset: *const OffmooDataset,
    objective: *const c_char,
    k: usize,
    beta: f64,
    iterations: usize,
    restarts: usize,
    seed: u64,
    out: *mut *mut OffmooPolicySet,
    value_out: *mut f64,
) -> OffmooStatus {
    guard(|| {
        let ds = ref_arg(dataset, "dataset")?;
        let kind: ObjectiveKind = str_arg(objective, "objective")?.parse()?;
        let out = out_arg(out, "out")?;
        let problem = ds.logging.problem();
        let m = problem.num_objectives();
        let confidence = ConfidenceConfig::new(beta, ds.data.sigma)?;
        let model = build_value_model(kind, problem, &ds.data, confidence, seed)?;
        let hv = Hypervolume::new(HypervolumeMethod::default_for(m), m, seed)?;
        let objective = HvObjective::new(model.as_ref(), hv, k)?;
        let config = GradientConfig {
            iterations,
            restarts,
            seed,
            ..GradientConfig::default()
        };
        let result = policy_gradient_ascent(&objective, None, &config)?;
        if let Some(v) = value_out.as_mut() {
            *v = result.value;
        }
        *out = boxed(OffmooPolicySet { set: result.policies });
        Ok(())
    })
}
