//! C ABI for the strongties toolkit.
//!
//! Every fallible function returns an [`StStatus`]; on failure a description
//! is available from [`st_last_error_message`] on the same thread. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Strings returned to the caller are released
//! with [`st_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use strongties::branching::BranchingError;
use strongties::policy::{builtin_distribution, builtin_policy, DistError};
use strongties::{
    build_network, check_compliance, classify, compute_metrics, connected_components,
    derive_child_dist, expected_population_ratio, export_network, extinction_probability,
    mu_closed_form, rng, run_policy_experiment, sample_population, sample_quota,
    survival_frequency, Caps, ChildCountDist, CriticalityClass, ExperimentError, ExportFormat,
    MarriageRatio, Metrics, StrongTiesNetwork,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidDistribution = 2,
    InvalidArgument = 3,
    UnknownName = 4,
    PopulationDied = 5,
    NoConvergence = 6,
    InvalidUtf8 = 7,
    BufferTooSmall = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StCriticality {
    Subcritical = 0,
    Critical = 1,
    Supercritical = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StFormat {
    Dot = 0,
    Graphml = 1,
    EdgeCsv = 2,
}

/// Opaque child-count distribution.
pub struct StDist(ChildCountDist);

/// Opaque strong-ties network of one generation.
pub struct StNetwork {
    network: StrongTiesNetwork,
    metrics: Metrics,
}

/// Analytic summary of a family-size distribution at a marriage ratio.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StAnalysis {
    pub mu: f64,
    pub mu_closed_form: f64,
    pub criticality: StCriticality,
    pub degenerate: bool,
    /// Extinction probability of one subtree; negative if iteration failed.
    pub extinction_probability: f64,
    pub residual_folded: f64,
    pub mean_children: f64,
    pub expected_population_ratio: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StMetrics {
    pub node_count: usize,
    pub sibling_edge_count: usize,
    pub marital_edge_count: usize,
    pub component_count: usize,
    pub largest_component_size: usize,
    pub largest_component_fraction: f64,
    pub singleton_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(StStatus, String);

impl From<DistError> for Failure {
    fn from(e: DistError) -> Self {
        let status = match e {
            DistError::UnknownPolicy(_) | DistError::UnknownDistribution(_) => StStatus::UnknownName,
            DistError::AlphaOutOfRange(_) => StStatus::InvalidArgument,
            _ => StStatus::InvalidDistribution,
        };
        Failure(status, e.to_string())
    }
}

impl From<BranchingError> for Failure {
    fn from(e: BranchingError) -> Self {
        let status = match e {
            BranchingError::NoConvergence { .. } => StStatus::NoConvergence,
            BranchingError::InvalidDistribution(_) => StStatus::InvalidDistribution,
            _ => StStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Run `f`, record any failure and turn panics into [`StStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            StStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(StStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(StStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn ratio(alpha: f64) -> Result<MarriageRatio, Failure> {
    Ok(MarriageRatio::new(alpha)?)
}

/// Copy `src` into a caller buffer; `len` always receives the full length.
unsafe fn fill<T: Copy>(src: &[T], buf: *mut T, cap: usize, len: *mut usize) -> Result<(), Failure> {
    *out(len, "len")? = src.len();
    if cap < src.len() {
        return Err(Failure(
            StStatus::BufferTooSmall,
            format!("buffer holds {cap}, need {}", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn st_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn st_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Validate `len` weights into a new distribution handle.
#[no_mangle]
pub unsafe extern "C" fn st_dist_new(
    weights: *const f64,
    len: usize,
    out_dist: *mut *mut StDist,
) -> StStatus {
    guard(|| {
        let slot = out(out_dist, "out_dist")?;
        *slot = ptr::null_mut();
        let w = if len == 0 {
            &[][..]
        } else if weights.is_null() {
            return Err(null("weights"));
        } else {
            std::slice::from_raw_parts(weights, len)
        };
        let dist = ChildCountDist::new(w.to_vec())?;
        *slot = Box::into_raw(Box::new(StDist(dist)));
        Ok(())
    })
}

/// Built-in policy (`1C`, `0/2C`, `2C`, `0/3C`, `C++`) or national
/// distribution (`china`, `india`).
#[no_mangle]
pub unsafe extern "C" fn st_dist_builtin(name: *const c_char, out_dist: *mut *mut StDist) -> StStatus {
    guard(|| {
        let slot = out(out_dist, "out_dist")?;
        *slot = ptr::null_mut();
        let name = c_str(name, "name")?;
        let dist = match builtin_policy(name) {
            Ok(d) => d,
            Err(_) => builtin_distribution(name)?.weights,
        };
        *slot = Box::into_raw(Box::new(StDist(dist)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn st_dist_free(dist: *mut StDist) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Copy the weights into `buf`; `len` receives the number of weights.
#[no_mangle]
pub unsafe extern "C" fn st_dist_weights(
    dist: *const StDist,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> StStatus {
    guard(|| fill(deref(dist, "dist")?.0.weights(), buf, cap, len))
}

#[no_mangle]
pub unsafe extern "C" fn st_dist_mean(dist: *const StDist, out_mean: *mut f64) -> StStatus {
    guard(|| {
        *out(out_mean, "out_mean")? = deref(dist, "dist")?.0.mean();
        Ok(())
    })
}

/// Whether `actual` prefix-dominates `policy`.
#[no_mangle]
pub unsafe extern "C" fn st_check_compliance(
    actual: *const StDist,
    policy: *const StDist,
    out_compliant: *mut bool,
) -> StStatus {
    guard(|| {
        let (a, p) = (deref(actual, "actual")?, deref(policy, "policy")?);
        *out(out_compliant, "out_compliant")? = check_compliance(&a.0, &p.0);
        Ok(())
    })
}

/// Draw `count` quotas from `policy` into `buf`, seeded by `seed`.
#[no_mangle]
pub unsafe extern "C" fn st_sample_quotas(
    policy: *const StDist,
    seed: u64,
    count: usize,
    buf: *mut usize,
) -> StStatus {
    guard(|| {
        let p = deref(policy, "policy")?;
        if count == 0 {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let mut r = rng::seeded(seed);
        let dst = std::slice::from_raw_parts_mut(buf, count);
        for slot in dst {
            *slot = sample_quota(&p.0, &mut r);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn st_expected_population_ratio(
    policy: *const StDist,
    alpha: f64,
    out_ratio: *mut f64,
) -> StStatus {
    guard(|| {
        let p = deref(policy, "policy")?;
        *out(out_ratio, "out_ratio")? = expected_population_ratio(&p.0, ratio(alpha)?);
        Ok(())
    })
}

/// Derived offspring law, its mean, regime and extinction probability.
#[no_mangle]
pub unsafe extern "C" fn st_analyze(
    f: *const StDist,
    alpha: f64,
    out_analysis: *mut StAnalysis,
) -> StStatus {
    guard(|| {
        let f = &deref(f, "f")?.0;
        let slot = out(out_analysis, "out_analysis")?;
        let alpha = ratio(alpha)?;
        let derived = derive_child_dist(f, alpha);
        let crit = classify(&derived);
        *slot = StAnalysis {
            mu: derived.mu(),
            mu_closed_form: mu_closed_form(f, alpha),
            criticality: match crit.class {
                CriticalityClass::Subcritical => StCriticality::Subcritical,
                CriticalityClass::Critical => StCriticality::Critical,
                CriticalityClass::Supercritical => StCriticality::Supercritical,
            },
            degenerate: crit.degenerate,
            extinction_probability: extinction_probability(&derived).unwrap_or(-1.0),
            residual_folded: derived.residual_folded(),
            mean_children: f.mean(),
            expected_population_ratio: expected_population_ratio(f, alpha),
        };
        Ok(())
    })
}

/// Copy the derived offspring law into `buf`.
#[no_mangle]
pub unsafe extern "C" fn st_derived_dist(
    f: *const StDist,
    alpha: f64,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> StStatus {
    guard(|| {
        let derived = derive_child_dist(&deref(f, "f")?.0, ratio(alpha)?);
        fill(derived.a(), buf, cap, len)
    })
}

/// Extinction probability of a plain Galton-Watson process with offspring
/// law `a[0..len]`.
#[no_mangle]
pub unsafe extern "C" fn st_extinction_probability(
    a: *const f64,
    len: usize,
    out_q: *mut f64,
) -> StStatus {
    guard(|| {
        let slot = out(out_q, "out_q")?;
        if a.is_null() && len > 0 {
            return Err(null("a"));
        }
        let w = if len == 0 { &[][..] } else { std::slice::from_raw_parts(a, len) };
        let d = strongties::DerivedChildDist::from_offspring(w)?;
        *slot = extinction_probability(&d)?;
        Ok(())
    })
}

/// Fraction of `runs` strong-ties trees that reach a cap without dying out.
#[no_mangle]
pub unsafe extern "C" fn st_survival_frequency(
    f: *const StDist,
    alpha: f64,
    runs: u64,
    max_levels: usize,
    max_nodes: u64,
    seed: u64,
    out_frequency: *mut f64,
) -> StStatus {
    guard(|| {
        let f = &deref(f, "f")?.0;
        let slot = out(out_frequency, "out_frequency")?;
        let caps = Caps::new(max_levels, max_nodes)?;
        *slot = survival_frequency(f, ratio(alpha)?, runs, caps, seed)?;
        Ok(())
    })
}

fn network_handle(network: StrongTiesNetwork) -> *mut StNetwork {
    let metrics = compute_metrics(&network);
    Box::into_raw(Box::new(StNetwork { network, metrics }))
}

/// Sample one generation of at least `target_n` persons and build its
/// network.
#[no_mangle]
pub unsafe extern "C" fn st_sample_population(
    f: *const StDist,
    alpha: f64,
    target_n: usize,
    seed: u64,
    out_network: *mut *mut StNetwork,
) -> StStatus {
    guard(|| {
        let slot = out(out_network, "out_network")?;
        *slot = ptr::null_mut();
        let f = &deref(f, "f")?.0;
        let pop = sample_population(f, ratio(alpha)?, target_n, &mut rng::seeded(seed))
            .map_err(|e| Failure(StStatus::InvalidArgument, e.to_string()))?;
        *slot = network_handle(build_network(&pop));
        Ok(())
    })
}

/// Evolve `generations` generations from `initial_n` founders and return
/// the network of the last one. If the population dies out the status is
/// `POPULATION_DIED` and `out_network` holds the last non-empty generation,
/// or null when none was produced.
#[no_mangle]
pub unsafe extern "C" fn st_run_policy_experiment(
    policy: *const StDist,
    alpha: f64,
    initial_n: usize,
    generations: u32,
    utilization: f64,
    seed: u64,
    out_network: *mut *mut StNetwork,
) -> StStatus {
    guard(|| {
        let slot = out(out_network, "out_network")?;
        *slot = ptr::null_mut();
        let policy = &deref(policy, "policy")?.0;
        if !(0.0..=1.0).contains(&utilization) {
            return Err(Failure(
                StStatus::InvalidArgument,
                format!("utilization {utilization} is outside [0, 1]"),
            ));
        }
        let result = run_policy_experiment(
            initial_n,
            policy,
            ratio(alpha)?,
            generations,
            utilization,
            &mut rng::seeded(seed),
        );
        match result {
            Ok(mut records) => {
                let last = records.pop().expect("at least one generation");
                *slot = network_handle(last.network);
                Ok(())
            }
            Err(ExperimentError::PopulationDied {
                generation,
                mut partial,
            }) => {
                if let Some(last) = partial.pop() {
                    *slot = network_handle(last.network);
                }
                Err(Failure(
                    StStatus::PopulationDied,
                    format!("population died: generation {generation} is empty"),
                ))
            }
            Err(e) => Err(Failure(StStatus::InvalidArgument, e.to_string())),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn st_network_free(network: *mut StNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

#[no_mangle]
pub unsafe extern "C" fn st_network_metrics(
    network: *const StNetwork,
    out_metrics: *mut StMetrics,
) -> StStatus {
    guard(|| {
        let m = &deref(network, "network")?.metrics;
        *out(out_metrics, "out_metrics")? = StMetrics {
            node_count: m.node_count,
            sibling_edge_count: m.sibling_edge_count,
            marital_edge_count: m.marital_edge_count,
            component_count: m.component_count,
            largest_component_size: m.largest_component_size,
            largest_component_fraction: m.largest_component_fraction,
            singleton_count: m.singleton_count,
        };
        Ok(())
    })
}

/// Component label of every node (the smallest node index in its
/// component).
#[no_mangle]
pub unsafe extern "C" fn st_network_component_labels(
    network: *const StNetwork,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> StStatus {
    guard(|| {
        let labels = connected_components(&deref(network, "network")?.network).labels;
        fill(&labels, buf, cap, len)
    })
}

/// Serialize the network; release the string with [`st_string_free`].
#[no_mangle]
pub unsafe extern "C" fn st_network_export(
    network: *const StNetwork,
    format: StFormat,
    out_text: *mut *mut c_char,
) -> StStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        *slot = ptr::null_mut();
        let net = &deref(network, "network")?.network;
        let format = match format {
            StFormat::Dot => ExportFormat::Dot,
            StFormat::Graphml => ExportFormat::Graphml,
            StFormat::EdgeCsv => ExportFormat::EdgeCsv,
        };
        let text = CString::new(export_network(net, format))
            .map_err(|_| Failure(StStatus::InvalidUtf8, "export contains nul".into()))?;
        *slot = text.into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn st_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
