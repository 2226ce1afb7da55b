//! C ABI for the blockspec library.
//!
//! Conventions: objects are opaque pointers created by `bs_*_new`-style
//! constructors and released with the matching `bs_*_free`; every fallible
//! call returns a [`BsStatus`] and writes its result through out-pointers.
//! On failure a thread-local message is retrievable with `bs_last_error`.
//! All functions catch panics and report them as `BS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::CStr;
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, size_t};

use blockspec::clustering::{spectral_cluster_with, SpectralOptions};
use blockspec::graph::{load_edge_list, save_edge_list, Graph};
use blockspec::sbm::{analytic_distances, sample, sparse_limit_ratio, BlockModelParams};
use blockspec::{Error, NodeLabeling};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    IoError = 3,
    ParseError = 4,
    NumericError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque blockmodel parameter set.
pub struct BsParams {
    inner: BlockModelParams,
}

/// Opaque undirected graph.
pub struct BsGraph {
    inner: Graph,
}

/// Closed-form distance predictions for class 1.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BsAnalyticDistances {
    pub d11_sq_unnorm: f64,
    pub d12_sq_unnorm: f64,
    pub d11_sq_norm: f64,
    pub d12_sq_norm: f64,
    pub ratio_d11: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
}

fn status_of(err: &Error) -> BsStatus {
    match err {
        Error::Io(_) => BsStatus::IoError,
        Error::Parse { .. } => BsStatus::ParseError,
        Error::InvalidParams(_) | Error::Invalid(_) | Error::LabelMismatch(_)
        | Error::SnapshotMismatch(_, _) => BsStatus::InvalidArgument,
        Error::DegenerateModel | Error::ZeroDegree(_) | Error::Eigen(_) => BsStatus::NumericError,
    }
}

fn fail(err: Error) -> BsStatus {
    let s = status_of(&err);
    set_error(&err.to_string());
    s
}

fn guarded(f: impl FnOnce() -> BsStatus) -> BsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic in blockspec-capi call");
            BsStatus::Panic
        }
    }
}

/// Copies the last error message for this thread into `buf` (NUL
/// terminated, truncated to `cap`). Returns the full length in bytes,
/// excluding the terminator.
#[no_mangle]
pub unsafe extern "C" fn bs_last_error(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a parameter set; fails on out-of-range values or degenerate
/// class sizes.
#[no_mangle]
pub unsafe extern "C" fn bs_params_new(
    n: u64,
    pi: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    out: *mut *mut BsParams,
) -> BsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return BsStatus::NullArgument;
        }
        match BlockModelParams::new(n as usize, pi, alpha, beta, gamma) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(BsParams { inner: p }));
                BsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `p` must come from `bs_params_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bs_params_free(p: *mut BsParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of class-1 nodes; the sampler assigns nodes `0..n1` to class 1.
#[no_mangle]
pub unsafe extern "C" fn bs_params_class1_size(p: *const BsParams) -> u64 {
    if p.is_null() {
        return 0;
    }
    (*p).inner.class1_size() as u64
}

/// Samples a graph from the blockmodel; deterministic given the seed.
#[no_mangle]
pub unsafe extern "C" fn bs_sample(
    params: *const BsParams,
    seed: u64,
    out: *mut *mut BsGraph,
) -> BsStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        match sample(&(*params).inner, seed) {
            Ok((g, _labels)) => {
                *out = Box::into_raw(Box::new(BsGraph { inner: g }));
                BsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a whitespace-separated edge list from a file path.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_load_edge_list(
    path: *const c_char,
    out: *mut *mut BsGraph,
) -> BsStatus {
    guarded(|| {
        if path.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8");
            return BsStatus::InvalidArgument;
        };
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) => return fail(Error::Io(e)),
        };
        match load_edge_list(std::io::BufReader::new(file)) {
            Ok(loaded) => {
                *out = Box::into_raw(Box::new(BsGraph { inner: loaded.graph }));
                BsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the edge list with decimal node ids, one pair per line.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_save_edge_list(
    g: *const BsGraph,
    path: *const c_char,
) -> BsStatus {
    guarded(|| {
        if g.is_null() || path.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            set_error("path is not valid UTF-8");
            return BsStatus::InvalidArgument;
        };
        let file = match std::fs::File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(Error::Io(e)),
        };
        match save_edge_list(&(*g).inner, std::io::BufWriter::new(file), None) {
            Ok(()) => BsStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `g` must come from a constructor of this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_free(g: *mut BsGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[no_mangle]
pub unsafe extern "C" fn bs_graph_node_count(g: *const BsGraph) -> u64 {
    if g.is_null() {
        return 0;
    }
    (*g).inner.node_count() as u64
}

#[no_mangle]
pub unsafe extern "C" fn bs_graph_edge_count(g: *const BsGraph) -> u64 {
    if g.is_null() {
        return 0;
    }
    (*g).inner.edge_count() as u64
}

/// Copies all node degrees into `out` (length `len >= node_count`).
#[no_mangle]
pub unsafe extern "C" fn bs_graph_degrees(
    g: *const BsGraph,
    out: *mut u64,
    len: size_t,
) -> BsStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let degrees = (*g).inner.degrees();
        if len < degrees.len() {
            set_error("degree buffer too small");
            return BsStatus::BufferTooSmall;
        }
        for (i, &d) in degrees.iter().enumerate() {
            *out.add(i) = d as u64;
        }
        BsStatus::Ok
    })
}

/// Induced subgraph on the largest connected component.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_largest_component(
    g: *const BsGraph,
    out: *mut *mut BsGraph,
) -> BsStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let (lcc, _) = (*g).inner.largest_connected_component();
        *out = Box::into_raw(Box::new(BsGraph { inner: lcc }));
        BsStatus::Ok
    })
}

/// Iterated removal of nodes below the degree threshold.
#[no_mangle]
pub unsafe extern "C" fn bs_graph_prune_min_degree(
    g: *const BsGraph,
    min_degree: u32,
    out: *mut *mut BsGraph,
) -> BsStatus {
    guarded(|| {
        if g.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let (pruned, _) = (*g).inner.prune_min_degree(min_degree as usize);
        *out = Box::into_raw(Box::new(BsGraph { inner: pruned }));
        BsStatus::Ok
    })
}

/// Spectral clustering into k groups; writes one label per node into
/// `labels_out` (length `labels_len >= node_count`).
#[no_mangle]
pub unsafe extern "C" fn bs_spectral_cluster(
    g: *const BsGraph,
    k: u32,
    normalized: bool,
    seed: u64,
    labels_out: *mut u32,
    labels_len: size_t,
) -> BsStatus {
    guarded(|| {
        if g.is_null() || labels_out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let graph = &(*g).inner;
        if labels_len < graph.node_count() {
            set_error("label buffer too small");
            return BsStatus::BufferTooSmall;
        }
        match spectral_cluster_with(graph, k as usize, normalized, seed, &SpectralOptions::default())
        {
            Ok((assignment, _)) => {
                for (i, &l) in assignment.labels.iter().enumerate() {
                    *labels_out.add(i) = l as u32;
                }
                BsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Fraction of disagreeing labels minimized over relabelings.
#[no_mangle]
pub unsafe extern "C" fn bs_misclassification_rate(
    predicted: *const u32,
    truth: *const u32,
    len: size_t,
    out: *mut f64,
) -> BsStatus {
    guarded(|| {
        if predicted.is_null() || truth.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        let p: Vec<usize> = (0..len).map(|i| *predicted.add(i) as usize).collect();
        let t: Vec<usize> = (0..len).map(|i| *truth.add(i) as usize).collect();
        let k = p.iter().chain(&t).copied().max().map_or(1, |m| m + 1);
        let pl = NodeLabeling::with_classes(p, k);
        let tl = NodeLabeling::with_classes(t, k);
        match blockspec::metrics::misclassification_rate(&pl, &tl) {
            Ok(rate) => {
                *out = rate;
                BsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Closed-form class-1 distance predictions for the parameter set.
#[no_mangle]
pub unsafe extern "C" fn bs_analytic_distances(
    params: *const BsParams,
    out: *mut BsAnalyticDistances,
) -> BsStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            set_error("null argument");
            return BsStatus::NullArgument;
        }
        match analytic_distances(&(*params).inner) {
            Ok(a) => {
                *out = BsAnalyticDistances {
                    d11_sq_unnorm: a.d11_sq_unnorm,
                    d12_sq_unnorm: a.d12_sq_unnorm,
                    d11_sq_norm: a.d11_sq_norm,
                    d12_sq_norm: a.d12_sq_norm,
                    ratio_d11: a.ratio_d11,
                };
                BsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// The closed-form sparse-regime limit `1/4 + (3/2) x / (1 + x^2)`.
#[no_mangle]
pub extern "C" fn bs_sparse_limit_ratio(x: f64) -> f64 {
    sparse_limit_ratio(x)
}
