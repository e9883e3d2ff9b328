//! C ABI for the loop-model toolkit.
//!
//! Handles are opaque pointers owned by the library; every constructor has
//! a matching `_free`. All functions return an `LmStatus`; results go out
//! through pointers. No function panics across the boundary.

use loopmodel::domination::{self, DeltaVariant};
use loopmodel::sampler::sample_direct_theta1;
use loopmodel::{blocking, Graph, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Error codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmStatus {
    LmOk = 0,
    LmNullPointer = 1,
    LmInvalidArgument = 2,
    LmIndexOutOfRange = 3,
    LmResourceLimit = 4,
    LmInternal = 5,
}

/// Opaque graph handle.
pub struct LmGraph {
    inner: Graph,
}

fn status_of(e: &loopmodel::ModelError) -> LmStatus {
    use loopmodel::ModelError::*;
    match e {
        EdgeIndex { .. } | VertexIndex { .. } => LmStatus::LmIndexOutOfRange,
        Guard(_) | ConditioningMass { .. } => LmStatus::LmResourceLimit,
        DominationHypothesis { .. } => LmStatus::LmInternal,
        _ => LmStatus::LmInvalidArgument,
    }
}

/// Build a d-dimensional box graph with `side` vertices per axis.
///
/// # Safety
/// `out` must be a valid pointer. On `LmOk` it receives a handle that must
/// be released with `lm_graph_free`.
#[no_mangle]
pub unsafe extern "C" fn lm_graph_box(
    dimension: usize,
    side: usize,
    periodic: bool,
    out: *mut *mut LmGraph,
) -> LmStatus {
    if out.is_null() {
        return LmStatus::LmNullPointer;
    }
    match Graph::build_box(dimension, side, periodic) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(LmGraph { inner: g }));
            LmStatus::LmOk
        }
        Err(e) => status_of(&e),
    }
}

/// Build a graph from `edge_count` vertex pairs laid out as
/// `[a0, b0, a1, b1, ...]`.
///
/// # Safety
/// `endpoints` must point to `2 * edge_count` readable elements and `out`
/// must be valid. On `LmOk` the handle must be released with
/// `lm_graph_free`.
#[no_mangle]
pub unsafe extern "C" fn lm_graph_from_edges(
    endpoints: *const usize,
    edge_count: usize,
    out: *mut *mut LmGraph,
) -> LmStatus {
    if endpoints.is_null() || out.is_null() {
        return LmStatus::LmNullPointer;
    }
    let flat = std::slice::from_raw_parts(endpoints, 2 * edge_count);
    let pairs: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    match Graph::from_edge_list(&pairs) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(LmGraph { inner: g }));
            LmStatus::LmOk
        }
        Err(e) => status_of(&e),
    }
}

/// Release a graph handle. A null handle is a no-op.
///
/// # Safety
/// `g` must be a handle from a constructor of this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lm_graph_free(g: *mut LmGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lm_graph_vertex_count(g: *const LmGraph, out: *mut usize) -> LmStatus {
    if g.is_null() || out.is_null() {
        return LmStatus::LmNullPointer;
    }
    *out = (*g).inner.vertex_count();
    LmStatus::LmOk
}

/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lm_graph_edge_count(g: *const LmGraph, out: *mut usize) -> LmStatus {
    if g.is_null() || out.is_null() {
        return LmStatus::LmNullPointer;
    }
    *out = (*g).inner.edge_count();
    LmStatus::LmOk
}

/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lm_graph_max_degree(g: *const LmGraph, out: *mut usize) -> LmStatus {
    if g.is_null() || out.is_null() {
        return LmStatus::LmNullPointer;
    }
    *out = (*g).inner.max_degree();
    LmStatus::LmOk
}

/// Evaluate the domination bound. `variant` 0 selects the conservative
/// form, 1 the larger optimistic form.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lm_delta(
    beta: f64,
    u: f64,
    theta: f64,
    max_degree: usize,
    variant: u32,
    out: *mut f64,
) -> LmStatus {
    if out.is_null() {
        return LmStatus::LmNullPointer;
    }
    let variant = match variant {
        0 => DeltaVariant::Conservative,
        1 => DeltaVariant::Optimistic,
        _ => return LmStatus::LmInvalidArgument,
    };
    match domination::delta(beta, u, theta, max_degree, variant) {
        Ok(v) => {
            *out = v;
            LmStatus::LmOk
        }
        Err(e) => status_of(&e),
    }
}

/// Check the subcritical-percolation condition at theta = 1 against the
/// threshold `p_c`. Writes 1 into `out` when the condition holds.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lm_subcritical_condition(
    beta: f64,
    u: f64,
    max_degree: usize,
    p_c: f64,
    out: *mut u8,
) -> LmStatus {
    if out.is_null() {
        return LmStatus::LmNullPointer;
    }
    match domination::subcritical_condition(beta, u, max_degree, p_c) {
        Ok(v) => {
            *out = v as u8;
            LmStatus::LmOk
        }
        Err(e) => status_of(&e),
    }
}

/// Draw one configuration at theta = 1 and write its per-edge
/// open/blocking/non-blocking indicators (0 or 1) into three caller
/// buffers of length `edge_count`. Any of the three may be null to skip.
///
/// # Safety
/// `g` must be a live handle; non-null indicator buffers must hold
/// `lm_graph_edge_count` writable elements.
#[no_mangle]
pub unsafe extern "C" fn lm_sample_indicators(
    g: *const LmGraph,
    beta: f64,
    u: f64,
    seed: u64,
    open: *mut u8,
    blocking: *mut u8,
    nb: *mut u8,
) -> LmStatus {
    if g.is_null() {
        return LmStatus::LmNullPointer;
    }
    let graph = &(*g).inner;
    let params = match Params::new(beta, u, 1.0) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = match sample_direct_theta1(graph, &params, &mut rng) {
        Ok(c) => c,
        Err(e) => return status_of(&e),
    };
    let ind = blocking::indicators(graph, &config);
    let m = graph.edge_count();
    for (buf, bits) in [(open, &ind.open), (blocking, &ind.blocking), (nb, &ind.nb)] {
        if !buf.is_null() {
            let slice = std::slice::from_raw_parts_mut(buf, m);
            for (dst, &b) in slice.iter_mut().zip(bits) {
                *dst = b as u8;
            }
        }
    }
    LmStatus::LmOk
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn box_graph_round_trip() {
        unsafe {
            let mut g: *mut LmGraph = ptr::null_mut();
            assert_eq!(lm_graph_box(2, 3, false, &mut g), LmStatus::LmOk);
            let mut nv = 0usize;
            let mut ne = 0usize;
            let mut deg = 0usize;
            assert_eq!(lm_graph_vertex_count(g, &mut nv), LmStatus::LmOk);
            assert_eq!(lm_graph_edge_count(g, &mut ne), LmStatus::LmOk);
            assert_eq!(lm_graph_max_degree(g, &mut deg), LmStatus::LmOk);
            assert_eq!((nv, ne, deg), (9, 12, 4));
            lm_graph_free(g);
        }
    }

    #[test]
    fn edge_list_constructor_validates() {
        unsafe {
            let mut g: *mut LmGraph = ptr::null_mut();
            let flat = [0usize, 1, 1, 2];
            assert_eq!(lm_graph_from_edges(flat.as_ptr(), 2, &mut g), LmStatus::LmOk);
            lm_graph_free(g);
            let bad = [0usize, 0];
            assert_eq!(
                lm_graph_from_edges(bad.as_ptr(), 1, &mut g),
                LmStatus::LmInvalidArgument
            );
        }
    }

    #[test]
    fn null_handling() {
        unsafe {
            let mut out = 0.0f64;
            assert_eq!(
                lm_delta(0.25, 1.0, 2.0, 6, 0, ptr::null_mut()),
                LmStatus::LmNullPointer
            );
            assert_eq!(
                lm_graph_vertex_count(ptr::null(), &mut 0usize),
                LmStatus::LmNullPointer
            );
            lm_graph_free(ptr::null_mut());
            assert_eq!(lm_delta(0.25, 1.0, 2.0, 6, 7, &mut out), LmStatus::LmInvalidArgument);
        }
    }

    #[test]
    fn delta_matches_core() {
        unsafe {
            let mut v = 0.0f64;
            assert_eq!(lm_delta(0.25, 1.0, 2.0, 6, 0, &mut v), LmStatus::LmOk);
            let direct = domination::delta(0.25, 1.0, 2.0, 6, DeltaVariant::Conservative).unwrap();
            assert_eq!(v, direct);
            assert!(v > 1.24e-10 && v < 1.28e-10);
        }
    }

    #[test]
    fn condition_flag() {
        unsafe {
            let mut flag = 2u8;
            assert_eq!(lm_subcritical_condition(0.1, 0.5, 4, 0.5, &mut flag), LmStatus::LmOk);
            assert_eq!(flag, 1);
            assert_eq!(
                lm_subcritical_condition(0.1, 0.5, 4, 1.5, &mut flag),
                LmStatus::LmInvalidArgument
            );
        }
    }

    #[test]
    fn indicators_fill_buffers() {
        unsafe {
            let mut g: *mut LmGraph = ptr::null_mut();
            assert_eq!(lm_graph_box(2, 4, false, &mut g), LmStatus::LmOk);
            let mut ne = 0usize;
            lm_graph_edge_count(g, &mut ne);
            let mut open = vec![9u8; ne];
            let mut blk = vec![9u8; ne];
            let mut nb = vec![9u8; ne];
            assert_eq!(
                lm_sample_indicators(
                    g,
                    0.8,
                    0.5,
                    42,
                    open.as_mut_ptr(),
                    blk.as_mut_ptr(),
                    nb.as_mut_ptr()
                ),
                LmStatus::LmOk
            );
            for e in 0..ne {
                assert!(open[e] <= 1 && blk[e] <= 1 && nb[e] <= 1);
                assert_eq!(nb[e], (open[e] == 1 && blk[e] == 0) as u8);
                assert!(blk[e] <= open[e]);
            }
            lm_graph_free(g);
        }
    }
}
