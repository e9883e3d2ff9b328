//! Blocking edges and the derived per-edge indicator processes.
//!
//! An edge is blocking when it carries exactly two links, both crosses,
//! and no edge sharing a vertex with it carries a link strictly between
//! the two positions in the sequence. Such an edge is open for link
//! percolation but the two crosses compose to the identity, so no loop
//! connects its two sides through it.

use crate::config::{LinkConfig, Sign};
use crate::graph::Graph;

/// Per-edge indicator vectors: open (`n_e >= 1`), blocking, and
/// non-blocking-open (`open && !blocking`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeIndicators {
    pub open: Vec<bool>,
    pub blocking: Vec<bool>,
    pub nb: Vec<bool>,
}

/// True iff edge `e` is blocking in `c`.
pub fn is_blocking(g: &Graph, c: &LinkConfig, e: usize) -> bool {
    let mut first = None;
    let mut second = None;
    for (pos, &(f, s)) in c.links().iter().enumerate() {
        if f != e {
            continue;
        }
        if s != Sign::Cross {
            return false;
        }
        if first.is_none() {
            first = Some(pos);
        } else if second.is_none() {
            second = Some(pos);
        } else {
            return false; // three or more links on e
        }
    }
    let (i, j) = match (first, second) {
        (Some(i), Some(j)) => (i, j),
        _ => return false,
    };
    // no link on an adjacent edge strictly between the two crosses
    c.links()[i + 1..j]
        .iter()
        .all(|&(f, _)| !g.edges_adjacent(e, f))
}

/// All three indicator vectors in one pass over the configuration.
pub fn indicators(g: &Graph, c: &LinkConfig) -> EdgeIndicators {
    let m = g.edge_count();
    // per-edge positions; None once an edge is disqualified from blocking
    let mut pos: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (p, &(e, _)) in c.links().iter().enumerate() {
        pos[e].push(p);
    }
    let mut open = vec![false; m];
    let mut blocking = vec![false; m];
    for e in 0..m {
        open[e] = !pos[e].is_empty();
        if pos[e].len() != 2 {
            continue;
        }
        let (i, j) = (pos[e][0], pos[e][1]);
        if c.link(i).1 != Sign::Cross || c.link(j).1 != Sign::Cross {
            continue;
        }
        blocking[e] = c.links()[i + 1..j]
            .iter()
            .all(|&(f, _)| !g.edges_adjacent(e, f));
    }
    let nb = open
        .iter()
        .zip(&blocking)
        .map(|(&o, &b)| o && !b)
        .collect();
    EdgeIndicators { open, blocking, nb }
}
