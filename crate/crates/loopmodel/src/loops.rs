//! Loop decomposition of a link configuration.
//!
//! Picture each vertex as a vertical time axis cut into `n+1` gaps by the
//! link positions 1..n, with the top gap glued to the bottom gap (gap 0,
//! the "wrap"). A trajectory travels up or down an axis; at a link on an
//! incident edge it switches to the other endpoint, keeping its direction
//! at a cross and reversing it at a double bar. The closed trajectories
//! are the loops.
//!
//! Levels:
//! * level 1: loops that pass through gap 0 (periodic loops). Their vertex
//!   set records the gap-0 crossings; these sets partition the vertex set.
//!   A confined loop whose lowest contact is the top of link 1 also lands
//!   in level 1 (its set records every visited vertex) — in that rare case
//!   the level-1 sets need not be disjoint.
//! * level m >= 2: at most one loop — the confined trajectory that bounces
//!   off the top of link m (only possible when link m is a double bar) and
//!   never descends below it nor reaches gap 0. Its vertex set records
//!   every visited vertex.

use crate::config::{LinkConfig, Sign};
use crate::graph::Graph;
use crate::percolation::UnionFind;
use std::collections::{BTreeMap, BTreeSet};

/// The per-level loop families and the total loop count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopDecomposition {
    /// level -> loops at that level, each a sorted vertex set. Levels with
    /// no loops are absent.
    pub levels: BTreeMap<usize, Vec<Vec<usize>>>,
    pub total_loops: usize,
}

impl LoopDecomposition {
    pub fn level(&self, m: usize) -> &[Vec<usize>] {
        self.levels.get(&m).map_or(&[], Vec::as_slice)
    }

    pub fn level_one(&self) -> &[Vec<usize>] {
        self.level(1)
    }

    /// True iff some level-1 loop contains both vertices.
    pub fn connected_by_loop(&self, v: usize, w: usize) -> bool {
        self.level(1)
            .iter()
            .any(|set| set.binary_search(&v).is_ok() && set.binary_search(&w).is_ok())
    }

    pub fn loop_count(&self) -> usize {
        self.total_loops
    }
}

/// One trajectory step. State is (vertex, link index 1..=n about to be
/// processed, direction). Returns the new (vertex, direction) and the
/// unwrapped next index `i + direction` in `0..=n+1`.
#[inline]
fn step(g: &Graph, c: &LinkConfig, v: usize, i: usize, d: i8) -> (usize, i8, isize) {
    let (e, s) = c.link(i - 1);
    let (a, b) = g.edges()[e];
    let (nv, nd) = if v == a {
        (b, if s == Sign::Bar { -d } else { d })
    } else if v == b {
        (a, if s == Sign::Bar { -d } else { d })
    } else {
        (v, d)
    };
    (nv, nd, i as isize + nd as isize)
}

/// Traces the periodic loop whose gap-0 point lies on `v0`'s axis and
/// returns its gap-0 crossing vertices (sorted). Requires `n >= 1`.
fn periodic_walk(g: &Graph, c: &LinkConfig, v0: usize) -> Vec<usize> {
    let n = c.len();
    debug_assert!(n >= 1);
    let start = (v0, n, -1i8);
    let (mut v, mut i, mut d) = start;
    let mut crossings = BTreeSet::new();
    // The dynamics is a permutation of the finite state space, so the
    // orbit returns to its start; the guard only defends the invariant.
    let mut guard = 2 * n * g.vertex_count() + 2;
    loop {
        let (nv, nd, raw) = step(g, c, v, i, d);
        v = nv;
        d = nd;
        if raw == n as isize + 1 {
            i = 1;
            crossings.insert(v);
        } else if raw == 0 {
            i = n;
            crossings.insert(v);
        } else {
            i = raw as usize;
        }
        if (v, i, d) == start {
            break;
        }
        guard -= 1;
        assert!(guard > 0, "trajectory failed to close");
    }
    crossings.into_iter().collect()
}

/// Traces the confined loop bouncing off the top of link `m` (1-indexed),
/// if it exists. Returns all visited vertices (sorted), or `None` when the
/// trajectory through link `m`'s top belongs to a periodic loop or to one
/// reaching below link `m`.
pub fn bounce_loop(g: &Graph, c: &LinkConfig, m: usize) -> Option<Vec<usize>> {
    let n = c.len();
    debug_assert!((1..=n).contains(&m));
    let (e, s) = c.link(m - 1);
    if s != Sign::Bar {
        // bouncing off a link's top (enter and leave from above) needs a bar
        return None;
    }
    let v0 = g.edges()[e].0;
    let start = (v0, m, -1i8);
    let (mut v, mut i, mut d) = start;
    let mut visited = BTreeSet::new();
    visited.insert(v0);
    let mut guard = 2 * n * g.vertex_count() + 2;
    loop {
        let (nv, nd, raw) = step(g, c, v, i, d);
        if nv != v {
            visited.insert(nv);
        }
        v = nv;
        d = nd;
        if raw >= n as isize + 1 {
            return None; // entered gap 0 from below: periodic loop
        }
        if raw <= m as isize - 1 {
            return None; // descended below link m: deeper contact exists
        }
        i = raw as usize;
        if (v, i, d) == start {
            return Some(visited.into_iter().collect());
        }
        guard -= 1;
        assert!(guard > 0, "trajectory failed to close");
    }
}

/// Gap-0 crossing set of the periodic loop through `v`'s axis. For `n = 0`
/// this is the singleton `{v}`.
pub fn level_one_class(g: &Graph, c: &LinkConfig, v: usize) -> Vec<usize> {
    if c.is_empty() {
        vec![v]
    } else {
        periodic_walk(g, c, v)
    }
}

/// Full loop decomposition via trajectory walks.
pub fn decompose(g: &Graph, c: &LinkConfig) -> LoopDecomposition {
    let n = c.len();
    let mut levels: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut level1: Vec<Vec<usize>> = Vec::new();

    if n == 0 {
        for v in 0..g.vertex_count() {
            level1.push(vec![v]);
        }
    } else {
        // periodic loops: one walk per not-yet-covered vertex. The gap-0
        // crossing sets partition the vertex set, so skipping covered
        // starting vertices loses nothing.
        let mut covered = vec![false; g.vertex_count()];
        for v in 0..g.vertex_count() {
            if covered[v] {
                continue;
            }
            let set = periodic_walk(g, c, v);
            for &w in &set {
                covered[w] = true;
            }
            level1.push(set);
        }
        // confined loops: at most one per bounce link. A bounce off the
        // top of link n would already sit in gap 0, so n is excluded.
        for m in 1..n {
            if let Some(set) = bounce_loop(g, c, m) {
                if m == 1 {
                    level1.push(set);
                } else {
                    levels.insert(m, vec![set]);
                }
            }
        }
    }

    let total = level1.len() + levels.values().map(Vec::len).sum::<usize>();
    level1.sort();
    levels.insert(1, level1);
    LoopDecomposition {
        levels,
        total_loops: total,
    }
}

/// Loop count without materializing the decomposition: one arc per gap of
/// each vertex axis, glued at every link, counted with union-find.
/// `O((n + |V|) * alpha)`.
pub fn count_loops(g: &Graph, c: &LinkConfig) -> usize {
    let n = c.len();
    if n == 0 {
        return g.vertex_count();
    }
    // positions[v] lists the 1-indexed link positions on v's axis, ascending
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    for (idx, &(e, _)) in c.links().iter().enumerate() {
        let (a, b) = g.edges()[e];
        positions[a].push(idx + 1);
        positions[b].push(idx + 1);
    }
    // arc t of vertex v runs from positions[v][t] up to the next position
    // (cyclically); the last arc is the wrap arc through gap 0
    let mut offset = vec![0usize; g.vertex_count() + 1];
    for v in 0..g.vertex_count() {
        offset[v + 1] = offset[v] + positions[v].len();
    }
    let total_arcs = offset[g.vertex_count()];
    let mut uf = UnionFind::new(total_arcs);

    // arc starting at (going up from) position `p` on vertex `v`
    let arc_above = |v: usize, p: usize| -> usize {
        let t = positions[v].binary_search(&p).unwrap();
        offset[v] + t
    };
    // arc ending at (coming up into) position `p` on vertex `v`
    let arc_below = |v: usize, p: usize| -> usize {
        let k = positions[v].len();
        let t = positions[v].binary_search(&p).unwrap();
        offset[v] + (t + k - 1) % k
    };

    for (idx, &(e, s)) in c.links().iter().enumerate() {
        let p = idx + 1;
        let (a, b) = g.edges()[e];
        match s {
            Sign::Cross => {
                uf.union(arc_below(a, p), arc_above(b, p));
                uf.union(arc_below(b, p), arc_above(a, p));
            }
            Sign::Bar => {
                uf.union(arc_below(a, p), arc_below(b, p));
                uf.union(arc_above(a, p), arc_above(b, p));
            }
        }
    }

    let isolated = positions.iter().filter(|ps| ps.is_empty()).count();
    uf.component_count() + isolated
}
