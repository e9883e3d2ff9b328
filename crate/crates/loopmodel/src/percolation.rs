//! Cluster analysis on edge-indicator vectors and loop decompositions,
//! plus Monte Carlo estimators for cluster reach and its decay in the
//! box size.

use crate::config::Params;
use crate::error::ModelError;
use crate::graph::Graph;
use crate::loops::{self, LoopDecomposition};
use crate::sampler;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.components -= 1;
        true
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

/// Connected components of some vertex relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterStats {
    /// per-vertex component id, compacted to 0..sizes.len()
    pub component_id: Vec<usize>,
    /// component sizes, indexed by component id
    pub sizes: Vec<usize>,
    pub largest: usize,
}

impl ClusterStats {
    fn from_union_find(mut uf: UnionFind) -> Self {
        let n = uf.len();
        let mut compact = vec![usize::MAX; n];
        let mut component_id = vec![0usize; n];
        let mut sizes = Vec::new();
        for v in 0..n {
            let r = uf.find(v);
            if compact[r] == usize::MAX {
                compact[r] = sizes.len();
                sizes.push(0);
            }
            component_id[v] = compact[r];
            sizes[compact[r]] += 1;
        }
        let largest = sizes.iter().copied().max().unwrap_or(0);
        ClusterStats {
            component_id,
            sizes,
            largest,
        }
    }

    pub fn same_cluster(&self, v: usize, w: usize) -> bool {
        self.component_id[v] == self.component_id[w]
    }
}

/// Components of the subgraph of open edges.
pub fn clusters_from_edges(g: &Graph, open: &[bool]) -> ClusterStats {
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if open[e] {
            uf.union(a, b);
        }
    }
    ClusterStats::from_union_find(uf)
}

/// Vertex partitions induced by a loop decomposition: the level-1
/// partition (driving the loop-connectivity event) and, for diagnostics,
/// the coarser partition joining vertices that co-occur in a loop at any
/// level.
pub fn clusters_from_loops(g: &Graph, dec: &LoopDecomposition) -> (ClusterStats, ClusterStats) {
    let mut uf1 = UnionFind::new(g.vertex_count());
    for set in dec.level_one() {
        for w in &set[1..] {
            uf1.union(set[0], *w);
        }
    }
    let mut uf_all = UnionFind::new(g.vertex_count());
    for sets in dec.levels.values() {
        for set in sets {
            for w in &set[1..] {
                uf_all.union(set[0], *w);
            }
        }
    }
    (
        ClusterStats::from_union_find(uf1),
        ClusterStats::from_union_find(uf_all),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachKind {
    Link,
    Loop,
}

/// A Bernoulli estimate with a 95% Wilson confidence interval.
#[derive(Debug, Clone, Copy)]
pub struct ReachEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub samples: u64,
}

impl ReachEstimate {
    pub fn from_counts(hits: u64, samples: u64) -> Self {
        let n = samples as f64;
        let p = if samples == 0 { 0.0 } else { hits as f64 / n };
        let z = 1.959964f64; // 95%
        let (ci_low, ci_high) = if samples == 0 {
            (0.0, 1.0)
        } else {
            let z2 = z * z;
            let denom = 1.0 + z2 / n;
            let center = p + z2 / (2.0 * n);
            let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
            (
                ((center - half) / denom).max(0.0),
                ((center + half) / denom).min(1.0),
            )
        };
        ReachEstimate {
            estimate: p,
            ci_low,
            ci_high,
            hits,
            samples,
        }
    }
}

/// Loop- and link-reach hit counts over direct samples (theta must be 1).
/// The loop event requires a single level-1 loop containing the source
/// and a target vertex; the link event only needs the source's open-edge
/// cluster to touch a target. Loop-hit implies link-hit sample by sample,
/// and that is asserted here.
fn reach_pair_counts(
    g: &Graph,
    p: &Params,
    source: usize,
    target: &[bool],
    n_samples: u64,
    seed: u64,
) -> Result<(u64, u64), ModelError> {
    if p.theta != 1.0 {
        return Err(ModelError::ThetaNotOne(p.theta));
    }
    let targets: Vec<usize> = (0..g.vertex_count()).filter(|&v| target[v]).collect();
    const CHUNK: u64 = 512;
    let n_chunks = n_samples.div_ceil(CHUNK);
    let (loop_hits, link_hits) = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (chunk.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(n_samples);
            let mut lh = 0u64;
            let mut kh = 0u64;
            for _ in lo..hi {
                let c = sampler::sample_direct_theta1(g, p, &mut rng)
                    .expect("theta checked above");
                // link event
                let counts = c.edge_counts(g);
                let mut uf = UnionFind::new(g.vertex_count());
                for (e, &(a, b)) in g.edges().iter().enumerate() {
                    if counts[e] > 0 {
                        uf.union(a, b);
                    }
                }
                let link_hit = targets.iter().any(|&w| uf.connected(source, w));
                // loop event: the periodic level-1 class of the source,
                // plus the confined level-1 loop when it contains the source
                let mut loop_hit = loops::level_one_class(g, &c, source)
                    .iter()
                    .any(|&w| target[w]);
                if !loop_hit && !c.is_empty() {
                    if let Some(set) = loops::bounce_loop(g, &c, 1) {
                        if set.binary_search(&source).is_ok() {
                            loop_hit = set.iter().any(|&w| target[w]);
                        }
                    }
                }
                assert!(
                    !loop_hit || link_hit,
                    "loop reach without link reach: {}",
                    c.to_json()
                );
                lh += loop_hit as u64;
                kh += link_hit as u64;
            }
            (lh, kh)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok((loop_hits, link_hits))
}

fn radius_targets(g: &Graph, source: usize, radius: usize) -> Result<Vec<bool>, ModelError> {
    let dist = g.vertex_distances(source)?;
    let max = dist
        .iter()
        .filter(|&&d| d != crate::graph::INFINITY)
        .max()
        .copied()
        .unwrap_or(0);
    if radius > max {
        return Err(ModelError::RadiusUnreachable {
            vertex: source,
            radius,
            max,
        });
    }
    Ok(dist
        .iter()
        .map(|&d| d != crate::graph::INFINITY && d >= radius)
        .collect())
}

/// Probability that the source's cluster (of the requested kind) reaches
/// graph distance >= radius, estimated over direct theta=1 samples.
pub fn estimate_reach(
    g: &Graph,
    source: usize,
    radius: usize,
    kind: ReachKind,
    p: &Params,
    n_samples: u64,
    seed: u64,
) -> Result<ReachEstimate, ModelError> {
    let (l, k) = estimate_reach_both(g, source, radius, p, n_samples, seed)?;
    Ok(match kind {
        ReachKind::Loop => l,
        ReachKind::Link => k,
    })
}

/// Both reach estimates from the same sample stream: (loop, link).
pub fn estimate_reach_both(
    g: &Graph,
    source: usize,
    radius: usize,
    p: &Params,
    n_samples: u64,
    seed: u64,
) -> Result<(ReachEstimate, ReachEstimate), ModelError> {
    let target = radius_targets(g, source, radius)?;
    let (lh, kh) = reach_pair_counts(g, p, source, &target, n_samples, seed)?;
    Ok((
        ReachEstimate::from_counts(lh, n_samples),
        ReachEstimate::from_counts(kh, n_samples),
    ))
}

/// One row of a decay profile over centered boxes.
#[derive(Debug, Clone)]
pub struct DecayRow {
    /// box "radius": the box has side 2n+1 and boundary at sup-distance n
    pub n: usize,
    pub loop_reach: ReachEstimate,
    pub link_reach: ReachEstimate,
}

/// Estimates P(center connected to the box boundary) on 2D boxes of side
/// 2n+1 for each requested n, for both loop and link connectivity.
/// Boundary membership is sup-norm distance exactly n from the center.
pub fn decay_profile(
    box_radii: &[usize],
    p: &Params,
    n_samples: u64,
    seed: u64,
) -> Result<Vec<DecayRow>, ModelError> {
    let mut rows = Vec::new();
    for (k, &n) in box_radii.iter().enumerate() {
        let side = 2 * n + 1;
        let g = Graph::build_box(2, side, false)?;
        let center = n + n * side;
        let border: Vec<bool> = (0..g.vertex_count())
            .map(|v| {
                let (x, y) = (v % side, v / side);
                x == 0 || y == 0 || x == side - 1 || y == side - 1
            })
            .collect();
        let (lh, kh) = reach_pair_counts(
            &g,
            p,
            center,
            &border,
            n_samples,
            seed.wrapping_add(k as u64),
        )?;
        rows.push(DecayRow {
            n,
            loop_reach: ReachEstimate::from_counts(lh, n_samples),
            link_reach: ReachEstimate::from_counts(kh, n_samples),
        });
    }
    Ok(rows)
}

/// Least-squares slope of ln(estimate) against n, over rows with a
/// positive loop estimate. `None` when fewer than two usable rows.
pub fn fit_log_slope(rows: &[DecayRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.loop_reach.estimate > 0.0)
        .map(|r| (r.n as f64, r.loop_reach.estimate.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{LinkConfig, Sign};
    use crate::loops::decompose;

    #[test]
    fn all_closed_gives_singletons() {
        let g = Graph::build_box(2, 3, false).unwrap();
        let stats = clusters_from_edges(&g, &vec![false; g.edge_count()]);
        assert_eq!(stats.sizes.len(), 9);
        assert_eq!(stats.largest, 1);
        assert_eq!(stats.sizes.iter().sum::<usize>(), g.vertex_count());
    }

    #[test]
    fn all_open_gives_one_component() {
        let g = Graph::build_box(2, 3, false).unwrap();
        let stats = clusters_from_edges(&g, &vec![true; g.edge_count()]);
        assert_eq!(stats.sizes.len(), 1);
        assert_eq!(stats.largest, 9);
    }

    #[test]
    fn union_find_matches_dfs() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let g = Graph::build_box(2, 5, false).unwrap();
            let open: Vec<bool> = (0..g.edge_count()).map(|_| rng.gen_bool(0.5)).collect();
            let stats = clusters_from_edges(&g, &open);
            // DFS reference
            let mut comp = vec![usize::MAX; g.vertex_count()];
            let mut next = 0;
            for s in 0..g.vertex_count() {
                if comp[s] != usize::MAX {
                    continue;
                }
                let mut stack = vec![s];
                comp[s] = next;
                while let Some(v) = stack.pop() {
                    for &(w, e) in g.adjacency(v) {
                        if open[e] && comp[w] == usize::MAX {
                            comp[w] = next;
                            stack.push(w);
                        }
                    }
                }
                next += 1;
            }
            for v in 0..g.vertex_count() {
                for w in 0..g.vertex_count() {
                    assert_eq!(
                        comp[v] == comp[w],
                        stats.same_cluster(v, w),
                        "trial {trial}"
                    );
                }
            }
        }
    }

    #[test]
    fn adding_edges_never_splits() {
        use rand::Rng;
        let g = Graph::build_box(2, 4, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let open: Vec<bool> = (0..g.edge_count()).map(|_| rng.gen_bool(0.4)).collect();
            let more: Vec<bool> = open
                .iter()
                .map(|&o| o || rng.gen_bool(0.3))
                .collect();
            let a = clusters_from_edges(&g, &open);
            let b = clusters_from_edges(&g, &more);
            for v in 0..g.vertex_count() {
                for w in 0..g.vertex_count() {
                    if a.same_cluster(v, w) {
                        assert!(b.same_cluster(v, w));
                    }
                }
            }
        }
    }

    #[test]
    fn loop_clusters_from_decomposition() {
        let g = Graph::build_box(1, 4, false).unwrap();
        let dec = decompose(&g, &LinkConfig::new());
        let (l1, all) = clusters_from_loops(&g, &dec);
        assert_eq!(l1.sizes.len(), 4);
        assert_eq!(all.sizes.len(), 4);

        let c = LinkConfig::from_links(vec![(0, Sign::Cross), (1, Sign::Cross)]);
        let dec = decompose(&g, &c);
        let (l1, _) = clusters_from_loops(&g, &dec);
        assert!(l1.same_cluster(0, 2));
        assert!(!l1.same_cluster(0, 3));
    }

    #[test]
    fn radius_zero_is_certain() {
        let g = Graph::build_box(2, 3, false).unwrap();
        let p = Params::new(0.2, 0.5, 1.0).unwrap();
        let (l, k) = estimate_reach_both(&g, 4, 0, &p, 200, 1).unwrap();
        assert_eq!(l.estimate, 1.0);
        assert_eq!(k.estimate, 1.0);
    }

    #[test]
    fn unreachable_radius_rejected() {
        let g = Graph::build_box(2, 3, false).unwrap();
        let p = Params::new(0.2, 0.5, 1.0).unwrap();
        assert!(matches!(
            estimate_reach(&g, 4, 10, ReachKind::Link, &p, 10, 1),
            Err(ModelError::RadiusUnreachable { .. })
        ));
    }

    #[test]
    fn theta_must_be_one_for_estimators() {
        let g = Graph::build_box(2, 3, false).unwrap();
        let p = Params::new(0.2, 0.5, 2.0).unwrap();
        assert!(matches!(
            estimate_reach(&g, 4, 1, ReachKind::Link, &p, 10, 1),
            Err(ModelError::ThetaNotOne(_))
        ));
    }

    #[test]
    fn reach_estimates_are_deterministic() {
        let g = Graph::build_box(2, 5, false).unwrap();
        let p = Params::new(0.4, 0.5, 1.0).unwrap();
        let a = estimate_reach_both(&g, 12, 2, &p, 2000, 42).unwrap();
        let b = estimate_reach_both(&g, 12, 2, &p, 2000, 42).unwrap();
        assert_eq!(a.0.hits, b.0.hits);
        assert_eq!(a.1.hits, b.1.hits);
        assert!(a.0.estimate <= a.1.estimate);
    }

    #[test]
    fn decay_single_vertex_box_is_certain() {
        let p = Params::new(0.4, 0.5, 1.0).unwrap();
        let rows = decay_profile(&[0], &p, 50, 3).unwrap();
        assert_eq!(rows[0].loop_reach.estimate, 1.0);
        assert_eq!(rows[0].link_reach.estimate, 1.0);
    }

    #[test]
    fn wilson_interval_sane() {
        let e = ReachEstimate::from_counts(0, 1000);
        assert_eq!(e.estimate, 0.0);
        assert!(e.ci_low < 1e-12 && e.ci_high > 0.0 && e.ci_high < 0.01);
        let f = ReachEstimate::from_counts(500, 1000);
        assert!((f.estimate - 0.5).abs() < 1e-12);
        assert!(f.ci_low < 0.5 && f.ci_high > 0.5);
    }
}
