//! Ground-truth engines: exhaustive enumeration of the truncated
//! configuration space with exact weights, and an independent loop
//! builder that glues vertex-axis arcs instead of walking trajectories.

use crate::config::{log_weight, LinkConfig, Params, Sign};
use crate::error::ModelError;
use crate::graph::Graph;
use crate::loops::{count_loops, LoopDecomposition};
use std::collections::{BTreeMap, HashMap};

/// The truncated configuration space with normalized probabilities.
#[derive(Debug, Clone)]
pub struct EnumeratedDistribution {
    pub entries: HashMap<LinkConfig, f64>,
    pub n_max: usize,
    /// upper bound on (omitted weight) / (included weight); the omitted
    /// normalized mass is at most this ratio
    pub truncation_bound: f64,
}

/// Conditional probability with truncation-widened bracket.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalProbability {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Visits every link sequence of length 0..=n_max in odometer order.
pub fn for_each_config<F: FnMut(&LinkConfig)>(
    g: &Graph,
    n_max: usize,
    mut f: F,
) -> Result<(), ModelError> {
    let m = g.edge_count();
    let states: f64 = (0..=n_max).map(|j| (2.0 * m as f64).powi(j as i32)).sum();
    if states > 1e8 {
        return Err(ModelError::Guard(format!(
            "enumeration would visit ~{states:.2e} sequences (limit 1e8)"
        )));
    }
    let mut links = Vec::with_capacity(n_max);
    for j in 0..=n_max {
        let combos = (2u64 * m as u64).pow(j as u32);
        for code in 0..combos {
            links.clear();
            let mut x = code;
            for _ in 0..j {
                let e = (x % m as u64) as usize;
                x /= m as u64;
                let s = if x % 2 == 0 { Sign::Cross } else { Sign::Bar };
                x /= 2;
                links.push((e, s));
            }
            let c = LinkConfig::from_links(std::mem::take(&mut links));
            f(&c);
            links = c.into_links();
        }
    }
    Ok(())
}

fn tail_ratio_bound(g: &Graph, p: &Params, n_max: usize, included: f64) -> f64 {
    let lam = g.edge_count() as f64 * p.beta * p.theta_hat();
    let mut term = 1.0f64;
    for j in 1..=n_max {
        term *= lam / j as f64;
    }
    let mut tail = 0.0;
    let mut j = n_max + 1;
    loop {
        term *= lam / j as f64;
        tail += term;
        if term < tail * 1e-16 || term < 1e-300 {
            break;
        }
        j += 1;
    }
    tail * p.theta_hat().powi(g.vertex_count() as i32) / included
}

/// Materializes the truncated distribution. Guarded both by the number of
/// sequences visited and by the number of entries stored.
pub fn enumerate(
    g: &Graph,
    p: &Params,
    n_max: usize,
) -> Result<EnumeratedDistribution, ModelError> {
    let m = g.edge_count();
    let support: f64 = (0..=n_max).map(|j| (2.0 * m as f64).powi(j as i32)).sum();
    if support > 2e6 {
        return Err(ModelError::Guard(format!(
            "materializing ~{support:.2e} configurations exceeds the memory guard (2e6); \
             use streaming functionals instead"
        )));
    }
    let mut raw: Vec<(LinkConfig, f64)> = Vec::new();
    for_each_config(g, n_max, |c| {
        let lw = log_weight(c, p, count_loops(g, c));
        if lw > f64::NEG_INFINITY {
            raw.push((c.clone(), lw));
        }
    })?;
    let max_lw = raw.iter().map(|&(_, lw)| lw).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut entries = HashMap::with_capacity(raw.len());
    for (c, lw) in &raw {
        let w = (lw - max_lw).exp();
        total += w;
        entries.insert(c.clone(), w);
    }
    for w in entries.values_mut() {
        *w /= total;
    }
    // unnormalized included weight for the tail ratio
    let included = total * max_lw.exp();
    Ok(EnumeratedDistribution {
        entries,
        n_max,
        truncation_bound: tail_ratio_bound(g, p, n_max, included),
    })
}

impl EnumeratedDistribution {
    pub fn probability(&self, pred: impl Fn(&LinkConfig) -> bool) -> f64 {
        self.entries
            .iter()
            .filter(|(c, _)| pred(c))
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn expectation(&self, f: impl Fn(&LinkConfig) -> f64) -> f64 {
        self.entries.iter().map(|(c, &p)| f(c) * p).sum()
    }

    /// Total-variation distance to an empirical sample (counts per
    /// configuration out of `total` draws), over the union support.
    pub fn total_variation(&self, counts: &HashMap<LinkConfig, u64>, total: u64) -> f64 {
        let t = total as f64;
        let mut tv = 0.0;
        for (c, &p) in &self.entries {
            let emp = counts.get(c).map_or(0.0, |&k| k as f64 / t);
            tv += (p - emp).abs();
        }
        for (c, &k) in counts {
            if !self.entries.contains_key(c) {
                tv += k as f64 / t;
            }
        }
        tv / 2.0
    }

    pub fn conditional_probability(
        &self,
        event: impl Fn(&LinkConfig) -> bool,
        given: impl Fn(&LinkConfig) -> bool,
    ) -> Result<ConditionalProbability, ModelError> {
        let mut p_g = 0.0;
        let mut p_eg = 0.0;
        for (c, &p) in &self.entries {
            if given(c) {
                p_g += p;
                if event(c) {
                    p_eg += p;
                }
            }
        }
        if p_g <= self.truncation_bound {
            return Err(ModelError::ConditioningMass {
                mass: p_g,
                truncation: self.truncation_bound,
            });
        }
        Ok(ConditionalProbability {
            point: p_eg / p_g,
            lower: p_eg / (p_g + self.truncation_bound),
            upper: ((p_eg + self.truncation_bound) / p_g).min(1.0),
        })
    }
}

/// Independent loop construction by arc gluing.
///
/// Each vertex axis is cut by its link positions into arcs (the last arc
/// runs through the wrap gap). A cross glues below-to-above across the
/// edge, a double bar glues below-to-below and above-to-above. Connected
/// arc components are the loops. A component is periodic iff it contains
/// a wrap arc; its level-1 vertex set collects the wrap-arc vertices.
/// A confined component's level is the smallest link position it touches
/// and its vertex set collects all member vertices; smallest position 1
/// files it under level 1.
pub fn naive_trace(g: &Graph, c: &LinkConfig) -> LoopDecomposition {
    let nv = g.vertex_count();
    let mut positions: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (idx, &(e, _)) in c.links().iter().enumerate() {
        let (a, b) = g.edges()[e];
        positions[a].push(idx + 1);
        positions[b].push(idx + 1);
    }
    let mut offset = vec![0usize; nv + 1];
    for v in 0..nv {
        offset[v + 1] = offset[v] + positions[v].len();
    }
    let total_arcs = offset[nv];

    let arc_above = |v: usize, p: usize| -> usize {
        offset[v] + positions[v].binary_search(&p).unwrap()
    };
    let arc_below = |v: usize, p: usize| -> usize {
        let k = positions[v].len();
        offset[v] + (positions[v].binary_search(&p).unwrap() + k - 1) % k
    };

    let mut uf = crate::percolation::UnionFind::new(total_arcs);
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

    // classify components
    struct Comp {
        periodic: bool,
        min_pos: usize,
        wrap_vertices: Vec<usize>,
        all_vertices: Vec<usize>,
    }
    let mut comps: HashMap<usize, Comp> = HashMap::new();
    for v in 0..nv {
        let k = positions[v].len();
        for t in 0..k {
            let arc = offset[v] + t;
            let root = uf.find(arc);
            let comp = comps.entry(root).or_insert(Comp {
                periodic: false,
                min_pos: usize::MAX,
                wrap_vertices: Vec::new(),
                all_vertices: Vec::new(),
            });
            // arc t spans positions[t] .. positions[(t+1) % k]; its two
            // endpoint positions both count as touched links
            let start = positions[v][t];
            let end = positions[v][(t + 1) % k];
            comp.min_pos = comp.min_pos.min(start).min(end);
            if t == k - 1 {
                comp.periodic = true;
                comp.wrap_vertices.push(v);
            }
            comp.all_vertices.push(v);
        }
    }

    let mut levels: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut total = 0usize;
    let mut level1: Vec<Vec<usize>> = Vec::new();
    for (_, comp) in comps {
        total += 1;
        let (level, mut set) = if comp.periodic {
            (1, comp.wrap_vertices)
        } else {
            (comp.min_pos, comp.all_vertices)
        };
        set.sort_unstable();
        set.dedup();
        if level == 1 {
            level1.push(set);
        } else {
            levels.entry(level).or_default().push(set);
        }
    }
    for v in 0..nv {
        if positions[v].is_empty() {
            total += 1;
            level1.push(vec![v]);
        }
    }
    level1.sort();
    levels.insert(1, level1);
    for sets in levels.values_mut() {
        sets.sort();
    }
    debug_assert_eq!(total, count_loops(g, c));
    LoopDecomposition {
        levels,
        total_loops: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Sign::{Bar, Cross};
    use crate::loops::decompose;

    fn cfg(links: &[(usize, Sign)]) -> LinkConfig {
        LinkConfig::from_links(links.to_vec())
    }

    #[test]
    fn trace_empty_config() {
        let g = Graph::build_box(1, 4, false).unwrap();
        let dec = naive_trace(&g, &LinkConfig::new());
        assert_eq!(dec.total_loops, 4);
        assert_eq!(dec.level_one().len(), 4);
        assert_eq!(dec, decompose(&g, &LinkConfig::new()));
    }

    #[test]
    fn trace_two_crosses() {
        let g = Graph::from_edge_list(&[(0, 1)]).unwrap();
        let dec = naive_trace(&g, &cfg(&[(0, Cross), (0, Cross)]));
        assert_eq!(dec.total_loops, 2);
        assert_eq!(dec.level_one(), &[vec![0], vec![1]][..]);
        assert_eq!(dec, decompose(&g, &cfg(&[(0, Cross), (0, Cross)])));
    }

    #[test]
    fn trace_two_bars() {
        let g = Graph::from_edge_list(&[(0, 1)]).unwrap();
        let c = cfg(&[(0, Bar), (0, Bar)]);
        let dec = naive_trace(&g, &c);
        assert_eq!(dec.total_loops, 2);
        assert_eq!(dec.level_one(), &[vec![0, 1], vec![0, 1]][..]);
        assert_eq!(dec, decompose(&g, &c));
    }

    #[test]
    fn trace_nine_link_showcase() {
        let g = Graph::build_box(1, 4, false).unwrap();
        let c = cfg(&[
            (1, Bar),
            (0, Bar),
            (2, Cross),
            (0, Cross),
            (2, Bar),
            (1, Bar),
            (1, Bar),
            (0, Bar),
            (2, Bar),
        ]);
        let dec = naive_trace(&g, &c);
        assert_eq!(dec.total_loops, 3);
        assert_eq!(dec.level(1), &[vec![0, 1, 2, 3]][..]);
        assert_eq!(dec.level(2), &[vec![0, 1, 2, 3]][..]);
        assert_eq!(dec.level(6), &[vec![1, 2]][..]);
        assert_eq!(dec, decompose(&g, &c));
    }

    #[test]
    fn enumerate_trivial_truncation() {
        let g = Graph::from_edge_list(&[(0, 1)]).unwrap();
        let p = Params::new(0.3, 0.5, 1.0).unwrap();
        let dist = enumerate(&g, &p, 0).unwrap();
        assert_eq!(dist.entries.len(), 1);
        let p0 = dist.entries[&LinkConfig::new()];
        assert!((p0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumerate_single_edge_matches_poisson() {
        // u = 1, theta = 1: P(n = k) restricted to k <= 6 is Poisson(beta)
        let g = Graph::from_edge_list(&[(0, 1)]).unwrap();
        let p = Params::new(0.3, 1.0, 1.0).unwrap();
        let dist = enumerate(&g, &p, 6).unwrap();
        let z: f64 = (0..=6).map(|k| {
            0.3f64.powi(k) / (1..=k).map(|t| t as f64).product::<f64>()
        }).sum();
        for k in 0..=6usize {
            let expect = 0.3f64.powi(k as i32)
                / (1..=k).map(|t| t as f64).product::<f64>().max(1.0)
                / z;
            let got = dist.probability(|c| c.len() == k);
            assert!((got - expect).abs() < 1e-10, "k={k}: {got} vs {expect}");
        }
    }

    #[test]
    fn truncation_bound_decreases_in_n_max() {
        let g = Graph::build_box(1, 3, false).unwrap();
        let p = Params::new(0.4, 0.5, 2.0).unwrap();
        let mut prev = f64::INFINITY;
        for n_max in 2..7 {
            let dist = enumerate(&g, &p, n_max).unwrap();
            assert!(dist.truncation_bound < prev);
            prev = dist.truncation_bound;
        }
    }

    #[test]
    fn conditional_probability_edges() {
        let g = Graph::from_edge_list(&[(0, 1)]).unwrap();
        let p = Params::new(0.3, 1.0, 1.0).unwrap();
        let dist = enumerate(&g, &p, 8).unwrap();
        // event == given
        let cp = dist
            .conditional_probability(|c| c.len() >= 1, |c| c.len() >= 1)
            .unwrap();
        assert!((cp.point - 1.0).abs() < 1e-12);
        assert!(cp.lower <= 1.0 && cp.upper == 1.0);
        // disjoint event
        let cp = dist
            .conditional_probability(|c| c.len() == 0, |c| c.len() >= 1)
            .unwrap();
        assert_eq!(cp.point, 0.0);
        // closed form: P(n = 2 | n >= 1)
        let b: f64 = 0.3;
        let exact = (b * b / 2.0) * (-b).exp() / (1.0 - (-b).exp());
        let cp = dist
            .conditional_probability(|c| c.len() == 2, |c| c.len() >= 1)
            .unwrap();
        assert!(cp.lower <= exact && exact <= cp.upper);
        assert!((cp.point - exact).abs() < 1e-4);
    }

    #[test]
    fn conditioning_below_truncation_rejected() {
        let g = Graph::build_box(1, 3, false).unwrap();
        let p = Params::new(0.4, 0.5, 1.0).unwrap();
        let dist = enumerate(&g, &p, 3).unwrap();
        assert!(matches!(
            dist.conditional_probability(|_| true, |c| c.len() > 90),
            Err(ModelError::ConditioningMass { .. })
        ));
    }

    #[test]
    fn guard_on_large_enumeration() {
        let g = Graph::build_box(2, 3, false).unwrap();
        let p = Params::new(0.3, 0.5, 1.0).unwrap();
        assert!(matches!(
            enumerate(&g, &p, 8),
            Err(ModelError::Guard(_))
        ));
    }

    #[test]
    fn random_instances_agree_with_decompose() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
        for _ in 0..300 {
            let nv = rng.gen_range(2..=6);
            let mut pairs = Vec::new();
            for a in 0..nv {
                for b in (a + 1)..nv {
                    if rng.gen_bool(0.5) {
                        pairs.push((a, b));
                    }
                }
            }
            if pairs.is_empty() {
                pairs.push((0, 1));
            }
            let g = Graph::from_edge_list(&pairs).unwrap();
            let n = rng.gen_range(0..=10);
            let links: Vec<(usize, Sign)> = (0..n)
                .map(|_| {
                    (
                        rng.gen_range(0..g.edge_count()),
                        if rng.gen_bool(0.5) { Cross } else { Bar },
                    )
                })
                .collect();
            let c = cfg(&links);
            assert_eq!(naive_trace(&g, &c), decompose(&g, &c), "{pairs:?} {c:?}");
        }
    }
}
