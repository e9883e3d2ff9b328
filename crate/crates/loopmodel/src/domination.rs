//! The closed-form domination bound `delta(beta, u, theta)`, the explicit
//! monotone coupling of binary vectors, and an exhaustive verifier for the
//! domination inequality on enumerable graphs.

use crate::blocking::is_blocking;
use crate::config::{log_weight, LinkConfig, Params, Sign};
use crate::error::ModelError;
use crate::graph::Graph;
use crate::loops::count_loops;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Two forms of the bound that disagree for theta != 1. `Conservative`
/// is never larger, reproduces the reference value 1.26e-10 at
/// (beta, u, theta, K) = (0.25, 1, 2, 6), and is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaVariant {
    Conservative,
    Optimistic,
}

fn check_delta_inputs(beta: f64, u: f64, theta: f64, k: usize) -> Result<(), ModelError> {
    Params::new(beta, u, theta)?;
    if k == 0 {
        return Err(ModelError::InvalidParams("K must be >= 1".into()));
    }
    Ok(())
}

/// The Bernoulli parameter dominated by the blocking-edge process.
pub fn delta(
    beta: f64,
    u: f64,
    theta: f64,
    k: usize,
    variant: DeltaVariant,
) -> Result<f64, ModelError> {
    check_delta_inputs(beta, u, theta, k)?;
    let th_hat = theta.max(1.0 / theta);
    let th_check = theta.min(1.0 / theta);
    let beta_plus = th_hat * beta;
    let kf = k as f64;
    let four_pow = 4f64.powi(k as i32 + 1);
    let last = (beta_plus / (beta_plus.exp() - 1.0)).powi(2 * k as i32 - 1);
    let v = match variant {
        DeltaVariant::Conservative => {
            let b3 = beta * th_check.powi(3);
            0.5 * (u * th_check / kf).powi(2) * (b3 / (b3 + 3.0 * four_pow)) * last
        }
        DeltaVariant::Optimistic => {
            let b3 = beta / th_check.powi(3);
            0.5 * ((u / th_check) / kf).powi(2) * (b3 / (b3 + 3.0 * four_pow)) * last
        }
    };
    Ok(v)
}

/// `((e^{b} - 1)/b)^{2 k_open - 1}` — the reweighting-control helper;
/// its reciprocal at `k_open = K` is the last factor of `delta`.
pub fn f_helper(beta_plus: f64, k_open: usize) -> Result<f64, ModelError> {
    if !(beta_plus > 0.0) || !beta_plus.is_finite() {
        return Err(ModelError::InvalidParams(format!(
            "beta_plus must be positive, got {beta_plus}"
        )));
    }
    let base = (beta_plus.exp() - 1.0) / beta_plus;
    Ok(base.powi(2 * k_open as i32 - 1))
}

/// Threshold comparison at theta = 1: true when
/// `(1 - e^{-beta}) (1 - delta(beta, u, 1)) < p_c`, i.e. when the
/// non-blocking open edges stay below the percolation threshold.
pub fn subcritical_condition(beta: f64, u: f64, k: usize, p_c: f64) -> Result<bool, ModelError> {
    if !(0.0 < p_c && p_c < 1.0) {
        return Err(ModelError::InvalidParams(format!(
            "p_c must lie in (0,1), got {p_c}"
        )));
    }
    let d = delta(beta, u, 1.0, k, DeltaVariant::Conservative)?;
    Ok((1.0 - (-beta).exp()) * (1.0 - d) < p_c)
}

/// Explicit joint distribution of a pair of binary vectors (X, Y) with the
/// prescribed conditional laws, supported on `{(a, b) : a >= b}`.
/// Vectors are bitmasks: bit `j` holds coordinate `j`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub n: usize,
    /// ((x bits, y bits), probability), zero-mass pairs pruned
    pub joint: Vec<((u32, u32), f64)>,
}

impl CouplingTable {
    pub fn total_mass(&self) -> f64 {
        self.joint.iter().map(|&(_, p)| p).sum()
    }

    /// True iff every supported pair satisfies `y <= x` componentwise.
    pub fn support_dominates(&self) -> bool {
        self.joint.iter().all(|&((x, y), _)| y & !x == 0)
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n];
        for &((x, _), p) in &self.joint {
            out[x as usize] += p;
        }
        out
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.n];
        for &((_, y), p) in &self.joint {
            out[y as usize] += p;
        }
        out
    }
}

/// Law of an N-bit vector given its conditional one-marginals:
/// `cond(j, prefix)` is P(bit j = 1 | bits 0..j = prefix).
pub fn law_from_conditionals<F>(cond: F, n: usize) -> Vec<f64>
where
    F: Fn(usize, &[bool]) -> f64,
{
    let mut out = vec![0.0; 1 << n];
    for bits in 0..(1u32 << n) {
        let mut prob = 1.0;
        let mut prefix = Vec::with_capacity(n);
        for j in 0..n {
            let p = cond(j, &prefix);
            let b = bits >> j & 1 == 1;
            prob *= if b { p } else { 1.0 - p };
            prefix.push(b);
        }
        out[bits as usize] = prob;
    }
    out
}

/// Builds the sequential monotone coupling: at step j the pair prefix
/// (a, b) extends with masses (1,1): q, (1,0): p - q, (0,0): 1 - p, where
/// p and q are the two conditional one-probabilities at their own
/// prefixes. Requires p >= q at every reachable prefix pair; a violation
/// is rejected naming the offending X-prefix.
pub fn build_coupling<FX, FY>(
    cond_x: FX,
    cond_y: FY,
    n: usize,
) -> Result<CouplingTable, ModelError>
where
    FX: Fn(usize, &[bool]) -> f64,
    FY: Fn(usize, &[bool]) -> f64,
{
    if n > 20 {
        return Err(ModelError::Guard(format!(
            "coupling table for N = {n} is too large to tabulate (max 20)"
        )));
    }
    // the stated hypothesis: dominance of the conditionals at equal prefixes
    for j in 0..n {
        for bits in 0..(1u32 << j) {
            let prefix: Vec<bool> = (0..j).map(|t| bits >> t & 1 == 1).collect();
            let p = cond_x(j, &prefix);
            let q = cond_y(j, &prefix);
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) || p < q {
                return Err(ModelError::DominationHypothesis {
                    prefix,
                    cond_x: p,
                    cond_y: q,
                });
            }
        }
    }

    // frontier of reachable pair prefixes with their accumulated mass
    let mut frontier: Vec<(Vec<bool>, Vec<bool>, f64)> = vec![(Vec::new(), Vec::new(), 1.0)];
    for j in 0..n {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for (a, b, mass) in frontier {
            let p = cond_x(j, &a);
            let q = cond_y(j, &b);
            // on the support a >= b holds coordinatewise, and the
            // construction additionally needs p >= q at these cross
            // prefixes for the (1,0) mass to be nonnegative
            if p < q - 1e-15 {
                return Err(ModelError::DominationHypothesis {
                    prefix: a.clone(),
                    cond_x: p,
                    cond_y: q,
                });
            }
            let q = q.min(p);
            for (xa, xb, m) in [(true, true, mass * q), (true, false, mass * (p - q)),
                                (false, false, mass * (1.0 - p))] {
                if m > 0.0 {
                    let mut na = a.clone();
                    let mut nb = b.clone();
                    na.push(xa);
                    nb.push(xb);
                    next.push((na, nb, m));
                }
            }
        }
        frontier = next;
    }

    let joint = frontier
        .into_iter()
        .map(|(a, b, m)| {
            let xa = a.iter().enumerate().fold(0u32, |acc, (j, &v)| acc | (v as u32) << j);
            let xb = b.iter().enumerate().fold(0u32, |acc, (j, &v)| acc | (v as u32) << j);
            ((xa, xb), m)
        })
        .collect();
    Ok(CouplingTable { n, joint })
}

/// Per-conditioning-pattern result of the exhaustive verifier.
#[derive(Debug, Clone, Serialize)]
pub struct PatternResult {
    /// blocking indicators over the edges at line-graph distance 1..2 from
    /// the center, in ascending edge order
    pub blocking_pattern: Vec<bool>,
    /// the exact link sequence restricted to edges at distance >= 2
    pub restriction: Vec<(usize, i8)>,
    pub weight_total: f64,
    pub weight_blocking: f64,
    /// conditional blocking probability bracket after widening by the
    /// truncation tail
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Inconclusive,
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub delta: f64,
    pub k: usize,
    pub n_max: usize,
    /// unnormalized upper bound on the weight omitted by truncation
    pub truncation_bound: f64,
    pub min_conditional_lower: f64,
    pub gap: f64,
    pub patterns_checked: usize,
    pub verdict: Verdict,
    pub patterns: Vec<PatternResult>,
}

/// Unnormalized tail bound: the total weight of all sequences longer than
/// `n_max` is at most `theta_hat^{|V|} * sum_{j > n_max} (|E| beta theta_hat)^j / j!`.
fn truncation_tail(g: &Graph, p: &Params, n_max: usize) -> f64 {
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
    tail * p.theta_hat().powi(g.vertex_count() as i32)
}

type PatternKey = (Vec<bool>, Vec<(usize, i8)>);

/// Exhaustively verifies the domination inequality: conditioned on every
/// edge carrying a link and on each realizable pattern of (blocking
/// indicators at distance 1..2 from `e0`, exact restriction to distance
/// >= 2), the conditional probability that `e0` blocks must be at least
/// `delta`. Truncation at `n_max` links widens each conditional into a
/// bracket; the verdict is `Holds` only when every lower end clears
/// `delta`.
pub fn verify_domination_exact(
    g: &Graph,
    e0: usize,
    p: &Params,
    n_max: usize,
) -> Result<DominationReport, ModelError> {
    g.edge(e0)?;
    let m = g.edge_count();
    let states_bound: f64 = (0..=n_max).map(|j| (2.0 * m as f64).powi(j as i32)).sum();
    if states_bound > 1e8 {
        return Err(ModelError::Guard(format!(
            "enumeration would visit ~{states_bound:.2e} sequences (limit 1e8)"
        )));
    }
    let k = g.max_degree();
    let d = delta(p.beta, p.u, p.theta, k, DeltaVariant::Conservative)?;
    let dist = g.edge_distances_from(e0)?;
    let a12: Vec<usize> = (0..m).filter(|&f| dist[f] == 1 || dist[f] == 2).collect();
    let far_mask: Vec<bool> = (0..m)
        .map(|f| dist[f] >= 2 && dist[f] != crate::graph::INFINITY)
        .collect();

    // every edge must carry a link, so lengths below |E| contribute nothing
    let min_len = m;
    // partition the sequence space by (length, first link) for parallelism
    let mut partitions: Vec<(usize, Option<(usize, Sign)>)> = Vec::new();
    for j in min_len.max(1)..=n_max {
        for e in 0..m {
            for s in [Sign::Cross, Sign::Bar] {
                partitions.push((j, Some((e, s))));
            }
        }
    }
    if min_len == 0 {
        partitions.push((0, None));
    }

    let maps: Vec<BTreeMap<PatternKey, (f64, f64)>> = partitions
        .par_iter()
        .map(|&(j, first)| {
            let mut acc: BTreeMap<PatternKey, (f64, f64)> = BTreeMap::new();
            let mut links: Vec<(usize, Sign)> = Vec::with_capacity(j);
            if let Some(f) = first {
                links.push(f);
            }
            let rest = j - links.len();
            let combos = (2 * m).pow(rest as u32);
            for code in 0..combos {
                links.truncate(j - rest);
                let mut x = code;
                for _ in 0..rest {
                    let e = x % m;
                    x /= m;
                    let s = if x % 2 == 0 { Sign::Cross } else { Sign::Bar };
                    x /= 2;
                    links.push((e, s));
                }
                let c = LinkConfig::from_links(std::mem::take(&mut links));
                let counts = c.edge_counts(g);
                if counts.iter().all(|&n_e| n_e >= 1) {
                    let w = log_weight(&c, p, count_loops(g, &c)).exp();
                    if w > 0.0 {
                        let pattern: Vec<bool> =
                            a12.iter().map(|&f| is_blocking(g, &c, f)).collect();
                        let restriction: Vec<(usize, i8)> = c
                            .restrict_mask(&far_mask)
                            .links()
                            .iter()
                            .map(|&(e, s)| (e, s.value()))
                            .collect();
                        let entry = acc.entry((pattern, restriction)).or_insert((0.0, 0.0));
                        entry.0 += w;
                        if is_blocking(g, &c, e0) {
                            entry.1 += w;
                        }
                    }
                }
                links = c.into_links();
            }
            acc
        })
        .collect();

    let mut groups: BTreeMap<PatternKey, (f64, f64)> = BTreeMap::new();
    for map in maps {
        for (key, (t, b)) in map {
            let entry = groups.entry(key).or_insert((0.0, 0.0));
            entry.0 += t;
            entry.1 += b;
        }
    }

    let tail = truncation_tail(g, p, n_max);
    let mut patterns = Vec::with_capacity(groups.len());
    let mut verdict = Verdict::Holds;
    let mut min_lower = f64::INFINITY;
    for ((blocking_pattern, restriction), (total, block)) in groups {
        let lower = block / (total + tail);
        let upper = ((block + tail) / total).min(1.0);
        min_lower = min_lower.min(lower);
        if lower < d {
            verdict = if upper < d {
                Verdict::Violated
            } else if verdict != Verdict::Violated {
                Verdict::Inconclusive
            } else {
                verdict
            };
        }
        patterns.push(PatternResult {
            blocking_pattern,
            restriction,
            weight_total: total,
            weight_blocking: block,
            lower,
            upper,
        });
    }
    if patterns.is_empty() {
        return Err(ModelError::ConditioningMass {
            mass: 0.0,
            truncation: tail,
        });
    }
    Ok(DominationReport {
        delta: d,
        k,
        n_max,
        truncation_bound: tail,
        min_conditional_lower: min_lower,
        gap: min_lower - d,
        patterns_checked: patterns.len(),
        verdict,
        patterns,
    })
}
