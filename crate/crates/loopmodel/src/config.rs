//! Link configurations (ordered sequences of signed links) and the
//! unnormalized model weight.

use crate::error::ModelError;
use crate::graph::Graph;
use serde::{Deserialize, Serialize};

/// Sign of a link: `Cross` (+1) keeps time direction, `Bar` (-1, the
/// "double bar") reverses it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Cross,
    Bar,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Cross => 1,
            Sign::Bar => -1,
        }
    }

    pub fn from_value(v: i8) -> Result<Self, ModelError> {
        match v {
            1 => Ok(Sign::Cross),
            -1 => Ok(Sign::Bar),
            other => Err(ModelError::Parse(format!("sign must be +1 or -1, got {other}"))),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Cross => Sign::Bar,
            Sign::Bar => Sign::Cross,
        }
    }
}

/// An ordered finite sequence of links `(edge_index, sign)`. The order is
/// semantically meaningful: the blocking predicate depends on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinkConfig {
    links: Vec<(usize, Sign)>,
}

/// Model parameters: `beta` link intensity per edge, `u` cross
/// probability, `theta` loop weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub beta: f64,
    pub u: f64,
    pub theta: f64,
}

impl Params {
    pub fn new(beta: f64, u: f64, theta: f64) -> Result<Self, ModelError> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(ModelError::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if !(0.0..=1.0).contains(&u) {
            return Err(ModelError::InvalidParams(format!("u must lie in [0,1], got {u}")));
        }
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(ModelError::InvalidParams(format!("theta must be positive, got {theta}")));
        }
        Ok(Params { beta, u, theta })
    }

    /// max{theta, 1/theta}
    pub fn theta_hat(&self) -> f64 {
        self.theta.max(1.0 / self.theta)
    }

    /// min{theta, 1/theta}
    pub fn theta_check(&self) -> f64 {
        self.theta.min(1.0 / self.theta)
    }

    /// theta_hat * beta
    pub fn beta_plus(&self) -> f64 {
        self.theta_hat() * self.beta
    }
}

impl LinkConfig {
    pub fn new() -> Self {
        LinkConfig { links: Vec::new() }
    }

    pub fn from_links(links: Vec<(usize, Sign)>) -> Self {
        LinkConfig { links }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn links(&self) -> &[(usize, Sign)] {
        &self.links
    }

    pub fn into_links(self) -> Vec<(usize, Sign)> {
        self.links
    }

    pub fn link(&self, i: usize) -> (usize, Sign) {
        self.links[i]
    }

    pub fn push(&mut self, edge: usize, sign: Sign) {
        self.links.push((edge, sign));
    }

    pub fn insert(&mut self, pos: usize, edge: usize, sign: Sign) {
        self.links.insert(pos, (edge, sign));
    }

    pub fn remove(&mut self, pos: usize) -> (usize, Sign) {
        self.links.remove(pos)
    }

    pub fn flip_sign(&mut self, pos: usize) {
        self.links[pos].1 = self.links[pos].1.flipped();
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.links.swap(i, j);
    }

    /// Checks every edge index against the ambient graph.
    pub fn validate(&self, g: &Graph) -> Result<(), ModelError> {
        for &(e, _) in &self.links {
            g.edge(e)?;
        }
        Ok(())
    }

    /// Number of crosses (sign +1).
    pub fn cross_count(&self) -> usize {
        self.links.iter().filter(|&&(_, s)| s == Sign::Cross).count()
    }

    /// Number of double bars (sign -1).
    pub fn bar_count(&self) -> usize {
        self.links.len() - self.cross_count()
    }

    /// Per-edge link counts `n_e`.
    pub fn edge_counts(&self, g: &Graph) -> Vec<usize> {
        let mut counts = vec![0usize; g.edge_count()];
        for &(e, _) in &self.links {
            counts[e] += 1;
        }
        counts
    }

    /// Subsequence keeping exactly the links whose edge lies in `subset`
    /// (given as a membership mask over edge indices), order preserved.
    pub fn restrict_mask(&self, subset: &[bool]) -> LinkConfig {
        LinkConfig {
            links: self
                .links
                .iter()
                .copied()
                .filter(|&(e, _)| subset[e])
                .collect(),
        }
    }

    /// Like [`restrict_mask`](Self::restrict_mask) with an explicit index set.
    pub fn restrict(&self, subset: &[usize], g: &Graph) -> LinkConfig {
        let mut mask = vec![false; g.edge_count()];
        for &e in subset {
            mask[e] = true;
        }
        self.restrict_mask(&mask)
    }

    /// JSON form `{"links":[[edge,sign],...]}` with signs as +1/-1.
    pub fn to_json(&self) -> String {
        let pairs: Vec<(usize, i8)> = self.links.iter().map(|&(e, s)| (e, s.value())).collect();
        serde_json::json!({ "links": pairs }).to_string()
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        #[derive(Deserialize)]
        struct Wire {
            links: Vec<(usize, i8)>,
        }
        let wire: Wire =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let mut links = Vec::with_capacity(wire.links.len());
        for (e, s) in wire.links {
            links.push((e, Sign::from_value(s)?));
        }
        Ok(LinkConfig { links })
    }
}

/// Natural log of the unnormalized weight
/// `beta^n / n! * u^{n+} * (1-u)^{n-} * theta^{loop_count}`.
///
/// `u = 0` with a cross present (or `u = 1` with a bar present) gives
/// `-inf`, which is a valid log-weight of zero.
pub fn log_weight(c: &LinkConfig, p: &Params, loop_count: usize) -> f64 {
    let n = c.len();
    let n_plus = c.cross_count();
    let n_minus = n - n_plus;
    let mut lw = n as f64 * p.beta.ln() - ln_factorial(n);
    lw += sign_log_term(p.u, n_plus) + sign_log_term(1.0 - p.u, n_minus);
    lw += loop_count as f64 * p.theta.ln();
    lw
}

fn sign_log_term(prob: f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else if prob == 0.0 {
        f64::NEG_INFINITY
    } else {
        count as f64 * prob.ln()
    }
}

/// ln(n!) via Stirling's series for large n, exact accumulation otherwise.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 128 {
        let mut acc = 0.0;
        for k in 2..=n {
            acc += (k as f64).ln();
        }
        acc
    } else {
        // Stirling series; error < 1e-13 for n >= 128
        let x = n as f64 + 1.0;
        let inv = 1.0 / x;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + inv / 12.0
            - inv * inv * inv / 360.0
    }
}
