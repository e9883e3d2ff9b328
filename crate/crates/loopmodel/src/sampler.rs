//! Random generation of link configurations: an exact sampler at
//! theta = 1, a Metropolis-Hastings chain for general theta, and plain
//! Bernoulli edge percolation for comparison.

use crate::config::{LinkConfig, Params, Sign};
use crate::error::ModelError;
use crate::graph::Graph;
use crate::loops::count_loops;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Chain controls. `move_weights` are relative weights for the four
/// proposal kinds (insert, delete, sign_flip, adjacent_swap).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    /// burn-in, in sweeps (a sweep is a fixed batch of elementary steps)
    pub burn_in: usize,
    /// sweeps between retained samples
    pub thinning: usize,
    pub move_weights: [f64; 4],
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            burn_in: 1000,
            thinning: 10,
            move_weights: [0.35, 0.35, 0.15, 0.15],
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.move_weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(ModelError::InvalidParams(
                "move weights must be finite and nonnegative".into(),
            ));
        }
        if self.move_weights[0] <= 0.0 || self.move_weights[1] <= 0.0 {
            return Err(ModelError::InvalidParams(
                "insert and delete weights must both be positive (ergodicity)".into(),
            ));
        }
        Ok(())
    }
}

/// Exact sample at theta = 1: per-edge Poisson(beta) multiplicities, a
/// uniform interleaving, and iid Bernoulli(u) signs.
pub fn sample_direct_theta1<R: Rng + ?Sized>(
    g: &Graph,
    p: &Params,
    rng: &mut R,
) -> Result<LinkConfig, ModelError> {
    if p.theta != 1.0 {
        return Err(ModelError::ThetaNotOne(p.theta));
    }
    let mut edges = Vec::new();
    for e in 0..g.edge_count() {
        let k = poisson(p.beta, rng);
        edges.extend(std::iter::repeat(e).take(k));
    }
    edges.shuffle(rng);
    let links = edges
        .into_iter()
        .map(|e| {
            let s = if rng.gen_bool(p.u) { Sign::Cross } else { Sign::Bar };
            (e, s)
        })
        .collect();
    Ok(LinkConfig::from_links(links))
}

/// Inversion sampling of Poisson(lambda); fine for the desk-scale
/// intensities used here (lambda well below ~30).
fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> usize {
    let mut k = 0usize;
    let mut p = (-lambda).exp();
    let mut f = p;
    let u: f64 = rng.gen();
    while u > f {
        k += 1;
        p *= lambda / k as f64;
        f += p;
        if k > 10_000 {
            break; // numerically unreachable at desk-scale lambda
        }
    }
    k
}

/// Independent Bernoulli(prob) open indicators per edge.
pub fn sample_bernoulli<R: Rng + ?Sized>(g: &Graph, prob: f64, rng: &mut R) -> Vec<bool> {
    (0..g.edge_count()).map(|_| rng.gen_bool(prob)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Insert,
    Delete,
    SignFlip,
    AdjacentSwap,
}

/// Metropolis-Hastings chain targeting the model weight
/// `beta^n/n! * u^{n+} (1-u)^{n-} * theta^L`.
pub struct Mcmc<'g> {
    g: &'g Graph,
    p: Params,
    weights: [f64; 4],
    state: LinkConfig,
    loop_count: usize,
    pub proposed: [u64; 4],
    pub accepted: [u64; 4],
}

impl<'g> Mcmc<'g> {
    pub fn new(g: &'g Graph, p: Params, cfg: &SamplerConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        let state = LinkConfig::new();
        let loop_count = g.vertex_count();
        Ok(Mcmc {
            g,
            p,
            weights: cfg.move_weights,
            state,
            loop_count,
            proposed: [0; 4],
            accepted: [0; 4],
        })
    }

    pub fn state(&self) -> &LinkConfig {
        &self.state
    }

    /// Replace the current state (for tests and restarts).
    pub fn force_state(&mut self, state: LinkConfig) {
        self.loop_count = count_loops(self.g, &state);
        self.state = state;
    }

    pub fn loop_count(&self) -> usize {
        if self.p.theta == 1.0 {
            // not maintained incrementally when the weight ignores it
            count_loops(self.g, &self.state)
        } else {
            self.loop_count
        }
    }

    pub fn acceptance_rates(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            if self.proposed[i] > 0 {
                out[i] = self.accepted[i] as f64 / self.proposed[i] as f64;
            }
        }
        out
    }

    fn pick_move<R: Rng + ?Sized>(&self, rng: &mut R) -> MoveKind {
        let total: f64 = self.weights.iter().sum();
        let mut x = rng.gen::<f64>() * total;
        for (i, &w) in self.weights.iter().enumerate() {
            if x < w {
                return [
                    MoveKind::Insert,
                    MoveKind::Delete,
                    MoveKind::SignFlip,
                    MoveKind::AdjacentSwap,
                ][i];
            }
            x -= w;
        }
        MoveKind::AdjacentSwap
    }

    /// theta^(L(proposal) - L(state)); recomputed with the union-find
    /// counter. Skipped entirely when theta = 1.
    fn theta_factor(&self, proposal: &LinkConfig) -> (f64, usize) {
        if self.p.theta == 1.0 {
            return (1.0, 0);
        }
        let new_count = count_loops(self.g, proposal);
        let dl = new_count as i64 - self.loop_count as i64;
        (self.p.theta.powi(dl as i32), new_count)
    }

    fn commit(&mut self, proposal: LinkConfig, cached_count: usize) {
        if self.p.theta != 1.0 {
            self.loop_count = cached_count;
        }
        self.state = proposal;
    }

    /// One elementary Metropolis-Hastings move.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.state.len();
        let m = self.g.edge_count() as f64;
        let (w_ins, w_del) = (self.weights[0], self.weights[1]);
        let kind = self.pick_move(rng);
        match kind {
            MoveKind::Insert => {
                self.proposed[0] += 1;
                let pos = rng.gen_range(0..=n);
                let edge = rng.gen_range(0..self.g.edge_count());
                let sign = if rng.gen_bool(self.p.u) { Sign::Cross } else { Sign::Bar };
                let mut prop = self.state.clone();
                prop.insert(pos, edge, sign);
                let (tf, lc) = self.theta_factor(&prop);
                let a = (w_del / w_ins) * self.p.beta * m / (n as f64 + 1.0) * tf;
                if rng.gen::<f64>() < a {
                    self.accepted[0] += 1;
                    self.commit(prop, lc);
                }
            }
            MoveKind::Delete => {
                self.proposed[1] += 1;
                if n == 0 {
                    return;
                }
                let pos = rng.gen_range(0..n);
                let (_, sign) = self.state.link(pos);
                // a deleted cross is impossible to re-insert when u = 0
                // (likewise a bar at u = 1): the reverse proposal has
                // density zero, so the move is rejected outright
                let sign_prob = match sign {
                    Sign::Cross => self.p.u,
                    Sign::Bar => 1.0 - self.p.u,
                };
                if sign_prob == 0.0 {
                    return;
                }
                let mut prop = self.state.clone();
                prop.remove(pos);
                let (tf, lc) = self.theta_factor(&prop);
                let a = (w_ins / w_del) * n as f64 / (self.p.beta * m) * tf;
                if rng.gen::<f64>() < a {
                    self.accepted[1] += 1;
                    self.commit(prop, lc);
                }
            }
            MoveKind::SignFlip => {
                self.proposed[2] += 1;
                if n == 0 {
                    return;
                }
                let pos = rng.gen_range(0..n);
                let (_, old_sign) = self.state.link(pos);
                let (p_new, p_old) = match old_sign {
                    Sign::Cross => (1.0 - self.p.u, self.p.u),
                    Sign::Bar => (self.p.u, 1.0 - self.p.u),
                };
                if p_new == 0.0 {
                    return;
                }
                let mut prop = self.state.clone();
                prop.flip_sign(pos);
                let (tf, lc) = self.theta_factor(&prop);
                let a = (p_new / p_old) * tf;
                if rng.gen::<f64>() < a {
                    self.accepted[2] += 1;
                    self.commit(prop, lc);
                }
            }
            MoveKind::AdjacentSwap => {
                self.proposed[3] += 1;
                if n < 2 {
                    return;
                }
                let pos = rng.gen_range(0..n - 1);
                let mut prop = self.state.clone();
                prop.swap(pos, pos + 1);
                let (tf, lc) = self.theta_factor(&prop);
                if rng.gen::<f64>() < tf {
                    self.accepted[3] += 1;
                    self.commit(prop, lc);
                }
            }
        }
    }

    /// A fixed number of elementary steps scaled to the typical
    /// configuration size. The count must not depend on the current
    /// state: a state-dependent sweep length applies the step kernel a
    /// different number of times from different states, which destroys
    /// stationarity even though each step is reversible.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let m = self.g.edge_count();
        let typical = (self.p.beta * m as f64 * self.p.theta_hat()).ceil() as usize;
        let steps = m.max(typical);
        for _ in 0..steps {
            self.step(rng);
        }
    }
}
