//! Forward push with residuals, maintained under arc insertions.
//!
//! The state satisfies `π = p + Σ_u R_u · ppr_u`, where `ppr_u` is the
//! personalized PageRank vector of `u`. Every `ppr_u` sums to one, so
//! `‖p − π‖₁ ≤ Σ_u |R_u|`, and keeping `|R_u| ≤ γ·deg(u)` bounds the error
//! by `γ·m`.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PushError {
    #[error("jump probability {0} must lie in (0, 1)")]
    InvalidJump(f64),
    #[error("gamma must be positive, got {0}")]
    InvalidGamma(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How an insertion corrects the state before pushes resume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InsertRule {
    /// Rescales `p_u` by `d/(d−1)` so the old arcs keep their shares, then
    /// moves `p_u/(εd)` of residual off `u` and `(1−ε)p_u/(εd)` onto `v`
    /// (`d` and `p_u` after the update). Keeps the state exact.
    #[default]
    Rescale,
    /// Moves `Δ = p_u/((1−ε)d)` from `R_u` to `R_v` and leaves `p_u` alone.
    /// Does not preserve the residual identity; kept to measure the drift.
    ShiftOnly,
}

#[derive(Debug, Clone)]
pub struct PushState {
    graph: Graph,
    eps: f64,
    gamma: f64,
    rule: InsertRule,
    estimates: Vec<f64>,
    residuals: Vec<f64>,
    queued: Vec<bool>,
    queue: VecDeque<VertexId>,
    work: u64,
    pushes: u64,
}

impl PushState {
    /// Starts from `R_v = 1/n`, `p = 0` and pushes until the invariant holds.
    pub fn new(graph: Graph, eps: f64, gamma: f64) -> Result<Self, PushError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(PushError::InvalidJump(eps));
        }
        if !(gamma > 0.0) {
            return Err(PushError::InvalidGamma(gamma));
        }
        graph.check_out_degrees()?;
        let n = graph.n();
        let mut state = PushState {
            graph,
            eps,
            gamma,
            rule: InsertRule::default(),
            estimates: vec![0.0; n],
            residuals: vec![1.0 / n as f64; n],
            queued: vec![false; n],
            queue: VecDeque::new(),
            work: 0,
            pushes: 0,
        };
        for u in 0..n {
            state.enqueue_if_violating(u);
        }
        state.drain();
        Ok(state)
    }

    pub fn with_rule(mut self, rule: InsertRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Sum of `deg(u)` over every push executed so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    pub fn pushes(&self) -> u64 {
        self.pushes
    }

    pub fn estimate(&self, v: VertexId) -> f64 {
        self.estimates[v]
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn residual(&self, v: VertexId) -> f64 {
        self.residuals[v]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `Σ_u |R_u|`, an upper bound on the L1 error.
    pub fn residual_mass(&self) -> f64 {
        self.residuals.iter().map(|r| r.abs()).sum()
    }

    /// First vertex with `|R_u| > γ·deg(u)`, if any.
    pub fn invariant_violation(&self) -> Option<VertexId> {
        (0..self.graph.n()).find(|&u| self.violates(u))
    }

    /// Banks `ε·R_u` at `u` and spreads `(1−ε)·R_u` over its out-arcs.
    pub fn push(&mut self, u: VertexId) {
        let r = std::mem::take(&mut self.residuals[u]);
        let deg = self.graph.out_degree(u);
        self.estimates[u] += self.eps * r;
        let share = (1.0 - self.eps) * r / deg as f64;
        for (w, m) in self.graph.neighbors(u) {
            self.residuals[w] += share * f64::from(m);
        }
        self.work += deg;
        self.pushes += 1;
    }

    /// Inserts one copy of `u→v` (both directions in undirected mode), applies
    /// the insertion correction and pushes until the invariant holds again.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), PushError> {
        self.graph.insert_edge(u, v)?;
        self.correct(u, v);
        if self.graph.is_undirected() && u != v {
            self.correct(v, u);
        }
        self.enqueue_if_violating(u);
        self.enqueue_if_violating(v);
        self.drain();
        Ok(())
    }

    /// Pushes every vertex whose residual exceeds `tol` in absolute value
    /// until none is left. Returns the number of pushes.
    pub fn converge(&mut self, tol: f64) -> u64 {
        let before = self.pushes;
        let mut queue: VecDeque<VertexId> = (0..self.graph.n()).collect();
        let mut queued = vec![true; self.graph.n()];
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            if self.residuals[u].abs() <= tol {
                continue;
            }
            self.push(u);
            for (w, _) in self.graph.neighbors(u) {
                if !queued[w] && self.residuals[w].abs() > tol {
                    queued[w] = true;
                    queue.push_back(w);
                }
            }
        }
        self.pushes - before
    }

    fn correct(&mut self, u: VertexId, v: VertexId) {
        let d = self.graph.out_degree(u) as f64;
        let eps = self.eps;
        match self.rule {
            InsertRule::Rescale => {
                let p = self.estimates[u] * d / (d - 1.0);
                self.estimates[u] = p;
                self.residuals[u] -= p / (eps * d);
                self.residuals[v] += (1.0 - eps) * p / (eps * d);
            }
            InsertRule::ShiftOnly => {
                let delta = self.estimates[u] / ((1.0 - eps) * d);
                self.residuals[u] -= delta;
                self.residuals[v] += delta;
            }
        }
    }

    fn violates(&self, u: VertexId) -> bool {
        exceeds(&self.graph, &self.residuals, self.gamma, u)
    }

    fn enqueue_if_violating(&mut self, u: VertexId) {
        if !self.queued[u] && self.violates(u) {
            self.queued[u] = true;
            self.queue.push_back(u);
        }
    }

    fn drain(&mut self) {
        while let Some(u) = self.queue.pop_front() {
            self.queued[u] = false;
            if !self.violates(u) {
                continue;
            }
            self.push(u);
            // a self-loop may leave u itself above the threshold
            self.enqueue_if_violating(u);
            for (w, _) in self.graph.neighbors(u) {
                if !self.queued[w] && exceeds(&self.graph, &self.residuals, self.gamma, w) {
                    self.queued[w] = true;
                    self.queue.push_back(w);
                }
            }
        }
    }
}

fn exceeds(g: &Graph, residuals: &[f64], gamma: f64, u: VertexId) -> bool {
    residuals[u].abs() > gamma * g.out_degree(u) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphMode, SelfLoops};
    use crate::oracle::{l1_distance, pagerank};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> Graph {
        let mut g = Graph::new(n, GraphMode::Directed).unwrap();
        for i in 0..n {
            g.insert_edge(i, (i + 1) % n).unwrap();
        }
        g
    }

    #[test]
    fn push_arithmetic() {
        let mut g = Graph::with_self_loops(3, GraphMode::Directed, SelfLoops::Explicit).unwrap();
        g.insert_edge(0, 1).unwrap();
        g.insert_edge(0, 2).unwrap();
        g.insert_edge(1, 1).unwrap();
        g.insert_edge(2, 2).unwrap();
        let mut s = PushState::new(g, 0.2, 1.0).unwrap();
        assert_eq!(s.pushes(), 0);
        s.residuals = vec![0.3, 0.0, 0.0];
        s.push(0);
        assert!((s.estimate(0) - 0.06).abs() < 1e-15);
        assert!((s.residual(1) - 0.12).abs() < 1e-15);
        assert!((s.residual(2) - 0.12).abs() < 1e-15);
        assert_eq!(s.residual(0), 0.0);
        assert_eq!(s.work(), 2);

        s.residuals[1] = -0.1;
        s.push(1);
        // the self-loop share lands back on 1
        assert!((s.residual(1) + 0.08).abs() < 1e-15);
        assert_eq!(s.work(), 3);
    }

    #[test]
    fn push_conserves_mass() {
        let mut g = Graph::new(5, GraphMode::Directed).unwrap();
        g.insert_edges(0, 1, 3).unwrap();
        g.insert_edge(0, 4).unwrap();
        let mut s = PushState::new(g, 0.15, 10.0).unwrap();
        let before: f64 = s.residuals().iter().sum();
        let r0 = s.residual(0);
        s.push(0);
        let spread = s.residuals().iter().sum::<f64>() - (before - r0);
        assert!((s.estimate(0) + spread - r0).abs() < 1e-15);
        assert!((s.residual(1) - 0.2 - 0.85 * 0.2 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn large_gamma_means_no_init_pushes() {
        let s = PushState::new(cycle(10), 0.2, 0.1).unwrap();
        assert_eq!(s.pushes(), 0);
        assert!((s.residual_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_vertex_converges_to_one() {
        let g = Graph::new(1, GraphMode::Directed).unwrap();
        let s = PushState::new(g, 0.3, 1e-6).unwrap();
        assert!(s.residual(0).abs() <= 1e-6);
        assert!((s.estimate(0) - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn init_error_within_gamma_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = Graph::new(40, GraphMode::Directed).unwrap();
        for _ in 0..120 {
            let (u, v) = (rng.random_range(0..40), rng.random_range(0..40));
            g.insert_edge(u, v).unwrap();
        }
        let gamma = 1e-4;
        let s = PushState::new(g.clone(), 0.2, gamma).unwrap();
        assert!(s.invariant_violation().is_none());
        let pi = pagerank(&g, 0.2).unwrap();
        let err = l1_distance(s.estimates(), &pi);
        assert!(err <= s.residual_mass() + 1e-9);
        assert!(err <= gamma * g.total_out_degree() as f64);
    }

    #[test]
    fn full_convergence_matches_oracle() {
        let mut g = Graph::new(6, GraphMode::Directed).unwrap();
        for (u, v) in [(0, 1), (1, 2), (2, 0), (3, 0), (4, 4), (5, 3), (1, 5)] {
            g.insert_edge(u, v).unwrap();
        }
        let mut s = PushState::new(g, 0.25, 0.01).unwrap();
        s.insert_edge(4, 2).unwrap();
        s.insert_edge(0, 3).unwrap();
        s.converge(1e-14);
        let pi = pagerank(s.graph(), 0.25).unwrap();
        for v in 0..6 {
            assert!((s.estimate(v) - pi[v]).abs() < 1e-8, "v={v}");
        }
    }

    #[test]
    fn rescale_rule_keeps_estimates_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for mode in [GraphMode::Directed, GraphMode::Undirected] {
            let mut s = PushState::new(Graph::new(12, mode).unwrap(), 0.2, 1e-5).unwrap();
            for _ in 0..60 {
                let (u, v) = (rng.random_range(0..12), rng.random_range(0..12));
                s.insert_edge(u, v).unwrap();
                assert!(s.invariant_violation().is_none());
                let pi = pagerank(s.graph(), 0.2).unwrap();
                let err = l1_distance(s.estimates(), &pi);
                assert!(err <= s.residual_mass() + 1e-9, "{mode}: {err} > {}", s.residual_mass());
            }
        }
    }

    #[test]
    fn shift_only_rule_drifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut s = PushState::new(Graph::new(12, GraphMode::Directed).unwrap(), 0.2, 1e-5)
            .unwrap()
            .with_rule(InsertRule::ShiftOnly);
        let mut worst: f64 = 0.0;
        for _ in 0..60 {
            let (u, v) = (rng.random_range(0..12), rng.random_range(0..12));
            s.insert_edge(u, v).unwrap();
            let pi = pagerank(s.graph(), 0.2).unwrap();
            worst = worst.max(l1_distance(s.estimates(), &pi) - s.residual_mass());
        }
        assert!(worst > 1e-3, "{worst}");
    }

    #[test]
    fn fresh_vertex_insert_moves_nothing() {
        let mut s = PushState::new(cycle(20), 0.2, 1.0).unwrap();
        let before = s.residuals().to_vec();
        s.insert_edge(3, 7).unwrap();
        assert_eq!(s.residuals(), &before[..]);
    }

    #[test]
    fn estimates_stay_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = PushState::new(Graph::new(30, GraphMode::Directed).unwrap(), 0.3, 1e-4).unwrap();
        for _ in 0..200 {
            let (u, v) = (rng.random_range(0..30), rng.random_range(0..30));
            s.insert_edge(u, v).unwrap();
            assert!(s.estimates().iter().all(|&p| p >= 0.0));
        }
    }
}
