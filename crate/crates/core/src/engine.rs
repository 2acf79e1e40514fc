//! Dynamic PageRank through maintained random walks.
//!
//! `R` walks start at every vertex with geometric lengths that are fixed for
//! the lifetime of the engine. The estimate for `v` is `ε·X_v / |W|`, where
//! `X_v` counts walk visits to `v`.
//!
//! After an arc `u→v` is inserted, every visit of a walk to `u` at a position
//! `t` is selected independently with probability `1/d_u` (`d_u` taken after
//! the insertion); the selection is drawn per position as a binomial count
//! plus uniformly chosen ranks. A walk keeps the earliest position at which it
//! was selected, is cut right after it, steps along the new arc and continues
//! as a fresh walk of its original length.
//!
//! After an arc is deleted, every walk that used it keeps its longest prefix
//! avoiding the arc and regrows the rest. With parallel copies, each traversal
//! used the removed copy with probability `1/multiplicity`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexId};
use crate::sampling::{binomial, distinct_ranks, walk_length};
use crate::walks::{StoreError, Walk, WalkId, WalkStore};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Which estimator the walk set realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    /// Untruncated walks; unbiased, aims at a `1 ± α` multiplicative error.
    Multiplicative,
    /// Walks longer than the truncation length are dropped at start-up;
    /// aims at an additive `L1` error. `None` uses the default length.
    Additive { truncate: Option<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Jump probability.
    pub eps: f64,
    /// Target accuracy.
    pub alpha: f64,
    /// Overrides the default `⌈9 ln n / (ε α²)⌉`.
    pub walks_per_vertex: Option<usize>,
    pub mode: WalkMode,
    pub seed: u64,
}

impl EngineConfig {
    pub fn new(eps: f64, alpha: f64) -> Self {
        EngineConfig {
            eps,
            alpha,
            walks_per_vertex: None,
            mode: WalkMode::Multiplicative,
            seed: 0,
        }
    }

    pub fn additive(mut self) -> Self {
        self.mode = WalkMode::Additive { truncate: None };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_walks_per_vertex(mut self, r: usize) -> Self {
        self.walks_per_vertex = Some(r);
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(EngineError::Config(format!("eps = {} not in (0, 1)", self.eps)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(EngineError::Config(format!("alpha = {} not in (0, 1)", self.alpha)));
        }
        if self.walks_per_vertex == Some(0) {
            return Err(EngineError::Config("walks per vertex must be at least 1".into()));
        }
        Ok(())
    }

    pub fn walks_per_vertex_for(&self, n: usize) -> usize {
        self.walks_per_vertex
            .unwrap_or_else(|| default_walks_per_vertex(n, self.eps, self.alpha))
    }

    /// Maximum kept walk length, if any.
    pub fn truncation(&self) -> Option<usize> {
        match self.mode {
            WalkMode::Multiplicative => None,
            WalkMode::Additive { truncate } => {
                Some(truncate.unwrap_or_else(|| additive_truncation(self.eps, self.alpha)))
            }
        }
    }
}

/// `⌈9 ln n / (ε α²)⌉`, at least 1.
pub fn default_walks_per_vertex(n: usize, eps: f64, alpha: f64) -> usize {
    ((9.0 * (n as f64).ln() / (eps * alpha * alpha)).ceil() as usize).max(1)
}

/// `⌈(2/ε) · ln(2/(αε))⌉`.
pub fn additive_truncation(eps: f64, alpha: f64) -> usize {
    (2.0 / eps * (2.0 / (alpha * eps)).ln()).ceil() as usize
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stats {
    pub walks: usize,
    pub updates: u64,
    pub total_regenerations: u64,
    pub mean_regenerations: f64,
    pub max_regenerations: u32,
    pub peak_edge_load: u32,
    pub mean_update_micros: f64,
    pub max_update_micros: f64,
}

#[derive(Debug, Clone)]
pub struct Engine {
    graph: Graph,
    store: WalkStore,
    config: EngineConfig,
    rng: ChaCha8Rng,
    // longest walk step count + 1, fixed at construction
    max_position: usize,
    regenerations: Vec<u32>,
    total_regenerations: u64,
    updates: u64,
    update_nanos: u128,
    max_update_nanos: u128,
}

impl Engine {
    /// Samples `R` walks from every vertex.
    pub fn new(graph: Graph, config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        graph.check_out_degrees()?;
        let r = config.walks_per_vertex_for(graph.n());
        let cap = config.truncation();
        let mut engine = Self::empty(graph, config);
        for v in 0..engine.graph.n() {
            for _ in 0..r {
                let steps = walk_length(engine.config.eps, &mut engine.rng);
                if cap.is_some_and(|cap| steps > cap) {
                    continue;
                }
                engine.spawn(v, steps)?;
            }
        }
        engine.finish_init();
        Ok(engine)
    }

    /// Engine over an explicit list of `(origin, steps)` walks.
    pub fn with_walks(
        graph: Graph,
        config: EngineConfig,
        walks: &[(VertexId, usize)],
    ) -> Result<Self, EngineError> {
        config.validate()?;
        graph.check_out_degrees()?;
        let mut engine = Self::empty(graph, config);
        for &(origin, steps) in walks {
            engine.graph.check_vertex(origin)?;
            engine.spawn(origin, steps)?;
        }
        engine.finish_init();
        Ok(engine)
    }

    fn empty(graph: Graph, config: EngineConfig) -> Self {
        let store = WalkStore::new(graph.n(), graph.mode());
        Engine {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            graph,
            store,
            config,
            max_position: 1,
            regenerations: Vec::new(),
            total_regenerations: 0,
            updates: 0,
            update_nanos: 0,
            max_update_nanos: 0,
        }
    }

    fn spawn(&mut self, origin: VertexId, steps: usize) -> Result<WalkId, EngineError> {
        let mut vertices = Vec::with_capacity(steps + 1);
        vertices.push(origin);
        self.extend_randomly(&mut vertices, steps);
        let id = self.store.add_walk(Walk::new(vertices))?;
        self.max_position = self.max_position.max(steps + 1);
        Ok(id)
    }

    fn finish_init(&mut self) {
        self.regenerations = vec![0; self.store.num_walks()];
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn store(&self) -> &WalkStore {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn num_walks(&self) -> usize {
        self.store.num_walks()
    }

    /// Longest walk step count plus one: the last position any walk reaches.
    pub fn max_position(&self) -> usize {
        self.max_position
    }

    pub fn walk(&self, id: WalkId) -> Option<&Walk> {
        self.store.walk(id)
    }

    pub fn regenerations(&self, id: WalkId) -> u32 {
        self.regenerations[id as usize]
    }

    /// `(walks, total regenerations)` grouped by walk step count.
    pub fn regenerations_by_length(&self) -> BTreeMap<usize, (usize, u64)> {
        let mut out: BTreeMap<usize, (usize, u64)> = BTreeMap::new();
        for (id, walk) in self.store.iter() {
            let entry = out.entry(walk.steps()).or_default();
            entry.0 += 1;
            entry.1 += u64::from(self.regenerations[id as usize]);
        }
        out
    }

    pub fn estimate(&self, v: VertexId) -> f64 {
        let walks = self.store.num_walks();
        if walks == 0 {
            return 0.0;
        }
        self.store.visits(v) as f64 * self.config.eps / walks as f64
    }

    pub fn estimate_all(&self) -> Vec<f64> {
        (0..self.graph.n()).map(|v| self.estimate(v)).collect()
    }

    pub fn stats(&self) -> Stats {
        let walks = self.store.num_walks();
        let us = |nanos: u128| nanos as f64 / 1e3;
        Stats {
            walks,
            updates: self.updates,
            total_regenerations: self.total_regenerations,
            mean_regenerations: if walks == 0 {
                0.0
            } else {
                self.total_regenerations as f64 / walks as f64
            },
            max_regenerations: self.regenerations.iter().copied().max().unwrap_or(0),
            peak_edge_load: self.store.peak_load(),
            mean_update_micros: if self.updates == 0 {
                0.0
            } else {
                us(self.update_nanos) / self.updates as f64
            },
            max_update_micros: us(self.max_update_nanos),
        }
    }

    /// Inserts one copy of `u→v` (an undirected edge in undirected mode) and
    /// repairs the walks.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), EngineError> {
        let start = Instant::now();
        self.graph.insert_edge(u, v)?;
        self.apply_insertion(u, v);
        self.record_update(start);
        Ok(())
    }

    /// Deletes one copy of `u→v` and reroutes the walks that used it.
    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), EngineError> {
        self.delete_with(u, v, DeletionRepair::KeepPrefix)
    }

    /// Deletion that regrows every affected walk from its origin. This biases
    /// the walk distribution; it exists to demonstrate that bias.
    pub fn naive_delete_for_test(&mut self, u: VertexId, v: VertexId) -> Result<(), EngineError> {
        self.delete_with(u, v, DeletionRepair::FromOrigin)
    }

    fn record_update(&mut self, start: Instant) {
        let nanos = start.elapsed().as_nanos();
        self.updates += 1;
        self.update_nanos += nanos;
        self.max_update_nanos = self.max_update_nanos.max(nanos);
    }

    fn apply_insertion(&mut self, u: VertexId, v: VertexId) {
        let both_ends = self.graph.is_undirected() && u != v;
        let du = self.graph.out_degree(u);
        let dv = self.graph.out_degree(v);
        let mut picks = Vec::new();
        for t in 1..=self.max_position {
            self.select_visits(u, t, du, v, &mut picks);
            if both_ends {
                self.select_visits(v, t, dv, u, &mut picks);
            }
        }
        let labels = earliest_labels(picks);
        self.reroute(labels);
    }

    /// Selects each walk visiting `at` in position `t` with probability `1/deg`.
    fn select_visits(
        &mut self,
        at: VertexId,
        t: usize,
        deg: u64,
        next: VertexId,
        picks: &mut Vec<(WalkId, usize, VertexId)>,
    ) {
        let size = self.store.position_count(at, t);
        if size == 0 {
            return;
        }
        let chosen = binomial(size as u64, 1.0 / deg as f64, &mut self.rng) as usize;
        for rank in distinct_ranks(size, chosen, &mut self.rng) {
            let id = self
                .store
                .select_walk_at(at, t, rank + 1)
                .expect("rank drawn within index size");
            picks.push((id, t, next));
        }
    }

    /// Rebuilds each labelled walk: positions `1..=t` kept, position `t+1`
    /// set to the label's target, remainder resampled. Walks that end at
    /// position `t` are left as they are.
    fn reroute(&mut self, labels: BTreeMap<WalkId, (usize, VertexId)>) {
        for (id, (t, next)) in labels {
            let steps = self.store.walk(id).expect("selected walk exists").steps();
            if t > steps {
                continue;
            }
            let mut tail = Vec::with_capacity(steps + 1 - t);
            tail.push(next);
            self.extend_randomly(&mut tail, steps - t);
            self.store.replace_suffix(id, t, &tail).expect("valid suffix");
            self.bump_regeneration(id);
        }
    }

    fn delete_with(
        &mut self,
        u: VertexId,
        v: VertexId,
        repair: DeletionRepair,
    ) -> Result<(), EngineError> {
        let start = Instant::now();
        let copies = self.graph.multiplicity(u, v);
        self.graph.delete_edge(u, v)?;
        let undirected = self.graph.is_undirected();
        for id in self.store.walks_on_edge(u, v) {
            let walk = self.store.walk(id).expect("indexed walk exists");
            let mut cut = None;
            for (i, (a, b)) in walk.arcs().enumerate() {
                let hit = (a == u && b == v) || (undirected && a == v && b == u);
                if hit && (copies == 1 || self.rng.random_range(0..copies) == 0) {
                    cut = Some(i);
                    break;
                }
            }
            let Some(i) = cut else { continue };
            let steps = walk.steps();
            let (keep, from) = match repair {
                DeletionRepair::KeepPrefix => (i + 1, walk.at(i + 1)),
                DeletionRepair::FromOrigin => (1, walk.origin()),
            };
            let mut tail = vec![from];
            self.extend_randomly(&mut tail, steps + 1 - keep);
            self.store.replace_suffix(id, keep, &tail[1..])?;
            self.bump_regeneration(id);
        }
        self.record_update(start);
        Ok(())
    }

    fn bump_regeneration(&mut self, id: WalkId) {
        self.regenerations[id as usize] += 1;
        self.total_regenerations += 1;
    }

    /// Appends `steps` random steps starting from the last vertex of `path`.
    fn extend_randomly(&mut self, path: &mut Vec<VertexId>, steps: usize) {
        let mut cur = *path.last().expect("path has a start vertex");
        for _ in 0..steps {
            cur = self.graph.sample_out_step(cur, &mut self.rng);
            path.push(cur);
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum DeletionRepair {
    KeepPrefix,
    FromOrigin,
}

/// Keeps, for every walk, the selection with the smallest position.
fn earliest_labels(
    picks: impl IntoIterator<Item = (WalkId, usize, VertexId)>,
) -> BTreeMap<WalkId, (usize, VertexId)> {
    let mut labels: BTreeMap<WalkId, (usize, VertexId)> = BTreeMap::new();
    for (id, t, next) in picks {
        labels
            .entry(id)
            .and_modify(|cur| {
                if t < cur.0 {
                    *cur = (t, next);
                }
            })
            .or_insert((t, next));
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphMode, SelfLoops};

    #[test]
    fn default_walk_count_formula() {
        assert_eq!(default_walks_per_vertex(100, 0.2, 0.5), 829);
        assert_eq!(default_walks_per_vertex(1, 0.2, 0.5), 1);
    }

    #[test]
    fn truncation_length_formula() {
        // (2/0.3)·ln(2/0.06) = 23.38…
        assert_eq!(additive_truncation(0.3, 0.2), 24);
        let cfg = EngineConfig::new(0.3, 0.2).additive();
        assert_eq!(cfg.truncation(), Some(24));
        assert_eq!(EngineConfig::new(0.3, 0.2).truncation(), None);
    }

    #[test]
    fn rejects_bad_config() {
        let g = Graph::new(3, GraphMode::Directed).unwrap();
        assert!(Engine::new(g.clone(), EngineConfig::new(1.0, 0.5)).is_err());
        assert!(Engine::new(g.clone(), EngineConfig::new(0.5, 0.0)).is_err());
        assert!(Engine::new(g, EngineConfig::new(0.5, 0.5).with_walks_per_vertex(0)).is_err());
        let dangling = Graph::with_self_loops(2, GraphMode::Directed, SelfLoops::Explicit).unwrap();
        assert!(matches!(
            Engine::new(dangling, EngineConfig::new(0.5, 0.5)),
            Err(EngineError::Graph(GraphError::Dangling(0)))
        ));
    }

    #[test]
    fn single_vertex_estimate_normalizes() {
        let g = Graph::new(1, GraphMode::Directed).unwrap();
        let cfg = EngineConfig::new(0.25, 0.5).with_walks_per_vertex(200_000).with_seed(4);
        let e = Engine::new(g, cfg).unwrap();
        let total: u64 = e.store().iter().map(|(_, w)| w.steps() as u64 + 1).sum();
        let exact = 0.25 * total as f64 / 200_000.0;
        assert!((e.estimate(0) - exact).abs() < 1e-12);
        assert!((e.estimate(0) - 1.0).abs() < 0.02);
    }

    #[test]
    fn insertion_away_from_walks_changes_nothing() {
        let mut g = Graph::new(4, GraphMode::Directed).unwrap();
        g.insert_edge(0, 1).unwrap();
        let mut e = Engine::with_walks(g, EngineConfig::new(0.2, 0.5), &[(0, 3), (1, 2)]).unwrap();
        let before = e.store().dump();
        e.insert_edge(3, 2).unwrap();
        assert_eq!(e.store().dump(), before);
        assert_eq!(e.stats().total_regenerations, 0);
    }

    #[test]
    fn deletion_away_from_walks_changes_nothing() {
        let mut g = Graph::new(4, GraphMode::Directed).unwrap();
        g.insert_edge(2, 3).unwrap();
        let mut e = Engine::with_walks(g, EngineConfig::new(0.2, 0.5), &[(0, 3)]).unwrap();
        let before = e.store().dump();
        e.delete_edge(2, 3).unwrap();
        assert_eq!(e.store().dump(), before);
    }

    #[test]
    fn earliest_selection_wins() {
        let labels = earliest_labels([(4, 3, 9), (4, 1, 7), (2, 5, 1), (4, 2, 8)]);
        assert_eq!(labels[&4], (1, 7));
        assert_eq!(labels[&2], (5, 1));
    }

    #[test]
    fn forced_picks_keep_only_the_earliest_prefix() {
        // 0 → 1 → 0 → 1 → 0, visiting 0 at positions 1, 3, 5
        let mut g = Graph::with_self_loops(3, GraphMode::Directed, SelfLoops::Explicit).unwrap();
        g.insert_edge(0, 1).unwrap();
        g.insert_edge(1, 0).unwrap();
        g.insert_edge(2, 2).unwrap();
        let mut e = Engine::with_walks(g, EngineConfig::new(0.2, 0.5), &[(0, 4)]).unwrap();
        assert_eq!(e.walk(0).unwrap().to_vec(), vec![0, 1, 0, 1, 0]);
        e.graph.insert_edge(0, 2).unwrap();
        e.reroute(earliest_labels([(0, 3, 2), (0, 1, 2)]));
        assert_eq!(e.walk(0).unwrap().to_vec(), vec![0, 2, 2, 2, 2]);
        assert_eq!(e.regenerations(0), 1);
        e.store().audit().unwrap();
    }

    #[test]
    fn selection_at_the_last_position_is_a_no_op() {
        let mut g = Graph::with_self_loops(2, GraphMode::Directed, SelfLoops::Explicit).unwrap();
        g.insert_edge(0, 1).unwrap();
        g.insert_edge(1, 1).unwrap();
        let mut e = Engine::with_walks(g, EngineConfig::new(0.2, 0.5), &[(0, 1)]).unwrap();
        e.reroute(earliest_labels([(0, 2, 0)]));
        assert_eq!(e.walk(0).unwrap().to_vec(), vec![0, 1]);
        assert_eq!(e.regenerations(0), 0);
    }

    #[test]
    fn single_visit_reroutes_half_the_time() {
        // 0 has out-degree 1 before the insertion, so 1/d_u = 1/2 afterwards
        let mut g = Graph::with_self_loops(3, GraphMode::Directed, SelfLoops::Explicit).unwrap();
        g.insert_edge(0, 1).unwrap();
        g.insert_edge(1, 1).unwrap();
        g.insert_edge(2, 2).unwrap();
        let trials = 100_000;
        let mut rerouted = 0;
        for seed in 0..trials {
            let cfg = EngineConfig::new(0.2, 0.5).with_seed(seed);
            let mut e = Engine::with_walks(g.clone(), cfg, &[(0, 2)]).unwrap();
            e.insert_edge(0, 2).unwrap();
            if e.walk(0).unwrap().at(2) == 2 {
                rerouted += 1;
            }
        }
        let freq = rerouted as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn lengths_and_walk_count_are_permanent() {
        let mut g = Graph::new(8, GraphMode::Undirected).unwrap();
        for i in 0..7 {
            g.insert_edge(i, i + 1).unwrap();
        }
        let cfg = EngineConfig::new(0.3, 0.5).with_walks_per_vertex(20).with_seed(2);
        let mut e = Engine::new(g, cfg).unwrap();
        let mut lengths: Vec<_> = e.store().iter().map(|(_, w)| w.steps()).collect();
        let count = e.num_walks();
        e.insert_edge(0, 5).unwrap();
        e.insert_edge(2, 2).unwrap();
        e.delete_edge(3, 4).unwrap();
        e.delete_edge(0, 5).unwrap();
        assert_eq!(e.num_walks(), count);
        let mut after: Vec<_> = e.store().iter().map(|(_, w)| w.steps()).collect();
        lengths.sort_unstable();
        after.sort_unstable();
        assert_eq!(lengths, after);
        e.store().audit().unwrap();
    }

    #[test]
    fn additive_mode_drops_long_walks() {
        let g = Graph::new(50, GraphMode::Directed).unwrap();
        let cfg = EngineConfig {
            mode: WalkMode::Additive { truncate: Some(2) },
            ..EngineConfig::new(0.2, 0.5).with_walks_per_vertex(100).with_seed(1)
        };
        let e = Engine::new(g, cfg).unwrap();
        assert!(e.store().iter().all(|(_, w)| w.steps() <= 2));
        // survival probability 1 − 0.8³ = 0.488
        let frac = e.num_walks() as f64 / 5000.0;
        assert!((frac - 0.488).abs() < 0.03, "{frac}");
    }

    #[test]
    fn runs_are_reproducible() {
        let mut g = Graph::new(10, GraphMode::Directed).unwrap();
        for i in 0..10 {
            g.insert_edge(i, (i + 3) % 10).unwrap();
        }
        let run = || {
            let cfg = EngineConfig::new(0.2, 0.5).with_walks_per_vertex(30).with_seed(99);
            let mut e = Engine::new(g.clone(), cfg).unwrap();
            e.insert_edge(1, 7).unwrap();
            e.delete_edge(4, 7).unwrap();
            e.store().dump()
        };
        assert_eq!(run(), run());
    }
}
