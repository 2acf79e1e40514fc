//! Storage and indices for the maintained random walks.
//!
//! Positions are 1-based: position 1 is the origin, a walk of `L` steps
//! occupies positions `1..=L+1`. Three index families are kept in sync with
//! the raw trajectories:
//!
//! * position index: for each `(v, t)`, the ids of walks whose `t`-th vertex
//!   is `v`, with rank selection;
//! * arc index: for each arc `u→v`, the walks traversing it with their
//!   traversal counts;
//! * visit counters: per-vertex number of visits, repeats included.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{GraphMode, VertexId};
use crate::rank_set::RankSet;

pub type WalkId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("walk {0} is not in the store")]
    MissingWalk(WalkId),
    #[error("rank {rank} out of range 1..={len} for vertex {vertex} at position {position}")]
    RankOutOfRange { vertex: VertexId, position: usize, rank: usize, len: usize },
    #[error("walk must contain at least its origin")]
    EmptyWalk,
    #[error("cannot keep {keep} positions of a walk with {len} vertices")]
    BadSuffix { keep: usize, len: usize },
    #[error("dump line {line}: {msg}")]
    Dump { line: usize, msg: String },
}

/// A trajectory of fixed step count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    vertices: Vec<u32>,
}

impl Walk {
    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        Walk { vertices: vertices.into_iter().map(|v| v as u32).collect() }
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn origin(&self) -> VertexId {
        self.vertices[0] as VertexId
    }

    /// Vertex at 1-based `position`.
    pub fn at(&self, position: usize) -> VertexId {
        self.vertices[position - 1] as VertexId
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().map(|&v| v as VertexId)
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.vertices().collect()
    }

    /// Arcs as `(tail, head)` in traversal order.
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices.windows(2).map(|w| (w[0] as VertexId, w[1] as VertexId))
    }
}

#[derive(Debug, Clone)]
pub struct WalkStore {
    mode: GraphMode,
    walks: Vec<Option<Walk>>,
    active: usize,
    positions: Vec<Vec<RankSet>>,
    arcs: HashMap<(u32, u32), BTreeMap<WalkId, u32>>,
    loads: HashMap<(u32, u32), u32>,
    peak_load: u32,
    visits: Vec<u64>,
    total_visits: u64,
    index_ops: u64,
}

impl WalkStore {
    pub fn new(n: usize, mode: GraphMode) -> Self {
        WalkStore {
            mode,
            walks: Vec::new(),
            active: 0,
            positions: vec![Vec::new(); n],
            arcs: HashMap::default(),
            loads: HashMap::default(),
            peak_load: 0,
            visits: vec![0; n],
            total_visits: 0,
            index_ops: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.visits.len()
    }

    pub fn num_walks(&self) -> usize {
        self.active
    }

    pub fn walk(&self, id: WalkId) -> Option<&Walk> {
        self.walks.get(id as usize).and_then(Option::as_ref)
    }

    /// Active walks in id order.
    pub fn iter(&self) -> impl Iterator<Item = (WalkId, &Walk)> + '_ {
        self.walks
            .iter()
            .enumerate()
            .filter_map(|(i, w)| w.as_ref().map(|w| (i as WalkId, w)))
    }

    pub fn visits(&self, v: VertexId) -> u64 {
        self.visits[v]
    }

    pub fn visit_counts(&self) -> &[u64] {
        &self.visits
    }

    pub fn total_visits(&self) -> u64 {
        self.total_visits
    }

    /// Rank-set operations performed so far (insert, remove, select).
    pub fn index_ops(&self) -> u64 {
        self.index_ops
    }

    pub fn position_count(&self, v: VertexId, position: usize) -> usize {
        self.positions[v].get(position - 1).map_or(0, RankSet::len)
    }

    /// Largest position with a non-empty index at `v`, or 0.
    pub fn max_position_at(&self, v: VertexId) -> usize {
        self.positions[v].len()
    }

    pub fn add_walk(&mut self, walk: Walk) -> Result<WalkId, StoreError> {
        if walk.vertices.is_empty() {
            return Err(StoreError::EmptyWalk);
        }
        let id = self.walks.len() as WalkId;
        self.index_range(id, &walk, 0);
        self.walks.push(Some(walk));
        self.active += 1;
        Ok(id)
    }

    pub fn remove_walk(&mut self, id: WalkId) -> Result<Walk, StoreError> {
        let walk = self
            .walks
            .get_mut(id as usize)
            .and_then(Option::take)
            .ok_or(StoreError::MissingWalk(id))?;
        self.unindex_range(id, &walk, 0);
        self.active -= 1;
        Ok(walk)
    }

    /// Keeps positions `1..=keep` of walk `id` and appends `tail` after them.
    /// The walk keeps its id.
    pub fn replace_suffix(
        &mut self,
        id: WalkId,
        keep: usize,
        tail: &[VertexId],
    ) -> Result<(), StoreError> {
        let mut walk = self
            .walks
            .get_mut(id as usize)
            .and_then(Option::take)
            .ok_or(StoreError::MissingWalk(id))?;
        let len = walk.vertices.len();
        if keep == 0 || keep > len {
            self.walks[id as usize] = Some(walk);
            return Err(StoreError::BadSuffix { keep, len });
        }
        self.unindex_range(id, &walk, keep);
        walk.vertices.truncate(keep);
        walk.vertices.extend(tail.iter().map(|&v| v as u32));
        self.index_range(id, &walk, keep);
        self.walks[id as usize] = Some(walk);
        Ok(())
    }

    /// The walk of 1-based `rank` among those whose `position`-th vertex is `v`.
    pub fn select_walk_at(
        &mut self,
        v: VertexId,
        position: usize,
        rank: usize,
    ) -> Result<WalkId, StoreError> {
        let len = self.position_count(v, position);
        if rank == 0 || rank > len {
            return Err(StoreError::RankOutOfRange { vertex: v, position, rank, len });
        }
        self.index_ops += 1;
        Ok(self.positions[v][position - 1].select(rank - 1).expect("rank checked"))
    }

    /// Ids of walks traversing `u→v` (either direction in undirected mode).
    pub fn walks_on_edge(&self, u: VertexId, v: VertexId) -> Vec<WalkId> {
        let mut ids: Vec<WalkId> = self
            .arcs
            .get(&(u as u32, v as u32))
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default();
        if self.mode.is_undirected() && u != v {
            if let Some(m) = self.arcs.get(&(v as u32, u as u32)) {
                ids.extend(m.keys().copied());
                ids.sort_unstable();
                ids.dedup();
            }
        }
        ids
    }

    /// Times walk `id` traverses the arc `u→v`.
    pub fn traversals(&self, id: WalkId, u: VertexId, v: VertexId) -> u32 {
        self.arcs
            .get(&(u as u32, v as u32))
            .and_then(|m| m.get(&id).copied())
            .unwrap_or(0)
    }

    /// Distinct walks on the edge `{u, v}` (or arc `u→v` in directed mode).
    pub fn edge_load(&self, u: VertexId, v: VertexId) -> u32 {
        self.loads.get(&self.load_key(u as u32, v as u32)).copied().unwrap_or(0)
    }

    /// Largest edge load ever observed.
    pub fn peak_load(&self) -> u32 {
        self.peak_load
    }

    pub fn current_max_load(&self) -> u32 {
        self.loads.values().copied().max().unwrap_or(0)
    }

    /// One line per walk: `id: v1 v2 … vL+1`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (id, walk) in self.iter() {
            let _ = write!(out, "{id}:");
            for v in walk.vertices() {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Vec<(WalkId, Walk)>, StoreError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| StoreError::Dump { line: line_no, msg: msg.to_string() };
            let (id, rest) = line.split_once(':').ok_or_else(|| err("missing `:`"))?;
            let id: WalkId = id.trim().parse().map_err(|_| err("bad walk id"))?;
            let vertices = rest
                .split_whitespace()
                .map(|t| t.parse::<VertexId>().map_err(|_| err("bad vertex id")))
                .collect::<Result<Vec<_>, _>>()?;
            if vertices.is_empty() {
                return Err(err("walk has no vertices"));
            }
            out.push((id, Walk::new(vertices)));
        }
        Ok(out)
    }

    /// Rebuilds every index from the raw trajectories and compares it with
    /// the incrementally maintained state.
    pub fn audit(&self) -> Result<(), String> {
        let mut fresh = WalkStore::new(self.n(), self.mode);
        fresh.walks = vec![None; self.walks.len()];
        for (id, walk) in self.iter() {
            fresh.index_range(id, walk, 0);
            fresh.walks[id as usize] = Some(walk.clone());
            fresh.active += 1;
        }
        if fresh.visits != self.visits || fresh.total_visits != self.total_visits {
            return Err("visit counters diverge".into());
        }
        let expected_total: u64 = self.iter().map(|(_, w)| w.vertices.len() as u64).sum();
        if expected_total != self.total_visits {
            return Err(format!("sum of visits {} != {}", self.total_visits, expected_total));
        }
        for v in 0..self.n() {
            let t_max = self.positions[v].len().max(fresh.positions[v].len());
            for t in 0..t_max {
                let a = self.positions[v].get(t).map(RankSet::to_vec).unwrap_or_default();
                let b = fresh.positions[v].get(t).map(RankSet::to_vec).unwrap_or_default();
                if a != b {
                    return Err(format!("position index ({v}, {}) diverges", t + 1));
                }
            }
        }
        let live_arcs = |s: &WalkStore| {
            let mut v: Vec<_> = s
                .arcs
                .iter()
                .filter(|(_, m)| !m.is_empty())
                .map(|(k, m)| (*k, m.clone()))
                .collect();
            v.sort_unstable_by_key(|(k, _)| *k);
            v
        };
        if live_arcs(self) != live_arcs(&fresh) {
            return Err("arc index diverges".into());
        }
        let live_loads = |s: &WalkStore| {
            let mut v: Vec<_> = s.loads.iter().filter(|(_, &c)| c > 0).map(|(k, c)| (*k, *c)).collect();
            v.sort_unstable();
            v
        };
        if live_loads(self) != live_loads(&fresh) {
            return Err("edge loads diverge".into());
        }
        if self.active != fresh.active {
            return Err("active walk count diverges".into());
        }
        Ok(())
    }

    fn load_key(&self, a: u32, b: u32) -> (u32, u32) {
        if self.mode.is_undirected() {
            (a.min(b), a.max(b))
        } else {
            (a, b)
        }
    }

    /// Indexes positions `from+1..` of `walk` and the arcs leaving them.
    fn index_range(&mut self, id: WalkId, walk: &Walk, from: usize) {
        for (i, &v) in walk.vertices.iter().enumerate().skip(from) {
            let sets = &mut self.positions[v as usize];
            if sets.len() <= i {
                sets.resize_with(i + 1, RankSet::new);
            }
            sets[i].insert(id);
            self.index_ops += 1;
            self.visits[v as usize] += 1;
            self.total_visits += 1;
        }
        let first_arc = from.saturating_sub(1);
        for w in walk.vertices[first_arc..].windows(2) {
            self.add_arc(id, w[0], w[1]);
        }
    }

    fn unindex_range(&mut self, id: WalkId, walk: &Walk, from: usize) {
        for (i, &v) in walk.vertices.iter().enumerate().skip(from) {
            let sets = &mut self.positions[v as usize];
            sets[i].remove(id);
            self.index_ops += 1;
            while sets.last().is_some_and(RankSet::is_empty) {
                sets.pop();
            }
            self.visits[v as usize] -= 1;
            self.total_visits -= 1;
        }
        let first_arc = from.saturating_sub(1);
        for w in walk.vertices[first_arc..].windows(2) {
            self.remove_arc(id, w[0], w[1]);
        }
    }

    fn add_arc(&mut self, id: WalkId, a: u32, b: u32) {
        let count = self.arcs.entry((a, b)).or_default().entry(id).or_insert(0);
        *count += 1;
        if *count > 1 {
            return;
        }
        if self.mode.is_undirected() && a != b && self.traversals(id, b as usize, a as usize) > 0 {
            return;
        }
        let key = self.load_key(a, b);
        let load = self.loads.entry(key).or_insert(0);
        *load += 1;
        self.peak_load = self.peak_load.max(*load);
    }

    fn remove_arc(&mut self, id: WalkId, a: u32, b: u32) {
        let map = self.arcs.get_mut(&(a, b)).expect("arc index out of sync");
        let count = map.get_mut(&id).expect("arc index out of sync");
        *count -= 1;
        if *count > 0 {
            return;
        }
        map.remove(&id);
        if map.is_empty() {
            self.arcs.remove(&(a, b));
        }
        if self.mode.is_undirected() && a != b && self.traversals(id, b as usize, a as usize) > 0 {
            return;
        }
        let key = self.load_key(a, b);
        let load = self.loads.get_mut(&key).expect("load counter out of sync");
        *load -= 1;
        if *load == 0 {
            self.loads.remove(&key);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(mode: GraphMode) -> WalkStore {
        WalkStore::new(6, mode)
    }

    #[test]
    fn zero_step_walk() {
        let mut s = store(GraphMode::Directed);
        let id = s.add_walk(Walk::new([3])).unwrap();
        assert_eq!(s.visits(3), 1);
        assert_eq!(s.position_count(3, 1), 1);
        assert_eq!(s.select_walk_at(3, 1, 1).unwrap(), id);
        assert!(s.arcs.is_empty());
        assert_eq!(s.add_walk(Walk::new([])), Err(StoreError::EmptyWalk));
    }

    #[test]
    fn back_and_forth_walk() {
        let mut s = store(GraphMode::Directed);
        let id = s.add_walk(Walk::new([0, 1, 0])).unwrap();
        assert_eq!(s.walks_on_edge(0, 1), vec![id]);
        assert_eq!(s.walks_on_edge(1, 0), vec![id]);
        assert_eq!(s.traversals(id, 0, 1), 1);
        assert_eq!(s.visits(0), 2);
        assert_eq!(s.visits(1), 1);
    }

    #[test]
    fn remove_and_readd_restores_sizes() {
        let mut s = store(GraphMode::Directed);
        s.add_walk(Walk::new([0, 1, 2])).unwrap();
        let id = s.add_walk(Walk::new([1, 2, 2, 3])).unwrap();
        let before: Vec<_> = (0..6).map(|v| s.visits(v)).collect();
        let loads = (s.edge_load(1, 2), s.edge_load(2, 2));
        let walk = s.remove_walk(id).unwrap();
        assert_eq!(s.num_walks(), 1);
        assert_eq!(s.edge_load(2, 2), 0);
        s.add_walk(walk).unwrap();
        assert_eq!((0..6).map(|v| s.visits(v)).collect::<Vec<_>>(), before);
        assert_eq!((s.edge_load(1, 2), s.edge_load(2, 2)), loads);
        assert_eq!(s.remove_walk(id), Err(StoreError::MissingWalk(id)));
        s.audit().unwrap();
    }

    #[test]
    fn select_follows_id_order() {
        let mut s = store(GraphMode::Directed);
        for _ in 0..10 {
            s.add_walk(Walk::new([5])).unwrap();
        }
        for id in [0, 1, 2, 4, 5, 6, 8] {
            s.remove_walk(id).unwrap();
        }
        // remaining ids at (5, 1): {3, 7, 9}
        assert_eq!(s.select_walk_at(5, 1, 2).unwrap(), 7);
        s.remove_walk(7).unwrap();
        assert_eq!(s.select_walk_at(5, 1, 2).unwrap(), 9);
        assert!(matches!(
            s.select_walk_at(5, 1, 3),
            Err(StoreError::RankOutOfRange { len: 2, .. })
        ));
    }

    #[test]
    fn edge_query_uses_set_semantics() {
        let mut s = store(GraphMode::Directed);
        assert!(s.walks_on_edge(0, 1).is_empty());
        let id = s.add_walk(Walk::new([0, 1, 0, 1])).unwrap();
        assert_eq!(s.walks_on_edge(0, 1), vec![id]);
        assert_eq!(s.traversals(id, 0, 1), 2);
        assert_eq!(s.edge_load(0, 1), 1);
    }

    #[test]
    fn undirected_edges_union_both_directions() {
        let mut s = store(GraphMode::Undirected);
        let a = s.add_walk(Walk::new([0, 1])).unwrap();
        let b = s.add_walk(Walk::new([1, 0, 1])).unwrap();
        assert_eq!(s.walks_on_edge(0, 1), vec![a, b]);
        assert_eq!(s.walks_on_edge(1, 0), vec![a, b]);
        assert_eq!(s.edge_load(1, 0), 2);
        assert_eq!(s.peak_load(), 2);
        s.remove_walk(b).unwrap();
        assert_eq!(s.edge_load(0, 1), 1);
        assert_eq!(s.peak_load(), 2);
    }

    #[test]
    fn suffix_replacement_keeps_id_and_prefix() {
        let mut s = store(GraphMode::Directed);
        let id = s.add_walk(Walk::new([0, 1, 2, 3])).unwrap();
        s.replace_suffix(id, 2, &[4, 5]).unwrap();
        assert_eq!(s.walk(id).unwrap().to_vec(), vec![0, 1, 4, 5]);
        assert!(s.walks_on_edge(1, 2).is_empty());
        assert_eq!(s.walks_on_edge(1, 4), vec![id]);
        assert_eq!(s.position_count(2, 3), 0);
        assert_eq!(s.position_count(4, 3), 1);
        s.audit().unwrap();
        assert_eq!(
            s.replace_suffix(id, 9, &[]),
            Err(StoreError::BadSuffix { keep: 9, len: 4 })
        );
        assert!(s.walk(id).is_some());
    }

    #[test]
    fn dump_round_trip() {
        let mut s = store(GraphMode::Directed);
        s.add_walk(Walk::new([0, 1, 2])).unwrap();
        s.add_walk(Walk::new([4])).unwrap();
        let text = s.dump();
        assert_eq!(text, "0: 0 1 2\n1: 4\n");
        let parsed = WalkStore::parse_dump(&text).unwrap();
        assert_eq!(parsed[0], (0, Walk::new([0, 1, 2])));
        assert!(WalkStore::parse_dump("x: 1").is_err());
    }
}
