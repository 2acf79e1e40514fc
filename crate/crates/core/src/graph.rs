//! Dynamic multigraph shared by every engine.
//!
//! Parallel edges are stored as `(neighbor, multiplicity)` pairs. Every vertex
//! must have out-degree at least one before a walk or an oracle touches it; the
//! default [`SelfLoops::Protected`] policy guarantees this by inserting one
//! undeletable self-loop per vertex at construction.

use rustc_hash::FxHashMap as HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Vertex index in `[0, n)`.
pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    InvalidSize,
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    InvalidVertex { vertex: usize, n: usize },
    #[error("edge ({u}, {v}) is not present")]
    MissingEdge { u: usize, v: usize },
    #[error("deleting ({u}, {v}) would remove the last outgoing edge of {vertex}")]
    ForbiddenDeletion { u: usize, v: usize, vertex: usize },
    #[error("vertex {0} has no outgoing edges")]
    Dangling(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphMode {
    Directed,
    Undirected,
}

impl GraphMode {
    pub fn is_undirected(self) -> bool {
        matches!(self, GraphMode::Undirected)
    }
}

impl fmt::Display for GraphMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphMode::Directed => "directed",
            GraphMode::Undirected => "undirected",
        })
    }
}

impl FromStr for GraphMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "directed" => Ok(GraphMode::Directed),
            "undirected" => Ok(GraphMode::Undirected),
            other => Err(format!("unknown graph mode `{other}`")),
        }
    }
}

/// How the out-degree ≥ 1 requirement is met.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SelfLoops {
    /// One immutable self-loop per vertex, inserted at construction.
    Protected,
    /// No automatic self-loops. The caller supplies edges; any deletion that
    /// would leave a vertex without outgoing edges is rejected.
    Explicit,
}

impl fmt::Display for SelfLoops {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelfLoops::Protected => "protected",
            SelfLoops::Explicit => "explicit",
        })
    }
}

impl FromStr for SelfLoops {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "protected" => Ok(SelfLoops::Protected),
            "explicit" => Ok(SelfLoops::Explicit),
            other => Err(format!("unknown self-loop policy `{other}`")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    mode: GraphMode,
    self_loops: SelfLoops,
    adjacency: Vec<Vec<(u32, u32)>>,
    // (u, v) -> index into adjacency[u]
    slots: HashMap<(u32, u32), u32>,
    out_degree: Vec<u64>,
    total_out_degree: u64,
}

impl Graph {
    /// Graph with one protected self-loop per vertex.
    pub fn new(n: usize, mode: GraphMode) -> Result<Self, GraphError> {
        Self::with_self_loops(n, mode, SelfLoops::Protected)
    }

    pub fn with_self_loops(
        n: usize,
        mode: GraphMode,
        self_loops: SelfLoops,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::InvalidSize);
        }
        assert!(n <= u32::MAX as usize, "vertex count exceeds u32 range");
        let mut g = Graph {
            mode,
            self_loops,
            adjacency: vec![Vec::new(); n],
            slots: HashMap::default(),
            out_degree: vec![0; n],
            total_out_degree: 0,
        };
        if self_loops == SelfLoops::Protected {
            for v in 0..n {
                g.bump(v, v);
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn self_loop_policy(&self) -> SelfLoops {
        self.self_loops
    }

    pub fn is_undirected(&self) -> bool {
        self.mode.is_undirected()
    }

    pub fn out_degree(&self, u: VertexId) -> u64 {
        self.out_degree[u]
    }

    /// Sum of out-degrees, i.e. the number of arcs counted with multiplicity.
    pub fn total_out_degree(&self) -> u64 {
        self.total_out_degree
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        self.slots
            .get(&(u as u32, v as u32))
            .map_or(0, |&i| self.adjacency[u][i as usize].1)
    }

    /// Out-neighbors of `u` with multiplicities.
    pub fn neighbors(&self, u: VertexId) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.adjacency[u].iter().map(|&(w, m)| (w as VertexId, m))
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), GraphError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex { vertex: v, n: self.n() })
        }
    }

    /// Fails with the first vertex whose out-degree is zero.
    pub fn check_out_degrees(&self) -> Result<(), GraphError> {
        match self.out_degree.iter().position(|&d| d == 0) {
            Some(v) => Err(GraphError::Dangling(v)),
            None => Ok(()),
        }
    }

    /// Inserts one copy of `(u, v)` (both orientations in undirected mode) and
    /// returns the new multiplicity.
    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<u32, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let m = self.bump(u, v);
        if self.is_undirected() && u != v {
            self.bump(v, u);
        }
        Ok(m)
    }

    pub fn insert_edges(
        &mut self,
        u: VertexId,
        v: VertexId,
        copies: u32,
    ) -> Result<u32, GraphError> {
        let mut m = self.multiplicity(u, v);
        for _ in 0..copies {
            m = self.insert_edge(u, v)?;
        }
        Ok(m)
    }

    /// Removes one copy of `(u, v)` and returns the remaining multiplicity.
    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<u32, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let m = self.multiplicity(u, v);
        if m == 0 {
            return Err(GraphError::MissingEdge { u, v });
        }
        if u == v && self.self_loops == SelfLoops::Protected && m == 1 {
            return Err(GraphError::ForbiddenDeletion { u, v, vertex: u });
        }
        if self.out_degree[u] == 1 {
            return Err(GraphError::ForbiddenDeletion { u, v, vertex: u });
        }
        if self.is_undirected() && u != v && self.out_degree[v] == 1 {
            return Err(GraphError::ForbiddenDeletion { u, v, vertex: v });
        }
        let left = self.drop_one(u, v);
        if self.is_undirected() && u != v {
            self.drop_one(v, u);
        }
        Ok(left)
    }

    /// Draws an out-neighbor of `u` with probability multiplicity / out-degree.
    pub fn sample_out_step<R: Rng + ?Sized>(&self, u: VertexId, rng: &mut R) -> VertexId {
        let deg = self.out_degree[u];
        debug_assert!(deg > 0, "sampling a step from dangling vertex {u}");
        let mut target = rng.random_range(0..deg);
        for &(w, m) in &self.adjacency[u] {
            let m = u64::from(m);
            if target < m {
                return w as VertexId;
            }
            target -= m;
        }
        unreachable!("out-degree counter out of sync at {u}")
    }

    /// Distinct arcs `(u, v, multiplicity)`; in undirected mode each edge is
    /// listed once with `u <= v`. Protected self-loops are not listed.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, u32)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            for &(w, m) in list {
                let w = w as usize;
                if self.is_undirected() && w < u {
                    continue;
                }
                let m = if u == w && self.self_loops == SelfLoops::Protected {
                    m - 1
                } else {
                    m
                };
                if m > 0 {
                    out.push((u, w, m));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Reverse adjacency (in-neighbors), built on demand.
    pub fn in_neighbors(&self) -> Vec<Vec<VertexId>> {
        let mut rev = vec![Vec::new(); self.n()];
        for (u, list) in self.adjacency.iter().enumerate() {
            for &(w, _) in list {
                rev[w as usize].push(u);
            }
        }
        rev
    }

    fn bump(&mut self, u: VertexId, v: VertexId) -> u32 {
        let key = (u as u32, v as u32);
        let m = match self.slots.get(&key) {
            Some(&i) => {
                let slot = &mut self.adjacency[u][i as usize];
                slot.1 += 1;
                slot.1
            }
            None => {
                self.slots.insert(key, self.adjacency[u].len() as u32);
                self.adjacency[u].push((v as u32, 1));
                1
            }
        };
        self.out_degree[u] += 1;
        self.total_out_degree += 1;
        m
    }

    fn drop_one(&mut self, u: VertexId, v: VertexId) -> u32 {
        let key = (u as u32, v as u32);
        let i = self.slots[&key] as usize;
        let list = &mut self.adjacency[u];
        list[i].1 -= 1;
        let left = list[i].1;
        if left == 0 {
            list.swap_remove(i);
            self.slots.remove(&key);
            if let Some(&(moved, _)) = list.get(i) {
                self.slots.insert((u as u32, moved), i as u32);
            }
        }
        self.out_degree[u] -= 1;
        self.total_out_degree -= 1;
        left
    }
}

/// Plain-text edge lists.
///
/// ```text
/// n 5 mode undirected [selfloops explicit]
/// # comment
/// 0 1
/// 1 2 3
/// ```
///
/// Each line is `u v [mult]`. Under the protected policy the automatic
/// self-loops are implicit and never written.
pub mod edge_list {
    use super::*;

    #[derive(Debug, Error, PartialEq, Eq)]
    pub enum ParseError {
        #[error("line {line}: {msg}")]
        Syntax { line: usize, msg: String },
        #[error("line {line}: {source}")]
        Graph {
            line: usize,
            #[source]
            source: GraphError,
        },
        #[error("missing header line `n <count> mode <directed|undirected>`")]
        MissingHeader,
    }

    fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line, msg: msg.into() }
    }

    pub(crate) fn parse_header(
        tokens: &[&str],
        line: usize,
    ) -> Result<(usize, GraphMode, SelfLoops), ParseError> {
        let mut n = None;
        let mut mode = None;
        let mut loops = SelfLoops::Protected;
        let mut it = tokens.iter();
        while let Some(&key) = it.next() {
            let val = it
                .next()
                .ok_or_else(|| syntax(line, format!("header key `{key}` has no value")))?;
            match key {
                "n" => n = Some(val.parse().map_err(|_| syntax(line, format!("bad n `{val}`")))?),
                "mode" => mode = Some(val.parse().map_err(|e: String| syntax(line, e))?),
                "selfloops" => loops = val.parse().map_err(|e: String| syntax(line, e))?,
                other => return Err(syntax(line, format!("unknown header key `{other}`"))),
            }
        }
        match (n, mode) {
            (Some(n), Some(mode)) => Ok((n, mode, loops)),
            _ => Err(syntax(line, "header needs `n <count> mode <directed|undirected>`")),
        }
    }

    pub fn parse(text: &str) -> Result<Graph, ParseError> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some(g) = graph.as_mut() else {
                if tokens[0] != "n" {
                    return Err(ParseError::MissingHeader);
                }
                let (n, mode, loops) = parse_header(&tokens, line)?;
                graph = Some(
                    Graph::with_self_loops(n, mode, loops)
                        .map_err(|source| ParseError::Graph { line, source })?,
                );
                continue;
            };
            if !(2..=3).contains(&tokens.len()) {
                return Err(syntax(line, "expected `u v [mult]`"));
            }
            let num = |s: &str| -> Result<usize, ParseError> {
                s.parse().map_err(|_| syntax(line, format!("bad integer `{s}`")))
            };
            let u = num(tokens[0])?;
            let v = num(tokens[1])?;
            let mult = match tokens.get(2) {
                Some(s) => num(s)? as u32,
                None => 1,
            };
            g.insert_edges(u, v, mult)
                .map_err(|source| ParseError::Graph { line, source })?;
        }
        graph.ok_or(ParseError::MissingHeader)
    }

    pub fn write(g: &Graph) -> String {
        let mut out = format!("n {} mode {}", g.n(), g.mode());
        if g.self_loop_policy() == SelfLoops::Explicit {
            out.push_str(" selfloops explicit");
        }
        out.push('\n');
        for (u, v, m) in g.edges() {
            if m == 1 {
                out.push_str(&format!("{u} {v}\n"));
            } else {
                out.push_str(&format!("{u} {v} {m}\n"));
            }
        }
        out
    }
}
