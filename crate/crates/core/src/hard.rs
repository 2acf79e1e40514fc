//! Adversarial instance: a weighted tree fed by source vertices whose leaves
//! alternately drain into two self-loop stars.
//!
//! Vertex layout:
//! tree vertices in preorder (root is 0), then the `n/4` sources, then
//! center `c0` followed by its `s` star leaves, then `c1` and its star leaves,
//! then isolated self-loop padding up to `n`.
//!
//! The tree starts with only the arc to each node's first child. Insertions
//! arrive in preorder rounds: the round of a node with child index `k ≥ 1`
//! inserts the `p^k` parallel copies of the arc from its parent.

use std::ops::Range;

use thiserror::Error;

use crate::graph::{Graph, GraphError, GraphMode, SelfLoops, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardError {
    #[error("infeasible instance parameters: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Shape of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardParams {
    /// Base of the parallel-edge multiplier: child `i` gets `p^i` copies.
    pub p: u64,
    /// Children per internal tree vertex.
    pub t: usize,
    /// Tree depth; leaves sit at depth `d`.
    pub d: usize,
    /// Leaves per star.
    pub s: usize,
}

impl HardParams {
    pub fn tree_size(&self) -> usize {
        (0..=self.d).map(|k| self.t.pow(k as u32)).sum()
    }

    pub fn leaf_count(&self) -> usize {
        self.t.pow(self.d as u32)
    }

    /// Vertices used before padding.
    pub fn used_vertices(&self, n: usize) -> usize {
        self.tree_size() + n / 4 + 2 * (self.s + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flavor {
    Additive { alpha: f64 },
    Multiplicative { delta: f64 },
    Custom(HardParams),
}

fn infeasible(msg: String) -> HardError {
    HardError::Infeasible(msg)
}

fn check_flavor_eps(eps: f64) -> Result<(), HardError> {
    if eps > 0.01 && eps < 0.99 {
        Ok(())
    } else {
        Err(infeasible(format!("eps = {eps} outside (0.01, 0.99)")))
    }
}

/// Parameters of the additive-error construction.
///
/// `p = max(⌈1/ε⌉, 2)`, `t = ⌈½·log_p n⌉`,
/// `d = ⌈ln(101α) / (2 ln(1−ε)) − 2⌉`, `s = ⌊n/4⌋`.
pub fn additive_params(n: usize, eps: f64, alpha: f64) -> Result<HardParams, HardError> {
    check_flavor_eps(eps)?;
    if !(alpha > 0.0) {
        return Err(infeasible(format!("alpha = {alpha} must be positive")));
    }
    let p = ((1.0 / eps).ceil() as u64).max(2);
    let t = (0.5 * (n as f64).ln() / (p as f64).ln()).ceil() as usize;
    let depth = (101.0 * alpha).ln() / (2.0 * (1.0 - eps).ln()) - 2.0;
    if !(depth > 0.0) {
        return Err(infeasible(format!(
            "depth formula gives {depth:.3} for eps = {eps}, alpha = {alpha}; \
             need 101·alpha < (1−eps)^4"
        )));
    }
    let params = HardParams { p, t, d: depth.ceil() as usize, s: n / 4 };
    validate(n, eps, &params)?;
    Ok(params)
}

/// Unvalidated multiplicative-error formulas, base-2 logarithms:
/// `p = ⌈log² n⌉`, `t = ⌈(δ/2)·log n / log log n⌉`,
/// `d = ⌈log_t n^{1−2δ}⌉`, `s = ⌈n^{1−2δ}⌉`.
///
/// Works on `u64` sizes so it can be evaluated far past buildable scales.
pub fn multiplicative_formula(n: u64, delta: f64) -> HardParams {
    let lg = (n as f64).log2();
    let p = (lg * lg).ceil() as u64;
    let t = (delta / 2.0 * lg / lg.log2()).ceil().max(0.0) as usize;
    let exponent = 1.0 - 2.0 * delta;
    let d = if t >= 2 {
        (exponent * lg / (t as f64).log2()).ceil().max(0.0) as usize
    } else {
        0
    };
    let s = 2f64.powf(exponent * lg).ceil() as usize;
    HardParams { p, t, d, s }
}

/// [`multiplicative_formula`] plus feasibility checks.
pub fn multiplicative_params(n: usize, eps: f64, delta: f64) -> Result<HardParams, HardError> {
    check_flavor_eps(eps)?;
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(infeasible(format!("delta = {delta} outside (0, 0.5]")));
    }
    let params = multiplicative_formula(n as u64, delta);
    if params.t < 2 {
        return Err(infeasible(format!(
            "arity t = {} < 2 at n = {n}; use the custom flavor at this scale",
            params.t
        )));
    }
    if params.d < 1 {
        return Err(infeasible(format!(
            "depth d = {} < 1 at n = {n}; use the custom flavor at this scale",
            params.d
        )));
    }
    validate(n, eps, &params)?;
    Ok(params)
}

pub fn params_for(n: usize, eps: f64, flavor: Flavor) -> Result<HardParams, HardError> {
    match flavor {
        Flavor::Additive { alpha } => additive_params(n, eps, alpha),
        Flavor::Multiplicative { delta } => multiplicative_params(n, eps, delta),
        Flavor::Custom(params) => {
            validate(n, eps, &params)?;
            Ok(params)
        }
    }
}

/// Structural checks shared by every flavor.
pub fn validate(n: usize, eps: f64, params: &HardParams) -> Result<(), HardError> {
    let HardParams { p, t, d, s } = *params;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(infeasible(format!("eps = {eps} outside (0, 1)")));
    }
    let p_min = (1.0 / eps).max(2.0);
    if (p as f64) < p_min {
        return Err(infeasible(format!("p = {p} below max(1/eps, 2) = {p_min}")));
    }
    if t < 1 || d < 1 || s < 1 {
        return Err(infeasible(format!("need t, d, s >= 1, got t = {t}, d = {d}, s = {s}")));
    }
    let top = u32::try_from(t - 1)
        .ok()
        .and_then(|k| p.checked_pow(k))
        .filter(|&m| m <= u64::from(u32::MAX));
    if top.is_none() {
        return Err(infeasible(format!("p^(t-1) overflows an arc multiplicity (p = {p}, t = {t})")));
    }
    let tree = (0..=d as u32).try_fold(0usize, |acc, k| t.checked_pow(k).and_then(|x| acc.checked_add(x)));
    let Some(tree) = tree else {
        return Err(infeasible(format!("tree with t = {t}, d = {d} is too large")));
    };
    let used = tree + n / 4 + 2 * (s + 1);
    if used > n {
        return Err(infeasible(format!(
            "needs {used} vertices (tree {tree}, sources {}, stars {}) but n = {n}",
            n / 4,
            2 * (s + 1)
        )));
    }
    Ok(())
}

/// Path completion for one tree leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    /// 1-based leaf index `j` in preorder.
    pub leaf_index: usize,
    pub leaf: VertexId,
    /// `j mod 2`: which star the leaf feeds.
    pub parity: usize,
    /// Updates applied when the root-to-leaf path is complete.
    pub update_index: usize,
    /// Number of updates after which the leaf first becomes reachable from
    /// the sources (0 if reachable initially).
    pub reach_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Landmarks {
    pub root: VertexId,
    pub tree: Range<VertexId>,
    pub leaves: Vec<VertexId>,
    pub sources: Range<VertexId>,
    pub centers: [VertexId; 2],
    pub star_leaves: [Range<VertexId>; 2],
    pub padding: Range<VertexId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    pub eps: f64,
    pub params: HardParams,
    /// `(u, v, multiplicity)`, self-loops included.
    pub initial_edges: Vec<(VertexId, VertexId, u32)>,
    /// One entry per inserted arc copy.
    pub updates: Vec<(VertexId, VertexId)>,
    pub checkpoints: Vec<Checkpoint>,
    pub landmarks: Landmarks,
}

impl InstanceSpec {
    /// Directed graph with explicit self-loops holding the initial edges.
    pub fn initial_graph(&self) -> Result<Graph, HardError> {
        let mut g = Graph::with_self_loops(self.n, GraphMode::Directed, SelfLoops::Explicit)?;
        for &(u, v, m) in &self.initial_edges {
            g.insert_edges(u, v, m)?;
        }
        Ok(g)
    }

    /// Initial graph with the first `k` updates applied.
    pub fn graph_after(&self, k: usize) -> Result<Graph, HardError> {
        let mut g = self.initial_graph()?;
        for &(u, v) in &self.updates[..k] {
            g.insert_edge(u, v)?;
        }
        Ok(g)
    }
}

pub fn build_instance(n: usize, eps: f64, flavor: Flavor) -> Result<InstanceSpec, HardError> {
    let params = params_for(n, eps, flavor)?;
    build_with(n, eps, params)
}

/// Builds the instance for already validated parameters.
pub fn build_with(n: usize, eps: f64, params: HardParams) -> Result<InstanceSpec, HardError> {
    validate(n, eps, &params)?;
    let HardParams { p, t, d, s } = params;

    // preorder tree: (parent, child index, depth)
    let mut nodes: Vec<(Option<VertexId>, usize, usize)> = Vec::with_capacity(params.tree_size());
    let mut stack = vec![(None, 0usize, 0usize)];
    while let Some((parent, k, depth)) = stack.pop() {
        let id = nodes.len();
        nodes.push((parent, k, depth));
        if depth < d {
            for child in (0..t).rev() {
                stack.push((Some(id), child, depth + 1));
            }
        }
    }
    let tree = nodes.len();
    let sources = tree..tree + n / 4;
    let c0 = sources.end;
    let c1 = c0 + s + 1;
    let centers = [c0, c1];
    let star_leaves = [c0 + 1..c0 + 1 + s, c1 + 1..c1 + 1 + s];
    let padding = c1 + 1 + s..n;
    let leaves: Vec<VertexId> = (0..tree).filter(|&v| nodes[v].2 == d).collect();

    let copies = |k: usize| p.pow(k as u32) as u32;
    let mut initial_edges = Vec::new();
    for (v, &(parent, k, _)) in nodes.iter().enumerate() {
        if let (Some(parent), 0) = (parent, k) {
            initial_edges.push((parent, v, 1));
        }
    }
    for (j, &leaf) in leaves.iter().enumerate() {
        initial_edges.push((leaf, centers[(j + 1) % 2], 1));
    }
    for u in sources.clone() {
        initial_edges.push((u, 0, 1));
    }
    for (c, range) in centers.iter().zip(&star_leaves) {
        for leaf in range.clone() {
            initial_edges.push((*c, leaf, 1));
            initial_edges.push((leaf, leaf, 1));
        }
    }
    for v in padding.clone() {
        initial_edges.push((v, v, 1));
    }

    let mut updates = Vec::new();
    let mut reach = vec![0usize; tree];
    let mut checkpoints = Vec::new();
    for v in 1..tree {
        let (parent, k, depth) = nodes[v];
        let parent = parent.expect("non-root tree vertex has a parent");
        reach[v] = reach[parent];
        if k >= 1 {
            reach[v] = updates.len() + 1;
            updates.extend(std::iter::repeat_n((parent, v), copies(k) as usize));
        }
        if depth == d {
            let leaf_index = checkpoints.len() + 1;
            checkpoints.push(Checkpoint {
                leaf_index,
                leaf: v,
                parity: leaf_index % 2,
                update_index: updates.len(),
                reach_index: reach[v],
            });
        }
    }

    Ok(InstanceSpec {
        n,
        eps,
        params,
        initial_edges,
        updates,
        checkpoints,
        landmarks: Landmarks {
            root: 0,
            tree: 0..tree,
            leaves,
            sources,
            centers,
            star_leaves,
            padding,
        },
    })
}

/// `ε(1−ε)^{2d+2}/4`, the PageRank floor of a leaf at its checkpoint.
pub fn leaf_pagerank_floor(eps: f64, d: usize) -> f64 {
    eps * (1.0 - eps).powi(2 * d as i32 + 2) / 4.0
}

/// Mass each star received from outside: `Σ (π_x − 1/n)` over its leaves.
pub fn star_masses(spec: &InstanceSpec, pi: &[f64]) -> [f64; 2] {
    let base = 1.0 / spec.n as f64;
    let mass = |r: &Range<VertexId>| r.clone().map(|x| pi[x] - base).sum::<f64>();
    [mass(&spec.landmarks.star_leaves[0]), mass(&spec.landmarks.star_leaves[1])]
}
