//! Exact reference computations used to check the approximate engines.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Deref;

use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexId};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Largest trajectory space `enumerate_walk_distribution` will expand.
pub const MAX_ENUMERATED_STATES: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("jump probability {0} must lie in (0, 1)")]
    InvalidJump(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("power iteration did not reach {tol:e} within {iters} iterations")]
    NoConvergence { iters: usize, tol: f64 },
    #[error("trajectory space {states:e} exceeds the enumeration limit")]
    TooLarge { states: f64 },
    #[error("vectors have different lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Stationary distribution of the jump-augmented walk.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRank(Vec<f64>);

impl PageRank {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PageRank {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// One application of the transition operator: `x ↦ (1−ε)·xP + ε/n`.
///
/// `P` weights each arc by multiplicity / out-degree, so the dense matrix is
/// never formed.
pub fn apply_transition(g: &Graph, eps: f64, x: &[f64], out: &mut [f64]) {
    let n = g.n();
    let base = eps * x.iter().sum::<f64>() / n as f64;
    out.iter_mut().for_each(|o| *o = base);
    for (u, &xu) in x.iter().enumerate() {
        if xu == 0.0 {
            continue;
        }
        let share = (1.0 - eps) * xu / g.out_degree(u) as f64;
        for (w, m) in g.neighbors(u) {
            out[w] += share * f64::from(m);
        }
    }
}

/// Power iteration from the uniform vector.
///
/// Stops once `(1−ε)/ε · ‖x_{k+1} − x_k‖₁ ≤ tol`, which bounds the distance
/// of the returned iterate to the true stationary vector by `tol`.
pub fn power_iteration(
    g: &Graph,
    eps: f64,
    tol: f64,
    max_iters: usize,
) -> Result<PageRank, OracleError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(OracleError::InvalidJump(eps));
    }
    if !(tol > 0.0) {
        return Err(OracleError::InvalidTolerance(tol));
    }
    g.check_out_degrees()?;
    let n = g.n();
    let mut x = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let scale = (1.0 - eps) / eps;
    for _ in 0..max_iters {
        apply_transition(g, eps, &x, &mut next);
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff * scale <= tol {
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= total);
            return Ok(PageRank(x));
        }
    }
    Err(OracleError::NoConvergence { iters: max_iters, tol })
}

/// Power iteration at the default tolerance with a generous iteration cap.
pub fn pagerank(g: &Graph, eps: f64) -> Result<PageRank, OracleError> {
    let max_iters = ((200.0 / eps).ceil() as usize).max(1000);
    power_iteration(g, eps, DEFAULT_TOLERANCE, max_iters)
}

/// Exact law of the length-`len` trajectory from `start` (no jumps).
pub fn enumerate_walk_distribution(
    g: &Graph,
    start: VertexId,
    len: usize,
) -> Result<BTreeMap<Vec<VertexId>, f64>, OracleError> {
    g.check_vertex(start)?;
    let states = (g.n() as f64).powi(len as i32 + 1);
    if states > MAX_ENUMERATED_STATES {
        return Err(OracleError::TooLarge { states });
    }
    let mut frontier: Vec<(Vec<VertexId>, f64)> = vec![(vec![start], 1.0)];
    for _ in 0..len {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for (path, p) in frontier {
            let last = *path.last().unwrap();
            let deg = g.out_degree(last);
            if deg == 0 {
                return Err(GraphError::Dangling(last).into());
            }
            for (w, m) in g.neighbors(last) {
                let mut extended = path.clone();
                extended.push(w);
                next.push((extended, p * f64::from(m) / deg as f64));
            }
        }
        frontier = next;
    }
    Ok(frontier.into_iter().collect())
}

/// Number of coordinates where the two vectors differ by at least `threshold`.
pub fn count_changed_coordinates(a: &[f64], b: &[f64], threshold: f64) -> Result<usize, OracleError> {
    if a.len() != b.len() {
        return Err(OracleError::DimensionMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| (*x - *y).abs() >= threshold).count())
}

/// Every vertex with a directed path to `v`, `v` included.
pub fn reachable_ancestors(g: &Graph, v: VertexId) -> BTreeSet<VertexId> {
    let rev = g.in_neighbors();
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::from([v]);
    seen[v] = true;
    while let Some(x) = queue.pop_front() {
        for &u in &rev[x] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen.iter().enumerate().filter(|(_, s)| **s).map(|(i, _)| i).collect()
}

/// Vertices reachable from any of `sources` along out-arcs.
pub fn reachable_from(g: &Graph, sources: impl IntoIterator<Item = VertexId>) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        for (w, _) in g.neighbors(x) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Total-variation distance between observed trajectory counts and an exact
/// trajectory law. Trajectories missing from `exact` count as probability 0.
pub fn total_variation(counts: &BTreeMap<Vec<VertexId>, u64>, exact: &BTreeMap<Vec<VertexId>, f64>) -> f64 {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return 1.0;
    }
    let observed = |path: &Vec<VertexId>| counts.get(path).map_or(0.0, |&c| c as f64 / total as f64);
    let on_support: f64 = exact.iter().map(|(path, &p)| (observed(path) - p).abs()).sum();
    let off_support: f64 = counts
        .iter()
        .filter(|(path, _)| !exact.contains_key(*path))
        .map(|(_, &c)| c as f64 / total as f64)
        .sum();
    (on_support + off_support) / 2.0
}

/// Largest `|estimate_v / exact_v − 1|` and the vertex attaining it.
pub fn max_relative_deviation(estimate: &[f64], exact: &[f64]) -> (f64, VertexId) {
    estimate
        .iter()
        .zip(exact)
        .enumerate()
        .map(|(v, (e, x))| ((e / x - 1.0).abs(), v))
        .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
}
