//! Replays an update stream against one engine and checkpoints it against
//! the exact oracle.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use dynpr::engine::EngineError;
use dynpr::oracle::{l1_distance, max_relative_deviation, pagerank, OracleError};
use dynpr::push::PushError;
use dynpr::{Engine, EngineConfig, Graph, GraphError, PushState, WalkMode};
use thiserror::Error;

use crate::report::{Report, Row};
use crate::stream::{Record, UpdateStream};

/// Largest graph the checkpoint oracle will solve.
pub const ORACLE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    WalksMult,
    WalksAdd,
    ForwardPush,
    OracleOnly,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::WalksMult => "walks-mult",
            EngineKind::WalksAdd => "walks-add",
            EngineKind::ForwardPush => "forwardpush",
            EngineKind::OracleOnly => "oracle-only",
        })
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "walks-mult" => Ok(EngineKind::WalksMult),
            "walks-add" => Ok(EngineKind::WalksAdd),
            "forwardpush" => Ok(EngineKind::ForwardPush),
            "oracle-only" => Ok(EngineKind::OracleOnly),
            other => Err(format!(
                "unknown engine `{other}` (walks-mult, walks-add, forwardpush, oracle-only)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub engine: EngineKind,
    pub alpha: f64,
    pub seed: u64,
    /// Regrow affected walks from their origin on deletion (biased).
    pub naive_delete: bool,
    pub walks_per_vertex: Option<usize>,
    pub truncate: Option<usize>,
    /// Push threshold; defaults to `α / m` with `m` the largest edge count
    /// the stream can reach.
    pub gamma: Option<f64>,
    /// Record wall time; off gives byte-identical reports across runs.
    pub timing: bool,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams {
            engine: EngineKind::WalksMult,
            alpha: 0.5,
            seed: 0,
            naive_delete: false,
            walks_per_vertex: None,
            truncate: None,
            gamma: None,
            timing: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Unsupported(String),
    #[error("initial graph has n = {graph} ({graph_mode}) but the stream declares n = {stream} ({stream_mode})")]
    InitialMismatch { graph: usize, graph_mode: String, stream: usize, stream_mode: String },
    #[error("oracle checkpoints are limited to n <= {ORACLE_LIMIT}, stream has n = {0}")]
    OracleTooLarge(usize),
    #[error("update {index} ({record}): {source}")]
    Update {
        index: usize,
        record: String,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Push(#[from] PushError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

enum Backend {
    Walks(Engine),
    Push(PushState),
    Exact(Graph),
}

impl Backend {
    fn graph(&self) -> &Graph {
        match self {
            Backend::Walks(e) => e.graph(),
            Backend::Push(p) => p.graph(),
            Backend::Exact(g) => g,
        }
    }

    fn apply(&mut self, record: &Record, naive: bool) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
        match (self, record) {
            (Backend::Walks(e), Record::Insert(u, v)) => e.insert_edge(*u, *v)?,
            (Backend::Walks(e), Record::Delete(u, v)) if naive => e.naive_delete_for_test(*u, *v)?,
            (Backend::Walks(e), Record::Delete(u, v)) => e.delete_edge(*u, *v)?,
            (Backend::Push(p), Record::Insert(u, v)) => p.insert_edge(*u, *v)?,
            (Backend::Push(_), Record::Delete(..)) => {
                return Err("forward push does not support deletions".into());
            }
            (Backend::Exact(g), Record::Insert(u, v)) => {
                g.insert_edge(*u, *v)?;
            }
            (Backend::Exact(g), Record::Delete(u, v)) => {
                g.delete_edge(*u, *v)?;
            }
            (_, Record::Checkpoint(_)) => {}
        }
        Ok(())
    }

    /// `(regenerations, max edge load, push work)`.
    fn counters(&self) -> (u64, u32, u64) {
        match self {
            Backend::Walks(e) => {
                let s = e.stats();
                (s.total_regenerations, s.peak_edge_load, 0)
            }
            Backend::Push(p) => (0, 0, p.work()),
            Backend::Exact(_) => (0, 0, 0),
        }
    }
}

/// Runs one seeded replay and returns one report row per checkpoint record.
pub fn run_stream(
    stream: &UpdateStream,
    initial: Option<&Graph>,
    params: &RunParams,
) -> Result<Report, RunError> {
    let graph = match initial {
        Some(g) => {
            if g.n() != stream.n || g.mode() != stream.mode {
                return Err(RunError::InitialMismatch {
                    graph: g.n(),
                    graph_mode: g.mode().to_string(),
                    stream: stream.n,
                    stream_mode: stream.mode.to_string(),
                });
            }
            g.clone()
        }
        None => Graph::new(stream.n, stream.mode)?,
    };
    let has_checkpoints = stream.records.iter().any(|r| matches!(r, Record::Checkpoint(_)));
    if has_checkpoints && stream.n > ORACLE_LIMIT {
        return Err(RunError::OracleTooLarge(stream.n));
    }
    let walks = matches!(params.engine, EngineKind::WalksMult | EngineKind::WalksAdd);
    if params.naive_delete && !walks {
        return Err(RunError::Unsupported("--naive-delete applies only to walk engines".into()));
    }
    if params.engine == EngineKind::ForwardPush && stream.has_deletions() {
        return Err(RunError::Unsupported("forward push does not support deletions".into()));
    }

    let mut backend = match params.engine {
        EngineKind::WalksMult | EngineKind::WalksAdd => {
            let mode = if params.engine == EngineKind::WalksAdd {
                WalkMode::Additive { truncate: params.truncate }
            } else {
                WalkMode::Multiplicative
            };
            let config = EngineConfig {
                eps: stream.eps,
                alpha: params.alpha,
                walks_per_vertex: params.walks_per_vertex,
                mode,
                seed: params.seed,
            };
            Backend::Walks(Engine::new(graph, config)?)
        }
        EngineKind::ForwardPush => {
            let gamma = params.gamma.unwrap_or_else(|| {
                let m = graph.total_out_degree() as f64 + stream.insertions() as f64 * arc_copies(stream);
                params.alpha / m
            });
            Backend::Push(PushState::new(graph, stream.eps, gamma)?)
        }
        EngineKind::OracleOnly => Backend::Exact(graph),
    };

    let mut rows = Vec::new();
    let mut updates = 0;
    let mut busy = Duration::ZERO;
    for record in &stream.records {
        if let Record::Checkpoint(label) = record {
            rows.push(checkpoint_row(&backend, label, updates, stream.eps, busy, params.timing)?);
            continue;
        }
        let start = Instant::now();
        backend
            .apply(record, params.naive_delete)
            .map_err(|source| RunError::Update { index: updates + 1, record: record.to_string(), source })?;
        busy += start.elapsed();
        updates += 1;
    }
    Ok(Report { rows })
}

/// Runs `trials` replays with seeds `seed, seed + 1, …`, one after another.
pub fn run_trials(
    stream: &UpdateStream,
    initial: Option<&Graph>,
    params: &RunParams,
    trials: usize,
) -> Result<Vec<Report>, RunError> {
    (0..trials as u64)
        .map(|k| {
            let p = RunParams { seed: params.seed.wrapping_add(k), ..params.clone() };
            run_stream(stream, initial, &p)
        })
        .collect()
}

fn arc_copies(stream: &UpdateStream) -> f64 {
    if stream.mode.is_undirected() {
        2.0
    } else {
        1.0
    }
}

fn checkpoint_row(
    backend: &Backend,
    label: &str,
    updates: usize,
    eps: f64,
    busy: Duration,
    timing: bool,
) -> Result<Row, RunError> {
    let exact = pagerank(backend.graph(), eps)?;
    let estimate = match backend {
        Backend::Walks(e) => e.estimate_all(),
        Backend::Push(p) => p.estimates().to_vec(),
        Backend::Exact(_) => exact.to_vec(),
    };
    let (max_rel_dev, worst_vertex) = max_relative_deviation(&estimate, &exact);
    let (regenerations, max_edge_load, push_work) = backend.counters();
    Ok(Row {
        label: label.to_string(),
        updates,
        l1_error: l1_distance(&estimate, &exact),
        max_rel_dev,
        worst_vertex,
        regenerations,
        max_edge_load,
        push_work,
        elapsed_ms: if timing { busy.as_secs_f64() * 1e3 } else { 0.0 },
    })
}
