//! Dynamic PageRank maintenance on evolving graphs.
//!
//! [`engine::Engine`] keeps a set of random walks in step with edge insertions
//! and deletions and reads PageRank off the walk visit counts.
//! [`push::PushState`] is a deterministic forward-push baseline, [`oracle`]
//! computes exact values and [`hard`] builds adversarial update sequences.

pub mod engine;
pub mod graph;
pub mod hard;
pub mod oracle;
pub mod push;
pub mod rank_set;
pub mod sampling;
pub mod walks;

pub use engine::{Engine, EngineConfig, EngineError, Stats, WalkMode};
pub use graph::{Graph, GraphError, GraphMode, SelfLoops, VertexId};
pub use oracle::{pagerank, PageRank};
pub use push::{InsertRule, PushState};
pub use walks::{Walk, WalkId, WalkStore};
