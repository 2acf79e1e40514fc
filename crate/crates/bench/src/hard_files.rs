//! File forms of a generated hard instance.

use dynpr::graph::edge_list;
use dynpr::hard::{HardError, InstanceSpec};
use dynpr::GraphMode;

use crate::stream::UpdateStream;

/// Checkpoint manifest columns.
pub const MANIFEST_COLUMNS: [&str; 8] =
    ["update_index", "reach_index", "leaf_index", "leaf_id", "parity", "root", "c0", "c1"];

pub fn checkpoint_label(leaf_index: usize) -> String {
    format!("leaf{leaf_index}")
}

/// Initial graph as an edge list.
pub fn edge_file(spec: &InstanceSpec) -> Result<String, HardError> {
    Ok(edge_list::write(&spec.initial_graph()?))
}

/// Insertions with a `c leaf<j>` record wherever a root-to-leaf path completes.
pub fn update_stream(spec: &InstanceSpec) -> UpdateStream {
    let mut stream = UpdateStream::new(spec.n, GraphMode::Directed, spec.eps);
    let mut cps = spec.checkpoints.iter().peekable();
    for k in 0..=spec.updates.len() {
        while let Some(cp) = cps.next_if(|cp| cp.update_index == k) {
            stream.checkpoint(checkpoint_label(cp.leaf_index));
        }
        if let Some(&(u, v)) = spec.updates.get(k) {
            stream.insert(u, v);
        }
    }
    stream
}

pub fn manifest(spec: &InstanceSpec) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MANIFEST_COLUMNS).expect("in-memory write");
    let lm = &spec.landmarks;
    for cp in &spec.checkpoints {
        let fields = [
            cp.update_index,
            cp.reach_index,
            cp.leaf_index,
            cp.leaf,
            cp.parity,
            lm.root,
            lm.centers[0],
            lm.centers[1],
        ];
        w.write_record(fields.iter().map(ToString::to_string)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::Record;
    use dynpr::hard::{build_with, HardParams};

    #[test]
    fn stream_places_checkpoints_after_their_updates() {
        let spec = build_with(64, 0.5, HardParams { p: 2, t: 2, d: 2, s: 8 }).unwrap();
        let stream = update_stream(&spec);
        let mut applied = 0;
        let mut seen = Vec::new();
        for r in &stream.records {
            match r {
                Record::Insert(..) => applied += 1,
                Record::Checkpoint(label) => seen.push((label.clone(), applied)),
                Record::Delete(..) => panic!("generator emits no deletions"),
            }
        }
        let expected: Vec<_> = spec
            .checkpoints
            .iter()
            .map(|cp| (checkpoint_label(cp.leaf_index), cp.update_index))
            .collect();
        assert_eq!(seen, expected);
        assert_eq!(applied, spec.updates.len());

        let text = manifest(&spec);
        assert_eq!(text.lines().count(), 1 + spec.checkpoints.len());
        assert_eq!(text.lines().nth(2).unwrap(), "2,1,2,3,0,0,23,32");

        let g = edge_list::parse(&edge_file(&spec).unwrap()).unwrap();
        assert_eq!(g.edges(), spec.initial_graph().unwrap().edges());
    }
}
