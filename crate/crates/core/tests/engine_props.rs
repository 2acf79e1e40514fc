use dynpr::{Engine, EngineConfig, Graph, GraphMode};
use proptest::prelude::*;

#[derive(Debug, Clone)]
enum Op {
    Insert(usize, usize),
    Delete(usize),
}

fn op(n: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        (0..n, 0..n).prop_map(|(u, v)| Op::Insert(u, v)),
        any::<prop::sample::Index>().prop_map(|i| Op::Delete(i.index(usize::MAX))),
    ]
}

fn check_walks_follow_graph(e: &Engine) -> Result<(), TestCaseError> {
    for (id, walk) in e.store().iter() {
        for (a, b) in walk.arcs() {
            prop_assert!(e.graph().multiplicity(a, b) > 0, "walk {id} uses missing arc {a}->{b}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn updates_keep_store_consistent(
        undirected in any::<bool>(),
        seed in any::<u64>(),
        ops in prop::collection::vec(op(7), 1..25),
    ) {
        let mode = if undirected { GraphMode::Undirected } else { GraphMode::Directed };
        let g = Graph::new(7, mode).unwrap();
        let cfg = EngineConfig::new(0.3, 0.5).with_walks_per_vertex(6).with_seed(seed);
        let mut e = Engine::new(g, cfg).unwrap();
        let mut lengths: Vec<usize> = e.store().iter().map(|(_, w)| w.steps()).collect();
        let count = e.num_walks();
        for op in ops {
            match op {
                Op::Insert(u, v) => e.insert_edge(u, v).unwrap(),
                Op::Delete(pick) => {
                    let edges: Vec<_> = e.graph().edges();
                    if edges.is_empty() {
                        continue;
                    }
                    let (u, v, _) = edges[pick % edges.len()];
                    e.delete_edge(u, v).unwrap();
                }
            }
            e.store().audit().map_err(TestCaseError::fail)?;
            check_walks_follow_graph(&e)?;
        }
        prop_assert_eq!(e.num_walks(), count);
        let mut after: Vec<usize> = e.store().iter().map(|(_, w)| w.steps()).collect();
        lengths.sort_unstable();
        after.sort_unstable();
        prop_assert_eq!(lengths, after);
        let total: f64 = e.estimate_all().iter().sum();
        let visits = e.store().total_visits() as f64;
        prop_assert!((total - 0.3 * visits / count as f64).abs() < 1e-9);
    }
}
