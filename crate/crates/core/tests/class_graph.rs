use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cyclescope::class_graph::{admissible_sets, build_class_graph, ClassGraph};
use cyclescope::concrete::{enumerate_states, reachable_locations, EnumConfig, HeapReach};
use cyclescope::frontend::{load, Ty, TypeEnv};
use cyclescope::soundness::{random_program, GenConfig};

fn graph(src: &str) -> ClassGraph {
    build_class_graph(&load(src).unwrap())
}

/// Closure by breadth-first search from every node.
fn bfs_closure(g: &ClassGraph) -> BTreeSet<(String, String)> {
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &g.edges {
        succ.entry(&e.from).or_default().push(&e.to);
    }
    let mut out = BTreeSet::new();
    for a in &g.nodes {
        let mut seen = BTreeSet::new();
        let mut queue: Vec<&str> = succ.get(a.as_str()).cloned().unwrap_or_default();
        while let Some(x) = queue.pop() {
            if seen.insert(x) {
                queue.extend(succ.get(x).cloned().unwrap_or_default());
            }
        }
        out.extend(seen.into_iter().map(|b| (a.clone(), b.to_string())));
    }
    out
}

#[test]
fn list_node_is_cyclic() {
    let g = graph("class Node { int value; Node next; } class OrderedList { Node head; Node lastInserted; }");
    assert!(g.reaches("OrderedList", "Node"));
    assert!(g.reaches("Node", "Node"));
    assert!(!g.reaches("Node", "OrderedList"));
    assert!(!g.reaches("OrderedList", "OrderedList"));
    // OrderedList reaches the cycle on Node
    assert_eq!(g.cyclic, ["Node", "OrderedList"].iter().map(|s| s.to_string()).collect());
}

#[test]
fn subclass_fields_create_edges() {
    // an A may be a B at run time, whose field g points back to an A
    let g = graph("class A { } class B extends A { A g; } class C { A f; }");
    assert!(g.reaches("A", "A"));
    assert!(g.reaches("C", "B"));
    assert!(g.is_cyclic("A") && g.is_cyclic("C"));
    assert!(g.edges.iter().any(|e| e.from == "A" && e.via == "B" && e.field == "g"));
}

#[test]
fn acyclic_hierarchy() {
    let g = graph("class T { L l; } class L { int n; }");
    assert!(g.cyclic.is_empty());
    assert!(g.reaches("T", "L"));
    assert!(!g.reaches("L", "T"));
    assert_eq!(g.dump(), "T -l-> L\n");
}

#[test]
fn admissible_pairs_follow_types() {
    let tp = load("class T { L l; } class L { int n; }").unwrap();
    let g = build_class_graph(&tp);
    let env: TypeEnv = [("t", Ty::Class("T".into())), ("l", Ty::Class("L".into())), ("i", Ty::Int)]
        .into_iter()
        .map(|(v, t)| (v.to_string(), t))
        .collect();
    let a = admissible_sets(&g, &env);
    assert_eq!(a.rset, [("t".to_string(), "l".to_string())].into_iter().collect());
    assert!(a.cset.is_empty());
}

#[test]
fn closure_bounds_every_small_heap() {
    let src = "class A { B b; A a; } class B extends A { C c; } class C { A x; int n; } class D { D d; }";
    let tp = load(src).unwrap();
    let g = build_class_graph(&tp);
    let cfg = EnumConfig {
        max_locations: 2,
        int_choices: vec![0],
    };
    for s in enumerate_states(&tp, &TypeEnv::new(), &cfg) {
        let hr = HeapReach::new(&s.heap);
        for (l, o) in s.heap.iter().enumerate() {
            for r in reachable_locations(&s.heap, l) {
                assert!(g.reaches(&o.class, &s.heap[r].class), "{}", s.dump());
            }
            if hr.cyclic_from(l) {
                assert!(g.is_cyclic(&o.class), "{}", s.dump());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn closure_matches_search(seed in any::<u64>()) {
        let src = random_program(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default());
        let g = graph(&src);
        prop_assert_eq!(&g.reach, &bfs_closure(&g));
        for k in &g.nodes {
            let oracle = g.nodes.iter().any(|j| (j == k || g.reach.contains(&(k.clone(), j.clone()))) && g.reach.contains(&(j.clone(), j.clone())));
            prop_assert_eq!(g.is_cyclic(k), oracle);
        }
    }
}
