mod common;

use cyclescope::concrete::{
    enumerate_states, reachable_locations, reachable_locations_eps, ConcreteState, EnumConfig, Fault, Interp, Object,
    Value,
};
use cyclescope::frontend::{load, Ty, TypeEnv, TypedProgram};

fn obj(class: &str, fields: &[(&str, Value)]) -> Object {
    Object {
        class: class.into(),
        fields: fields.iter().map(|(f, v)| (f.to_string(), *v)).collect(),
    }
}

fn state(frame: &[(&str, Value)], heap: Vec<Object>) -> ConcreteState {
    ConcreteState {
        frame: frame.iter().map(|(v, x)| (v.to_string(), *x)).collect(),
        heap,
    }
}

fn env(vs: &[(&str, Ty)]) -> TypeEnv {
    vs.iter().map(|(v, t)| (v.to_string(), t.clone())).collect()
}

fn with_receiver(tp: &TypedProgram, class: &str) -> ConcreteState {
    let fields: Vec<(&str, Value)> = tp
        .all_fields(class)
        .iter()
        .map(|f| (f.name.as_str(), if f.ty.is_ref() { Value::Null } else { Value::Int(0) }))
        .collect();
    state(&[("this", Value::Loc(0))], vec![obj(class, &fields)])
}

use Value::{Loc, Null};

#[test]
fn enumeration_counts() {
    let tp = load("class C { C f; }").unwrap();
    let c = Ty::Class("C".into());
    let at = |n: usize, e: &TypeEnv, ints: Vec<i64>| {
        enumerate_states(
            &tp,
            e,
            &EnumConfig {
                max_locations: n,
                int_choices: ints,
            },
        )
        .len()
    };
    assert_eq!(at(0, &TypeEnv::new(), vec![0]), 1);
    assert_eq!(at(1, &TypeEnv::new(), vec![0]), 3);
    assert_eq!(at(0, &env(&[("i", Ty::Int)]), vec![0, 1]), 2);
    // one location: f and x each null or ℓ0; two: f, f, x each of three
    assert_eq!(at(2, &env(&[("x", c)]), vec![0]), 1 + 4 + 27);
}

#[test]
fn enumerated_states_are_closed_and_distinct() {
    let tp = load("class A { B b; } class B { A a; int n; }").unwrap();
    let e = env(&[("x", Ty::Class("A".into())), ("i", Ty::Int)]);
    let all = enumerate_states(
        &tp,
        &e,
        &EnumConfig {
            max_locations: 2,
            int_choices: vec![0, 1],
        },
    );
    assert!(all.iter().all(|s| s.is_closed()));
    let distinct: std::collections::HashSet<&ConcreteState> = all.iter().collect();
    assert_eq!(distinct.len(), all.len());
    // fields only ever point to objects of a compatible class
    for s in &all {
        for o in &s.heap {
            for (f, v) in &o.fields {
                if let Loc(l) = v {
                    let want = if f == "b" { "B" } else { "A" };
                    assert_eq!(s.heap[*l].class, want);
                }
            }
        }
    }
}

#[test]
fn reachability_queries() {
    // x -> ℓ0 -> ℓ1 -> ℓ2 -> ℓ1, y -> ℓ2, z -> ℓ3 alone
    let heap = vec![
        obj("C", &[("f", Loc(1))]),
        obj("C", &[("f", Loc(2))]),
        obj("C", &[("f", Loc(1))]),
        obj("C", &[("f", Null)]),
    ];
    let s = state(&[("x", Loc(0)), ("y", Loc(2)), ("z", Loc(3)), ("n", Null)], heap);
    assert_eq!(reachable_locations(&s.heap, 0), [1, 2].into());
    assert_eq!(reachable_locations_eps(&s.heap, 3), [3].into());
    assert!(s.reaches_in("x", "y"));
    assert!(s.reaches_in("y", "y"));
    assert!(!s.reaches_in("y", "x"));
    assert!(!s.reaches_in("z", "z"));
    assert!(!s.reaches_in("x", "n"));
    // x is not on the cycle but reaches it
    assert!(s.cyclic_in("x") && s.cyclic_in("y"));
    assert!(!s.cyclic_in("z") && !s.cyclic_in("n"));
    assert!(s.shares_in("x", "y") && !s.shares_in("x", "z"));
    assert!(!s.aliases_in("x", "y") && s.aliases_in("x", "x") && !s.aliases_in("n", "n"));
    let (reach, cyc) = s.witnessed();
    assert!(reach.contains(&("x".into(), "y".into())) && !reach.contains(&("x".into(), "x".into())));
    assert_eq!(cyc, ["x".to_string(), "y".to_string()].into());
}

#[test]
fn ordered_list_driver() {
    let tp = load(&std::fs::read_to_string(common::corpus("ordered_list.oo")).unwrap()).unwrap();
    let s = with_receiver(&tp, "Main");
    let o = Interp::new(&tp).with_input([3, 1, 2]).run("Main.main", &s).unwrap();
    let fin = o.final_state();
    let Loc(list) = fin.frame["x"] else { panic!() };
    let mut values = Vec::new();
    let mut cur = fin.heap[list].fields["head"];
    while let Loc(l) = cur {
        let Value::Int(v) = fin.heap[l].fields["value"] else { panic!() };
        values.push(v);
        cur = fin.heap[l].fields["next"];
    }
    assert_eq!(values, [1, 2, 3]);
    let Loc(last) = fin.heap[list].fields["lastInserted"] else { panic!() };
    assert_eq!(fin.heap[last].fields["value"], Value::Int(2));
    assert!(!fin.cyclic_in("x"));
}

#[test]
fn insert_returns_position() {
    let tp = load(&std::fs::read_to_string(common::corpus("ordered_list.oo")).unwrap()).unwrap();
    // list 1 -> 5; inserting 3 lands at position 1
    let s = state(
        &[("this", Loc(0)), ("i", Value::Int(3))],
        vec![
            obj("OrderedList", &[("head", Loc(1)), ("lastInserted", Null)]),
            obj("Node", &[("value", Value::Int(1)), ("next", Loc(2))]),
            obj("Node", &[("value", Value::Int(5)), ("next", Null)]),
        ],
    );
    let o = Interp::new(&tp).run("OrderedList.insert", &s).unwrap();
    assert_eq!(o.out, Value::Int(1));
    assert_eq!(o.heap.len(), 4);
    assert_eq!(o.heap[1].fields["next"], Loc(3));
    assert_eq!(o.heap[3].fields["next"], Loc(2));
}

#[test]
fn return_does_not_exit() {
    let tp = load("class C { int m() { return 1; return 2 } }").unwrap();
    let o = Interp::new(&tp).run("C.m", &with_receiver(&tp, "C")).unwrap();
    assert_eq!(o.out, Value::Int(2));
}

#[test]
fn virtual_dispatch_uses_runtime_class() {
    let tp = load(
        "class A { int m() { return 1 } int call(A a) { return a.m() } } class B extends A { int m() { return 2 } }",
    )
    .unwrap();
    let s = state(&[("this", Loc(0)), ("a", Loc(1))], vec![obj("A", &[]), obj("B", &[])]);
    assert_eq!(Interp::new(&tp).run("A.call", &s).unwrap().out, Value::Int(2));
}

#[test]
fn faults() {
    let tp = load("class C { C f; int spin() { int k; k := 1; while (k > 0) do { k := k }; return 0 } C deref(C a) { return a.f } }").unwrap();
    let s = with_receiver(&tp, "C");
    assert_eq!(Interp::new(&tp).with_budget(500).run("C.spin", &s).unwrap_err(), Fault::Budget);
    assert!(matches!(Interp::new(&tp).run("C.deref", &s), Err(Fault::NullDeref(p)) if p.line == 1));
}

#[test]
fn merged_state_keeps_entry_bindings() {
    let tp = load(&std::fs::read_to_string(common::corpus("more_examples.oo")).unwrap()).unwrap();
    let node = || obj("Node", &[("value", Value::Int(0)), ("next", Null)]);
    let s = state(&[("this", Loc(0)), ("y", Loc(1))], vec![node(), node()]);
    let o = Interp::new(&tp).run("Node.h", &s).unwrap();
    assert_eq!(o.final_frame["y"], Null);
    let m = o.merged_state();
    assert_eq!(m.frame["y"], Loc(1));
    assert!(m.reaches_in("this", "y") && m.reaches_in("out", "y"));
}
