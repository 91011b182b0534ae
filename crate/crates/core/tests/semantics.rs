mod common;

use std::ops::ControlFlow;

use cyclescope::concrete::{for_each_state, ConcreteState, EnumConfig, Interp, Value};
use cyclescope::domain::{AbstractState, RHO};
use cyclescope::frontend::{CommandKind, TypeEnv};
use cyclescope::report::{render_json, render_text};
use cyclescope::semantics::Options;
use cyclescope::session::Session;
use cyclescope::soundness::{check_random, check_session, AuxOracle, CheckConfig, GenConfig};

use common::{command_at, session, st};

fn update_at(s: &Session, sig: &str, line: u32, i: &AbstractState, opts: Options) -> AbstractState {
    let mut an = s.analyzer(opts);
    let b = an.body(sig);
    let c = command_at(&s.tp, sig, line);
    let CommandKind::FieldAssign(v, f, e) = &c.kind else { panic!("no field update on line {line}") };
    an.field_update(&b, c.pos, v, f, e, i)
}

#[test]
fn closing_a_list_into_a_cycle() {
    let s = session("connect", false);
    let got = update_at(&s, "Node.connect", 9, &st(&[("this", "curr")], &[]), Options::default());
    for (a, b) in [("curr", "this"), ("curr", "curr"), ("this", "this"), ("this", "curr")] {
        assert!(got.reaches(a, b), "{a} -> {b} missing from {got}");
    }
    assert!(got.is_cyclic("curr") && got.is_cyclic("this"));
}

#[test]
fn self_link_is_a_cycle() {
    let s = Session::new("class C { C f; int m() { C y;\n y := new C;\n y.f := y;\n return 0 } }").unwrap();
    let got = update_at(&s, "C.m", 3, &AbstractState::bottom(), Options::default());
    assert_eq!(got, st(&[("y", "y")], &["y"]));
}

fn cond_remove_on(src: &str) -> AbstractState {
    let s = Session::new(src).unwrap();
    let an = s.analyzer(Options::default());
    let b = an.body("C.m");
    an.cond_remove(&b.scope, &st(&[("x", "x")], &["x"]), "x", "f")
}

#[test]
fn single_field_optimization_conditions() {
    let m = "int m() { C x; return 0 }";
    // f is the only field: every witness path crosses it
    assert!(cond_remove_on(&format!("class C {{ C f; {m} }}")).is_bottom());
    // g can carry another cycle
    assert_eq!(cond_remove_on(&format!("class C {{ C f; C g; {m} }}")), st(&[("x", "x")], &["x"]));
    // g leads to an acyclic class that cannot reach C
    assert!(cond_remove_on(&format!("class C {{ C f; D g; {m} }} class D {{ int n; }}")).is_bottom());
    // a subclass adding a second field disables it
    let sub = format!("class C {{ C f; {m} }} class E extends C {{ C g; }}");
    assert_eq!(cond_remove_on(&sub), st(&[("x", "x")], &["x"]));
}

#[test]
fn guard_only_loop_is_identity() {
    let s = Session::new("class C { C f; int m() { C x; int k;\n while (0 > 1) do { k := k };\n return 0 } }").unwrap();
    let mut an = s.analyzer(Options::default());
    let b = an.body("C.m");
    let c = command_at(&s.tp, "C.m", 2);
    let i = st(&[("x", "x"), ("this", "x")], &["x"]);
    assert_eq!(an.com_denote(&b, c, &i), i);
}

#[test]
fn fragment_sharing_yields_reach() {
    let s = session("incompleteness", true);
    let mut an = s.analyzer(Options::default());
    an.summary("C.run", &AbstractState::bottom());
    let lines = an.result().lines("C.run");
    assert_eq!(lines[&9], st(&[("y", "z")], &[]));
    assert!(lines.range(5..9).all(|(_, s)| s.is_bottom()));
}

const DELETE: &str = "class N { N next; int m(N x) { N y;\n y := x.next;\n y := y.next;\n x.next := y;\n return 0 } }";

/// Facts for an acyclic `x` disjoint from `this`: y lies below x, never on it.
const DELETE_FACTS: &str = "at m:* none\nat m:2 share rho x\nat m:3 share x y\nat m:3 share rho x\nat m:3 share rho y\nat m:4 share x y\nat m:4 share rho x\nat m:5 share x y";

#[test]
fn deleting_an_element_keeps_acyclicity() {
    let mut s = Session::new(DELETE).unwrap();
    s.apply_facts_text("delete.facts", DELETE_FACTS).unwrap();
    let mut an = s.analyzer(Options::default());
    let out = an.summary("N.m", &AbstractState::bottom());
    assert!(out.is_bottom(), "{out}");
    let lines = an.result().lines("N.m");
    assert_eq!(lines[&4], st(&[("x", "y")], &[]));
    assert!(lines.values().all(|s| s.cyclic.is_empty()));
    // sharing alone would not tell the list apart from a cycle
    assert!(s.facts.point("N.m", command_at(&s.tp, "N.m", 4).pos).pre.shares("x", "y"));
}

#[test]
fn delete_facts_hold_on_acyclic_inputs() {
    let mut s = Session::new(DELETE).unwrap();
    s.apply_facts_text("delete.facts", DELETE_FACTS).unwrap();
    assert_eq!(facts_hold(&s, "N.m", disjoint_acyclic), 0);
}

/// Every input variable bound, acyclic, and sharing with no other input.
fn disjoint_acyclic(st: &ConcreteState) -> bool {
    let vs: Vec<&String> = st.frame.iter().filter(|(_, x)| !matches!(x, Value::Int(_))).map(|(v, _)| v).collect();
    vs.iter().all(|v| st.frame[*v].loc().is_some() && !st.cyclic_in(v))
        && vs.iter().all(|v| vs.iter().all(|w| v == w || !st.shares_in(v, w)))
}

/// Runs `sig` from every small state accepted by `assume`; returns the number
/// of fact violations seen.
fn facts_hold(s: &Session, sig: &str, assume: impl Fn(&ConcreteState) -> bool) -> usize {
    let m = s.tp.method(sig).unwrap();
    let env: TypeEnv = m.inputs().into_iter().map(|v| (v.clone(), s.tp.env(sig)[&v].clone())).collect();
    let cfg = EnumConfig {
        max_locations: 4,
        int_choices: vec![0, 2],
    };
    let mut bad = 0;
    let mut runs = 0;
    let mut seen = std::collections::BTreeSet::new();
    for_each_state(&s.tp, &env, &cfg, |input| {
        if !assume(&input) {
            return ControlFlow::Continue(());
        }
        let mut oracle = AuxOracle::new(&s.facts);
        let r = Interp::new(&s.tp).with_input([3, 1, 2]).with_observer(&mut oracle).run(sig, &input);
        runs += r.is_ok() as usize;
        for v in &oracle.violations {
            if seen.insert(v.to_string()) {
                eprintln!("{v}\n{}", input.dump());
            }
        }
        bad += oracle.violations.len();
        ControlFlow::Continue(())
    });
    assert!(runs > 0, "{sig}: no run satisfied the assumption");
    bad
}

#[test]
fn corpus_facts_hold_under_their_assumptions() {
    let s = session("ordered_list", true);
    // an acyclic list
    let list = |st: &ConcreteState| st.frame["this"].loc().is_some() && !st.cyclic_in("this");
    assert_eq!(facts_hold(&s, "OrderedList.insert", list), 0);
    let s = session("more_examples", true);
    for m in ["Node.f", "Node.g", "Node.h", "Node.k"] {
        assert_eq!(facts_hold(&s, m, disjoint_acyclic), 0, "{m}");
    }
    let s = session("mirror", true);
    let tree = |st: &ConcreteState| is_tree(st, st.frame["t"]);
    assert_eq!(facts_hold(&s, "Util.mirror", tree), 0);
    let s = session("incompleteness", true);
    assert_eq!(facts_hold(&s, "C.run", disjoint_acyclic), 0);
}

/// No location is reachable along two different paths from `root`.
fn is_tree(st: &ConcreteState, root: Value) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        let Some(l) = v.loc() else { continue };
        if !seen.insert(l) {
            return false;
        }
        stack.extend(st.heap[l].fields.values().copied());
    }
    true
}

#[test]
fn call_rule_on_worked_example() {
    let s = session("more_examples", true);
    let mut an = s.analyzer(Options::default());
    let b = an.body("Node.f");
    let c = command_at(&s.tp, "Node.f", 7);
    let CommandKind::Return(e) = &c.kind else { panic!() };
    let i = st(&[("a", "b"), ("c", "this")], &[]);
    an.exp_denote(&b, c.pos, e, &i);
    an.solve(&[]);
    let got = an.exp_denote(&b, c.pos, e, &i).project_out(&["a'", "b'", "c'"]);
    let expected = i.join(&st(&[("b", "c"), (RHO, "c"), ("a", "this"), ("b", "this"), ("a", "c"), ("a", RHO)], &[]));
    assert!(expected.leq(&got), "{got}");
    // the result is b, and b -> c -> this
    let extra: Vec<(String, String)> = got.reach.difference(&expected.reach).cloned().collect();
    assert_eq!(extra, [(RHO.to_string(), "this".to_string())]);
    assert!(got.cyclic.is_empty());
}

#[test]
fn shallow_copies_keep_argument_facts() {
    let s = session("more_examples", true);
    let mut an = s.analyzer(Options::default());
    let k = an.summary("Node.k", &AbstractState::bottom());
    assert_eq!(k, st(&[("this", "y"), ("out", "y")], &[]));
    let mut diag = s.analyzer(Options {
        shallow: false,
        ..Options::default()
    });
    assert!(diag.summary("Node.k", &AbstractState::bottom()).is_bottom());
}

#[test]
fn summaries_grow_monotonically() {
    let s = session("mirror", false);
    let mut an = s.analyzer(Options::default());
    let top = an.most_general_input("Util.mirror", true);
    let small = an.summary("Util.mirror", &AbstractState::bottom());
    let big = an.summary("Util.mirror", &top);
    assert!(small.leq(&big));
    for ((_, i), o) in &an.result().summaries {
        assert_eq!(&o.normalized(&an.io_scope("Util.mirror")), o, "summary at {i} not canonical");
    }
}

#[test]
fn reports_are_deterministic() {
    let s = session("ordered_list", true);
    let render = || {
        let mut an = s.analyzer(Options::default());
        let i = an.most_general_input("Main.main", false);
        an.summary("Main.main", &i);
        let r = an.result();
        (render_text(&r), render_json(&r).to_string())
    };
    let (t1, j1) = render();
    let (t2, j2) = render();
    assert_eq!(t1, t2);
    assert_eq!(j1, j2);
    assert!(t1.contains("== OrderedList.insert @ line 17 ==\nn -> c\np -> c\nthis -> c\nthis -> p\n"), "{t1}");
    let j: serde_json::Value = serde_json::from_str(&j1).unwrap();
    assert!(j["rounds"].as_u64().unwrap() >= 1);
    assert!(j["methods"].as_array().unwrap().iter().all(|m| m["points"].is_array() && m["summaries"].is_array()));
}

#[test]
fn corpus_is_sound() {
    let cfg = CheckConfig {
        states_per_method: 300,
        ..CheckConfig::default()
    };
    // facts files assume things about the inputs; those are checked above
    for name in ["ordered_list", "more_examples", "mirror", "connect", "optimality", "incompleteness"] {
        let r = check_session(&session(name, false), &cfg, 1);
        assert!(r.samples > 0, "{name}");
        assert!(r.ok(), "{name}: {:?} {:?}", r.violations.first(), r.aux_violations.first());
    }
}

#[test]
fn parallel_and_sequential_checks_agree() {
    let base = CheckConfig {
        states_per_method: 40,
        ..CheckConfig::default()
    };
    let seq = check_random(8, 3, &GenConfig::default(), &CheckConfig { parallel: false, ..base.clone() });
    let par = check_random(8, 3, &GenConfig::default(), &CheckConfig { parallel: true, ..base });
    assert_eq!(seq, par);
    assert!(seq.ok());
}
