use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cyclescope::class_graph::build_class_graph;
use cyclescope::concrete::{enumerate_states, random_state, ConcreteState, EnumConfig};
use cyclescope::domain::{alpha_rc, gamma_contains, normalize, shallow, unshallow, AbstractState, Scope, RHO};
use cyclescope::frontend::{load, Ty, TypeEnv, TypedProgram};

const SRC: &str = "class C { C f; C g; } class L { int n; } class T { L l; }";

fn fixture() -> (TypedProgram, TypeEnv) {
    let tp = load(SRC).unwrap();
    let env: TypeEnv = [("x", "C"), ("y", "C"), ("z", "C"), ("t", "T"), ("l", "L")]
        .iter()
        .map(|(v, c)| (v.to_string(), Ty::Class(c.to_string())))
        .collect();
    (tp, env)
}

fn s(reach: &[(&str, &str)], cyclic: &[&str]) -> AbstractState {
    AbstractState {
        reach: reach.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        cyclic: cyclic.iter().map(|c| c.to_string()).collect(),
    }
}

#[test]
fn normalize_drops_inadmissible_and_lone_self_reach() {
    let (tp, env) = fixture();
    let g = build_class_graph(&tp);
    let u = Scope::new(&g, &env);
    let raw = s(&[("x", "x"), ("x", "y"), ("l", "t"), ("t", "l"), ("y", "y")], &["y", "t"]);
    assert_eq!(raw.normalized(&u), s(&[("x", "y"), ("t", "l"), ("y", "y")], &["y"]));
    assert_eq!(AbstractState::of(&[("x", "x")], &[], &u), AbstractState::bottom());
}

#[test]
fn self_reach_without_cycle_describes_nothing_more() {
    // x -> x forces a cycle below x, so alone it has the concretization of ∅
    let (tp, env) = fixture();
    let cfg = EnumConfig {
        max_locations: 2,
        int_choices: vec![0],
    };
    let small: TypeEnv = env.iter().filter(|(v, _)| *v == "x").map(|(a, b)| (a.clone(), b.clone())).collect();
    for st in enumerate_states(&tp, &small, &cfg) {
        assert_eq!(gamma_contains(&s(&[("x", "x")], &[]), &st), gamma_contains(&AbstractState::bottom(), &st));
    }
}

#[test]
fn lattice_operations() {
    let a = s(&[("x", "y")], &["x"]);
    let b = s(&[("y", "z")], &["x"]);
    assert_eq!(a.join(&b), s(&[("x", "y"), ("y", "z")], &["x"]));
    assert_eq!(a.meet(&b), s(&[], &["x"]));
    assert!(a.leq(&a.join(&b)) && !a.leq(&b));
    assert_eq!(AbstractState::join_all([&a, &b, &AbstractState::bottom()]), a.join(&b));
}

#[test]
fn projection_and_renaming() {
    let (tp, env) = fixture();
    let g = build_class_graph(&tp);
    let u = Scope::new(&g, &env).with(RHO, Some(Ty::Class("C".into())));
    let i = s(&[("x", RHO), (RHO, "y"), ("y", "z")], &[RHO]);
    assert_eq!(i.project_out(&["y"]), s(&[("x", RHO)], &[RHO]));
    assert_eq!(i.project_onto(&["y", "z"]), s(&[("y", "z")], &[]));
    assert_eq!(i.project_out(&["y"]).rename(RHO, "z", &u), s(&[("x", "z")], &["z"]));
    // simultaneous: swapping is not sequential renaming
    let sw = s(&[("x", "y")], &[]).rename_many(&[("x", "y"), ("y", "x")], &u);
    assert_eq!(sw, s(&[("y", "x")], &[]));
}

#[test]
fn clone_var_covers_both_names() {
    let (tp, env) = fixture();
    let g = build_class_graph(&tp);
    let u = Scope::new(&g, &env).with(RHO, Some(Ty::Class("C".into())));
    let i = s(&[("x", "x"), ("y", "x")], &["x"]);
    let c = i.clone_var("x", RHO, &u);
    assert_eq!(
        c,
        s(&[("x", "x"), ("y", "x"), ("x", RHO), (RHO, "x"), (RHO, RHO), ("y", RHO)], &["x", RHO])
    );
}

#[test]
fn shallow_names() {
    assert_eq!(shallow("y"), "y'");
    assert_eq!(unshallow("y'"), Some("y"));
    assert_eq!(unshallow("y"), None);
}

#[test]
fn text_and_json_renderings() {
    let i = s(&[("x", "y")], &["x"]);
    assert_eq!(i.render_text(), "cyclic(x)\nx -> y\n");
    assert_eq!(i.to_string(), "{x↝y, ○x}");
    assert_eq!(i.to_json(), serde_json::json!({"reach": [["x", "y"]], "cyclic": ["x"]}));
    assert_eq!(AbstractState::bottom().render_text(), "(no reach or cyclic facts)\n");
}

// ---- properties against concrete states ----

fn concrete(seed: u64) -> (TypedProgram, TypeEnv, ConcreteState) {
    let (tp, env) = fixture();
    let cfg = EnumConfig {
        max_locations: 3,
        int_choices: vec![0],
    };
    let st = random_state(&tp, &env, &cfg, &mut ChaCha8Rng::seed_from_u64(seed));
    (tp, env, st)
}

fn abstract_of(bits: &[bool]) -> AbstractState {
    let vars = ["x", "y", "z", "t", "l"];
    let mut a = AbstractState::bottom();
    for (i, v) in vars.iter().enumerate() {
        for (j, w) in vars.iter().enumerate() {
            if bits[i * 5 + j] {
                a.add_reach(v, w);
            }
        }
        if bits[25 + i] {
            a.add_cyclic(v);
        }
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn alpha_of_a_state_describes_it(seed in any::<u64>()) {
        let (tp, env, st) = concrete(seed);
        let g = build_class_graph(&tp);
        let u = Scope::new(&g, &env);
        let a = alpha_rc([&st], &u);
        prop_assert!(gamma_contains(&a, &st));
        prop_assert_eq!(a.normalized(&u), a);
    }

    #[test]
    fn gamma_is_monotone(seed in any::<u64>(), big in proptest::collection::vec(any::<bool>(), 30), sub in proptest::collection::vec(any::<bool>(), 30)) {
        let (_, _, st) = concrete(seed);
        let i2 = abstract_of(&big);
        let both: Vec<bool> = big.iter().zip(&sub).map(|(a, b)| *a && *b).collect();
        let i1 = abstract_of(&both);
        prop_assert!(i1.leq(&i2));
        prop_assert!(!gamma_contains(&i1, &st) || gamma_contains(&i2, &st));
    }

    #[test]
    fn normalization_keeps_concretization(seed in any::<u64>(), bits in proptest::collection::vec(any::<bool>(), 30)) {
        let (tp, env, st) = concrete(seed);
        let g = build_class_graph(&tp);
        let u = Scope::new(&g, &env);
        let i = abstract_of(&bits);
        prop_assert_eq!(gamma_contains(&i, &st), gamma_contains(&i.normalized(&u), &st));
    }

    #[test]
    fn clone_and_projection_are_sound(seed in any::<u64>(), bits in proptest::collection::vec(any::<bool>(), 30)) {
        let (tp, env, st) = concrete(seed);
        let g = build_class_graph(&tp);
        let u = Scope::new(&g, &env).with(RHO, Some(Ty::Class("C".into())));
        // the smallest description of st, plus noise
        let i = alpha_rc([&st], &u).join(&abstract_of(&bits).normalized(&u));
        let mut copy = st.clone();
        copy.frame.insert(RHO.into(), st.frame["x"]);
        prop_assert!(gamma_contains(&i.clone_var("x", RHO, &u), &copy));
        let mut dropped = st.clone();
        dropped.frame.remove("y");
        prop_assert!(gamma_contains(&i.project_out(&["y"]), &dropped));
        let mut moved = st.clone();
        let y = moved.frame.remove("y").unwrap();
        moved.frame.insert(RHO.into(), y);
        prop_assert!(gamma_contains(&i.rename("y", RHO, &u), &moved));
    }
}

#[test]
fn normalize_agrees_with_of() {
    let (tp, env) = fixture();
    let g = build_class_graph(&tp);
    let u = Scope::new(&g, &env);
    let a = AbstractState::of(&[("x", "y"), ("z", "z")], &["z"], &u);
    let b = normalize(
        [("x".to_string(), "y".to_string()), ("z".to_string(), "z".to_string())],
        ["z".to_string()],
        &u,
    );
    assert_eq!(a, b);
}
