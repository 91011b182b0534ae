use std::ops::ControlFlow;

use rand::Rng;

use super::{ConcreteState, Object, Value};
use crate::frontend::{Ty, TypeEnv, TypedProgram};

#[derive(Debug, Clone)]
pub struct EnumConfig {
    pub max_locations: usize,
    /// Values tried for integer variables and integer fields.
    pub int_choices: Vec<i64>,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_locations: 3,
            int_choices: vec![0, 1, 2],
        }
    }
}

/// A choice point: either a field of an object or a variable.
enum Slot {
    Field(usize, String),
    Var(String),
}

fn options(tp: &TypedProgram, classes: &[String], ty: &Ty, ints: &[i64]) -> Vec<Value> {
    match ty {
        Ty::Int => ints.iter().map(|&n| Value::Int(n)).collect(),
        Ty::Class(d) => std::iter::once(Value::Null)
            .chain(
                classes
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| tp.is_sub(k, d))
                    .map(|(l, _)| Value::Loc(l)),
            )
            .collect(),
    }
}

fn slots(tp: &TypedProgram, classes: &[String], env: &TypeEnv, ints: &[i64]) -> Vec<(Slot, Vec<Value>)> {
    let mut out = Vec::new();
    for (l, k) in classes.iter().enumerate() {
        for f in tp.all_fields(k) {
            out.push((Slot::Field(l, f.name.clone()), options(tp, classes, &f.ty, ints)));
        }
    }
    for (v, t) in env {
        out.push((Slot::Var(v.clone()), options(tp, classes, t, ints)));
    }
    out
}

fn build(classes: &[String], slots: &[(Slot, Vec<Value>)], pick: &[usize]) -> ConcreteState {
    let mut heap: Vec<Object> = classes
        .iter()
        .map(|k| Object {
            class: k.clone(),
            fields: Default::default(),
        })
        .collect();
    let mut st = ConcreteState::default();
    for ((slot, opts), &i) in slots.iter().zip(pick) {
        match slot {
            Slot::Field(l, f) => {
                heap[*l].fields.insert(f.clone(), opts[i]);
            }
            Slot::Var(v) => {
                st.frame.insert(v.clone(), opts[i]);
            }
        }
    }
    st.heap = heap;
    st
}

/// Calls `f` on every well-typed closed state over `env` whose heap has at
/// most `cfg.max_locations` objects. Locations are numbered densely from 0.
pub fn for_each_state(
    tp: &TypedProgram,
    env: &TypeEnv,
    cfg: &EnumConfig,
    mut f: impl FnMut(ConcreteState) -> ControlFlow<()>,
) {
    let all: Vec<String> = tp.classes().cloned().collect();
    for n in 0..=cfg.max_locations {
        if n > 0 && all.is_empty() {
            break;
        }
        let mut cls = vec![0usize; n];
        loop {
            let classes: Vec<String> = cls.iter().map(|&i| all[i].clone()).collect();
            let slots = slots(tp, &classes, env, &cfg.int_choices);
            if slots.iter().all(|(_, o)| !o.is_empty()) {
                let mut pick = vec![0usize; slots.len()];
                loop {
                    if f(build(&classes, &slots, &pick)).is_break() {
                        return;
                    }
                    if !odometer(&mut pick, |i| slots[i].1.len()) {
                        break;
                    }
                }
            }
            if !odometer(&mut cls, |_| all.len()) {
                break;
            }
        }
    }
}

fn odometer(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in 0..digits.len() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

pub fn enumerate_states(tp: &TypedProgram, env: &TypeEnv, cfg: &EnumConfig) -> Vec<ConcreteState> {
    let mut out = Vec::new();
    for_each_state(tp, env, cfg, |s| {
        out.push(s);
        ControlFlow::Continue(())
    });
    out
}

/// One state drawn from the same space as `for_each_state` (not uniformly:
/// the heap size is picked first).
pub fn random_state(tp: &TypedProgram, env: &TypeEnv, cfg: &EnumConfig, rng: &mut impl Rng) -> ConcreteState {
    let all: Vec<String> = tp.classes().cloned().collect();
    let n = if all.is_empty() { 0 } else { rng.gen_range(0..=cfg.max_locations) };
    let classes: Vec<String> = (0..n).map(|_| all[rng.gen_range(0..all.len())].clone()).collect();
    let slots = slots(tp, &classes, env, &cfg.int_choices);
    let pick: Vec<usize> = slots.iter().map(|(_, o)| rng.gen_range(0..o.len().max(1))).collect();
    build(&classes, &slots, &pick)
}
