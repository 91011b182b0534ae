#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use cyclescope::domain::AbstractState;
use cyclescope::frontend::{Command, TypedProgram};
use cyclescope::session::Session;

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

/// Loads `corpus/<name>.oo`, applying `corpus/<name>.facts` when `facts`.
pub fn session(name: &str, facts: bool) -> Session {
    let mut s = Session::from_file(&corpus(&format!("{name}.oo"))).unwrap();
    if facts {
        s.apply_facts_file(&corpus(&format!("{name}.facts"))).unwrap();
    }
    s
}

/// Raw state, no normalization: what a golden value says literally.
pub fn st(reach: &[(&str, &str)], cyclic: &[&str]) -> AbstractState {
    AbstractState {
        reach: reach.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        cyclic: cyclic.iter().map(|c| c.to_string()).collect(),
    }
}

/// First atomic command starting on `line` in `sig`.
pub fn command_at<'a>(tp: &'a TypedProgram, sig: &str, line: u32) -> &'a Command {
    let mut found = None;
    tp.method(sig).unwrap().body.for_each_atomic(&mut |c| {
        if c.pos.line == line && found.is_none() {
            found = Some(c);
        }
    });
    found.unwrap_or_else(|| panic!("no command on line {line} of {sig}"))
}

/// `a` minus `b`, and `b` minus `a`, as readable statement lists.
pub fn diff(a: &AbstractState, b: &AbstractState) -> (Vec<String>, Vec<String>) {
    let lines = |s: &AbstractState| s.lines().into_iter().collect::<BTreeSet<_>>();
    let (la, lb) = (lines(a), lines(b));
    (la.difference(&lb).cloned().collect(), lb.difference(&la).cloned().collect())
}
