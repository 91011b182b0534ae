//! Abstract denotations of expressions and commands, method summaries, and
//! the demand-driven interprocedural fixpoint.

mod call;
mod rules;

use std::collections::{BTreeMap, BTreeSet};

use crate::aux::FactTable;
use crate::class_graph::ClassGraph;
use crate::domain::{shallow, unshallow, AbstractState, Scope, RHO};
use crate::frontend::{Pos, TypedProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    /// Drop statements that can only be witnessed through the overwritten
    /// field on a field update.
    pub single_field_opt: bool,
    /// Mirror formals into never-assigned copies while analyzing a body.
    /// Turning this off gives the diagnostic (unsound) summaries.
    pub shallow: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            single_field_opt: true,
            shallow: true,
        }
    }
}

/// The method whose body is being analyzed and its variables.
#[derive(Clone)]
pub struct Body<'a> {
    pub sig: String,
    pub scope: Scope<'a>,
}

/// Per-point states and loop iterates from the last (stable) round.
#[derive(Debug, Clone, Default)]
pub struct AnalysisResult {
    /// State after each atomic command, joined over calling contexts.
    pub points: BTreeMap<(String, Pos), AbstractState>,
    /// Loop-head iterates, one vector per evaluation of the loop.
    pub loops: BTreeMap<(String, Pos), Vec<Vec<AbstractState>>>,
    /// Summary entries: (method, input) to output.
    pub summaries: BTreeMap<(String, AbstractState), AbstractState>,
    pub rounds: usize,
}

impl AnalysisResult {
    /// State after each line of `sig`: the join of the states after the
    /// atomic commands starting on that line, without shallow copies or ρ.
    pub fn lines(&self, sig: &str) -> BTreeMap<u32, AbstractState> {
        let mut out: BTreeMap<u32, AbstractState> = BTreeMap::new();
        for ((s, pos), st) in &self.points {
            if s == sig {
                let e = out.entry(pos.line).or_default();
                *e = e.join(&visible(st));
            }
        }
        out
    }

    pub fn analyzed_methods(&self) -> BTreeSet<String> {
        self.points.keys().map(|(s, _)| s.clone()).collect()
    }
}

/// Drops statements about shallow copies and ρ.
pub fn visible(st: &AbstractState) -> AbstractState {
    let hidden: Vec<String> = st
        .vars()
        .into_iter()
        .filter(|v| v == RHO || unshallow(v).is_some())
        .collect();
    st.project_out(&hidden)
}

pub struct Analyzer<'a> {
    pub tp: &'a TypedProgram,
    pub graph: &'a ClassGraph,
    pub facts: &'a FactTable,
    pub opts: Options,
    memo: BTreeMap<(String, AbstractState), AbstractState>,
    grew: bool,
    points: BTreeMap<(String, Pos), AbstractState>,
    loops: BTreeMap<(String, Pos), Vec<Vec<AbstractState>>>,
    rounds: usize,
}

impl<'a> Analyzer<'a> {
    pub fn new(tp: &'a TypedProgram, graph: &'a ClassGraph, facts: &'a FactTable, opts: Options) -> Self {
        Analyzer {
            tp,
            graph,
            facts,
            opts,
            memo: BTreeMap::new(),
            grew: false,
            points: BTreeMap::new(),
            loops: BTreeMap::new(),
            rounds: 0,
        }
    }

    /// Variables of `sig`'s body: its type environment plus, in shallow
    /// mode, a copy of each reference formal.
    pub fn body(&self, sig: &str) -> Body<'a> {
        let m = self.tp.method(sig).unwrap_or_else(|| panic!("unknown method {sig}"));
        let mut scope = Scope::new(self.graph, self.tp.env(sig));
        if self.opts.shallow {
            for p in &m.params {
                if p.ty.is_ref() {
                    scope = scope.with(&shallow(&p.name), Some(p.ty.clone()));
                }
            }
        }
        Body {
            sig: sig.to_string(),
            scope,
        }
    }

    /// Universe for a summary of `sig`: its inputs and `out`.
    pub fn io_scope(&self, sig: &str) -> Scope<'a> {
        Scope::new(self.graph, self.tp.env(sig))
    }

    fn io_vars(&self, sig: &str) -> Vec<String> {
        let m = self.tp.method(sig).expect("known method");
        let mut vs = m.inputs();
        vs.push("out".into());
        vs
    }

    /// Canonical form of an input state for `sig`.
    pub fn canonical_input(&self, sig: &str, i: &AbstractState) -> AbstractState {
        let m = self.tp.method(sig).expect("known method");
        i.project_onto(&m.inputs()).normalized(&self.io_scope(sig))
    }

    /// Every admissible reach statement between distinct inputs; with
    /// `cyclic`, also every admissible self-reach and cyclicity statement.
    pub fn most_general_input(&self, sig: &str, cyclic: bool) -> AbstractState {
        let m = self.tp.method(sig).expect("known method");
        let u = self.io_scope(sig);
        let ins = m.inputs();
        let mut reach = Vec::new();
        let mut cyc = Vec::new();
        for a in &ins {
            for b in &ins {
                if a != b || cyclic {
                    reach.push((a.clone(), b.clone()));
                }
            }
            if cyclic {
                cyc.push(a.clone());
            }
        }
        crate::domain::normalize(reach, cyc, &u)
    }

    /// Current approximation of `sig` at `input`; unknown entries start at
    /// bottom and are computed in the next round.
    pub fn lookup(&mut self, sig: &str, input: &AbstractState) -> AbstractState {
        let key = (sig.to_string(), self.canonical_input(sig, input));
        match self.memo.get(&key) {
            Some(v) => v.clone(),
            None => {
                self.memo.insert(key, AbstractState::bottom());
                self.grew = true;
                AbstractState::bottom()
            }
        }
    }

    /// One application of the transformer to `sig` at `input`.
    pub fn eval_method(&mut self, sig: &str, input: &AbstractState) -> AbstractState {
        let m = self.tp.method(sig).expect("known method");
        let body = self.body(sig);
        let input = self.canonical_input(sig, input);
        let formals: Vec<String> = m.params.iter().filter(|p| p.ty.is_ref()).map(|p| p.name.clone()).collect();
        let mut start = input;
        if self.opts.shallow {
            for w in &formals {
                start = start.clone_var(w, &shallow(w), &body.scope);
            }
        }
        let end = self.com_denote(&body, &m.body, &start);
        let io = self.io_scope(sig);
        if self.opts.shallow {
            let mut keep: Vec<String> = formals.iter().map(|w| shallow(w)).collect();
            keep.push("this".into());
            keep.push("out".into());
            let kept = end.project_onto(&keep);
            let back: Vec<(String, String)> = formals.iter().map(|w| (shallow(w), w.clone())).collect();
            let back: Vec<(&str, &str)> = back.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            kept.rename_many(&back, &io)
        } else {
            end.project_onto(&self.io_vars(sig)).normalized(&io)
        }
    }

    /// Iterates every tabulated entry (plus `requests`) until none changes.
    pub fn solve(&mut self, requests: &[(String, AbstractState)]) {
        for (sig, i) in requests {
            self.lookup(sig, i);
        }
        loop {
            self.rounds += 1;
            self.grew = false;
            self.points.clear();
            self.loops.clear();
            let mut changed = false;
            let keys: Vec<(String, AbstractState)> = self.memo.keys().cloned().collect();
            for (sig, input) in keys {
                let out = self.eval_method(&sig, &input);
                let old = self.memo[&(sig.clone(), input.clone())].clone();
                let new = old.join(&out);
                if new != old {
                    changed = true;
                    self.memo.insert((sig, input), new);
                }
            }
            if !changed && !self.grew {
                break;
            }
        }
    }

    /// Solves and returns the summary of `sig` at `input`.
    pub fn summary(&mut self, sig: &str, input: &AbstractState) -> AbstractState {
        self.solve(&[(sig.to_string(), input.clone())]);
        self.lookup(sig, input)
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn result(&self) -> AnalysisResult {
        AnalysisResult {
            points: self.points.clone(),
            loops: self.loops.clone(),
            summaries: self.memo.clone(),
            rounds: self.rounds,
        }
    }

    fn record(&mut self, sig: &str, pos: Pos, st: &AbstractState) {
        let e = self.points.entry((sig.to_string(), pos)).or_default();
        *e = e.join(st);
    }

    fn record_loop(&mut self, sig: &str, pos: Pos, iterates: Vec<AbstractState>) {
        self.loops.entry((sig.to_string(), pos)).or_default().push(iterates);
    }
}
