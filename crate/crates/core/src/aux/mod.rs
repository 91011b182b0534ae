//! Sharing, aliasing and purity facts consumed by the abstract semantics.
//!
//! The built-in analysis is a pair-sharing flow analysis over method
//! variables, shallow copies of formals, `out` and ρ. It runs twice per
//! method: once with disjoint formals to compute call summaries and purity,
//! then once from the most general entry to produce the per-point facts.

mod facts;
mod flow;
mod overrides;

use std::collections::{BTreeMap, BTreeSet};

pub use facts::AuxFacts;
pub use overrides::{load_fact_overrides, parse_overrides, FactsError, Overrides};

use crate::class_graph::ClassGraph;
use crate::frontend::{Pos, TypedProgram};
use flow::{intact_points, Ctx, MethodRun, Mode};

/// Facts at one atomic command: before it, and after its expression with ρ
/// bound to the expression value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointFacts {
    pub pre: AuxFacts,
    pub exp: AuxFacts,
    /// The variable the expression copies, if it is a plain variable.
    pub rho_var: Option<String>,
}

/// Facts around one call site; `post` binds ρ to the result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallFacts {
    pub pre: AuxFacts,
    pub post: AuxFacts,
}

#[derive(Debug, Clone, Default)]
pub struct FactTable {
    points: BTreeMap<(String, Pos), PointFacts>,
    calls: BTreeMap<(String, Pos), CallFacts>,
    intact: BTreeMap<(String, Pos), BTreeSet<String>>,
    nonpure: BTreeMap<String, BTreeSet<usize>>,
    summaries: BTreeMap<String, AuxFacts>,
    overridden: BTreeSet<(String, u32)>,
}

static EMPTY_POINT: std::sync::OnceLock<PointFacts> = std::sync::OnceLock::new();
static EMPTY_CALL: std::sync::OnceLock<CallFacts> = std::sync::OnceLock::new();
static EMPTY_SET: BTreeSet<usize> = BTreeSet::new();

impl FactTable {
    pub fn point(&self, sig: &str, pos: Pos) -> &PointFacts {
        self.points
            .get(&(sig.to_string(), pos))
            .unwrap_or_else(|| EMPTY_POINT.get_or_init(PointFacts::default))
    }

    pub fn call(&self, sig: &str, pos: Pos) -> &CallFacts {
        self.calls
            .get(&(sig.to_string(), pos))
            .unwrap_or_else(|| EMPTY_CALL.get_or_init(CallFacts::default))
    }

    /// Indices of formals (0 is `this`) whose structure `sig` may update.
    pub fn nonpure(&self, sig: &str) -> &BTreeSet<usize> {
        self.nonpure.get(sig).unwrap_or(&EMPTY_SET)
    }

    /// Exit sharing over `this`, shallow formals and `out`, computed with
    /// disjoint formals.
    pub fn summary(&self, sig: &str) -> Option<&AuxFacts> {
        self.summaries.get(sig)
    }

    pub fn set_point(&mut self, sig: &str, pos: Pos, facts: PointFacts) {
        self.points.insert((sig.to_string(), pos), facts);
    }

    pub fn set_call(&mut self, sig: &str, pos: Pos, facts: CallFacts) {
        self.calls.insert((sig.to_string(), pos), facts);
    }

    pub fn set_nonpure(&mut self, sig: &str, idx: BTreeSet<usize>) {
        self.nonpure.insert(sig.to_string(), idx);
    }

    /// Whether facts at `line` of `sig` come from an override file.
    pub fn is_overridden(&self, sig: &str, line: u32) -> bool {
        self.overridden.contains(&(sig.to_string(), line))
    }

    pub fn points(&self) -> impl Iterator<Item = (&(String, Pos), &PointFacts)> {
        self.points.iter()
    }

    pub fn calls(&self) -> impl Iterator<Item = (&(String, Pos), &CallFacts)> {
        self.calls.iter()
    }
}

/// Runs the built-in analyses over every method.
pub fn analyze_aux(tp: &TypedProgram, graph: &ClassGraph) -> FactTable {
    let mut summaries: BTreeMap<String, AuxFacts> = BTreeMap::new();
    let mut nonpure: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    loop {
        let mut next_sum = summaries.clone();
        let mut next_np = nonpure.clone();
        {
            let ctx = Ctx {
                tp,
                graph,
                summaries: &summaries,
                nonpure: &nonpure,
            };
            for m in tp.methods() {
                let mut run = MethodRun::new(&ctx, m);
                let exit = run.run(Mode::Derived);
                next_sum.entry(m.sig()).or_default().union_with(&run.summary(&exit));
                next_np.entry(m.sig()).or_default().extend(run.nonpure.iter().copied());
            }
        }
        if next_sum == summaries && next_np == nonpure {
            break;
        }
        summaries = next_sum;
        nonpure = next_np;
    }

    let mut table = FactTable::default();
    {
        let ctx = Ctx {
            tp,
            graph,
            summaries: &summaries,
            nonpure: &nonpure,
        };
        for m in tp.methods() {
            let sig = m.sig();
            let mut run = MethodRun::new(&ctx, m);
            run.run(Mode::Conservative);
            for (pos, f) in std::mem::take(&mut run.points) {
                table.points.insert((sig.clone(), pos), f);
            }
            for (pos, f) in std::mem::take(&mut run.calls) {
                table.calls.insert((sig.clone(), pos), f);
            }
            for (pos, s) in intact_points(m) {
                table.intact.insert((sig.clone(), pos), s);
            }
        }
    }
    table.summaries = summaries;
    table.nonpure = nonpure;
    table
}
