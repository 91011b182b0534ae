use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::class_graph::{AdmissibleSets, ClassGraph};
use crate::frontend::{Ty, TypeEnv};

/// Name of the expression-result variable. Not a valid source identifier.
pub const RHO: &str = "ρ";

/// Name of the never-assigned copy of formal `v`. The quote keeps it out of
/// the source identifier space.
pub fn shallow(v: &str) -> String {
    format!("{v}'")
}

/// The formal a shallow name stands for, if `v` is one.
pub fn unshallow(v: &str) -> Option<&str> {
    v.strip_suffix('\'')
}

/// Decides which statements may appear at all for the current variables.
pub trait Universe {
    fn can_reach(&self, v: &str, w: &str) -> bool;
    fn can_cycle(&self, v: &str) -> bool;
}

impl Universe for AdmissibleSets {
    fn can_reach(&self, v: &str, w: &str) -> bool {
        self.rset.contains(&(v.to_string(), w.to_string()))
    }

    fn can_cycle(&self, v: &str) -> bool {
        self.cset.contains(v)
    }
}

/// A type environment plus a few extra bindings (ρ, shallow copies),
/// answering admissibility from the class graph on demand.
#[derive(Clone)]
pub struct Scope<'a> {
    pub graph: &'a ClassGraph,
    pub base: &'a TypeEnv,
    pub extra: Vec<(String, Ty)>,
}

impl<'a> Scope<'a> {
    pub fn new(graph: &'a ClassGraph, base: &'a TypeEnv) -> Self {
        Scope {
            graph,
            base,
            extra: Vec::new(),
        }
    }

    pub fn with(&self, v: &str, t: Option<Ty>) -> Scope<'a> {
        let mut s = self.clone();
        s.extra.retain(|(x, _)| x != v);
        if let Some(t) = t {
            s.extra.push((v.to_string(), t));
        }
        s
    }

    pub fn ty(&self, v: &str) -> Option<&Ty> {
        self.extra
            .iter()
            .rev()
            .find(|(x, _)| x == v)
            .map(|(_, t)| t)
            .or_else(|| self.base.get(v))
    }

    pub fn is_ref(&self, v: &str) -> bool {
        self.ty(v).is_some_and(|t| t.is_ref())
    }

    /// Reference variables in scope, sorted.
    pub fn ref_vars(&self) -> Vec<String> {
        let mut vs: BTreeSet<String> = self
            .base
            .iter()
            .filter(|(_, t)| t.is_ref())
            .map(|(v, _)| v.clone())
            .collect();
        for (v, t) in &self.extra {
            if t.is_ref() {
                vs.insert(v.clone());
            } else {
                vs.remove(v);
            }
        }
        vs.into_iter().collect()
    }
}

impl Universe for Scope<'_> {
    fn can_reach(&self, v: &str, w: &str) -> bool {
        match (self.ty(v), self.ty(w)) {
            (Some(a), Some(b)) => self.graph.ty_reaches(a, b),
            _ => false,
        }
    }

    fn can_cycle(&self, v: &str) -> bool {
        self.ty(v).is_some_and(|t| self.graph.ty_cyclic(t))
    }
}

/// Canonical element of the reduced product: `v -> w` statements and
/// `cyclic(v)` statements. `v -> v` only appears together with `cyclic(v)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AbstractState {
    pub reach: BTreeSet<(String, String)>,
    pub cyclic: BTreeSet<String>,
}

/// Drops inadmissible statements and self-reach without cyclicity.
pub fn normalize(
    reach: impl IntoIterator<Item = (String, String)>,
    cyclic: impl IntoIterator<Item = String>,
    u: &dyn Universe,
) -> AbstractState {
    let cyclic: BTreeSet<String> = cyclic.into_iter().filter(|v| u.can_cycle(v)).collect();
    let reach = reach
        .into_iter()
        .filter(|(v, w)| u.can_reach(v, w) && (v != w || cyclic.contains(v)))
        .collect();
    AbstractState { reach, cyclic }
}

impl AbstractState {
    pub fn bottom() -> Self {
        Self::default()
    }

    pub fn is_bottom(&self) -> bool {
        self.reach.is_empty() && self.cyclic.is_empty()
    }

    /// Builds a state from `("x","y")` pairs and cyclic names, normalized.
    pub fn of(reach: &[(&str, &str)], cyclic: &[&str], u: &dyn Universe) -> Self {
        normalize(
            reach.iter().map(|(a, b)| (a.to_string(), b.to_string())),
            cyclic.iter().map(|c| c.to_string()),
            u,
        )
    }

    pub fn normalized(&self, u: &dyn Universe) -> Self {
        normalize(self.reach.iter().cloned(), self.cyclic.iter().cloned(), u)
    }

    pub fn reaches(&self, v: &str, w: &str) -> bool {
        self.reach.iter().any(|(a, b)| a == v && b == w)
    }

    pub fn is_cyclic(&self, v: &str) -> bool {
        self.cyclic.contains(v)
    }

    /// Targets of `v -> _`.
    pub fn reached_from(&self, v: &str) -> Vec<&str> {
        self.reach.iter().filter(|(a, _)| a == v).map(|(_, b)| b.as_str()).collect()
    }

    /// Sources of `_ -> v`.
    pub fn reaching(&self, v: &str) -> Vec<&str> {
        self.reach.iter().filter(|(_, b)| b == v).map(|(a, _)| a.as_str()).collect()
    }

    pub fn mentions(&self, v: &str) -> bool {
        self.cyclic.contains(v) || self.reach.iter().any(|(a, b)| a == v || b == v)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.cyclic.clone();
        for (a, b) in &self.reach {
            out.insert(a.clone());
            out.insert(b.clone());
        }
        out
    }

    /// Least upper bound; the union of canonical states is canonical.
    pub fn join(&self, other: &Self) -> Self {
        AbstractState {
            reach: self.reach.union(&other.reach).cloned().collect(),
            cyclic: self.cyclic.union(&other.cyclic).cloned().collect(),
        }
    }

    pub fn join_all<'s>(states: impl IntoIterator<Item = &'s AbstractState>) -> Self {
        states.into_iter().fold(Self::bottom(), |acc, s| acc.join(s))
    }

    pub fn meet(&self, other: &Self) -> Self {
        AbstractState {
            reach: self.reach.intersection(&other.reach).cloned().collect(),
            cyclic: self.cyclic.intersection(&other.cyclic).cloned().collect(),
        }
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.reach.is_subset(&other.reach) && self.cyclic.is_subset(&other.cyclic)
    }

    /// Removes every statement mentioning a variable of `xs`.
    pub fn project_out<S: AsRef<str>>(&self, xs: &[S]) -> Self {
        let gone = |v: &String| xs.iter().any(|x| x.as_ref() == v);
        AbstractState {
            reach: self.reach.iter().filter(|(a, b)| !gone(a) && !gone(b)).cloned().collect(),
            cyclic: self.cyclic.iter().filter(|v| !gone(v)).cloned().collect(),
        }
    }

    /// Keeps only statements over `keep`.
    pub fn project_onto<S: AsRef<str>>(&self, keep: &[S]) -> Self {
        let ok = |v: &String| keep.iter().any(|x| x.as_ref() == v);
        AbstractState {
            reach: self.reach.iter().filter(|(a, b)| ok(a) && ok(b)).cloned().collect(),
            cyclic: self.cyclic.iter().filter(|v| ok(v)).cloned().collect(),
        }
    }

    /// `I[from/to]`: every occurrence of `from` replaced by `to`.
    pub fn rename(&self, from: &str, to: &str, u: &dyn Universe) -> Self {
        self.rename_many(&[(from, to)], u)
    }

    /// Simultaneous renaming.
    pub fn rename_many(&self, map: &[(&str, &str)], u: &dyn Universe) -> Self {
        let r = |v: &String| -> String {
            map.iter()
                .find(|(f, _)| *f == v)
                .map(|(_, t)| t.to_string())
                .unwrap_or_else(|| v.clone())
        };
        normalize(
            self.reach.iter().map(|(a, b)| (r(a), r(b))),
            self.cyclic.iter().map(r),
            u,
        )
    }

    /// Adds for `to` every statement about `from`, as when `to` aliases
    /// `from`: each occurrence may independently be either variable, so
    /// `from -> from` yields `to -> from`, `from -> to` and `to -> to`.
    pub fn clone_var(&self, from: &str, to: &str, u: &dyn Universe) -> Self {
        let mut reach = self.reach.clone();
        let mut cyclic = self.cyclic.clone();
        for (a, b) in &self.reach {
            let xs: &[&str] = if a == from { &[from, to] } else { &[a] };
            let ys: &[&str] = if b == from { &[from, to] } else { &[b] };
            for x in xs {
                for y in ys {
                    reach.insert((x.to_string(), y.to_string()));
                }
            }
        }
        if self.cyclic.contains(from) {
            cyclic.insert(to.to_string());
        }
        normalize(reach, cyclic, u)
    }

    pub fn add_reach(&mut self, v: &str, w: &str) {
        self.reach.insert((v.to_string(), w.to_string()));
    }

    pub fn add_cyclic(&mut self, v: &str) {
        self.cyclic.insert(v.to_string());
    }

    /// Sorted text lines: `v -> w` and `cyclic(v)`.
    pub fn lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .reach
            .iter()
            .map(|(a, b)| format!("{a} -> {b}"))
            .chain(self.cyclic.iter().map(|v| format!("cyclic({v})")))
            .collect();
        lines.sort();
        lines
    }

    pub fn render_text(&self) -> String {
        if self.is_bottom() {
            return "(no reach or cyclic facts)\n".to_string();
        }
        let mut s = self.lines().join("\n");
        s.push('\n');
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "reach": self.reach.iter().map(|(a, b)| [a, b]).collect::<Vec<_>>(),
            "cyclic": self.cyclic.iter().collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .reach
            .iter()
            .map(|(a, b)| format!("{a}↝{b}"))
            .chain(self.cyclic.iter().map(|v| format!("○{v}")))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}
