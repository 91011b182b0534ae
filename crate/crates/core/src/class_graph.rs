//! Class-level reachability and cyclicity.
//!
//! Both relations over-approximate what any heap can exhibit, so they decide
//! which abstract statements are admissible for a given type environment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::frontend::{Ty, TypeEnv, TypedProgram};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: String,
    /// Class whose (possibly inherited) field yields the edge; always ≼ `from`.
    pub via: String,
    pub field: String,
    pub to: String,
}

#[derive(Debug, Clone)]
pub struct ClassGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeSet<Edge>,
    /// Transitive closure of the edges (paths of length ≥ 1).
    pub reach: BTreeSet<(String, String)>,
    pub cyclic: BTreeSet<String>,
    subs: BTreeMap<String, Vec<String>>,
}

pub fn build_class_graph(tp: &TypedProgram) -> ClassGraph {
    let nodes: Vec<String> = tp.classes().cloned().collect();
    let subs: BTreeMap<String, Vec<String>> =
        nodes.iter().map(|k| (k.clone(), tp.subclasses(k))).collect();
    let mut edges = BTreeSet::new();
    for k in &nodes {
        for via in &subs[k] {
            for f in tp.all_fields(via) {
                let Ty::Class(d) = &f.ty else { continue };
                for to in &subs[d] {
                    edges.insert(Edge {
                        from: k.clone(),
                        via: via.clone(),
                        field: f.name.clone(),
                        to: to.clone(),
                    });
                }
            }
        }
    }
    let idx: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let n = nodes.len();
    let mut m = vec![vec![false; n]; n];
    for e in &edges {
        m[idx[e.from.as_str()]][idx[e.to.as_str()]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    let mut reach = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] {
                reach.insert((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    let cyclic = (0..n)
        .filter(|&i| (0..n).any(|j| (i == j || m[i][j]) && m[j][j]))
        .map(|i| nodes[i].clone())
        .collect();
    ClassGraph {
        nodes,
        edges,
        reach,
        cyclic,
        subs,
    }
}

impl ClassGraph {
    pub fn reaches(&self, a: &str, b: &str) -> bool {
        self.reach.contains(&(a.to_string(), b.to_string()))
    }

    pub fn reaches_eps(&self, a: &str, b: &str) -> bool {
        a == b || self.reaches(a, b)
    }

    pub fn is_cyclic(&self, a: &str) -> bool {
        self.cyclic.contains(a)
    }

    /// `a` and its subclasses.
    pub fn subs(&self, a: &str) -> &[String] {
        self.subs.get(a).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Some subclass of `a` reaches or is some subclass of `b`.
    pub fn ty_reaches_eps(&self, a: &Ty, b: &Ty) -> bool {
        let (Ty::Class(a), Ty::Class(b)) = (a, b) else { return false };
        self.subs(a)
            .iter()
            .any(|x| self.subs(b).iter().any(|y| self.reaches_eps(x, y)))
    }

    /// Some subclass of `a` reaches some subclass of `b`.
    pub fn ty_reaches(&self, a: &Ty, b: &Ty) -> bool {
        let (Ty::Class(a), Ty::Class(b)) = (a, b) else { return false };
        self.subs(a)
            .iter()
            .any(|x| self.subs(b).iter().any(|y| self.reaches(x, y)))
    }

    /// Some subclass of `a` is a cyclic class.
    pub fn ty_cyclic(&self, a: &Ty) -> bool {
        match a {
            Ty::Class(a) => self.subs(a).iter().any(|x| self.is_cyclic(x)),
            Ty::Int => false,
        }
    }

    /// Some class is ε-reachable from subclasses of both types; a necessary
    /// condition for two variables to share.
    pub fn ty_may_share(&self, a: &Ty, b: &Ty) -> bool {
        let (Ty::Class(a), Ty::Class(b)) = (a, b) else { return false };
        self.nodes.iter().any(|k| {
            self.subs(a).iter().any(|x| self.reaches_eps(x, k))
                && self.subs(b).iter().any(|y| self.reaches_eps(y, k))
        })
    }

    /// The two types have a common subclass; necessary for aliasing.
    pub fn ty_may_alias(&self, a: &Ty, b: &Ty) -> bool {
        let (Ty::Class(a), Ty::Class(b)) = (a, b) else { return false };
        self.subs(a).iter().any(|x| self.subs(b).contains(x))
    }

    /// Text dump: `A -f-> B` per edge (deduplicated by field), then
    /// `cyclic: A` per cyclic class.
    pub fn dump(&self) -> String {
        let mut lines = BTreeSet::new();
        for e in &self.edges {
            lines.insert(format!("{} -{}-> {}", e.from, e.field, e.to));
        }
        let mut out = String::new();
        for l in lines {
            writeln!(out, "{l}").unwrap();
        }
        for c in &self.cyclic {
            writeln!(out, "cyclic: {c}").unwrap();
        }
        out
    }
}

/// Variable pairs admissible as `v -> w` and variables admissible as
/// `cyclic(v)` under a type environment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdmissibleSets {
    pub rset: BTreeSet<(String, String)>,
    pub cset: BTreeSet<String>,
}

pub fn admissible_sets(g: &ClassGraph, env: &TypeEnv) -> AdmissibleSets {
    let mut out = AdmissibleSets::default();
    for (v, tv) in env {
        if g.ty_cyclic(tv) {
            out.cset.insert(v.clone());
        }
        for (w, tw) in env {
            if g.ty_reaches(tv, tw) {
                out.rset.insert((v.clone(), w.clone()));
            }
        }
    }
    out
}
