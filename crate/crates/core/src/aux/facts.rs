use std::collections::BTreeSet;
use std::fmt;

use crate::domain::Scope;

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// May-share and may-alias pairs at one program point. Pairs are unordered
/// and the reflexive ones are implicit; aliasing implies sharing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuxFacts {
    share: BTreeSet<(String, String)>,
    alias: BTreeSet<(String, String)>,
}

impl AuxFacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn shares(&self, a: &str, b: &str) -> bool {
        a == b || self.share.contains(&key(a, b))
    }

    pub fn aliases(&self, a: &str, b: &str) -> bool {
        a == b || self.alias.contains(&key(a, b))
    }

    /// Every variable sharing with `v`, `v` included.
    pub fn sharers(&self, v: &str) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .share
            .iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b.clone())
                } else if b == v {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect();
        out.insert(v.to_string());
        out
    }

    /// Every variable aliasing `v`, `v` included.
    pub fn aliases_of(&self, v: &str) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .alias
            .iter()
            .filter_map(|(a, b)| {
                if a == v {
                    Some(b.clone())
                } else if b == v {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect();
        out.insert(v.to_string());
        out
    }

    pub fn share_pairs(&self) -> impl Iterator<Item = &(String, String)> {
        self.share.iter()
    }

    pub fn alias_pairs(&self) -> impl Iterator<Item = &(String, String)> {
        self.alias.iter()
    }

    /// Unchecked insertion (used for override files).
    pub fn insert_share(&mut self, a: &str, b: &str) {
        if a != b {
            self.share.insert(key(a, b));
        }
    }

    pub fn insert_alias(&mut self, a: &str, b: &str) {
        if a != b {
            self.alias.insert(key(a, b));
            self.share.insert(key(a, b));
        }
    }

    /// Type-filtered insertion.
    pub fn add_share(&mut self, a: &str, b: &str, sc: &Scope) {
        if a == b {
            return;
        }
        if let (Some(ta), Some(tb)) = (sc.ty(a), sc.ty(b)) {
            if sc.graph.ty_may_share(ta, tb) {
                self.share.insert(key(a, b));
            }
        }
    }

    pub fn add_alias(&mut self, a: &str, b: &str, sc: &Scope) {
        if a == b {
            return;
        }
        if let (Some(ta), Some(tb)) = (sc.ty(a), sc.ty(b)) {
            if sc.graph.ty_may_alias(ta, tb) {
                self.alias.insert(key(a, b));
                self.share.insert(key(a, b));
            }
        }
    }

    /// Forgets everything about `v`.
    pub fn kill(&mut self, v: &str) {
        self.share.retain(|(a, b)| a != v && b != v);
        self.alias.retain(|(a, b)| a != v && b != v);
    }

    pub fn rename(&mut self, from: &str, to: &str) {
        let r = |x: &String| if x == from { to.to_string() } else { x.clone() };
        self.share = self.share.iter().map(|(a, b)| key(&r(a), &r(b))).filter(|(a, b)| a != b).collect();
        self.alias = self.alias.iter().map(|(a, b)| key(&r(a), &r(b))).filter(|(a, b)| a != b).collect();
    }

    /// All pairs across the two groups may share afterwards.
    pub fn merge(&mut self, xs: &BTreeSet<String>, ys: &BTreeSet<String>, sc: &Scope) {
        for x in xs {
            for y in ys {
                self.add_share(x, y, sc);
            }
        }
    }

    pub fn union_with(&mut self, other: &AuxFacts) {
        self.share.extend(other.share.iter().cloned());
        self.alias.extend(other.alias.iter().cloned());
    }

    pub fn leq(&self, other: &AuxFacts) -> bool {
        self.share.is_subset(&other.share) && self.alias.is_subset(&other.alias)
    }

    /// Keeps only pairs over `keep`.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> AuxFacts {
        let ok = |(a, b): &&(String, String)| keep.contains(a) && keep.contains(b);
        AuxFacts {
            share: self.share.iter().filter(ok).cloned().collect(),
            alias: self.alias.iter().filter(ok).cloned().collect(),
        }
    }

    /// Adds each `copy` as an alias of its `orig`, with all of its facts.
    pub fn with_copies(&self, copies: &[(String, String)]) -> AuxFacts {
        let mut out = self.clone();
        for (orig, copy) in copies {
            out.insert_alias(orig, copy);
            for s in self.sharers(orig) {
                out.insert_share(&s, copy);
            }
            for s in self.aliases_of(orig) {
                out.insert_alias(&s, copy);
            }
        }
        out
    }
}

impl fmt::Display for AuxFacts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .share
            .iter()
            .map(|(a, b)| format!("sh({a},{b})"))
            .chain(self.alias.iter().map(|(a, b)| format!("al({a},{b})")))
            .collect();
        write!(f, "{{{}}}", items.join(", "))
    }
}
