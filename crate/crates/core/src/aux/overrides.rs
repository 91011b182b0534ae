use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::{AuxFacts, FactTable};
use crate::domain::{shallow, unshallow, RHO};
use crate::frontend::TypedProgram;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct FactsError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Entry {
    Fact {
        method: String,
        /// `None` for `*`: every line of the method.
        at: Option<u32>,
        alias: bool,
        a: String,
        b: String,
    },
    Purity {
        method: String,
        /// `None` for `pure`.
        index: Option<usize>,
    },
}

/// A parsed override file, not yet resolved against a program.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    file: String,
    entries: Vec<(usize, Entry)>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn load_fact_overrides(path: &Path) -> Result<Overrides, FactsError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| FactsError {
        file: file.clone(),
        line: 0,
        message: e.to_string(),
    })?;
    parse_overrides(&file, &text)
}

fn var_name(s: &str) -> String {
    if s == "rho" {
        RHO.to_string()
    } else {
        s.to_string()
    }
}

pub fn parse_overrides(file: &str, text: &str) -> Result<Overrides, FactsError> {
    let err = |line: usize, message: String| FactsError {
        file: file.to_string(),
        line,
        message,
    };
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["at", point, kind @ ("share" | "alias"), a, b] => {
                let (method, at) = point
                    .rsplit_once(':')
                    .ok_or_else(|| err(n, format!("expected `<method>:<line>`, found `{point}`")))?;
                let at = if at == "*" {
                    None
                } else {
                    Some(at.parse::<u32>().map_err(|_| err(n, format!("bad line number `{at}`")))?)
                };
                entries.push((
                    n,
                    Entry::Fact {
                        method: method.to_string(),
                        at,
                        alias: *kind == "alias",
                        a: var_name(a),
                        b: var_name(b),
                    },
                ));
            }
            ["at", point, "none"] => {
                let (method, at) = point
                    .rsplit_once(':')
                    .ok_or_else(|| err(n, format!("expected `<method>:<line>`, found `{point}`")))?;
                let at = if at == "*" {
                    None
                } else {
                    Some(at.parse::<u32>().map_err(|_| err(n, format!("bad line number `{at}`")))?)
                };
                entries.push((
                    n,
                    Entry::Fact {
                        method: method.to_string(),
                        at,
                        alias: false,
                        a: "this".into(),
                        b: "this".into(),
                    },
                ));
            }
            ["method", sig, "nonpure", idx] => {
                let index = idx.parse::<usize>().map_err(|_| err(n, format!("bad argument index `{idx}`")))?;
                entries.push((
                    n,
                    Entry::Purity {
                        method: sig.to_string(),
                        index: Some(index),
                    },
                ));
            }
            ["method", sig, "pure"] => entries.push((
                n,
                Entry::Purity {
                    method: sig.to_string(),
                    index: None,
                },
            )),
            _ => return Err(err(n, format!("cannot parse `{line}`"))),
        }
    }
    Ok(Overrides {
        file: file.to_string(),
        entries,
    })
}

impl FactTable {
    /// Replaces the facts at every overridden line by the listed ones.
    ///
    /// Facts that hold by construction are kept: reflexive pairs, ρ aliasing
    /// the variable it copies, and shallow copies mirroring formals that
    /// have not been assigned yet.
    pub fn apply_overrides(&mut self, tp: &TypedProgram, ov: &Overrides) -> Result<(), FactsError> {
        let err = |line: usize, message: String| FactsError {
            file: ov.file.clone(),
            line,
            message,
        };
        let resolve = |line: usize, name: &str| -> Result<String, FactsError> {
            match tp.find_method(name).as_slice() {
                [m] => Ok(m.sig()),
                [] => Err(err(line, format!("unknown method `{name}`"))),
                _ => Err(err(line, format!("ambiguous method `{name}`; use Class.name"))),
            }
        };

        let mut groups: BTreeMap<(String, Option<u32>), (usize, AuxFacts)> = BTreeMap::new();
        let mut purity: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (n, e) in &ov.entries {
            match e {
                Entry::Fact { method, at, alias, a, b } => {
                    let sig = resolve(*n, method)?;
                    let env = tp.env(&sig);
                    for v in [a, b] {
                        let base = unshallow(v).unwrap_or(v);
                        let known = v == RHO || env.get(base).is_some_and(|t| t.is_ref());
                        if !known {
                            return Err(err(*n, format!("unknown reference variable `{v}` in {sig}")));
                        }
                    }
                    let g = groups.entry((sig, *at)).or_insert_with(|| (*n, AuxFacts::new()));
                    if *alias {
                        g.1.insert_alias(a, b);
                    } else {
                        g.1.insert_share(a, b);
                    }
                }
                Entry::Purity { method, index } => {
                    let sig = resolve(*n, method)?;
                    let m = tp.method(&sig).expect("resolved");
                    let set = purity.entry(sig.clone()).or_default();
                    if let Some(i) = index {
                        if *i > m.params.len() {
                            return Err(err(*n, format!("{sig} has no argument {i}")));
                        }
                        set.insert(*i);
                    }
                }
            }
        }

        for ((sig, at), (n, listed)) in groups {
            let m = tp.method(&sig).expect("resolved");
            let formals: Vec<String> = m.params.iter().filter(|p| p.ty.is_ref()).map(|p| p.name.clone()).collect();
            let hit = |line: u32| at.is_none_or(|l| l == line);
            let mut found = false;
            let empty = BTreeSet::new();
            for ((s, pos), pf) in self.points.iter_mut() {
                if *s != sig || !hit(pos.line) {
                    continue;
                }
                found = true;
                let intact = self.intact.get(&(sig.clone(), *pos)).unwrap_or(&empty);
                pf.pre = complete(&without_rho(&listed), None, intact, &formals, &pf.pre);
                pf.exp = complete(&listed, pf.rho_var.as_deref(), intact, &formals, &pf.exp);
                self.overridden.insert((sig.clone(), pos.line));
            }
            for ((s, pos), cf) in self.calls.iter_mut() {
                if *s != sig || !hit(pos.line) {
                    continue;
                }
                found = true;
                let intact = self.intact.get(&(sig.clone(), *pos)).cloned().unwrap_or_else(|| {
                    // calls nested in an atomic command share its position line
                    self.intact
                        .iter()
                        .filter(|((s2, p2), _)| *s2 == sig && p2.line == pos.line)
                        .map(|(_, v)| v.clone())
                        .next()
                        .unwrap_or_default()
                });
                cf.pre = complete(&without_rho(&listed), None, &intact, &formals, &cf.pre);
                cf.post = complete(&listed, None, &intact, &formals, &cf.post);
            }
            if !found {
                let line = at.map(|l| l.to_string()).unwrap_or("*".into());
                return Err(err(n, format!("no program point at line {line} of {sig}")));
            }
        }
        for (sig, set) in purity {
            self.nonpure.insert(sig, set);
        }
        Ok(())
    }
}

fn without_rho(f: &AuxFacts) -> AuxFacts {
    let mut f = f.clone();
    f.kill(RHO);
    f
}

fn complete(
    listed: &AuxFacts,
    rho_var: Option<&str>,
    intact: &BTreeSet<String>,
    formals: &[String],
    builtin: &AuxFacts,
) -> AuxFacts {
    let mut out = listed.clone();
    if let Some(x) = rho_var {
        out.insert_alias(RHO, x);
        for a in listed.aliases_of(x) {
            out.insert_alias(RHO, &a);
        }
        for b in listed.sharers(x) {
            out.insert_share(RHO, &b);
        }
    }
    for w in formals {
        let sw = shallow(w);
        if intact.contains(w) {
            out = out.with_copies(&[(w.clone(), sw)]);
        } else {
            for (a, b) in builtin.share_pairs() {
                if *a == sw || *b == sw {
                    out.insert_share(a, b);
                }
            }
            for (a, b) in builtin.alias_pairs() {
                if *a == sw || *b == sw {
                    out.insert_alias(a, b);
                }
            }
        }
    }
    out
}
