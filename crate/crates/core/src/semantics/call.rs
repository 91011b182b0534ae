use std::collections::BTreeSet;

use super::{Analyzer, Body};
use crate::domain::{normalize, AbstractState, RHO};
use crate::frontend::{Expr, ExprKind, MethodDecl};

/// Statements of `i` restated over `t`'s formals. An actual passed in
/// several positions yields a statement for every combination.
fn to_formals(i: &AbstractState, pairs: &[(String, String)]) -> (Vec<(String, String)>, Vec<String>) {
    let formals_of = |a: &str| -> Vec<&str> {
        pairs
            .iter()
            .filter(|(_, act)| act == a)
            .map(|(f, _)| f.as_str())
            .collect()
    };
    let mut reach = Vec::new();
    for (a, b) in &i.reach {
        for fa in formals_of(a) {
            for fb in formals_of(b) {
                reach.push((fa.to_string(), fb.to_string()));
            }
        }
    }
    let mut cyclic = Vec::new();
    for v in &i.cyclic {
        cyclic.extend(formals_of(v).into_iter().map(String::from));
    }
    (reach, cyclic)
}

/// (formal, actual) for every reference position of a call to `t`.
fn ref_positions(t: &MethodDecl, recv: &str, args: &[String]) -> Vec<(usize, String, String)> {
    let mut out = vec![(0, "this".to_string(), recv.to_string())];
    for (k, p) in t.params.iter().enumerate() {
        if p.ty.is_ref() {
            out.push((k + 1, p.name.clone(), args[k].clone()));
        }
    }
    out
}

impl<'a> Analyzer<'a> {
    /// `recv.method(args)`: plugs the callee summaries into the caller and
    /// propagates their effect to variables sharing with the actuals.
    pub(crate) fn call_denote(&mut self, b: &Body<'a>, e: &Expr, i: &AbstractState) -> AbstractState {
        let ExprKind::Call { recv, method, args } = &e.kind else {
            unreachable!("call_denote on a non-call")
        };
        let sc = self.rho_scope(b, self.ty_of(b, e));
        let class = b.scope.ty(recv).and_then(|t| t.class()).unwrap_or_default().to_string();
        let targets = self.tp.dispatch_targets(&class, method);
        let facts = self.facts.call(&b.sig, e.pos).clone();
        let (pre, post) = (&facts.pre, &facts.post);

        let mut actuals: BTreeSet<String> = BTreeSet::new();
        let mut nonpure: BTreeSet<String> = BTreeSet::new();
        let mut im = AbstractState::bottom();
        for t in &targets {
            let pos = ref_positions(t, recv, args);
            actuals.extend(pos.iter().map(|(_, _, a)| a.clone()));
            let pairs: Vec<(String, String)> = pos.iter().map(|(_, f, a)| (f.clone(), a.clone())).collect();
            let i0 = i.project_onto(&pairs.iter().map(|(_, a)| a.as_str()).collect::<Vec<_>>());
            let (r, c) = to_formals(&i0, &pairs);
            let input = normalize(r, c, &self.io_scope(&t.sig()));
            let out = self.lookup(&t.sig(), &input);
            let mut back: Vec<(&str, &str)> = pairs.iter().map(|(f, a)| (f.as_str(), a.as_str())).collect();
            back.push(("out", RHO));
            im = im.join(&out.rename_many(&back, &sc));
            for (idx, _, a) in &pos {
                if self.facts.nonpure(&t.sig()).contains(idx) {
                    nonpure.insert(a.clone());
                }
            }
        }

        let mut vars = sc.ref_vars();
        vars.retain(|v| v != RHO);
        let sharing = |v: &str| -> Vec<&String> { vars.iter().filter(|w| pre.shares(w, v)).collect() };

        let mut reach: BTreeSet<(String, String)> = i.reach.union(&im.reach).cloned().collect();
        let cyclic: BTreeSet<String> = i.cyclic.union(&im.cyclic).cloned().collect();

        // I1: the call makes vi reach vj
        for vi in &nonpure {
            for vj in im.reached_from(vi) {
                let w2s: BTreeSet<String> = if vj == RHO {
                    [RHO.to_string()].into()
                } else {
                    let mut s: BTreeSet<String> = pre.aliases_of(vj).into_iter().filter(|w| vars.contains(w)).collect();
                    s.insert(vj.to_string());
                    s.extend(i.reached_from(vj).into_iter().map(String::from));
                    s
                };
                for w1 in sharing(vi) {
                    for w2 in &w2s {
                        reach.insert((w1.clone(), w2.clone()));
                    }
                }
            }
        }
        // I2: the call makes vi share with vj
        for vi in &nonpure {
            for vj in &actuals {
                if !post.shares(vi, vj) {
                    continue;
                }
                for w2 in i.reached_from(vj) {
                    for w1 in sharing(vi) {
                        reach.insert((w1.clone(), w2.to_string()));
                    }
                }
            }
        }
        let j = AbstractState { reach, cyclic };

        let mut extra = AbstractState::bottom();
        // I3: variables the result may alias
        for v in &vars {
            if post.aliases(v, RHO) {
                extra = extra.join(&j.clone_var(v, RHO, &sc));
            }
        }
        // the result inside or below the actuals
        for (vj, w) in &im.reach {
            if w == RHO && vj != RHO {
                for x in sharing(vj) {
                    extra.add_reach(x, RHO);
                }
            }
            if vj == RHO && w != RHO {
                extra.add_reach(RHO, w);
                for a in pre.aliases_of(w) {
                    if vars.contains(&a) {
                        extra.add_reach(RHO, &a);
                    }
                }
                for x in j.reached_from(w) {
                    extra.add_reach(RHO, x);
                }
            }
        }
        for vk in &actuals {
            if post.shares(RHO, vk) {
                for x in j.reached_from(vk) {
                    extra.add_reach(RHO, x);
                }
                if j.is_cyclic(vk) {
                    extra.add_cyclic(RHO);
                    extra.add_reach(RHO, RHO);
                }
            }
        }
        // I4: anything sharing with an argument that may become cyclic
        for vi in &actuals {
            if im.is_cyclic(vi) {
                for w in sharing(vi) {
                    extra.add_cyclic(w);
                }
            }
        }

        let all = j.join(&extra);
        normalize(all.reach, all.cyclic, &sc)
    }
}
