use std::collections::BTreeSet;

use super::{Analyzer, Body};
use crate::aux::AuxFacts;
use crate::domain::{normalize, AbstractState, Scope, RHO};
use crate::frontend::{Command, CommandKind, Expr, ExprKind, Pos, Ty};

impl<'a> Analyzer<'a> {
    pub(crate) fn ty_of(&self, b: &Body<'a>, e: &Expr) -> Option<Ty> {
        self.tp.type_of(b.scope.base, e)
    }

    /// `b`'s scope extended with ρ of the type of `e` (ρ unbound if `e` is
    /// an int or `null`).
    pub(crate) fn rho_scope(&self, b: &Body<'a>, t: Option<Ty>) -> Scope<'a> {
        b.scope.with(RHO, t.filter(|t| t.is_ref()))
    }

    /// Expression denotation: the result binds ρ. `at` is the position of
    /// the enclosing atomic command, whose facts are used throughout.
    pub fn exp_denote(&mut self, b: &Body<'a>, at: Pos, e: &Expr, i: &AbstractState) -> AbstractState {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Null | ExprKind::New(_) | ExprKind::Read => i.clone(),
            ExprKind::Var(v) => {
                if b.scope.is_ref(v) {
                    let sc = self.rho_scope(b, self.ty_of(b, e));
                    i.clone_var(v, RHO, &sc)
                } else {
                    i.clone()
                }
            }
            ExprKind::Field(v, _) => {
                let t = self.ty_of(b, e);
                if !t.as_ref().is_some_and(|t| t.is_ref()) {
                    return i.clone();
                }
                let sc = self.rho_scope(b, t);
                let pre = &self.facts.point(&b.sig, at).pre;
                let mut st = i.clone_var(v, RHO, &sc);
                for w in b.scope.ref_vars() {
                    if pre.shares(&w, v) {
                        st.add_reach(&w, RHO);
                    }
                }
                if i.is_cyclic(v) {
                    st.add_reach(RHO, RHO);
                }
                st.normalized(&sc)
            }
            ExprKind::Bin(_, l, r) => {
                let s1 = self.exp_denote(b, at, l, i).project_out(&[RHO]);
                self.exp_denote(b, at, r, &s1).project_out(&[RHO])
            }
            ExprKind::Call { .. } => self.call_denote(b, e, i),
        }
    }

    /// Command denotation.
    pub fn com_denote(&mut self, b: &Body<'a>, c: &Command, i: &AbstractState) -> AbstractState {
        let out = match &c.kind {
            CommandKind::Skip => i.clone(),
            CommandKind::Assign(v, e) => self.assign(b, c.pos, v, e, i),
            CommandKind::Return(e) => self.assign(b, c.pos, "out", e, i),
            CommandKind::FieldAssign(v, f, e) => self.field_update(b, c.pos, v, f, e, i),
            CommandKind::Eval(e) => self.exp_denote(b, c.pos, e, i).project_out(&[RHO]),
            CommandKind::Seq(cs) => {
                let mut st = i.clone();
                for c in cs {
                    st = self.com_denote(b, c, &st);
                }
                return st;
            }
            CommandKind::If(g, t, f) => {
                let st = self.exp_denote(b, c.pos, g, i).project_out(&[RHO]);
                self.record(&b.sig, c.pos, &st);
                let x = self.com_denote(b, t, &st);
                let y = self.com_denote(b, f, &st);
                return x.join(&y);
            }
            CommandKind::While(g, body) => {
                let mut x = i.clone();
                let mut iterates = vec![x.clone()];
                loop {
                    let st = self.exp_denote(b, c.pos, g, &x).project_out(&[RHO]);
                    let y = self.com_denote(b, body, &st);
                    let next = x.join(&y);
                    iterates.push(next.clone());
                    if next == x {
                        break;
                    }
                    x = next;
                }
                self.record(&b.sig, c.pos, &x);
                self.record_loop(&b.sig, c.pos, iterates);
                return x;
            }
        };
        self.record(&b.sig, c.pos, &out);
        out
    }

    fn assign(&mut self, b: &Body<'a>, at: Pos, v: &str, e: &Expr, i: &AbstractState) -> AbstractState {
        let st = self.exp_denote(b, at, e, i).project_out(&[v]);
        st.rename(RHO, v, &b.scope)
    }

    /// `v.f := e`.
    pub fn field_update(&mut self, b: &Body<'a>, at: Pos, v: &str, f: &str, e: &Expr, i: &AbstractState) -> AbstractState {
        let i0 = self.exp_denote(b, at, e, i);
        let class = b.scope.ty(v).and_then(|t| t.class()).unwrap_or_default().to_string();
        if !self.tp.field_ty(&class, f).is_some_and(|t| t.is_ref()) {
            return i0.project_out(&[RHO]);
        }
        let sc = self.rho_scope(b, self.ty_of(b, e));
        let i1 = if self.opts.single_field_opt {
            self.cond_remove(&sc, &i0, v, f)
        } else {
            i0
        };
        let facts: &AuxFacts = &self.facts.point(&b.sig, at).exp;
        let mut vars: Vec<String> = sc.ref_vars();
        if !vars.iter().any(|x| x == RHO) {
            vars.push(RHO.to_string());
        }
        let w1s: Vec<&String> = vars.iter().filter(|w| facts.aliases(w, v) || i1.reaches(w, v)).collect();
        let w2s: Vec<&String> = vars
            .iter()
            .filter(|w| facts.aliases(RHO, w) || i1.reaches(RHO, w))
            .collect();
        let mut reach = i1.reach.clone();
        let mut cyclic = i1.cyclic.clone();
        for w1 in &w1s {
            for w2 in &w2s {
                reach.insert((w1.to_string(), w2.to_string()));
            }
        }
        if i1.reaches(RHO, v) || facts.aliases(RHO, v) || i1.is_cyclic(RHO) {
            for w in &w1s {
                cyclic.insert(w.to_string());
            }
        }
        normalize(reach, cyclic, &sc).project_out(&[RHO])
    }

    /// Single-field optimization for an update of `v.f`.
    pub fn cond_remove(&self, u: &Scope<'a>, i: &AbstractState, v: &str, f: &str) -> AbstractState {
        let Some(Ty::Class(k)) = u.ty(v).cloned() else {
            return i.clone();
        };
        // declared types of the reference fields other than f, per subclass
        let others: Vec<Vec<Ty>> = self
            .graph
            .subs(&k)
            .iter()
            .map(|k2| {
                self.tp
                    .all_fields(k2)
                    .iter()
                    .filter(|p| p.ty.is_ref() && p.name != f)
                    .map(|p| p.ty.clone())
                    .collect()
            })
            .collect();
        let drop_cycle = others.iter().all(|fs| fs.iter().all(|t| !self.graph.ty_cyclic(t)));
        let mut out = i.clone();
        if drop_cycle {
            out.cyclic.remove(v);
        }
        let targets: BTreeSet<String> = i.reached_from(v).into_iter().map(String::from).collect();
        for w in targets {
            let Some(tw) = u.ty(&w) else { continue };
            let only_f = others.iter().all(|fs| fs.iter().all(|t| !self.graph.ty_reaches_eps(t, tw)));
            if only_f {
                out.reach.remove(&(v.to_string(), w.clone()));
            }
        }
        out.normalized(u)
    }
}
