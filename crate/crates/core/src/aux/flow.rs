use std::collections::{BTreeMap, BTreeSet};

use super::facts::AuxFacts;
use super::{CallFacts, PointFacts};
use crate::class_graph::ClassGraph;
use crate::domain::{shallow, Scope, RHO};
use crate::frontend::{Command, CommandKind, Expr, ExprKind, MethodDecl, Pos, Ty, TypedProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Every input may share with and alias every other input. Gives facts
    /// that hold for all calling contexts.
    Conservative,
    /// Formals start disjoint, so sharing records which formals a value was
    /// reached from. Used for call summaries and purity.
    Derived,
}

/// Name used for formal `i` inside summaries: `this` or the shallow copy.
pub(crate) fn formal_key(m: &MethodDecl, i: usize) -> Option<String> {
    if i == 0 {
        return Some("this".into());
    }
    let p = &m.params[i - 1];
    p.ty.is_ref().then(|| shallow(&p.name))
}

pub(crate) struct Ctx<'a> {
    pub tp: &'a TypedProgram,
    pub graph: &'a ClassGraph,
    pub summaries: &'a BTreeMap<String, AuxFacts>,
    pub nonpure: &'a BTreeMap<String, BTreeSet<usize>>,
}

pub(crate) struct MethodRun<'a> {
    ctx: &'a Ctx<'a>,
    m: &'a MethodDecl,
    scope: Scope<'a>,
    keys: Vec<(usize, String)>,
    pub points: BTreeMap<Pos, PointFacts>,
    pub calls: BTreeMap<Pos, CallFacts>,
    pub nonpure: BTreeSet<usize>,
}

impl<'a> MethodRun<'a> {
    pub fn new(ctx: &'a Ctx<'a>, m: &'a MethodDecl) -> Self {
        let mut scope = Scope::new(ctx.graph, ctx.tp.env(&m.sig()));
        for p in &m.params {
            if p.ty.is_ref() {
                scope = scope.with(&shallow(&p.name), Some(p.ty.clone()));
            }
        }
        let keys = (0..=m.params.len())
            .filter_map(|i| formal_key(m, i).map(|k| (i, k)))
            .collect();
        MethodRun {
            ctx,
            m,
            scope,
            keys,
            points: BTreeMap::new(),
            calls: BTreeMap::new(),
            nonpure: BTreeSet::new(),
        }
    }

    pub fn entry(&self, mode: Mode) -> AuxFacts {
        let mut s = AuxFacts::new();
        let refs: Vec<String> = self
            .m
            .params
            .iter()
            .filter(|p| p.ty.is_ref())
            .map(|p| p.name.clone())
            .collect();
        for w in &refs {
            s.add_alias(w, &shallow(w), &self.scope);
        }
        if mode == Mode::Conservative {
            let mut all = vec!["this".to_string()];
            for w in &refs {
                all.push(w.clone());
                all.push(shallow(w));
            }
            for a in &all {
                for b in &all {
                    s.add_share(a, b, &self.scope);
                    s.add_alias(a, b, &self.scope);
                }
            }
        }
        s
    }

    /// Runs the body; returns the exit facts.
    pub fn run(&mut self, mode: Mode) -> AuxFacts {
        let s = self.entry(mode);
        self.com(&s, &self.m.body)
    }

    /// Exit facts restricted to `this`, the shallow formals and `out`.
    pub fn summary(&self, exit: &AuxFacts) -> AuxFacts {
        let mut keep: BTreeSet<String> = self.keys.iter().map(|(_, k)| k.clone()).collect();
        keep.insert("out".into());
        exit.restrict(&keep)
    }

    fn rho_scope(&self, t: Option<Ty>) -> Scope<'a> {
        self.scope.with(RHO, t.filter(|t| t.is_ref()))
    }

    fn type_of(&self, e: &Expr) -> Option<Ty> {
        self.ctx.tp.type_of(self.scope.base, e)
    }

    fn record(&mut self, c: &Command, pre: &AuxFacts, exp: &AuxFacts, rho_var: Option<String>) {
        let entry = self.points.entry(c.pos).or_insert_with(|| PointFacts {
            pre: AuxFacts::new(),
            exp: AuxFacts::new(),
            rho_var: rho_var.clone(),
        });
        entry.pre.union_with(pre);
        entry.exp.union_with(exp);
    }

    fn mark_updated(&mut self, s: &AuxFacts, v: &str) {
        let sh = s.sharers(v);
        for (i, k) in &self.keys {
            if sh.contains(k) {
                self.nonpure.insert(*i);
            }
        }
    }

    fn exp(&mut self, s: &AuxFacts, e: &Expr) -> AuxFacts {
        let mut s = s.clone();
        s.kill(RHO);
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Null | ExprKind::Read | ExprKind::New(_) => s,
            ExprKind::Var(x) => {
                if self.scope.is_ref(x) {
                    let sc = self.rho_scope(self.type_of(e));
                    let pre = s.clone();
                    for a in pre.aliases_of(x) {
                        s.add_alias(RHO, &a, &sc);
                    }
                    for b in pre.sharers(x) {
                        s.add_share(RHO, &b, &sc);
                    }
                }
                s
            }
            ExprKind::Field(v, _) => {
                let t = self.type_of(e);
                if t.as_ref().is_some_and(|t| t.is_ref()) {
                    let sc = self.rho_scope(t);
                    // ρ lies somewhere in v's structure: it may be any of it.
                    for b in s.clone().sharers(v) {
                        s.add_share(RHO, &b, &sc);
                        s.add_alias(RHO, &b, &sc);
                    }
                }
                s
            }
            ExprKind::Bin(_, a, b) => {
                let mut s = self.exp(&s, a);
                s.kill(RHO);
                let mut s = self.exp(&s, b);
                s.kill(RHO);
                s
            }
            ExprKind::Call { .. } => self.call(&s, e),
        }
    }

    fn call(&mut self, s: &AuxFacts, e: &Expr) -> AuxFacts {
        let ExprKind::Call { recv, method, args } = &e.kind else {
            unreachable!()
        };
        let ret = self.type_of(e);
        let ret_ref = ret.as_ref().is_some_and(|t| t.is_ref());
        let sc = self.rho_scope(ret);
        let class = self.scope.ty(recv).and_then(|t| t.class()).unwrap_or_default().to_string();
        let targets = self.ctx.tp.dispatch_targets(&class, method);
        let actual = |i: usize| -> Option<&str> {
            if i == 0 {
                Some(recv.as_str())
            } else {
                Some(args[i - 1].as_str()).filter(|a| self.scope.is_ref(a))
            }
        };
        let empty_sum = AuxFacts::new();
        let empty_np = BTreeSet::new();
        let mut post = s.clone();
        let mut updated: Vec<String> = Vec::new();
        for t in targets {
            let sum = self.ctx.summaries.get(&t.sig()).unwrap_or(&empty_sum);
            let np = self.ctx.nonpure.get(&t.sig()).unwrap_or(&empty_np);
            let formals: Vec<(usize, String, &str)> = (0..=t.params.len())
                .filter_map(|i| Some((i, formal_key(t, i)?, actual(i)?)))
                .collect();
            for (i, ki, ai) in &formals {
                for (j, kj, aj) in &formals {
                    if i < j && sum.shares(ki, kj) {
                        post.merge(&s.sharers(ai), &s.sharers(aj), &sc);
                    }
                }
                if np.contains(i) {
                    post.merge(&s.sharers(ai), &s.sharers(ai), &sc);
                    updated.push(ai.to_string());
                }
                if ret_ref && sum.shares("out", ki) {
                    for x in s.sharers(ai) {
                        post.add_share(RHO, &x, &sc);
                        post.add_alias(RHO, &x, &sc);
                    }
                }
            }
        }
        for a in updated {
            self.mark_updated(s, &a);
        }
        let entry = self.calls.entry(e.pos).or_default();
        entry.pre.union_with(s);
        entry.post.union_with(&post);
        post
    }

    fn assign(&mut self, c: &Command, s: &AuxFacts, x: &str, e: &Expr) -> AuxFacts {
        let mut s1 = self.exp(s, e);
        self.record(c, s, &s1, rho_var(e));
        s1.kill(x);
        s1.rename(RHO, x);
        s1
    }

    pub fn com(&mut self, s: &AuxFacts, c: &Command) -> AuxFacts {
        match &c.kind {
            CommandKind::Skip => s.clone(),
            CommandKind::Assign(x, e) => self.assign(c, s, x, e),
            CommandKind::Return(e) => self.assign(c, s, "out", e),
            CommandKind::FieldAssign(v, f, e) => {
                let mut s1 = self.exp(s, e);
                self.record(c, s, &s1, rho_var(e));
                // structures holding v's object before the link is made
                self.mark_updated(&s1, v);
                let class = self.scope.ty(v).and_then(|t| t.class()).unwrap_or_default().to_string();
                if self.ctx.tp.field_ty(&class, f).is_some_and(|t| t.is_ref()) {
                    let sc = self.rho_scope(self.type_of(e));
                    let (a, b) = (s1.sharers(v), s1.sharers(RHO));
                    s1.merge(&a, &b, &sc);
                }
                s1.kill(RHO);
                s1
            }
            CommandKind::Eval(e) => {
                let mut s1 = self.exp(s, e);
                self.record(c, s, &s1, None);
                s1.kill(RHO);
                s1
            }
            CommandKind::Seq(cs) => {
                let mut s = s.clone();
                for c in cs {
                    s = self.com(&s, c);
                }
                s
            }
            CommandKind::If(_, a, b) => {
                self.record(c, s, s, None);
                let mut out = self.com(s, a);
                out.union_with(&self.com(s, b));
                out
            }
            CommandKind::While(_, body) => {
                let mut x = s.clone();
                loop {
                    self.record(c, &x, &x, None);
                    let y = self.com(&x, body);
                    let mut nx = x.clone();
                    nx.union_with(&y);
                    if nx == x {
                        return x;
                    }
                    x = nx;
                }
            }
        }
    }
}

fn rho_var(e: &Expr) -> Option<String> {
    match &e.kind {
        ExprKind::Var(x) => Some(x.clone()),
        _ => None,
    }
}

/// Reference formals (other than `this`) not assigned on any path reaching
/// each atomic command: there the shallow copy still equals the formal.
pub(crate) fn intact_points(m: &MethodDecl) -> BTreeMap<Pos, BTreeSet<String>> {
    fn assigned(c: &Command, out: &mut BTreeSet<String>) {
        c.for_each_atomic(&mut |a| {
            if let CommandKind::Assign(x, _) = &a.kind {
                out.insert(x.clone());
            }
        });
    }
    fn walk(c: &Command, done: &mut BTreeSet<String>, formals: &BTreeSet<String>, out: &mut BTreeMap<Pos, BTreeSet<String>>) {
        match &c.kind {
            CommandKind::Seq(cs) => cs.iter().for_each(|c| walk(c, done, formals, out)),
            CommandKind::If(_, a, b) => {
                out.insert(c.pos, formals.difference(done).cloned().collect());
                let mut d2 = done.clone();
                walk(a, done, formals, out);
                walk(b, &mut d2, formals, out);
                done.extend(d2);
            }
            CommandKind::While(_, body) => {
                assigned(body, done);
                out.insert(c.pos, formals.difference(done).cloned().collect());
                walk(body, done, formals, out);
            }
            CommandKind::Assign(x, _) => {
                out.insert(c.pos, formals.difference(done).cloned().collect());
                done.insert(x.clone());
            }
            _ => {
                out.insert(c.pos, formals.difference(done).cloned().collect());
            }
        }
    }
    let formals: BTreeSet<String> = m.params.iter().filter(|p| p.ty.is_ref()).map(|p| p.name.clone()).collect();
    let mut out = BTreeMap::new();
    walk(&m.body, &mut BTreeSet::new(), &formals, &mut out);
    out
}
