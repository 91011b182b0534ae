use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::FrontendError;

pub type TypeEnv = BTreeMap<String, Ty>;

/// A program that passed type checking, with the class hierarchy and the
/// per-method type environments materialized.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub program: Program,
    supers: BTreeMap<String, Option<String>>,
    fields: BTreeMap<String, Vec<Param>>,
    methods: BTreeMap<String, MethodDecl>,
    envs: BTreeMap<String, TypeEnv>,
}

pub fn typecheck(program: Program) -> Result<TypedProgram, FrontendError> {
    let mut supers = BTreeMap::new();
    for c in &program.classes {
        if let Some(s) = &c.extends {
            if program.class(s).is_none() {
                return Err(FrontendError::new(c.pos, format!("unknown class `{s}`")));
            }
        }
        supers.insert(c.name.clone(), c.extends.clone());
    }
    for c in &program.classes {
        let mut seen = BTreeSet::new();
        let mut cur = Some(c.name.clone());
        while let Some(k) = cur {
            if !seen.insert(k.clone()) {
                return Err(FrontendError::new(
                    c.pos,
                    format!("cyclic inheritance involving `{}`", c.name),
                ));
            }
            cur = supers[&k].clone();
        }
    }
    let mut tp = TypedProgram {
        program,
        supers,
        fields: BTreeMap::new(),
        methods: BTreeMap::new(),
        envs: BTreeMap::new(),
    };
    tp.collect_fields()?;
    tp.collect_methods()?;
    let methods: Vec<MethodDecl> = tp.methods.values().cloned().collect();
    for m in &methods {
        let env = tp.envs[&m.sig()].clone();
        Checker { tp: &tp, env: &env, m }.command(&m.body)?;
    }
    Ok(tp)
}

impl TypedProgram {
    fn collect_fields(&mut self) -> Result<(), FrontendError> {
        let names = self.program.class_names();
        for name in &names {
            let mut chain = self.ancestors(name);
            chain.reverse();
            let mut all: Vec<Param> = Vec::new();
            for k in chain {
                let decl = self.program.class(&k).unwrap();
                for f in &decl.fields {
                    self.check_ty(&f.ty, decl.pos)?;
                    if all.iter().any(|g| g.name == f.name) {
                        return Err(FrontendError::new(
                            decl.pos,
                            format!("field `{}` of `{k}` redeclares an inherited field", f.name),
                        ));
                    }
                    all.push(f.clone());
                }
            }
            self.fields.insert(name.clone(), all);
        }
        Ok(())
    }

    fn collect_methods(&mut self) -> Result<(), FrontendError> {
        for c in self.program.classes.clone() {
            for m in &c.methods {
                self.check_ty(&m.ret, m.pos)?;
                for p in m.params.iter().chain(&m.locals) {
                    self.check_ty(&p.ty, m.pos)?;
                }
                if let Some(sup) = &c.extends {
                    if let Some(o) = self.lookup(sup, &m.name) {
                        let same = o.ret == m.ret
                            && o.params.len() == m.params.len()
                            && o.params.iter().zip(&m.params).all(|(a, b)| a.ty == b.ty);
                        if !same {
                            return Err(FrontendError::new(
                                m.pos,
                                format!("`{}` overrides `{}` with a different signature", m.sig(), o.sig()),
                            ));
                        }
                    }
                }
                let mut env = TypeEnv::new();
                env.insert("this".into(), Ty::Class(c.name.clone()));
                for p in m.params.iter().chain(&m.locals) {
                    env.insert(p.name.clone(), p.ty.clone());
                }
                env.insert("out".into(), m.ret.clone());
                self.envs.insert(m.sig(), env);
                self.methods.insert(m.sig(), m.clone());
            }
        }
        Ok(())
    }

    fn check_ty(&self, t: &Ty, pos: Pos) -> Result<(), FrontendError> {
        match t {
            Ty::Class(c) if !self.supers.contains_key(c) => {
                Err(FrontendError::new(pos, format!("unknown class `{c}`")))
            }
            _ => Ok(()),
        }
    }

    /// The class itself followed by its superclasses.
    pub fn ancestors(&self, class: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(class.to_string());
        while let Some(k) = cur {
            cur = self.supers.get(&k).cloned().flatten();
            out.push(k);
        }
        out
    }

    pub fn has_class(&self, c: &str) -> bool {
        self.supers.contains_key(c)
    }

    pub fn classes(&self) -> impl Iterator<Item = &String> {
        self.supers.keys()
    }

    /// Reflexive-transitive subclass relation; false for unknown names.
    pub fn is_sub(&self, a: &str, b: &str) -> bool {
        self.has_class(a) && self.ancestors(a).iter().any(|k| k == b)
    }

    pub fn subclass_of(&self, a: &str, b: &str) -> Result<bool, FrontendError> {
        for c in [a, b] {
            if !self.has_class(c) {
                return Err(FrontendError::new(Pos::default(), format!("unknown class `{c}`")));
            }
        }
        Ok(self.is_sub(a, b))
    }

    /// All classes κ' with κ' ≼ `class`, including `class`.
    pub fn subclasses(&self, class: &str) -> Vec<String> {
        self.supers.keys().filter(|k| self.is_sub(k, class)).cloned().collect()
    }

    /// Fields of a class, inherited ones first.
    pub fn all_fields(&self, class: &str) -> &[Param] {
        self.fields.get(class).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn field_ty(&self, class: &str, field: &str) -> Option<&Ty> {
        self.all_fields(class).iter().find(|f| f.name == field).map(|f| &f.ty)
    }

    pub fn method(&self, sig: &str) -> Option<&MethodDecl> {
        self.methods.get(sig)
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodDecl> {
        self.methods.values()
    }

    /// Finds a method by bare name (`insert`) or signature (`OrderedList.insert`).
    pub fn find_method(&self, name: &str) -> Vec<&MethodDecl> {
        if let Some(m) = self.methods.get(name) {
            return vec![m];
        }
        self.methods.values().filter(|m| m.name == name).collect()
    }

    pub fn env(&self, sig: &str) -> &TypeEnv {
        &self.envs[sig]
    }

    /// Closest definition of `name` in `class` or one of its ancestors.
    pub fn lookup(&self, class: &str, name: &str) -> Option<&MethodDecl> {
        self.ancestors(class)
            .iter()
            .find_map(|k| self.methods.get(&format!("{k}.{name}")))
    }

    /// Every method body that a call `v.name(..)` with `v: class` may run.
    pub fn dispatch_targets(&self, class: &str, name: &str) -> Vec<&MethodDecl> {
        let mut out: Vec<&MethodDecl> = Vec::new();
        for k in self.subclasses(class) {
            if let Some(m) = self.lookup(&k, name) {
                if !out.iter().any(|o| o.sig() == m.sig()) {
                    out.push(m);
                }
            }
        }
        out.sort_by_key(|m| m.sig());
        out
    }

    /// `to := from` is well typed (`None` stands for `null`).
    pub fn assignable(&self, to: &Ty, from: Option<&Ty>) -> bool {
        match (to, from) {
            (Ty::Int, Some(Ty::Int)) => true,
            (Ty::Class(_), None) => true,
            (Ty::Class(c), Some(Ty::Class(d))) => self.is_sub(d, c),
            _ => false,
        }
    }

    /// Static type of a well-typed expression; `None` for `null`.
    pub fn type_of(&self, env: &TypeEnv, e: &Expr) -> Option<Ty> {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Read | ExprKind::Bin(..) => Some(Ty::Int),
            ExprKind::Null => None,
            ExprKind::Var(v) => env.get(v).cloned(),
            ExprKind::Field(v, f) => {
                let c = env.get(v)?.class()?.to_string();
                self.field_ty(&c, f).cloned()
            }
            ExprKind::New(c) => Some(Ty::Class(c.clone())),
            ExprKind::Call { recv, method, .. } => {
                let c = env.get(recv)?.class()?.to_string();
                self.lookup(&c, method).map(|m| m.ret.clone())
            }
        }
    }
}

struct Checker<'a> {
    tp: &'a TypedProgram,
    env: &'a TypeEnv,
    m: &'a MethodDecl,
}

impl Checker<'_> {
    fn err<T>(&self, pos: Pos, msg: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::new(pos, msg))
    }

    fn var(&self, v: &str, pos: Pos) -> Result<&Ty, FrontendError> {
        if v == "out" {
            return self.err(pos, "`out` cannot be used directly; use `return`");
        }
        match self.env.get(v) {
            Some(t) => Ok(t),
            None => self.err(pos, format!("unknown variable `{v}` in `{}`", self.m.sig())),
        }
    }

    fn class_of(&self, v: &str, pos: Pos) -> Result<String, FrontendError> {
        match self.var(v, pos)? {
            Ty::Class(c) => Ok(c.clone()),
            Ty::Int => self.err(pos, format!("`{v}` has type int, expected an object")),
        }
    }

    fn command(&self, c: &Command) -> Result<(), FrontendError> {
        match &c.kind {
            CommandKind::Skip => Ok(()),
            CommandKind::Seq(cs) => cs.iter().try_for_each(|c| self.command(c)),
            CommandKind::Assign(v, e) => {
                if v == "this" {
                    return self.err(c.pos, "`this` cannot be assigned");
                }
                let t = self.var(v, c.pos)?.clone();
                let et = self.expr(e, false)?;
                self.check_assign(&t, et.as_ref(), c.pos)
            }
            CommandKind::FieldAssign(v, f, e) => {
                let k = self.class_of(v, c.pos)?;
                let Some(t) = self.tp.field_ty(&k, f).cloned() else {
                    return self.err(c.pos, format!("class `{k}` has no field `{f}`"));
                };
                let et = self.expr(e, false)?;
                self.check_assign(&t, et.as_ref(), c.pos)
            }
            CommandKind::If(e, a, b) => {
                self.cond(e)?;
                self.command(a)?;
                self.command(b)
            }
            CommandKind::While(e, body) => {
                self.cond(e)?;
                self.command(body)
            }
            CommandKind::Return(e) => {
                let et = self.expr(e, false)?;
                self.check_assign(&self.m.ret, et.as_ref(), c.pos)
            }
            CommandKind::Eval(e) => {
                if !matches!(e.kind, ExprKind::Call { .. }) {
                    return self.err(c.pos, "only calls may be used as statements");
                }
                self.expr(e, false).map(|_| ())
            }
        }
    }

    fn check_assign(&self, to: &Ty, from: Option<&Ty>, pos: Pos) -> Result<(), FrontendError> {
        if self.tp.assignable(to, from) {
            return Ok(());
        }
        let from = from.map(|t| t.to_string()).unwrap_or_else(|| "null".into());
        self.err(pos, format!("cannot assign {from} to {to}"))
    }

    fn cond(&self, e: &Expr) -> Result<(), FrontendError> {
        if e.contains_call_or_new() {
            return self.err(e.pos, "conditions may not allocate objects or call methods");
        }
        match self.expr(e, true)? {
            Some(Ty::Int) => Ok(()),
            _ => self.err(e.pos, "condition must have type int"),
        }
    }

    fn expr(&self, e: &Expr, in_cond: bool) -> Result<Option<Ty>, FrontendError> {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Read => Ok(Some(Ty::Int)),
            ExprKind::Null => Ok(None),
            ExprKind::Var(v) => Ok(Some(self.var(v, e.pos)?.clone())),
            ExprKind::Field(v, f) => {
                let k = self.class_of(v, e.pos)?;
                match self.tp.field_ty(&k, f) {
                    Some(t) => Ok(Some(t.clone())),
                    None => self.err(e.pos, format!("class `{k}` has no field `{f}`")),
                }
            }
            ExprKind::New(c) => {
                if !self.tp.has_class(c) {
                    return self.err(e.pos, format!("unknown class `{c}`"));
                }
                Ok(Some(Ty::Class(c.clone())))
            }
            ExprKind::Bin(op, a, b) => {
                let ta = self.expr(a, in_cond)?;
                let tb = self.expr(b, in_cond)?;
                let ints = ta == Some(Ty::Int) && tb == Some(Ty::Int);
                if ints {
                    return Ok(Some(Ty::Int));
                }
                let refs = !matches!(ta, Some(Ty::Int)) && !matches!(tb, Some(Ty::Int));
                if refs && matches!(op, BinOp::Eq | BinOp::Ne) {
                    if !in_cond {
                        return self.err(e.pos, "reference comparison is only allowed in conditions");
                    }
                    return Ok(Some(Ty::Int));
                }
                self.err(e.pos, format!("operator `{}` applied to incompatible operands", op.symbol()))
            }
            ExprKind::Call { recv, method, args } => {
                let k = self.class_of(recv, e.pos)?;
                let Some(m) = self.tp.lookup(&k, method) else {
                    return self.err(e.pos, format!("class `{k}` has no method `{method}`"));
                };
                if m.params.len() != args.len() {
                    return self.err(
                        e.pos,
                        format!("`{}` expects {} arguments, got {}", m.sig(), m.params.len(), args.len()),
                    );
                }
                for (p, a) in m.params.iter().zip(args) {
                    let at = self.var(a, e.pos)?.clone();
                    if !self.tp.assignable(&p.ty, Some(&at)) {
                        return self.err(
                            e.pos,
                            format!("argument `{a}` of type {at} does not match parameter `{}`", p.name),
                        );
                    }
                }
                Ok(Some(m.ret.clone()))
            }
        }
    }
}
