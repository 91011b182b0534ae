//! Random well-typed programs for the differential check.
//!
//! Programs have at most three classes. Methods are stratified by level so
//! that a method only calls methods of a lower level: no recursion and call
//! chains of length at most two. Field accesses on variables other than
//! `this` are guarded by a null test.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_classes: usize,
    pub max_methods: usize,
    pub max_stmts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_classes: 3,
            max_methods: 4,
            max_stmts: 6,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum T {
    Int,
    C(usize),
}

struct Class {
    parent: Option<usize>,
    /// Reference fields declared here.
    refs: Vec<(String, usize)>,
    int_field: Option<String>,
}

#[derive(Clone)]
struct Method {
    name: String,
    class: usize,
    params: Vec<T>,
    ret: T,
    level: usize,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    classes: Vec<Class>,
    methods: Vec<Method>,
    cfg: GenConfig,
}

/// Variables of the method being generated.
struct Vars {
    list: Vec<(String, T)>,
    level: usize,
}

impl Vars {
    fn of(&self, pred: impl Fn(T) -> bool) -> Vec<&(String, T)> {
        self.list.iter().filter(|(_, t)| pred(*t)).collect()
    }
}

fn cname(k: usize) -> String {
    format!("K{k}")
}

fn tname(t: T) -> String {
    match t {
        T::Int => "int".into(),
        T::C(k) => cname(k),
    }
}

impl<R: Rng> Gen<'_, R> {
    fn is_sub(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(a);
        while let Some(k) = cur {
            if k == b {
                return true;
            }
            cur = self.classes[k].parent;
        }
        false
    }

    fn assignable(&self, from: T, to: T) -> bool {
        match (from, to) {
            (T::Int, T::Int) => true,
            (T::C(a), T::C(b)) => self.is_sub(a, b),
            _ => false,
        }
    }

    /// Reference fields of `k`, inherited ones included.
    fn ref_fields(&self, k: usize) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        let mut cur = Some(k);
        while let Some(c) = cur {
            out.extend(self.classes[c].refs.iter().cloned());
            cur = self.classes[c].parent;
        }
        out
    }

    fn int_fields(&self, k: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(k);
        while let Some(c) = cur {
            out.extend(self.classes[c].int_field.iter().cloned());
            cur = self.classes[c].parent;
        }
        out
    }

    /// Method `name` as seen from class `k`.
    fn visible(&self, k: usize, name: &str) -> Option<&Method> {
        let mut cur = Some(k);
        while let Some(c) = cur {
            if let Some(m) = self.methods.iter().find(|m| m.class == c && m.name == name) {
                return Some(m);
            }
            cur = self.classes[c].parent;
        }
        None
    }

    fn ref_ty(&mut self) -> T {
        T::C(self.rng.gen_range(0..self.classes.len()))
    }

    fn any_ty(&mut self) -> T {
        if self.rng.gen_bool(0.25) {
            T::Int
        } else {
            self.ref_ty()
        }
    }

    fn classes(&mut self) {
        let n = self.rng.gen_range(1..=self.cfg.max_classes);
        for k in 0..n {
            let parent = if k > 0 && self.rng.gen_bool(0.3) {
                Some(self.rng.gen_range(0..k))
            } else {
                None
            };
            self.classes.push(Class {
                parent,
                refs: Vec::new(),
                int_field: None,
            });
        }
        let mut field = 0;
        for k in 0..n {
            let nrefs = self.rng.gen_range(if self.classes[k].parent.is_some() { 0 } else { 1 }..=2);
            for _ in 0..nrefs {
                let t = self.rng.gen_range(0..n);
                self.classes[k].refs.push((format!("f{field}"), t));
                field += 1;
            }
            if self.rng.gen_bool(0.5) {
                self.classes[k].int_field = Some(format!("v{field}"));
                field += 1;
            }
        }
    }

    fn signatures(&mut self) {
        let n = self.rng.gen_range(1..=self.cfg.max_methods);
        for j in 0..n {
            let class = self.rng.gen_range(0..self.classes.len());
            let np = self.rng.gen_range(0..=2);
            let params = (0..np).map(|_| self.any_ty()).collect();
            let ret = self.any_ty();
            let level = self.rng.gen_range(0..=2);
            self.methods.push(Method {
                name: format!("m{j}"),
                class,
                params,
                ret,
                level,
            });
        }
        // overrides in subclasses, same signature and level
        let base = self.methods.clone();
        for m in base {
            for k in 0..self.classes.len() {
                if k != m.class && self.is_sub(k, m.class) && self.rng.gen_bool(0.4) {
                    self.methods.push(Method { class: k, ..m.clone() });
                }
            }
        }
    }

    fn program(&mut self) -> String {
        self.classes();
        self.signatures();
        let mut s = String::new();
        for k in 0..self.classes.len() {
            let c = &self.classes[k];
            match c.parent {
                Some(p) => writeln!(s, "class {} extends {} {{", cname(k), cname(p)).unwrap(),
                None => writeln!(s, "class {} {{", cname(k)).unwrap(),
            }
            for (f, t) in &c.refs {
                writeln!(s, "  {} {f};", cname(*t)).unwrap();
            }
            if let Some(f) = &c.int_field {
                writeln!(s, "  int {f};").unwrap();
            }
            let ms: Vec<Method> = self.methods.iter().filter(|m| m.class == k).cloned().collect();
            for m in ms {
                self.method(&mut s, &m);
            }
            writeln!(s, "}}").unwrap();
        }
        s
    }

    fn method(&mut self, s: &mut String, m: &Method) {
        let params: Vec<String> = m
            .params
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{} p{i}", tname(*t)))
            .collect();
        let mut vars = Vars {
            list: vec![("this".into(), T::C(m.class))],
            level: m.level,
        };
        for (i, t) in m.params.iter().enumerate() {
            vars.list.push((format!("p{i}"), *t));
        }
        let nl = self.rng.gen_range(1..=3);
        let mut decls = String::new();
        for i in 0..nl {
            let t = self.ref_ty();
            write!(decls, " {} l{i};", tname(t)).unwrap();
            vars.list.push((format!("l{i}"), t));
        }
        decls.push_str(" int i, k;");
        vars.list.push(("i".into(), T::Int));
        writeln!(s, "  {} {}({}) {{{decls}", tname(m.ret), m.name, params.join(", ")).unwrap();
        let n = self.rng.gen_range(1..=self.cfg.max_stmts);
        for _ in 0..n {
            let st = self.stmt(&vars, true);
            writeln!(s, "    {st};").unwrap();
        }
        let ret = self.value(&vars, m.ret);
        writeln!(s, "    return {ret}").unwrap();
        writeln!(s, "  }}").unwrap();
    }

    /// A variable, `null`, `new K` or an integer of a type assignable to `to`.
    fn value(&mut self, vars: &Vars, to: T) -> String {
        if to == T::Int {
            return if self.rng.gen_bool(0.5) { "i".into() } else { self.rng.gen_range(0..3).to_string() };
        }
        let cands: Vec<String> = vars
            .of(|t| self.assignable(t, to))
            .into_iter()
            .map(|(v, _)| v.clone())
            .collect();
        let T::C(k) = to else { unreachable!() };
        match self.rng.gen_range(0..4) {
            0 => "null".into(),
            1 => {
                let subs: Vec<usize> = (0..self.classes.len()).filter(|&c| self.is_sub(c, k)).collect();
                format!("new {}", cname(*subs.choose(self.rng).unwrap()))
            }
            _ => cands.choose(self.rng).cloned().unwrap_or_else(|| "null".into()),
        }
    }

    /// A variable other than `this` that can hold a value of type `from`
    /// (any reference variable if `from` is `None`).
    fn target(&mut self, vars: &Vars, from: Option<T>) -> Option<(String, T)> {
        let c: Vec<(String, T)> = vars
            .list
            .iter()
            .filter(|(v, t)| {
                v != "this"
                    && match from {
                        Some(f) => self.assignable(f, *t),
                        None => *t != T::Int,
                    }
            })
            .cloned()
            .collect();
        c.choose(self.rng).cloned()
    }

    fn guard(v: &str, body: String) -> String {
        if v == "this" {
            body
        } else {
            format!("if ({v} != null) then {{ {body} }}")
        }
    }

    fn stmt(&mut self, vars: &Vars, loops: bool) -> String {
        for _ in 0..20 {
            if let Some(s) = self.try_stmt(vars, loops) {
                return s;
            }
        }
        "i := i + 1".into()
    }

    fn try_stmt(&mut self, vars: &Vars, loops: bool) -> Option<String> {
        let refs: Vec<(String, usize)> = vars
            .list
            .iter()
            .filter_map(|(v, t)| match t {
                T::C(k) => Some((v.clone(), *k)),
                T::Int => None,
            })
            .collect();
        match self.rng.gen_range(0..10) {
            0 => {
                let (x, t) = self.target(vars, None)?;
                Some(format!("{x} := {}", self.value(vars, t)))
            }
            1 | 2 => {
                let (y, k) = refs.choose(self.rng)?.clone();
                let (f, ft) = self.ref_fields(k).choose(self.rng)?.clone();
                let (x, _) = self.target(vars, Some(T::C(ft)))?;
                Some(Self::guard(&y, format!("{x} := {y}.{f}")))
            }
            3 | 4 => {
                let (y, k) = refs.choose(self.rng)?.clone();
                let (f, ft) = self.ref_fields(k).choose(self.rng)?.clone();
                let e = self.value(vars, T::C(ft));
                Some(Self::guard(&y, format!("{y}.{f} := {e}")))
            }
            5 => {
                let (y, k) = refs.choose(self.rng)?.clone();
                let f = self.int_fields(k).choose(self.rng)?.clone();
                let body = if self.rng.gen_bool(0.5) {
                    format!("{y}.{f} := i + 1")
                } else {
                    format!("i := {y}.{f}")
                };
                Some(Self::guard(&y, body))
            }
            6 | 7 => self.call(vars, &refs),
            8 if loops => {
                if self.rng.gen_bool(0.5) {
                    let body = self.stmt(vars, false);
                    Some(format!("k := 2; while (k > 0) do {{ {body}; k := k - 1 }}"))
                } else {
                    // list walk: diverges on cyclic input, which the check skips
                    let walkers: Vec<&(String, usize)> = refs.iter().filter(|(v, _)| v != "this").collect();
                    let (x, k) = (*walkers.choose(self.rng)?).clone();
                    let (f, _) = self
                        .ref_fields(k)
                        .into_iter()
                        .filter(|(_, ft)| self.is_sub(*ft, k))
                        .collect::<Vec<_>>()
                        .choose(self.rng)?
                        .clone();
                    Some(format!("while ({x} != null) do {{ {x} := {x}.{f} }}"))
                }
            }
            _ => {
                let cond = if refs.len() >= 2 && self.rng.gen_bool(0.6) {
                    let a = refs.choose(self.rng)?.0.clone();
                    let b = refs.choose(self.rng)?.0.clone();
                    let op = if self.rng.gen_bool(0.5) { "=" } else { "!=" };
                    format!("{a} {op} {b}")
                } else {
                    format!("i > {}", self.rng.gen_range(0..2))
                };
                let t = self.stmt(vars, false);
                let e = self.stmt(vars, false);
                Some(format!("if ({cond}) then {{ {t} }} else {{ {e} }}"))
            }
        }
    }

    fn call(&mut self, vars: &Vars, refs: &[(String, usize)]) -> Option<String> {
        let (y, k) = refs.choose(self.rng)?.clone();
        let names: Vec<String> = self
            .methods
            .iter()
            .filter(|m| m.level < vars.level)
            .map(|m| m.name.clone())
            .collect();
        let name = names.choose(self.rng)?.clone();
        let m = self.visible(k, &name)?.clone();
        let mut args = Vec::new();
        for p in &m.params {
            let c: Vec<String> = vars
                .of(|t| self.assignable(t, *p))
                .into_iter()
                .map(|(v, _)| v.clone())
                .collect();
            args.push(c.choose(self.rng)?.clone());
        }
        let call = format!("{y}.{}({})", m.name, args.join(", "));
        let body = match self.target(vars, Some(m.ret)) {
            Some((x, _)) if self.rng.gen_bool(0.7) => format!("{x} := {call}"),
            _ => call,
        };
        Some(Self::guard(&y, body))
    }
}

/// Source text of a random program.
pub fn random_program(rng: &mut impl Rng, cfg: &GenConfig) -> String {
    let mut g = Gen {
        rng,
        classes: Vec::new(),
        methods: Vec::new(),
        cfg: cfg.clone(),
    };
    g.program()
}
