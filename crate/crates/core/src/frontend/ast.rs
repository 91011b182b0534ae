use std::collections::BTreeMap;
use std::fmt;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Int,
    Class(String),
}

impl Ty {
    pub fn is_ref(&self) -> bool {
        matches!(self, Ty::Class(_))
    }

    pub fn class(&self) -> Option<&str> {
        match self {
            Ty::Class(c) => Some(c),
            Ty::Int => None,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => f.write_str("int"),
            Ty::Class(c) => f.write_str(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Gt,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
        }
    }

    pub fn is_comparison(self) -> bool {
        !matches!(self, BinOp::Add | BinOp::Sub)
    }
}

/// Expressions. Positions are ignored by equality so that a pretty-printed
/// program parses back to an equal tree.
#[derive(Debug, Clone)]
pub struct Expr {
    pub pos: Pos,
    pub kind: ExprKind,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Null,
    Var(String),
    Field(String, String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    New(String),
    /// `v.m(args)`; an implicit receiver is desugared to `this` by the parser.
    Call {
        recv: String,
        method: String,
        args: Vec<String>,
    },
    /// Deterministic input stream, int-valued.
    Read,
}

impl Expr {
    pub fn new(pos: Pos, kind: ExprKind) -> Self {
        Expr { pos, kind }
    }

    pub fn contains_call_or_new(&self) -> bool {
        match &self.kind {
            ExprKind::Call { .. } | ExprKind::New(_) => true,
            ExprKind::Bin(_, a, b) => a.contains_call_or_new() || b.contains_call_or_new(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Command {
    pub pos: Pos,
    pub kind: CommandKind,
}

impl PartialEq for Command {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Command {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandKind {
    Skip,
    Assign(String, Expr),
    FieldAssign(String, String, Expr),
    Seq(Vec<Command>),
    If(Expr, Box<Command>, Box<Command>),
    While(Expr, Box<Command>),
    Return(Expr),
    /// A call evaluated for its effects only.
    Eval(Expr),
}

impl Command {
    pub fn new(pos: Pos, kind: CommandKind) -> Self {
        Command { pos, kind }
    }

    /// Visit every atomic command (everything except sequences and the
    /// structural part of `if`/`while`), in source order.
    pub fn for_each_atomic<'a>(&'a self, f: &mut dyn FnMut(&'a Command)) {
        match &self.kind {
            CommandKind::Seq(cs) => cs.iter().for_each(|c| c.for_each_atomic(f)),
            CommandKind::If(_, a, b) => {
                f(self);
                a.for_each_atomic(f);
                b.for_each_atomic(f);
            }
            CommandKind::While(_, body) => {
                f(self);
                body.for_each_atomic(f);
            }
            _ => f(self),
        }
    }

    /// Every call expression in the command tree, in source order.
    pub fn calls(&self) -> Vec<&Expr> {
        fn in_expr<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match &e.kind {
                ExprKind::Call { .. } => out.push(e),
                ExprKind::Bin(_, a, b) => {
                    in_expr(a, out);
                    in_expr(b, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        self.for_each_atomic(&mut |c| match &c.kind {
            CommandKind::Assign(_, e)
            | CommandKind::FieldAssign(_, _, e)
            | CommandKind::Return(e)
            | CommandKind::Eval(e)
            | CommandKind::If(e, _, _)
            | CommandKind::While(e, _) => in_expr(e, &mut out),
            _ => {}
        });
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Ty,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub pos: Pos,
    pub class: String,
    pub name: String,
    pub ret: Ty,
    pub params: Vec<Param>,
    pub locals: Vec<Param>,
    pub body: Command,
}

impl PartialEq for MethodDecl {
    fn eq(&self, o: &Self) -> bool {
        self.class == o.class
            && self.name == o.name
            && self.ret == o.ret
            && self.params == o.params
            && self.locals == o.locals
            && self.body == o.body
    }
}

impl Eq for MethodDecl {}

impl MethodDecl {
    /// `Class.name`, used as the method signature key.
    pub fn sig(&self) -> String {
        format!("{}.{}", self.class, self.name)
    }

    /// `this` followed by the formal parameters.
    pub fn inputs(&self) -> Vec<String> {
        std::iter::once("this".to_string())
            .chain(self.params.iter().map(|p| p.name.clone()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub pos: Pos,
    pub name: String,
    pub extends: Option<String>,
    pub fields: Vec<Param>,
    pub methods: Vec<MethodDecl>,
}

impl PartialEq for ClassDecl {
    fn eq(&self, o: &Self) -> bool {
        self.name == o.name
            && self.extends == o.extends
            && self.fields == o.fields
            && self.methods == o.methods
    }
}

impl Eq for ClassDecl {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    /// Classes in declaration order.
    pub classes: Vec<ClassDecl>,
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn by_name(&self) -> BTreeMap<&str, &ClassDecl> {
        self.classes.iter().map(|c| (c.name.as_str(), c)).collect()
    }
}
