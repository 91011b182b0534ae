use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Tok};
use super::FrontendError;

pub fn parse_program(src: &str) -> Result<Program, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, i: 0 };
    let mut classes: Vec<ClassDecl> = Vec::new();
    while p.peek() != &Tok::Eof {
        let class = p.class_decl()?;
        if classes.iter().any(|c| c.name == class.name) {
            return Err(FrontendError::new(
                class.pos,
                format!("duplicate class `{}`", class.name),
            ));
        }
        classes.push(class);
    }
    Ok(Program { classes })
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.toks.len() - 1);
        &self.toks[j].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, what: &str) -> PResult<T> {
        Err(FrontendError::new(
            self.pos(),
            format!("expected {what}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: Tok) -> PResult<Pos> {
        if self.peek() == &t {
            Ok(self.next().1)
        } else {
            self.unexpected(&t.describe())
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.next().1;
                Ok((s, pos))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn ty(&mut self) -> PResult<Ty> {
        if self.eat(&Tok::IntKw) {
            return Ok(Ty::Int);
        }
        Ok(Ty::Class(self.ident()?.0))
    }

    fn class_decl(&mut self) -> PResult<ClassDecl> {
        let pos = self.expect(Tok::Class)?;
        let (name, _) = self.ident()?;
        let extends = if self.eat(&Tok::Extends) {
            Some(self.ident()?.0)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let mut fields: Vec<Param> = Vec::new();
        let mut methods: Vec<MethodDecl> = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return self.unexpected("`}`");
            }
            let mpos = self.pos();
            let ty = self.ty()?;
            let (first, fpos) = self.ident()?;
            if self.peek() == &Tok::LParen {
                let m = self.method_rest(&name, mpos, ty, first)?;
                if methods.iter().any(|o| o.name == m.name) {
                    return Err(FrontendError::new(
                        mpos,
                        format!("duplicate method `{}` in class `{name}`", m.name),
                    ));
                }
                methods.push(m);
                continue;
            }
            let mut names = vec![(first, fpos)];
            while self.eat(&Tok::Comma) {
                names.push(self.ident()?);
            }
            self.expect(Tok::Semi)?;
            for (n, p) in names {
                if fields.iter().any(|f| f.name == n) {
                    return Err(FrontendError::new(
                        p,
                        format!("duplicate field `{n}` in class `{name}`"),
                    ));
                }
                fields.push(Param {
                    name: n,
                    ty: ty.clone(),
                });
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(ClassDecl {
            pos,
            name,
            extends,
            fields,
            methods,
        })
    }

    fn method_rest(&mut self, class: &str, pos: Pos, ret: Ty, name: String) -> PResult<MethodDecl> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        if self.peek() != &Tok::RParen {
            loop {
                let ty = self.ty()?;
                let (n, p) = self.ident()?;
                declare(&mut seen, &n, p)?;
                params.push(Param { name: n, ty });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut locals = Vec::new();
        while self.starts_decl() {
            let ty = self.ty()?;
            loop {
                let (n, p) = self.ident()?;
                declare(&mut seen, &n, p)?;
                locals.push(Param {
                    name: n,
                    ty: ty.clone(),
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Semi)?;
        }
        let body = self.seq()?;
        self.expect(Tok::RBrace)?;
        Ok(MethodDecl {
            pos,
            class: class.to_string(),
            name,
            ret,
            params,
            locals,
            body,
        })
    }

    fn starts_decl(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Tok::IntKw, _) => true,
            (Tok::Ident(_), Tok::Ident(_)) => true,
            _ => false,
        }
    }

    /// Statements up to a closing brace or end of input.
    fn seq(&mut self) -> PResult<Command> {
        let pos = self.pos();
        let mut cs = Vec::new();
        loop {
            while self.eat(&Tok::Semi) {}
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                break;
            }
            let (c, braced) = self.stmt()?;
            cs.push(c);
            if self.eat(&Tok::Semi) || braced {
                continue;
            }
            if matches!(self.peek(), Tok::RBrace | Tok::Eof) {
                break;
            }
            return self.unexpected("`;`");
        }
        Ok(match cs.len() {
            0 => Command::new(pos, CommandKind::Skip),
            1 => cs.pop().unwrap(),
            _ => Command::new(cs[0].pos, CommandKind::Seq(cs)),
        })
    }

    fn block(&mut self) -> PResult<(Command, bool)> {
        if self.peek() == &Tok::LBrace {
            self.next();
            let c = self.seq()?;
            self.expect(Tok::RBrace)?;
            return Ok((c, true));
        }
        self.stmt()
    }

    /// One statement; the flag says whether it ended with a closing brace.
    fn stmt(&mut self) -> PResult<(Command, bool)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LBrace => self.block(),
            Tok::If => {
                self.next();
                let cond = self.expr()?;
                self.expect(Tok::Then)?;
                let (then, mut braced) = self.block()?;
                let els = if self.peek() == &Tok::Else
                    || (self.peek() == &Tok::Semi && self.peek_at(1) == &Tok::Else)
                {
                    self.eat(&Tok::Semi);
                    self.next();
                    let (e, b) = self.block()?;
                    braced = b;
                    e
                } else {
                    Command::new(pos, CommandKind::Skip)
                };
                Ok((
                    Command::new(pos, CommandKind::If(cond, Box::new(then), Box::new(els))),
                    braced,
                ))
            }
            Tok::While => {
                self.next();
                let cond = self.expr()?;
                self.expect(Tok::Do)?;
                let (body, braced) = self.block()?;
                Ok((Command::new(pos, CommandKind::While(cond, Box::new(body))), braced))
            }
            Tok::Return => {
                self.next();
                let e = self.expr()?;
                Ok((Command::new(pos, CommandKind::Return(e)), false))
            }
            Tok::Ident(v) => {
                self.next();
                match self.peek().clone() {
                    Tok::Assign => {
                        self.next();
                        let e = self.expr()?;
                        Ok((Command::new(pos, CommandKind::Assign(v, e)), false))
                    }
                    Tok::Dot => {
                        self.next();
                        let (f, _) = self.ident()?;
                        if self.peek() == &Tok::LParen {
                            let args = self.args()?;
                            let call = Expr::new(
                                pos,
                                ExprKind::Call {
                                    recv: v,
                                    method: f,
                                    args,
                                },
                            );
                            return Ok((Command::new(pos, CommandKind::Eval(call)), false));
                        }
                        self.expect(Tok::Assign)?;
                        let e = self.expr()?;
                        Ok((Command::new(pos, CommandKind::FieldAssign(v, f, e)), false))
                    }
                    Tok::LParen => {
                        let args = self.args()?;
                        let call = Expr::new(
                            pos,
                            ExprKind::Call {
                                recv: "this".into(),
                                method: v,
                                args,
                            },
                        );
                        Ok((Command::new(pos, CommandKind::Eval(call)), false))
                    }
                    _ => self.unexpected("`:=`, `.` or `(`"),
                }
            }
            _ => self.unexpected("statement"),
        }
    }

    fn args(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                args.push(self.ident()?.0);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Gt => BinOp::Gt,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.additive()?;
        Ok(Expr::new(lhs.pos, ExprKind::Bin(op, Box::new(lhs), Box::new(rhs))))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.primary()?;
            lhs = Expr::new(lhs.pos, ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)));
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(Expr::new(pos, ExprKind::Int(n)))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.next();
                let Tok::Int(n) = self.next().0 else { unreachable!() };
                Ok(Expr::new(pos, ExprKind::Int(-n)))
            }
            Tok::Null => {
                self.next();
                Ok(Expr::new(pos, ExprKind::Null))
            }
            Tok::New => {
                self.next();
                let (c, _) = self.ident()?;
                if self.eat(&Tok::LParen) {
                    self.expect(Tok::RParen)?;
                }
                Ok(Expr::new(pos, ExprKind::New(c)))
            }
            Tok::Read => {
                self.next();
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                Ok(Expr::new(pos, ExprKind::Read))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(v) => {
                self.next();
                if self.peek() == &Tok::LParen {
                    let args = self.args()?;
                    return Ok(Expr::new(
                        pos,
                        ExprKind::Call {
                            recv: "this".into(),
                            method: v,
                            args,
                        },
                    ));
                }
                if !self.eat(&Tok::Dot) {
                    return Ok(Expr::new(pos, ExprKind::Var(v)));
                }
                let (f, _) = self.ident()?;
                if self.peek() == &Tok::LParen {
                    let args = self.args()?;
                    return Ok(Expr::new(
                        pos,
                        ExprKind::Call {
                            recv: v,
                            method: f,
                            args,
                        },
                    ));
                }
                Ok(Expr::new(pos, ExprKind::Field(v, f)))
            }
            _ => self.unexpected("expression"),
        }
    }
}

fn declare(seen: &mut BTreeSet<String>, n: &str, p: Pos) -> PResult<()> {
    if n == "this" || n == "out" {
        return Err(FrontendError::new(p, format!("`{n}` is reserved")));
    }
    if !seen.insert(n.to_string()) {
        return Err(FrontendError::new(p, format!("duplicate variable `{n}`")));
    }
    Ok(())
}
