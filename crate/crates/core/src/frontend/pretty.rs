use std::fmt::Write;

use super::ast::*;

pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for c in &p.classes {
        match &c.extends {
            Some(sup) => writeln!(out, "class {} extends {} {{", c.name, sup).unwrap(),
            None => writeln!(out, "class {} {{", c.name).unwrap(),
        }
        for f in &c.fields {
            writeln!(out, "  {} {};", f.ty, f.name).unwrap();
        }
        for m in &c.methods {
            let params: Vec<String> = m.params.iter().map(|p| format!("{} {}", p.ty, p.name)).collect();
            writeln!(out, "  {} {}({}) {{", m.ret, m.name, params.join(", ")).unwrap();
            for l in &m.locals {
                writeln!(out, "    {} {};", l.ty, l.name).unwrap();
            }
            pretty_command(&m.body, 2, &mut out);
            writeln!(out, "  }}").unwrap();
        }
        writeln!(out, "}}").unwrap();
    }
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn pretty_command(c: &Command, level: usize, out: &mut String) {
    match &c.kind {
        CommandKind::Seq(cs) => {
            for c in cs {
                pretty_command(c, level, out);
            }
        }
        CommandKind::Skip => {}
        CommandKind::If(e, a, b) => {
            indent(level, out);
            writeln!(out, "if {} then {{", pretty_expr(e)).unwrap();
            pretty_command(a, level + 1, out);
            indent(level, out);
            out.push_str("} else {\n");
            pretty_command(b, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        CommandKind::While(e, body) => {
            indent(level, out);
            writeln!(out, "while {} do {{", pretty_expr(e)).unwrap();
            pretty_command(body, level + 1, out);
            indent(level, out);
            out.push_str("}\n");
        }
        _ => {
            indent(level, out);
            out.push_str(&pretty_atomic(c));
            out.push_str(";\n");
        }
    }
}

/// Single-line rendering of an atomic command (used in reports too).
pub fn pretty_atomic(c: &Command) -> String {
    match &c.kind {
        CommandKind::Assign(v, e) => format!("{v} := {}", pretty_expr(e)),
        CommandKind::FieldAssign(v, f, e) => format!("{v}.{f} := {}", pretty_expr(e)),
        CommandKind::Return(e) => format!("return {}", pretty_expr(e)),
        CommandKind::Eval(e) => pretty_expr(e),
        CommandKind::If(e, _, _) => format!("if {}", pretty_expr(e)),
        CommandKind::While(e, _) => format!("while {}", pretty_expr(e)),
        CommandKind::Skip => "skip".into(),
        CommandKind::Seq(_) => "...".into(),
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Null => "null".into(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Field(v, f) => format!("{v}.{f}"),
        ExprKind::New(c) => format!("new {c}"),
        ExprKind::Read => "read()".into(),
        ExprKind::Call { recv, method, args } => format!("{recv}.{method}({})", args.join(", ")),
        ExprKind::Bin(op, a, b) => {
            let side = |x: &Expr| match x.kind {
                ExprKind::Bin(..) => format!("({})", pretty_expr(x)),
                _ => pretty_expr(x),
            };
            format!("{} {} {}", side(a), op.symbol(), side(b))
        }
    }
}
