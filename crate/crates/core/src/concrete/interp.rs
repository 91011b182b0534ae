use std::collections::VecDeque;

use super::{ConcreteState, Frame, Heap, Object, Value};
use crate::frontend::{BinOp, Command, CommandKind, Expr, ExprKind, MethodDecl, Pos, Ty, TypedProgram};

pub const DEFAULT_BUDGET: u64 = 10_000;
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Fault {
    #[error("{0}: null dereference")]
    NullDeref(Pos),
    #[error("step budget exhausted")]
    Budget,
    #[error("no method `{0}` for the receiver's class")]
    NoMethod(String),
}

/// Hooks called while executing; used by the oracle checks.
pub trait Observer {
    /// Before an atomic command (or the guard of an `if`/`while`).
    fn before(&mut self, _m: &MethodDecl, _c: &Command, _frame: &Frame, _heap: &Heap) {}
    /// After the expression of an assignment, field update, return or call
    /// statement has been evaluated, with `rho` its value.
    fn after_exp(&mut self, _m: &MethodDecl, _c: &Command, _frame: &Frame, _heap: &Heap, _rho: Value) {}
    /// Whether `on_exit` needs the entry heap (cloning it costs a copy per call).
    fn wants_exit(&self) -> bool {
        false
    }
    fn on_exit(&mut self, _m: &MethodDecl, _entry: &ConcreteState, _exit_heap: &Heap) {}
}

#[derive(Debug, Clone)]
pub struct ExecOutcome {
    pub entry: ConcreteState,
    pub final_frame: Frame,
    pub heap: Heap,
    pub out: Value,
}

impl ExecOutcome {
    /// Input variables bound to their entry values, `out` to the result,
    /// over the final heap.
    pub fn merged_state(&self) -> ConcreteState {
        let mut frame = self.entry.frame.clone();
        frame.insert("out".into(), self.out);
        ConcreteState {
            frame,
            heap: self.heap.clone(),
        }
    }

    pub fn final_state(&self) -> ConcreteState {
        ConcreteState {
            frame: self.final_frame.clone(),
            heap: self.heap.clone(),
        }
    }
}

pub struct Interp<'a> {
    tp: &'a TypedProgram,
    heap: Heap,
    steps: u64,
    budget: u64,
    depth: usize,
    input: VecDeque<i64>,
    observer: Option<&'a mut dyn Observer>,
}

impl<'a> Interp<'a> {
    pub fn new(tp: &'a TypedProgram) -> Self {
        Interp {
            tp,
            heap: Vec::new(),
            steps: 0,
            budget: DEFAULT_BUDGET,
            depth: 0,
            input: VecDeque::new(),
            observer: None,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_input(mut self, input: impl IntoIterator<Item = i64>) -> Self {
        self.input = input.into_iter().collect();
        self
    }

    pub fn with_observer(mut self, obs: &'a mut dyn Observer) -> Self {
        self.observer = Some(obs);
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Runs method `sig` from `state`, whose frame binds `this` and the
    /// formals (missing inputs default to null/0).
    pub fn run(mut self, sig: &str, state: &ConcreteState) -> Result<ExecOutcome, Fault> {
        let m = self.tp.method(sig).ok_or_else(|| Fault::NoMethod(sig.to_string()))?;
        self.heap = state.heap.clone();
        let inputs: Vec<Value> = m
            .inputs()
            .iter()
            .map(|v| {
                let ty = &self.tp.env(sig)[v];
                state.frame.get(v).copied().unwrap_or(default_value(ty))
            })
            .collect();
        let entry = ConcreteState {
            frame: m.inputs().into_iter().zip(inputs.iter().copied()).collect(),
            heap: state.heap.clone(),
        };
        let frame = self.invoke(m, &inputs)?;
        let out = frame["out"];
        Ok(ExecOutcome {
            entry,
            final_frame: frame,
            heap: self.heap,
            out,
        })
    }

    fn tick(&mut self) -> Result<(), Fault> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Fault::Budget)
        } else {
            Ok(())
        }
    }

    fn invoke(&mut self, m: &'a MethodDecl, inputs: &[Value]) -> Result<Frame, Fault> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Fault::Budget);
        }
        let env = self.tp.env(&m.sig());
        let mut frame: Frame = env.iter().map(|(v, t)| (v.clone(), default_value(t))).collect();
        for (v, x) in m.inputs().into_iter().zip(inputs) {
            frame.insert(v, *x);
        }
        let entry = match &self.observer {
            Some(o) if o.wants_exit() => Some(ConcreteState {
                frame: frame.clone(),
                heap: self.heap.clone(),
            }),
            _ => None,
        };
        self.exec(m, &m.body, &mut frame)?;
        if let (Some(entry), Some(obs)) = (entry, self.observer.as_deref_mut()) {
            obs.on_exit(m, &entry, &self.heap);
        }
        self.depth -= 1;
        Ok(frame)
    }

    fn exec(&mut self, m: &'a MethodDecl, c: &'a Command, frame: &mut Frame) -> Result<(), Fault> {
        match &c.kind {
            CommandKind::Seq(cs) => {
                for c in cs {
                    self.exec(m, c, frame)?;
                }
                Ok(())
            }
            CommandKind::Skip => Ok(()),
            CommandKind::If(e, a, b) => {
                self.tick()?;
                self.notify_before(m, c, frame);
                if truthy(self.eval(m, e, frame)?) {
                    self.exec(m, a, frame)
                } else {
                    self.exec(m, b, frame)
                }
            }
            CommandKind::While(e, body) => loop {
                self.tick()?;
                self.notify_before(m, c, frame);
                if !truthy(self.eval(m, e, frame)?) {
                    return Ok(());
                }
                self.exec(m, body, frame)?;
            },
            CommandKind::Assign(v, e) => {
                self.tick()?;
                self.notify_before(m, c, frame);
                let x = self.eval(m, e, frame)?;
                self.notify_exp(m, c, frame, x);
                frame.insert(v.clone(), x);
                Ok(())
            }
            CommandKind::FieldAssign(v, f, e) => {
                self.tick()?;
                self.notify_before(m, c, frame);
                let x = self.eval(m, e, frame)?;
                self.notify_exp(m, c, frame, x);
                let l = frame[v].loc().ok_or(Fault::NullDeref(c.pos))?;
                self.heap[l].fields.insert(f.clone(), x);
                Ok(())
            }
            CommandKind::Return(e) => {
                self.tick()?;
                self.notify_before(m, c, frame);
                let x = self.eval(m, e, frame)?;
                self.notify_exp(m, c, frame, x);
                frame.insert("out".into(), x);
                Ok(())
            }
            CommandKind::Eval(e) => {
                self.tick()?;
                self.notify_before(m, c, frame);
                let x = self.eval(m, e, frame)?;
                self.notify_exp(m, c, frame, x);
                Ok(())
            }
        }
    }

    fn notify_before(&mut self, m: &MethodDecl, c: &Command, frame: &Frame) {
        if let Some(o) = self.observer.as_deref_mut() {
            o.before(m, c, frame, &self.heap);
        }
    }

    fn notify_exp(&mut self, m: &MethodDecl, c: &Command, frame: &Frame, x: Value) {
        if let Some(o) = self.observer.as_deref_mut() {
            o.after_exp(m, c, frame, &self.heap, x);
        }
    }

    fn eval(&mut self, m: &'a MethodDecl, e: &Expr, frame: &Frame) -> Result<Value, Fault> {
        Ok(match &e.kind {
            ExprKind::Int(n) => Value::Int(*n),
            ExprKind::Null => Value::Null,
            ExprKind::Read => Value::Int(self.input.pop_front().unwrap_or(0)),
            ExprKind::Var(v) => frame[v],
            ExprKind::Field(v, f) => {
                let l = frame[v].loc().ok_or(Fault::NullDeref(e.pos))?;
                self.heap[l].fields[f]
            }
            ExprKind::New(k) => {
                let fields = self
                    .tp
                    .all_fields(k)
                    .iter()
                    .map(|f| (f.name.clone(), default_value(&f.ty)))
                    .collect();
                self.heap.push(Object {
                    class: k.clone(),
                    fields,
                });
                Value::Loc(self.heap.len() - 1)
            }
            ExprKind::Bin(op, a, b) => {
                let x = self.eval(m, a, frame)?;
                let y = self.eval(m, b, frame)?;
                binop(*op, x, y)
            }
            ExprKind::Call { recv, method, args } => {
                self.tick()?;
                let r = frame[recv];
                let l = r.loc().ok_or(Fault::NullDeref(e.pos))?;
                let class = self.heap[l].class.clone();
                let target = self
                    .tp
                    .lookup(&class, method)
                    .ok_or_else(|| Fault::NoMethod(format!("{class}.{method}")))?;
                let mut inputs = vec![r];
                inputs.extend(args.iter().map(|a| frame[a]));
                let callee_frame = self.invoke(target, &inputs)?;
                callee_frame["out"]
            }
        })
    }
}

pub(crate) fn default_value(t: &Ty) -> Value {
    match t {
        Ty::Int => Value::Int(0),
        Ty::Class(_) => Value::Null,
    }
}

fn truthy(x: Value) -> bool {
    !matches!(x, Value::Int(0))
}

fn binop(op: BinOp, x: Value, y: Value) -> Value {
    let b = |c: bool| Value::Int(c as i64);
    match (op, x, y) {
        (BinOp::Add, Value::Int(a), Value::Int(c)) => Value::Int(a.wrapping_add(c)),
        (BinOp::Sub, Value::Int(a), Value::Int(c)) => Value::Int(a.wrapping_sub(c)),
        (BinOp::Lt, Value::Int(a), Value::Int(c)) => b(a < c),
        (BinOp::Gt, Value::Int(a), Value::Int(c)) => b(a > c),
        (BinOp::Eq, x, y) => b(x == y),
        (BinOp::Ne, x, y) => b(x != y),
        _ => unreachable!("ill-typed operands reached the interpreter"),
    }
}
