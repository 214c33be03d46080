//! Reference interpreter for MiniC with property checks.
//!
//! Checks run where the analyzer evaluates them: statement asserts and the
//! preconditions of the calls a statement makes on entry to the statement,
//! generated asserts on a loop and preconditions of calls in a loop
//! condition before every evaluation of the condition, postconditions when
//! the function returns. A failing check stops the run, as does any
//! runtime error.

use std::collections::{BTreeMap, HashMap};

use frontend::{BinOp, Expr, ExprKind, FunctionDef, NodeId, Origin, Stmt, StmtKind, Term, Type, TypedAst, UnOp};
use kernel::{Property, PropertyId, PropertyKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Array(Vec<i64>),
    Fn(Option<String>),
}

pub type Frame = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Halt {
    Check(PropertyId),
    DivByZero,
    OutOfBounds,
    Overflow,
    BadCall,
    TooDeep,
    OutOfFuel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Returned(i64),
    Halted(Halt),
}

type CheckList = Vec<(PropertyId, Term)>;

/// Property checks indexed by where they run.
#[derive(Clone, Debug, Default)]
pub struct Checks {
    entry: HashMap<NodeId, CheckList>,
    per_iteration: HashMap<NodeId, CheckList>,
    post: HashMap<String, CheckList>,
}

impl Checks {
    pub fn new<'p>(ast: &TypedAst, properties: impl IntoIterator<Item = &'p Property>) -> Checks {
        let mut c = Checks::default();
        let is_loop = |s: NodeId| matches!(ast.find_stmt(s).map(|s| &s.kind), Some(StmtKind::While { .. }));
        let mut props: Vec<&Property> = properties.into_iter().collect();
        props.sort_by_key(|p| p.id);
        for p in props {
            let item = (p.id, p.annotation.pred.clone());
            match &p.kind {
                PropertyKind::Assertion => {
                    let generated = p.annotation.origin != Origin::Source;
                    let table = if generated && is_loop(p.attach) { &mut c.per_iteration } else { &mut c.entry };
                    table.entry(p.attach).or_default().push(item);
                }
                PropertyKind::Precondition(call) => {
                    let Some(s) = ast.enclosing_stmt(*call) else { continue };
                    let table = if is_loop(s) { &mut c.per_iteration } else { &mut c.entry };
                    table.entry(s).or_default().push(item);
                }
                PropertyKind::Postcondition(f) => c.post.entry(f.clone()).or_default().push(item),
            }
        }
        c
    }
}

/// Callbacks on every statement entry and every integer expression value.
pub trait Observer {
    fn stmt(&mut self, _function: &str, _stmt: NodeId, _frame: &Frame) {}
    fn expr(&mut self, _expr: NodeId, _value: i64) {}
}

impl Observer for () {}

pub const FUEL: u64 = 200_000;
pub const MAX_DEPTH: usize = 64;

enum Flow {
    Normal,
    Return(i64),
}

pub struct Interpreter<'a, O: Observer> {
    ast: &'a TypedAst,
    checks: &'a Checks,
    observer: &'a mut O,
    fuel: u64,
    depth: usize,
}

/// Runs `main` on integer arguments. `None` when the arguments violate
/// `main`'s precondition.
pub fn run_main<O: Observer>(ast: &TypedAst, checks: &Checks, args: &[i64], observer: &mut O) -> Option<Outcome> {
    let main = ast.function("main").expect("program has a main");
    let mut it = Interpreter {
        ast,
        checks,
        observer,
        fuel: FUEL,
        depth: 0,
    };
    let args: Vec<Value> = args.iter().map(|v| Value::Int(*v)).collect();
    let frame = it.frame(main, args).ok()?;
    if let Some(req) = &main.contract.requires {
        match eval_term(&req.pred, &frame, None) {
            Some(v) if v != 0 => {}
            _ => return None,
        }
    }
    Some(match it.body(main, frame) {
        Ok(v) => Outcome::Returned(v),
        Err(h) => Outcome::Halted(h),
    })
}

impl<O: Observer> Interpreter<'_, O> {
    fn frame(&self, f: &FunctionDef, args: Vec<Value>) -> Result<Frame, Halt> {
        if args.len() != f.params.len() {
            return Err(Halt::BadCall);
        }
        let mut frame = Frame::new();
        for (p, a) in f.params.iter().zip(args) {
            let ok = matches!((p.ty, &a), (Type::FnPtr, Value::Fn(_)) | (Type::Int, Value::Int(_)));
            if !ok {
                return Err(Halt::BadCall);
            }
            frame.insert(p.name.clone(), a);
        }
        for l in &f.locals {
            let v = match l.ty {
                Type::IntArray(n) => Value::Array(vec![0; n as usize]),
                Type::FnPtr => Value::Fn(None),
                _ => Value::Int(0),
            };
            frame.insert(l.name.clone(), v);
        }
        Ok(frame)
    }

    fn tick(&mut self) -> Result<(), Halt> {
        if self.fuel == 0 {
            return Err(Halt::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn run_checks(list: Option<&CheckList>, frame: &Frame, result: Option<i64>) -> Result<(), Halt> {
        for (id, pred) in list.into_iter().flatten() {
            match eval_term(pred, frame, result) {
                Some(v) if v != 0 => {}
                _ => return Err(Halt::Check(*id)),
            }
        }
        Ok(())
    }

    fn body(&mut self, f: &FunctionDef, mut frame: Frame) -> Result<i64, Halt> {
        let mut ret = 0;
        for s in &f.body {
            if let Flow::Return(v) = self.stmt(f, s, &mut frame)? {
                ret = v;
                break;
            }
        }
        Self::run_checks(self.checks.post.get(&f.name), &frame, Some(ret))?;
        Ok(ret)
    }

    fn stmt(&mut self, f: &FunctionDef, s: &Stmt, frame: &mut Frame) -> Result<Flow, Halt> {
        self.observer.stmt(&f.name, s.id, frame);
        self.tick()?;
        Self::run_checks(self.checks.entry.get(&s.id), frame, None)?;
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let v = if matches!(frame.get(target), Some(Value::Fn(_))) {
                    Value::Fn(self.fn_value(value, frame))
                } else {
                    Value::Int(self.eval(value, frame)?)
                };
                frame.insert(target.clone(), v);
            }
            StmtKind::ArrayAssign { array, index, value } => {
                let i = self.eval(index, frame)?;
                let v = self.eval(value, frame)?;
                let Some(Value::Array(cells)) = frame.get_mut(array) else { return Err(Halt::OutOfBounds) };
                let cell = usize::try_from(i).ok().and_then(|i| cells.get_mut(i)).ok_or(Halt::OutOfBounds)?;
                *cell = v;
            }
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if self.eval(cond, frame)? != 0 {
                    return self.stmt(f, then_branch, frame);
                } else if let Some(e) = else_branch {
                    return self.stmt(f, e, frame);
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick()?;
                Self::run_checks(self.checks.per_iteration.get(&s.id), frame, None)?;
                if self.eval(cond, frame)? == 0 {
                    break;
                }
                if let Flow::Return(v) = self.stmt(f, body, frame)? {
                    return Ok(Flow::Return(v));
                }
            },
            StmtKind::Return(e) => return Ok(Flow::Return(self.eval(e, frame)?)),
            StmtKind::ExprStmt(e) => {
                self.eval(e, frame)?;
            }
            StmtKind::Block(stmts) => {
                for c in stmts {
                    if let Flow::Return(v) = self.stmt(f, c, frame)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
        }
        Ok(Flow::Normal)
    }

    fn fn_value(&self, e: &Expr, frame: &Frame) -> Option<String> {
        match &e.kind {
            ExprKind::AddrOfFn(g) => Some(g.clone()),
            ExprKind::Var(x) => match frame.get(x) {
                Some(Value::Fn(t)) => t.clone(),
                _ => None,
            },
            _ => None,
        }
    }

    fn call(&mut self, name: &str, args: &[Expr], frame: &Frame) -> Result<i64, Halt> {
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            if self.ast.type_of(a.id) == Some(Type::FnPtr) {
                vals.push(Value::Fn(self.fn_value(a, frame)));
            } else {
                vals.push(Value::Int(self.eval(a, frame)?));
            }
        }
        let f = self.ast.function(name).ok_or(Halt::BadCall)?;
        if self.depth >= MAX_DEPTH {
            return Err(Halt::TooDeep);
        }
        let callee_frame = self.frame(f, vals)?;
        self.depth += 1;
        let r = self.body(f, callee_frame);
        self.depth -= 1;
        r
    }

    fn eval(&mut self, e: &Expr, frame: &Frame) -> Result<i64, Halt> {
        let v = match &e.kind {
            ExprKind::IntLit(v) => *v,
            ExprKind::Var(x) => match frame.get(x) {
                Some(Value::Int(v)) => *v,
                _ => return Err(Halt::BadCall),
            },
            ExprKind::AddrOfFn(_) => return Err(Halt::BadCall),
            ExprKind::ArrayRead { array, index } => {
                let i = self.eval(index, frame)?;
                let Some(Value::Array(cells)) = frame.get(array) else { return Err(Halt::OutOfBounds) };
                *usize::try_from(i).ok().and_then(|i| cells.get(i)).ok_or(Halt::OutOfBounds)?
            }
            ExprKind::Binop { op: BinOp::And, lhs, rhs } => {
                i64::from(self.eval(lhs, frame)? != 0 && self.eval(rhs, frame)? != 0)
            }
            ExprKind::Binop { op: BinOp::Or, lhs, rhs } => {
                i64::from(self.eval(lhs, frame)? != 0 || self.eval(rhs, frame)? != 0)
            }
            ExprKind::Binop { op, lhs, rhs } => {
                let a = self.eval(lhs, frame)?;
                let b = self.eval(rhs, frame)?;
                arith(*op, a, b)?
            }
            ExprKind::Unop { op, operand } => {
                let a = self.eval(operand, frame)?;
                match op {
                    UnOp::Neg => a.checked_neg().ok_or(Halt::Overflow)?,
                    UnOp::Not => i64::from(a == 0),
                }
            }
            ExprKind::Call { callee, args } => self.call(callee, args, frame)?,
            ExprKind::IndirectCall { target, args } => {
                let Some(Value::Fn(Some(g))) = frame.get(target) else { return Err(Halt::BadCall) };
                let g = g.clone();
                self.call(&g, args, frame)?
            }
        };
        self.observer.expr(e.id, v);
        Ok(v)
    }
}

fn arith(op: BinOp, a: i64, b: i64) -> Result<i64, Halt> {
    Ok(match op {
        BinOp::Add => a.checked_add(b).ok_or(Halt::Overflow)?,
        BinOp::Sub => a.checked_sub(b).ok_or(Halt::Overflow)?,
        BinOp::Mul => a.checked_mul(b).ok_or(Halt::Overflow)?,
        BinOp::Div | BinOp::Mod if b == 0 => return Err(Halt::DivByZero),
        BinOp::Div => a.checked_div(b).ok_or(Halt::Overflow)?,
        BinOp::Mod => a.checked_rem(b).ok_or(Halt::Overflow)?,
        BinOp::Lt => i64::from(a < b),
        BinOp::Le => i64::from(a <= b),
        BinOp::Gt => i64::from(a > b),
        BinOp::Ge => i64::from(a >= b),
        BinOp::Eq => i64::from(a == b),
        BinOp::Ne => i64::from(a != b),
        BinOp::And | BinOp::Or => unreachable!("short-circuit operators"),
    })
}

/// Evaluates a predicate; `None` on any runtime error or unsupported term.
pub fn eval_term(t: &Term, frame: &Frame, result: Option<i64>) -> Option<i64> {
    Some(match t {
        Term::Int(v) => *v,
        Term::Var(x) => match frame.get(x)? {
            Value::Int(v) => *v,
            _ => return None,
        },
        Term::Result => result?,
        Term::ArrayRead(a, i) => {
            let i = eval_term(i, frame, result)?;
            let Value::Array(cells) = frame.get(a)? else { return None };
            *cells.get(usize::try_from(i).ok()?)?
        }
        Term::Binop(BinOp::And, l, r) => {
            i64::from(eval_term(l, frame, result)? != 0 && eval_term(r, frame, result)? != 0)
        }
        Term::Binop(BinOp::Or, l, r) => {
            i64::from(eval_term(l, frame, result)? != 0 || eval_term(r, frame, result)? != 0)
        }
        Term::Binop(op, l, r) => arith(*op, eval_term(l, frame, result)?, eval_term(r, frame, result)?).ok()?,
        Term::Unop(UnOp::Neg, a) => eval_term(a, frame, result)?.checked_neg()?,
        Term::Unop(UnOp::Not, a) => i64::from(eval_term(a, frame, result)? == 0),
        Term::Call { .. } | Term::AddrOf(_) => return None,
    })
}
