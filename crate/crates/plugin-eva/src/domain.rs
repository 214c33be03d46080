//! Abstract environments and the evaluation of terms over them.
//!
//! Booleans are the integers 0 and 1, so one evaluator serves both
//! program conditions and annotation predicates: a comparison evaluates to
//! a sub-interval of `[0, 1]`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use frontend::{BinOp, Term, UnOp};
use interval::{Bound, Interval};

/// Targets saturate to [`TargetSet::Any`] above this many functions.
pub const MAX_TARGETS: usize = 4;

/// Possible values of a function pointer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TargetSet {
    /// A finite set; empty means the pointer was never assigned.
    Set(BTreeSet<String>),
    /// Any function of matching arity.
    Any,
}

impl TargetSet {
    pub fn empty() -> TargetSet {
        TargetSet::Set(BTreeSet::new())
    }

    pub fn single(f: &str) -> TargetSet {
        TargetSet::Set([f.to_string()].into())
    }

    pub fn join(&self, other: &TargetSet) -> TargetSet {
        match (self, other) {
            (TargetSet::Set(a), TargetSet::Set(b)) => {
                let u: BTreeSet<String> = a.union(b).cloned().collect();
                if u.len() > MAX_TARGETS {
                    TargetSet::Any
                } else {
                    TargetSet::Set(u)
                }
            }
            _ => TargetSet::Any,
        }
    }

    pub fn is_subset_of(&self, other: &TargetSet) -> bool {
        match (self, other) {
            (_, TargetSet::Any) => true,
            (TargetSet::Any, TargetSet::Set(_)) => false,
            (TargetSet::Set(a), TargetSet::Set(b)) => a.is_subset(b),
        }
    }
}

/// Abstract value of one variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AVal {
    Int(Interval),
    /// Declared size and one interval summarizing every cell.
    Array(u32, Interval),
    Fn(TargetSet),
}

impl AVal {
    fn is_bottom(&self) -> bool {
        match self {
            AVal::Int(i) | AVal::Array(_, i) => i.is_bottom(),
            AVal::Fn(_) => false,
        }
    }

    fn combine(&self, other: &AVal, int: impl Fn(&Interval, &Interval) -> Interval, fns: bool) -> AVal {
        match (self, other) {
            (AVal::Int(a), AVal::Int(b)) => AVal::Int(int(a, b)),
            (AVal::Array(n, a), AVal::Array(_, b)) => AVal::Array(*n, int(a, b)),
            (AVal::Fn(a), AVal::Fn(b)) => AVal::Fn(if fns {
                a.join(b)
            } else if b.is_subset_of(a) {
                b.clone()
            } else {
                a.clone()
            }),
            _ => panic!("variable changed kind: {self:?} vs {other:?}"),
        }
    }

    fn leq(&self, other: &AVal) -> bool {
        match (self, other) {
            (AVal::Int(a), AVal::Int(b)) | (AVal::Array(_, a), AVal::Array(_, b)) => a.is_subset_of(b),
            (AVal::Fn(a), AVal::Fn(b)) => a.is_subset_of(b),
            _ => false,
        }
    }
}

/// Name of the pseudo-variable holding a function's return value.
pub const RESULT: &str = "\\result";

/// A non-bottom map from variables to abstract values. An unreachable
/// state is represented by the absence of an environment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AbstractEnv {
    vars: BTreeMap<String, AVal>,
}

impl AbstractEnv {
    pub fn new() -> AbstractEnv {
        AbstractEnv::default()
    }

    /// `None` if any variable is bottom.
    pub fn from_vars(vars: impl IntoIterator<Item = (String, AVal)>) -> Option<AbstractEnv> {
        let env = AbstractEnv {
            vars: vars.into_iter().collect(),
        };
        env.check()
    }

    fn check(self) -> Option<AbstractEnv> {
        if self.vars.values().any(AVal::is_bottom) {
            None
        } else {
            Some(self)
        }
    }

    pub fn get(&self, name: &str) -> Option<&AVal> {
        self.vars.get(name)
    }

    /// Interval of an integer variable, or of an array's cells.
    pub fn interval(&self, name: &str) -> Option<Interval> {
        match self.vars.get(name)? {
            AVal::Int(i) | AVal::Array(_, i) => Some(*i),
            AVal::Fn(_) => None,
        }
    }

    pub fn targets(&self, name: &str) -> Option<&TargetSet> {
        match self.vars.get(name)? {
            AVal::Fn(t) => Some(t),
            _ => None,
        }
    }

    /// Sets a variable; `None` if the value is bottom.
    pub fn with(mut self, name: &str, v: AVal) -> Option<AbstractEnv> {
        if v.is_bottom() {
            return None;
        }
        self.vars.insert(name.to_string(), v);
        Some(self)
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, &AVal)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn pointwise(&self, other: &AbstractEnv, f: impl Fn(&AVal, &AVal) -> AVal) -> AbstractEnv {
        let mut vars = self.vars.clone();
        for (k, b) in &other.vars {
            let v = match self.vars.get(k) {
                Some(a) => f(a, b),
                None => b.clone(),
            };
            vars.insert(k.clone(), v);
        }
        AbstractEnv { vars }
    }

    pub fn join(&self, other: &AbstractEnv) -> AbstractEnv {
        self.pointwise(other, |a, b| a.combine(b, Interval::join, true))
    }

    pub fn widen(&self, new: &AbstractEnv) -> AbstractEnv {
        self.pointwise(new, |a, b| a.combine(b, Interval::widen, true))
    }

    pub fn narrow(&self, new: &AbstractEnv) -> Option<AbstractEnv> {
        self.pointwise(new, |a, b| a.combine(b, Interval::narrow, false)).check()
    }

    /// Pointwise inclusion.
    pub fn leq(&self, other: &AbstractEnv) -> bool {
        self.vars.iter().all(|(k, a)| other.vars.get(k).is_some_and(|b| a.leq(b)))
    }
}

impl fmt::Display for AbstractEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match v {
                AVal::Int(x) => write!(f, "{k}: {x}")?,
                AVal::Array(_, x) => write!(f, "{k}[]: {x}")?,
                AVal::Fn(TargetSet::Any) => write!(f, "{k}: any")?,
                AVal::Fn(TargetSet::Set(s)) => write!(f, "{k}: {s:?}")?,
            }
        }
        f.write_str("}")
    }
}

pub fn join_opt(a: Option<&AbstractEnv>, b: Option<&AbstractEnv>) -> Option<AbstractEnv> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.join(b)),
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (None, None) => None,
    }
}

const FALSE: Interval = Interval::Range {
    lo: Bound::Finite(0),
    hi: Bound::Finite(0),
};
const TRUE: Interval = Interval::Range {
    lo: Bound::Finite(1),
    hi: Bound::Finite(1),
};
const BOOL: Interval = Interval::Range {
    lo: Bound::Finite(0),
    hi: Bound::Finite(1),
};

fn truth_interval(may_true: bool, may_false: bool) -> Interval {
    match (may_true, may_false) {
        (true, true) => BOOL,
        (true, false) => TRUE,
        (false, true) => FALSE,
        (false, false) => Interval::Bottom,
    }
}

fn may_be_zero(v: &Interval) -> bool {
    v.contains(0)
}

fn may_be_nonzero(v: &Interval) -> bool {
    !v.is_bottom() && *v != FALSE
}

/// Abstract comparison.
pub fn compare(op: BinOp, a: &Interval, b: &Interval) -> Interval {
    let (Some((alo, ahi)), Some((blo, bhi))) = (a.bounds(), b.bounds()) else {
        return Interval::Bottom;
    };
    let (may_true, may_false) = match op {
        BinOp::Lt => (alo < bhi, ahi >= blo),
        BinOp::Le => (alo <= bhi, ahi > blo),
        BinOp::Gt => (ahi > blo, alo <= bhi),
        BinOp::Ge => (ahi >= blo, alo < bhi),
        BinOp::Eq | BinOp::Ne => {
            let overlap = !a.meet(b).is_bottom();
            let always_equal = a.compare(b) == Some(Ordering::Equal);
            if op == BinOp::Eq {
                (overlap, !always_equal)
            } else {
                (!always_equal, overlap)
            }
        }
        _ => unreachable!("not a comparison"),
    };
    truth_interval(may_true, may_false)
}

/// Arithmetic and comparison operators; logical ones are handled by the
/// callers because they short-circuit.
pub fn apply_binop(op: BinOp, a: &Interval, b: &Interval) -> Interval {
    match op {
        BinOp::Add => a.add(b),
        BinOp::Sub => a.sub(b),
        BinOp::Mul => a.mul(b),
        BinOp::Div => a.div(b),
        BinOp::Mod => a.rem(b),
        BinOp::And | BinOp::Or => panic!("logical operators short-circuit"),
        cmp => compare(cmp, a, b),
    }
}

pub fn apply_unop(op: UnOp, a: &Interval) -> Interval {
    match op {
        UnOp::Neg => a.neg(),
        UnOp::Not => {
            if a.is_bottom() {
                Interval::Bottom
            } else {
                truth_interval(may_be_zero(a), may_be_nonzero(a))
            }
        }
    }
}

/// Short-circuit `&&` / `||`: the right operand only matters when the left
/// one does not decide the result.
pub fn logical(op: BinOp, left: &Interval, right: impl FnOnce() -> Interval) -> Interval {
    if left.is_bottom() {
        return Interval::Bottom;
    }
    let (decides, decided_value) = match op {
        BinOp::And => (may_be_zero(left), false),
        BinOp::Or => (may_be_nonzero(left), true),
        _ => unreachable!(),
    };
    let continues = match op {
        BinOp::And => may_be_nonzero(left),
        _ => may_be_zero(left),
    };
    let mut may_true = decides && decided_value;
    let mut may_false = decides && !decided_value;
    if continues {
        let r = right();
        may_true |= may_be_nonzero(&r);
        may_false |= may_be_zero(&r);
    }
    truth_interval(may_true, may_false)
}

/// Evaluates a term. Calls and function addresses are unknown.
pub fn eval_term(env: &AbstractEnv, t: &Term) -> Interval {
    match t {
        Term::Int(v) => Interval::singleton(*v),
        Term::Var(x) => env.interval(x).unwrap_or(Interval::TOP),
        Term::Result => env.interval(RESULT).unwrap_or(Interval::TOP),
        Term::ArrayRead(a, i) => {
            let idx = eval_term(env, i);
            match env.get(a) {
                Some(AVal::Array(n, cells)) => {
                    if idx.meet(&Interval::range(0, *n as i64 - 1)).is_bottom() {
                        Interval::Bottom
                    } else {
                        *cells
                    }
                }
                _ => Interval::TOP,
            }
        }
        Term::Binop(op, l, r) if op.is_logical() => {
            let lv = eval_term(env, l);
            logical(*op, &lv, || eval_term(env, r))
        }
        Term::Binop(op, l, r) => apply_binop(*op, &eval_term(env, l), &eval_term(env, r)),
        Term::Unop(op, a) => apply_unop(*op, &eval_term(env, a)),
        Term::Call { .. } | Term::AddrOf(_) => Interval::TOP,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

pub fn truth(env: &AbstractEnv, t: &Term) -> Truth {
    let v = eval_term(env, t);
    if v.is_bottom() {
        Truth::Unknown
    } else if !v.contains(0) {
        Truth::True
    } else if v == FALSE {
        Truth::False
    } else {
        Truth::Unknown
    }
}

fn negate(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Ge,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Ge => BinOp::Lt,
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        other => other,
    }
}

/// `a op b` is equivalent to `b (mirror op) a`.
fn mirror(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        other => other,
    }
}

fn dec(b: Bound) -> Bound {
    match b {
        Bound::Finite(v) => Bound::Finite(v.saturating_sub(1)),
        other => other,
    }
}

fn inc(b: Bound) -> Bound {
    match b {
        Bound::Finite(v) => Bound::Finite(v.saturating_add(1)),
        other => other,
    }
}

/// Values of `x` such that `x op y` for some `y` in `other`.
fn constrain(x: &Interval, op: BinOp, other: &Interval) -> Interval {
    let Some((lo, hi)) = other.bounds() else {
        return Interval::Bottom;
    };
    match op {
        BinOp::Lt => x.meet(&Interval::new(Bound::NegInf, dec(hi))),
        BinOp::Le => x.meet(&Interval::new(Bound::NegInf, hi)),
        BinOp::Gt => x.meet(&Interval::new(inc(lo), Bound::PosInf)),
        BinOp::Ge => x.meet(&Interval::new(lo, Bound::PosInf)),
        BinOp::Eq => x.meet(other),
        BinOp::Ne => match (other.as_singleton(), x.bounds()) {
            (Some(c), Some((xlo, xhi))) => {
                let lo = if xlo == Bound::Finite(c) { inc(xlo) } else { xlo };
                let hi = if xhi == Bound::Finite(c) { dec(xhi) } else { xhi };
                if xlo == xhi && xlo == Bound::Finite(c) {
                    Interval::Bottom
                } else {
                    Interval::new(lo, hi)
                }
            }
            _ => *x,
        },
        _ => *x,
    }
}

fn refine_var(env: AbstractEnv, name: &str, op: BinOp, other: &Interval) -> Option<AbstractEnv> {
    match env.get(name) {
        Some(AVal::Int(x)) => {
            let v = constrain(x, op, other);
            env.with(name, AVal::Int(v))
        }
        _ => Some(env),
    }
}

/// Over-approximates the states of `env` in which `t` evaluates to a
/// nonzero value (`holds`) or to zero (`!holds`). Constraints are
/// propagated through `!`, `&&`, `||` and comparisons with a variable on
/// either side.
pub fn refine(env: &AbstractEnv, t: &Term, holds: bool) -> Option<AbstractEnv> {
    let out = match t {
        Term::Unop(UnOp::Not, a) => refine(env, a, !holds)?,
        Term::Binop(BinOp::And, a, b) if holds => refine(&refine(env, a, true)?, b, true)?,
        Term::Binop(BinOp::Or, a, b) if !holds => refine(&refine(env, a, false)?, b, false)?,
        Term::Binop(BinOp::And, a, b) => {
            let left_false = refine(env, a, false);
            let right_false = refine(env, a, true).and_then(|e| refine(&e, b, false));
            join_opt(left_false.as_ref(), right_false.as_ref())?
        }
        Term::Binop(BinOp::Or, a, b) => {
            let left_true = refine(env, a, true);
            let right_true = refine(env, a, false).and_then(|e| refine(&e, b, true));
            join_opt(left_true.as_ref(), right_true.as_ref())?
        }
        Term::Binop(op, l, r) if op.is_comparison() => {
            let op = if holds { *op } else { negate(*op) };
            let lv = eval_term(env, l);
            let rv = eval_term(env, r);
            let mut e = env.clone();
            if let Term::Var(x) = &**l {
                e = refine_var(e, x, op, &rv)?;
            }
            if let Term::Var(y) = &**r {
                e = refine_var(e, y, mirror(op), &lv)?;
            }
            e
        }
        Term::Var(x) => {
            let (op, zero) = (if holds { BinOp::Ne } else { BinOp::Eq }, Interval::singleton(0));
            refine_var(env.clone(), x, op, &zero)?
        }
        _ => env.clone(),
    };
    let v = eval_term(&out, t);
    let possible = if holds { may_be_nonzero(&v) } else { may_be_zero(&v) };
    possible.then_some(out)
}
