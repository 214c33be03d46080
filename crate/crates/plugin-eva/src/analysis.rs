//! Forward worklist analysis with call inlining.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use frontend::{Expr, ExprKind, FunctionDef, Location, NodeId, StmtKind, Term, Type, TypedAst};
use interval::Interval;
use kernel::{Property, PropertyId, PropertyKind};

use crate::cfg::{Action, Cfg, Edge, ENTRY, EXIT};
use crate::domain::{self, AVal, AbstractEnv, TargetSet, Truth, RESULT};

/// Calls nested deeper than this are not inlined.
pub const MAX_INLINE_DEPTH: usize = 3;
pub const MAX_WLEVEL: u32 = 64;
/// Upper bound on point visits in one fixpoint at desk scale.
pub const VISIT_BUDGET: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaOptions {
    pub wlevel: u32,
    pub narrow: bool,
    pub assume_asserts: bool,
}

impl Default for EvaOptions {
    fn default() -> Self {
        EvaOptions {
            wlevel: 3,
            narrow: true,
            assume_asserts: true,
        }
    }
}

/// Where a property is checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Site {
    Stmt(NodeId),
    Call(NodeId),
    Exit(String),
}

/// A property to check, independent of the kernel database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub id: PropertyId,
    pub site: Site,
    pub pred: Term,
    /// Generated assertions on a loop are checked at every iteration.
    pub generated: bool,
}

impl From<&Property> for Obligation {
    fn from(p: &Property) -> Obligation {
        let site = match &p.kind {
            PropertyKind::Assertion => Site::Stmt(p.attach),
            PropertyKind::Precondition(call) => Site::Call(*call),
            PropertyKind::Postcondition(f) => Site::Exit(f.clone()),
        };
        Obligation {
            id: p.id,
            site,
            pred: p.annotation.pred.clone(),
            generated: *p.origin() != frontend::Origin::Source,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Holds in every analyzed context, assuming `hypotheses`. `vacuous`
    /// when no context reached the check with a non-bottom state.
    Proved {
        hypotheses: BTreeSet<PropertyId>,
        vacuous: bool,
    },
    Unknown,
}

type Hyps = BTreeSet<PropertyId>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct State {
    env: Option<AbstractEnv>,
    hyps: Hyps,
}

impl State {
    fn join(&self, other: &State) -> State {
        State {
            env: domain::join_opt(self.env.as_ref(), other.env.as_ref()),
            hyps: self.hyps.union(&other.hyps).cloned().collect(),
        }
    }

    fn widen(&self, new: &State) -> State {
        let env = match (&self.env, &new.env) {
            (Some(a), Some(b)) => Some(a.widen(b)),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        State {
            env,
            hyps: self.hyps.union(&new.hyps).cloned().collect(),
        }
    }

    fn narrow(&self, new: &State) -> State {
        let env = match (&self.env, &new.env) {
            (Some(a), Some(b)) => a.narrow(b),
            (_, b) => b.clone(),
        };
        State {
            env,
            hyps: new.hyps.clone(),
        }
    }
}

#[derive(Clone, Debug)]
enum Agg {
    Proved(Hyps, bool),
    Unknown,
}

/// Results of one whole-program analysis from `main`.
#[derive(Clone, Debug, Default)]
pub struct Analysis {
    verdicts: BTreeMap<PropertyId, Verdict>,
    stmt_envs: HashMap<NodeId, Option<AbstractEnv>>,
    expr_vals: HashMap<NodeId, Interval>,
    fn_targets: HashMap<NodeId, Vec<String>>,
    pub warnings: Vec<(Location, String)>,
    /// Largest number of point visits in a single fixpoint computation.
    pub max_visits: usize,
}

impl Analysis {
    pub fn verdict(&self, id: PropertyId) -> Option<&Verdict> {
        self.verdicts.get(&id)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = (PropertyId, &Verdict)> {
        self.verdicts.iter().map(|(k, v)| (*k, v))
    }

    /// Join of the states at the statement's entry; `None` if never reached.
    pub fn stmt_env(&self, stmt: NodeId) -> Option<&AbstractEnv> {
        self.stmt_envs.get(&stmt)?.as_ref()
    }

    /// Interval of an expression over all its evaluations. Bottom if it
    /// was never evaluated; top for function-pointer expressions.
    pub fn eval_at(&self, expr: NodeId) -> Interval {
        self.expr_vals.get(&expr).copied().unwrap_or(Interval::Bottom)
    }

    /// Sorted possible callees of an indirect call.
    pub fn fn_targets(&self, call: NodeId) -> Vec<String> {
        self.fn_targets.get(&call).cloned().unwrap_or_default()
    }
}

struct Program<'a> {
    ast: &'a TypedAst,
    cfgs: HashMap<&'a str, Cfg<'a>>,
    /// Obligation indices per function and point, in property-id order.
    checks: HashMap<&'a str, HashMap<usize, Vec<usize>>>,
}

impl<'a> Program<'a> {
    fn new(ast: &'a TypedAst, obligations: &[Obligation]) -> Program<'a> {
        let cfgs: HashMap<&str, Cfg> = ast.functions().iter().map(|f| (f.name.as_str(), Cfg::build(f))).collect();
        let mut checks: HashMap<&str, HashMap<usize, Vec<usize>>> = HashMap::new();
        let mut order: Vec<usize> = (0..obligations.len()).collect();
        order.sort_by_key(|&i| obligations[i].id);
        for i in order {
            let ob = &obligations[i];
            let placed = match &ob.site {
                Site::Stmt(s) => Self::stmt_point(ast, &cfgs, *s, ob.generated),
                Site::Call(c) => ast.enclosing_stmt(*c).and_then(|s| Self::stmt_point(ast, &cfgs, s, true)),
                Site::Exit(f) => cfgs.get_key_value(f.as_str()).map(|(k, _)| (*k, EXIT)),
            };
            if let Some((f, p)) = placed {
                checks.entry(f).or_default().entry(p).or_default().push(i);
            }
        }
        Program { ast, cfgs, checks }
    }

    fn stmt_point(
        ast: &'a TypedAst,
        cfgs: &HashMap<&'a str, Cfg<'a>>,
        stmt: NodeId,
        per_iteration: bool,
    ) -> Option<(&'a str, usize)> {
        let f = ast.function_of(stmt)?;
        let cfg = cfgs.get(f.name.as_str())?;
        let is_loop = matches!(ast.find_stmt(stmt)?.kind, StmtKind::While { .. });
        let p = if per_iteration && is_loop {
            cfg.head.get(&stmt)?
        } else {
            cfg.enter.get(&stmt)?
        };
        Some((f.name.as_str(), *p))
    }

    fn arity(&self, name: &str) -> Option<usize> {
        self.ast.function(name).map(|f| f.params.len())
    }

    fn resolve(&self, targets: &TargetSet, arity: usize) -> Vec<String> {
        let mut v: Vec<String> = match targets {
            TargetSet::Set(s) => s.iter().filter(|f| self.arity(f) == Some(arity)).cloned().collect(),
            TargetSet::Any => self
                .ast
                .functions()
                .iter()
                .filter(|f| f.params.len() == arity)
                .map(|f| f.name.clone())
                .collect(),
        };
        v.sort();
        v
    }
}

type MemoKey = (String, Vec<AVal>, Hyps, usize);

struct Analyzer<'p, 'a> {
    prog: &'p Program<'a>,
    opts: &'p EvaOptions,
    obligations: &'p [Obligation],
    stack: Vec<String>,
    memo: HashMap<MemoKey, (Interval, Hyps)>,
    top_done: HashSet<String>,
    agg: Vec<Option<Agg>>,
    warned: HashSet<NodeId>,
    out: Analysis,
    raw_targets: HashMap<NodeId, (TargetSet, usize)>,
}

/// Analyzes the program from `main`. `None` if there is no `main`.
pub fn analyze(ast: &TypedAst, obligations: &[Obligation], opts: &EvaOptions) -> Option<Analysis> {
    let main = ast.function("main")?;
    let prog = Program::new(ast, obligations);
    let mut a = Analyzer {
        prog: &prog,
        opts,
        obligations,
        stack: Vec::new(),
        memo: HashMap::new(),
        top_done: HashSet::new(),
        agg: vec![None; obligations.len()],
        warned: HashSet::new(),
        out: Analysis::default(),
        raw_targets: HashMap::new(),
    };
    let mut env = initial_env(main, main.params.iter().map(|p| top_of(p.ty)).collect());
    if let (Some(e), Some(req)) = (env.as_ref(), &main.contract.requires) {
        env = domain::refine(e, &req.pred, true);
    }
    a.run(main, env, Hyps::new(), 0, true);
    Some(a.finish())
}

fn top_of(ty: Type) -> AVal {
    match ty {
        Type::FnPtr => AVal::Fn(TargetSet::Any),
        _ => AVal::Int(Interval::TOP),
    }
}

fn initial_env(f: &FunctionDef, args: Vec<AVal>) -> Option<AbstractEnv> {
    let params = f.params.iter().zip(args).map(|(p, a)| {
        let v = match (p.ty, a) {
            (Type::FnPtr, v @ AVal::Fn(_)) => v,
            (Type::FnPtr, _) => AVal::Fn(TargetSet::Any),
            (_, v @ AVal::Int(_)) => v,
            (_, _) => AVal::Int(Interval::TOP),
        };
        (p.name.clone(), v)
    });
    let locals = f.locals.iter().map(|l| {
        let v = match l.ty {
            Type::IntArray(n) => AVal::Array(n, Interval::singleton(0)),
            Type::FnPtr => AVal::Fn(TargetSet::empty()),
            _ => AVal::Int(Interval::singleton(0)),
        };
        (l.name.clone(), v)
    });
    AbstractEnv::from_vars(params.chain(locals).collect::<Vec<_>>())
}

impl<'p, 'a> Analyzer<'p, 'a> {
    fn finish(mut self) -> Analysis {
        for (i, ob) in self.obligations.iter().enumerate() {
            let v = match self.agg[i].take() {
                None => Verdict::Proved {
                    hypotheses: Hyps::new(),
                    vacuous: true,
                },
                Some(Agg::Proved(h, reached)) => Verdict::Proved {
                    hypotheses: h,
                    vacuous: !reached,
                },
                Some(Agg::Unknown) => Verdict::Unknown,
            };
            self.out.verdicts.insert(ob.id, v);
        }
        for (site, (ts, arity)) in &self.raw_targets {
            self.out.fn_targets.insert(*site, self.prog.resolve(ts, *arity));
        }
        self.out
    }

    fn warn(&mut self, site: &Expr, msg: String) {
        if self.warned.insert(site.id) {
            self.out.warnings.push((site.loc.clone(), msg));
        }
    }

    fn note(&mut self, i: usize, verdict: Agg) {
        let merged = match (self.agg[i].take(), verdict) {
            (Some(Agg::Unknown), _) | (_, Agg::Unknown) => Agg::Unknown,
            (None, v) => v,
            (Some(Agg::Proved(mut h, r1)), Agg::Proved(h2, r2)) => {
                h.extend(h2);
                Agg::Proved(h, r1 || r2)
            }
        };
        self.agg[i] = Some(merged);
    }

    /// Runs one function to a fixpoint; in recording mode the final states
    /// are also recorded. Returns the state at each point.
    fn run(
        &mut self,
        f: &'a FunctionDef,
        env: Option<AbstractEnv>,
        hyps: Hyps,
        depth: usize,
        record: bool,
    ) -> Vec<Option<State>> {
        let prog = self.prog;
        let cfg = &prog.cfgs[f.name.as_str()];
        self.stack.push(f.name.clone());
        let mut states: Vec<Option<State>> = vec![None; cfg.points];
        states[ENTRY] = Some(State { env, hyps });

        let mut worklist = BTreeSet::from([(cfg.rpo_index[ENTRY], ENTRY)]);
        let mut updates = vec![0u32; cfg.points];
        let mut visits = 0usize;
        while let Some((_, p)) = worklist.pop_first() {
            visits += 1;
            let st = self.check(cfg, p, states[p].clone().expect("queued point has a state"), false);
            for &ei in &cfg.succs[p] {
                let edge = &cfg.edges[ei];
                let out = self.transfer(f, edge, &st, depth, false);
                let q = edge.to;
                let new = match &states[q] {
                    None => out,
                    Some(old) => {
                        let next = if cfg.loop_head[q] {
                            updates[q] += 1;
                            if updates[q] > self.opts.wlevel {
                                old.widen(&out)
                            } else {
                                old.join(&out)
                            }
                        } else {
                            old.join(&out)
                        };
                        if next == *old {
                            continue;
                        }
                        next
                    }
                };
                states[q] = Some(new);
                worklist.insert((cfg.rpo_index[q], q));
            }
        }
        self.out.max_visits = self.out.max_visits.max(visits);

        if self.opts.narrow {
            for &p in cfg.rpo.iter().skip(1) {
                let mut acc: Option<State> = None;
                for &ei in &cfg.preds[p] {
                    let edge = &cfg.edges[ei];
                    let Some(src) = states[edge.from].clone() else { continue };
                    let src = self.check(cfg, edge.from, src, false);
                    let out = self.transfer(f, edge, &src, depth, false);
                    acc = Some(match acc {
                        None => out,
                        Some(a) => a.join(&out),
                    });
                }
                states[p] = match (&states[p], acc) {
                    (Some(old), Some(new)) if cfg.loop_head[p] => Some(old.narrow(&new)),
                    (_, new) => new,
                };
            }
        }

        if record {
            for &p in &cfg.rpo {
                let Some(st) = states[p].clone() else { continue };
                for s in &cfg.stmts_at[p] {
                    let slot = self.out.stmt_envs.entry(*s).or_insert(None);
                    *slot = domain::join_opt(slot.as_ref(), st.env.as_ref());
                }
                let st = self.check(cfg, p, st, true);
                for &ei in &cfg.succs[p] {
                    self.transfer(f, &cfg.edges[ei], &st, depth, true);
                }
            }
        }
        self.stack.pop();
        states
    }

    /// Evaluates the properties checked at `p`, reducing the state by the
    /// undecided ones when assuming is on.
    fn check(&mut self, cfg: &Cfg<'a>, p: usize, mut st: State, record: bool) -> State {
        let prog = self.prog;
        let Some(list) = prog.checks.get(cfg.function.name.as_str()).and_then(|m| m.get(&p)) else {
            return st;
        };
        let obligations = self.obligations;
        for &i in list {
            let ob = &obligations[i];
            let without_self = || {
                let mut h = st.hyps.clone();
                h.remove(&ob.id);
                h
            };
            let Some(env) = &st.env else {
                if record {
                    let h = without_self();
                    self.note(i, Agg::Proved(h, false));
                }
                continue;
            };
            if domain::truth(env, &ob.pred) == Truth::True {
                if record {
                    let h = without_self();
                    self.note(i, Agg::Proved(h, true));
                }
                continue;
            }
            if record {
                self.note(i, Agg::Unknown);
            }
            if self.opts.assume_asserts && !matches!(ob.site, Site::Exit(_)) {
                st.env = domain::refine(env, &ob.pred, true);
                st.hyps.insert(ob.id);
            }
        }
        st
    }

    fn transfer(&mut self, f: &FunctionDef, edge: &Edge<'a>, st: &State, depth: usize, record: bool) -> State {
        let Some(env) = &st.env else { return st.clone() };
        let mut hyps = st.hyps.clone();
        let env = match &edge.action {
            Action::Nop => Some(env.clone()),
            Action::Assign(x, e) => {
                let v = if f.var_type(x) == Some(Type::FnPtr) {
                    AVal::Fn(self.eval_fn(env, e, record))
                } else {
                    AVal::Int(self.eval(env, e, &mut hyps, depth, record))
                };
                env.clone().with(x, v)
            }
            Action::ArrayAssign(a, index, value) => {
                let i = self.eval(env, index, &mut hyps, depth, record);
                let v = if i.is_bottom() {
                    Interval::Bottom
                } else {
                    self.eval(env, value, &mut hyps, depth, record)
                };
                match env.get(a) {
                    Some(AVal::Array(n, cells)) if !i.meet(&Interval::range(0, *n as i64 - 1)).is_bottom() => {
                        let (n, cells) = (*n, cells.join(&v));
                        if v.is_bottom() {
                            None
                        } else {
                            env.clone().with(a, AVal::Array(n, cells))
                        }
                    }
                    _ => None,
                }
            }
            Action::Guard(cond, term, holds) => {
                let v = self.eval(env, cond, &mut hyps, depth, record);
                let possible = if *holds {
                    !v.is_bottom() && v != Interval::singleton(0)
                } else {
                    v.contains(0)
                };
                if possible {
                    domain::refine(env, term, *holds)
                } else {
                    None
                }
            }
            Action::Eval(e) => {
                let v = self.eval(env, e, &mut hyps, depth, record);
                (!v.is_bottom()).then(|| env.clone())
            }
            Action::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(env, e, &mut hyps, depth, record),
                    None => Interval::singleton(0),
                };
                env.clone().with(RESULT, AVal::Int(v))
            }
        };
        State { env, hyps }
    }

    fn eval_fn(&mut self, env: &AbstractEnv, e: &Expr, record: bool) -> TargetSet {
        if record {
            self.out.expr_vals.insert(e.id, Interval::TOP);
        }
        match &e.kind {
            ExprKind::AddrOfFn(g) => TargetSet::single(g),
            ExprKind::Var(x) => env.targets(x).cloned().unwrap_or(TargetSet::Any),
            _ => TargetSet::Any,
        }
    }

    fn eval_args(
        &mut self,
        env: &AbstractEnv,
        args: &[Expr],
        hyps: &mut Hyps,
        depth: usize,
        record: bool,
    ) -> Option<Vec<AVal>> {
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            if self.prog.ast.type_of(a.id) == Some(Type::FnPtr) {
                vals.push(AVal::Fn(self.eval_fn(env, a, record)));
            } else {
                let v = self.eval(env, a, hyps, depth, record);
                if v.is_bottom() {
                    return None;
                }
                vals.push(AVal::Int(v));
            }
        }
        Some(vals)
    }

    fn eval(&mut self, env: &AbstractEnv, e: &Expr, hyps: &mut Hyps, depth: usize, record: bool) -> Interval {
        let v = match &e.kind {
            ExprKind::IntLit(n) => Interval::singleton(*n),
            ExprKind::Var(x) => env.interval(x).unwrap_or(Interval::TOP),
            ExprKind::AddrOfFn(_) => Interval::TOP,
            ExprKind::ArrayRead { array, index } => {
                let i = self.eval(env, index, hyps, depth, record);
                match env.get(array) {
                    _ if i.is_bottom() => Interval::Bottom,
                    Some(AVal::Array(n, cells)) => {
                        if i.meet(&Interval::range(0, *n as i64 - 1)).is_bottom() {
                            Interval::Bottom
                        } else {
                            *cells
                        }
                    }
                    _ => Interval::TOP,
                }
            }
            ExprKind::Binop { op, lhs, rhs } if op.is_logical() => {
                let l = self.eval(env, lhs, hyps, depth, record);
                domain::logical(*op, &l, || self.eval(env, rhs, hyps, depth, record))
            }
            ExprKind::Binop { op, lhs, rhs } => {
                let l = self.eval(env, lhs, hyps, depth, record);
                if l.is_bottom() {
                    Interval::Bottom
                } else {
                    let r = self.eval(env, rhs, hyps, depth, record);
                    domain::apply_binop(*op, &l, &r)
                }
            }
            ExprKind::Unop { op, operand } => {
                let v = self.eval(env, operand, hyps, depth, record);
                domain::apply_unop(*op, &v)
            }
            ExprKind::Call { callee, args } => match self.eval_args(env, args, hyps, depth, record) {
                None => Interval::Bottom,
                Some(vals) => {
                    let (r, h) = self.call(e, callee, vals, hyps.clone(), depth + 1, record);
                    *hyps = h;
                    r
                }
            },
            ExprKind::IndirectCall { target, args } => {
                let ts = env.targets(target).cloned().unwrap_or(TargetSet::Any);
                if record {
                    let slot = self.raw_targets.entry(e.id).or_insert((TargetSet::empty(), args.len()));
                    slot.0 = slot.0.join(&ts);
                }
                match self.eval_args(env, args, hyps, depth, record) {
                    None => Interval::Bottom,
                    Some(vals) => {
                        let mut result = Interval::Bottom;
                        let mut out = hyps.clone();
                        for name in self.prog.resolve(&ts, args.len()) {
                            let (r, h) = self.call(e, &name, vals.clone(), hyps.clone(), depth + 1, record);
                            result = result.join(&r);
                            out.extend(h);
                        }
                        *hyps = out;
                        result
                    }
                }
            }
        };
        if record {
            let slot = self.out.expr_vals.entry(e.id).or_insert(Interval::Bottom);
            *slot = slot.join(&v);
        }
        v
    }

    fn call(&mut self, site: &Expr, name: &str, args: Vec<AVal>, hyps: Hyps, depth: usize, record: bool) -> (Interval, Hyps) {
        let prog = self.prog;
        let Some(f) = prog.ast.function(name) else {
            return (Interval::TOP, hyps);
        };
        let recursive = self.stack.iter().any(|s| s == name);
        if recursive || depth > MAX_INLINE_DEPTH {
            let why = if recursive { "recursive call" } else { "call nested too deep" };
            self.warn(site, format!("{why} to {name}; result unknown"));
            self.top_context(f);
            return (Interval::TOP, hyps);
        }
        let key = (name.to_string(), args, hyps, depth);
        if !record {
            if let Some(r) = self.memo.get(&key) {
                return r.clone();
            }
        }
        let env = initial_env(f, key.1.clone());
        let states = self.run(f, env, key.2.clone(), depth, record);
        let result = match &states[EXIT] {
            Some(st) => {
                let r = st.env.as_ref().and_then(|e| e.interval(RESULT)).unwrap_or(Interval::Bottom);
                (r, st.hyps.clone())
            }
            None => (Interval::Bottom, key.2.clone()),
        };
        if !record {
            self.memo.insert(key, result.clone());
        }
        result
    }

    /// Records a function once under unknown arguments, covering the
    /// calls that were not inlined.
    fn top_context(&mut self, f: &'a FunctionDef) {
        if !self.top_done.insert(f.name.clone()) {
            return;
        }
        let env = initial_env(f, f.params.iter().map(|p| top_of(p.ty)).collect());
        let saved = std::mem::take(&mut self.stack);
        self.run(f, env, Hyps::new(), 0, true);
        self.stack = saved;
    }
}
