//! Per-function control-flow graphs.
//!
//! Program points sit between statements. Every statement has an entry
//! point; a `while` also has a head point where its condition is evaluated
//! on each iteration. Point 0 is the function entry and point 1 its exit.

use std::collections::HashMap;

use frontend::{Expr, FunctionDef, NodeId, Stmt, StmtKind, Term};

pub const ENTRY: usize = 0;
pub const EXIT: usize = 1;

#[derive(Debug)]
pub enum Action<'a> {
    Nop,
    Assign(&'a str, &'a Expr),
    ArrayAssign(&'a str, &'a Expr, &'a Expr),
    /// Condition holds (`true`) or fails (`false`).
    Guard(&'a Expr, Term, bool),
    Eval(&'a Expr),
    /// `None` is falling off the end of the body, which returns 0.
    Return(Option<&'a Expr>),
}

#[derive(Debug)]
pub struct Edge<'a> {
    pub from: usize,
    pub to: usize,
    pub action: Action<'a>,
}

#[derive(Debug)]
pub struct Cfg<'a> {
    pub function: &'a FunctionDef,
    pub points: usize,
    pub edges: Vec<Edge<'a>>,
    pub succs: Vec<Vec<usize>>,
    pub preds: Vec<Vec<usize>>,
    pub enter: HashMap<NodeId, usize>,
    pub head: HashMap<NodeId, usize>,
    pub loop_head: Vec<bool>,
    /// Statements whose entry is each point.
    pub stmts_at: Vec<Vec<NodeId>>,
    /// Reachable points in reverse post-order.
    pub rpo: Vec<usize>,
    /// Position in `rpo`; unreachable points get `usize::MAX`.
    pub rpo_index: Vec<usize>,
}

impl<'a> Cfg<'a> {
    pub fn build(function: &'a FunctionDef) -> Cfg<'a> {
        let mut b = Builder {
            points: 2,
            edges: Vec::new(),
            enter: HashMap::new(),
            head: HashMap::new(),
            heads: Vec::new(),
        };
        let mut cur = ENTRY;
        for s in &function.body {
            cur = b.stmt(s, cur);
        }
        b.edge(cur, EXIT, Action::Return(None));

        let n = b.points;
        let mut succs = vec![Vec::new(); n];
        let mut preds = vec![Vec::new(); n];
        for (i, e) in b.edges.iter().enumerate() {
            succs[e.from].push(i);
            preds[e.to].push(i);
        }
        let mut loop_head = vec![false; n];
        for h in b.heads {
            loop_head[h] = true;
        }
        let mut stmts_at = vec![Vec::new(); n];
        for (&s, &p) in &b.enter {
            stmts_at[p].push(s);
        }
        stmts_at.iter_mut().for_each(|v| v.sort());

        let rpo = reverse_postorder(n, &succs, &b.edges);
        let mut rpo_index = vec![usize::MAX; n];
        for (i, &p) in rpo.iter().enumerate() {
            rpo_index[p] = i;
        }
        Cfg {
            function,
            points: n,
            edges: b.edges,
            succs,
            preds,
            enter: b.enter,
            head: b.head,
            loop_head,
            stmts_at,
            rpo,
            rpo_index,
        }
    }
}

/// Successors are explored last to first, so a loop body comes before the
/// loop exit and each loop settles before the code after it is visited.
fn reverse_postorder(n: usize, succs: &[Vec<usize>], edges: &[Edge<'_>]) -> Vec<usize> {
    let mut seen = vec![false; n];
    let mut post = Vec::with_capacity(n);
    let mut stack = vec![(ENTRY, 0usize)];
    seen[ENTRY] = true;
    while let Some((p, i)) = stack.pop() {
        if let Some(&e) = succs[p].iter().rev().nth(i) {
            stack.push((p, i + 1));
            let q = edges[e].to;
            if !seen[q] {
                seen[q] = true;
                stack.push((q, 0));
            }
        } else {
            post.push(p);
        }
    }
    post.reverse();
    post
}

struct Builder<'a> {
    points: usize,
    edges: Vec<Edge<'a>>,
    enter: HashMap<NodeId, usize>,
    head: HashMap<NodeId, usize>,
    heads: Vec<usize>,
}

impl<'a> Builder<'a> {
    fn fresh(&mut self) -> usize {
        self.points += 1;
        self.points - 1
    }

    fn edge(&mut self, from: usize, to: usize, action: Action<'a>) {
        self.edges.push(Edge { from, to, action });
    }

    fn step(&mut self, from: usize, action: Action<'a>) -> usize {
        let to = self.fresh();
        self.edge(from, to, action);
        to
    }

    fn guard(&mut self, from: usize, to: usize, cond: &'a Expr, holds: bool) {
        self.edge(from, to, Action::Guard(cond, Term::from_expr(cond), holds));
    }

    fn stmt(&mut self, s: &'a Stmt, p: usize) -> usize {
        self.enter.insert(s.id, p);
        match &s.kind {
            StmtKind::Assign { target, value } => self.step(p, Action::Assign(target, value)),
            StmtKind::ArrayAssign { array, index, value } => self.step(p, Action::ArrayAssign(array, index, value)),
            StmtKind::ExprStmt(e) => self.step(p, Action::Eval(e)),
            StmtKind::Return(e) => {
                self.edge(p, EXIT, Action::Return(Some(e)));
                self.fresh()
            }
            StmtKind::Block(stmts) => stmts.iter().fold(p, |cur, c| self.stmt(c, cur)),
            StmtKind::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let t = self.fresh();
                self.guard(p, t, cond, true);
                let after_then = self.stmt(then_branch, t);
                let join = self.fresh();
                match else_branch {
                    Some(e) => {
                        let f = self.fresh();
                        self.guard(p, f, cond, false);
                        let after_else = self.stmt(e, f);
                        self.edge(after_else, join, Action::Nop);
                    }
                    None => self.guard(p, join, cond, false),
                }
                self.edge(after_then, join, Action::Nop);
                join
            }
            StmtKind::While { cond, body } => {
                let h = self.step(p, Action::Nop);
                self.head.insert(s.id, h);
                self.heads.push(h);
                let b = self.fresh();
                self.guard(h, b, cond, true);
                let end = self.stmt(body, b);
                self.edge(end, h, Action::Nop);
                let out = self.fresh();
                self.guard(h, out, cond, false);
                out
            }
        }
    }
}
