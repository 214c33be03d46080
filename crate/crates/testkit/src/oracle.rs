//! Independent reference computations.

use std::collections::BTreeSet;

use frontend::{BinOp, Expr, ExprKind, FunctionDef, NodeId, Stmt, StmtKind, Term, Type, TypedAst};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    True,
    False,
    Maybe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Global {
    Valid,
    Invalid,
    Unknown,
    Inconsistent,
}

/// Consolidation by plain iteration: keep marking a property proved while
/// some `True` emission on it has only proved hypotheses, until nothing
/// changes. Refutations need a `False` emission with proved hypotheses.
pub fn naive_consolidate<H: AsRef<[usize]>>(n: usize, emissions: &[(usize, Status, H)]) -> Vec<Global> {
    let mut proved = vec![false; n];
    loop {
        let mut changed = false;
        for (p, status, hyps) in emissions {
            if *status == Status::True && !proved[*p] && hyps.as_ref().iter().all(|h| proved[*h]) {
                proved[*p] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n)
        .map(|p| {
            let refuted = emissions
                .iter()
                .any(|(q, s, hyps)| *q == p && *s == Status::False && hyps.as_ref().iter().all(|h| proved[*h]));
            match (proved[p], refuted) {
                (true, true) => Global::Inconsistent,
                (true, false) => Global::Valid,
                (false, true) => Global::Invalid,
                (false, false) => Global::Unknown,
            }
        })
        .collect()
}

/// Which runtime-error sites to count.
#[derive(Clone, Copy, Debug)]
pub struct SiteRules {
    pub div: bool,
    pub bounds: bool,
}

/// Number of distinct (statement, guard) pairs a guard generator should
/// produce: every `/` and `%` guards its divisor, every array read or
/// write guards its index. Guards land on the innermost enclosing
/// statement; identical guards on one statement count once.
pub fn count_rte_sites(ast: &TypedAst, rules: SiteRules) -> usize {
    let mut seen: BTreeSet<(NodeId, String)> = BTreeSet::new();
    for f in ast.functions() {
        for s in &f.body {
            count_stmt(f, s, rules, &mut seen);
        }
    }
    seen.len()
}

fn index_guard(f: &FunctionDef, array: &str, index: &Expr) -> Option<String> {
    let Some(Type::IntArray(n)) = f.var_type(array) else { return None };
    let i = Term::from_expr(index);
    Some(format!("0 <= {i} && {i} < {n}"))
}

fn count_stmt(f: &FunctionDef, s: &Stmt, rules: SiteRules, seen: &mut BTreeSet<(NodeId, String)>) {
    let mut exprs: Vec<&Expr> = Vec::new();
    let mut children: Vec<&Stmt> = Vec::new();
    match &s.kind {
        StmtKind::Assign { value, .. } => exprs.push(value),
        StmtKind::ArrayAssign { array, index, value } => {
            if rules.bounds {
                if let Some(g) = index_guard(f, array, index) {
                    seen.insert((s.id, g));
                }
            }
            exprs.extend([index, value]);
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            exprs.push(cond);
            children.push(then_branch);
            children.extend(else_branch.as_deref());
        }
        StmtKind::While { cond, body } => {
            exprs.push(cond);
            children.push(body);
        }
        StmtKind::Return(e) | StmtKind::ExprStmt(e) => exprs.push(e),
        StmtKind::Block(b) => children.extend(b),
    }
    let mut stack = exprs;
    while let Some(e) = stack.pop() {
        match &e.kind {
            ExprKind::Binop { op: BinOp::Div | BinOp::Mod, lhs, rhs } => {
                if rules.div {
                    seen.insert((s.id, format!("{} != 0", Term::from_expr(rhs))));
                }
                stack.extend([&**lhs, &**rhs]);
            }
            ExprKind::Binop { lhs, rhs, .. } => stack.extend([&**lhs, &**rhs]),
            ExprKind::Unop { operand, .. } => stack.push(operand),
            ExprKind::ArrayRead { array, index } => {
                if rules.bounds {
                    if let Some(g) = index_guard(f, array, index) {
                        seen.insert((s.id, g));
                    }
                }
                stack.push(index);
            }
            ExprKind::Call { args, .. } | ExprKind::IndirectCall { args, .. } => stack.extend(args),
            ExprKind::IntLit(_) | ExprKind::Var(_) | ExprKind::AddrOfFn(_) => {}
        }
    }
    for c in children {
        count_stmt(f, c, rules, seen);
    }
}
