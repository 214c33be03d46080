//! Read-only pre-order traversal.
//!
//! The traversal order is the numbering order: a function, then each body
//! statement; a statement, then the expressions it evaluates itself, then
//! its nested statements; an expression, then its operands left to right.
//! Visiting a numbered unit therefore yields strictly increasing ids.

use crate::ast::*;

/// Per-node-kind callbacks. All default to doing nothing.
pub trait Visitor {
    fn visit_function(&mut self, _f: &FunctionDef) {}
    fn visit_stmt(&mut self, _s: &Stmt) {}
    fn visit_expr(&mut self, _e: &Expr) {}
}

pub fn walk_unit<V: Visitor + ?Sized>(unit: &Unit, v: &mut V) {
    for f in &unit.functions {
        walk_function(f, v);
    }
}

pub fn walk_function<V: Visitor + ?Sized>(f: &FunctionDef, v: &mut V) {
    v.visit_function(f);
    for s in &f.body {
        walk_stmt(s, v);
    }
}

pub fn walk_stmt<V: Visitor + ?Sized>(s: &Stmt, v: &mut V) {
    v.visit_stmt(s);
    for e in s.own_exprs() {
        walk_expr(e, v);
    }
    for c in s.sub_stmts() {
        walk_stmt(c, v);
    }
}

pub fn walk_expr<V: Visitor + ?Sized>(e: &Expr, v: &mut V) {
    v.visit_expr(e);
    for c in e.children() {
        walk_expr(c, v);
    }
}

/// Assigns ids `0..n` in traversal order and points every source assert at
/// the statement it precedes.
pub(crate) fn renumber(unit: &mut Unit) {
    let mut next = 0u32;
    let mut fresh = || {
        let id = NodeId(next);
        next += 1;
        id
    };
    for f in &mut unit.functions {
        f.id = fresh();
        for s in &mut f.body {
            renumber_stmt(s, &mut fresh);
        }
    }
}

fn renumber_stmt(s: &mut Stmt, fresh: &mut dyn FnMut() -> NodeId) {
    s.id = fresh();
    for a in &mut s.asserts {
        a.kind = AnnotationKind::Assert { attach: s.id };
    }
    match &mut s.kind {
        StmtKind::Assign { value, .. } => renumber_expr(value, fresh),
        StmtKind::ArrayAssign { index, value, .. } => {
            renumber_expr(index, fresh);
            renumber_expr(value, fresh);
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            renumber_expr(cond, fresh);
            renumber_stmt(then_branch, fresh);
            if let Some(e) = else_branch {
                renumber_stmt(e, fresh);
            }
        }
        StmtKind::While { cond, body } => {
            renumber_expr(cond, fresh);
            renumber_stmt(body, fresh);
        }
        StmtKind::Return(e) | StmtKind::ExprStmt(e) => renumber_expr(e, fresh),
        StmtKind::Block(stmts) => {
            for c in stmts {
                renumber_stmt(c, fresh);
            }
        }
    }
}

fn renumber_expr(e: &mut Expr, fresh: &mut dyn FnMut() -> NodeId) {
    e.id = fresh();
    match &mut e.kind {
        ExprKind::IntLit(_) | ExprKind::Var(_) | ExprKind::AddrOfFn(_) => {}
        ExprKind::ArrayRead { index, .. } => renumber_expr(index, fresh),
        ExprKind::Binop { lhs, rhs, .. } => {
            renumber_expr(lhs, fresh);
            renumber_expr(rhs, fresh);
        }
        ExprKind::Unop { operand, .. } => renumber_expr(operand, fresh),
        ExprKind::Call { args, .. } | ExprKind::IndirectCall { args, .. } => {
            for a in args {
                renumber_expr(a, fresh);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{lexer::tokenize, parser::parse};

    #[derive(Default)]
    struct Counter {
        functions: usize,
        stmts: usize,
        exprs: usize,
        ids: Vec<NodeId>,
    }

    impl Visitor for Counter {
        fn visit_function(&mut self, f: &FunctionDef) {
            self.functions += 1;
            self.ids.push(f.id);
        }
        fn visit_stmt(&mut self, s: &Stmt) {
            self.stmts += 1;
            self.ids.push(s.id);
        }
        fn visit_expr(&mut self, e: &Expr) {
            self.exprs += 1;
            self.ids.push(e.id);
        }
    }

    fn unit(src: &str) -> Unit {
        parse(&tokenize(src, "t.mc").unwrap()).unwrap()
    }

    #[test]
    fn three_statements() {
        let u = unit("int main(){ int x; x = 1; x = x + 1; return x; }");
        let mut c = Counter::default();
        walk_unit(&u, &mut c);
        assert_eq!(c.stmts, 3);
        assert_eq!(c.functions, 1);
    }

    #[test]
    fn empty_unit_has_no_callbacks() {
        let mut c = Counter::default();
        walk_unit(&Unit::default(), &mut c);
        assert_eq!(c.functions + c.stmts + c.exprs, 0);
    }

    #[test]
    fn traversal_order_is_id_order() {
        let u = unit(
            "int g(int a){ return a * 2; }
             int main(){ int i = 0; int a[3];
               while (i < 3) { if (i % 2 == 0) a[i] = g(i); else { a[i] = -i; } i = i + 1; }
               return a[0]; }",
        );
        let mut c = Counter::default();
        walk_unit(&u, &mut c);
        let expected: Vec<NodeId> = (0..c.ids.len() as u32).map(NodeId).collect();
        assert_eq!(c.ids, expected);
    }
}
