//! Debug printer producing parseable MiniC.
//!
//! Local declarations are hoisted to the top of the function body. Since
//! an initializer is already an ordinary assignment in the tree, printing
//! and re-parsing yields the same tree up to source locations.

use std::fmt::Write;

use crate::ast::*;

pub fn print_unit(unit: &Unit) -> String {
    let mut out = String::new();
    for (i, f) in unit.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(f, &mut out);
    }
    out
}

fn print_function(f: &FunctionDef, out: &mut String) {
    if let Some(r) = &f.contract.requires {
        let _ = writeln!(out, "//@ requires {};", r.pred);
    }
    if let Some(e) = &f.contract.ensures {
        let _ = writeln!(out, "//@ ensures {};", e.pred);
    }
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| match p.ty {
            Type::FnPtr => format!("fnptr {}", p.name),
            _ => format!("int {}", p.name),
        })
        .collect();
    let _ = writeln!(out, "int {}({}) {{", f.name, params.join(", "));
    for l in &f.locals {
        let _ = match l.ty {
            Type::IntArray(n) => writeln!(out, "  int {}[{}];", l.name, n),
            Type::FnPtr => writeln!(out, "  fnptr {};", l.name),
            _ => writeln!(out, "  int {};", l.name),
        };
    }
    for s in &f.body {
        print_stmt(s, 1, out);
    }
    out.push_str("}\n");
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_stmt(s: &Stmt, depth: usize, out: &mut String) {
    for a in &s.asserts {
        indent(depth, out);
        let _ = writeln!(out, "//@ assert {};", a.pred);
    }
    indent(depth, out);
    match &s.kind {
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{target} = {};", expr(value));
        }
        StmtKind::ArrayAssign {
            array,
            index,
            value,
        } => {
            let _ = writeln!(out, "{array}[{}] = {};", expr(index), expr(value));
        }
        StmtKind::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = writeln!(out, "if ({})", expr(cond));
            print_stmt(then_branch, depth + 1, out);
            if let Some(e) = else_branch {
                indent(depth, out);
                out.push_str("else\n");
                print_stmt(e, depth + 1, out);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({})", expr(cond));
            print_stmt(body, depth + 1, out);
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "return {};", expr(e));
        }
        StmtKind::ExprStmt(e) => {
            let _ = writeln!(out, "{};", expr(e));
        }
        StmtKind::Block(stmts) => {
            out.push_str("{\n");
            for c in stmts {
                print_stmt(c, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("}\n");
        }
    }
}

/// Program expressions print exactly like the equivalent predicate term.
pub fn expr(e: &Expr) -> String {
    Term::from_expr(e).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{lexer::tokenize, parser::parse};

    #[test]
    fn prints_hoisted_declarations() {
        let u = parse(&tokenize("int main(){ int x = 1; int a[2]; a[0] = x; return a[0]; }", "t.mc").unwrap()).unwrap();
        let text = print_unit(&u);
        assert!(text.starts_with("int main() {\n  int x;\n  int a[2];\n  x = 1;\n"), "{text}");
    }
}
