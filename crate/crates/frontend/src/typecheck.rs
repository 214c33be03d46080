use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::ast::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    UndeclaredVariable(String),
    UndeclaredFunction(String),
    ArityMismatch {
        function: String,
        expected: usize,
        found: usize,
    },
    TypeMismatch {
        expected: String,
        found: String,
    },
    DuplicateDefinition(String),
    ResultOutsideEnsures,
    CallInPredicate(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub loc: Location,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.loc)?;
        match &self.kind {
            TypeErrorKind::UndeclaredVariable(n) => write!(f, "undeclared variable '{n}'"),
            TypeErrorKind::UndeclaredFunction(n) => write!(f, "undeclared function '{n}'"),
            TypeErrorKind::ArityMismatch {
                function,
                expected,
                found,
            } => write!(f, "'{function}' takes {expected} argument(s), {found} given"),
            TypeErrorKind::TypeMismatch { expected, found } => {
                write!(f, "type mismatch: expected {expected}, found {found}")
            }
            TypeErrorKind::DuplicateDefinition(n) => write!(f, "duplicate definition of '{n}'"),
            TypeErrorKind::ResultOutsideEnsures => f.write_str("'\\result' is only allowed in ensures"),
            TypeErrorKind::CallInPredicate(n) => write!(f, "call to '{n}' in an annotation"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Function,
    Stmt,
    Expr,
}

/// Where a node sits in the unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeInfo {
    pub kind: NodeKind,
    pub loc: Location,
    /// Index into `Unit::functions` of the enclosing function.
    pub function: usize,
    /// Innermost statement evaluating this expression; for statements, the
    /// statement itself.
    pub stmt: Option<NodeId>,
}

/// A well-typed unit with a type for every expression node.
#[derive(Clone, Debug)]
pub struct TypedAst {
    unit: Unit,
    types: HashMap<NodeId, Type>,
    nodes: Vec<NodeInfo>,
}

impl PartialEq for TypedAst {
    fn eq(&self, other: &Self) -> bool {
        self.unit == other.unit && self.types == other.types
    }
}

impl TypedAst {
    pub fn unit(&self) -> &Unit {
        &self.unit
    }

    pub fn functions(&self) -> &[FunctionDef] {
        &self.unit.functions
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.unit.function(name)
    }

    pub fn type_of(&self, id: NodeId) -> Option<Type> {
        self.types.get(&id).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(id.0 as usize)
    }

    pub fn function_of(&self, id: NodeId) -> Option<&FunctionDef> {
        self.node(id).map(|n| &self.unit.functions[n.function])
    }

    pub fn enclosing_stmt(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).and_then(|n| n.stmt)
    }

    pub fn find_stmt(&self, id: NodeId) -> Option<&Stmt> {
        let info = self.node(id)?;
        if info.kind != NodeKind::Stmt {
            return None;
        }
        fn find(s: &Stmt, id: NodeId) -> Option<&Stmt> {
            if s.id == id {
                return Some(s);
            }
            s.sub_stmts().into_iter().find_map(|c| find(c, id))
        }
        self.unit.functions[info.function]
            .body
            .iter()
            .find_map(|s| find(s, id))
    }

    pub fn find_expr(&self, id: NodeId) -> Option<&Expr> {
        let info = self.node(id)?;
        if info.kind != NodeKind::Expr {
            return None;
        }
        fn find(e: &Expr, id: NodeId) -> Option<&Expr> {
            if e.id == id {
                return Some(e);
            }
            e.children().into_iter().find_map(|c| find(c, id))
        }
        let stmt = self.find_stmt(info.stmt?)?;
        stmt.own_exprs().into_iter().find_map(|e| find(e, id))
    }
}

/// Checks a numbered unit. All errors are collected before failing.
pub fn typecheck(unit: Unit) -> Result<TypedAst, Vec<TypeError>> {
    let mut cx = Checker {
        unit: &unit,
        types: HashMap::new(),
        errors: Vec::new(),
    };
    let mut seen: HashMap<&str, ()> = HashMap::new();
    for f in &unit.functions {
        if seen.insert(&f.name, ()).is_some() {
            cx.error(TypeErrorKind::DuplicateDefinition(f.name.clone()), &f.loc);
        }
        cx.function(f);
    }
    if !cx.errors.is_empty() {
        return Err(cx.errors);
    }
    let types = cx.types;
    let nodes = index(&unit);
    Ok(TypedAst { unit, types, nodes })
}

fn index(unit: &Unit) -> Vec<NodeInfo> {
    fn expr(e: &Expr, f: usize, stmt: NodeId, out: &mut Vec<NodeInfo>) {
        debug_assert_eq!(e.id.0 as usize, out.len());
        out.push(NodeInfo {
            kind: NodeKind::Expr,
            loc: e.loc.clone(),
            function: f,
            stmt: Some(stmt),
        });
        for c in e.children() {
            expr(c, f, stmt, out);
        }
    }
    fn stmt(s: &Stmt, f: usize, out: &mut Vec<NodeInfo>) {
        debug_assert_eq!(s.id.0 as usize, out.len());
        out.push(NodeInfo {
            kind: NodeKind::Stmt,
            loc: s.loc.clone(),
            function: f,
            stmt: Some(s.id),
        });
        for e in s.own_exprs() {
            expr(e, f, s.id, out);
        }
        for c in s.sub_stmts() {
            stmt(c, f, out);
        }
    }
    let mut out = Vec::new();
    for (i, f) in unit.functions.iter().enumerate() {
        out.push(NodeInfo {
            kind: NodeKind::Function,
            loc: f.loc.clone(),
            function: i,
            stmt: None,
        });
        for s in &f.body {
            stmt(s, i, &mut out);
        }
    }
    out
}

struct Checker<'u> {
    unit: &'u Unit,
    types: HashMap<NodeId, Type>,
    errors: Vec<TypeError>,
}

/// Variables visible inside one function.
struct Scope<'f> {
    vars: HashMap<&'f str, Type>,
}

#[derive(Clone, Copy)]
enum PredContext {
    Requires,
    Ensures,
    Assert,
}

fn mismatch(expected: impl fmt::Display, found: impl fmt::Display) -> TypeErrorKind {
    TypeErrorKind::TypeMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

impl<'u> Checker<'u> {
    fn error(&mut self, kind: TypeErrorKind, loc: &Location) {
        self.errors.push(TypeError {
            kind,
            loc: loc.clone(),
        });
    }

    fn function(&mut self, f: &'u FunctionDef) {
        let mut params = Scope { vars: HashMap::new() };
        for p in &f.params {
            if params.vars.insert(&p.name, p.ty).is_some() {
                self.error(TypeErrorKind::DuplicateDefinition(p.name.clone()), &p.loc);
            }
        }
        if let Some(r) = &f.contract.requires {
            self.predicate(&r.pred, &params, PredContext::Requires, &r.loc);
        }
        if let Some(e) = &f.contract.ensures {
            self.predicate(&e.pred, &params, PredContext::Ensures, &e.loc);
        }
        let mut scope = params;
        for l in &f.locals {
            if scope.vars.insert(&l.name, l.ty).is_some() {
                self.error(TypeErrorKind::DuplicateDefinition(l.name.clone()), &l.loc);
            }
        }
        for s in &f.body {
            self.stmt(s, &scope);
        }
    }

    fn stmt(&mut self, s: &Stmt, scope: &Scope<'_>) {
        for a in &s.asserts {
            self.predicate(&a.pred, scope, PredContext::Assert, &a.loc);
        }
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let vt = self.expr(value, scope);
                match scope.vars.get(target.as_str()) {
                    None => self.error(TypeErrorKind::UndeclaredVariable(target.clone()), &s.loc),
                    Some(Type::IntArray(n)) => {
                        self.error(mismatch("int or fnptr", Type::IntArray(*n)), &s.loc)
                    }
                    Some(t) => {
                        if let Some(vt) = vt.filter(|vt| vt != t) {
                            self.error(mismatch(t, vt), &value.loc);
                        }
                    }
                }
            }
            StmtKind::ArrayAssign {
                array,
                index,
                value,
            } => {
                self.array(array, scope, &s.loc);
                self.expect(index, Type::Int, scope);
                self.expect(value, Type::Int, scope);
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => self.expect(cond, Type::Int, scope),
            StmtKind::Return(e) => self.expect(e, Type::Int, scope),
            StmtKind::ExprStmt(e) => {
                self.expr(e, scope);
            }
            StmtKind::Block(_) => {}
        }
        for c in s.sub_stmts() {
            self.stmt(c, scope);
        }
    }

    fn array(&mut self, name: &str, scope: &Scope<'_>, loc: &Location) {
        match scope.vars.get(name) {
            None => self.error(TypeErrorKind::UndeclaredVariable(name.to_string()), loc),
            Some(Type::IntArray(_)) => {}
            Some(t) => self.error(mismatch("int array", t), loc),
        }
    }

    fn expect(&mut self, e: &Expr, want: Type, scope: &Scope<'_>) {
        if let Some(t) = self.expr(e, scope) {
            if t != want {
                self.error(mismatch(want, t), &e.loc);
            }
        }
    }

    /// Returns `None` when an error has already been reported.
    fn expr(&mut self, e: &Expr, scope: &Scope<'_>) -> Option<Type> {
        let t = match &e.kind {
            ExprKind::IntLit(_) => Some(Type::Int),
            ExprKind::Var(n) => match scope.vars.get(n.as_str()) {
                None => {
                    self.error(TypeErrorKind::UndeclaredVariable(n.clone()), &e.loc);
                    None
                }
                Some(Type::IntArray(k)) => {
                    self.error(mismatch("int or fnptr", Type::IntArray(*k)), &e.loc);
                    None
                }
                Some(t) => Some(*t),
            },
            ExprKind::ArrayRead { array, index } => {
                self.array(array, scope, &e.loc);
                self.expect(index, Type::Int, scope);
                Some(Type::Int)
            }
            ExprKind::Binop { lhs, rhs, .. } => {
                self.expect(lhs, Type::Int, scope);
                self.expect(rhs, Type::Int, scope);
                Some(Type::Int)
            }
            ExprKind::Unop { operand, .. } => {
                self.expect(operand, Type::Int, scope);
                Some(Type::Int)
            }
            ExprKind::Call { callee, args } => {
                let arg_types: Vec<_> = args.iter().map(|a| (self.expr(a, scope), &a.loc)).collect();
                match self.unit.function(callee) {
                    None => self.error(TypeErrorKind::UndeclaredFunction(callee.clone()), &e.loc),
                    Some(f) if f.params.len() != args.len() => self.error(
                        TypeErrorKind::ArityMismatch {
                            function: callee.clone(),
                            expected: f.params.len(),
                            found: args.len(),
                        },
                        &e.loc,
                    ),
                    Some(f) => {
                        for (p, (at, loc)) in f.params.iter().zip(arg_types) {
                            if let Some(at) = at.filter(|at| *at != p.ty) {
                                self.error(mismatch(p.ty, at), loc);
                            }
                        }
                    }
                }
                Some(Type::Int)
            }
            ExprKind::AddrOfFn(name) => {
                if self.unit.function(name).is_none() {
                    self.error(TypeErrorKind::UndeclaredFunction(name.clone()), &e.loc);
                }
                Some(Type::FnPtr)
            }
            ExprKind::IndirectCall { target, args } => {
                for a in args {
                    self.expr(a, scope);
                }
                match scope.vars.get(target.as_str()) {
                    None => self.error(TypeErrorKind::UndeclaredVariable(target.clone()), &e.loc),
                    Some(Type::FnPtr) => {}
                    Some(t) => self.error(mismatch(Type::FnPtr, t), &e.loc),
                }
                Some(Type::Int)
            }
        };
        if let Some(t) = t {
            self.types.insert(e.id, t);
        }
        t
    }

    fn predicate(&mut self, pred: &Term, scope: &Scope<'_>, ctx: PredContext, loc: &Location) {
        if let Some(t) = self.term(pred, scope, ctx, loc) {
            if t != Type::Bool {
                self.error(mismatch(Type::Bool, t), loc);
            }
        }
    }

    fn term_expect(&mut self, t: &Term, want: Type, scope: &Scope<'_>, ctx: PredContext, loc: &Location) {
        if let Some(got) = self.term(t, scope, ctx, loc) {
            if got != want {
                self.error(mismatch(want, got), loc);
            }
        }
    }

    fn term(&mut self, t: &Term, scope: &Scope<'_>, ctx: PredContext, loc: &Location) -> Option<Type> {
        match t {
            Term::Int(_) => Some(Type::Int),
            Term::Var(n) => match scope.vars.get(n.as_str()) {
                None => {
                    self.error(TypeErrorKind::UndeclaredVariable(n.clone()), loc);
                    None
                }
                Some(Type::Int) => Some(Type::Int),
                Some(other) => {
                    self.error(mismatch(Type::Int, other), loc);
                    None
                }
            },
            Term::Result => {
                if matches!(ctx, PredContext::Ensures) {
                    Some(Type::Int)
                } else {
                    self.error(TypeErrorKind::ResultOutsideEnsures, loc);
                    None
                }
            }
            Term::ArrayRead(a, i) => {
                self.array(a, scope, loc);
                self.term_expect(i, Type::Int, scope, ctx, loc);
                Some(Type::Int)
            }
            Term::Binop(op, l, r) => {
                if op.is_logical() {
                    self.term_expect(l, Type::Bool, scope, ctx, loc);
                    self.term_expect(r, Type::Bool, scope, ctx, loc);
                    Some(Type::Bool)
                } else {
                    self.term_expect(l, Type::Int, scope, ctx, loc);
                    self.term_expect(r, Type::Int, scope, ctx, loc);
                    Some(if op.is_comparison() { Type::Bool } else { Type::Int })
                }
            }
            Term::Unop(UnOp::Neg, x) => {
                self.term_expect(x, Type::Int, scope, ctx, loc);
                Some(Type::Int)
            }
            Term::Unop(UnOp::Not, x) => {
                self.term_expect(x, Type::Bool, scope, ctx, loc);
                Some(Type::Bool)
            }
            Term::Call { callee, .. } => {
                self.error(TypeErrorKind::CallInPredicate(callee.clone()), loc);
                None
            }
            Term::AddrOf(_) => {
                self.error(mismatch(Type::Int, Type::FnPtr), loc);
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{lexer::tokenize, parser::parse};

    fn check(src: &str) -> Result<TypedAst, Vec<TypeError>> {
        typecheck(parse(&tokenize(src, "t.mc").unwrap()).unwrap())
    }

    fn kinds(src: &str) -> Vec<TypeErrorKind> {
        check(src).unwrap_err().into_iter().map(|e| e.kind).collect()
    }

    #[test]
    fn undeclared_variable_located() {
        let errs = check("int main(){ int x;\n  x = y + 1; return x; }").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, TypeErrorKind::UndeclaredVariable("y".into()));
        assert_eq!((errs[0].loc.line, errs[0].loc.column), (2, 7));
    }

    #[test]
    fn arity_mismatch() {
        assert_eq!(
            kinds("int f(int a){ return a; } int main(){ f(1, 2); return 0; }"),
            vec![TypeErrorKind::ArityMismatch {
                function: "f".into(),
                expected: 1,
                found: 2
            }]
        );
    }

    #[test]
    fn errors_are_collected() {
        let k = kinds("int main(){ int x; int x; x = a; y = 1; return b; }");
        assert_eq!(k.len(), 4);
        assert!(k.contains(&TypeErrorKind::DuplicateDefinition("x".into())));
    }

    #[test]
    fn ids_preserved_and_types_recorded() {
        let src = "int main(){ int a[4]; int i = 2; a[i] = i * 3; return a[i]; }";
        let unit = parse(&tokenize(src, "t.mc").unwrap()).unwrap();
        let typed = typecheck(unit.clone()).unwrap();
        assert_eq!(typed.unit(), &unit);
        for id in 0..typed.node_count() as u32 {
            let info = typed.node(NodeId(id)).unwrap();
            if info.kind == NodeKind::Expr {
                assert_eq!(typed.type_of(NodeId(id)), Some(Type::Int));
                assert_eq!(typed.find_expr(NodeId(id)).unwrap().id, NodeId(id));
            }
        }
    }

    #[test]
    fn fnptr_rules() {
        assert!(check("int g(){ return 1; } int main(){ fnptr f; f = &g; return f(); }").is_ok());
        assert!(matches!(
            kinds("int main(){ int f; f = 1; return f(); }").as_slice(),
            [TypeErrorKind::TypeMismatch { .. }]
        ));
        assert!(matches!(
            kinds("int main(){ fnptr f; f = 1; return 0; }").as_slice(),
            [TypeErrorKind::TypeMismatch { .. }]
        ));
    }

    #[test]
    fn predicate_rules() {
        assert!(check("//@ ensures \\result >= 0;\nint f(int a){ return a * a; }").is_ok());
        assert_eq!(
            kinds("int main(){ int x = 1;\n//@ assert \\result > 0;\nreturn x; }"),
            vec![TypeErrorKind::ResultOutsideEnsures]
        );
        assert!(matches!(
            kinds("int main(){ int x = 1;\n//@ assert x;\nreturn x; }").as_slice(),
            [TypeErrorKind::TypeMismatch { .. }]
        ));
        assert_eq!(
            kinds("//@ requires y > 0;\nint f(int x){ int y = x; return y; }"),
            vec![TypeErrorKind::UndeclaredVariable("y".into())]
        );
    }
}
