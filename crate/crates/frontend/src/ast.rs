//! Syntax tree of a MiniC translation unit.
//!
//! Program nodes (functions, statements, expressions) carry a [`NodeId`]
//! assigned in pre-order over the whole unit. Annotation predicates are
//! [`Term`]s: they have no identity of their own and are attached to a
//! statement or function through their [`AnnotationKind`].

use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    /// Placeholder used between parsing and numbering.
    pub(crate) const UNASSIGNED: NodeId = NodeId(u32::MAX);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl Location {
    pub fn new(file: &Arc<str>, line: u32, column: u32) -> Location {
        Location {
            file: Arc::clone(file),
            line,
            column,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    /// Only predicates have boolean type; program conditions are `int`.
    Bool,
    IntArray(u32),
    FnPtr,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Bool => f.write_str("bool"),
            Type::IntArray(n) => write!(f, "int[{n}]"),
            Type::FnPtr => f.write_str("fnptr"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter. Unary operators bind at 6.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= 4
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub loc: Location,
    pub kind: ExprKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    IntLit(i64),
    Var(String),
    ArrayRead {
        array: String,
        index: Box<Expr>,
    },
    Binop {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Unop {
        op: UnOp,
        operand: Box<Expr>,
    },
    Call {
        callee: String,
        args: Vec<Expr>,
    },
    AddrOfFn(String),
    IndirectCall {
        target: String,
        args: Vec<Expr>,
    },
}

impl Expr {
    /// Direct sub-expressions in evaluation (and numbering) order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::IntLit(_) | ExprKind::Var(_) | ExprKind::AddrOfFn(_) => vec![],
            ExprKind::ArrayRead { index, .. } => vec![index],
            ExprKind::Binop { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Unop { operand, .. } => vec![operand],
            ExprKind::Call { args, .. } | ExprKind::IndirectCall { args, .. } => args.iter().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub id: NodeId,
    pub loc: Location,
    /// Source `assert` annotations written immediately before this statement.
    pub asserts: Vec<Annotation>,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign {
        target: String,
        value: Expr,
    },
    ArrayAssign {
        array: String,
        index: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    Return(Expr),
    ExprStmt(Expr),
    Block(Vec<Stmt>),
}

impl Stmt {
    /// Expressions evaluated by this statement itself, excluding those of
    /// nested statements.
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::ArrayAssign { index, value, .. } => vec![index, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(e) | StmtKind::ExprStmt(e) => vec![e],
            StmtKind::Block(_) => vec![],
        }
    }

    pub fn sub_stmts(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::If {
                then_branch,
                else_branch,
                ..
            } => {
                let mut v: Vec<&Stmt> = vec![then_branch];
                if let Some(e) = else_branch {
                    v.push(e);
                }
                v
            }
            StmtKind::While { body, .. } => vec![body],
            StmtKind::Block(stmts) => stmts.iter().collect(),
            _ => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub loc: Location,
}

/// A local declaration; an initializer, if any, became an `Assign` in the body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Local {
    pub name: String,
    pub ty: Type,
    pub loc: Location,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Contract {
    pub requires: Option<Annotation>,
    pub ensures: Option<Annotation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDef {
    pub id: NodeId,
    pub name: String,
    pub params: Vec<Param>,
    pub locals: Vec<Local>,
    pub body: Vec<Stmt>,
    pub contract: Contract,
    pub loc: Location,
}

impl FunctionDef {
    pub fn var_type(&self, name: &str) -> Option<Type> {
        self.params
            .iter()
            .map(|p| (&p.name, p.ty))
            .chain(self.locals.iter().map(|l| (&l.name, l.ty)))
            .find(|(n, _)| n.as_str() == name)
            .map(|(_, t)| t)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Unit {
    pub functions: Vec<FunctionDef>,
}

impl Unit {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// All source annotations in source order: each function's contract,
    /// then the asserts of its body.
    pub fn annotations(&self) -> Vec<&Annotation> {
        fn collect<'a>(s: &'a Stmt, out: &mut Vec<&'a Annotation>) {
            out.extend(s.asserts.iter());
            for c in s.sub_stmts() {
                collect(c, out);
            }
        }
        let mut out = Vec::new();
        for f in &self.functions {
            out.extend(f.contract.requires.iter());
            out.extend(f.contract.ensures.iter());
            for s in &f.body {
                collect(s, &mut out);
            }
        }
        out
    }
}

/// Annotation predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Var(String),
    /// `\result`, only meaningful in `ensures`.
    Result,
    ArrayRead(String, Box<Term>),
    Binop(BinOp, Box<Term>, Box<Term>),
    Unop(UnOp, Box<Term>),
    Call {
        callee: String,
        indirect: bool,
        args: Vec<Term>,
    },
    AddrOf(String),
}

impl Term {
    pub fn binop(op: BinOp, lhs: Term, rhs: Term) -> Term {
        Term::Binop(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn from_expr(e: &Expr) -> Term {
        match &e.kind {
            ExprKind::IntLit(v) => Term::Int(*v),
            ExprKind::Var(n) => Term::Var(n.clone()),
            ExprKind::ArrayRead { array, index } => {
                Term::ArrayRead(array.clone(), Box::new(Term::from_expr(index)))
            }
            ExprKind::Binop { op, lhs, rhs } => Term::binop(*op, Term::from_expr(lhs), Term::from_expr(rhs)),
            ExprKind::Unop { op, operand } => Term::Unop(*op, Box::new(Term::from_expr(operand))),
            ExprKind::Call { callee, args } => Term::Call {
                callee: callee.clone(),
                indirect: false,
                args: args.iter().map(Term::from_expr).collect(),
            },
            ExprKind::IndirectCall { target, args } => Term::Call {
                callee: target.clone(),
                indirect: true,
                args: args.iter().map(Term::from_expr).collect(),
            },
            ExprKind::AddrOfFn(n) => Term::AddrOf(n.clone()),
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Int(_) | Term::Var(_) | Term::Result | Term::AddrOf(_) => vec![],
            Term::ArrayRead(_, i) => vec![i],
            Term::Binop(_, l, r) => vec![l, r],
            Term::Unop(_, t) => vec![t],
            Term::Call { args, .. } => args.iter().collect(),
        }
    }

    /// True when the term mentions no variable, array, call or `\result`.
    pub fn is_closed(&self) -> bool {
        match self {
            Term::Int(_) => true,
            Term::Binop(_, l, r) => l.is_closed() && r.is_closed(),
            Term::Unop(_, t) => t.is_closed(),
            _ => false,
        }
    }

    /// Replaces variables by terms; used to instantiate a callee's
    /// precondition at a call site.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self {
            Term::Var(n) => map(n).unwrap_or_else(|| self.clone()),
            Term::Int(_) | Term::Result | Term::AddrOf(_) => self.clone(),
            Term::ArrayRead(a, i) => Term::ArrayRead(a.clone(), Box::new(i.substitute(map))),
            Term::Binop(op, l, r) => Term::binop(*op, l.substitute(map), r.substitute(map)),
            Term::Unop(op, t) => Term::Unop(*op, Box::new(t.substitute(map))),
            Term::Call {
                callee,
                indirect,
                args,
            } => Term::Call {
                callee: callee.clone(),
                indirect: *indirect,
                args: args.iter().map(|a| a.substitute(map)).collect(),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Term::Binop(op, ..) => op.precedence(),
            Term::Unop(..) => 6,
            Term::Int(v) if *v < 0 => 6,
            _ => 7,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(v) => write!(f, "{v}"),
            Term::Var(n) => f.write_str(n),
            Term::Result => f.write_str("\\result"),
            Term::AddrOf(n) => write!(f, "&{n}"),
            Term::ArrayRead(a, i) => write!(f, "{a}[{i}]"),
            Term::Call { callee, args, .. } => {
                write!(f, "{callee}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Term::Unop(op, t) => {
                f.write_str(op.symbol())?;
                if t.precedence() < 7 {
                    write!(f, "({t})")
                } else {
                    write!(f, "{t}")
                }
            }
            Term::Binop(op, l, r) => {
                let p = op.precedence();
                if l.precedence() < p {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if r.precedence() <= p {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Source,
    Generated(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Source => f.write_str("Source"),
            Origin::Generated(p) => write!(f, "Generated({p})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AnnotationKind {
    Assert { attach: NodeId },
    Requires { function: String },
    Ensures { function: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub kind: AnnotationKind,
    pub pred: Term,
    pub origin: Origin,
    pub loc: Location,
}
