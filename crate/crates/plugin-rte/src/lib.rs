//! Generates one guard assertion per potential runtime error.
//!
//! The plugin proves nothing: every guard is registered as a generated
//! assertion on the innermost statement evaluating the risky expression and
//! receives a `Maybe` status without hypotheses. Other analyzers discharge
//! them.
//!
//! | rule       | site                                | guard                    |
//! |------------|-------------------------------------|--------------------------|
//! | `div`      | `e / d`, `e % d`                    | `d != 0`                 |
//! | `bounds`   | `a[i]` read or write, `a` of size n | `0 <= i && i < n`        |
//! | `overflow` | outermost `+ - *` of an expression  | `MIN <= e && e <= MAX`   |

use std::collections::BTreeSet;

use frontend::{
    Annotation, AnnotationKind, BinOp, Expr, ExprKind, FunctionDef, Location, NodeId, Origin, Stmt, StmtKind, Term,
    Type, TypedAst,
};
use kernel::{LocalStatus, ParameterSpec, PluginDescriptor, PluginError, PropertyKind};

pub const NAME: &str = "rte";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Div,
    Bounds,
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RteOptions {
    pub div: bool,
    pub bounds: bool,
    pub overflow: bool,
    /// Integer width in bits for overflow guards.
    pub width: u32,
}

impl Default for RteOptions {
    fn default() -> Self {
        RteOptions {
            div: true,
            bounds: true,
            overflow: false,
            width: 32,
        }
    }
}

/// Two's-complement range of a signed integer of `width` bits.
pub fn signed_range(width: u32) -> (i64, i64) {
    let max = if width >= 64 { i64::MAX } else { (1i64 << (width - 1)) - 1 };
    (-max - 1, max)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    pub rule: Rule,
    /// Statement the guard is attached to.
    pub attach: NodeId,
    /// The risky expression or array assignment.
    pub site: NodeId,
    pub pred: Term,
    pub loc: Location,
}

struct Collector<'a> {
    opts: RteOptions,
    function: &'a FunctionDef,
    stmt: NodeId,
    out: Vec<Guard>,
}

impl Collector<'_> {
    fn push(&mut self, rule: Rule, site: NodeId, pred: Term, loc: &Location) {
        self.out.push(Guard {
            rule,
            attach: self.stmt,
            site,
            pred,
            loc: loc.clone(),
        });
    }

    fn bounds_guard(&mut self, array: &str, index: &Expr, site: NodeId, loc: &Location) {
        if !self.opts.bounds {
            return;
        }
        let Some(Type::IntArray(n)) = self.function.var_type(array) else { return };
        let i = Term::from_expr(index);
        let pred = Term::binop(
            BinOp::And,
            Term::binop(BinOp::Le, Term::Int(0), i.clone()),
            Term::binop(BinOp::Lt, i, Term::Int(n as i64)),
        );
        self.push(Rule::Bounds, site, pred, loc);
    }

    /// `outermost` is false when the parent is itself `+`, `-` or `*`.
    fn expr(&mut self, e: &Expr, outermost: bool) {
        let mut arith_child = false;
        match &e.kind {
            ExprKind::Binop { op, rhs, .. } => {
                if matches!(op, BinOp::Div | BinOp::Mod) && self.opts.div {
                    let pred = Term::binop(BinOp::Ne, Term::from_expr(rhs), Term::Int(0));
                    self.push(Rule::Div, e.id, pred, &e.loc);
                }
                if matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul) {
                    arith_child = true;
                    if outermost && self.opts.overflow {
                        let (min, max) = signed_range(self.opts.width);
                        let t = Term::from_expr(e);
                        let pred = Term::binop(
                            BinOp::And,
                            Term::binop(BinOp::Le, Term::Int(min), t.clone()),
                            Term::binop(BinOp::Le, t, Term::Int(max)),
                        );
                        self.push(Rule::Overflow, e.id, pred, &e.loc);
                    }
                }
            }
            ExprKind::ArrayRead { array, index } => self.bounds_guard(array, index, e.id, &e.loc),
            _ => {}
        }
        for c in e.children() {
            self.expr(c, !arith_child);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        self.stmt = s.id;
        if let StmtKind::ArrayAssign { array, index, .. } = &s.kind {
            self.bounds_guard(array, index, s.id, &s.loc);
        }
        for e in s.own_exprs() {
            self.expr(e, true);
        }
        for c in s.sub_stmts() {
            self.stmt(c);
        }
    }
}

/// All guards of the unit in traversal order, before deduplication.
pub fn guards(ast: &TypedAst, opts: RteOptions) -> Vec<Guard> {
    let mut out = Vec::new();
    for f in ast.functions() {
        let mut c = Collector {
            opts,
            function: f,
            stmt: f.id,
            out: Vec::new(),
        };
        for s in &f.body {
            c.stmt(s);
        }
        out.extend(c.out);
    }
    out
}

fn options(ctx: &kernel::KernelContext<'_>) -> RteOptions {
    let c = ctx.config();
    RteOptions {
        div: c.is_on("-rte-div"),
        bounds: c.is_on("-rte-bounds"),
        overflow: c.is_on("-rte-overflow"),
        width: ctx.machdep(),
    }
}

/// Registers every guard of the unit and returns how many were new.
/// Guards already known are left alone, so running it again adds nothing.
pub fn generate(ctx: &mut kernel::KernelContext<'_>) -> Result<usize, PluginError> {
    let ast = ctx.ast();
    let opts = options(ctx);
    let before = ctx.properties().len();
    for g in &guards(&ast, opts) {
        let ann = Annotation {
            kind: AnnotationKind::Assert { attach: g.attach },
            pred: g.pred.clone(),
            origin: Origin::Generated(NAME.into()),
            loc: g.loc.clone(),
        };
        let id = ctx.register_property(ann, PropertyKind::Assertion, g.attach)?;
        if !ctx.properties().has_emission(id, NAME) {
            ctx.emit(id, LocalStatus::Maybe, BTreeSet::new())?;
        }
    }
    Ok(ctx.properties().len() - before)
}

fn rte_main(ctx: &mut kernel::KernelContext<'_>) -> Result<(), PluginError> {
    let added = generate(ctx)?;
    ctx.info(format!("{added} guard properties added"));
    Ok(())
}

pub fn descriptor() -> PluginDescriptor {
    PluginDescriptor::new(NAME, env!("CARGO_PKG_VERSION"), "generates runtime-error guard assertions")
        .parameter(ParameterSpec::switch("-rte-div", true, "guard divisors"))
        .parameter(ParameterSpec::switch("-rte-bounds", true, "guard array indices"))
        .parameter(ParameterSpec::switch("-rte-overflow", false, "guard arithmetic overflow"))
        .configure(|ctx| {
            let o = options(ctx);
            if !(o.div || o.bounds || o.overflow) {
                ctx.warning("all rule classes are off; nothing will be generated");
            }
            Ok(())
        })
        .main(rte_main)
}
