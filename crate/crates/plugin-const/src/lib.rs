//! Proves or refutes predicates built only from integer literals.
//!
//! A predicate without variables, `\result`, array reads or calls is folded
//! with exact integer arithmetic. It emits `True` or `False` without
//! hypotheses; anything else, including a fold that divides by zero or
//! leaves the 64-bit range, gets no status at all.
//!
//! Besides its own main, the plugin folds again after every other enabled
//! plugin's main, so guards generated later in the session are covered
//! whatever the flag order.

use std::collections::BTreeSet;

use frontend::{BinOp, Term, UnOp};
use kernel::{HookPoint, KernelContext, LocalStatus, PluginDescriptor, PluginError};

pub const NAME: &str = "const";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Folded {
    Int(i64),
    Bool(bool),
}

/// Folds a closed term. `None` if the term is not closed, ill-typed, or
/// its evaluation is undefined.
pub fn fold(t: &Term) -> Option<Folded> {
    use Folded::*;
    Some(match t {
        Term::Int(v) => Int(*v),
        Term::Unop(UnOp::Neg, a) => match fold(a)? {
            Int(v) => Int(v.checked_neg()?),
            Bool(_) => return None,
        },
        Term::Unop(UnOp::Not, a) => match fold(a)? {
            Bool(b) => Bool(!b),
            Int(_) => return None,
        },
        Term::Binop(op, l, r) => {
            if op.is_logical() {
                let (Bool(a), Bool(b)) = (fold(l)?, fold(r)?) else { return None };
                return Some(Bool(if *op == BinOp::And { a && b } else { a || b }));
            }
            let (Int(a), Int(b)) = (fold(l)?, fold(r)?) else { return None };
            match op {
                BinOp::Add => Int(a.checked_add(b)?),
                BinOp::Sub => Int(a.checked_sub(b)?),
                BinOp::Mul => Int(a.checked_mul(b)?),
                BinOp::Div => Int(a.checked_div(b)?),
                BinOp::Mod => Int(a.checked_rem(b)?),
                BinOp::Lt => Bool(a < b),
                BinOp::Le => Bool(a <= b),
                BinOp::Gt => Bool(a > b),
                BinOp::Ge => Bool(a >= b),
                BinOp::Eq => Bool(a == b),
                BinOp::Ne => Bool(a != b),
                BinOp::And | BinOp::Or => unreachable!(),
            }
        }
        _ => return None,
    })
}

/// Folds a predicate to its truth value.
pub fn fold_predicate(t: &Term) -> Option<bool> {
    if !t.is_closed() {
        return None;
    }
    match fold(t)? {
        Folded::Bool(b) => Some(b),
        Folded::Int(_) => None,
    }
}

/// Emits a status on every foldable property not yet handled by this
/// plugin. Returns the number of new emissions.
pub fn fold_all(ctx: &mut KernelContext<'_>) -> Result<usize, PluginError> {
    let todo: Vec<_> = ctx
        .properties()
        .iter()
        .filter(|p| !ctx.properties().has_emission(p.id, NAME))
        .filter_map(|p| fold_predicate(&p.annotation.pred).map(|b| (p.id, b)))
        .collect();
    for (id, b) in &todo {
        let status = if *b { LocalStatus::True } else { LocalStatus::False };
        ctx.emit(*id, status, BTreeSet::new())?;
    }
    Ok(todo.len())
}

pub fn descriptor() -> PluginDescriptor {
    PluginDescriptor::new(NAME, env!("CARGO_PKG_VERSION"), "folds literal predicates")
        .configure(|ctx| {
            let others: Vec<String> = ctx.config().enabled.iter().filter(|p| *p != NAME).cloned().collect();
            for p in others {
                ctx.register_hook(HookPoint::AfterPluginMain(p), |ctx| fold_all(ctx).map(|_| ()))?;
            }
            Ok(())
        })
        .main(|ctx| {
            let n = fold_all(ctx)?;
            ctx.info(format!("{n} literal predicates folded"));
            Ok(())
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Option<bool> {
        fold_predicate(&frontend::parse_predicate(s).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(p("5 != 0"), Some(true));
        assert_eq!(p("1 > 2"), Some(false));
        assert_eq!(p("x > 0"), None);
        assert_eq!(p("-(3 * 4) % 5 == -2 && !(1 == 2)"), Some(true));
        assert_eq!(p("1 / 0 == 0"), None);
        assert_eq!(p("0 <= 3 && 3 < 4"), Some(true));
        assert_eq!(p("-9223372036854775807 - 2 < 0"), None);
    }
}
