use frontend::{BinOp, Term, UnOp};
use interval::Interval;
use plugin_eva::domain::{eval_term, AVal, AbstractEnv};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

fn arb_interval() -> impl Strategy<Value = Interval> {
    prop_oneof![
        (-20i64..20, 0i64..15).prop_map(|(lo, w)| Interval::range(lo, lo + w)),
        (-20i64..20).prop_map(Interval::at_least),
        (-20i64..20).prop_map(Interval::at_most),
        Just(Interval::TOP),
    ]
}

/// A pair of intervals with the first included in the second.
fn arb_nested() -> impl Strategy<Value = (Interval, Interval)> {
    (arb_interval(), 0i64..5, 0i64..5, any::<bool>()).prop_map(|(small, dl, dh, unbounded)| {
        let big = if unbounded {
            Interval::TOP
        } else {
            small.join(&small.add(&Interval::range(-dl, dh)))
        };
        (small, big)
    })
}

fn arb_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (-10i64..10).prop_map(Term::Int),
        prop::sample::select(VARS.to_vec()).prop_map(|v| Term::Var(v.into())),
        (0i64..5).prop_map(|i| Term::ArrayRead("a".into(), Box::new(Term::Int(i)))),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        let ops = vec![
            BinOp::Add,
            BinOp::Sub,
            BinOp::Mul,
            BinOp::Div,
            BinOp::Mod,
            BinOp::Lt,
            BinOp::Le,
            BinOp::Eq,
            BinOp::Ne,
            BinOp::And,
            BinOp::Or,
        ];
        prop_oneof![
            (inner.clone(), prop::sample::select(ops), inner.clone()).prop_map(|(l, op, r)| Term::binop(op, l, r)),
            inner.clone().prop_map(|t| Term::Unop(UnOp::Neg, Box::new(t))),
            inner.prop_map(|t| Term::Unop(UnOp::Not, Box::new(t))),
        ]
    })
}

fn env(vals: &[Interval], cells: Interval) -> AbstractEnv {
    let mut vars: Vec<(String, AVal)> = VARS.iter().zip(vals).map(|(k, v)| (k.to_string(), AVal::Int(*v))).collect();
    vars.push(("a".into(), AVal::Array(3, cells)));
    AbstractEnv::from_vars(vars).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn evaluation_is_monotone(pairs in prop::collection::vec(arb_nested(), 4), t in arb_term()) {
        let small: Vec<Interval> = pairs.iter().map(|p| p.0).collect();
        let big: Vec<Interval> = pairs.iter().map(|p| p.1).collect();
        let e1 = env(&small[..3], small[3]);
        let e2 = env(&big[..3], big[3]);
        prop_assert!(e1.leq(&e2));
        let a = eval_term(&e1, &t);
        let b = eval_term(&e2, &t);
        prop_assert!(a.is_subset_of(&b), "{t}: {a} not within {b}");
    }

    #[test]
    fn evaluation_covers_concrete_values(
        vals in prop::collection::vec(-6i64..6, 3),
        widths in prop::collection::vec(0i64..3, 3),
        t in arb_term(),
    ) {
        let ivs: Vec<Interval> = vals.iter().zip(&widths).map(|(v, w)| Interval::range(v - w, v + w)).collect();
        let e = env(&ivs, Interval::singleton(0));
        let concrete = eval_concrete(&t, &vals);
        if let Some(c) = concrete {
            let a = eval_term(&e, &t);
            prop_assert!(a.contains(c), "{t} = {c} outside {a}");
        }
    }
}

/// Direct evaluation with short-circuit logic; `None` on a runtime error.
fn eval_concrete(t: &Term, vals: &[i64]) -> Option<i64> {
    Some(match t {
        Term::Int(v) => *v,
        Term::Var(x) => vals[VARS.iter().position(|v| v == x).unwrap()],
        Term::ArrayRead(_, i) => {
            let i = eval_concrete(i, vals)?;
            if (0..3).contains(&i) {
                0
            } else {
                return None;
            }
        }
        Term::Unop(UnOp::Neg, a) => eval_concrete(a, vals)?.checked_neg()?,
        Term::Unop(UnOp::Not, a) => i64::from(eval_concrete(a, vals)? == 0),
        Term::Binop(BinOp::And, l, r) => {
            if eval_concrete(l, vals)? == 0 {
                0
            } else {
                i64::from(eval_concrete(r, vals)? != 0)
            }
        }
        Term::Binop(BinOp::Or, l, r) => {
            if eval_concrete(l, vals)? != 0 {
                1
            } else {
                i64::from(eval_concrete(r, vals)? != 0)
            }
        }
        Term::Binop(op, l, r) => {
            let (a, b) = (eval_concrete(l, vals)?, eval_concrete(r, vals)?);
            match op {
                BinOp::Add => a.checked_add(b)?,
                BinOp::Sub => a.checked_sub(b)?,
                BinOp::Mul => a.checked_mul(b)?,
                BinOp::Div => a.checked_div(b)?,
                BinOp::Mod => a.checked_rem(b)?,
                BinOp::Lt => i64::from(a < b),
                BinOp::Le => i64::from(a <= b),
                BinOp::Gt => i64::from(a > b),
                BinOp::Ge => i64::from(a >= b),
                BinOp::Eq => i64::from(a == b),
                BinOp::Ne => i64::from(a != b),
                BinOp::And | BinOp::Or => unreachable!(),
            }
        }
        _ => unreachable!(),
    })
}
