//! Interval analysis plugin.
//!
//! Starting from `main`, every function is analyzed over a non-relational
//! interval domain, with direct and indirect calls inlined up to
//! [`MAX_INLINE_DEPTH`]. Each property gets one verdict:
//!
//! * `True` with hypotheses, when its predicate holds in every state that
//!   reaches it; unreachable properties are vacuously true.
//! * `Maybe` otherwise. An undecided property is then assumed on the path
//!   that follows it, and later proofs depend on it.
//!
//! Eva never claims `False`: the domain over-approximates, so a predicate
//! that fails in the abstract may still hold on every real execution.
//!
//! Two functions are published for other plugins: `eva.eval_at` maps an
//! expression node to its interval, and `eva.fn_targets` maps an indirect
//! call to the sorted names of its possible callees.

pub mod analysis;
pub mod cfg;
pub mod domain;

use std::collections::BTreeSet;
use std::rc::Rc;

use frontend::NodeId;
use interval::Interval;
use kernel::{Func, KernelContext, LocalStatus, ParameterSpec, PluginDescriptor, PluginError, Severity};

pub use analysis::{analyze, Analysis, EvaOptions, Obligation, Site, Verdict, MAX_INLINE_DEPTH, VISIT_BUDGET};
pub use domain::{AVal, AbstractEnv, TargetSet, MAX_TARGETS};

pub const NAME: &str = "eva";
pub const EVAL_AT: &str = "eva.eval_at";
pub const FN_TARGETS: &str = "eva.fn_targets";

pub fn options(config: &kernel::Config) -> EvaOptions {
    let d = EvaOptions::default();
    EvaOptions {
        wlevel: config.int("-eva-wlevel").map_or(d.wlevel, |v| v as u32),
        narrow: config.get("-eva-narrow").map_or(d.narrow, |_| config.is_on("-eva-narrow")),
        assume_asserts: config
            .get("-eva-assume-asserts")
            .map_or(d.assume_asserts, |_| config.is_on("-eva-assume-asserts")),
    }
}

fn emit(ctx: &mut KernelContext<'_>, id: kernel::PropertyId, status: LocalStatus, hyps: BTreeSet<kernel::PropertyId>) -> Result<(), PluginError> {
    assert_ne!(status, LocalStatus::False, "eva must not refute properties");
    ctx.emit(id, status, hyps)?;
    Ok(())
}

fn eva_main(ctx: &mut KernelContext<'_>) -> Result<(), PluginError> {
    let ast = ctx.ast();
    let opts = options(ctx.config());
    let obligations: Vec<Obligation> = ctx.properties().iter().map(Obligation::from).collect();
    let Some(result) = analyze(&ast, &obligations, &opts) else {
        ctx.warning("no main function; nothing analyzed");
        return Ok(());
    };
    for (loc, msg) in &result.warnings {
        ctx.log_at(Severity::Warning, loc, msg.clone());
    }
    let mut proved = 0;
    for (id, verdict) in result.verdicts() {
        match verdict {
            Verdict::Proved { hypotheses, vacuous } => {
                if *vacuous {
                    let loc = ctx.properties().get(id).map(|p| p.location.clone());
                    let msg = format!("{id} is unreachable; vacuously true");
                    match loc {
                        Some(l) => ctx.log_at(Severity::Info, &l, msg),
                        None => ctx.info(msg),
                    }
                }
                proved += 1;
                emit(ctx, id, LocalStatus::True, hypotheses.clone())?;
            }
            Verdict::Unknown => emit(ctx, id, LocalStatus::Maybe, BTreeSet::new())?,
        }
    }
    ctx.info(format!("{proved} of {} properties proved", obligations.len()));
    ctx.debug(format!("largest fixpoint took {} visits", result.max_visits));

    let result = Rc::new(result);
    let r = result.clone();
    ctx.register_value(EVAL_AT, Func::new(move |id: NodeId| -> Interval { r.eval_at(id) }))?;
    ctx.register_value(FN_TARGETS, Func::new(move |id: NodeId| -> Vec<String> { result.fn_targets(id) }))?;
    Ok(())
}

pub fn descriptor() -> PluginDescriptor {
    PluginDescriptor::new(NAME, env!("CARGO_PKG_VERSION"), "interval abstract interpretation")
        .parameter(ParameterSpec::int(
            "-eva-wlevel",
            0,
            analysis::MAX_WLEVEL as i64,
            3,
            "joins at a loop head before widening",
        ))
        .parameter(ParameterSpec::switch("-eva-narrow", true, "one descending iteration after widening"))
        .parameter(ParameterSpec::switch(
            "-eva-assume-asserts",
            true,
            "assume undecided properties on the paths after them",
        ))
        .main(eva_main)
}
