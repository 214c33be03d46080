//! The staged execution engine.

use std::any::Any;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::rc::Rc;

use frontend::{
    walk_unit, Annotation, AnnotationKind, Expr, ExprKind, FunctionDef, Origin, SourceFile, Stmt, Term, TypedAst,
    Unit, Visitor,
};

use crate::services::context::{KernelContext, State};
use crate::services::log::{LogEvent, Severity};
use crate::services::plugin::{Callback, HookPoint, PluginDescriptor, Stage};
use crate::services::properties::{Consolidated, PropertyDb, PropertyKind};
use crate::services::report::{Report, ReportFormat};
use crate::{exit_code, ExitReport};

fn panic_message(payload: &(dyn Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic payload".into()
    }
}

/// How a plugin callback ended.
enum Outcome {
    Ok,
    Failed(String),
    Panicked(String),
}

fn invoke(state: &mut State, plugin: &str, f: &Callback) -> Outcome {
    let mut ctx = KernelContext { state, plugin };
    match catch_unwind(AssertUnwindSafe(|| f(&mut ctx))) {
        Ok(Ok(())) => Outcome::Ok,
        Ok(Err(e)) => Outcome::Failed(e.to_string()),
        Err(p) => Outcome::Panicked(panic_message(p.as_ref())),
    }
}

fn kernel_log(state: &mut State, severity: Severity, msg: impl Into<String>) {
    state.log.log(LogEvent::new(severity, "kernel", msg));
}

/// Runs every hook registered at `point`, in registration order. A failing
/// hook is logged under its owner's name and the others still run.
fn fire(state: &mut State, point: HookPoint, trace: &mut Vec<HookPoint>) {
    let hooks: Vec<(String, Callback)> = state
        .hooks
        .iter()
        .filter(|h| h.point == point)
        .map(|h| (h.owner.clone(), Rc::clone(&h.callback)))
        .collect();
    trace.push(point.clone());
    for (owner, cb) in hooks {
        match invoke(state, &owner, &cb) {
            Outcome::Ok => {}
            Outcome::Failed(e) => state
                .log
                .log(LogEvent::new(Severity::Error, &owner, format!("hook at {point} failed: {e}"))),
            Outcome::Panicked(e) => state
                .log
                .log(LogEvent::new(Severity::Fatal, &owner, format!("hook at {point} panicked: {e}"))),
        }
    }
}

/// Source annotations as (annotation, kind, attach) in traversal order.
/// A `requires` becomes one precondition per direct call site, with the
/// callee's formals replaced by the actual arguments.
fn source_properties(unit: &Unit) -> Vec<(Annotation, PropertyKind, frontend::NodeId)> {
    struct Collect<'u> {
        unit: &'u Unit,
        out: Vec<(Annotation, PropertyKind, frontend::NodeId)>,
    }
    impl Visitor for Collect<'_> {
        fn visit_function(&mut self, f: &FunctionDef) {
            if let Some(e) = &f.contract.ensures {
                self.out.push((e.clone(), PropertyKind::Postcondition(f.name.clone()), f.id));
            }
        }
        fn visit_stmt(&mut self, s: &Stmt) {
            for a in &s.asserts {
                self.out.push((a.clone(), PropertyKind::Assertion, s.id));
            }
        }
        fn visit_expr(&mut self, e: &Expr) {
            let ExprKind::Call { callee, args } = &e.kind else { return };
            let Some(f) = self.unit.function(callee) else { return };
            let Some(req) = &f.contract.requires else { return };
            let pred = req.pred.substitute(&|v| {
                f.params.iter().position(|p| p.name == v).map(|i| Term::from_expr(&args[i]))
            });
            let ann = Annotation {
                kind: AnnotationKind::Requires {
                    function: f.name.clone(),
                },
                pred,
                origin: Origin::Source,
                loc: e.loc.clone(),
            };
            self.out.push((ann, PropertyKind::Precondition(e.id), e.id));
        }
    }
    let mut c = Collect { unit, out: Vec::new() };
    walk_unit(unit, &mut c);
    c.out
}

fn load(state: &mut State, sources: Vec<Result<SourceFile, String>>) -> bool {
    let mut files = Vec::new();
    let mut ok = true;
    for s in sources {
        match s {
            Ok(f) => files.push(f),
            Err(e) => {
                kernel_log(state, Severity::Error, e);
                ok = false;
            }
        }
    }
    if !ok {
        return false;
    }
    let ast: TypedAst = match frontend::load(&files) {
        Ok(ast) => ast,
        Err(err) => {
            let msgs: Vec<String> = match &err {
                frontend::FrontendError::Type(errs) => errs.iter().map(ToString::to_string).collect(),
                other => vec![other.to_string()],
            };
            for msg in msgs {
                kernel_log(state, Severity::Error, msg);
            }
            return false;
        }
    };
    let ast = Rc::new(ast);
    let mut db = PropertyDb::new(Rc::clone(&ast));
    for (ann, kind, attach) in source_properties(ast.unit()) {
        if let Err(e) = db.register(ann, kind, attach) {
            kernel_log(state, Severity::Error, format!("cannot register source annotation: {e}"));
        }
    }
    let n = db.len();
    state.properties = db;
    state.ast = Some(ast);
    kernel_log(state, Severity::Debug, format!("loaded {} source properties", n));
    true
}

pub(crate) fn run(plugins: &[PluginDescriptor], state: &mut State, sources: Vec<Result<SourceFile, String>>) -> ExitReport {
    let mut report = ExitReport::default();
    let mut trace = Vec::new();
    let config = state.config.clone();
    let verbosity = if config.flag("-verbose") {
        Severity::Debug
    } else if config.flag("-quiet") {
        Severity::Warning
    } else {
        Severity::Info
    };
    state.log.set_verbosity(verbosity);
    let descriptor = |name: &str| plugins.iter().find(|p| p.name == name);

    state.stage = Stage::Configure;
    report.stages.push(Stage::Configure);
    for name in &config.enabled {
        let Some(cfg) = descriptor(name).and_then(|d| d.configure.clone()) else { continue };
        match invoke(state, name, &cfg) {
            Outcome::Ok => {}
            Outcome::Failed(e) => {
                state.log.log(LogEvent::new(Severity::Error, name, format!("configuration failed: {e}")));
                state.log.mark_failed();
            }
            Outcome::Panicked(e) => {
                state.log.log(LogEvent::new(Severity::Fatal, name, format!("panicked while configuring: {e}")))
            }
        }
    }

    state.stage = Stage::Load;
    report.stages.push(Stage::Load);
    let loaded = load(state, sources);
    if loaded {
        fire(state, HookPoint::AfterLoad, &mut trace);

        state.stage = Stage::Mains;
        report.stages.push(Stage::Mains);
        fire(state, HookPoint::BeforeMains, &mut trace);
        for name in &config.enabled {
            let Some(main) = descriptor(name).map(|d| Rc::clone(&d.main)) else { continue };
            report.executed_mains.push(name.clone());
            match invoke(state, name, &main) {
                Outcome::Ok => {}
                Outcome::Failed(e) => {
                    state.log.log(LogEvent::new(Severity::Error, name, e));
                    state.log.mark_failed();
                }
                Outcome::Panicked(e) => {
                    state.log.log(LogEvent::new(Severity::Fatal, name, format!("panicked: {e}")))
                }
            }
            fire(state, HookPoint::AfterPluginMain(name.clone()), &mut trace);
        }

        state.stage = Stage::Report;
        report.stages.push(Stage::Report);
        let r = Report::build(&state.properties);
        for e in r.properties.iter().filter(|e| e.consolidated == Consolidated::Inconsistent) {
            let loc = state.properties.get(e.id).map(|p| p.location.clone());
            let ev = LogEvent::new(
                Severity::Error,
                "kernel",
                format!("inconsistent statuses for {} `{}`", e.id, e.predicate),
            );
            state.log.log(match &loc {
                Some(l) => ev.at(l),
                None => ev,
            });
        }
        let format = match config.text("-report-format") {
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Text,
        };
        report.output = r.render(format);
        report.report = Some(r);
    }

    state.stage = Stage::AtExit;
    report.stages.push(Stage::AtExit);
    fire(state, HookPoint::AtExit, &mut trace);

    report.exit_code = if !loaded {
        exit_code::LOAD_FAILURE
    } else if state.log.failed() || report.report.as_ref().is_some_and(|r| r.summary.inconsistent > 0) {
        exit_code::FAILURE
    } else if config.flag("-report-unproved-exit") && report.report.as_ref().is_some_and(|r| !r.remaining.is_empty()) {
        exit_code::UNPROVED
    } else {
        exit_code::SUCCESS
    };
    report.hook_trace = trace;
    report.logs = state.log.take_lines();
    report
}
