//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any of them fails.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command as Process;
use std::rc::Rc;
use std::time::{Duration, Instant};

use driver::{bundled, kernel_with};
use frontend::{NodeId, TypedAst};
use kernel::services::properties::{consolidate, Emission};
use kernel::{
    Command, Consolidated, ExitReport, Kernel, LocalStatus, PluginDescriptor, Property, PropertyId, Registry,
    RegistryError, SourceFile, TypeWitness,
};
use plugin_eva::{analyze, AVal, Analysis, EvaOptions, Obligation, TargetSet, Verdict};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use testkit::corpus::{self, CORPUS};
use testkit::interp::{run_main, Checks, Frame, Halt, Observer, Outcome, Value};
use testkit::oracle::{count_rte_sites, naive_consolidate, Global, SiteRules, Status};

type Check = fn() -> Result<String, String>;

struct Criterion {
    name: &'static str,
    run: Check,
    limit: Option<Duration>,
}

fn main() {
    let criteria = [
        Criterion {
            name: "collaboration pipeline",
            run: pipeline,
            limit: Some(Duration::from_secs(1)),
        },
        Criterion {
            name: "consolidation matches naive oracle",
            run: consolidation,
            limit: Some(Duration::from_secs(60)),
        },
        Criterion {
            name: "eva soundness on corpus",
            run: soundness,
            limit: Some(Duration::from_secs(120)),
        },
        Criterion {
            name: "eva loop precision",
            run: loop_precision,
            limit: None,
        },
        Criterion {
            name: "plugin database contract",
            run: registry_contract,
            limit: None,
        },
        Criterion {
            name: "inversion of control",
            run: inversion_of_control,
            limit: None,
        },
        Criterion {
            name: "callgraph refinement",
            run: callgraph_refinement,
            limit: None,
        },
        Criterion {
            name: "rte counting",
            run: rte_counting,
            limit: None,
        },
    ];
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    let mut ran = 0;
    for (i, c) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (ok, detail) = match (result, c.limit) {
            (Ok(d), Some(limit)) if elapsed > limit => (false, format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
            (Ok(d), Some(limit)) => (true, format!("{d}; {elapsed:.2?} of {limit:?}")),
            (Ok(d), None) => (true, format!("{d}; {elapsed:.2?}")),
            (Err(d), _) => (false, format!("{d}; {elapsed:.2?}")),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {} {}: {} ({detail})", i + 1, c.name, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Sessions

struct Captured {
    report: ExitReport,
    properties: Vec<Property>,
    ast: Option<Rc<TypedAst>>,
}

/// A plugin that records the property database and tree when its main runs.
fn probe(store: Rc<RefCell<(Vec<Property>, Option<Rc<TypedAst>>)>>) -> PluginDescriptor {
    PluginDescriptor::new("probe", "0", "records properties").main(move |ctx| {
        let mut s = store.borrow_mut();
        s.0 = ctx.properties().iter().cloned().collect();
        s.1 = Some(ctx.ast());
        Ok(())
    })
}

fn session(mut plugins: Vec<PluginDescriptor>, args: &[&str], name: &str, src: &str) -> Captured {
    let store = Rc::new(RefCell::new((Vec::new(), None)));
    plugins.push(probe(Rc::clone(&store)));
    let mut k: Kernel = kernel_with(plugins);
    let mut argv: Vec<&str> = args.to_vec();
    argv.extend(["-probe", name]);
    let Ok(Command::Run(config)) = k.parse_command_line(&argv) else {
        panic!("bad command line {argv:?}")
    };
    let report = k.run_sources(&config, vec![SourceFile::new(name, src)]);
    let (properties, ast) = store.take();
    Captured {
        report,
        properties,
        ast,
    }
}

fn statuses(r: &ExitReport) -> Vec<(PropertyId, String, Consolidated)> {
    let rep = r.report.as_ref().expect("report present");
    rep.properties.iter().map(|e| (e.id, e.predicate.clone(), e.consolidated)).collect()
}

// ---------------------------------------------------------------------------
// 1

fn pipeline() -> Result<String, String> {
    let prog = corpus::get("pipeline").ok_or("pipeline program missing")?;
    ensure(prog.source.lines().count() <= 45, || "pipeline program is not desk sized".into())?;
    let run = |flags: &[&str]| {
        let r = session(bundled(), flags, "pipeline.mc", prog.source);
        assert_eq!(r.report.exit_code, 0, "{:?}", r.report.logs);
        r
    };
    let rte = run(&["-rte"]);
    let with_const = run(&["-rte", "-const"]);
    let with_eva = run(&["-rte", "-const", "-eva"]);

    let s1 = statuses(&rte.report);
    let generated = rte
        .properties
        .iter()
        .filter(|p| *p.origin() == frontend::Origin::Generated("rte".into()))
        .count();
    let source = rte.properties.iter().filter(|p| *p.origin() == frontend::Origin::Source).count();
    ensure(generated == 5 && source == 1, || format!("expected 5 generated + 1 source, got {generated} + {source}"))?;
    ensure(s1.iter().all(|s| s.2 != Consolidated::Valid), || format!("valid after -rte alone: {s1:?}"))?;

    let s2 = statuses(&with_const.report);
    let newly: Vec<&String> = s2
        .iter()
        .zip(&s1)
        .filter(|(b, a)| b.2 == Consolidated::Valid && a.2 != Consolidated::Valid)
        .map(|(b, _)| &b.1)
        .collect();
    ensure(s2.len() == s1.len(), || "const changed the property count".into())?;
    ensure(newly == ["2 != 0"], || format!("const proved {newly:?}, expected only the literal divisor"))?;

    let s3 = statuses(&with_eva.report);
    let valid2 = s2.iter().filter(|s| s.2 == Consolidated::Valid).count();
    let valid3 = s3.iter().filter(|s| s.2 == Consolidated::Valid).count();
    ensure(valid3 >= valid2 + 4, || format!("eva added {} valid, expected at least 4", valid3 - valid2))?;

    let rem: Vec<BTreeSet<PropertyId>> = [&rte, &with_const, &with_eva]
        .iter()
        .map(|r| r.report.report.as_ref().unwrap().remaining.iter().copied().collect())
        .collect();
    ensure(rem[1].is_subset(&rem[0]) && rem[1].len() < rem[0].len(), || "remaining did not shrink with const".into())?;
    ensure(rem[2].is_subset(&rem[1]) && rem[2].len() < rem[1].len(), || "remaining did not shrink with eva".into())?;
    Ok(format!(
        "remaining {} -> {} -> {}, valid {} -> {valid2} -> {valid3}",
        rem[0].len(),
        rem[1].len(),
        rem[2].len(),
        s1.iter().filter(|s| s.2 == Consolidated::Valid).count()
    ))
}

// ---------------------------------------------------------------------------
// 2

const STATUSES: [Status; 3] = [Status::True, Status::False, Status::Maybe];

fn local(s: Status) -> LocalStatus {
    match s {
        Status::True => LocalStatus::True,
        Status::False => LocalStatus::False,
        Status::Maybe => LocalStatus::Maybe,
    }
}

fn same(k: Consolidated, o: Global) -> bool {
    matches!(
        (k, o),
        (Consolidated::Valid, Global::Valid)
            | (Consolidated::Invalid, Global::Invalid)
            | (Consolidated::Unknown, Global::Unknown)
            | (Consolidated::Inconsistent, Global::Inconsistent)
    )
}

/// Hypothesis sets of at most two properties other than `p`.
fn hyp_sets(n: usize, p: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&q| q != p).collect();
    let mut out = vec![vec![]];
    for (i, &a) in others.iter().enumerate() {
        out.push(vec![a]);
        for &b in &others[i + 1..] {
            out.push(vec![a, b]);
        }
    }
    out
}

/// The emissions one property may carry, each tagged with a key that is
/// invariant under relabeling of the other properties.
type Choice = (u32, Vec<(Status, Vec<usize>)>);

fn single_choices(n: usize, p: usize) -> Vec<Choice> {
    let mut out: Vec<Choice> = vec![(0, vec![])];
    for (si, &s) in STATUSES.iter().enumerate() {
        for h in hyp_sets(n, p) {
            out.push((1 + si as u32 * 3 + h.len() as u32, vec![(s, h)]));
        }
    }
    out.sort_by_key(|c| c.0);
    out
}

/// Two emitters: any pair of single choices.
fn double_choices(n: usize, p: usize) -> Vec<Choice> {
    let one = single_choices(n, p);
    let mut out = Vec::new();
    for a in &one {
        for b in &one {
            out.push((0, a.1.iter().chain(&b.1).cloned().collect()));
        }
    }
    out
}

#[derive(Default)]
struct Tally {
    cases: u64,
    mismatch: Option<String>,
}

type Flat<'a> = Vec<(usize, Status, &'a [usize])>;

fn kernel_form<'a>(flat: &[(usize, Status, &'a [usize])]) -> Vec<Emission<'a>> {
    flat.iter()
        .map(|&(property, s, hypotheses)| Emission {
            property,
            status: local(s),
            hypotheses,
        })
        .collect()
}

fn compare(n: usize, flat: &[(usize, Status, &[usize])], emissions: &[Emission<'_>], tally: &mut Tally) {
    tally.cases += 1;
    let got = consolidate(n, emissions);
    let want = naive_consolidate(n, flat);
    if !got.iter().zip(&want).all(|(k, o)| same(*k, *o)) && tally.mismatch.is_none() {
        tally.mismatch = Some(format!("n={n} emissions {flat:?}: kernel {got:?}, oracle {want:?}"));
    }
}

/// Every assignment of one choice per property. With `sorted`, only
/// assignments whose keys are non-decreasing in property order.
fn enumerate<'a>(
    n: usize,
    choices: &'a [Vec<Choice>],
    sorted: bool,
    p: usize,
    min_key: u32,
    flat: &mut Flat<'a>,
    emissions: &mut Vec<Emission<'a>>,
    tally: &mut Tally,
) {
    if p == n {
        compare(n, flat, emissions, tally);
        return;
    }
    for (key, chosen) in &choices[p] {
        if sorted && *key < min_key {
            continue;
        }
        let len = flat.len();
        for (s, h) in chosen {
            flat.push((p, *s, h.as_slice()));
            emissions.push(Emission {
                property: p,
                status: local(*s),
                hypotheses: h,
            });
        }
        enumerate(n, choices, sorted, p + 1, *key, flat, emissions, tally);
        flat.truncate(len);
        emissions.truncate(len);
    }
}

fn random_emissions(rng: &mut StdRng, n: usize, per_property: usize) -> Vec<(usize, Status, Vec<usize>)> {
    let mut out = Vec::new();
    for p in 0..n {
        for _ in 0..per_property {
            if rng.random_range(0..4) == 0 {
                continue;
            }
            let hs = hyp_sets(n, p);
            let h = hs[rng.random_range(0..hs.len())].clone();
            out.push((p, STATUSES[rng.random_range(0..3)], h));
        }
    }
    out
}

fn consolidation() -> Result<String, String> {
    let mut tally = Tally::default();
    // One emitter: exhaustive up to six properties, one representative per
    // relabeling class.
    for n in 1..=6 {
        let choices: Vec<Vec<Choice>> = (0..n).map(|p| single_choices(n, p)).collect();
        enumerate(n, &choices, true, 0, 0, &mut Vec::new(), &mut Vec::new(), &mut tally);
    }
    let single = tally.cases;
    // Two emitters: exhaustive up to three properties.
    for n in 1..=3 {
        let choices: Vec<Vec<Choice>> = (0..n).map(|p| double_choices(n, p)).collect();
        enumerate(n, &choices, false, 0, 0, &mut Vec::new(), &mut Vec::new(), &mut tally);
    }
    let double = tally.cases - single;
    // Two or three emitters up to six properties, sampled.
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut sampled = 0u64;
    for _ in 0..200_000 {
        let n = rng.random_range(1..=6);
        let per = rng.random_range(2..=3);
        let e = random_emissions(&mut rng, n, per);
        let flat: Vec<(usize, Status, &[usize])> = e.iter().map(|(p, s, h)| (*p, *s, h.as_slice())).collect();
        compare(n, &flat, &kernel_form(&flat), &mut tally);
        sampled += 1;
    }
    if let Some(m) = tally.mismatch {
        return Err(m);
    }
    // Relabeling properties relabels the kernel's verdicts, which is what
    // makes one representative per class enough above.
    for _ in 0..100_000 {
        let n = rng.random_range(1..=6);
        let e = random_emissions(&mut rng, n, 2);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let kernel_of = |e: &[(usize, Status, Vec<usize>)]| {
            let flat: Flat<'_> = e.iter().map(|(p, s, h)| (*p, *s, h.as_slice())).collect();
            consolidate(n, &kernel_form(&flat))
        };
        let moved: Vec<(usize, Status, Vec<usize>)> = e
            .iter()
            .map(|(p, s, h)| (perm[*p], *s, h.iter().map(|q| perm[*q]).collect()))
            .collect();
        let a = kernel_of(&e);
        let b = kernel_of(&moved);
        if (0..n).any(|p| a[p] != b[perm[p]]) {
            return Err(format!("relabeling {perm:?} changes verdicts of {e:?}"));
        }
    }
    Ok(format!(
        "{} cases agree ({single} one-emitter exhaustive, {double} two-emitter exhaustive, {sampled} sampled), 100000 relabelings",
        tally.cases
    ))
}

// ---------------------------------------------------------------------------
// 3

struct Containment<'a> {
    analysis: &'a Analysis,
    violations: Vec<String>,
}

impl Observer for Containment<'_> {
    fn stmt(&mut self, function: &str, stmt: NodeId, frame: &Frame) {
        let Some(env) = self.analysis.stmt_env(stmt) else {
            self.violations.push(format!("{function}: statement {stmt:?} reached but analyzed unreachable"));
            return;
        };
        for (var, v) in frame {
            let ok = match (v, env.get(var)) {
                (Value::Int(x), Some(AVal::Int(i))) => i.contains(*x),
                (Value::Array(cells), Some(AVal::Array(_, i))) => cells.iter().all(|c| i.contains(*c)),
                (Value::Fn(None), Some(AVal::Fn(_))) => true,
                (Value::Fn(Some(f)), Some(AVal::Fn(t))) => TargetSet::single(f).is_subset_of(t),
                _ => false,
            };
            if !ok {
                self.violations.push(format!("{function}: {var} = {v:?} at {stmt:?} outside {:?}", env.get(var)));
            }
        }
    }

    fn expr(&mut self, expr: NodeId, value: i64) {
        let i = self.analysis.eval_at(expr);
        if !i.contains(value) {
            self.violations.push(format!("expression {expr:?} = {value} outside {i}"));
        }
    }
}

fn soundness() -> Result<String, String> {
    let configs: [(&[&str], EvaOptions); 3] = [
        (&["-rte"], EvaOptions::default()),
        (
            &["-rte"],
            EvaOptions {
                wlevel: 0,
                narrow: false,
                assume_asserts: false,
            },
        ),
        (&["-rte", "-rte-overflow", "on"], EvaOptions::default()),
    ];
    ensure(CORPUS.len() >= 20, || format!("only {} corpus programs", CORPUS.len()))?;
    let mut runs = 0u64;
    let mut violations: Vec<String> = Vec::new();
    for prog in CORPUS {
        let tuples = prog.tuples();
        ensure(tuples.len() <= 20usize.pow(3), || format!("{} has {} input tuples", prog.name, tuples.len()))?;
        for (flags, opts) in &configs {
            let cap = session(bundled(), flags, prog.name, prog.source);
            let ast = cap.ast.ok_or_else(|| format!("{} did not load", prog.name))?;
            let obligations: Vec<Obligation> = cap.properties.iter().map(Obligation::from).collect();
            let analysis = analyze(&ast, &obligations, opts).ok_or_else(|| format!("{} has no main", prog.name))?;
            let checks = Checks::new(&ast, &cap.properties);
            for t in &tuples {
                let mut obs = Containment {
                    analysis: &analysis,
                    violations: Vec::new(),
                };
                let Some(outcome) = run_main(&ast, &checks, t, &mut obs) else { continue };
                runs += 1;
                if let Outcome::Halted(Halt::Check(id)) = outcome {
                    if let Some(Verdict::Proved { .. }) = analysis.verdict(id) {
                        obs.violations.push(format!("{id} proved but fails"));
                    }
                }
                violations.extend(obs.violations.into_iter().map(|v| format!("{} {t:?} {opts:?}: {v}", prog.name)));
            }
        }
    }
    ensure(violations.is_empty(), || {
        format!("{} violations, first: {}", violations.len(), violations[0])
    })?;
    Ok(format!("{} programs, {runs} concrete runs over 3 configurations, 0 violations", CORPUS.len()))
}

// ---------------------------------------------------------------------------
// 4

fn loop_precision() -> Result<String, String> {
    let ast = frontend::load_str("loop.mc", "int main() {\n  int i;\n  i = 0;\n  while (i < 10) i = i + 1;\n  return i;\n}\n")
        .map_err(|e| e.to_string())?;
    let ret = ast.functions()[0].body.last().unwrap().id;
    let exit_i = |narrow: bool| {
        let opts = EvaOptions {
            narrow,
            ..EvaOptions::default()
        };
        let a = analyze(&ast, &[], &opts).unwrap();
        a.stmt_env(ret).and_then(|e| e.interval("i")).map(|i| i.to_string())
    };
    let on = exit_i(true);
    let off = exit_i(false);
    let want_on = interval::Interval::singleton(10).to_string();
    let want_off = interval::Interval::at_least(10).to_string();
    ensure(on.as_deref() == Some(want_on.as_str()), || format!("narrowing on: {on:?}, want {want_on}"))?;
    ensure(off.as_deref() == Some(want_off.as_str()), || format!("narrowing off: {off:?}, want {want_off}"))?;
    Ok(format!("exit i = {want_on} with narrowing, {want_off} without"))
}

// ---------------------------------------------------------------------------
// 5

fn random_witness(rng: &mut StdRng, depth: u32) -> TypeWitness {
    let leaves = [TypeWitness::Int, TypeWitness::Bool, TypeWitness::Text, TypeWitness::NodeId, TypeWitness::Interval];
    if depth == 0 || rng.random_range(0..3) == 0 {
        return leaves[rng.random_range(0..leaves.len())].clone();
    }
    match rng.random_range(0..3) {
        0 => TypeWitness::list(random_witness(rng, depth - 1)),
        1 => TypeWitness::pair(random_witness(rng, depth - 1), random_witness(rng, depth - 1)),
        _ => {
            let args = (0..rng.random_range(0..3)).map(|_| random_witness(rng, depth - 1)).collect();
            TypeWitness::function(args, random_witness(rng, depth - 1))
        }
    }
}

/// Structural equality written out independently of the derived one.
fn structurally_equal(a: &TypeWitness, b: &TypeWitness) -> bool {
    use TypeWitness::*;
    match (a, b) {
        (Int, Int) | (Bool, Bool) | (Text, Text) | (NodeId, NodeId) | (Interval, Interval) => true,
        (List(x), List(y)) => structurally_equal(x, y),
        (Pair(a1, b1), Pair(a2, b2)) => structurally_equal(a1, a2) && structurally_equal(b1, b2),
        (Function(a1, r1), Function(a2, r2)) => {
            a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| structurally_equal(x, y)) && structurally_equal(r1, r2)
        }
        _ => false,
    }
}

fn random_name(rng: &mut StdRng) -> String {
    const CHARS: &[u8] = b"abz09_.X";
    let len = rng.random_range(0..8);
    (0..len).map(|_| CHARS[rng.random_range(0..CHARS.len())] as char).collect()
}

fn registry_contract() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0xdb);
    let cases = 20_000;
    for case in 0..cases {
        let mut reg = Registry::new();
        let stored = random_witness(&mut rng, 3);
        let asked = if rng.random_range(0..3) == 0 {
            stored.clone()
        } else {
            random_witness(&mut rng, 3)
        };
        let item = random_name(&mut rng);
        let name = format!("p.{item}");
        let payload = rng.random_range(0..i64::MAX);
        match reg.register("p", &name, stored.clone(), Rc::new(payload)) {
            Ok(()) => {}
            Err(RegistryError::InvalidName(_)) => continue,
            Err(e) => return Err(format!("case {case}: unexpected {e}")),
        }
        let equal = structurally_equal(&stored, &asked);
        match reg.get(&name, &asked) {
            Ok(v) => {
                ensure(equal, || format!("case {case}: got a value for {asked} stored as {stored}"))?;
                ensure(v.downcast_ref::<i64>() == Some(&payload), || format!("case {case}: payload changed"))?;
            }
            Err(RegistryError::TypeMismatch { stored: s, expected }) => {
                ensure(!equal, || format!("case {case}: mismatch for equal witnesses {stored}"))?;
                ensure(s == stored && expected == asked, || format!("case {case}: mismatch reports wrong witnesses"))?;
            }
            Err(e) => return Err(format!("case {case}: unexpected {e}")),
        }
        let foreign = reg.register("q", &name, stored.clone(), Rc::new(0i64));
        ensure(matches!(foreign, Err(RegistryError::ForeignPrefix { .. })), || format!("case {case}: {foreign:?}"))?;
    }

    let names: Vec<String> = bundled().iter().map(|p| p.name.clone()).collect();
    let pipeline = corpus::get("pipeline").unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dot = dir.path().join("cg.dot");
    let dot = dot.to_str().unwrap();
    for mask in 0u32..(1 << names.len()) {
        let keep: Vec<PluginDescriptor> =
            bundled().into_iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| p).collect();
        let enabled: Vec<String> = keep.iter().map(|p| p.name.clone()).collect();
        let mut args: Vec<String> = enabled.iter().map(|n| format!("-{n}")).collect();
        if enabled.iter().any(|n| n == "cg") {
            args.extend(["-cg-out".into(), dot.into()]);
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let cap = session(keep, &args, "pipeline.mc", pipeline.source);
        let mut mains = enabled.clone();
        mains.push("probe".into());
        ensure(cap.report.exit_code == 0 && cap.report.executed_mains == mains, || {
            format!("subset {enabled:?}: exit {} mains {:?}", cap.report.exit_code, cap.report.executed_mains)
        })?;
    }

    let built = subsets_build(&names)?;
    kernel_names_no_plugin(&names)?;
    Ok(format!(
        "{cases} registry cases, {} plugin subsets run, {built} feature subsets compile",
        1 << names.len()
    ))
}

/// Checks the driver with every subset of plugin features in a separate
/// target directory.
fn subsets_build(names: &[String]) -> Result<usize, String> {
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let target = root.join("target/feature-subsets");
    let mut built = 0;
    for mask in 0u32..(1 << names.len()) {
        let features: Vec<&str> =
            names.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, n)| n.as_str()).collect();
        let out = Process::new(&cargo)
            .current_dir(&root)
            .env("CARGO_TARGET_DIR", &target)
            .args(["check", "--quiet", "--offline", "-p", "driver", "--no-default-features"])
            .args(["--features", &features.join(",")])
            .output()
            .map_err(|e| format!("cannot run cargo: {e}"))?;
        ensure(out.status.success(), || {
            format!("features {features:?} fail to build: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        built += 1;
    }
    Ok(built)
}

/// The kernel crate neither depends on nor names a bundled plugin.
fn kernel_names_no_plugin(names: &[String]) -> Result<(), String> {
    let kdir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../kernel");
    let manifest = std::fs::read_to_string(kdir.join("Cargo.toml")).map_err(|e| e.to_string())?;
    ensure(!manifest.contains("plugin-"), || "kernel depends on a plugin crate".into())?;
    let mut stack = vec![kdir.join("src")];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            for n in names {
                let quoted = format!("\"{n}\"");
                let flag = format!("\"-{n}");
                let krate = format!("plugin_{n}");
                ensure(!text.contains(&quoted) && !text.contains(&flag) && !text.contains(&krate), || {
                    format!("{} names plugin {n}", path.display())
                })?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// 6

fn permutations(items: &[&'static str]) -> Vec<Vec<&'static str>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

fn inversion_of_control() -> Result<String, String> {
    let prog = corpus::get("pipeline").unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dot = dir.path().join("cg.dot");
    let dot = dot.to_str().unwrap();
    let orders = permutations(&["rte", "eva", "const", "cg"]);
    for order in &orders {
        let mut args: Vec<String> = order.iter().map(|n| format!("-{n}")).collect();
        args.extend(["-cg-out".into(), dot.into()]);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let cap = session(bundled(), &args, "pipeline.mc", prog.source);
        let mut want: Vec<String> = order.iter().map(|s| s.to_string()).collect();
        want.push("probe".into());
        ensure(cap.report.executed_mains == want, || {
            format!("flags {order:?} ran {:?}", cap.report.executed_mains)
        })?;
    }
    let reports: Vec<String> = permutations(&["rte", "const"])
        .iter()
        .map(|order| {
            let args: Vec<String> = order.iter().map(|n| format!("-{n}")).collect();
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            session(bundled(), &args, "pipeline.mc", prog.source).report.output
        })
        .collect();
    ensure(reports.windows(2).all(|w| w[0] == w[1]), || "rte/const reports differ by flag order".into())?;
    ensure(reports[0].contains("Valid"), || "rte/const report proves nothing".into())?;
    Ok(format!("{} orderings follow flag order, {} rte/const reports identical", orders.len(), reports.len()))
}

// ---------------------------------------------------------------------------
// 7

fn callgraph_refinement() -> Result<String, String> {
    let mut sites = 0;
    let mut strict = 0;
    let mut programs = 0;
    for prog in CORPUS {
        let ast = frontend::load_str(prog.name, prog.source).map_err(|e| e.to_string())?;
        let conservative = plugin_callgraph::build_callgraph(&ast, None);
        if conservative.indirect_sites().is_empty() {
            continue;
        }
        programs += 1;
        let analysis = analyze(&ast, &[], &EvaOptions::default()).unwrap();
        let resolve = |id: NodeId| analysis.fn_targets(id);
        let resolved = plugin_callgraph::build_callgraph(&ast, Some(&resolve));
        for site in conservative.indirect_sites() {
            sites += 1;
            let c = conservative.targets_at(site);
            let r = resolved.targets_at(site);
            ensure(r.is_subset(&c), || format!("{} site {site:?}: {r:?} not within {c:?}", prog.name))?;
            if r.len() < c.len() {
                strict += 1;
            }
        }
        let dots: Vec<Vec<u8>> = (0..3)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let out = dir.path().join("cg.dot");
                let out_s = out.to_str().unwrap();
                let cap = session(bundled(), &["-eva", "-cg", "-cg-out", out_s], prog.name, prog.source);
                assert_eq!(cap.report.exit_code, 0, "{:?}", cap.report.logs);
                std::fs::read(out).unwrap()
            })
            .collect();
        ensure(dots.windows(2).all(|w| w[0] == w[1]), || format!("{}: DOT differs between runs", prog.name))?;
        ensure(dots[0] == resolved.to_dot().into_bytes(), || format!("{}: DOT differs from the library graph", prog.name))?;
    }
    ensure(programs > 0, || "no corpus program has an indirect call".into())?;
    ensure(strict > 0, || "no site where eva removes a target".into())?;
    Ok(format!("{programs} programs, {sites} indirect sites, {strict} strictly refined, DOT stable"))
}

// ---------------------------------------------------------------------------
// 8

fn rte_counting() -> Result<String, String> {
    let extra = Rc::new(RefCell::new(None));
    let mut total = 0;
    for prog in CORPUS {
        let again = Rc::clone(&extra);
        let second = PluginDescriptor::new("again", "0", "runs rte generation again").main(move |ctx| {
            *again.borrow_mut() = Some(plugin_rte::generate(ctx)?);
            Ok(())
        });
        let cap = session(vec![plugin_rte::descriptor(), second], &["-rte", "-again"], prog.name, prog.source);
        let ast = cap.ast.ok_or_else(|| format!("{} did not load", prog.name))?;
        let generated = cap
            .properties
            .iter()
            .filter(|p| *p.origin() == frontend::Origin::Generated("rte".into()))
            .count();
        let expected = count_rte_sites(&ast, SiteRules { div: true, bounds: true });
        ensure(generated == expected, || format!("{}: {generated} guards, {expected} sites", prog.name))?;
        let added = extra.borrow_mut().take();
        ensure(added == Some(0), || format!("{}: second generation added {added:?}", prog.name))?;
        total += generated;
    }
    Ok(format!("{} files, {total} guards match site counts, second run adds 0", CORPUS.len()))
}
