//! Call graph with optional function-pointer resolution.
//!
//! Indirect calls are resolved through the `eva.fn_targets` function when
//! some plugin has published it. Otherwise every function whose arity
//! matches the call is a possible callee.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use frontend::{walk_unit, Expr, ExprKind, FunctionDef, NodeId, TypedAst, Visitor};
use kernel::{Func, KernelContext, ParameterSpec, PluginDescriptor, PluginError, RegistryError, Severity};

pub const NAME: &str = "cg";
pub const FN_TARGETS: &str = "eva.fn_targets";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Resolution {
    Direct,
    EvaResolved,
    Conservative,
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resolution::Direct => "Direct",
            Resolution::EvaResolved => "EvaResolved",
            Resolution::Conservative => "Conservative",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub caller: String,
    pub callee: String,
    pub site: NodeId,
    pub resolution: Resolution,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<Edge>,
}

impl CallGraph {
    /// Callees of one call site.
    pub fn targets_at(&self, site: NodeId) -> BTreeSet<&str> {
        self.edges.iter().filter(|e| e.site == site).map(|e| e.callee.as_str()).collect()
    }

    pub fn indirect_sites(&self) -> BTreeSet<NodeId> {
        self.edges
            .iter()
            .filter(|e| e.resolution != Resolution::Direct)
            .map(|e| e.site)
            .collect()
    }

    /// DOT text: every node, then the edges sorted by caller, callee and
    /// resolution. Parallel edges from different sites print once.
    pub fn to_dot(&self) -> String {
        let lines: BTreeSet<(&str, &str, Resolution)> = self
            .edges
            .iter()
            .map(|e| (e.caller.as_str(), e.callee.as_str(), e.resolution))
            .collect();
        let mut out = String::from("digraph cg {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for (a, b, r) in lines {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\" [label=\"{r}\"];");
        }
        out.push_str("}\n");
        out
    }
}

struct Sites {
    function: String,
    out: Vec<(String, NodeId)>,
}

impl Visitor for Sites {
    fn visit_function(&mut self, f: &FunctionDef) {
        self.function = f.name.clone();
    }

    fn visit_expr(&mut self, e: &Expr) {
        if matches!(e.kind, ExprKind::Call { .. } | ExprKind::IndirectCall { .. }) {
            self.out.push((self.function.clone(), e.id));
        }
    }
}

/// Builds the graph; `resolve` gives the targets of an indirect call, or
/// `None` to fall back to arity matching.
pub fn build_callgraph(ast: &TypedAst, resolve: Option<&dyn Fn(NodeId) -> Vec<String>>) -> CallGraph {
    let mut g = CallGraph {
        nodes: ast.functions().iter().map(|f| f.name.clone()).collect(),
        edges: BTreeSet::new(),
    };
    let mut sites = Sites {
        function: String::new(),
        out: Vec::new(),
    };
    walk_unit(ast.unit(), &mut sites);
    for (caller, id) in sites.out {
        let e = ast.find_expr(id).expect("call site is an expression");
        let (callees, resolution) = match &e.kind {
            ExprKind::Call { callee, .. } => (vec![callee.clone()], Resolution::Direct),
            ExprKind::IndirectCall { args, .. } => match resolve {
                Some(r) => (r(e.id), Resolution::EvaResolved),
                None => (
                    ast.functions()
                        .iter()
                        .filter(|f| f.params.len() == args.len())
                        .map(|f| f.name.clone())
                        .collect(),
                    Resolution::Conservative,
                ),
            },
            _ => unreachable!(),
        };
        for callee in callees.into_iter().filter(|c| g.nodes.contains(c)) {
            g.edges.insert(Edge {
                caller: caller.clone(),
                callee,
                site: e.id,
                resolution,
            });
        }
    }
    g
}

fn cg_main(ctx: &mut KernelContext<'_>) -> Result<(), PluginError> {
    let ast = ctx.ast();
    let targets = match ctx.get_value::<Func<NodeId, Vec<String>>>(FN_TARGETS) {
        Ok(f) => Some(f),
        Err(RegistryError::NotFound(_)) => None,
        Err(e) => {
            ctx.log(Severity::Fatal, format!("incompatible {FN_TARGETS}: {e}"));
            return Ok(());
        }
    };
    let graph = match &targets {
        Some(f) => build_callgraph(&ast, Some(&|id| f.call(id))),
        None => build_callgraph(&ast, None),
    };
    let path = ctx.config().text("-cg-out").unwrap_or("callgraph.dot").to_string();
    std::fs::write(&path, graph.to_dot()).map_err(|e| PluginError::Failed(format!("cannot write {path}: {e}")))?;
    let how = if targets.is_some() { "resolved by eva" } else { "by arity" };
    ctx.info(format!(
        "{} functions, {} call edges, indirect calls {how}; written to {path}",
        graph.nodes.len(),
        graph.edges.len()
    ));
    Ok(())
}

pub fn descriptor() -> PluginDescriptor {
    PluginDescriptor::new(NAME, env!("CARGO_PKG_VERSION"), "builds the call graph as DOT")
        .parameter(ParameterSpec::text("-cg-out", "callgraph.dot", "output file"))
        .main(cg_main)
}
