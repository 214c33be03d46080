//! Property database and status consolidation.
//!
//! A property is a proof obligation derived from an annotation. Analyzers
//! emit local statuses on properties, each resting on a set of hypotheses
//! (other properties). Consolidation computes the global verdict as a least
//! fixpoint, so circular hypotheses never justify anything.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use frontend::{Annotation, ExprKind, Location, NodeId, NodeKind, Origin, TypedAst};
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct PropertyId(pub u32);

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropertyKind {
    /// Attached to a statement.
    Assertion,
    /// A callee's `requires` instantiated at one call expression.
    Precondition(NodeId),
    /// A function's `ensures`.
    Postcondition(String),
}

impl PropertyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PropertyKind::Assertion => "Assertion",
            PropertyKind::Precondition(_) => "Precondition",
            PropertyKind::Postcondition(_) => "Postcondition",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub id: PropertyId,
    pub kind: PropertyKind,
    pub annotation: Annotation,
    pub attach: NodeId,
    pub location: Location,
}

impl Property {
    pub fn origin(&self) -> &Origin {
        &self.annotation.origin
    }

    /// Predicate in printed form, as used for deduplication and reports.
    pub fn predicate(&self) -> String {
        self.annotation.pred.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LocalStatus {
    True,
    False,
    Maybe,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmittedStatus {
    pub property: PropertyId,
    pub emitter: String,
    pub local: LocalStatus,
    pub hypotheses: BTreeSet<PropertyId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Consolidated {
    Valid,
    Invalid,
    Unknown,
    Inconsistent,
}

impl fmt::Display for Consolidated {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PropertyError {
    #[error("node {0} is not a valid attach point for this property kind")]
    BadAttachPoint(NodeId),
    #[error("unknown property {0}")]
    UnknownProperty(PropertyId),
    #[error("property {0} cannot be its own hypothesis")]
    SelfHypothesis(PropertyId),
}

/// Whether an emission was new or replaced an earlier one by the same
/// emitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emitted {
    New,
    Replaced,
}

/// One emission in index form, for [`consolidate`].
#[derive(Clone, Copy, Debug)]
pub struct Emission<'a> {
    pub property: usize,
    pub status: LocalStatus,
    pub hypotheses: &'a [usize],
}

/// Least-fixpoint consolidation over properties `0..n`.
///
/// A property is justified when some `True` emission has only justified
/// hypotheses, refuted when some `False` emission has only justified
/// hypotheses. Justification is propagated with per-emission counters of
/// still-unjustified hypotheses, starting from hypothesis-free emissions.
pub fn consolidate(n: usize, emissions: &[Emission<'_>]) -> Vec<Consolidated> {
    // True emissions waiting on each property, in compressed rows.
    let mut start = vec![0usize; n + 1];
    for e in emissions.iter().filter(|e| e.status == LocalStatus::True) {
        for &h in e.hypotheses {
            start[h + 1] += 1;
        }
    }
    for p in 0..n {
        start[p + 1] += start[p];
    }
    let mut waiting = vec![0usize; start[n]];
    let mut fill = start.clone();
    let mut pending: Vec<usize> = Vec::with_capacity(emissions.len());
    let mut justified = vec![false; n];
    let mut queue = Vec::new();
    for (i, e) in emissions.iter().enumerate() {
        pending.push(e.hypotheses.len());
        if e.status != LocalStatus::True {
            continue;
        }
        for &h in e.hypotheses {
            waiting[fill[h]] = i;
            fill[h] += 1;
        }
        if e.hypotheses.is_empty() && !justified[e.property] {
            justified[e.property] = true;
            queue.push(e.property);
        }
    }
    while let Some(p) = queue.pop() {
        for &i in &waiting[start[p]..start[p + 1]] {
            pending[i] -= 1;
            let q = emissions[i].property;
            if pending[i] == 0 && !justified[q] {
                justified[q] = true;
                queue.push(q);
            }
        }
    }
    let mut out: Vec<Consolidated> = justified
        .iter()
        .map(|&j| if j { Consolidated::Valid } else { Consolidated::Unknown })
        .collect();
    for e in emissions {
        if e.status == LocalStatus::False && e.hypotheses.iter().all(|&h| justified[h]) {
            out[e.property] = match out[e.property] {
                Consolidated::Valid | Consolidated::Inconsistent => Consolidated::Inconsistent,
                _ => Consolidated::Invalid,
            };
        }
    }
    out
}

type DedupKey = (NodeId, PropertyKind, String, Origin);

#[derive(Debug, Default)]
pub struct PropertyDb {
    ast: Option<Rc<TypedAst>>,
    properties: Vec<Property>,
    index: HashMap<DedupKey, PropertyId>,
    emissions: BTreeMap<(PropertyId, String), EmittedStatus>,
}

impl PropertyDb {
    /// An empty database validating attach points against `ast`.
    pub fn new(ast: Rc<TypedAst>) -> PropertyDb {
        PropertyDb {
            ast: Some(ast),
            ..PropertyDb::default()
        }
    }

    fn check_attach(&self, kind: &PropertyKind, attach: NodeId) -> bool {
        let Some(ast) = &self.ast else { return false };
        let Some(info) = ast.node(attach) else { return false };
        match kind {
            PropertyKind::Assertion => info.kind == NodeKind::Stmt,
            PropertyKind::Precondition(site) => {
                *site == attach && matches!(ast.find_expr(attach).map(|e| &e.kind), Some(ExprKind::Call { .. }))
            }
            PropertyKind::Postcondition(f) => {
                info.kind == NodeKind::Function && ast.functions()[info.function].name == *f
            }
        }
    }

    /// Registers a property, or returns the existing one with the same
    /// attach point, kind, printed predicate and origin.
    pub fn register(
        &mut self,
        annotation: Annotation,
        kind: PropertyKind,
        attach: NodeId,
    ) -> Result<PropertyId, PropertyError> {
        if !self.check_attach(&kind, attach) {
            return Err(PropertyError::BadAttachPoint(attach));
        }
        let key = (attach, kind.clone(), annotation.pred.to_string(), annotation.origin.clone());
        if let Some(id) = self.index.get(&key) {
            return Ok(*id);
        }
        let id = PropertyId(self.properties.len() as u32);
        self.properties.push(Property {
            id,
            kind,
            location: annotation.loc.clone(),
            annotation,
            attach,
        });
        self.index.insert(key, id);
        Ok(id)
    }

    pub fn emit(
        &mut self,
        property: PropertyId,
        emitter: &str,
        local: LocalStatus,
        hypotheses: BTreeSet<PropertyId>,
    ) -> Result<Emitted, PropertyError> {
        if self.get(property).is_none() {
            return Err(PropertyError::UnknownProperty(property));
        }
        if hypotheses.contains(&property) {
            return Err(PropertyError::SelfHypothesis(property));
        }
        if let Some(h) = hypotheses.iter().find(|h| self.get(**h).is_none()) {
            return Err(PropertyError::UnknownProperty(*h));
        }
        let status = EmittedStatus {
            property,
            emitter: emitter.to_string(),
            local,
            hypotheses,
        };
        Ok(match self.emissions.insert((property, emitter.to_string()), status) {
            Some(_) => Emitted::Replaced,
            None => Emitted::New,
        })
    }

    pub fn get(&self, id: PropertyId) -> Option<&Property> {
        self.properties.get(id.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    /// All properties in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Property> {
        self.properties.iter()
    }

    /// Emissions on `id`, sorted by emitter name.
    pub fn emissions_for(&self, id: PropertyId) -> impl Iterator<Item = &EmittedStatus> {
        self.emissions.range((id, String::new())..).take_while(move |((p, _), _)| *p == id).map(|(_, s)| s)
    }

    pub fn emissions(&self) -> impl Iterator<Item = &EmittedStatus> {
        self.emissions.values()
    }

    pub fn has_emission(&self, id: PropertyId, emitter: &str) -> bool {
        self.emissions.contains_key(&(id, emitter.to_string()))
    }

    /// Global verdict for every property, indexed by id.
    pub fn consolidate(&self) -> Vec<Consolidated> {
        let hyps: Vec<Vec<usize>> = self
            .emissions
            .values()
            .map(|e| e.hypotheses.iter().map(|h| h.0 as usize).collect())
            .collect();
        let flat: Vec<Emission<'_>> = self
            .emissions
            .values()
            .zip(&hyps)
            .map(|(e, h)| Emission {
                property: e.property.0 as usize,
                status: e.local,
                hypotheses: h,
            })
            .collect();
        consolidate(self.properties.len(), &flat)
    }

    /// Properties not consolidated `Valid`, sorted by location then id.
    pub fn remaining(&self, statuses: &[Consolidated]) -> Vec<PropertyId> {
        let mut out: Vec<&Property> = self
            .properties
            .iter()
            .filter(|p| statuses[p.id.0 as usize] != Consolidated::Valid)
            .collect();
        out.sort_by(|a, b| a.location.cmp(&b.location).then(a.id.cmp(&b.id)));
        out.into_iter().map(|p| p.id).collect()
    }
}
