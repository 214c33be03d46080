//! Consolidated report in text and JSON form.

use std::fmt::Write;

use serde::Serialize;

use super::properties::{Consolidated, LocalStatus, PropertyDb, PropertyId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportEmission {
    pub emitter: String,
    pub status: LocalStatus,
    pub hypotheses: Vec<PropertyId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportEntry {
    pub id: PropertyId,
    pub file: String,
    pub line: u32,
    #[serde(skip)]
    pub column: u32,
    pub kind: String,
    pub predicate: String,
    pub origin: String,
    pub emitted: Vec<ReportEmission>,
    pub consolidated: Consolidated,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub valid: usize,
    pub invalid: usize,
    pub unknown: usize,
    pub inconsistent: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    /// In id order.
    pub properties: Vec<ReportEntry>,
    pub summary: Summary,
    /// Non-valid properties sorted by location then id.
    #[serde(skip)]
    pub remaining: Vec<PropertyId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl Report {
    pub fn build(db: &PropertyDb) -> Report {
        let statuses = db.consolidate();
        let mut summary = Summary::default();
        let properties = db
            .iter()
            .map(|p| {
                let consolidated = statuses[p.id.0 as usize];
                summary.total += 1;
                match consolidated {
                    Consolidated::Valid => summary.valid += 1,
                    Consolidated::Invalid => summary.invalid += 1,
                    Consolidated::Unknown => summary.unknown += 1,
                    Consolidated::Inconsistent => summary.inconsistent += 1,
                }
                ReportEntry {
                    id: p.id,
                    file: p.location.file.to_string(),
                    line: p.location.line,
                    column: p.location.column,
                    kind: p.kind.name().to_string(),
                    predicate: p.predicate(),
                    origin: p.origin().to_string(),
                    emitted: db
                        .emissions_for(p.id)
                        .map(|e| ReportEmission {
                            emitter: e.emitter.clone(),
                            status: e.local,
                            hypotheses: e.hypotheses.iter().copied().collect(),
                        })
                        .collect(),
                    consolidated,
                }
            })
            .collect();
        Report {
            properties,
            summary,
            remaining: db.remaining(&statuses),
        }
    }

    pub fn entry(&self, id: PropertyId) -> Option<&ReportEntry> {
        self.properties.get(id.0 as usize)
    }

    pub fn status(&self, id: PropertyId) -> Option<Consolidated> {
        self.entry(id).map(|e| e.consolidated)
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.to_text(),
            ReportFormat::Json => self.to_json(),
        }
    }

    /// One line per property, ordered by location then id, then a summary.
    pub fn to_text(&self) -> String {
        let mut order: Vec<&ReportEntry> = self.properties.iter().collect();
        order.sort_by(|a, b| (&a.file, a.line, a.column, a.id).cmp(&(&b.file, b.line, b.column, b.id)));
        let mut out = String::new();
        for e in order {
            let by: Vec<&str> = e.emitted.iter().map(|s| s.emitter.as_str()).collect();
            let by = if by.is_empty() { "none".to_string() } else { by.join(", ") };
            let _ = writeln!(
                out,
                "{}:{} [{}] {} : {} (by {})",
                e.file, e.line, e.kind, e.predicate, e.consolidated, by
            );
        }
        let s = &self.summary;
        let _ = writeln!(
            out,
            "summary: total={} valid={} invalid={} unknown={} inconsistent={}",
            s.total, s.valid, s.invalid, s.unknown, s.inconsistent
        );
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
