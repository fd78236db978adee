//! Per-property results and their text and JSON renderings.

use checkmate_core::analysis::{Counterexample, Strategy};
use checkmate_core::engine::{Case, CaseOutcome, LogEntry, PropertyResult};
use checkmate_core::game::{History, Property};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub literals: Vec<String>,
    /// `satisfied`, `violated` or `skipped`.
    pub outcome: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub core: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreconditionReport {
    pub formula: String,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub history: History,
    pub verdict: Verdict,
    pub log: Vec<String>,
    pub cases: Vec<CaseReport>,
    pub partition_verified: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub strategies: Vec<Strategy>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precondition: Option<PreconditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PropertyReport {
    pub fn from_result(r: &PropertyResult) -> Self {
        let cases = r
            .tree
            .leaves()
            .into_iter()
            .map(|(c, o)| {
                let (outcome, core) = match o {
                    CaseOutcome::Satisfied(_) => ("satisfied", Vec::new()),
                    CaseOutcome::Violated(core) => ("violated", core.clone()),
                    CaseOutcome::Skipped => ("skipped", Vec::new()),
                };
                CaseReport { literals: c.smt_literals(), outcome: outcome.into(), core }
            })
            .collect();
        PropertyReport {
            property: r.property,
            history: r.history.clone(),
            verdict: if r.holds { Verdict::Yes } else { Verdict::No },
            log: r.log.iter().map(LogEntry::to_string).collect(),
            cases,
            partition_verified: false,
            strategies: Vec::new(),
            counterexamples: Vec::new(),
            precondition: None,
            error: None,
        }
    }

    pub fn unknown(property: Property, history: History, error: String) -> Self {
        PropertyReport {
            property,
            history,
            verdict: Verdict::Unknown,
            log: Vec::new(),
            cases: Vec::new(),
            partition_verified: false,
            strategies: Vec::new(),
            counterexamples: Vec::new(),
            precondition: None,
            error: Some(error),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub game: String,
    pub backend: String,
    pub results: Vec<PropertyReport>,
    pub exit_code: i32,
}

fn indent(out: &mut String, text: &str) {
    for line in text.lines() {
        out.push('\t');
        out.push_str(line);
        out.push('\n');
    }
}

/// The question, log, verdict and requested artifacts for one history.
pub fn render_property(r: &PropertyReport) -> String {
    let adjective = r.property.adjective();
    let mut out = format!("Is history {} {adjective}?\n", r.history);
    for line in &r.log {
        indent(&mut out, line);
    }
    match r.verdict {
        Verdict::Yes => out.push_str(&format!("YES, it is {adjective}.\n")),
        Verdict::No => out.push_str(&format!("NO, it is not {adjective}.\n")),
        Verdict::Unknown => {
            out.push_str(&format!("UNKNOWN, {}.\n", r.error.as_deref().unwrap_or("the solver gave up")));
        }
    }
    for s in &r.strategies {
        out.push_str(&format!("\nCase {}: strategy:\n", s.case));
        for c in &s.choices {
            indent(&mut out, &c.to_string());
        }
    }
    for ce in &r.counterexamples {
        out.push_str(&format!("\nCounterexample for {}:\n", ce.case));
        indent(&mut out, &ce.kind.to_string());
    }
    if let Some(p) = &r.precondition {
        out.push_str("\nWeakest Precondition:\n");
        indent(&mut out, &p.formula);
    }
    out
}

pub fn render_header(property: Property) -> String {
    format!("{}\n\n", property.header())
}

/// Case literals as a set, for comparisons that ignore order.
pub fn literal_set(c: &Case) -> std::collections::BTreeSet<String> {
    c.smt_literals().into_iter().collect()
}
