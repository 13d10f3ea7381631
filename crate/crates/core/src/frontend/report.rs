//! Verdicts in a form fit for printing, either as text or as JSON.

use std::fmt::Write as _;

use serde::Serialize;

use crate::automaton::Trace;
use crate::milp::Rational;

use super::document::AutomatonDocument;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Value {
    pub exact: Rational,
    pub decimal: String,
}

impl From<&Rational> for Value {
    fn from(r: &Rational) -> Self {
        let decimal = if r.is_integer() { r.to_string() } else { format!("{:.6}", r.to_f64()) };
        Value { exact: r.clone(), decimal }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Principal {
    pub index: usize,
    pub name: String,
}

impl Principal {
    pub fn new(index: usize, names: &[String]) -> Self {
        let name = names.get(index - 1).cloned().unwrap_or_else(|| index.to_string());
        Principal { index, name }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Blame {
    pub principal: Principal,
    /// A run of the controller reaching `state`.
    pub prefix: Vec<String>,
    pub state: String,
    pub action: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flagged {
    pub from: String,
    pub label: String,
    pub to: String,
    pub gamma: Value,
    pub principals: Vec<Principal>,
    pub prefix: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub operation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Value>,
    /// The action attaining `gamma`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub liable: Option<Vec<Principal>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub blame: Vec<Blame>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flagged: Vec<Flagged>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hanged: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub automaton: Option<AutomatonDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dot: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn actions(w: &Trace) -> Vec<String> {
    w.actions().iter().map(|a| a.to_string()).collect()
}

fn trace_text(w: &[String]) -> String {
    if w.is_empty() {
        "ε".into()
    } else {
        w.concat()
    }
}

fn names(ps: &[Principal]) -> String {
    let shown: Vec<String> = ps.iter().map(|p| format!("{} ({})", p.name, p.index)).collect();
    format!("{{{}}}", shown.join(", "))
}

impl Report {
    pub fn new(operation: impl Into<String>) -> Self {
        Report { operation: operation.into(), ..Default::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }

    /// Human-readable rendering. Automata and graphs are printed verbatim.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{}", self.operation);
        match self.holds {
            Some(true) => out.push_str(": holds\n"),
            Some(false) => out.push_str(": fails\n"),
            None => out.push('\n'),
        }
        if let Some(e) = &self.error {
            let _ = writeln!(out, "  error: {e}");
        }
        if let Some(g) = &self.gamma {
            let _ = write!(out, "  gamma = {}", g.exact);
            if g.decimal != g.exact.to_string() {
                let _ = write!(out, " ({})", g.decimal);
            }
            if let Some(a) = &self.action {
                let _ = write!(out, " on {a}");
            }
            out.push('\n');
        }
        if let Some(cap) = self.cap {
            let _ = writeln!(out, "  cap = {cap}");
        }
        if let Some(w) = &self.witness {
            let _ = writeln!(out, "  witness: {}", trace_text(w));
        }
        if let Some(w) = &self.counterexample {
            let _ = writeln!(out, "  counterexample: {}", trace_text(w));
        }
        if let Some(l) = &self.liable {
            let _ = writeln!(out, "  liable: {}", names(l));
        }
        for b in &self.blame {
            let _ = writeln!(
                out,
                "    {} after {} in {} by {}",
                b.principal.name,
                trace_text(&b.prefix),
                b.state,
                b.action
            );
        }
        for f in &self.flagged {
            let _ = writeln!(
                out,
                "  flagged {} {} {} gamma = {} by {} after {}",
                f.from,
                f.label,
                f.to,
                f.gamma.exact,
                names(&f.principals),
                trace_text(&f.prefix)
            );
        }
        if let Some(h) = &self.hanged {
            let _ = writeln!(out, "  hanged: {{{}}}", h.join(", "));
        }
        if let Some(ts) = &self.traces {
            for w in ts {
                let _ = writeln!(out, "  {}", trace_text(w));
            }
        }
        if let Some(a) = &self.automaton {
            let _ = writeln!(out, "{}", a.to_json());
        }
        if let Some(d) = &self.dot {
            out.push_str(d);
        }
        out
    }
}
