//! JSON form of an automaton.
//!
//! ```json
//! {
//!   "rank": 2,
//!   "principal_names": ["Ann", "Bart"],
//!   "states": [["q0", "q0"], ["q1", "q1"]],
//!   "initial": ["q0", "q0"],
//!   "finals": [["q1", "q1"]],
//!   "transitions": [{"from": ["q0", "q0"], "label": ["?init", "!init"], "to": ["q1", "q1"]}]
//! }
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::automaton::{ActionVector, AutomatonError, BasicAction, ContractAutomaton, StateVector};

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("{found} principal names for rank {rank}")]
    Names { rank: usize, found: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDocument {
    pub from: Vec<String>,
    pub label: Vec<String>,
    pub to: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomatonDocument {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub principal_names: Option<Vec<String>>,
    pub states: Vec<Vec<String>>,
    pub initial: Vec<String>,
    pub finals: Vec<Vec<String>>,
    pub transitions: Vec<TransitionDocument>,
}

impl AutomatonDocument {
    pub fn from_automaton(a: &ContractAutomaton, names: Option<Vec<String>>) -> Self {
        let sv = |s: &StateVector| s.entries().to_vec();
        AutomatonDocument {
            rank: a.rank(),
            principal_names: names,
            states: a.states().iter().map(sv).collect(),
            initial: sv(a.state(a.initial())),
            finals: a.finals().iter().map(|&q| sv(a.state(q))).collect(),
            transitions: a
                .transitions()
                .iter()
                .map(|t| TransitionDocument {
                    from: sv(a.state(t.from)),
                    label: t.label.entries().iter().map(BasicAction::to_string).collect(),
                    to: sv(a.state(t.to)),
                })
                .collect(),
        }
    }

    pub fn to_automaton(&self) -> Result<ContractAutomaton, DocumentError> {
        if let Some(names) = &self.principal_names {
            if names.len() != self.rank {
                return Err(DocumentError::Names { rank: self.rank, found: names.len() });
            }
        }
        let sv = |s: &Vec<String>| StateVector::new(s.clone());
        let transitions = self
            .transitions
            .iter()
            .map(|t| {
                let entries = t.label.iter().map(|e| e.parse()).collect::<Result<Vec<_>, _>>()?;
                Ok((sv(&t.from), ActionVector::new(entries)?, sv(&t.to)))
            })
            .collect::<Result<Vec<_>, AutomatonError>>()?;
        Ok(ContractAutomaton::new(
            self.rank,
            self.states.iter().map(sv).collect(),
            sv(&self.initial),
            self.finals.iter().map(sv).collect(),
            transitions,
        )?)
    }

    /// The principal names, defaulting to the 1-based indices.
    pub fn names(&self) -> Vec<String> {
        self.principal_names.clone().unwrap_or_else(|| (1..=self.rank).map(|i| i.to_string()).collect())
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz text: finals are double circles, the initial state has an
/// incoming arrow, parallel transitions share one edge.
pub fn render_dot(a: &ContractAutomaton) -> String {
    let mut out = String::from("digraph ca {\n  rankdir=LR;\n  __start [shape=point];\n");
    for (q, s) in a.states().iter().enumerate() {
        let shape = if a.is_final(q) { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  s{q} [label={}, shape={shape}];", quote(&s.to_string()));
    }
    let _ = writeln!(out, "  __start -> s{};", a.initial());
    let mut edges: std::collections::BTreeMap<(usize, usize), Vec<String>> = Default::default();
    for t in a.transitions() {
        edges.entry((t.from, t.to)).or_default().push(t.label.to_string());
    }
    for ((from, to), labels) in edges {
        let _ = writeln!(out, "  s{from} -> s{to} [label={}];", quote(&labels.join("\\n")));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agreement::tests::{ann, bart};
    use crate::automaton::product;

    #[test]
    fn documents_round_trip() {
        let a = product(&[&ann(), &bart()]).unwrap();
        let doc = AutomatonDocument::from_automaton(&a, Some(vec!["Ann".into(), "Bart".into()]));
        let back = AutomatonDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        let b = back.to_automaton().unwrap();
        assert_eq!(AutomatonDocument::from_automaton(&b, back.principal_names.clone()), doc);
        assert_eq!(b.transitions().len(), a.transitions().len());
        assert_eq!(back.names(), ["Ann", "Bart"]);
    }

    #[test]
    fn invalid_documents_are_rejected() {
        let text = r#"{"rank":1,"states":[["q0"]],"initial":["q0"],"finals":[],
            "transitions":[{"from":["q0"],"label":["?a"],"to":["q9"]}]}"#;
        assert!(matches!(
            AutomatonDocument::from_json(text).unwrap().to_automaton(),
            Err(DocumentError::Automaton(AutomatonError::UnknownState(_)))
        ));
        let text = r#"{"rank":2,"principal_names":["x"],"states":[["q0","q0"]],"initial":["q0","q0"],"finals":[],"transitions":[]}"#;
        assert!(matches!(
            AutomatonDocument::from_json(text).unwrap().to_automaton(),
            Err(DocumentError::Names { .. })
        ));
        assert!(AutomatonDocument::from_json("{").is_err());
    }

    #[test]
    fn dot_output() {
        let dot = render_dot(&ann());
        assert!(dot.starts_with("digraph ca {"));
        assert!(dot.contains("doublecircle"));
        assert!(dot.contains("label=\"(?init)\""));
    }
}
