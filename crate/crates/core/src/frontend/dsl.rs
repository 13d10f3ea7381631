//! Principals written as regular expressions over actions, e.g.
//! `(!init.?pen.!cancel)*.(!init.?book.?pay + !init.?pen.?pay)`.
//!
//! ```text
//! expr    = seq { "+" seq }
//! seq     = postfix { "." postfix }
//! postfix = primary { "*" }
//! primary = ("?" | "!") name | "(" expr ")"
//! ```

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use crate::automaton::{
    is_valid_name, ActionVector, AutomatonError, BasicAction, ContractAutomaton, StateVector,
    RESERVED_DONE,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("syntax error at offset {pos}: {message}")]
    SyntaxError { pos: usize, message: String },
    #[error("principal both offers and requests {0}")]
    SelfComplementaryPrincipal(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PrincipalExpr {
    Request(String),
    Offer(String),
    /// At least two parts.
    Concat(Vec<PrincipalExpr>),
    /// At least two alternatives.
    Choice(Vec<PrincipalExpr>),
    Star(Box<PrincipalExpr>),
}

impl fmt::Display for PrincipalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let grouped = |e: &PrincipalExpr, f: &mut fmt::Formatter<'_>, when: bool| {
            if when {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            PrincipalExpr::Request(a) => write!(f, "?{a}"),
            PrincipalExpr::Offer(a) => write!(f, "!{a}"),
            PrincipalExpr::Concat(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ".")?;
                    }
                    grouped(p, f, matches!(p, PrincipalExpr::Concat(_) | PrincipalExpr::Choice(_)))?;
                }
                Ok(())
            }
            PrincipalExpr::Choice(alts) => {
                for (i, p) in alts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    grouped(p, f, matches!(p, PrincipalExpr::Choice(_)))?;
                }
                Ok(())
            }
            PrincipalExpr::Star(e) => {
                grouped(e, f, !matches!(**e, PrincipalExpr::Request(_) | PrincipalExpr::Offer(_)))?;
                write!(f, "*")
            }
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(DslError::SyntaxError { pos: self.pos, message: message.into() })
    }

    fn peek(&mut self) -> Option<char> {
        let rest = &self.text[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        trimmed.chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<PrincipalExpr, DslError> {
        let mut alts = vec![self.seq()?];
        while self.eat('+') {
            alts.push(self.seq()?);
        }
        Ok(if alts.len() == 1 { alts.pop().unwrap() } else { PrincipalExpr::Choice(alts) })
    }

    fn seq(&mut self) -> Result<PrincipalExpr, DslError> {
        let mut parts = vec![self.postfix()?];
        while self.eat('.') {
            parts.push(self.postfix()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { PrincipalExpr::Concat(parts) })
    }

    fn postfix(&mut self) -> Result<PrincipalExpr, DslError> {
        let mut e = self.primary()?;
        while self.eat('*') {
            e = PrincipalExpr::Star(Box::new(e));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<PrincipalExpr, DslError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.error("expected `)`");
                }
                Ok(e)
            }
            Some(c @ ('?' | '!')) => {
                self.pos += 1;
                let start = self.pos;
                let len = self.text[start..]
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
                    .unwrap_or(self.text.len() - start);
                let name = &self.text[start..start + len];
                if !is_valid_name(name) || name == RESERVED_DONE {
                    return self.error(format!("expected an action name after `{c}`"));
                }
                self.pos += len;
                Ok(if c == '?' {
                    PrincipalExpr::Request(name.into())
                } else {
                    PrincipalExpr::Offer(name.into())
                })
            }
            Some(c) => self.error(format!("unexpected `{c}`")),
            None => self.error("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<PrincipalExpr, DslError> {
    let mut p = Parser { text, pos: 0 };
    let e = p.expr()?;
    match p.peek() {
        None => Ok(e),
        Some(c) => p.error(format!("unexpected `{c}`")),
    }
}

/// Thompson automaton with ε-moves (`None` labels).
#[derive(Default)]
struct Nfa {
    edges: Vec<Vec<(Option<BasicAction>, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    fn build(&mut self, e: &PrincipalExpr) -> (usize, usize) {
        let (s, t) = (self.state(), self.state());
        match e {
            PrincipalExpr::Request(a) => self.edges[s].push((Some(BasicAction::Request(a.clone())), t)),
            PrincipalExpr::Offer(a) => self.edges[s].push((Some(BasicAction::Offer(a.clone())), t)),
            PrincipalExpr::Concat(parts) => {
                let mut at = s;
                for p in parts {
                    let (i, o) = self.build(p);
                    self.edges[at].push((None, i));
                    at = o;
                }
                self.edges[at].push((None, t));
            }
            PrincipalExpr::Choice(alts) => {
                for p in alts {
                    let (i, o) = self.build(p);
                    self.edges[s].push((None, i));
                    self.edges[o].push((None, t));
                }
            }
            PrincipalExpr::Star(inner) => {
                let (i, o) = self.build(inner);
                self.edges[s].push((None, i));
                self.edges[s].push((None, t));
                self.edges[o].push((None, i));
                self.edges[o].push((None, t));
            }
        }
        (s, t)
    }

    fn closure(&self, q: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([q]);
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for (l, r) in &self.edges[p] {
                if l.is_none() && seen.insert(*r) {
                    stack.push(*r);
                }
            }
        }
        seen
    }
}

/// The principal of an expression: Thompson construction, removal of
/// ε-moves, then pruning of useless states. States are `q0, q1, …` in
/// breadth-first order.
pub fn compile(e: &PrincipalExpr) -> Result<ContractAutomaton, DslError> {
    let mut nfa = Nfa::default();
    let (start, accept) = nfa.build(e);
    let mut ids = vec![usize::MAX; nfa.edges.len()];
    ids[start] = 0;
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    let mut transitions = Vec::new();
    let mut finals = Vec::new();
    while let Some(q) = queue.pop_front() {
        let closure = nfa.closure(q);
        if closure.contains(&accept) {
            finals.push(q);
        }
        let mut seen = BTreeSet::new();
        for p in closure {
            for (l, r) in &nfa.edges[p] {
                let Some(action) = l else { continue };
                if ids[*r] == usize::MAX {
                    ids[*r] = order.len();
                    order.push(*r);
                    queue.push_back(*r);
                }
                if seen.insert((action.clone(), *r)) {
                    transitions.push((q, action.clone(), *r));
                }
            }
        }
    }
    let name = |q: usize| StateVector::single(format!("q{}", ids[q]));
    let a = ContractAutomaton::new(
        1,
        order.iter().map(|&q| name(q)).collect(),
        name(start),
        finals.iter().map(|&q| name(q)).collect(),
        transitions
            .into_iter()
            .map(|(q, action, r)| (name(q), ActionVector::lone(1, 0, action), name(r)))
            .collect(),
    )
    .map_err(|e| match e {
        AutomatonError::SelfComplementary(name) => DslError::SelfComplementaryPrincipal(name),
        e => DslError::Automaton(e),
    })?;
    Ok(rename(&a.prune()))
}

/// Renumbers states `q0, q1, …` in their current order.
fn rename(a: &ContractAutomaton) -> ContractAutomaton {
    let name = |q: usize| StateVector::single(format!("q{q}"));
    ContractAutomaton::new(
        1,
        (0..a.states().len()).map(name).collect(),
        name(a.initial()),
        a.finals().iter().map(|&q| name(q)).collect(),
        a.transitions().iter().map(|t| (name(t.from), t.label.clone(), name(t.to))).collect(),
    )
    .expect("renaming preserves validity")
}

pub fn parse_principal(text: &str) -> Result<ContractAutomaton, DslError> {
    compile(&parse_expr(text)?)
}
