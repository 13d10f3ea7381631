//! Horn clauses of intuitionistic linear logic with mix.
//!
//! Positive atoms are resources, offered once each; negative atoms are
//! debts, requested once each. Repeated literals in a tensor are distinct
//! resources, so states record the occurrence indices still to be fired.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::automaton::{
    a_product, concatenate, is_valid_name, ActionKind, ActionVector, BasicAction,
    ContractAutomaton, StateVector, Trace, Transition, RESERVED_DONE,
};

use super::LogicError;

/// Tensors longer than this would need more than 2^16 states.
const MAX_TENSOR: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Pos(String),
    /// `a~`, a debt of `a`.
    Neg(String),
}

impl Literal {
    pub fn atom(&self) -> &str {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, Literal::Pos(_))
    }

    fn action(&self) -> BasicAction {
        match self {
            Literal::Pos(a) => BasicAction::Offer(a.clone()),
            Literal::Neg(a) => BasicAction::Request(a.clone()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Pos(a) => write!(f, "{a}"),
            Literal::Neg(a) => write!(f, "{a}~"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IllClause {
    Tensor(Vec<Literal>),
    /// `y1 * y2 -o x1 * x2`: consume the premises, then produce the conclusions.
    HornImpl(Vec<String>, Vec<Literal>),
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" * ")
}

impl fmt::Display for IllClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IllClause::Tensor(x) => write!(f, "{}", join(x)),
            IllClause::HornImpl(y, x) => write!(f, "{} -o {}", join(y), join(x)),
        }
    }
}

impl IllClause {
    pub fn validate(&self) -> Result<(), LogicError> {
        let bad = |why: String| Err(LogicError::InvalidFormula(format!("{why} in `{self}`")));
        let (y, x): (&[String], &[Literal]) = match self {
            IllClause::Tensor(x) => (&[], x),
            IllClause::HornImpl(y, x) => {
                if y.is_empty() {
                    return bad("no premises".into());
                }
                (y, x)
            }
        };
        if x.is_empty() {
            return bad("no literals".into());
        }
        if x.len() > MAX_TENSOR || y.len() > MAX_TENSOR {
            return bad(format!("more than {MAX_TENSOR} literals in a tensor"));
        }
        for a in y.iter().map(String::as_str).chain(x.iter().map(Literal::atom)) {
            if !is_valid_name(a) || a == RESERVED_DONE {
                return bad(format!("invalid atom {a:?}"));
            }
        }
        for l in x {
            if let Literal::Pos(a) = l {
                if x.contains(&Literal::Neg(a.clone())) {
                    return bad(format!("both {a} and {a}~ among the conclusions"));
                }
                if y.contains(a) {
                    return bad(format!("{a} both consumed and produced"));
                }
            }
        }
        Ok(())
    }

    /// The principal of the clause, deterministic and without unreachable
    /// states.
    pub fn automaton(&self) -> Result<ContractAutomaton, LogicError> {
        self.validate()?;
        let a = match self {
            IllClause::Tensor(x) => tensor(x),
            IllClause::HornImpl(y, x) => {
                let debts: Vec<Literal> = y.iter().map(|b| Literal::Neg(b.clone())).collect();
                concatenate(&tensor(&debts), &tensor(x))?.trim()
            }
        };
        Ok(if a.is_deterministic() { a } else { a.determinize()?.trim() })
    }
}

/// Fires every literal once, in every order. States are the sets of
/// occurrences still to fire.
fn tensor(x: &[Literal]) -> ContractAutomaton {
    let n = x.len();
    let full = (1u64 << n) - 1;
    let idx = |mask: u64| (full - mask) as usize;
    let states = (0..=full)
        .rev()
        .map(|mask| {
            let mut parts: Vec<String> =
                (0..n).filter(|j| mask >> j & 1 == 1).map(|j| j.to_string()).collect();
            parts.push("*".into());
            StateVector::single(format!("{{{}}}", parts.join(",")))
        })
        .collect();
    let mut transitions = Vec::new();
    for mask in (1..=full).rev() {
        for (j, l) in x.iter().enumerate() {
            if mask >> j & 1 == 1 {
                transitions.push(Transition {
                    from: idx(mask),
                    label: ActionVector::lone(1, 0, l.action()),
                    to: idx(mask & !(1 << j)),
                });
            }
        }
    }
    let names = |pos: bool| x.iter().filter(|l| l.is_positive() == pos).map(|l| l.atom().to_string()).collect();
    ContractAutomaton::from_indexed(1, states, 0, BTreeSet::from([idx(0)]), names(false), names(true), transitions)
}

/// A tensor of at least two clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IllFormula {
    clauses: Vec<IllClause>,
}

impl IllFormula {
    pub fn new(clauses: Vec<IllClause>) -> Result<Self, LogicError> {
        if clauses.len() < 2 {
            return Err(LogicError::InvalidFormula(format!(
                "a formula needs at least two clauses, found {}",
                clauses.len()
            )));
        }
        for c in &clauses {
            c.validate()?;
        }
        Ok(IllFormula { clauses })
    }

    pub fn clauses(&self) -> &[IllClause] {
        &self.clauses
    }
}

impl fmt::Display for IllFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(|c| format!("({c})")).collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// The associative product of the principals of a multiset of clauses.
/// Formulas enter the multiset as their clauses.
pub fn translate_ill(gamma: &[IllClause]) -> Result<ContractAutomaton, LogicError> {
    if gamma.is_empty() {
        return Err(LogicError::InvalidFormula("empty multiset".into()));
    }
    let principals = gamma.iter().map(IllClause::automaton).collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&ContractAutomaton> = principals.iter().collect();
    Ok(a_product(&refs)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Honoured {
    pub holds: bool,
    /// An accepted trace made of matches and of lone offers of exactly the
    /// atoms of `Z`.
    pub witness: Option<Trace>,
}

/// Whether `gamma ⊢ z` is provable with no debt left, decided on the
/// automaton of `gamma`.
pub fn ill_honoured(gamma: &[IllClause], z: &[Literal]) -> Result<Honoured, LogicError> {
    if let Some(l) = z.iter().find(|l| !l.is_positive()) {
        return Err(LogicError::NegativeAtomInZ(l.atom().to_string()));
    }
    let a = translate_ill(gamma)?;
    let mut budget: BTreeMap<&str, u32> = BTreeMap::new();
    for l in z {
        *budget.entry(l.atom()).or_default() += 1;
    }
    let names: Vec<&str> = budget.keys().copied().collect();
    let start: Vec<u32> = budget.values().copied().collect();
    let mut search = Search { a: &a, names: &names, dead: HashSet::new(), path: Vec::new() };
    let holds = search.run(a.initial(), start);
    let witness = holds.then(|| a.labels_of(&search.path));
    Ok(Honoured { holds, witness })
}

struct Search<'a> {
    a: &'a ContractAutomaton,
    names: &'a [&'a str],
    /// (state, remaining offers of Z) with no honoured completion.
    dead: HashSet<(usize, Vec<u32>)>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, q: usize, left: Vec<u32>) -> bool {
        if self.a.is_final(q) && left.iter().all(|&c| c == 0) {
            return true;
        }
        if self.dead.contains(&(q, left.clone())) {
            return false;
        }
        // Marked before exploring, which also cuts cycles.
        self.dead.insert((q, left.clone()));
        for &t in self.a.outgoing(q) {
            let tr = &self.a.transitions()[t];
            let mut next = left.clone();
            match tr.label.kind() {
                ActionKind::Match { .. } => {}
                ActionKind::Offer { name, .. } => match self.names.iter().position(|n| *n == name) {
                    Some(i) if next[i] > 0 => next[i] -= 1,
                    _ => continue,
                },
                ActionKind::Request { .. } => continue,
            }
            self.path.push(t);
            if self.run(tr.to, next) {
                return true;
            }
            self.path.pop();
        }
        false
    }
}
