//! Horn clauses of propositional contract logic and their automata.
//!
//! A clause becomes a principal whose states are the premises still to be
//! requested, written as sorted premise indices plus the marker `*`, e.g.
//! `{0,2,*}`. A formula is the associative product of its clauses.

use std::collections::BTreeSet;
use std::fmt;

use crate::agreement::{admits_agreement, AgreementVerdict};
use crate::automaton::{
    a_product, is_valid_name, ActionKind, ActionVector, BasicAction, ContractAutomaton,
    StateVector, Transition, RESERVED_DONE,
};
use crate::weak::{admits_weak_agreement, WeakOptions, WeakVerdict};

use super::LogicError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PclClause {
    /// `a & b`: the atoms are offered forever.
    Conj(Vec<String>),
    /// `a & b -> c`: the conclusion is offered once every premise is obtained.
    Impl(Vec<String>, String),
    /// `a & b -->> c`: the conclusion is offered from the start, on credit.
    CImpl(Vec<String>, String),
}

impl PclClause {
    pub fn premises(&self) -> &[String] {
        match self {
            PclClause::Conj(_) => &[],
            PclClause::Impl(p, _) | PclClause::CImpl(p, _) => p,
        }
    }

    pub fn offers(&self) -> Vec<&str> {
        match self {
            PclClause::Conj(atoms) => atoms.iter().map(String::as_str).collect(),
            PclClause::Impl(_, b) | PclClause::CImpl(_, b) => vec![b.as_str()],
        }
    }

    fn validate(&self) -> Result<(), LogicError> {
        let bad = |why: String| Err(LogicError::InvalidFormula(format!("{why} in `{self}`")));
        let atoms: &[String] = match self {
            PclClause::Conj(atoms) => atoms,
            PclClause::Impl(p, _) | PclClause::CImpl(p, _) => p,
        };
        if atoms.is_empty() {
            return bad("no atoms".into());
        }
        let mut seen = BTreeSet::new();
        for a in atoms {
            if !seen.insert(a) {
                return bad(format!("repeated atom {a}"));
            }
        }
        for a in atoms.iter().map(String::as_str).chain(self.offers()) {
            if !is_valid_name(a) || a == RESERVED_DONE {
                return bad(format!("invalid atom {a:?}"));
            }
        }
        if let PclClause::Impl(p, b) | PclClause::CImpl(p, b) = self {
            if p.contains(b) {
                return bad(format!("conclusion {b} among the premises"));
            }
        }
        Ok(())
    }

    /// The principal of this clause. Premises may be empty here, which is
    /// how residual formulas represent a clause whose requests are all met.
    pub fn automaton(&self) -> ContractAutomaton {
        let premises = self.premises();
        let n = premises.len();
        let subsets: Vec<u64> = match self {
            PclClause::Conj(_) => vec![0],
            _ => (0..1u64 << n).collect(),
        };
        let name = |mask: u64| {
            let mut parts: Vec<String> =
                (0..n).filter(|j| mask >> j & 1 == 1).map(|j| j.to_string()).collect();
            parts.push("*".into());
            StateVector::single(format!("{{{}}}", parts.join(",")))
        };
        let full = subsets.len() as u64 - 1;
        // States from the full premise set down to {*}.
        let states: Vec<StateVector> = subsets.iter().rev().map(|&m| name(m)).collect();
        let idx = |mask: u64| (full - mask) as usize;
        let offer = |b: &str| ActionVector::lone(1, 0, BasicAction::Offer(b.to_string()));
        let mut transitions = Vec::new();
        for &mask in subsets.iter().rev() {
            for (j, a) in premises.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    transitions.push(Transition {
                        from: idx(mask),
                        label: ActionVector::lone(1, 0, BasicAction::Request(a.clone())),
                        to: idx(mask & !(1 << j)),
                    });
                }
            }
            let conclusions: Vec<&str> = match self {
                PclClause::Conj(atoms) => atoms.iter().map(String::as_str).collect(),
                PclClause::Impl(_, b) if mask == 0 => vec![b.as_str()],
                PclClause::Impl(..) => vec![],
                PclClause::CImpl(_, b) => vec![b.as_str()],
            };
            for b in conclusions {
                transitions.push(Transition { from: idx(mask), label: offer(b), to: idx(mask) });
            }
        }
        let requests = premises.iter().cloned().collect();
        let offers = self.offers().into_iter().map(str::to_string).collect();
        ContractAutomaton::from_indexed(1, states, 0, BTreeSet::from([idx(0)]), requests, offers, transitions)
    }
}

impl fmt::Display for PclClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PclClause::Conj(atoms) => write!(f, "{}", atoms.join(" & ")),
            PclClause::Impl(p, b) if p.is_empty() => write!(f, "{b}"),
            PclClause::CImpl(p, b) if p.is_empty() => write!(f, "{b}"),
            PclClause::Impl(p, b) => write!(f, "{} -> {b}", p.join(" & ")),
            PclClause::CImpl(p, b) => write!(f, "{} -->> {b}", p.join(" & ")),
        }
    }
}

/// A conjunction of at least two clauses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PclFormula {
    clauses: Vec<PclClause>,
}

impl PclFormula {
    pub fn new(clauses: Vec<PclClause>) -> Result<Self, LogicError> {
        if clauses.len() < 2 {
            return Err(LogicError::InvalidFormula(format!(
                "a formula needs at least two clauses, found {}",
                clauses.len()
            )));
        }
        for c in &clauses {
            c.validate()?;
        }
        Ok(PclFormula { clauses })
    }

    pub fn clauses(&self) -> &[PclClause] {
        &self.clauses
    }

    /// All atoms of the formula: the conjunction every principal wants to
    /// see entailed.
    pub fn lambda(&self) -> BTreeSet<String> {
        self.clauses
            .iter()
            .flat_map(|c| c.premises().iter().map(String::as_str).chain(c.offers()))
            .map(str::to_string)
            .collect()
    }

    pub fn has_standard_implication(&self) -> bool {
        self.clauses.iter().any(|c| matches!(c, PclClause::Impl(..)))
    }

    /// The formula left after the first step `label` of its automaton: an
    /// offer changes nothing, a match discharges the matched premise of the
    /// requesting clause. `None` if `label` is neither.
    pub fn residual(&self, label: &ActionVector) -> Option<PclFormula> {
        match label.classify().ok()? {
            ActionKind::Offer { .. } => Some(self.clone()),
            ActionKind::Request { .. } => None,
            ActionKind::Match { name, requester, .. } => {
                let mut clauses = self.clauses.clone();
                match clauses.get_mut(requester)? {
                    PclClause::Impl(p, _) | PclClause::CImpl(p, _) => p.retain(|a| a != name),
                    PclClause::Conj(_) => return None,
                }
                Some(PclFormula { clauses })
            }
        }
    }
}

impl fmt::Display for PclFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.clauses.iter().map(|c| format!("({c})")).collect();
        write!(f, "{}", parts.join(" /\\ "))
    }
}

/// The product of the clause principals. It is deterministic.
pub fn translate_pcl(p: &PclFormula) -> ContractAutomaton {
    let principals: Vec<ContractAutomaton> = p.clauses.iter().map(PclClause::automaton).collect();
    let refs: Vec<&ContractAutomaton> = principals.iter().collect();
    let a = a_product(&refs).expect("clause principals have rank 1");
    assert!(a.is_deterministic(), "translation of {p} is nondeterministic");
    a
}

/// Whether `p` entails all of its atoms, decided as agreement of its
/// automaton. The witness is a trace in agreement.
pub fn pcl_entails_lambda(p: &PclFormula) -> Result<AgreementVerdict, LogicError> {
    Ok(admits_agreement(&translate_pcl(p))?)
}

/// The same question decided by weak agreement, which is only sound for
/// formulas without `->`.
pub fn pcl_weak_entails(p: &PclFormula, options: &WeakOptions) -> Result<WeakVerdict, LogicError> {
    if p.has_standard_implication() {
        return Err(LogicError::StandardImplicationPresent);
    }
    Ok(admits_weak_agreement(&translate_pcl(p), options)?)
}
