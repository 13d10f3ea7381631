//! Weak agreement: requests may be satisfied by offers made later on.
//!
//! A trace is in weak agreement when its lone requests can be matched
//! injectively with lone offers of the same names, wherever they occur.
//! Weak safety and weak agreement of an automaton are decided by integer
//! programs over the transition flows of its runs.

mod flow;
mod liability;

use std::collections::BTreeSet;

use crate::automaton::{
    ActionKind, ActionVector, AutomatonError, BasicAction, ContractAutomaton, StateVector, Trace,
    Transition, RESERVED_DONE,
};
use crate::milp::{MilpOptions, MilpOutcome, Rational, Relation, Sense, VarKind};

pub use flow::{coefficient, flow_to_trace, Connectivity, FlowSystem};
pub use liability::{weakly_liable, FlaggedTransition, WeakLiability};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WeakError {
    #[error("the automaton accepts no trace")]
    EmptyLanguage,
    #[error("solver node budget exhausted after {nodes} nodes")]
    CapExceeded { nodes: u64 },
    #[error("infeasible flow: {0}")]
    InfeasibleFlow(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Whether the lone requests of `w` can be matched injectively with lone
/// offers of the same name, in any order.
///
/// Each request scans the trace for an offer of its name not yet used by
/// another request and marks it; the trace fails as soon as a request finds
/// none.
pub fn in_weak_agreement(w: &Trace) -> bool {
    let obs: Vec<(bool, &str)> = w
        .actions()
        .iter()
        .filter_map(|a| match a.kind() {
            ActionKind::Request { name, .. } => Some((true, name)),
            ActionKind::Offer { name, .. } => Some((false, name)),
            ActionKind::Match { .. } => None,
        })
        .collect();
    let mut marked = vec![false; obs.len()];
    for &(is_request, name) in &obs {
        if !is_request {
            continue;
        }
        match obs.iter().enumerate().position(|(j, &(r, n))| !r && n == name && !marked[j]) {
            Some(j) => marked[j] = true,
            None => return false,
        }
    }
    true
}

/// An automaton with a single final state that has no outgoing transition
/// and differs from the initial state.
#[derive(Clone, Debug)]
pub struct Normalized {
    pub automaton: ContractAutomaton,
    /// Indices of the transitions added to reach the fresh final state.
    pub dummy: BTreeSet<usize>,
}

impl Normalized {
    pub fn final_state(&self) -> usize {
        *self.automaton.finals().iter().next().expect("one final state")
    }

    pub fn is_dummy(&self, t: usize) -> bool {
        self.dummy.contains(&t)
    }

    /// The trace with the closing dummy step removed.
    pub fn strip(&self, w: &Trace) -> Trace {
        let actions: Vec<ActionVector> = w
            .actions()
            .iter()
            .filter(|a| a.entries().iter().all(|b| b.name() != Some(RESERVED_DONE)))
            .cloned()
            .collect();
        Trace::new(w.rank(), actions).expect("labels of a valid trace")
    }
}

/// Restricts to states that are reachable and co-reachable and, unless the
/// result already has a unique sink final state distinct from the initial
/// one, adds a fresh final state entered from every old final state by an
/// offer of the reserved name `__done` made by the first principal.
///
/// The fresh state has every coordinate set to `__done`, so the added
/// transitions move principals that are idle in their label; the result is
/// only meant for the flow-based deciders.
pub fn normalize(a: &ContractAutomaton) -> Result<Normalized, WeakError> {
    if a.language_is_empty() {
        return Err(WeakError::EmptyLanguage);
    }
    let p = a.prune();
    let single_sink = p.finals().len() == 1 && {
        let f = *p.finals().iter().next().unwrap();
        f != p.initial() && p.outgoing(f).is_empty()
    };
    if single_sink {
        return Ok(Normalized { automaton: p, dummy: BTreeSet::new() });
    }
    let rank = p.rank();
    let fresh = p.states().len();
    let mut states = p.states().to_vec();
    states.push(StateVector::new(vec![RESERVED_DONE.to_string(); rank]));
    let mut transitions = p.transitions().to_vec();
    let done = ActionVector::lone(rank, 0, BasicAction::Offer(RESERVED_DONE.to_string()));
    let mut dummy = BTreeSet::new();
    for &f in p.finals() {
        dummy.insert(transitions.len());
        transitions.push(Transition { from: f, label: done.clone(), to: fresh });
    }
    let mut offers = p.offers().clone();
    offers.insert(RESERVED_DONE.to_string());
    let automaton = ContractAutomaton::from_indexed_unchecked(
        rank,
        states,
        p.initial(),
        BTreeSet::from([fresh]),
        p.requests().clone(),
        offers,
        transitions,
    );
    Ok(Normalized { automaton, dummy })
}

/// Options of the flow-based deciders.
#[derive(Clone, Debug, Default)]
pub struct WeakOptions {
    /// Maximum number of times a run may take each transition. Defaults to
    /// the number of states plus twice the number of requested names of the
    /// normalized automaton.
    pub cap: Option<u64>,
    pub milp: MilpOptions,
    pub connectivity: Connectivity,
}

impl WeakOptions {
    pub fn with_cap(cap: u64) -> Self {
        WeakOptions { cap: Some(cap), ..Default::default() }
    }

    pub(crate) fn cap_for(&self, n: &Normalized) -> u64 {
        self.cap.unwrap_or_else(|| {
            (n.automaton.states().len() + 2 * balance_names(&n.automaton).len()) as u64
        })
    }
}

/// The names whose balance matters: the requested ones.
pub fn balance_names(a: &ContractAutomaton) -> Vec<String> {
    a.requests().iter().filter(|n| n.as_str() != RESERVED_DONE).cloned().collect()
}

/// One transition of a witness flow and the number of times it is taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowEntry {
    pub from: StateVector,
    pub label: ActionVector,
    pub to: StateVector,
    pub count: u64,
}

#[derive(Clone, Debug)]
pub struct WeakVerdict {
    pub holds: bool,
    /// For weak safety the least balance over all runs and names; for weak
    /// agreement the largest least balance a run can achieve.
    pub gamma: Rational,
    /// The name attaining the least balance, for weak safety.
    pub name: Option<String>,
    /// The transitions with nonzero flow in the optimal run.
    pub witness_flow: Vec<FlowEntry>,
    /// A trace of the original automaton realising the optimal run.
    pub witness_trace: Trace,
    pub cap: u64,
}

fn solve(
    sys: &mut FlowSystem,
    model: &crate::milp::MilpModel,
    options: &WeakOptions,
) -> Result<Option<(Rational, Vec<Rational>)>, WeakError> {
    match sys.solve(model, &options.milp) {
        MilpOutcome::Optimal { value, x, .. } => Ok(Some((value, x))),
        MilpOutcome::Infeasible => Ok(None),
        MilpOutcome::CapExceeded { nodes } => Err(WeakError::CapExceeded { nodes }),
        MilpOutcome::Unbounded => unreachable!("flow variables are bounded by the cap"),
    }
}

fn verdict(
    n: &Normalized,
    sys: &FlowSystem,
    holds: bool,
    gamma: Rational,
    name: Option<String>,
    x: &[Rational],
) -> Result<WeakVerdict, WeakError> {
    let a = &n.automaton;
    let flow = sys.flow_of(x);
    let trace = flow_to_trace(a, &flow, a.initial(), n.final_state())?;
    let witness_flow = a
        .transitions()
        .iter()
        .zip(&flow)
        .filter(|(_, &c)| c > 0)
        .map(|(t, &count)| FlowEntry {
            from: a.state(t.from).clone(),
            label: t.label.clone(),
            to: a.state(t.to).clone(),
            count,
        })
        .collect();
    Ok(WeakVerdict {
        holds,
        gamma,
        name,
        witness_flow,
        witness_trace: n.strip(&trace),
        cap: sys.cap(),
    })
}

/// Whether every accepted run (with each transition taken at most `cap`
/// times) is in weak agreement. Minimises the balance of each requested
/// name separately.
pub fn is_weakly_safe(a: &ContractAutomaton, options: &WeakOptions) -> Result<WeakVerdict, WeakError> {
    let n = normalize(a)?;
    let cap = options.cap_for(&n);
    let mut sys = FlowSystem::with_connectivity(
        &n.automaton,
        n.automaton.initial(),
        n.final_state(),
        cap,
        options.connectivity,
    );
    let names = balance_names(&n.automaton);
    let mut best: Option<(Rational, Option<String>, Vec<Rational>)> = None;
    if names.is_empty() {
        let model = sys.model.clone();
        let (_, x) = solve(&mut sys, &model, options)?.ok_or(WeakError::EmptyLanguage)?;
        best = Some((Rational::zero(), None, x));
    }
    for name in &names {
        let mut model = sys.model.clone();
        model.set_objective(Sense::Minimize, sys.balance_terms(&n.automaton, name));
        model.set_integral_objective(true);
        let (value, x) = solve(&mut sys, &model, options)?.ok_or(WeakError::EmptyLanguage)?;
        if best.as_ref().map_or(true, |(b, _, _)| value < *b) {
            best = Some((value, Some(name.clone()), x));
        }
    }
    let (gamma, name, x) = best.expect("at least one program solved");
    let holds = !gamma.is_negative();
    verdict(&n, &sys, holds, gamma, name, &x)
}

/// Whether some accepted run (with each transition taken at most `cap`
/// times) is in weak agreement. Maximises the least balance over all
/// requested names.
pub fn admits_weak_agreement(
    a: &ContractAutomaton,
    options: &WeakOptions,
) -> Result<WeakVerdict, WeakError> {
    let n = normalize(a)?;
    let cap = options.cap_for(&n);
    let mut sys = FlowSystem::with_connectivity(
        &n.automaton,
        n.automaton.initial(),
        n.final_state(),
        cap,
        options.connectivity,
    );
    let names = balance_names(&n.automaton);
    if names.is_empty() {
        let model = sys.model.clone();
        let (_, x) = solve(&mut sys, &model, options)?.ok_or(WeakError::EmptyLanguage)?;
        return verdict(&n, &sys, true, Rational::zero(), None, &x);
    }
    let mut model = sys.model.clone();
    let gamma = model.add_var("gamma", VarKind::Continuous, None, None);
    for name in &names {
        let mut terms = sys.balance_terms(&n.automaton, name);
        terms.push((gamma, Rational::from_integer(-1)));
        model.add_constraint(format!("min_{name}"), terms, Relation::Ge, Rational::zero());
    }
    model.set_objective(Sense::Maximize, vec![(gamma, Rational::one())]);
    model.set_integral_objective(true);
    let (value, x) = solve(&mut sys, &model, options)?.ok_or(WeakError::EmptyLanguage)?;
    let holds = !value.is_negative();
    verdict(&n, &sys, holds, value, None, &x)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::automaton::product;

    pub fn client() -> ContractAutomaton {
        ContractAutomaton::principal(
            "q0",
            &["q5"],
            &[
                ("q0", "?r", "q1"),
                ("q1", "?b", "q2"),
                ("q2", "?c", "q3"),
                ("q2", "?t", "q4"),
                ("q3", "!e", "q5"),
                ("q4", "!e", "q5"),
            ],
        )
        .unwrap()
    }

    pub fn hotel() -> ContractAutomaton {
        ContractAutomaton::principal(
            "q0",
            &["q4"],
            &[("q0", "!r", "q1"), ("q1", "!t", "q2"), ("q2", "!b", "q3"), ("q3", "?e", "q4")],
        )
        .unwrap()
    }

    pub fn booking() -> ContractAutomaton {
        product(&[&hotel(), &client()]).unwrap()
    }

    /// The booking service proper: the part of the product of the hotel and
    /// the client without the early lone moves on `e`.
    pub fn booking_service() -> ContractAutomaton {
        let s = |h: &str, c: &str| StateVector::from_strs(&[h, c]);
        let q = [
            s("q0", "q0"),
            s("q1", "q1"),
            s("q1", "q2"),
            s("q2", "q4"),
            s("q3", "q4"),
            s("q1", "q3"),
            s("q2", "q3"),
            s("q2", "q1"),
            s("q3", "q2"),
            s("q3", "q3"),
            s("q4", "q5"),
        ];
        let edges = [
            (0, "(!r,?r)", 1),
            (1, "(-,?b)", 2),
            (1, "(!t,-)", 7),
            (2, "(!t,?t)", 3),
            (2, "(-,?c)", 5),
            (3, "(!b,-)", 4),
            (4, "(?e,!e)", 10),
            (5, "(!t,-)", 6),
            (6, "(!b,-)", 9),
            (7, "(!b,?b)", 8),
            (8, "(-,?c)", 9),
            (8, "(-,?t)", 4),
            (9, "(?e,!e)", 10),
        ];
        ContractAutomaton::new(
            2,
            q.to_vec(),
            q[0].clone(),
            vec![q[10].clone()],
            edges.iter().map(|(f, l, t)| (q[*f].clone(), l.parse().unwrap(), q[*t].clone())).collect(),
        )
        .unwrap()
    }

    fn w(rank: usize, s: &str) -> Trace {
        Trace::parse(rank, s).unwrap()
    }

    #[test]
    fn weak_membership() {
        assert!(in_weak_agreement(&w(2, "(?a,-)(-,!a)")));
        assert!(in_weak_agreement(&w(2, "(-,!a)(?a,-)")));
        assert!(!in_weak_agreement(&w(2, "(?a,-)(?a,-)(-,!a)")));
        assert!(in_weak_agreement(&w(2, "(?a,!a)")));
        assert!(in_weak_agreement(&Trace::empty(2)));
        assert!(!in_weak_agreement(&w(2, "(?a,-)(-,!b)")));
    }

    #[test]
    fn normalization() {
        let n = normalize(&booking()).unwrap();
        assert!(n.dummy.is_empty());
        let n = normalize(&booking_service()).unwrap();
        assert!(n.dummy.is_empty());
        let a1 = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!res", "q0"), ("q0", "?sig", "q1")])
            .unwrap();
        let a2 = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!sig", "q1"), ("q1", "?res", "q1")])
            .unwrap();
        let a3 = product(&[&a1, &a2]).unwrap();
        let n = normalize(&a3).unwrap();
        assert_eq!(n.dummy.len(), 1);
        let f = n.final_state();
        assert!(n.automaton.outgoing(f).is_empty());
        assert_ne!(f, n.automaton.initial());
        let empty = ContractAutomaton::principal("q0", &["q9"], &[("q0", "!a", "q1")]).unwrap();
        assert!(matches!(normalize(&empty), Err(WeakError::EmptyLanguage)));
    }

    #[test]
    fn hotel_booking() {
        let a = booking_service();
        let n = normalize(&a).unwrap();
        assert!(n.dummy.is_empty());
        assert_eq!(n.automaton.states().len(), 11);
        let s = is_weakly_safe(&a, &WeakOptions::default()).unwrap();
        assert!(!s.holds);
        assert_eq!(s.gamma, Rational::from_integer(-1));
        assert_eq!(s.name.as_deref(), Some("c"));
        assert!(a.accepts(&s.witness_trace).unwrap());
        assert!(!in_weak_agreement(&s.witness_trace));

        let g = admits_weak_agreement(&a, &WeakOptions::default()).unwrap();
        assert!(g.holds);
        assert_eq!(g.gamma, Rational::zero());
        assert!(a.accepts(&g.witness_trace).unwrap());
        assert!(in_weak_agreement(&g.witness_trace));
        // The agreeing run chooses the t branch.
        assert!(g.witness_trace.to_string().contains("?t"));
    }

    #[test]
    fn crossed_requests_are_weakly_safe() {
        let alice = ContractAutomaton::principal("q0", &["q2"], &[("q0", "?bike", "q1"), ("q1", "!airplane", "q2")])
            .unwrap();
        let bob = ContractAutomaton::principal("q0", &["q2"], &[("q0", "?airplane", "q1"), ("q1", "!bike", "q2")])
            .unwrap();
        let a = product(&[&alice, &bob]).unwrap();
        assert_eq!(a.trim().enumerate_traces(10).len(), 2);
        assert!(is_weakly_safe(&a, &WeakOptions::default()).unwrap().holds);
        assert!(admits_weak_agreement(&a, &WeakOptions::default()).unwrap().holds);
    }

    #[test]
    fn empty_language_is_reported() {
        let a = ContractAutomaton::principal("q0", &["q9"], &[("q0", "!a", "q1")]).unwrap();
        assert!(matches!(is_weakly_safe(&a, &WeakOptions::default()), Err(WeakError::EmptyLanguage)));
        assert!(matches!(admits_weak_agreement(&a, &WeakOptions::default()), Err(WeakError::EmptyLanguage)));
    }
}
