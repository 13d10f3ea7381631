//! Contract automata and their composition operators.

mod action;
mod iso;
mod ops;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

pub use action::{
    complementary, is_valid_name, ActionKind, ActionVector, BasicAction, Observed, Trace,
    RESERVED_DONE,
};
pub use iso::isomorphic;
pub use ops::{a_product, concatenate, product};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("invalid action label `{0}`")]
    InvalidLabel(String),
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate state {0}")]
    DuplicateState(String),
    #[error("transition {0} moves a principal that is idle in its label")]
    IdleMoved(String),
    #[error("action name `{0}` is not in the declared alphabet")]
    NotInAlphabet(String),
    #[error("`{0}` is not a valid action name")]
    InvalidName(String),
    #[error("principal both requests and offers `{0}`")]
    SelfComplementary(String),
    #[error("principal index {index} out of range 1..={rank}")]
    PrincipalOutOfRange { index: usize, rank: usize },
    #[error("no automata to compose")]
    EmptyComposition,
    #[error("the left operand of a concatenation must be acyclic")]
    NotAcyclic,
    #[error("operation requires a rank-1 automaton")]
    NotPrincipal,
}

/// A state of a rank-n automaton: one local state name per principal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateVector(Vec<String>);

impl StateVector {
    pub fn new(entries: Vec<String>) -> Self {
        StateVector(entries)
    }

    /// Convenience for rank-1 states.
    pub fn single(name: impl Into<String>) -> Self {
        StateVector(vec![name.into()])
    }

    pub fn from_strs(entries: &[&str]) -> Self {
        StateVector(entries.iter().map(|s| s.to_string()).collect())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[String] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &str {
        &self.0[i]
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return f.write_str(&self.0[0]);
        }
        write!(f, "({})", self.0.join(","))
    }
}

/// A transition between state indices of its automaton.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub label: ActionVector,
    pub to: usize,
}

/// An immutable contract automaton of rank `rank`.
///
/// States are stored by index; `states()[i]` is the state vector of index `i`.
#[derive(Clone, Debug)]
pub struct ContractAutomaton {
    rank: usize,
    states: Vec<StateVector>,
    index: HashMap<StateVector, usize>,
    initial: usize,
    finals: BTreeSet<usize>,
    requests: BTreeSet<String>,
    offers: BTreeSet<String>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl ContractAutomaton {
    /// Builds an automaton whose alphabets are the names occurring in its labels.
    pub fn new(
        rank: usize,
        states: Vec<StateVector>,
        initial: StateVector,
        finals: Vec<StateVector>,
        transitions: Vec<(StateVector, ActionVector, StateVector)>,
    ) -> Result<Self, AutomatonError> {
        let (requests, offers) = alphabets_of(transitions.iter().map(|t| &t.1));
        Self::with_alphabets(rank, states, initial, finals, transitions, requests, offers)
    }

    /// Builds an automaton with explicitly declared alphabets, which must
    /// contain every name used in the labels.
    pub fn with_alphabets(
        rank: usize,
        states: Vec<StateVector>,
        initial: StateVector,
        finals: Vec<StateVector>,
        transitions: Vec<(StateVector, ActionVector, StateVector)>,
        requests: BTreeSet<String>,
        offers: BTreeSet<String>,
    ) -> Result<Self, AutomatonError> {
        if rank == 0 {
            return Err(AutomatonError::ZeroRank);
        }
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            if s.rank() != rank {
                return Err(AutomatonError::RankMismatch { expected: rank, found: s.rank() });
            }
            if index.insert(s.clone(), i).is_some() {
                return Err(AutomatonError::DuplicateState(s.to_string()));
            }
        }
        let lookup = |s: &StateVector| {
            index.get(s).copied().ok_or_else(|| AutomatonError::UnknownState(s.to_string()))
        };
        let initial = lookup(&initial)?;
        let finals = finals.iter().map(lookup).collect::<Result<BTreeSet<_>, _>>()?;
        let mut indexed = Vec::with_capacity(transitions.len());
        for (from, label, to) in &transitions {
            indexed.push(Transition { from: lookup(from)?, label: label.clone(), to: lookup(to)? });
        }
        for name in requests.iter().chain(offers.iter()) {
            if !is_valid_name(name) || name == RESERVED_DONE {
                return Err(AutomatonError::InvalidName(name.clone()));
            }
        }
        let a = Self::assemble(rank, states, index, initial, finals, requests, offers, indexed);
        a.validate()?;
        Ok(a)
    }

    /// Builds a principal from `(source, label, target)` triples, e.g.
    /// `("q0", "?sig", "q1")`. States are listed in order of first appearance.
    pub fn principal(
        initial: &str,
        finals: &[&str],
        transitions: &[(&str, &str, &str)],
    ) -> Result<Self, AutomatonError> {
        let mut names: Vec<&str> = vec![initial];
        for (s, _, t) in transitions {
            names.push(s);
            names.push(t);
        }
        names.extend_from_slice(finals);
        let mut seen = BTreeSet::new();
        names.retain(|n| seen.insert(*n));
        let ts = transitions
            .iter()
            .map(|(s, l, t)| Ok((StateVector::single(*s), l.parse()?, StateVector::single(*t))))
            .collect::<Result<Vec<_>, AutomatonError>>()?;
        Self::new(
            1,
            names.iter().map(|n| StateVector::single(*n)).collect(),
            StateVector::single(initial),
            finals.iter().map(|n| StateVector::single(*n)).collect(),
            ts,
        )
    }

    /// Index-based constructor used by the operators, which maintain the
    /// invariants themselves.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_indexed(
        rank: usize,
        states: Vec<StateVector>,
        initial: usize,
        finals: BTreeSet<usize>,
        requests: BTreeSet<String>,
        offers: BTreeSet<String>,
        transitions: Vec<Transition>,
    ) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let a = Self::assemble(rank, states, index, initial, finals, requests, offers, transitions);
        debug_assert_eq!(a.validate(), Ok(()));
        a
    }

    /// Like `from_indexed` but without any invariant check; used for the
    /// normalized automata whose fresh final state moves every coordinate.
    pub(crate) fn from_indexed_unchecked(
        rank: usize,
        states: Vec<StateVector>,
        initial: usize,
        finals: BTreeSet<usize>,
        requests: BTreeSet<String>,
        offers: BTreeSet<String>,
        transitions: Vec<Transition>,
    ) -> Self {
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Self::assemble(rank, states, index, initial, finals, requests, offers, transitions)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        rank: usize,
        states: Vec<StateVector>,
        index: HashMap<StateVector, usize>,
        initial: usize,
        finals: BTreeSet<usize>,
        requests: BTreeSet<String>,
        offers: BTreeSet<String>,
        transitions: Vec<Transition>,
    ) -> Self {
        let mut seen = BTreeSet::new();
        let transitions: Vec<Transition> =
            transitions.into_iter().filter(|t| seen.insert(t.clone())).collect();
        let mut outgoing = vec![Vec::new(); states.len()];
        let mut incoming = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.from].push(i);
            incoming[t.to].push(i);
        }
        ContractAutomaton {
            rank,
            states,
            index,
            initial,
            finals,
            requests,
            offers,
            transitions,
            outgoing,
            incoming,
        }
    }

    fn validate(&self) -> Result<(), AutomatonError> {
        for t in &self.transitions {
            if t.label.rank() != self.rank {
                return Err(AutomatonError::RankMismatch {
                    expected: self.rank,
                    found: t.label.rank(),
                });
            }
            t.label.classify()?;
            let (src, dst) = (&self.states[t.from], &self.states[t.to]);
            for (i, a) in t.label.entries().iter().enumerate() {
                match a {
                    BasicAction::Idle if src.get(i) != dst.get(i) => {
                        return Err(AutomatonError::IdleMoved(self.describe(t)));
                    }
                    BasicAction::Request(n) if !self.requests.contains(n) => {
                        return Err(AutomatonError::NotInAlphabet(n.clone()));
                    }
                    BasicAction::Offer(n) if !self.offers.contains(n) => {
                        return Err(AutomatonError::NotInAlphabet(n.clone()));
                    }
                    _ => {}
                }
            }
        }
        if self.rank == 1 {
            if let Some(n) = self.requests.intersection(&self.offers).next() {
                return Err(AutomatonError::SelfComplementary(n.clone()));
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &StateVector {
        &self.states[i]
    }

    pub fn state_index(&self, s: &StateVector) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals.contains(&q)
    }

    pub fn requests(&self) -> &BTreeSet<String> {
        &self.requests
    }

    pub fn offers(&self) -> &BTreeSet<String> {
        &self.offers
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Indices of the transitions leaving state `q`.
    pub fn outgoing(&self, q: usize) -> &[usize] {
        &self.outgoing[q]
    }

    /// Indices of the transitions entering state `q`.
    pub fn incoming(&self, q: usize) -> &[usize] {
        &self.incoming[q]
    }

    /// Human-readable rendering of a transition.
    pub fn describe(&self, t: &Transition) -> String {
        format!("{} -{}-> {}", self.states[t.from], t.label, self.states[t.to])
    }

    pub fn is_principal(&self) -> bool {
        self.rank == 1 && self.requests.is_disjoint(&self.offers)
    }

    pub fn is_deterministic(&self) -> bool {
        self.outgoing.iter().all(|out| {
            let mut labels = BTreeSet::new();
            out.iter().all(|&t| labels.insert(&self.transitions[t].label))
        })
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            for &t in &self.outgoing[q] {
                let r = self.transitions[t].to;
                if !seen[r] {
                    seen[r] = true;
                    queue.push_back(r);
                }
            }
        }
        seen
    }

    /// States from which some state of `targets` is reachable.
    pub fn coreachable_to(&self, targets: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::new();
        for q in targets {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &t in &self.incoming[q] {
                let p = self.transitions[t].from;
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// States from which a final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        self.coreachable_to(self.finals.iter().copied())
    }

    pub fn language_is_empty(&self) -> bool {
        !self.coreachable()[self.initial]
    }

    /// The same automaton started in state `q`.
    pub fn with_initial(&self, q: usize) -> ContractAutomaton {
        let mut a = self.clone();
        a.initial = q;
        a
    }

    /// Removes the states that are unreachable from the initial state.
    pub fn trim(&self) -> ContractAutomaton {
        self.restrict(&self.reachable())
    }

    /// Keeps only the states that are both reachable and co-reachable; the
    /// initial state is always kept.
    pub fn prune(&self) -> ContractAutomaton {
        let reach = self.reachable();
        let co = self.coreachable();
        let mut keep: Vec<bool> = reach.iter().zip(&co).map(|(a, b)| *a && *b).collect();
        keep[self.initial] = true;
        self.restrict(&keep)
    }

    /// The sub-automaton induced by the states flagged in `keep` (which must
    /// include the initial state). Alphabets are preserved.
    pub(crate) fn restrict(&self, keep: &[bool]) -> ContractAutomaton {
        assert!(keep[self.initial]);
        let mut remap = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            if keep[i] {
                remap[i] = states.len();
                states.push(s.clone());
            }
        }
        let transitions = self
            .transitions
            .iter()
            .filter(|t| keep[t.from] && keep[t.to])
            .map(|t| Transition { from: remap[t.from], label: t.label.clone(), to: remap[t.to] })
            .collect();
        let finals = self.finals.iter().filter(|&&f| keep[f]).map(|&f| remap[f]).collect();
        ContractAutomaton::from_indexed_unchecked(
            self.rank,
            states,
            remap[self.initial],
            finals,
            self.requests.clone(),
            self.offers.clone(),
            transitions,
        )
    }

    /// The same automaton without the transitions rejected by `keep`.
    pub(crate) fn filter_transitions(&self, keep: impl Fn(&Transition) -> bool) -> Self {
        ContractAutomaton::from_indexed_unchecked(
            self.rank,
            self.states.clone(),
            self.initial,
            self.finals.clone(),
            self.requests.clone(),
            self.offers.clone(),
            self.transitions.iter().filter(|t| keep(t)).cloned().collect(),
        )
    }

    /// True iff the trace is accepted. Errors when ranks differ.
    pub fn accepts(&self, w: &Trace) -> Result<bool, AutomatonError> {
        if w.rank() != self.rank {
            return Err(AutomatonError::RankMismatch { expected: self.rank, found: w.rank() });
        }
        let mut current = BTreeSet::from([self.initial]);
        for a in w.actions() {
            current = current
                .iter()
                .flat_map(|&q| self.outgoing[q].iter())
                .map(|&t| &self.transitions[t])
                .filter(|t| &t.label == a)
                .map(|t| t.to)
                .collect();
            if current.is_empty() {
                return Ok(false);
            }
        }
        Ok(current.iter().any(|q| self.finals.contains(q)))
    }

    /// All distinct accepted traces of length at most `max_len`, in the order
    /// their first run is found by a depth-first search that follows
    /// transitions by ascending index.
    pub fn enumerate_traces(&self, max_len: usize) -> Vec<Trace> {
        let co = self.coreachable();
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut path = Vec::new();
        self.enumerate_from(self.initial, max_len, &co, &mut path, &mut seen, &mut out);
        out
    }

    fn enumerate_from(
        &self,
        q: usize,
        budget: usize,
        co: &[bool],
        path: &mut Vec<ActionVector>,
        seen: &mut std::collections::HashSet<Vec<ActionVector>>,
        out: &mut Vec<Trace>,
    ) {
        if !co[q] {
            return;
        }
        if self.finals.contains(&q) && seen.insert(path.clone()) {
            out.push(Trace::from_parts(self.rank, path.clone()));
        }
        if budget == 0 {
            return;
        }
        for &t in &self.outgoing[q] {
            let t = &self.transitions[t];
            path.push(t.label.clone());
            self.enumerate_from(t.to, budget - 1, co, path, seen, out);
            path.pop();
        }
    }

    /// A shortest accepted trace, if the language is nonempty.
    pub fn shortest_accepted(&self) -> Option<Trace> {
        self.shortest_path_to(|q| self.finals.contains(&q))
    }

    /// Labels of a shortest path from the initial state to a state
    /// satisfying `goal`, using lowest transition indices on ties.
    pub fn shortest_path_to(&self, goal: impl Fn(usize) -> bool) -> Option<Trace> {
        let path = self.shortest_path(self.initial, goal)?;
        Some(self.labels_of(&path))
    }

    /// Transition indices of a shortest path from `from` to a state
    /// satisfying `goal`.
    pub fn shortest_path(&self, from: usize, goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let mut parent: Vec<Option<usize>> = vec![None; self.states.len()];
        let mut seen = vec![false; self.states.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            if goal(q) {
                let mut path = Vec::new();
                let mut cur = q;
                while let Some(t) = parent[cur] {
                    path.push(t);
                    cur = self.transitions[t].from;
                }
                path.reverse();
                return Some(path);
            }
            for &t in &self.outgoing[q] {
                let r = self.transitions[t].to;
                if !seen[r] {
                    seen[r] = true;
                    parent[r] = Some(t);
                    queue.push_back(r);
                }
            }
        }
        None
    }

    /// The trace spelled by a sequence of transition indices.
    pub fn labels_of(&self, path: &[usize]) -> Trace {
        Trace::from_parts(self.rank, path.iter().map(|&t| self.transitions[t].label.clone()).collect())
    }

    /// The `i`-th principal (1-based) of this automaton.
    pub fn projection(&self, i: usize) -> Result<ContractAutomaton, AutomatonError> {
        ops::projection(self, i)
    }

    /// Subset construction for rank-1 automata; only reachable subsets are
    /// built. Subset states are named `{a|b|...}` after their members.
    pub fn determinize(&self) -> Result<ContractAutomaton, AutomatonError> {
        ops::determinize(self)
    }

    /// Whether the transition graph has a cycle.
    pub fn has_cycle(&self) -> bool {
        // Kahn's algorithm: a cycle remains iff not every state gets removed.
        let mut indeg: Vec<usize> = self.incoming.iter().map(Vec::len).collect();
        let mut queue: VecDeque<usize> = (0..self.states.len()).filter(|&q| indeg[q] == 0).collect();
        let mut removed = 0;
        while let Some(q) = queue.pop_front() {
            removed += 1;
            for &t in &self.outgoing[q] {
                let r = self.transitions[t].to;
                indeg[r] -= 1;
                if indeg[r] == 0 {
                    queue.push_back(r);
                }
            }
        }
        removed < self.states.len()
    }
}

/// The request and offer names occurring in a set of labels.
pub(crate) fn alphabets_of<'a>(
    labels: impl Iterator<Item = &'a ActionVector>,
) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut requests = BTreeSet::new();
    let mut offers = BTreeSet::new();
    for label in labels {
        for a in label.entries() {
            match a {
                BasicAction::Request(n) => {
                    requests.insert(n.clone());
                }
                BasicAction::Offer(n) => {
                    offers.insert(n.clone());
                }
                BasicAction::Idle => {}
            }
        }
    }
    (requests, offers)
}

impl fmt::Display for ContractAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {} initial {}", self.rank, self.states[self.initial])?;
        let finals: Vec<String> = self.finals.iter().map(|&q| self.states[q].to_string()).collect();
        writeln!(f, "finals {{{}}}", finals.join(", "))?;
        for t in &self.transitions {
            writeln!(f, "  {}", self.describe(t))?;
        }
        Ok(())
    }
}
