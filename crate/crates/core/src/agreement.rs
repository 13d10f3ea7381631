//! Agreement, safety, the most permissive controller and liability.

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{
    ActionVector, AutomatonError, ContractAutomaton, StateVector, Trace, Transition,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgreementError {
    #[error("agreement needs at least two principals, got rank {0}")]
    RankTooSmall(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

fn check_rank(rank: usize) -> Result<(), AgreementError> {
    if rank <= 1 {
        return Err(AgreementError::RankTooSmall(rank));
    }
    Ok(())
}

/// A trace is in agreement when it contains no lone request.
pub fn in_agreement(w: &Trace) -> Result<bool, AgreementError> {
    check_rank(w.rank())?;
    Ok(w.actions().iter().all(|a| !a.is_request()))
}

/// States from which no final state can be reached.
pub fn hanged_states(a: &ContractAutomaton) -> BTreeSet<usize> {
    let co = a.coreachable();
    (0..a.states().len()).filter(|&q| !co[q]).collect()
}

/// The most permissive controller together with the data of its synthesis.
#[derive(Clone, Debug)]
pub struct MpcResult {
    /// The controller. When no agreement is possible it consists of the
    /// initial state alone, with no transitions, so its language is empty.
    pub controller: ContractAutomaton,
    /// States hanged once the request transitions are removed.
    pub hanged: BTreeSet<StateVector>,
    /// The request transitions of the original automaton.
    pub removed_requests: Vec<(StateVector, ActionVector, StateVector)>,
}

impl MpcResult {
    pub fn is_empty(&self) -> bool {
        self.controller.language_is_empty()
    }
}

/// Drops every request transition, then every state that can no longer
/// reach a final state.
pub fn mpc(a: &ContractAutomaton) -> MpcResult {
    let removed_requests = a
        .transitions()
        .iter()
        .filter(|t| t.label.is_request())
        .map(|t| (a.state(t.from).clone(), t.label.clone(), a.state(t.to).clone()))
        .collect();
    let k1 = a.filter_transitions(|t| !t.label.is_request());
    let hanged = hanged_states(&k1);
    let mut keep: Vec<bool> = (0..a.states().len()).map(|q| !hanged.contains(&q)).collect();
    keep[a.initial()] = true;
    let controller = k1.restrict(&keep);
    MpcResult {
        controller,
        hanged: hanged.iter().map(|&q| a.state(q).clone()).collect(),
        removed_requests,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreementVerdict {
    pub holds: bool,
    /// A shortest trace of the controller, when one exists.
    pub witness: Option<Trace>,
}

/// Whether some accepted trace is in agreement.
pub fn admits_agreement(a: &ContractAutomaton) -> Result<AgreementVerdict, AgreementError> {
    check_rank(a.rank())?;
    let witness = mpc(a).controller.shortest_accepted();
    Ok(AgreementVerdict { holds: witness.is_some(), witness })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyVerdict {
    pub holds: bool,
    /// An accepted trace containing a lone request, when unsafe.
    pub counterexample: Option<Trace>,
}

/// Whether every accepted trace is in agreement, i.e. no request
/// transition lies on an accepting run.
pub fn is_safe(a: &ContractAutomaton) -> Result<SafetyVerdict, AgreementError> {
    check_rank(a.rank())?;
    let reach = a.reachable();
    let co = a.coreachable();
    for (i, t) in a.transitions().iter().enumerate() {
        if t.label.is_request() && reach[t.from] && co[t.to] {
            let mut path = a.shortest_path(a.initial(), |q| q == t.from).expect("reachable");
            path.push(i);
            path.extend(a.shortest_path(t.to, |q| a.is_final(q)).expect("co-reachable"));
            return Ok(SafetyVerdict { holds: false, counterexample: Some(a.labels_of(&path)) });
        }
    }
    Ok(SafetyVerdict { holds: true, counterexample: None })
}

/// Why a principal is liable: a controller run reaching a state from which
/// the automaton can take a step that the controller forbids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiabilityWitness {
    pub prefix: Trace,
    pub state: StateVector,
    pub action: ActionVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Liability {
    /// 1-based indices of the liable principals.
    pub principals: BTreeSet<usize>,
    /// One witness per liable principal: the first offending step found.
    pub witnesses: BTreeMap<usize, LiabilityWitness>,
}

/// The principals moving in a transition that leaves the controller from a
/// state the controller can reach. The initial state always counts as
/// reachable, even when the controller is empty.
pub fn liable(a: &ContractAutomaton) -> Result<Liability, AgreementError> {
    check_rank(a.rank())?;
    let k = mpc(a).controller;
    let reach = k.reachable();
    let in_k: BTreeSet<(&StateVector, &ActionVector, &StateVector)> =
        k.transitions().iter().map(|t| (k.state(t.from), &t.label, k.state(t.to))).collect();
    let mut principals = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    for t in a.transitions() {
        let from = a.state(t.from);
        let Some(kq) = k.state_index(from) else { continue };
        if !reach[kq] || in_k.contains(&(from, &t.label, a.state(t.to))) {
            continue;
        }
        for i in t.label.movers() {
            principals.insert(i + 1);
            witnesses.entry(i + 1).or_insert_with(|| LiabilityWitness {
                prefix: k.shortest_path_to(|q| q == kq).expect("reachable"),
                state: from.clone(),
                action: t.label.clone(),
            });
        }
    }
    Ok(Liability { principals, witnesses })
}

/// Alternative reading of liability: principals moving in a transition that
/// leaves the controller's state set, ignoring reachability.
pub fn liable_exiting(a: &ContractAutomaton) -> Result<BTreeSet<usize>, AgreementError> {
    check_rank(a.rank())?;
    let result = mpc(a);
    let inside = |q: usize| !result.hanged.contains(a.state(q));
    Ok(a.transitions()
        .iter()
        .filter(|t: &&Transition| inside(t.from) && !inside(t.to))
        .flat_map(|t| t.label.movers().map(|i| i + 1))
        .collect())
}

/// Both operands offer some name that one of them requests.
pub fn competitive(a1: &ContractAutomaton, a2: &ContractAutomaton) -> bool {
    let requested: BTreeSet<&String> = a1.requests().union(a2.requests()).collect();
    a1.offers().intersection(a2.offers()).any(|n| requested.contains(n))
}

/// One operand offers something the other requests.
pub fn collaborative(a1: &ContractAutomaton, a2: &ContractAutomaton) -> bool {
    !a1.offers().is_disjoint(a2.requests()) || !a1.requests().is_disjoint(a2.offers())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::automaton::{isomorphic, product};

    pub fn ann() -> ContractAutomaton {
        ContractAutomaton::principal(
            "q0",
            &["q2", "q5"],
            &[
                ("q0", "?init", "q1"),
                ("q1", "!pen", "q4"),
                ("q4", "?cancel", "q0"),
                ("q4", "!pay", "q5"),
                ("q1", "!book", "q2"),
            ],
        )
        .unwrap()
    }

    pub fn bart() -> ContractAutomaton {
        ContractAutomaton::principal(
            "q0",
            &["q3", "q5"],
            &[
                ("q0", "!init", "q1"),
                ("q1", "?book", "q2"),
                ("q2", "?pay", "q3"),
                ("q1", "?pen", "q4"),
                ("q4", "!cancel", "q0"),
                ("q4", "?pay", "q5"),
            ],
        )
        .unwrap()
    }

    fn res_sig_composite() -> ContractAutomaton {
        let a1 = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!res", "q0"), ("q0", "?sig", "q1")])
            .unwrap();
        let a2 = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!sig", "q1"), ("q1", "?res", "q1")])
            .unwrap();
        product(&[&a1, &a2]).unwrap()
    }

    fn sv(a: &str, b: &str) -> StateVector {
        StateVector::from_strs(&[a, b])
    }

    #[test]
    fn trace_membership() {
        assert!(in_agreement(&Trace::parse(2, "(!res,-)(?sig,!sig)").unwrap()).unwrap());
        assert!(!in_agreement(&Trace::parse(2, "(?sig,!sig)(-,?res)").unwrap()).unwrap());
        assert!(in_agreement(&Trace::empty(3)).unwrap());
        assert_eq!(in_agreement(&Trace::empty(1)), Err(AgreementError::RankTooSmall(1)));
    }

    #[test]
    fn res_sig_composite_is_unsafe_but_admits_agreement() {
        let a3 = res_sig_composite();
        let v = admits_agreement(&a3).unwrap();
        assert!(v.holds);
        assert_eq!(v.witness.unwrap().to_string(), "(?sig,!sig)");
        let s = is_safe(&a3).unwrap();
        assert!(!s.holds);
        assert_eq!(s.counterexample.unwrap().to_string(), "(?sig,!sig)(-,?res)");
        let l = liable(&a3).unwrap();
        assert_eq!(l.principals, BTreeSet::from([2]));
        assert_eq!(l.witnesses[&2].action.to_string(), "(-,?res)");
        // The exiting-transition reading blames nobody here.
        assert_eq!(liable_exiting(&a3).unwrap(), BTreeSet::new());
    }

    #[test]
    fn ann_and_bart_controller() {
        let a = product(&[&ann(), &bart()]).unwrap();
        let r = mpc(&a);
        assert!(r.hanged.contains(&sv("q2", "q2")));
        assert!(r.controller.trim().states().len() == 4);
        let expected = ContractAutomaton::new(
            2,
            vec![sv("q0", "q0"), sv("q1", "q1"), sv("q4", "q4"), sv("q5", "q5")],
            sv("q0", "q0"),
            vec![sv("q5", "q5")],
            vec![
                (sv("q0", "q0"), "(?init,!init)".parse().unwrap(), sv("q1", "q1")),
                (sv("q1", "q1"), "(!pen,?pen)".parse().unwrap(), sv("q4", "q4")),
                (sv("q4", "q4"), "(?cancel,!cancel)".parse().unwrap(), sv("q0", "q0")),
                (sv("q4", "q4"), "(!pay,?pay)".parse().unwrap(), sv("q5", "q5")),
            ],
        )
        .unwrap();
        assert!(isomorphic(&r.controller, &expected));
        // Within the reachable part only (q2,q2) is hanged.
        let reach = a.reachable();
        let hanged_reachable: Vec<&StateVector> =
            r.hanged.iter().filter(|s| reach[a.state_index(s).unwrap()]).collect();
        assert_eq!(hanged_reachable, vec![&sv("q2", "q2")]);
        assert_eq!(liable(&a).unwrap().principals, BTreeSet::from([1, 2]));
        assert_eq!(liable_exiting(&a).unwrap(), BTreeSet::from([1, 2]));
        assert!(!is_safe(&a).unwrap().holds);
    }

    #[test]
    fn controller_invariants() {
        let a = product(&[&ann(), &bart()]).unwrap();
        let k = mpc(&a).controller;
        assert!(k.transitions().iter().all(|t| !t.label.is_request()));
        assert!(hanged_states(&k).is_empty());
        for w in k.enumerate_traces(6) {
            assert!(a.accepts(&w).unwrap());
            assert!(in_agreement(&w).unwrap());
        }
    }

    #[test]
    fn empty_controller_keeps_isolated_initial() {
        let alice = ContractAutomaton::principal("q0", &["q2"], &[("q0", "?bike", "q1"), ("q1", "!airplane", "q2")])
            .unwrap();
        let bob = ContractAutomaton::principal("q0", &["q2"], &[("q0", "?airplane", "q1"), ("q1", "!bike", "q2")])
            .unwrap();
        let a = product(&[&alice, &bob]).unwrap();
        let r = mpc(&a);
        assert!(r.is_empty());
        assert!(r.controller.trim().transitions().is_empty());
        assert!(!admits_agreement(&a).unwrap().holds);
        assert!(!is_safe(&a).unwrap().holds);
        assert_eq!(liable(&a).unwrap().principals, BTreeSet::from([1, 2]));
    }

    #[test]
    fn competition_and_collaboration() {
        let bill = ContractAutomaton::principal("q0", &["q1"], &[("q0", "?toy", "q1")]).unwrap();
        let mary = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!toy", "q1")]).unwrap();
        let john = bill.clone();
        let bj = product(&[&bill, &john]).unwrap();
        assert!(collaborative(&mary, &bj));
        assert!(!competitive(&mary, &bj));

        let p = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!apple", "q1"), ("q0", "?cake", "q1")])
            .unwrap();
        let q = ContractAutomaton::principal("q0", &["q1"], &[("q0", "?apple", "q1"), ("q0", "!cake", "q1")])
            .unwrap();
        let a1 = product(&[&p, &q]).unwrap();
        let a2 = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!apple", "q1")]).unwrap();
        assert!(competitive(&a1, &a2));
        assert!(collaborative(&a1, &a2));
    }

    #[test]
    fn rank_errors() {
        let p = ContractAutomaton::principal("q0", &["q1"], &[("q0", "!a", "q1")]).unwrap();
        assert_eq!(admits_agreement(&p), Err(AgreementError::RankTooSmall(1)));
        assert_eq!(is_safe(&p), Err(AgreementError::RankTooSmall(1)));
        assert!(liable(&p).is_err());
    }
}
