use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::{
    complementary, ActionVector, AutomatonError, BasicAction, ContractAutomaton, StateVector,
    Transition,
};

/// Merges a label of component `i` and a label of component `j` into one
/// label of the product.
fn merged(
    offsets: &[usize],
    total: usize,
    parts: &[(usize, &ActionVector)],
) -> ActionVector {
    let mut entries = vec![BasicAction::Idle; total];
    for (c, label) in parts {
        for (k, a) in label.entries().iter().enumerate() {
            entries[offsets[*c] + k] = a.clone();
        }
    }
    ActionVector::new_unchecked(entries)
}

/// The product of a non-empty list of automata. Every joint state is built;
/// use `trim` to drop the unreachable ones.
///
/// A pair of complementary transitions of two components is always
/// synchronised. A single component moves alone only when no other
/// component offers a complementary transition from its current state.
pub fn product(components: &[&ContractAutomaton]) -> Result<ContractAutomaton, AutomatonError> {
    if components.is_empty() {
        return Err(AutomatonError::EmptyComposition);
    }
    let n = components.len();
    let mut offsets = Vec::with_capacity(n);
    let mut total = 0;
    for c in components {
        offsets.push(total);
        total += c.rank();
    }
    let sizes: Vec<usize> = components.iter().map(|c| c.states().len()).collect();
    let count: usize = sizes.iter().product();
    // Mixed-radix encoding, the last component varying fastest.
    let mut radix = vec![1usize; n];
    for c in (0..n.saturating_sub(1)).rev() {
        radix[c] = radix[c + 1] * sizes[c + 1];
    }
    let encode = |tuple: &[usize]| tuple.iter().zip(&radix).map(|(q, r)| q * r).sum::<usize>();

    let mut states = Vec::with_capacity(count);
    let mut finals = BTreeSet::new();
    let mut transitions = Vec::new();
    let mut tuple = vec![0usize; n];
    for code in 0..count {
        let mut rest = code;
        for c in 0..n {
            tuple[c] = rest / radix[c];
            rest %= radix[c];
        }
        let mut entries = Vec::with_capacity(total);
        for (c, comp) in components.iter().enumerate() {
            entries.extend(comp.state(tuple[c]).entries().iter().cloned());
        }
        states.push(StateVector::new(entries));
        if components.iter().zip(&tuple).all(|(comp, &q)| comp.is_final(q)) {
            finals.insert(code);
        }

        for i in 0..n {
            for &ti in components[i].outgoing(tuple[i]) {
                let t = &components[i].transitions()[ti];
                let mut blocked = false;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    for &tj in components[j].outgoing(tuple[j]) {
                        let u = &components[j].transitions()[tj];
                        if complementary(&t.label, &u.label) {
                            blocked = true;
                            if i < j {
                                let mut target = tuple.clone();
                                target[i] = t.to;
                                target[j] = u.to;
                                transitions.push(Transition {
                                    from: code,
                                    label: merged(&offsets, total, &[(i, &t.label), (j, &u.label)]),
                                    to: encode(&target),
                                });
                            }
                        }
                    }
                }
                if !blocked {
                    let mut target = tuple.clone();
                    target[i] = t.to;
                    transitions.push(Transition {
                        from: code,
                        label: merged(&offsets, total, &[(i, &t.label)]),
                        to: encode(&target),
                    });
                }
            }
        }
    }
    let requests = components.iter().flat_map(|c| c.requests().iter().cloned()).collect();
    let offers = components.iter().flat_map(|c| c.offers().iter().cloned()).collect();
    Ok(ContractAutomaton::from_indexed_unchecked(
        total, states, 0, finals, requests, offers, transitions,
    ))
}

/// The `i`-th principal (1-based): coordinate `i` of every state, and the
/// moves of principal `i`. Alphabets keep only the names that occur.
pub(crate) fn projection(
    a: &ContractAutomaton,
    i: usize,
) -> Result<ContractAutomaton, AutomatonError> {
    if i == 0 || i > a.rank() {
        return Err(AutomatonError::PrincipalOutOfRange { index: i, rank: a.rank() });
    }
    let k = i - 1;
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut local = Vec::with_capacity(a.states().len());
    for s in a.states() {
        let name = s.get(k);
        let id = *index.entry(name).or_insert_with(|| {
            states.push(StateVector::single(name));
            states.len() - 1
        });
        local.push(id);
    }
    let transitions: Vec<Transition> = a
        .transitions()
        .iter()
        .filter(|t| !t.label.get(k).is_idle())
        .map(|t| Transition {
            from: local[t.from],
            label: ActionVector::new_unchecked(vec![t.label.get(k).clone()]),
            to: local[t.to],
        })
        .collect();
    let finals = a.finals().iter().map(|&f| local[f]).collect();
    let (requests, offers) = super::alphabets_of(transitions.iter().map(|t| &t.label));
    Ok(ContractAutomaton::from_indexed(
        1,
        states,
        local[a.initial()],
        finals,
        requests,
        offers,
        transitions,
    ))
}

/// The associative product: the product of all principals of all operands.
pub fn a_product(operands: &[&ContractAutomaton]) -> Result<ContractAutomaton, AutomatonError> {
    if operands.is_empty() {
        return Err(AutomatonError::EmptyComposition);
    }
    let mut principals = Vec::new();
    for a in operands {
        if a.rank() == 1 {
            principals.push((*a).clone());
        } else {
            for i in 1..=a.rank() {
                principals.push(a.projection(i)?);
            }
        }
    }
    let refs: Vec<&ContractAutomaton> = principals.iter().collect();
    product(&refs)
}

/// Sequential composition of two rank-1 automata: every transition of `a1`
/// entering a final state of `a1` is redirected to the initial state of
/// `a2`. The finals are those of `a2`. `a1` must be acyclic.
pub fn concatenate(
    a1: &ContractAutomaton,
    a2: &ContractAutomaton,
) -> Result<ContractAutomaton, AutomatonError> {
    if a1.rank() != 1 || a2.rank() != 1 {
        return Err(AutomatonError::NotPrincipal);
    }
    if a1.has_cycle() {
        return Err(AutomatonError::NotAcyclic);
    }
    let shift = a1.states().len();
    let mut states: Vec<StateVector> =
        a1.states().iter().map(|s| StateVector::single(format!("L{}", s.get(0)))).collect();
    states.extend(a2.states().iter().map(|s| StateVector::single(format!("R{}", s.get(0)))));
    let mut transitions: Vec<Transition> = a1
        .transitions()
        .iter()
        .map(|t| Transition {
            from: t.from,
            label: t.label.clone(),
            to: if a1.is_final(t.to) { shift + a2.initial() } else { t.to },
        })
        .collect();
    transitions.extend(a2.transitions().iter().map(|t| Transition {
        from: shift + t.from,
        label: t.label.clone(),
        to: shift + t.to,
    }));
    let finals = a2.finals().iter().map(|f| shift + f).collect();
    let requests = a1.requests().union(a2.requests()).cloned().collect();
    let offers = a1.offers().union(a2.offers()).cloned().collect();
    Ok(ContractAutomaton::from_indexed_unchecked(
        1,
        states,
        a1.initial(),
        finals,
        requests,
        offers,
        transitions,
    ))
}

pub(crate) fn determinize(a: &ContractAutomaton) -> Result<ContractAutomaton, AutomatonError> {
    if a.rank() != 1 {
        return Err(AutomatonError::NotPrincipal);
    }
    let name = |set: &BTreeSet<usize>| {
        let members: Vec<&str> = set.iter().map(|&q| a.state(q).get(0)).collect();
        StateVector::single(format!("{{{}}}", members.join("|")))
    };
    let start = BTreeSet::from([a.initial()]);
    let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut sets = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    let mut transitions = Vec::new();
    while let Some(set) = queue.pop_front() {
        let from = ids[&set];
        let mut by_label: BTreeMap<&ActionVector, BTreeSet<usize>> = BTreeMap::new();
        for &q in &set {
            for &t in a.outgoing(q) {
                let t = &a.transitions()[t];
                by_label.entry(&t.label).or_default().insert(t.to);
            }
        }
        for (label, target) in by_label {
            let to = match ids.get(&target) {
                Some(&id) => id,
                None => {
                    let id = sets.len();
                    ids.insert(target.clone(), id);
                    sets.push(target.clone());
                    queue.push_back(target);
                    id
                }
            };
            transitions.push(Transition { from, label: label.clone(), to });
        }
    }
    let finals = sets
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().any(|q| a.is_final(*q)))
        .map(|(i, _)| i)
        .collect();
    let states = sets.iter().map(name).collect();
    Ok(ContractAutomaton::from_indexed(
        1,
        states,
        0,
        finals,
        a.requests().clone(),
        a.offers().clone(),
        transitions,
    ))
}
