#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use contract_automata::agreement::{admits_agreement, collaborative, competitive, is_safe};
use contract_automata::frontend::AutomatonDocument;
use contract_automata::milp::{solve_milp, MilpModel, MilpOptions, MilpOutcome, Rational, Relation, Sense, VarKind};
use contract_automata::weak::{admits_weak_agreement, is_weakly_safe, Connectivity, WeakOptions};
use contract_automata::{a_product, product, ActionKind, ContractAutomaton, StateVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> ContractAutomaton {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    AutomatonDocument::from_json(&text).unwrap().to_automaton().unwrap()
}

/// `"q0,q1"` as a state vector.
pub fn sv(s: &str) -> StateVector {
    StateVector::new(s.split(',').map(str::to_string).collect())
}

/// An automaton from comma-separated state vectors; the first state is initial.
pub fn build(rank: usize, states: &[&str], finals: &[&str], ts: &[(&str, &str, &str)]) -> ContractAutomaton {
    ContractAutomaton::new(
        rank,
        states.iter().map(|s| sv(s)).collect(),
        sv(states[0]),
        finals.iter().map(|s| sv(s)).collect(),
        ts.iter().map(|(f, l, t)| (sv(f), l.parse().unwrap(), sv(t))).collect(),
    )
    .unwrap()
}

/// The same automaton with its alphabets cut down to the names that occur
/// in its labels.
pub fn live(a: &ContractAutomaton) -> ContractAutomaton {
    AutomatonDocument::from_automaton(a, None).to_automaton().unwrap()
}

pub const NAMES: [&str; 3] = ["a", "b", "c"];

/// A random principal with at most `max_states` states and a nonempty
/// language, pruned to its useful part.
pub fn random_principal(rng: &mut ChaCha8Rng, max_states: usize, names: &[&str]) -> ContractAutomaton {
    loop {
        let k = rng.gen_range(1..=max_states);
        let offers: Vec<bool> = names.iter().map(|_| rng.gen_bool(0.5)).collect();
        let states: Vec<String> = (0..k).map(|i| format!("q{i}")).collect();
        let mut ts = Vec::new();
        for _ in 0..rng.gen_range(1..=2 * k) {
            let n = rng.gen_range(0..names.len());
            let label = format!("{}{}", if offers[n] { "!" } else { "?" }, names[n]);
            ts.push((states[rng.gen_range(0..k)].clone(), label, states[rng.gen_range(0..k)].clone()));
        }
        let mut finals: Vec<&str> = states.iter().filter(|_| rng.gen_bool(0.4)).map(String::as_str).collect();
        if finals.is_empty() {
            finals.push(states.choose(rng).unwrap());
        }
        let refs: Vec<(&str, &str, &str)> = ts.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
        let p = ContractAutomaton::principal("q0", &finals, &refs).unwrap();
        if !p.language_is_empty() {
            return live(&p.prune());
        }
    }
}

/// A rank-2 composition of two random principals with at most
/// `max_states` useful states.
pub fn random_composite(rng: &mut ChaCha8Rng, principal_states: usize, max_states: usize) -> ContractAutomaton {
    loop {
        let p1 = random_principal(rng, principal_states, &NAMES[..2]);
        let p2 = random_principal(rng, principal_states, &NAMES[..2]);
        let a = product(&[&p1, &p2]).unwrap();
        if a.language_is_empty() {
            continue;
        }
        let a = live(&a.prune());
        if a.states().len() <= max_states {
            return a;
        }
    }
}

/// An operand of the composition theorems: a pruned rank-2 composition of
/// at most four states over three names.
pub fn random_operand(rng: &mut ChaCha8Rng) -> ContractAutomaton {
    loop {
        let p1 = random_principal(rng, 3, &NAMES);
        let p2 = random_principal(rng, 3, &NAMES);
        let a = product(&[&p1, &p2]).unwrap();
        if a.language_is_empty() {
            continue;
        }
        let a = live(&a.prune());
        if a.states().len() <= 4 {
            return a;
        }
    }
}

fn weakly_safe(a: &ContractAutomaton) -> bool {
    is_weakly_safe(a, &WeakOptions::default()).unwrap().holds
}

fn weakly_agrees(a: &ContractAutomaton) -> bool {
    admits_weak_agreement(a, &WeakOptions::default()).unwrap().holds
}

fn safe(a: &ContractAutomaton) -> bool {
    is_safe(a).unwrap().holds
}

fn ensure(ok: bool, what: &str) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

/// The five items of the composition theorem for agreement.
pub fn check_agreement_composition(a1: &ContractAutomaton, a2: &ContractAutomaton) -> Result<(), String> {
    let (comp, coll) = (competitive(a1, a2), collaborative(a1, a2));
    let (s1, s2) = (safe(a1), safe(a2));
    let p = product(&[a1, a2]).unwrap();
    let ap = a_product(&[a1, a2]).unwrap();
    ensure(!comp || coll, "competitive but not collaborative")?;
    ensure(!(coll && s1 && s2) || comp, "collaborative and safe but not competitive")?;
    if s1 && s2 {
        ensure(safe(&p), "safe operands, unsafe product")?;
        ensure(admits_agreement(&ap).unwrap().holds, "safe operands, a-product without agreement")?;
    }
    if !coll && !(s1 && s2) {
        ensure(!safe(&p), "non-collaborative with an unsafe operand, safe product")?;
        ensure(!safe(&ap), "non-collaborative with an unsafe operand, safe a-product")?;
    }
    if s1 && s2 && !comp {
        ensure(safe(&ap), "safe and non-competitive, unsafe a-product")?;
    }
    Ok(())
}

/// The three items of the composition theorem for weak agreement.
pub fn check_weak_composition(a1: &ContractAutomaton, a2: &ContractAutomaton) -> Result<(), String> {
    let p = product(&[a1, a2]).unwrap();
    let ap = a_product(&[a1, a2]).unwrap();
    let (w1, w2) = (weakly_safe(a1), weakly_safe(a2));
    if w1 && w2 {
        ensure(weakly_safe(&p), "weakly safe operands, weakly unsafe product")?;
        ensure(weakly_agrees(&ap), "weakly safe operands, a-product without weak agreement")?;
    }
    if !collaborative(a1, a2) && !(w1 && w2) {
        ensure(!weakly_safe(&p), "non-collaborative with a weakly unsafe operand, weakly safe product")?;
        ensure(!weakly_safe(&ap), "non-collaborative with a weakly unsafe operand, weakly safe a-product")?;
    }
    if safe(a1) && safe(a2) && !competitive(a1, a2) {
        ensure(weakly_safe(&ap), "safe and non-competitive, weakly unsafe a-product")?;
    }
    Ok(())
}

/// Least and greatest value, over the accepted runs taking each transition
/// at most `cap` times, of the least balance over the requested names.
pub fn capped_gamma_oracle(a: &ContractAutomaton, cap: u64) -> Option<(i64, i64)> {
    let names: Vec<&String> = a.requests().iter().collect();
    let coeff: Vec<Vec<i64>> = a
        .transitions()
        .iter()
        .map(|t| {
            names
                .iter()
                .map(|n| match t.label.kind() {
                    ActionKind::Offer { name, .. } if name == n.as_str() => 1,
                    ActionKind::Request { name, .. } if name == n.as_str() => -1,
                    _ => 0,
                })
                .collect()
        })
        .collect();
    let co = a.coreachable();
    let mut seen = BTreeSet::new();
    let mut best: Option<(i64, i64)> = None;
    let mut stack = vec![(a.initial(), vec![0u64; a.transitions().len()])];
    while let Some((q, counts)) = stack.pop() {
        if !co[q] || !seen.insert((q, counts.clone())) {
            continue;
        }
        if a.is_final(q) {
            let least = (0..names.len())
                .map(|i| counts.iter().zip(&coeff).map(|(c, k)| *c as i64 * k[i]).sum::<i64>())
                .min()
                .unwrap_or(0);
            best = Some(best.map_or((least, least), |(lo, hi)| (lo.min(least), hi.max(least))));
        }
        for &t in a.outgoing(q) {
            if counts[t] < cap {
                let mut next = counts.clone();
                next[t] += 1;
                stack.push((a.transitions()[t].to, next));
            }
        }
    }
    best
}

/// Both flow deciders against the run enumeration, and the two
/// connectivity encodings against each other.
pub fn check_flow_oracle(a: &ContractAutomaton, cap: u64) -> Result<(), String> {
    let (lo, hi) = capped_gamma_oracle(a, cap).ok_or("empty language")?;
    for connectivity in [Connectivity::LazyCuts, Connectivity::AuxiliaryFlows] {
        let o = WeakOptions { connectivity, ..WeakOptions::with_cap(cap) };
        let s = is_weakly_safe(a, &o).map_err(|e| e.to_string())?;
        let w = admits_weak_agreement(a, &o).map_err(|e| e.to_string())?;
        if s.gamma != Rational::from_integer(lo) || w.gamma != Rational::from_integer(hi) {
            return Err(format!(
                "{connectivity:?}: flows give ({}, {}), runs give ({lo}, {hi})",
                s.gamma, w.gamma
            ));
        }
        ensure(s.holds == (lo >= 0) && w.holds == (hi >= 0), "verdict disagrees with gamma")?;
        ensure(a.accepts(&w.witness_trace).unwrap(), "witness trace not accepted")?;
    }
    Ok(())
}

/// A small all-integer model with box bounds of width at most four.
pub fn random_integer_model(rng: &mut ChaCha8Rng) -> MilpModel {
    let mut m = MilpModel::new();
    let n = rng.gen_range(1..=3);
    let vars: Vec<_> = (0..n)
        .map(|i| {
            let lo = rng.gen_range(-2..=2);
            let hi = lo + rng.gen_range(0..=4);
            let kind = if lo == 0 && hi == 1 { VarKind::Binary } else { VarKind::Integer };
            m.add_var(format!("v{i}"), kind, Some(Rational::from_integer(lo)), Some(Rational::from_integer(hi)))
        })
        .collect();
    for j in 0..rng.gen_range(0..=3) {
        let mut terms = Vec::new();
        for v in &vars {
            if rng.gen_bool(0.8) {
                terms.push((*v, Rational::new(rng.gen_range(-3..=3), rng.gen_range(1..=2))));
            }
        }
        let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
        m.add_constraint(format!("c{j}"), terms, rel, Rational::from_integer(rng.gen_range(-4..=6)));
    }
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let obj = vars.iter().map(|v| (*v, Rational::from_integer(rng.gen_range(-3..=3)))).collect();
    m.set_objective(sense, obj);
    m
}

/// Branch and bound against exhaustive enumeration of the box.
pub fn check_milp_brute_force(m: &MilpModel) -> Result<(), String> {
    let boxes: Vec<(i64, i64)> = m
        .vars()
        .iter()
        .map(|v| (v.lower.as_ref().unwrap().to_i64().unwrap(), v.upper.as_ref().unwrap().to_i64().unwrap()))
        .collect();
    let mut best: Option<Rational> = None;
    let mut point: Vec<i64> = boxes.iter().map(|b| b.0).collect();
    loop {
        let x: Vec<Rational> = point.iter().map(|&v| Rational::from_integer(v)).collect();
        if m.is_feasible(&x) {
            let v = m.objective_value(&x);
            let better = match &best {
                None => true,
                Some(b) => (m.sense() == Sense::Minimize && v < *b) || (m.sense() == Sense::Maximize && v > *b),
            };
            if better {
                best = Some(v);
            }
        }
        let mut i = 0;
        while i < point.len() && point[i] == boxes[i].1 {
            point[i] = boxes[i].0;
            i += 1;
        }
        if i == point.len() {
            break;
        }
        point[i] += 1;
    }
    match (solve_milp(m, &MilpOptions::default()), best) {
        (MilpOutcome::Infeasible, None) => Ok(()),
        (MilpOutcome::Optimal { value, x, .. }, Some(b)) if value == b => {
            ensure(m.is_feasible(&x) && m.objective_value(&x) == value, "optimal point does not check")
        }
        (o, b) => Err(format!("solver {o:?}, enumeration {b:?}")),
    }
}
