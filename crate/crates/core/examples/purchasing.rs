//! The purchasing system: a buyer, two sellers and one of two agents.
//! With the first agent a controller exists that never involves the second
//! seller; with the second none exists, but weak agreement is reachable.
//!
//! cargo run --release --example purchasing

use std::time::Instant;

use contract_automata::agreement::{admits_agreement, mpc};
use contract_automata::frontend::AutomatonDocument;
use contract_automata::product;
use contract_automata::weak::{admits_weak_agreement, weakly_liable, WeakOptions};
use contract_automata::ContractAutomaton;

fn load(name: &str) -> Result<ContractAutomaton, Box<dyn std::error::Error>> {
    let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    Ok(AutomatonDocument::from_json(&std::fs::read_to_string(path)?)?.to_automaton()?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (b, s1, s2) = (load("buyer")?, load("seller1")?, load("seller2")?);

    let first = product(&[&b, &s1, &s2, &load("agent1")?])?;
    println!("with agent 1: {} states, agreement {}", first.states().len(), admits_agreement(&first)?.holds);
    let k = mpc(&first).controller.trim();
    let idle = k.transitions().iter().all(|t| t.label.get(2).is_idle());
    println!("  controller: {} transitions, second seller idle throughout: {idle}", k.transitions().len());

    let second = product(&[&b, &s1, &s2, &load("agent2")?])?;
    println!("with agent 2: {} states, controller empty {}", second.states().len(), mpc(&second).is_empty());
    let options = WeakOptions::default();
    let t = Instant::now();
    let w = admits_weak_agreement(&second, &options)?;
    println!("  weak agreement {} via {} ({:.2?})", w.holds, w.witness_trace, t.elapsed());
    let t = Instant::now();
    let l = weakly_liable(&second, &options)?;
    println!(
        "  weakly liable {:?}: {} fatal transitions over {} balance classes ({:.2?})",
        l.principals,
        l.flagged.len(),
        l.classes,
        t.elapsed()
    );
    Ok(())
}
