//! Synthesises the controller of Ann and Bart and assigns blame for the
//! transitions it has to cut.
//!
//! cargo run --example orchestration

use contract_automata::agreement::{liable, mpc};
use contract_automata::frontend::parse_principal;
use contract_automata::product;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let load = |name: &str| std::fs::read_to_string(format!("{}/fixtures/{name}.ca", env!("CARGO_MANIFEST_DIR")));
    let ann = parse_principal(&load("ann")?)?;
    let bart = parse_principal(&load("bart")?)?;
    let a = product(&[&ann, &bart])?;

    let r = mpc(&a);
    println!("controller:\n{}", r.controller.trim());
    let reach = a.reachable();
    let hanged = r.hanged.iter().filter(|s| a.state_index(s).is_some_and(|q| reach[q])).count();
    println!("{hanged} reachable states hanged once requests are cut");

    let l = liable(&a)?;
    for (p, w) in &l.witnesses {
        println!("principal {p} is liable: after {} in {} it may take {}", w.prefix, w.state, w.action);
    }
    Ok(())
}
