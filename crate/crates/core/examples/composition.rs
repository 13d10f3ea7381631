//! Composes two principals, checks safety and agreement, and prints the
//! most permissive controller.
//!
//! cargo run --example composition

use contract_automata::agreement::{admits_agreement, is_safe, mpc};
use contract_automata::frontend::parse_principal;
use contract_automata::product;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // A1 may offer `res` any number of times before requesting `sig`;
    // A2 offers `sig`, then may request `res` any number of times.
    let a1 = parse_principal("!res*.?sig")?;
    let a2 = parse_principal("!sig.?res*")?;
    let a = product(&[&a1, &a2])?;
    println!("A1 x A2:\n{a}");

    let safe = is_safe(&a)?;
    match &safe.counterexample {
        Some(w) => println!("unsafe, e.g. {w}"),
        None => println!("safe"),
    }
    let agreement = admits_agreement(&a)?;
    println!("admits agreement: {}", agreement.holds);
    if let Some(w) = agreement.witness {
        println!("shortest trace in agreement: {w}");
    }

    let k = mpc(&a).controller.trim();
    println!("controller:\n{k}");
    for w in k.enumerate_traces(3) {
        println!("  {w}");
    }
    Ok(())
}
