//! Intuitionistic linear logic: whether a multiset of Horn clauses can
//! deliver a goal without leaving debts.
//!
//! cargo run --example ill_honoured

use contract_automata::frontend::{parse_gamma, parse_z};
use contract_automata::logic::ill_honoured;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        ("b -o a, a~ * c~ * b, c", ""),
        ("b -o a, a~ * b", ""),
        ("a -o b, b~", "a"),
        ("a -o b, b~", ""),
    ];
    for (gamma, z) in cases {
        let h = ill_honoured(&parse_gamma(gamma)?, &parse_z(z)?)?;
        print!("{gamma} |- {z}: ");
        match h.witness {
            Some(w) => println!("honoured by {w}"),
            None => println!("not honoured"),
        }
    }
    Ok(())
}
