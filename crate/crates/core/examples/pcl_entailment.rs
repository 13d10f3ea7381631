//! Propositional contract logic: a formula entails all its atoms exactly
//! when its automaton admits agreement. Without standard implications the
//! question can also be put to weak agreement.
//!
//! cargo run --example pcl_entailment

use contract_automata::frontend::parse_pcl;
use contract_automata::logic::{pcl_entails_lambda, pcl_weak_entails, translate_pcl};
use contract_automata::weak::WeakOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let formulas = ["(b -> a) /\\ (a & c -->> b) /\\ c", "(b -> a) /\\ (a -> b)", "(b -->> a) /\\ (a -->> b)"];
    for text in formulas {
        let p = parse_pcl(text)?;
        println!("{text}");
        println!("  automaton has {} states", translate_pcl(&p).states().len());
        let v = pcl_entails_lambda(&p)?;
        match v.witness {
            Some(w) => println!("  entails every atom: {w}"),
            None => println!("  does not entail every atom"),
        }
        // Weak agreement only answers the question for contractual
        // implications.
        if !p.has_standard_implication() {
            let w = pcl_weak_entails(&p, &WeakOptions::default())?;
            println!("  weak agreement: {} (best balance {})", w.holds, w.gamma);
        }
    }
    Ok(())
}
