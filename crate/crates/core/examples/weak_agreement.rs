//! Weak safety, weak agreement and weak liability of the hotel booking
//! service, decided with exact integer flow programs.
//!
//! cargo run --example weak_agreement

use contract_automata::frontend::AutomatonDocument;
use contract_automata::weak::{admits_weak_agreement, is_weakly_safe, weakly_liable, WeakOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/booking.json");
    let a = AutomatonDocument::from_json(&std::fs::read_to_string(path)?)?.to_automaton()?;
    let options = WeakOptions::default();

    let s = is_weakly_safe(&a, &options)?;
    println!(
        "weakly safe: {} (least balance {} on {})",
        s.holds,
        s.gamma,
        s.name.as_deref().unwrap_or("-")
    );
    println!("  run: {}", s.witness_trace);

    let w = admits_weak_agreement(&a, &options)?;
    println!("admits weak agreement: {} (best balance {}, cap {})", w.holds, w.gamma, w.cap);
    for e in &w.witness_flow {
        println!("  {} --{}--> {}  x{}", e.from, e.label, e.to, e.count);
    }
    println!("  run: {}", w.witness_trace);

    let l = weakly_liable(&a, &options)?;
    for f in &l.flagged {
        println!("fatal: {} --{}--> {} (balance {}) after {}", f.from, f.label, f.to, f.gamma, f.prefix);
    }
    println!("weakly liable principals: {:?}", l.principals);
    Ok(())
}
