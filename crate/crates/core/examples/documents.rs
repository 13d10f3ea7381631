//! Round trip between the regular-expression syntax, the JSON document
//! format and Graphviz.
//!
//! cargo run --example documents

use contract_automata::frontend::{parse_expr, render_dot, AutomatonDocument};
use contract_automata::frontend::compile;
use contract_automata::isomorphic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = parse_expr("(!init.?pen.!cancel)*.(!init.?book.?pay + !init.?pen.?pay)")?;
    println!("parsed: {e}");
    let bart = compile(&e)?;

    let doc = AutomatonDocument::from_automaton(&bart, Some(vec!["Bart".into()]));
    let json = doc.to_json();
    println!("{json}");
    let back = AutomatonDocument::from_json(&json)?.to_automaton()?;
    assert!(isomorphic(&bart, &back));

    print!("{}", render_dot(&bart));
    Ok(())
}
