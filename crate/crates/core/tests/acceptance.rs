//! One line per acceptance criterion. Runs without the test harness so the
//! lines are always printed; exits nonzero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use common::*;
use contract_automata::agreement::{admits_agreement, is_safe, liable, mpc};
use contract_automata::frontend::{parse_gamma, parse_pcl};
use contract_automata::logic::{ill_honoured, pcl_entails_lambda, translate_pcl};
use contract_automata::milp::Rational;
use contract_automata::weak::{admits_weak_agreement, in_weak_agreement, is_weakly_safe, weakly_liable, WeakOptions};
use contract_automata::{a_product, isomorphic, product, ContractAutomaton, Trace};

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn traces(a: &ContractAutomaton, len: usize) -> BTreeSet<String> {
    a.enumerate_traces(len).iter().map(Trace::to_string).collect()
}

fn res_sig_composition() -> Outcome {
    let p = product(&[&fixture("a1.json"), &fixture("a2.json")]).unwrap();
    let a3 = build(
        2,
        &["q0,q0", "q1,q1"],
        &["q1,q1"],
        &[("q0,q0", "(!res,-)", "q0,q0"), ("q0,q0", "(?sig,!sig)", "q1,q1"), ("q1,q1", "(-,?res)", "q1,q1")],
    );
    check(isomorphic(&p, &a3), "product is not the expected composite")?;
    check(!is_safe(&p).unwrap().holds, "product is safe")?;
    check(admits_agreement(&p).unwrap().holds, "no agreement")?;
    let expected: BTreeSet<String> = (0..=3).map(|k| format!("{}(?sig,!sig)", "(!res,-)".repeat(k))).collect();
    check(traces(&mpc(&p).controller, 4) == expected, "controller language differs")?;
    Ok("A1 x A2 matches the expected composite; unsafe, admits agreement".into())
}

fn ann_bart_controller() -> Outcome {
    let a = product(&[&fixture("ann.json"), &fixture("bart.json")]).unwrap();
    let r = mpc(&a);
    let expected = build(
        2,
        &["q0,q0", "q1,q1", "q4,q4", "q5,q5"],
        &["q5,q5"],
        &[
            ("q0,q0", "(?init,!init)", "q1,q1"),
            ("q1,q1", "(!pen,?pen)", "q4,q4"),
            ("q4,q4", "(?cancel,!cancel)", "q0,q0"),
            ("q4,q4", "(!pay,?pay)", "q5,q5"),
        ],
    );
    check(isomorphic(&r.controller, &expected), "controller is not the expected one")?;
    let reach = a.reachable();
    let hanged: Vec<String> = r
        .hanged
        .iter()
        .filter(|s| reach[a.state_index(s).unwrap()])
        .map(|s| s.to_string())
        .collect();
    check(hanged == ["(q2,q2)"], format!("hanged states {hanged:?}"))?;
    let l = liable(&a).unwrap();
    check(l.principals == BTreeSet::from([1, 2]), format!("liable {:?}", l.principals))?;
    Ok("controller has 4 states; hanged {(q2,q2)}; liable {1, 2}".into())
}

fn hotel_booking() -> Outcome {
    let a = fixture("booking.json");
    let o = WeakOptions::default();
    let s = is_weakly_safe(&a, &o).map_err(|e| e.to_string())?;
    check(s.gamma == Rational::from_integer(-1) && !s.holds, format!("weak safety gamma {}", s.gamma))?;
    let w = admits_weak_agreement(&a, &o).map_err(|e| e.to_string())?;
    check(w.gamma == Rational::zero() && w.holds, format!("weak agreement gamma {}", w.gamma))?;
    let allowed = [
        "(!r,?r)(-,?b)(!t,?t)(!b,-)(?e,!e)",
        "(!r,?r)(!t,-)(!b,?b)(-,?c)(?e,!e)",
    ];
    let shown = w.witness_trace.to_string();
    check(allowed.contains(&shown.as_str()), format!("witness {shown}"))?;
    let l = weakly_liable(&a, &o).map_err(|e| e.to_string())?;
    check(l.flagged.len() == 2, format!("{} flagged transitions", l.flagged.len()))?;
    for f in &l.flagged {
        check(f.label.to_string() == "(-,?c)", format!("flagged {}", f.label))?;
        check(f.gamma == Rational::from_integer(-1), format!("gamma {}", f.gamma))?;
    }
    check(l.principals == BTreeSet::from([2]), format!("weakly liable {:?}", l.principals))?;
    Ok(format!("gamma -1 / 0, witness {shown}, two (-,?c) flagged, weakly liable {{2}}"))
}

fn alice_and_bob() -> Outcome {
    let a = product(&[&fixture("alice.json"), &fixture("bob.json")]).unwrap();
    check(!admits_agreement(&a).unwrap().holds, "admits agreement")?;
    check(mpc(&a).is_empty(), "nonempty controller")?;
    check(is_weakly_safe(&a, &WeakOptions::default()).unwrap().holds, "weakly unsafe")?;
    let ts = a.enumerate_traces(8);
    check(ts.len() == 2, format!("{} accepted traces", ts.len()))?;
    check(ts.iter().all(in_weak_agreement), "a trace is not in weak agreement")?;
    Ok("no agreement, weakly safe, both traces in weak agreement".into())
}

fn bill_mary_john() -> Outcome {
    let (bill, mary, john) = (fixture("bill.json"), fixture("mary.json"), fixture("john.json"));
    let left = product(&[&product(&[&bill, &mary]).unwrap(), &john]).unwrap();
    let right = product(&[&bill, &product(&[&mary, &john]).unwrap()]).unwrap();
    let expected_left = build(
        3,
        &["q0,q0,q0", "q1,q1,q0", "q0,q0,q1", "q1,q1,q1"],
        &["q1,q1,q1"],
        &[
            ("q0,q0,q0", "(?toy,!toy,-)", "q1,q1,q0"),
            ("q0,q0,q0", "(-,-,?toy)", "q0,q0,q1"),
            ("q1,q1,q0", "(-,-,?toy)", "q1,q1,q1"),
            ("q0,q0,q1", "(?toy,!toy,-)", "q1,q1,q1"),
        ],
    );
    let expected_right = build(
        3,
        &["q0,q0,q0", "q0,q1,q1", "q1,q0,q0", "q1,q1,q1"],
        &["q1,q1,q1"],
        &[
            ("q0,q0,q0", "(-,!toy,?toy)", "q0,q1,q1"),
            ("q0,q0,q0", "(?toy,-,-)", "q1,q0,q0"),
            ("q0,q1,q1", "(?toy,-,-)", "q1,q1,q1"),
            ("q1,q0,q0", "(-,!toy,?toy)", "q1,q1,q1"),
        ],
    );
    let expected_flat = build(
        3,
        &["q0,q0,q0", "q1,q1,q0", "q0,q1,q1", "q1,q1,q1"],
        &["q1,q1,q1"],
        &[
            ("q0,q0,q0", "(?toy,!toy,-)", "q1,q1,q0"),
            ("q0,q0,q0", "(-,!toy,?toy)", "q0,q1,q1"),
            ("q1,q1,q0", "(-,-,?toy)", "q1,q1,q1"),
            ("q0,q1,q1", "(?toy,-,-)", "q1,q1,q1"),
        ],
    );
    check(isomorphic(&left, &expected_left), "left grouping differs from the expected one")?;
    check(isomorphic(&right, &expected_right), "right grouping differs from the expected one")?;
    check(!isomorphic(&left, &right), "the groupings coincide")?;
    let l = a_product(&[&a_product(&[&bill, &mary]).unwrap(), &john]).unwrap();
    let r = a_product(&[&bill, &a_product(&[&mary, &john]).unwrap()]).unwrap();
    let flat = a_product(&[&bill, &mary, &john]).unwrap();
    check(isomorphic(&flat, &expected_flat), "a-product differs from the expected one")?;
    check(isomorphic(&l, &r) && isomorphic(&l, &flat), "a-product not associative here")?;
    Ok("groupings differ as expected; a-product matches and is associative".into())
}

fn pcl() -> Outcome {
    let p = parse_pcl("(b -> a) /\\ (a & c -->> b) /\\ c").unwrap();
    let v = pcl_entails_lambda(&p).map_err(|e| e.to_string())?;
    check(v.holds, "not entailed")?;
    let w = v.witness.ok_or("no witness")?;
    check(translate_pcl(&p).accepts(&w).unwrap(), "witness not accepted")?;
    let q = parse_pcl("(b -> a) /\\ (a -> b)").unwrap();
    check(!pcl_entails_lambda(&q).unwrap().holds, "circular implications entailed")?;
    let weak = admits_weak_agreement(&translate_pcl(&q), &WeakOptions::default()).map_err(|e| e.to_string())?;
    check(weak.holds, "circular implications without weak agreement")?;
    Ok(format!("entailed with witness {w}; circular pair only weakly agrees"))
}

fn ill() -> Outcome {
    let gamma = parse_gamma("b -o a, a~ * c~ * b, c").unwrap();
    let h = ill_honoured(&gamma, &[]).map_err(|e| e.to_string())?;
    check(h.holds, "not honoured")?;
    let w = h.witness.ok_or("no witness")?;
    check(w.len() == 3 && w.actions().iter().all(|a| a.is_match()), format!("witness {w}"))?;
    Ok(format!("honoured by three matches {w}"))
}

fn case_study() -> Outcome {
    let (b, s1, s2) = (fixture("buyer.json"), fixture("seller1.json"), fixture("seller2.json"));
    let first = product(&[&b, &s1, &s2, &fixture("agent1.json")]).unwrap();
    check(admits_agreement(&first).unwrap().holds, "first composition without agreement")?;
    check(!is_safe(&first).unwrap().holds, "first composition safe")?;
    let k = mpc(&first).controller.trim();
    check(k.transitions().iter().all(|t| t.label.get(2).is_idle()), "controller moves S2")?;
    let second = product(&[&b, &s1, &s2, &fixture("agent2.json")]).unwrap();
    check(mpc(&second).is_empty(), "second controller nonempty")?;
    let o = WeakOptions::default();
    check(admits_weak_agreement(&second, &o).map_err(|e| e.to_string())?.holds, "no weak agreement")?;
    let start = Instant::now();
    let l = weakly_liable(&second, &o).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(l.principals.contains(&3), format!("weakly liable {:?}", l.principals))?;
    check(secs < 60.0, format!("weak liability took {secs:.1} s"))?;
    Ok(format!("A1 orchestrable without S2; A2 weakly agrees, weakly liable {:?} in {secs:.1} s", l.principals))
}

fn property_suites() -> Outcome {
    let mut r = rng(0x5eed);
    for i in 0..200 {
        let (a1, a2) = (random_operand(&mut r), random_operand(&mut r));
        check_agreement_composition(&a1, &a2).map_err(|e| format!("pair {i}: {e}"))?;
        check_weak_composition(&a1, &a2).map_err(|e| format!("pair {i}: {e}"))?;
    }
    for i in 0..100 {
        let a = random_composite(&mut r, 3, 8);
        check_flow_oracle(&a, 3).map_err(|e| format!("automaton {i}: {e}"))?;
    }
    for i in 0..200 {
        check_milp_brute_force(&random_integer_model(&mut r)).map_err(|e| format!("model {i}: {e}"))?;
    }
    Ok("200 pairs, 100 flow instances, 200 integer programs; no counterexample".into())
}

fn weak_membership_family() -> Outcome {
    let a4 = build(1, &["q1", "q2"], &["q2"], &[("q1", "!a", "q1"), ("q1", "!b", "q1"), ("q1", "?sig", "q2")]);
    let a5 = build(1, &["q1", "q2"], &["q2"], &[("q1", "!sig", "q2"), ("q2", "?a", "q2"), ("q2", "?b", "q2")]);
    let p = product(&[&a4, &a5]).unwrap();
    let mut count = 0;
    for n1 in 0..=4 {
        for m1 in 0..=4 {
            for n2 in 0..=4 {
                for m2 in 0..=4 {
                    let text = format!(
                        "{}{}(?sig,!sig){}{}",
                        "(!a,-)".repeat(n1),
                        "(!b,-)".repeat(m1),
                        "(-,?a)".repeat(n2),
                        "(-,?b)".repeat(m2)
                    );
                    let w = Trace::parse(2, &text).unwrap();
                    check(p.accepts(&w).unwrap(), format!("{text} not accepted"))?;
                    check(in_weak_agreement(&w) == (n1 >= n2 && m1 >= m2), format!("{text} misjudged"))?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} traces classified exactly"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("composition of A1 and A2", res_sig_composition),
        ("controller of Ann and Bart", ann_bart_controller),
        ("hotel booking", hotel_booking),
        ("Alice and Bob", alice_and_bob),
        ("Bill, Mary and John", bill_mary_john),
        ("propositional contract logic", pcl),
        ("linear contract logic", ill),
        ("purchasing case study", case_study),
        ("property suites", property_suites),
        ("weak agreement membership family", weak_membership_family),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        // A panic inside a criterion counts as its failure.
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2} s]", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2} s]", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
