mod common;

use common::*;
use contract_automata::milp::{solve_lp, solve_milp, LpOutcome, MilpOptions, MilpOutcome, VarKind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn branch_and_bound_matches_enumeration(seed in any::<u64>()) {
        let m = random_integer_model(&mut rng(seed));
        if let Err(e) = check_milp_brute_force(&m) {
            prop_assert!(false, "{}\n{}", e, m.to_lp_string());
        }
    }

    #[test]
    fn optimal_points_are_feasible_and_integral(seed in any::<u64>()) {
        let m = random_integer_model(&mut rng(seed));
        if let MilpOutcome::Optimal { value, x, .. } = solve_milp(&m, &MilpOptions::default()) {
            prop_assert!(m.is_feasible(&x));
            prop_assert_eq!(m.objective_value(&x), value);
            for (v, xv) in m.vars().iter().zip(&x) {
                prop_assert!(v.kind == VarKind::Continuous || xv.is_integer());
            }
        }
    }

    #[test]
    fn relaxation_optima_carry_a_dual_certificate(seed in any::<u64>()) {
        let m = random_integer_model(&mut rng(seed));
        match solve_lp(&m) {
            LpOutcome::Optimal(s) => {
                prop_assert!(s.certified, "{}", m.to_lp_string());
                prop_assert_eq!(m.objective_value(&s.x), s.value);
            }
            LpOutcome::Unbounded => prop_assert!(false, "boxed model reported unbounded"),
            LpOutcome::Infeasible => {}
        }
    }
}
