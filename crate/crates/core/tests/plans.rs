//! Team plans: structural invariants on generated plans and rejection of
//! corrupted ones.

use hats::plan::{alpha_for, default_epsilon, gambler_blocks, generate_plan_for_targets, TeamMode};
use hats::{generate_plan, validate_plan, Rational, TeamPlan};
use proptest::prelude::*;

fn check_structure(plan: &TeamPlan) -> Result<(), TestCaseError> {
    prop_assert!(validate_plan(plan).passed, "{:?}", validate_plan(plan).first_violation());
    let mut next = 0u64;
    for (k, t) in plan.teams.iter().enumerate() {
        let k = k as u64;
        prop_assert_eq!(t.k, k);
        prop_assert_eq!(t.n, next);
        prop_assert_eq!(t.b, gambler_blocks(k));
        prop_assert_eq!(&t.epsilon, &default_epsilon(k));
        // g_k = alpha_k n_k, and s_k = g_k / b_k is an even integer.
        prop_assert_eq!(Rational::integer(t.g), &t.alpha * &Rational::integer(t.n));
        prop_assert_eq!(t.s * t.b, t.g);
        prop_assert_eq!(t.s % 2, 0);
        if k > 0 {
            prop_assert_eq!(&t.alpha, &alpha_for(&t.u).unwrap());
            prop_assert!(t.g > 0);
        }
        next = t.last();
    }
    prop_assert_eq!(plan.end(), next);
    prop_assert_eq!(plan.closing.k, plan.teams.len() as u64);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generated_plans_are_valid(p in 1i64..40, extra in 1i64..40, teams in 1u64..9) {
        // u = (q + p) / (2 q) with q = p + extra lies in (1/2, 1).
        let q = p + extra;
        let u = Rational::frac(q + p, 2 * q);
        let plan = generate_plan(&u, teams).unwrap();
        prop_assert_eq!(plan.mode, TeamMode::PlayToWin);
        check_structure(&plan)?;
        for t in plan.teams.iter().skip(1) {
            prop_assert!(t.u > Rational::half() && t.u < u);
        }
    }

    #[test]
    fn lose_and_alternating_plans_are_valid(p in 1i64..20, extra in 1i64..20, teams in 1u64..8) {
        let q = p + extra;
        let l = Rational::frac(q - p, 2 * q);
        let lose = generate_plan_for_targets(&l, &Rational::half(), teams).unwrap();
        prop_assert_eq!(lose.mode, TeamMode::PlayToLose);
        check_structure(&lose)?;
        let alt = generate_plan_for_targets(&l, &(Rational::one() - l.clone()), teams).unwrap();
        prop_assert_eq!(alt.mode, TeamMode::Alternating);
        check_structure(&alt)?;
    }

    #[test]
    fn plan_json_round_trips(teams in 1u64..7) {
        let plan = generate_plan(&Rational::frac(9, 10), teams).unwrap();
        prop_assert_eq!(TeamPlan::from_json(&plan.to_json()).unwrap(), plan);
    }
}

#[test]
fn target_one_plans_are_valid() {
    let plan = generate_plan(&Rational::one(), 12).unwrap();
    assert!(validate_plan(&plan).passed);
    assert!(plan.teams.iter().skip(1).all(|t| t.u < Rational::one()));
}

#[test]
fn corrupted_plans_are_rejected() {
    let plan = generate_plan(&Rational::frac(3, 4), 6).unwrap();
    let mut odd_block = plan.clone();
    odd_block.teams[3].s += 1;
    assert!(!validate_plan(&odd_block).passed);
    let mut short = plan.clone();
    short.teams[2].r -= 2;
    assert!(!validate_plan(&short).passed);
    let mut alpha = plan.clone();
    alpha.teams[4].u = Rational::frac(3, 4);
    assert!(!validate_plan(&alpha).passed);
}

#[test]
fn targets_out_of_range_are_errors() {
    assert!(generate_plan(&Rational::frac(1, 4), 3).is_err());
    assert!(generate_plan(&Rational::frac(5, 4), 3).is_err());
    assert!(generate_plan_for_targets(&Rational::frac(3, 4), &Rational::frac(1, 4), 3).is_err());
}
