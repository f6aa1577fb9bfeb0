//! Exact enumeration: every deterministic strategy with K colors has mean 1/K,
//! window-local enumeration agrees with full enumeration.

use hats::exact::{
    correct_probability, exact_distribution, exact_distribution_of, exact_mean_of, search_strategy_space,
    FiniteStrategyTable, Objective,
};
use hats::{library_strategies, Rational};
use proptest::prelude::*;

fn table(n: u64, k: u64) -> impl Strategy<Value = FiniteStrategyTable> {
    let size = k.pow(n as u32 - 1) as usize;
    proptest::collection::vec(proptest::collection::vec(0..k, size), n as usize)
        .prop_map(move |t| FiniteStrategyTable::new(n, k, t).unwrap())
}

fn tables() -> impl Strategy<Value = FiniteStrategyTable> {
    (1u64..=4, 2u64..=3).prop_flat_map(|(n, k)| table(n, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn every_table_has_mean_one_over_k(t in tables()) {
        let d = exact_distribution(&t).unwrap();
        let inv_k = Rational::new(1u64, t.k).unwrap();
        prop_assert_eq!(d.total_probability(), Rational::one());
        prop_assert_eq!(d.mean(), inv_k.clone());
        prop_assert!(d.markov_holds());
        prop_assert!(d.probability(&Rational::one()) <= inv_k);
    }
}

#[test]
fn local_enumeration_matches_full_enumeration() {
    for (name, s) in library_strategies().unwrap() {
        for n in 1..=6u64 {
            let Ok(d) = exact_distribution_of(&s, n) else { continue };
            assert_eq!(d.mean(), exact_mean_of(&s, n).unwrap(), "{name} n={n}");
        }
        for i in 1..=10u64 {
            if s.window(i).unwrap().size() <= 16 {
                assert_eq!(correct_probability(&s, i).unwrap(), Rational::half(), "{name} player {i}");
            }
        }
    }
}

#[test]
fn search_optimum_is_one_half() {
    for n in 2..=3u64 {
        let r = search_strategy_space(n, Objective::MaxAllCorrect).unwrap();
        assert_eq!(r.optimum, Rational::half());
        let d = exact_distribution(&r.witness).unwrap();
        assert_eq!(d.probability(&Rational::one()), Rational::half());
    }
    assert!(search_strategy_space(5, Objective::MaxAllCorrect).is_err());
}
