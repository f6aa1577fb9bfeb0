#![allow(dead_code)]

use hats::strategies::blocks::{BlockSchedule, Blocks};
use hats::strategies::mixed::{MixedStrategy, TargetLaw};
use hats::strategies::team::TeamStrategy;
use hats::{generate_plan, plan::generate_plan_for_targets, ColorSpace, Rational, Strategy};

/// Binary strategies small enough to probe at arbitrary players.
pub fn small_strategies() -> Vec<(&'static str, Strategy)> {
    let team = |l: Rational, u: Rational, t| Strategy::Team(TeamStrategy::new(generate_plan_for_targets(&l, &u, t).unwrap()).unwrap());
    vec![
        ("constant", Strategy::Constant { color: 1, space: ColorSpace::FiniteK { k: 2 }.normalized() }),
        ("independent-random", Strategy::IndependentRandom { space: ColorSpace::FiniteK { k: 2 }.normalized() }),
        ("even-odd-3", Strategy::EvenOdd { group: 3 }),
        ("even-odd-10", Strategy::EvenOdd { group: 10 }),
        ("pairs", Strategy::Pairs),
        ("mod-2-sum", Strategy::ModKSum { k: 2, residue: 1, group: 4 }),
        ("blocks-3", Strategy::Blocks(Blocks::new(&BlockSchedule::Geometric { ratio: 3 }).unwrap())),
        ("team-3/4", Strategy::Team(TeamStrategy::new(generate_plan(&Rational::frac(3, 4), 5).unwrap()).unwrap())),
        ("team-1", Strategy::Team(TeamStrategy::new(generate_plan(&Rational::one(), 5).unwrap()).unwrap())),
        ("lose-1/4", team(Rational::frac(1, 4), Rational::half(), 5)),
        ("alternating", team(Rational::zero(), Rational::one(), 5)),
        ("mixed", Strategy::Mixed(Box::new(MixedStrategy::new(TargetLaw::two_point(), 6, 5).unwrap()))),
    ]
}
