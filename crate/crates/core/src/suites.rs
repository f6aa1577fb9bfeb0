//! Verification suites: each function checks one acceptance criterion and
//! returns a deterministic report (no timings, no thread-dependent order).
//!
//! Statistical criteria draw from streams derived from the suite seed:
//! criterion `c` uses seed [`criterion_seed`]`(seed, c)`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::exact::{
    adversarial_tail_black_search, correct_probability, exact_distribution, exact_distribution_of, exact_mean_of, search_strategy_space,
    verify_independence_within, Objective,
};
use crate::model::{sample_assignment, ColorSpace, DensityEstimate, HatAssignment, KSchedule, RandomSource, Tail};
use crate::montecarlo::{
    density_estimate, event_frequency, simulate_many, sure_checks, verify_density_targets,
    verify_theorem_main, Engine, Proportion,
};
use crate::plan::{default_u_schedule, gambler_blocks, generate_plan, validate_plan};
use crate::rational::Rational;
use crate::strategies::blocks::{BlockSchedule, Blocks};
use crate::strategies::mixed::{is_inactive, isqrt, mixed_strategy_dispatch, noise_player, MixedStrategy, TargetLaw};
use crate::strategies::rules::{ContinuumLaw, ContinuumRule, PositiveLaw};
use crate::strategies::spec::library_strategies;
use crate::strategies::{Private, Strategy, View};

pub const SUITE_SCHEMA_VERSION: u32 = 1;

/// Runs behind each statistical estimate. A 99% interval of half-width at
/// most 0.02 needs about 4150 runs at `p = 1/2`.
pub const BLOCK_RUNS: u64 = 20_000;
pub const TEAM_RUNS: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Finite,
    Infinite,
    Appendix,
    Colors,
    All,
}

impl Suite {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Finite => &[1, 2, 3, 4],
            Suite::Infinite => &[5, 6],
            Suite::Appendix => &[7, 9],
            Suite::Colors => &[8],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9],
        }
    }
}

pub fn criterion_seed(seed: u64, id: u8) -> u64 {
    RandomSource::with_stream(seed, 1_000 + u64::from(id)).next_u64()
}

pub fn run_criterion(id: u8, seed: u64) -> Result<CriterionReport> {
    let s = criterion_seed(seed, id);
    match id {
        1 => exact_finite_games(),
        2 => bound_sharpness(),
        3 => window_independence(),
        4 => adversarial_remark(),
        5 => extremes_straddle_half(s),
        6 => block_densities(s),
        7 => team_plans(s),
        8 => colors(s),
        9 => mixed_strategies(s),
        _ => Err(crate::error::invalid(format!("no criterion {id}"))),
    }
}

fn report(id: u8, name: &str, passed: bool, summary: String, details: Value) -> Result<CriterionReport> {
    Ok(CriterionReport { id, name: name.into(), passed, summary, details })
}

/// Criterion 1: even-odd, pairs and the mean of every library strategy.
pub fn exact_finite_games() -> Result<CriterionReport> {
    let half = Rational::half();
    let mut ok = true;
    let mut rows = Vec::new();
    for n in 2..=6u64 {
        let d = exact_distribution_of(&Strategy::EvenOdd { group: n }, n)?;
        let p1 = d.probability(&Rational::one());
        let good = p1 == half && d.probability(&Rational::zero()) == half && d.total_probability() == Rational::one();
        ok &= good;
        rows.push(json!({"strategy": "even-odd", "n": n, "p_all_correct": p1.to_string(), "passed": good}));
        if n % 2 == 0 {
            let d = exact_distribution_of(&Strategy::Pairs, n)?;
            let p = d.probability(&half);
            let good = p == Rational::one();
            ok &= good;
            rows.push(json!({"strategy": "pairs", "n": n, "p_half": p.to_string(), "passed": good}));
        }
    }
    let mut means = Vec::new();
    for (name, s) in library_strategies()? {
        // Every player up to 12 whose window fits the local enumeration has
        // P(Z_i = 1) = 1/2, which gives E[Z̄_n] = 1/2 for each n up to there.
        let mut bad = Vec::new();
        let mut skipped = Vec::new();
        let mut prefix = 0u64;
        for i in 1..=12u64 {
            if s.window(i)?.size() > 20 {
                skipped.push(i);
                continue;
            }
            let p = correct_probability(&s, i)?;
            if p != half {
                bad.push(json!({"player": i, "p_correct": p.to_string()}));
            }
            if skipped.is_empty() {
                prefix = i;
            }
        }
        if prefix > 0 && exact_mean_of(&s, prefix)? != half {
            bad.push(json!({"n": prefix, "mean": "not 1/2"}));
        }
        // Full distributions where they are small enough: sum and Markov.
        let mut markov = true;
        for n in 1..=6u64 {
            if let Ok(d) = exact_distribution_of(&s, n) {
                markov &= d.total_probability() == Rational::one() && d.mean() == half && d.markov_holds();
            }
        }
        let good = bad.is_empty() && markov;
        ok &= good;
        means.push(json!({
            "strategy": name,
            "players_checked": 12 - skipped.len(),
            "skipped_large_window": skipped,
            "mean_half_up_to": prefix,
            "exceptions": bad,
            "markov": markov,
        }));
    }
    report(
        1,
        "exact finite games",
        ok,
        format!("even-odd/pairs n=2..6 and E[Z̄]=1/2 for {} library strategies, n<=12", means.len()),
        json!({"games": rows, "means": means}),
    )
}

/// Criterion 2: exhaustive search over all strategies for n = 2, 3 (and 4).
pub fn bound_sharpness() -> Result<CriterionReport> {
    let half = Rational::half();
    let mut ok = true;
    let mut rows = Vec::new();
    for n in 2..=4u64 {
        for objective in [Objective::MaxAllCorrect, Objective::MaxGuaranteedFraction] {
            let r = search_strategy_space(n, objective)?;
            // Re-score the witness through the independent full enumeration.
            let d = exact_distribution(&r.witness)?;
            let witnessed = match objective {
                Objective::MaxAllCorrect => d.probability(&Rational::one()),
                Objective::MaxGuaranteedFraction => d.support()[0].0.clone(),
            };
            let bound_ok = match objective {
                Objective::MaxAllCorrect => r.optimum == half,
                Objective::MaxGuaranteedFraction => r.optimum <= half,
            };
            let good = bound_ok && witnessed == r.optimum;
            ok &= good;
            rows.push(json!({
                "n": n,
                "objective": objective,
                "optimum": r.optimum.to_string(),
                "witness_value": witnessed.to_string(),
                "tuples": r.examined,
                "witness": r.witness.tables,
                "passed": good,
            }));
        }
    }
    report(
        2,
        "bound sharpness",
        ok,
        "max P(all correct) = 1/2 and max guaranteed fraction <= 1/2 for n = 2, 3, 4".into(),
        json!({"searches": rows}),
    )
}

/// Criterion 3: conditional correct probability 1/2 on every window
/// configuration, players 1..=8, windows of at most 12 hats.
pub fn window_independence() -> Result<CriterionReport> {
    let mut ok = true;
    let mut rows = Vec::new();
    let mut checked = 0u64;
    for (name, s) in library_strategies()? {
        let mut players = Vec::new();
        let mut skipped = Vec::new();
        for i in 1..=8u64 {
            if s.window(i)?.size() > 12 {
                skipped.push(i);
                continue;
            }
            let r = verify_independence_within(&s, i, 12)?;
            ok &= r.passed;
            checked += 1;
            players.push(json!({"player": i, "window": r.window_size, "configurations": r.configurations, "observed": r.observed, "passed": r.passed}));
        }
        rows.push(json!({"strategy": name, "players": players, "skipped_large_window": skipped}));
    }
    let cheat = verify_independence_within(&Strategy::Cheat, 1, 12)?;
    ok &= !cheat.passed;
    report(
        3,
        "window independence",
        ok,
        format!("{checked} (strategy, player) pairs with conditional probability exactly 1/2; own-hat reader rejected"),
        json!({"strategies": rows, "cheat_rejected": !cheat.passed}),
    )
}

/// Criterion 4: a tail-black prefix of 8 hats with at least 4 wrong guesses.
pub fn adversarial_remark() -> Result<CriterionReport> {
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, s) in library_strategies()? {
        let r = adversarial_tail_black_search(&s, 8)?;
        let good = r.passed();
        ok &= good;
        rows.push(json!({
            "strategy": name,
            "wrong": r.wrong,
            "witness": r.witness.iter().map(|b| char::from(b'0' + b)).collect::<String>(),
            "average_wrong": r.average_wrong.to_string(),
            "passed": good,
        }));
    }
    report(4, "adversarial remark", ok, "every library strategy has a prefix with >= 4 of 8 wrong".into(), json!({"strategies": rows}))
}

/// Criterion 5: window extremes of `Z̄` straddle 1/2 in every run.
pub fn extremes_straddle_half(seed: u64) -> Result<CriterionReport> {
    let tol = Rational::frac(1, 50);
    let mut ok = true;
    let mut rows = Vec::new();
    let mut failing = Vec::new();
    for (name, s) in library_strategies()? {
        let r = verify_theorem_main(&s, 100_000, 100, &tol, 100, seed, Engine::Players)?;
        if !r.passed {
            failing.push(format!("{name} ({} runs)", r.failed_runs.len()));
        }
        ok &= r.passed;
        rows.push(json!({
            "strategy": name,
            "max_lower": r.max_lower,
            "min_upper": r.min_upper,
            "failed_runs": r.failed_runs,
            "passed": r.passed,
        }));
    }
    let summary = if failing.is_empty() {
        "N = 1e5, 100 runs, k >= 100: min Z̄ <= 0.52 and max Z̄ >= 0.48 in every run".into()
    } else {
        format!("N = 1e5, 100 runs, k >= 100: fails for {}", failing.join(", "))
    };
    report(5, "extremes straddle 1/2", ok, summary, json!({"strategies": rows}))
}

/// Criterion 6: geometric blocks, sure bound, `P(A_j)`, and window extremes.
pub fn block_densities(seed: u64) -> Result<CriterionReport> {
    let blocks = Blocks::new(&BlockSchedule::default())?;
    let m = 10usize;
    let n = blocks.bounds()[m - 1];
    let s = Strategy::Blocks(blocks);
    let runs = simulate_many(&s, n, seed, BLOCK_RUNS, Engine::Segments)?;
    let mut sure = 0u64;
    let mut violations = Vec::new();
    let mut high = 0u64;
    let mut low = 0u64;
    for r in &runs {
        let c = sure_checks(&s, r);
        sure += c.checked;
        violations.extend(c.violations);
        let e: DensityEstimate = density_estimate(&r.trajectory, 100, true)?;
        high += u64::from(e.upper >= Rational::frac(9, 10));
        low += u64::from(e.lower <= Rational::frac(1, 10));
    }
    let events = event_frequency(&runs, 1, |_| 0.5, 0.02);
    let threshold = 1.0 - 0.5f64.powi(5) - 0.03;
    let hi_p = Proportion { successes: high, trials: BLOCK_RUNS };
    let lo_p = Proportion { successes: low, trials: BLOCK_RUNS };
    let extremes_ok = hi_p.estimate() - hi_p.half_width() >= threshold && lo_p.estimate() - lo_p.half_width() >= threshold;
    let ok = violations.is_empty() && events.len() == m && events.iter().all(|e| e.passed) && extremes_ok;
    report(
        6,
        "L0U1 blocks",
        ok,
        format!("{m} geometric blocks, {BLOCK_RUNS} runs: sure bound, P(A_j) = 1/2 +- 0.02, extremes"),
        json!({
            "n": n,
            "runs": BLOCK_RUNS,
            "sure_checks": sure,
            "sure_violations": violations.iter().take(20).collect::<Vec<_>>(),
            "events": events,
            "upper_at_least_0.9": hi_p,
            "lower_at_most_0.1": lo_p,
            "threshold": threshold,
        }),
    )
}

/// Criterion 7: plans validated, sure team bounds, `P(A_k)`, correlations.
pub fn team_plans(seed: u64) -> Result<CriterionReport> {
    let mut ok = true;
    let mut rows = Vec::new();
    let targets = [Rational::frac(2, 3), Rational::frac(3, 4), Rational::frac(9, 10), Rational::one()];
    for (i, u) in targets.iter().enumerate() {
        let plan = generate_plan(u, 12)?;
        let validation = validate_plan(&plan);
        let r = verify_density_targets(&plan, TEAM_RUNS, seed.wrapping_add(i as u64), 0.02, 0.03)?;
        let good = validation.passed && r.passed;
        ok &= good;
        rows.push(json!({
            "u": u.to_string(),
            "teams": plan.teams.len(),
            "n_end": plan.end(),
            "validation_passed": validation.passed,
            "report": r,
        }));
    }
    // (1 - u_k) b_k grows along the u = 1 schedule.
    let mut prev = Rational::zero();
    let mut growth = true;
    for k in 1..=1000u64 {
        let v = &(Rational::one() - default_u_schedule(&Rational::one(), k)?) * &Rational::integer(gambler_blocks(k));
        if k > 1 && v < prev {
            growth = false;
        }
        prev = v;
    }
    ok &= growth;
    report(
        7,
        "team plans",
        ok,
        format!("u in {{2/3, 3/4, 9/10, 1}}, 12 teams, {TEAM_RUNS} runs each"),
        json!({"plans": rows, "u1_growth_non_decreasing": growth}),
    )
}

/// Criterion 8: mod-K, countable and continuum colors.
pub fn colors(seed: u64) -> Result<CriterionReport> {
    let mut ok = true;
    // Mod-K sum: all right with probability exactly 1/K.
    let mut modk = Vec::new();
    for k in 2..=4u64 {
        let d = exact_distribution_of(&Strategy::ModKSum { k, residue: 0, group: 2 * k }, 2 * k)?;
        let p = d.probability(&Rational::one());
        let good = p == Rational::new(1u64, k)? && &d.probability(&Rational::zero()) + &p == Rational::one();
        ok &= good;
        modk.push(json!({"k": k, "n": 2 * k, "p_all_correct": p.to_string(), "passed": good}));
    }
    // Mod-K groups: exactly one right per group on every assignment.
    let mut groups = Vec::new();
    for (k, max_groups) in [(2u64, 4u64), (3, 3), (4, 2)] {
        for g in 1..=max_groups {
            let d = exact_distribution_of(&Strategy::ModKGroups { k }, k * g)?;
            let good = d.probability(&Rational::new(1u64, k)?) == Rational::one();
            ok &= good;
            groups.push(json!({"k": k, "groups": g, "assignments": d.total.to_string(), "passed": good}));
        }
    }
    // Countable colors: union bound and its Monte Carlo check.
    let eps = Rational::frac(1, 10);
    let schedule = KSchedule::UnionBound { epsilon: eps.clone() };
    let mut partial = Rational::zero();
    let mut union_ok = true;
    for i in 1..=55u64 {
        partial = partial + Rational::new(1u64, schedule.colors_for(i)?)?;
        union_ok &= partial < eps;
    }
    ok &= union_ok;
    let countable = Strategy::CountableUniform { schedule: schedule.clone() };
    let runs = 10_000u64;
    let hits: u64 = simulate_many(&countable, 30, seed, runs, Engine::Players)?
        .iter()
        .map(|r| u64::from(r.trajectory_count(30) > 0))
        .sum();
    let any_correct = Proportion { successes: hits, trials: runs };
    let countable_ok = any_correct.below(0.1);
    ok &= countable_ok;
    // Positive-support guesses against fixed hats.
    let positive = Strategy::CountablePositive { schedule: schedule.clone(), law: PositiveLaw::Poisson { lambda: 1.0 } };
    let fixed = HatAssignment::from_colors(
        ColorSpace::CountablePerPlayer { schedule: schedule.clone() },
        (0..30u64).map(|i| crate::model::Color::Index(i % 3)).collect(),
        Tail::Unsampled,
    )?;
    let mut right = 0u64;
    for r in 0..runs {
        let private = RandomSource::private_seed(seed.wrapping_add(1), r);
        let view = View::new(&fixed, Private::Seed(private));
        for p in 1..=30u64 {
            right += u64::from(positive.guess(p, &view)? == fixed.color(p)?);
        }
    }
    let positive_p = Proportion { successes: right, trials: runs * 30 };
    let positive_ok = positive_p.estimate() - positive_p.half_width() > 0.0;
    ok &= positive_ok;
    // Continuum colors: nobody is ever right.
    let mut continuum = Vec::new();
    for rule in [ContinuumRule::default(), ContinuumRule::Constant { value: 0.5 }] {
        let s = Strategy::Continuum(rule.clone());
        let sims = simulate_many(&s, 100, seed.wrapping_add(2), runs, Engine::Players)?;
        let correct: u64 = sims.iter().map(|r| r.trajectory_count(100)).sum();
        let good = correct == 0;
        ok &= good;
        continuum.push(json!({"rule": rule, "runs": runs, "players": 100, "correct": correct, "passed": good}));
    }
    let atom_rejected = ContinuumLaw::PointMass { at: 0.5 }.validate().is_err();
    ok &= atom_rejected;
    // A sample of the hats themselves stays inside each player's range.
    let sample = sample_assignment(&ColorSpace::CountablePerPlayer { schedule }, 30, &mut RandomSource::new(seed))?;
    ok &= sample.len() == 30;
    report(
        8,
        "colors",
        ok,
        "mod-K exact 1/K, groups sure, countable union bound, continuum all wrong".into(),
        json!({
            "mod_k_sum": modk,
            "mod_k_groups": groups,
            "union_bound_below_eps_up_to_55": union_ok,
            "countable_any_correct": any_correct,
            "countable_passed": countable_ok,
            "positive_support_correct": positive_p,
            "positive_support_passed": positive_ok,
            "continuum": continuum,
            "point_mass_rejected": atom_rejected,
        }),
    )
}

/// Criterion 9: dispatch law of the mixed strategy and density of squares.
pub fn mixed_strategies(seed: u64) -> Result<CriterionReport> {
    let mixed = MixedStrategy::new(TargetLaw::two_point(), crate::strategies::mixed::DEFAULT_NOISE_BITS, 12)?;
    let exact = mixed.dispatch_probabilities();
    let exact_ok = exact == vec![Rational::half(), Rational::half()];
    let dispatches = 10_000u64;
    let last = noise_player(u64::from(mixed.noise_bits()));
    let mut counts = [0u64; 2];
    for r in 0..dispatches {
        let mut rng = RandomSource::for_run(seed, r);
        let hats = rng.fill_bits(last as usize);
        let noise: Vec<u8> = (1..=u64::from(mixed.noise_bits())).map(|j| hats[(noise_player(j) - 1) as usize]).collect();
        counts[mixed_strategy_dispatch(&noise, &mixed)?.0] += 1;
    }
    let freq: Vec<Proportion> = counts.iter().map(|&c| Proportion { successes: c, trials: dispatches }).collect();
    let dispatch_ok = freq.iter().all(|p| p.matches(0.5, 0.02));
    let n = 1_000_000u64;
    let inactive = (1..=n).filter(|&p| is_inactive(p)).count() as u64;
    let density_ok = inactive <= isqrt(n) && inactive * inactive <= n;
    let point = MixedStrategy::new(TargetLaw::point(Rational::half(), Rational::half()), 53, 4)?;
    let point_ok = point.arms() == [Strategy::Pairs];
    let ok = exact_ok && dispatch_ok && density_ok && point_ok;
    report(
        9,
        "mixed strategies",
        ok,
        format!("{dispatches} dispatches within 1/2 +- 0.02; {inactive} squares up to {n}"),
        json!({
            "exact_dispatch": exact.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "frequencies": freq,
            "inactive_up_to_1e6": inactive,
            "point_mass_dispatches_pairs": point_ok,
        }),
    )
}

/// Simulated-run helper used by the suites.
trait CountAt {
    fn trajectory_count(&self, k: u64) -> u64;
}

impl CountAt for crate::montecarlo::SimulatedRun {
    fn trajectory_count(&self, k: u64) -> u64 {
        use crate::model::PrefixCounts;
        self.trajectory.count_at(k).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

pub fn run_suite(suite: Suite, seed: u64, mut on_done: impl FnMut(&CriterionReport, std::time::Duration)) -> Result<SuiteReport> {
    let mut criteria = Vec::new();
    for &id in suite.criteria() {
        let t = std::time::Instant::now();
        let r = run_criterion(id, seed)?;
        on_done(&r, t.elapsed());
        criteria.push(r);
    }
    let passed = criteria.iter().all(|c| c.passed);
    Ok(SuiteReport { schema_version: SUITE_SCHEMA_VERSION, suite, seed, criteria, passed })
}
