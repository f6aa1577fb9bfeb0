//! Segment engine against the per-player engine, reproducibility and
//! uniformity of the random source.

mod common;

use hats::montecarlo::{density_estimate, simulate, simulate_many, sure_checks, Engine};
use hats::segments::{HatParities, SegmentTrajectory};
use hats::strategies::Private;
use hats::{sample_assignment, ColorSpace, HatAssignment, OutcomeTrajectory, PrefixCounts, RandomSource, Strategy, Tail};
use proptest::prelude::*;

fn segment_capable() -> Vec<(&'static str, Strategy)> {
    common::small_strategies()
        .into_iter()
        .filter(|(_, s)| matches!(s, Strategy::Pairs | Strategy::EvenOdd { .. } | Strategy::Blocks(_) | Strategy::Team(_)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// On the same hats, the segment decomposition reproduces the per-player
    /// prefix counts at every even k, and the events match.
    #[test]
    fn segments_match_players_at_even_k(seed in any::<u64>(), n in 2u64..2500) {
        for (name, s) in segment_capable() {
            let h = s.horizon(n).unwrap();
            let bits = RandomSource::new(seed).fill_bits(h as usize);
            let hats = HatAssignment::binary(bits.clone(), Tail::Unsampled).unwrap();
            let guesses = s.bulk_bits(&bits, n, Private::Seed(0)).unwrap();
            let players = OutcomeTrajectory::new(guesses.iter().zip(&bits).map(|(g, b)| g == b).collect());
            let run = s.segments(n, &mut HatParities(&hats)).unwrap().unwrap();
            let seg = SegmentTrajectory::new(run, n);
            for k in (2..=n).step_by(2) {
                prop_assert_eq!(seg.count_at(k), players.count_at(k), "{} k={}", name, k);
            }
            let k_min = n / 4;
            if k_min >= 2 && k_min < n {
                let a = density_estimate(&seg, k_min, true).unwrap();
                let b = density_estimate(&players, k_min, true).unwrap();
                prop_assert_eq!((a.lower, a.upper), (b.lower, b.upper), "{}", name);
            }
        }
    }
}

#[test]
fn per_player_runs_carry_hat_events() {
    for (name, s) in segment_capable() {
        for run in 0..20 {
            let r = simulate(&s, 2000, 11, run, Engine::Players).unwrap();
            assert!(sure_checks(&s, &r).passed(), "{name} run {run}");
        }
    }
}

#[test]
fn runs_are_reproducible_and_independent_of_threads() {
    let lib = hats::library_strategies().unwrap();
    for (name, s) in &lib {
        let many = simulate_many(s, 3000, 5, 8, Engine::Auto).unwrap();
        for (i, r) in many.iter().enumerate() {
            let single = simulate(s, 3000, 5, i as u64, Engine::Auto).unwrap();
            assert_eq!(&single, r, "{name} run {i}");
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| simulate_many(s, 3000, 5, 8, Engine::Auto).unwrap());
        assert_eq!(serial, many, "{name}");
    }
    let a = simulate(&Strategy::Pairs, 1000, 1, 0, Engine::Players).unwrap();
    let b = simulate(&Strategy::Pairs, 1000, 1, 1, Engine::Players).unwrap();
    assert_ne!(a, b);
}

/// Pearson chi-square against critical values at level 0.001.
fn chi_square(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

#[test]
fn random_source_is_uniform() {
    let mut rng = RandomSource::new(2024);
    let bits = rng.fill_bits(200_000);
    let ones = bits.iter().filter(|&&b| b == 1).count() as u64;
    assert!(chi_square(&[ones, 200_000 - ones]) < 10.83);

    // Adjacent pairs of bits cover the four patterns evenly.
    let mut pairs = [0u64; 4];
    for w in bits.chunks(2) {
        pairs[(w[0] * 2 + w[1]) as usize] += 1;
    }
    assert!(chi_square(&pairs) < 16.27);

    for k in [3u64, 5] {
        let space = ColorSpace::FiniteK { k }.normalized();
        let hats = sample_assignment(&space, 100_000, &mut rng).unwrap();
        let mut counts = vec![0u64; k as usize];
        for p in 1..=100_000 {
            counts[hats.color(p).unwrap().index().unwrap() as usize] += 1;
        }
        let critical = if k == 3 { 13.82 } else { 18.47 };
        assert!(chi_square(&counts) < critical, "K = {k}: {counts:?}");
    }
}

#[test]
fn sampled_segment_runs_are_seeded() {
    let s = hats::StrategySpec::preset("team-3/4", None).unwrap().build().unwrap();
    let a = simulate(&s, 1_000_000_000, 9, 3, Engine::Segments).unwrap();
    let b = simulate(&s, 1_000_000_000, 9, 3, Engine::Segments).unwrap();
    assert_eq!(a, b);
    assert!(sure_checks(&s, &a).passed());
}
