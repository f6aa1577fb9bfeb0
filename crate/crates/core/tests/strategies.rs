//! Window soundness, fast path against reference path, and truncation.

mod common;

use hats::strategies::{Private, View};
use hats::{HatAssignment, RandomSource, Strategy, Tail};
use proptest::prelude::*;

fn binary(bits: Vec<u8>) -> HatAssignment {
    HatAssignment::binary(bits, Tail::Unsampled).unwrap()
}

fn guess_bit(s: &Strategy, player: u64, bits: &[u8], private: u64) -> u8 {
    let hats = binary(bits.to_vec());
    let view = View::new(&hats, Private::Seed(private));
    s.guess(player, &view).unwrap().index().unwrap() as u8
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Changing hats outside a player's window, including the player's own
    /// hat, never changes that player's guess.
    #[test]
    fn guesses_read_only_their_window(seed in any::<u64>(), player in 1u64..200, flips in proptest::collection::vec(any::<u64>(), 1..40)) {
        for (name, s) in common::small_strategies() {
            let h = s.horizon(player).unwrap();
            let mut bits = RandomSource::new(seed).fill_bits(h as usize + 50);
            let window = s.window(player).unwrap();
            prop_assert!(!window.contains(player), "{name} window contains its player");
            prop_assert!(window.max().is_none_or(|m| m <= h), "{name} window beyond horizon");
            let before = guess_bit(&s, player, &bits, seed);
            for f in &flips {
                let q = f % bits.len() as u64 + 1;
                if !window.contains(q) {
                    bits[q as usize - 1] ^= 1;
                }
            }
            bits[player as usize - 1] ^= 1;
            prop_assert_eq!(before, guess_bit(&s, player, &bits, seed), "{} player {}", name, player);
        }
    }

    /// The bulk fast path agrees with the per-player reference path.
    #[test]
    fn bulk_matches_reference(seed in any::<u64>(), n in 1u64..400) {
        for (name, s) in common::small_strategies() {
            let h = s.horizon(n).unwrap();
            let bits = RandomSource::new(seed).fill_bits(h as usize);
            let fast = s.bulk_bits(&bits, n, Private::Seed(seed ^ 1)).unwrap();
            let slow: Vec<u8> = (1..=n).map(|p| guess_bit(&s, p, &bits, seed ^ 1)).collect();
            prop_assert_eq!(fast, slow, "{}", name);

            let coins = RandomSource::new(!seed).fill_bits(n as usize);
            let fast = s.bulk_bits(&bits, n, Private::Coins(&coins)).unwrap();
            let hats = binary(bits.clone());
            let view = View::new(&hats, Private::Coins(&coins));
            let slow: Vec<u8> = (1..=n).map(|p| s.guess(p, &view).unwrap().index().unwrap() as u8).collect();
            prop_assert_eq!(fast, slow, "{} with coins", name);
        }
    }
}

/// Guesses of players up to N depend only on hats up to the horizon H(N):
/// extending the hat sequence beyond it changes nothing.
#[test]
fn truncation_is_exact_at_one_thousand() {
    let n = 1000;
    for (name, s) in common::small_strategies() {
        let h = s.horizon(n).unwrap() as usize;
        let long = RandomSource::new(7).fill_bits(h + 5000);
        let short = long[..h].to_vec();
        let a = s.guesses(&binary(long), n, Private::Seed(3)).unwrap();
        let b = s.guesses(&binary(short.clone()), n, Private::Seed(3)).unwrap();
        assert_eq!(a, b, "{name}");
        // Fewer hats either fail the horizon guard or give the same guesses.
        if let Ok(c) = s.guesses(&binary(short[..h - 1].to_vec()), n, Private::Seed(3)) {
            assert_eq!(c, a, "{name}");
        }
    }
}

#[test]
fn library_presets_sound_on_prefix() {
    for (name, s) in hats::library_strategies().unwrap() {
        for p in 1..=60u64 {
            let w = s.window(p).unwrap();
            assert!(!w.contains(p), "{name} player {p}");
        }
    }
}
