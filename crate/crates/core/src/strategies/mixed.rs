//! Mixed strategies: square-numbered players are inactive and their hats
//! choose which `(L0, U0)` target the active players aim for.
//!
//! The first `B` inactive hats are read as the binary expansion
//! `V = sum_j bit_j 2^-j` of a dyadic uniform variate. The atom dispatched is
//! the first whose cumulative weight exceeds `V` (inverse CDF of the atom
//! order). Discretization error against the target law is at most `2^-B`
//! per atom. Active players re-index themselves `1, 2, 3, ...` skipping the
//! squares and play the alternating team strategy for the chosen targets, or
//! pairs for `(1/2, 1/2)`. Inactive players guess black.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::Color;
use crate::plan::generate_plan_for_targets;
use crate::rational::Rational;

use super::team::TeamStrategy;
use super::{HatView, Private, Strategy, Window};

pub const DEFAULT_NOISE_BITS: u32 = 53;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lower: Rational,
    pub upper: Rational,
    pub weight: Rational,
}

/// A finitely supported law on `[0, 1/2] x [1/2, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetLaw {
    pub atoms: Vec<Atom>,
}

impl TargetLaw {
    pub fn point(lower: Rational, upper: Rational) -> Self {
        TargetLaw { atoms: vec![Atom { lower, upper, weight: Rational::one() }] }
    }

    /// Uniform on `{(0, 1), (1/2, 1/2)}`.
    pub fn two_point() -> Self {
        let w = Rational::half();
        TargetLaw {
            atoms: vec![
                Atom { lower: Rational::zero(), upper: Rational::one(), weight: w.clone() },
                Atom { lower: Rational::half(), upper: Rational::half(), weight: w },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(invalid("target law has no atoms"));
        }
        let half = Rational::half();
        for a in &self.atoms {
            if a.lower.is_negative() || a.lower > half || a.upper < half || a.upper > Rational::one() {
                return Err(invalid(format!(
                    "atom ({}, {}) lies outside [0,1/2] x [1/2,1]",
                    a.lower, a.upper
                )));
            }
            if a.weight.is_negative() {
                return Err(invalid("negative atom weight"));
            }
        }
        let total: Rational = self.atoms.iter().map(|a| a.weight.clone()).sum();
        if total != Rational::one() {
            return Err(invalid(format!("atom weights sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Number of perfect squares `<= p`.
pub fn isqrt(p: u64) -> u64 {
    let mut r = (p as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > p) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= p) {
        r += 1;
    }
    r
}

pub fn is_inactive(player: u64) -> bool {
    let r = isqrt(player);
    r * r == player
}

/// Active index of a non-square player.
pub fn active_index(player: u64) -> u64 {
    player - isqrt(player)
}

/// Player number of the `a`-th active player.
pub fn active_player(a: u64) -> u64 {
    // p - isqrt(p) is non-decreasing and steps by one between squares.
    let mut m = isqrt(a);
    while a + m - isqrt(a + m) < a || is_inactive(a + m) {
        m += 1;
    }
    a + m
}

/// Player number of the `j`-th noise hat.
pub fn noise_player(j: u64) -> u64 {
    j * j
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    law: TargetLaw,
    noise_bits: u32,
    /// Cumulative weights of the atoms in order.
    cumulative: Vec<Rational>,
    arms: Vec<Strategy>,
}

impl MixedStrategy {
    pub fn new(law: TargetLaw, noise_bits: u32, teams: u64) -> Result<Self> {
        law.validate()?;
        if noise_bits == 0 || noise_bits > 62 {
            return Err(invalid("noise bits must be in 1..=62"));
        }
        let mut acc = Rational::zero();
        let mut cumulative = Vec::new();
        let mut arms = Vec::new();
        for a in &law.atoms {
            acc = acc + &a.weight;
            cumulative.push(acc.clone());
            let half = Rational::half();
            arms.push(if a.lower == half && a.upper == half {
                Strategy::Pairs
            } else {
                Strategy::Team(TeamStrategy::new(generate_plan_for_targets(&a.lower, &a.upper, teams)?)?)
            });
        }
        Ok(MixedStrategy { law, noise_bits, cumulative, arms })
    }

    pub fn law(&self) -> &TargetLaw {
        &self.law
    }

    pub fn noise_bits(&self) -> u32 {
        self.noise_bits
    }

    pub fn arms(&self) -> &[Strategy] {
        &self.arms
    }

    /// Last noise player.
    pub fn noise_end(&self) -> u64 {
        noise_player(u64::from(self.noise_bits))
    }

    /// Exact probability that each atom is dispatched under fair noise bits.
    pub fn dispatch_probabilities(&self) -> Vec<Rational> {
        let scale = BigInt::one() << self.noise_bits;
        let scale_q = Rational::integer(scale.clone());
        let mut prev = BigInt::zero();
        self.cumulative
            .iter()
            .map(|c| {
                // Grid points V = m / 2^B with V < c, i.e. m < c 2^B.
                let upto = (c * &scale_q).ceil();
                let p = Rational::new(&upto - &prev, scale.clone()).expect("positive scale");
                prev = upto;
                p
            })
            .collect()
    }

    /// Window of player `p`: the noise hats plus the mapped window of every arm.
    pub fn window(&self, player: u64) -> Result<Window> {
        if is_inactive(player) {
            return Ok(Window::empty());
        }
        let a = active_index(player);
        let mut ranges: Vec<(u64, u64)> =
            (1..=u64::from(self.noise_bits)).map(noise_player).map(|q| (q, q)).collect();
        for arm in &self.arms {
            for (lo, hi) in arm.window(a)?.ranges() {
                for b in *lo..=*hi {
                    let q = active_player(b);
                    ranges.push((q, q));
                }
            }
        }
        Ok(Window::from_ranges(ranges, player))
    }

    pub fn horizon(&self, n: u64) -> Result<u64> {
        let actives = n - isqrt(n);
        let mut h = n.max(self.noise_end());
        if actives > 0 {
            for arm in &self.arms {
                h = h.max(active_player(arm.horizon(actives)?));
            }
        }
        Ok(h)
    }

    pub fn guess(&self, player: u64, view: &dyn HatView) -> Result<Color> {
        if is_inactive(player) {
            return Ok(Color::BLACK);
        }
        let bits: Vec<u8> = (1..=u64::from(self.noise_bits))
            .map(|j| view.bit(noise_player(j)))
            .collect::<Result<_>>()?;
        let (arm, _) = mixed_strategy_dispatch(&bits, self)?;
        let active = ActiveView { inner: view };
        self.arms[arm].guess(active_index(player), &active)
    }

    /// Guesses of players `1..=n` from binary hats covering the horizon.
    pub fn bulk(&self, bits: &[u8], n: u64, private: Private<'_>) -> Result<Vec<u8>> {
        let noise: Vec<u8> = (1..=u64::from(self.noise_bits))
            .map(|j| {
                let p = noise_player(j);
                bits.get((p - 1) as usize).copied().ok_or(Error::Horizon { player: p, limit: bits.len() as u64 })
            })
            .collect::<Result<_>>()?;
        let (arm, _) = mixed_strategy_dispatch(&noise, self)?;
        let actives = n - isqrt(n);
        let mut active_bits = Vec::new();
        for (i, &b) in bits.iter().enumerate() {
            if !is_inactive(i as u64 + 1) {
                active_bits.push(b);
            }
        }
        let sub = if actives > 0 { self.arms[arm].bulk_bits(&active_bits, actives, private)? } else { Vec::new() };
        let mut out = Vec::with_capacity(n as usize);
        let mut next = sub.into_iter();
        for p in 1..=n {
            if is_inactive(p) {
                out.push(0);
            } else {
                out.push(next.next().expect("one guess per active player"));
            }
        }
        Ok(out)
    }
}
/// Hats of active players re-indexed by the positive integers.
struct ActiveView<'a> {
    inner: &'a dyn HatView,
}

impl HatView for ActiveView<'_> {
    fn color(&self, player: u64) -> Result<Color> {
        self.inner.color(active_player(player))
    }

    fn bit(&self, player: u64) -> Result<u8> {
        self.inner.bit(active_player(player))
    }

    fn private(&self) -> Private<'_> {
        self.inner.private()
    }
}

/// Map noise bits to the dispatched atom: `V = sum bit_j 2^-j`, first atom
/// whose cumulative weight exceeds `V`.
pub fn mixed_strategy_dispatch(noise_bits: &[u8], mixed: &MixedStrategy) -> Result<(usize, (Rational, Rational))> {
    if noise_bits.is_empty() {
        return Err(invalid("no noise bits"));
    }
    let mut num = BigInt::zero();
    for &b in noise_bits {
        if b > 1 {
            return Err(Error::ColorSpace("noise hats must be binary".into()));
        }
        num = (num << 1) + BigInt::from(b);
    }
    let v = Rational::new(num, BigInt::one() << noise_bits.len()).expect("positive");
    let idx = mixed
        .cumulative
        .iter()
        .position(|c| v < *c)
        .unwrap_or(mixed.cumulative.len() - 1);
    let atom = &mixed.law.atoms[idx];
    Ok((idx, (atom.lower.clone(), atom.upper.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_bookkeeping() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(u64::MAX), u64::from(u32::MAX));
        let actives: Vec<u64> = (1..=12).map(active_player).collect();
        assert_eq!(actives, vec![2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 14, 15]);
        for p in 1..5000u64 {
            if !is_inactive(p) {
                assert_eq!(active_player(active_index(p)), p);
            }
        }
    }

    #[test]
    fn dispatch_threshold() {
        let m = MixedStrategy::new(TargetLaw::two_point(), 8, 4).unwrap();
        let (idx, (l, u)) = mixed_strategy_dispatch(&[0, 1, 1, 1, 1, 1, 1, 1], &m).unwrap();
        assert_eq!(idx, 0);
        assert_eq!((l, u), (Rational::zero(), Rational::one()));
        let (idx, _) = mixed_strategy_dispatch(&[1, 0, 0, 0, 0, 0, 0, 0], &m).unwrap();
        assert_eq!(idx, 1);
        let p = m.dispatch_probabilities();
        assert_eq!(p, vec![Rational::half(), Rational::half()]);
    }

    #[test]
    fn point_mass_dispatches_pairs() {
        let m = MixedStrategy::new(TargetLaw::point(Rational::half(), Rational::half()), 53, 4).unwrap();
        assert_eq!(m.arms(), &[Strategy::Pairs]);
        let (idx, _) = mixed_strategy_dispatch(&[1; 53], &m).unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn rejects_out_of_range_law() {
        let bad = TargetLaw::point(Rational::frac(3, 4), Rational::one());
        assert!(MixedStrategy::new(bad, 53, 4).is_err());
        let bad = TargetLaw {
            atoms: vec![Atom { lower: Rational::zero(), upper: Rational::one(), weight: Rational::frac(1, 3) }],
        };
        assert!(MixedStrategy::new(bad, 53, 4).is_err());
    }

    #[test]
    fn discretized_probabilities_within_grid() {
        let law = TargetLaw {
            atoms: vec![
                Atom { lower: Rational::zero(), upper: Rational::one(), weight: Rational::frac(1, 3) },
                Atom { lower: Rational::half(), upper: Rational::half(), weight: Rational::frac(2, 3) },
            ],
        };
        let m = MixedStrategy::new(law, 10, 3).unwrap();
        let p = m.dispatch_probabilities();
        let tol = Rational::new(1u64, 1u64 << 10).unwrap();
        let d0 = &p[0] - &Rational::frac(1, 3);
        assert!(d0.clone().max(-d0) <= tol);
        assert_eq!(p.iter().cloned().sum::<Rational>(), Rational::one());
    }
}
