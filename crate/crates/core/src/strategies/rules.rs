//! Guess rules as pure functions of the hats a player can see.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Parity of the visible white hats: the guess of a player who assumes the
/// group's total white count is even.
pub fn even_odd_guess(visible: &[u8]) -> u8 {
    visible.iter().fold(0u8, |acc, &b| acc ^ (b & 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSeat {
    /// Player `2j - 1` of a pair; guesses the partner's color.
    First,
    /// Player `2j`; guesses the opposite of the partner's color.
    Second,
}

/// `X_{2j-1} = ξ_{2j}`, `X_{2j} = 1 - ξ_{2j-1}`.
pub fn pairs_guess(seat: PairSeat, partner: u8) -> u8 {
    match seat {
        PairSeat::First => partner,
        PairSeat::Second => 1 - partner,
    }
}

/// Seat of a player at 1-based position `pos` inside a run of pairs.
pub fn pair_seat(pos: u64) -> PairSeat {
    if pos % 2 == 1 {
        PairSeat::First
    } else {
        PairSeat::Second
    }
}

/// The color that makes the group total congruent to `residue` mod `k`.
pub fn mod_k_sum_guess(k: u64, residue: u64, visible: &[u64]) -> Result<u64> {
    if k < 2 {
        return Err(invalid("mod-K strategies need K >= 2"));
    }
    let seen = visible.iter().fold(0u64, |acc, &c| (acc + c % k) % k);
    Ok((residue % k + k - seen) % k)
}

/// Member `member` (1-based) of a group of `k` assumes the total is `member - 1` mod `k`.
pub fn mod_k_groups_guess(k: u64, member: u64, visible: &[u64]) -> Result<u64> {
    if member == 0 || member > k {
        return Err(invalid(format!("member {member} outside a group of {k}")));
    }
    if visible.len() as u64 + 1 != k {
        return Err(invalid(format!("group size {} != K = {k}", visible.len() + 1)));
    }
    mod_k_sum_guess(k, member - 1, visible)
}

/// A uniform guess in `0..k_i`, using the player's private randomness.
pub fn countable_color_guess<R: Rng>(k_i: u64, rng: &mut R) -> Result<u64> {
    if k_i < 2 {
        return Err(invalid(format!("K_i = {k_i} must be at least 2")));
    }
    Ok(rng.random_range(0..k_i))
}

/// A law on the nonnegative integers that charges every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum PositiveLaw {
    Poisson { lambda: f64 },
    /// `P(j) = (1 - q) q^j`.
    Geometric { q: f64 },
}

impl PositiveLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            PositiveLaw::Poisson { lambda } if lambda.is_finite() && *lambda > 0.0 => Ok(()),
            PositiveLaw::Geometric { q } if *q > 0.0 && *q < 1.0 => Ok(()),
            other => Err(invalid(format!("{other:?} does not charge every nonnegative integer"))),
        }
    }
}

pub fn positive_support_guess<R: Rng>(law: &PositiveLaw, rng: &mut R) -> Result<u64> {
    law.validate()?;
    Ok(match law {
        PositiveLaw::Poisson { lambda } => {
            let d = Poisson::new(*lambda).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            d.sample(rng) as u64
        }
        PositiveLaw::Geometric { q } => {
            let mut j = 0u64;
            while rng.random::<f64>() < *q {
                j += 1;
            }
            j
        }
    })
}

/// Deterministic guess rules for continuum colors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ContinuumRule {
    /// Mean of the first `count` hats the player sees.
    MeanOfVisible { count: usize },
    Constant { value: f64 },
}

impl Default for ContinuumRule {
    fn default() -> Self {
        ContinuumRule::MeanOfVisible { count: 10 }
    }
}

pub fn continuum_guess(rule: &ContinuumRule, visible: &[f64]) -> f64 {
    match rule {
        ContinuumRule::MeanOfVisible { .. } => {
            if visible.is_empty() {
                0.5
            } else {
                visible.iter().sum::<f64>() / visible.len() as f64
            }
        }
        ContinuumRule::Constant { value } => *value,
    }
}

/// Law of continuum hats. Only atomless laws are admissible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ContinuumLaw {
    Uniform,
    PointMass { at: f64 },
}

impl ContinuumLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ContinuumLaw::Uniform => Ok(()),
            ContinuumLaw::PointMass { at } => {
                Err(invalid(format!("hat law must be atomless; point mass at {at} rejected")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_odd_examples() {
        // (0,0): both see 0 and are correct.
        assert_eq!([even_odd_guess(&[0]), even_odd_guess(&[0])], [0, 0]);
        // (1,0): guesses (0,1), both wrong.
        assert_eq!([even_odd_guess(&[0]), even_odd_guess(&[1])], [0, 1]);
        // (1,1,0): guesses (1,1,0), all correct.
        assert_eq!(
            [even_odd_guess(&[1, 0]), even_odd_guess(&[1, 0]), even_odd_guess(&[1, 1])],
            [1, 1, 0]
        );
    }

    #[test]
    fn pairs_examples() {
        // (0,0) -> (0,1): first right, second wrong.
        assert_eq!([pairs_guess(PairSeat::First, 0), pairs_guess(PairSeat::Second, 0)], [0, 1]);
        // (0,1) -> (1,1): first wrong, second right.
        assert_eq!([pairs_guess(PairSeat::First, 1), pairs_guess(PairSeat::Second, 0)], [1, 1]);
    }

    #[test]
    fn mod_k_examples() {
        assert_eq!(mod_k_sum_guess(3, 0, &[2]).unwrap(), 1);
        assert_eq!(mod_k_sum_guess(3, 0, &[1]).unwrap(), 2);
        assert!(mod_k_sum_guess(1, 0, &[]).is_err());
        for bits in 0u64..8 {
            let v = [bits & 1, (bits >> 1) & 1, (bits >> 2) & 1];
            let as_u8: Vec<u8> = v.iter().map(|&x| x as u8).collect();
            assert_eq!(mod_k_sum_guess(2, 0, &v).unwrap() as u8, even_odd_guess(&as_u8));
        }
        // Hats (2,2,2): sum 6 = 0 mod 3, so only member 1 is right.
        let hats = [2u64, 2, 2];
        let correct: Vec<bool> = (1..=3u64)
            .map(|m| {
                let others: Vec<u64> =
                    hats.iter().enumerate().filter(|(i, _)| *i as u64 + 1 != m).map(|(_, &c)| c).collect();
                mod_k_groups_guess(3, m, &others).unwrap() == hats[(m - 1) as usize]
            })
            .collect();
        assert_eq!(correct, vec![true, false, false]);
        assert!(mod_k_groups_guess(3, 1, &[0]).is_err());
    }

    #[test]
    fn continuum_law_must_be_atomless() {
        assert!(ContinuumLaw::Uniform.validate().is_ok());
        assert!(ContinuumLaw::PointMass { at: 0.3 }.validate().is_err());
    }

    #[test]
    fn positive_laws() {
        assert!(PositiveLaw::Poisson { lambda: 0.0 }.validate().is_err());
        assert!(PositiveLaw::Geometric { q: 1.0 }.validate().is_err());
        assert!(PositiveLaw::Poisson { lambda: 1.0 }.validate().is_ok());
    }
}
