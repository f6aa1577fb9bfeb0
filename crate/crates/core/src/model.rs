//! Hat spaces, assignments, outcome trajectories and the randomness contract.
//!
//! Players are numbered from 1. A [`HatAssignment`] holds the colors of a
//! finite prefix of players together with an explicit tail convention: either
//! the remaining hats were never sampled, or they are all black (color 0), the
//! convention used by adversarial searches over finite prefixes.

use std::cmp::Ordering;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::{cmp_fractions, Rational};

/// Number of colors available to player `i` in a countable color space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum KSchedule {
    /// `K_i = 2^(i + offset)`.
    PowerOfTwo { offset: u32 },
    /// `K_i = ceil(2^(i+1) / epsilon)`, so that `sum 1/K_i <= epsilon / 2`.
    UnionBound { epsilon: Rational },
    /// Explicit values for players `1..=len`.
    Explicit { values: Vec<u64> },
}

impl KSchedule {
    pub fn colors_for(&self, player: u64) -> Result<u64> {
        if player == 0 {
            return Err(invalid("players are numbered from 1"));
        }
        let k = match self {
            KSchedule::PowerOfTwo { offset } => {
                let exp = player
                    .checked_add(u64::from(*offset))
                    .ok_or(Error::Overflow("K_i exponent"))?;
                if exp >= 64 {
                    return Err(Error::Overflow("K_i = 2^(i+offset)"));
                }
                1u64 << exp
            }
            KSchedule::UnionBound { epsilon } => {
                if epsilon.is_negative() || epsilon.is_zero() {
                    return Err(invalid("union-bound epsilon must be positive"));
                }
                if player + 1 >= 127 {
                    return Err(Error::Overflow("K_i = ceil(2^(i+1)/eps)"));
                }
                let pow = Rational::integer(num_bigint::BigInt::from(1u128 << (player + 1)));
                (&pow / epsilon).ceil().try_into().map_err(|_| Error::Overflow("K_i"))?
            }
            KSchedule::Explicit { values } => *values
                .get((player - 1) as usize)
                .ok_or(Error::Horizon { player, limit: values.len() as u64 })?,
        };
        if k < 2 {
            return Err(invalid(format!("K_{player} = {k} must be at least 2")));
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColorSpace {
    Binary,
    FiniteK { k: u64 },
    CountablePerPlayer { schedule: KSchedule },
    Continuum,
}

impl ColorSpace {
    /// Binary and `FiniteK(2)` are the same space.
    pub fn normalized(&self) -> ColorSpace {
        match self {
            ColorSpace::FiniteK { k: 2 } => ColorSpace::Binary,
            other => other.clone(),
        }
    }

    pub fn same_as(&self, other: &ColorSpace) -> bool {
        self.normalized() == other.normalized()
    }

    /// Number of colors for player `i`, `None` for the continuum.
    pub fn colors_for(&self, player: u64) -> Result<Option<u64>> {
        match self {
            ColorSpace::Binary => Ok(Some(2)),
            ColorSpace::FiniteK { k } => {
                if *k < 2 {
                    return Err(invalid("FiniteK requires K >= 2"));
                }
                Ok(Some(*k))
            }
            ColorSpace::CountablePerPlayer { schedule } => schedule.colors_for(player).map(Some),
            ColorSpace::Continuum => Ok(None),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ColorSpace::Binary | ColorSpace::FiniteK { .. })
    }
}

/// A single hat color or guess. `0` is black and `1` is white in the binary game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Color {
    Index(u64),
    Real(f64),
}

impl Color {
    pub const BLACK: Color = Color::Index(0);
    pub const WHITE: Color = Color::Index(1);

    pub fn index(self) -> Option<u64> {
        match self {
            Color::Index(i) => Some(i),
            Color::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Unsampled,
    ConstantBlack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colors {
    Bits(Vec<u8>),
    Indexed(Vec<u64>),
    Real(Vec<f64>),
}

/// Colors of players `1..=N` plus a tail convention for everyone after `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HatAssignment {
    space: ColorSpace,
    colors: Colors,
    tail: Tail,
}

impl HatAssignment {
    pub fn binary(bits: Vec<u8>, tail: Tail) -> Result<Self> {
        if bits.is_empty() {
            return Err(invalid("hat assignment needs at least one player"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::ColorSpace("binary hats must be 0 or 1".into()));
        }
        Ok(HatAssignment { space: ColorSpace::Binary, colors: Colors::Bits(bits), tail })
    }

    pub fn from_colors(space: ColorSpace, colors: Vec<Color>, tail: Tail) -> Result<Self> {
        if colors.is_empty() {
            return Err(invalid("hat assignment needs at least one player"));
        }
        if tail == Tail::ConstantBlack && !space.is_finite() {
            return Err(Error::ColorSpace("a black tail requires a finite color space".into()));
        }
        let space = space.normalized();
        let colors = match &space {
            ColorSpace::Binary => Colors::Bits(
                colors
                    .iter()
                    .map(|c| match c {
                        Color::Index(v @ (0 | 1)) => Ok(*v as u8),
                        other => Err(Error::ColorSpace(format!("{other:?} is not binary"))),
                    })
                    .collect::<Result<_>>()?,
            ),
            ColorSpace::Continuum => Colors::Real(
                colors
                    .iter()
                    .map(|c| match c {
                        Color::Real(x) if (0.0..=1.0).contains(x) => Ok(*x),
                        other => Err(Error::ColorSpace(format!("{other:?} is not in [0,1]"))),
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => {
                let mut out = Vec::with_capacity(colors.len());
                for (i, c) in colors.iter().enumerate() {
                    let k = space.colors_for(i as u64 + 1)?.expect("finite or countable");
                    match c {
                        Color::Index(v) if *v < k => out.push(*v),
                        other => {
                            return Err(Error::ColorSpace(format!(
                                "{other:?} invalid for player {} with {k} colors",
                                i + 1
                            )))
                        }
                    }
                }
                Colors::Indexed(out)
            }
        };
        Ok(HatAssignment { space, colors, tail })
    }

    pub fn space(&self) -> &ColorSpace {
        &self.space
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn len(&self) -> u64 {
        match &self.colors {
            Colors::Bits(v) => v.len() as u64,
            Colors::Indexed(v) => v.len() as u64,
            Colors::Real(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn colors(&self) -> &Colors {
        &self.colors
    }

    /// Binary prefix, if this is a binary assignment.
    pub fn bits(&self) -> Option<&[u8]> {
        match &self.colors {
            Colors::Bits(v) => Some(v),
            _ => None,
        }
    }

    pub fn color(&self, player: u64) -> Result<Color> {
        if player == 0 {
            return Err(invalid("players are numbered from 1"));
        }
        let idx = (player - 1) as usize;
        if player > self.len() {
            return match self.tail {
                Tail::ConstantBlack => Ok(Color::BLACK),
                Tail::Unsampled => Err(Error::Horizon { player, limit: self.len() }),
            };
        }
        Ok(match &self.colors {
            Colors::Bits(v) => Color::Index(u64::from(v[idx])),
            Colors::Indexed(v) => Color::Index(v[idx]),
            Colors::Real(v) => Color::Real(v[idx]),
        })
    }

    /// Hat bit of `player` for binary assignments.
    pub fn bit(&self, player: u64) -> Result<u8> {
        let bits = self.bits().ok_or_else(|| Error::ColorSpace("not a binary assignment".into()))?;
        if player == 0 {
            return Err(invalid("players are numbered from 1"));
        }
        match bits.get((player - 1) as usize) {
            Some(b) => Ok(*b),
            None if self.tail == Tail::ConstantBlack => Ok(0),
            None => Err(Error::Horizon { player, limit: bits.len() as u64 }),
        }
    }
}

/// Seeded deterministic pseudorandom stream (ChaCha8).
///
/// A run `r` of an experiment seeded with `s` draws its hats from ChaCha8
/// keyed by `s` on stream `2r`; the private randomness of randomized guess
/// rules is keyed by a seed drawn from stream `2r + 1`. Streams never overlap,
/// so runs are independent and reproducible across machines.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, rng }
    }

    /// Hat stream of run `run`.
    pub fn for_run(seed: u64, run: u64) -> Self {
        Self::with_stream(seed, run.wrapping_mul(2))
    }

    /// Seed for the private (non-hat) randomness of run `run`.
    pub fn private_seed(seed: u64, run: u64) -> u64 {
        Self::with_stream(seed, run.wrapping_mul(2).wrapping_add(1)).next_u64()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u64() >> 63) as u8
    }

    /// Uniform on `0..k`.
    pub fn below(&mut self, k: u64) -> u64 {
        self.rng.random_range(0..k)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `n` fair bits, 64 per word, least significant bit first.
    pub fn fill_bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let word = self.rng.next_u64();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|j| ((word >> j) & 1) as u8));
        }
        out
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Private per-player randomness for randomized guess rules.
pub fn private_rng(private_seed: u64, player: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(private_seed);
    rng.set_stream(player);
    rng
}

/// Sample colors for players `1..=n` with an unsampled tail.
///
/// Binary hats are fair coins, finite colors are uniform, countable colors
/// are uniform on `0..K_i`, continuum colors are uniform on `[0, 1)`.
pub fn sample_assignment(space: &ColorSpace, n: u64, rng: &mut RandomSource) -> Result<HatAssignment> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let space = space.normalized();
    let len = usize::try_from(n).map_err(|_| Error::Overflow("N"))?;
    let colors = match &space {
        ColorSpace::Binary => Colors::Bits(rng.fill_bits(len)),
        ColorSpace::FiniteK { k } => {
            if *k < 2 {
                return Err(invalid("FiniteK requires K >= 2"));
            }
            Colors::Indexed((0..len).map(|_| rng.below(*k)).collect())
        }
        ColorSpace::CountablePerPlayer { schedule } => {
            let mut v = Vec::with_capacity(len);
            for i in 1..=n {
                let k = schedule.colors_for(i)?;
                v.push(rng.below(k));
            }
            Colors::Indexed(v)
        }
        ColorSpace::Continuum => Colors::Real((0..len).map(|_| rng.unit()).collect()),
    };
    Ok(HatAssignment { space, colors, tail: Tail::Unsampled })
}

/// Correctness bits `Z_1..Z_N` of one run, with prefix counts.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTrajectory {
    correct: Vec<bool>,
    cumulative: Vec<u64>,
    checkpoints: Vec<Checkpoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: u64,
    pub count: u64,
}

impl Checkpoint {
    pub fn mean(&self) -> Rational {
        Rational::frac(self.count as i64, self.k as i64)
    }
}

impl OutcomeTrajectory {
    pub fn new(correct: Vec<bool>) -> Self {
        let mut cumulative = Vec::with_capacity(correct.len() + 1);
        let mut acc = 0u64;
        cumulative.push(0);
        for &z in &correct {
            acc += u64::from(z);
            cumulative.push(acc);
        }
        OutcomeTrajectory { correct, cumulative, checkpoints: Vec::new() }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self::new(bits.iter().map(|&b| b != 0).collect())
    }

    pub fn len(&self) -> u64 {
        self.correct.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.correct.is_empty()
    }

    pub fn correct(&self) -> &[bool] {
        &self.correct
    }

    /// Number of correct guesses among players `1..=k`.
    pub fn prefix_count(&self, k: u64) -> Result<u64> {
        if k == 0 || k > self.len() {
            return Err(Error::OutOfRange { index: k, len: self.len() });
        }
        Ok(self.cumulative[k as usize])
    }

    /// Record `Z̄_k` at the given indices (out-of-range indices are skipped).
    pub fn with_checkpoints(mut self, ks: impl IntoIterator<Item = u64>) -> Self {
        let mut ks: Vec<u64> = ks.into_iter().filter(|&k| k >= 1 && k <= self.len()).collect();
        ks.sort_unstable();
        ks.dedup();
        self.checkpoints =
            ks.into_iter().map(|k| Checkpoint { k, count: self.cumulative[k as usize] }).collect();
        self
    }

    pub fn checkpoints(&self) -> &[Checkpoint] {
        &self.checkpoints
    }
}

/// Exact `Z̄_k = (Z_1 + ... + Z_k) / k`.
pub fn prefix_mean(traj: &OutcomeTrajectory, k: u64) -> Result<Rational> {
    let count = traj.prefix_count(k)?;
    Ok(Rational::new(count, k).expect("k >= 1"))
}

/// A prefix mean `count / k` attained at `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extreme {
    pub k: u64,
    pub count: u64,
}

impl Extreme {
    pub fn mean(&self) -> Rational {
        Rational::new(self.count, self.k).expect("k >= 1")
    }

    pub fn to_f64(&self) -> f64 {
        self.count as f64 / self.k as f64
    }

    pub fn cmp_mean(&self, other: &Extreme) -> Ordering {
        cmp_fractions(self.count, self.k, other.count, other.k)
    }
}

/// Anything that can report `Z̄_k` exactly for (at least) every even `k`.
pub trait PrefixCounts {
    fn horizon(&self) -> u64;

    /// Correct guesses among `1..=k`, `None` when not determined at `k`.
    fn count_at(&self, k: u64) -> Option<u64>;

    /// Minimum and maximum of `Z̄_k` over `k_min <= k <= k_max`, restricted
    /// to even `k` when `even_only`.
    fn extremes(&self, k_min: u64, k_max: u64, even_only: bool) -> Option<(Extreme, Extreme)>;
}

impl PrefixCounts for OutcomeTrajectory {
    fn horizon(&self) -> u64 {
        self.len()
    }

    fn count_at(&self, k: u64) -> Option<u64> {
        self.prefix_count(k).ok()
    }

    fn extremes(&self, k_min: u64, k_max: u64, even_only: bool) -> Option<(Extreme, Extreme)> {
        let lo = k_min.max(1);
        let hi = k_max.min(self.len());
        let mut best: Option<(Extreme, Extreme)> = None;
        let mut k = lo;
        if even_only && k % 2 == 1 {
            k += 1;
        }
        let step = if even_only { 2 } else { 1 };
        while k <= hi {
            let e = Extreme { k, count: self.cumulative[k as usize] };
            best = Some(match best {
                None => (e, e),
                Some((mn, mx)) => (
                    if e.cmp_mean(&mn) == Ordering::Less { e } else { mn },
                    if e.cmp_mean(&mx) == Ordering::Greater { e } else { mx },
                ),
            });
            k += step;
        }
        best
    }
}

/// Finite-window proxies for the lower and upper asymptotic densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub lower: Rational,
    pub upper: Rational,
    pub lower_at: u64,
    pub upper_at: u64,
    pub window: (u64, u64),
}

impl DensityEstimate {
    pub fn from_extremes(min: Extreme, max: Extreme, window: (u64, u64)) -> Self {
        DensityEstimate {
            lower: min.mean(),
            upper: max.mean(),
            lower_at: min.k,
            upper_at: max.k,
            window,
        }
    }

    pub fn lower_f64(&self) -> f64 {
        self.lower.to_f64()
    }

    pub fn upper_f64(&self) -> f64 {
        self.upper.to_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_mean_examples() {
        let t = OutcomeTrajectory::from_bits(&[1, 0, 1, 0]);
        assert_eq!(prefix_mean(&t, 4).unwrap(), Rational::half());
        let t = OutcomeTrajectory::from_bits(&[1, 1, 1]);
        assert_eq!(prefix_mean(&t, 3).unwrap(), Rational::one());
        let t = OutcomeTrajectory::from_bits(&[0, 0]);
        assert_eq!(prefix_mean(&t, 1).unwrap(), Rational::zero());
        assert!(prefix_mean(&t, 0).is_err());
        assert!(prefix_mean(&t, 3).is_err());
    }

    #[test]
    fn sample_rejects_empty() {
        let mut rng = RandomSource::new(1);
        assert!(sample_assignment(&ColorSpace::Binary, 0, &mut rng).is_err());
    }

    #[test]
    fn binary_coordinate_is_fair() {
        let mut ones = 0u32;
        let draws = 100_000;
        let mut rng = RandomSource::new(11);
        for _ in 0..draws {
            let a = sample_assignment(&ColorSpace::Binary, 4, &mut rng).unwrap();
            assert_eq!(a.len(), 4);
            ones += u32::from(a.bit(1).unwrap());
        }
        let mean = f64::from(ones) / f64::from(draws);
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn three_colors_are_uniform() {
        let mut counts = [0u32; 3];
        let draws = 100_000;
        let mut rng = RandomSource::new(12);
        for _ in 0..draws {
            let a = sample_assignment(&ColorSpace::FiniteK { k: 3 }, 2, &mut rng).unwrap();
            for p in 1..=2 {
                let c = a.color(p).unwrap().index().unwrap();
                assert!(c < 3);
                if p == 1 {
                    counts[c as usize] += 1;
                }
            }
        }
        for c in counts {
            let f = f64::from(c) / f64::from(draws);
            assert!((f - 1.0 / 3.0).abs() < 0.01, "freq {f}");
        }
    }

    #[test]
    fn countable_colors_respect_k_i() {
        let space = ColorSpace::CountablePerPlayer { schedule: KSchedule::PowerOfTwo { offset: 4 } };
        let mut rng = RandomSource::new(13);
        let mut max_seen = [0u64; 3];
        for _ in 0..20_000 {
            let a = sample_assignment(&space, 3, &mut rng).unwrap();
            for i in 1..=3u64 {
                let c = a.color(i).unwrap().index().unwrap();
                assert!(c < 1 << (i + 4));
                max_seen[(i - 1) as usize] = max_seen[(i - 1) as usize].max(c);
            }
        }
        // The top of each range is reached, so the draws are not stuck low.
        for i in 0..3 {
            assert!(max_seen[i] >= (1u64 << (i + 5)) * 9 / 10);
        }
    }

    #[test]
    fn tail_conventions() {
        let a = HatAssignment::binary(vec![1, 1], Tail::ConstantBlack).unwrap();
        assert_eq!(a.bit(5).unwrap(), 0);
        let b = HatAssignment::binary(vec![1, 1], Tail::Unsampled).unwrap();
        assert!(matches!(b.bit(5), Err(Error::Horizon { .. })));
        assert!(HatAssignment::from_colors(ColorSpace::Continuum, vec![Color::Real(0.5)], Tail::ConstantBlack)
            .is_err());
        assert!(HatAssignment::binary(vec![2], Tail::Unsampled).is_err());
    }

    #[test]
    fn binary_equals_two_colors() {
        assert!(ColorSpace::Binary.same_as(&ColorSpace::FiniteK { k: 2 }));
        let a = HatAssignment::from_colors(
            ColorSpace::FiniteK { k: 2 },
            vec![Color::WHITE, Color::BLACK],
            Tail::Unsampled,
        )
        .unwrap();
        assert_eq!(a.bits(), Some(&[1u8, 0][..]));
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = RandomSource::for_run(42, 3);
        let mut b = RandomSource::for_run(42, 3);
        let mut c = RandomSource::for_run(42, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn union_bound_schedule() {
        let s = KSchedule::UnionBound { epsilon: Rational::frac(1, 10) };
        assert_eq!(s.colors_for(1).unwrap(), 40);
        assert_eq!(s.colors_for(2).unwrap(), 80);
    }
}
