//! Guess rules with declared visibility windows.
//!
//! Every strategy states, for each player `i`, the finite set of players
//! whose hats `i` reads. The set never contains `i`. Guesses are evaluated
//! either one player at a time through a [`HatView`] (the reference path)
//! or in bulk from a binary prefix (the fast path). Both paths agree.

pub mod blocks;
pub mod mixed;
pub mod rules;
pub mod spec;
pub mod team;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::model::{private_rng, Color, ColorSpace, HatAssignment, KSchedule};
use crate::segments::{ParitySource, Segment, SegmentKind, SegmentRun};

use blocks::Blocks;
use mixed::MixedStrategy;
use rules::{
    continuum_guess, countable_color_guess, even_odd_guess, mod_k_groups_guess, mod_k_sum_guess, pair_seat,
    pairs_guess, positive_support_guess, ContinuumRule, PairSeat, PositiveLaw,
};
use team::{team_strategy_guess, TeamStrategy};

/// A finite set of players, stored as sorted disjoint inclusive ranges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Window {
    ranges: Vec<(u64, u64)>,
}

impl Window {
    pub fn empty() -> Self {
        Window::default()
    }

    pub fn single(player: u64) -> Self {
        Window { ranges: vec![(player, player)] }
    }

    /// `lo..=hi` without `exclude`.
    pub fn from_range_excluding(lo: u64, hi: u64, exclude: u64) -> Self {
        Window::from_ranges(vec![(lo, hi)], exclude)
    }

    /// Union of `ranges` without `exclude`.
    pub fn from_ranges(mut ranges: Vec<(u64, u64)>, exclude: u64) -> Self {
        ranges.retain(|(a, b)| a <= b);
        ranges.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(ranges.len());
        for (a, b) in ranges {
            match merged.last_mut() {
                Some((_, hi)) if a <= hi.saturating_add(1) => *hi = (*hi).max(b),
                _ => merged.push((a, b)),
            }
        }
        let mut out = Vec::with_capacity(merged.len() + 1);
        for (a, b) in merged {
            if exclude < a || exclude > b {
                out.push((a, b));
                continue;
            }
            if a < exclude {
                out.push((a, exclude - 1));
            }
            if exclude < b {
                out.push((exclude + 1, b));
            }
        }
        Window { ranges: out }
    }

    pub fn ranges(&self) -> &[(u64, u64)] {
        &self.ranges
    }

    pub fn contains(&self, player: u64) -> bool {
        let idx = self.ranges.partition_point(|&(_, b)| b < player);
        idx < self.ranges.len() && self.ranges[idx].0 <= player
    }

    pub fn size(&self) -> u64 {
        self.ranges.iter().map(|(a, b)| b - a + 1).sum()
    }

    pub fn max(&self) -> Option<u64> {
        self.ranges.last().map(|r| r.1)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.ranges.iter().flat_map(|&(a, b)| a..=b)
    }
}

/// Private randomness available to randomized rules.
#[derive(Debug, Clone, Copy)]
pub enum Private<'a> {
    /// Player `i` draws from [`private_rng`]`(seed, i)`.
    Seed(u64),
    /// Player `i` uses `coins[i - 1]` directly (exact enumeration).
    Coins(&'a [u8]),
}

/// Read access to hats, as seen by one player.
pub trait HatView {
    fn color(&self, player: u64) -> Result<Color>;

    fn bit(&self, player: u64) -> Result<u8> {
        match self.color(player)? {
            Color::Index(b @ (0 | 1)) => Ok(b as u8),
            other => Err(Error::ColorSpace(format!("{other:?} is not a binary hat"))),
        }
    }

    fn private(&self) -> Private<'_>;
}

pub struct View<'a> {
    pub hats: &'a HatAssignment,
    pub private: Private<'a>,
}

impl<'a> View<'a> {
    pub fn new(hats: &'a HatAssignment, private: Private<'a>) -> Self {
        View { hats, private }
    }
}

impl HatView for View<'_> {
    fn color(&self, player: u64) -> Result<Color> {
        self.hats.color(player)
    }

    fn bit(&self, player: u64) -> Result<u8> {
        self.hats.bit(player)
    }

    fn private(&self) -> Private<'_> {
        self.private
    }
}

/// A compiled strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    /// Everyone guesses the same color.
    Constant { color: u64, space: ColorSpace },
    /// Uniform guess from private randomness.
    IndependentRandom { space: ColorSpace },
    /// Even-odd within consecutive groups of `group` players.
    EvenOdd { group: u64 },
    Pairs,
    /// Groups of `group` players all aim for a total of `residue` mod `k`.
    ModKSum { k: u64, residue: u64, group: u64 },
    /// Groups of `k`; member `j` aims for a total of `j - 1` mod `k`.
    ModKGroups { k: u64 },
    Blocks(Blocks),
    Team(TeamStrategy),
    Mixed(Box<MixedStrategy>),
    CountableUniform { schedule: KSchedule },
    CountablePositive { schedule: KSchedule, law: PositiveLaw },
    Continuum(ContinuumRule),
    /// Reads its own hat. Breaks the rules of the game; used to show that
    /// the checks can fail.
    Cheat,
}

fn group_end(player: u64, group: u64) -> u64 {
    player.div_ceil(group) * group
}

fn group_start(player: u64, group: u64) -> u64 {
    (player - 1) / group * group + 1
}

fn pairs_partner(player: u64) -> u64 {
    match pair_seat(player) {
        PairSeat::First => player + 1,
        PairSeat::Second => player - 1,
    }
}

fn index_of(c: Color) -> Result<u64> {
    c.index().ok_or_else(|| Error::ColorSpace("expected an indexed color".into()))
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Constant { .. } => "constant",
            Strategy::IndependentRandom { .. } => "independent-random",
            Strategy::EvenOdd { .. } => "even-odd",
            Strategy::Pairs => "pairs",
            Strategy::ModKSum { .. } => "mod-k-sum",
            Strategy::ModKGroups { .. } => "mod-k-groups",
            Strategy::Blocks(_) => "block",
            Strategy::Team(_) => "team",
            Strategy::Mixed(_) => "mixed",
            Strategy::CountableUniform { .. } => "countable-uniform",
            Strategy::CountablePositive { .. } => "countable-positive",
            Strategy::Continuum(_) => "continuum",
            Strategy::Cheat => "cheat",
        }
    }

    pub fn space(&self) -> ColorSpace {
        match self {
            Strategy::Constant { space, .. } | Strategy::IndependentRandom { space } => space.normalized(),
            Strategy::ModKSum { k, .. } | Strategy::ModKGroups { k } => ColorSpace::FiniteK { k: *k }.normalized(),
            Strategy::CountableUniform { schedule } | Strategy::CountablePositive { schedule, .. } => {
                ColorSpace::CountablePerPlayer { schedule: schedule.clone() }
            }
            Strategy::Continuum(_) => ColorSpace::Continuum,
            _ => ColorSpace::Binary,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.space() == ColorSpace::Binary
    }

    /// Whether the rule consumes private randomness.
    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            Strategy::IndependentRandom { .. } | Strategy::CountableUniform { .. } | Strategy::CountablePositive { .. }
        )
    }

    /// Players whose hats `player` reads.
    pub fn window(&self, player: u64) -> Result<Window> {
        if player == 0 {
            return Err(invalid("players are numbered from 1"));
        }
        Ok(match self {
            Strategy::Constant { .. }
            | Strategy::IndependentRandom { .. }
            | Strategy::CountableUniform { .. }
            | Strategy::CountablePositive { .. }
            | Strategy::Continuum(ContinuumRule::Constant { .. }) => Window::empty(),
            Strategy::EvenOdd { group } | Strategy::ModKSum { group, .. } => {
                Window::from_range_excluding(group_start(player, *group), group_end(player, *group), player)
            }
            Strategy::ModKGroups { k } => {
                Window::from_range_excluding(group_start(player, *k), group_end(player, *k), player)
            }
            Strategy::Pairs => Window::single(pairs_partner(player)),
            Strategy::Blocks(b) => {
                let (_, first, last) = b.block_of(player)?;
                Window::from_range_excluding(first, last, player)
            }
            Strategy::Team(t) => t.window(player)?,
            Strategy::Mixed(m) => m.window(player)?,
            Strategy::Continuum(ContinuumRule::MeanOfVisible { count }) => {
                Window::from_range_excluding(1, *count as u64 + 1, player)
            }
            Strategy::Cheat => Window::single(player),
        })
    }

    /// Number of hats needed to evaluate the guesses of players `1..=n`.
    pub fn horizon(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        Ok(match self {
            Strategy::EvenOdd { group } | Strategy::ModKSum { group, .. } => group_end(n, *group),
            Strategy::ModKGroups { k } => group_end(n, *k),
            Strategy::Pairs => group_end(n, 2),
            Strategy::Blocks(b) => b.block_of(n)?.2,
            Strategy::Team(t) => t.unit_end(n)?,
            Strategy::Mixed(m) => m.horizon(n)?,
            Strategy::Continuum(ContinuumRule::MeanOfVisible { count }) => n.max(*count as u64 + 1),
            _ => n,
        })
    }

    fn private_draw<T>(
        &self,
        player: u64,
        view: &dyn HatView,
        draw: impl FnOnce(&mut rand_chacha::ChaCha8Rng) -> Result<T>,
    ) -> Result<T> {
        match view.private() {
            Private::Seed(s) => draw(&mut private_rng(s, player)),
            Private::Coins(_) => Err(invalid(format!("{} needs a private seed", self.name()))),
        }
    }

    /// Guess of `player`, reading hats only inside its window.
    pub fn guess(&self, player: u64, view: &dyn HatView) -> Result<Color> {
        if player == 0 {
            return Err(invalid("players are numbered from 1"));
        }
        let visible_indices = |w: Window| -> Result<Vec<u64>> { w.iter().map(|p| index_of(view.color(p)?)).collect() };
        let visible_bits = |w: Window| -> Result<Vec<u8>> { w.iter().map(|p| view.bit(p)).collect() };
        Ok(match self {
            Strategy::Constant { color, .. } => Color::Index(*color),
            Strategy::IndependentRandom { space } => {
                let k = space.colors_for(player)?.ok_or_else(|| invalid("independent random needs finite colors"))?;
                match view.private() {
                    Private::Coins(c) => {
                        let v = *c.get((player - 1) as usize).ok_or(Error::Horizon { player, limit: c.len() as u64 })?;
                        if u64::from(v) >= k {
                            return Err(Error::ColorSpace(format!("coin {v} outside {k} colors")));
                        }
                        Color::Index(u64::from(v))
                    }
                    Private::Seed(s) => Color::Index(private_rng(s, player).random_range(0..k)),
                }
            }
            Strategy::EvenOdd { .. } | Strategy::Blocks(_) => {
                Color::Index(u64::from(even_odd_guess(&visible_bits(self.window(player)?)?)))
            }
            Strategy::Pairs => Color::Index(u64::from(pairs_guess(pair_seat(player), view.bit(pairs_partner(player))?))),
            Strategy::ModKSum { k, residue, .. } => {
                Color::Index(mod_k_sum_guess(*k, *residue, &visible_indices(self.window(player)?)?)?)
            }
            Strategy::ModKGroups { k } => {
                let member = (player - 1) % k + 1;
                Color::Index(mod_k_groups_guess(*k, member, &visible_indices(self.window(player)?)?)?)
            }
            Strategy::Team(t) => Color::Index(u64::from(team_strategy_guess(t, player, view)?)),
            Strategy::Mixed(m) => m.guess(player, view)?,
            Strategy::CountableUniform { schedule } => {
                let k = schedule.colors_for(player)?;
                Color::Index(self.private_draw(player, view, |rng| countable_color_guess(k, rng))?)
            }
            Strategy::CountablePositive { law, .. } => {
                Color::Index(self.private_draw(player, view, |rng| positive_support_guess(law, rng))?)
            }
            Strategy::Continuum(rule) => {
                let visible: Vec<f64> = self
                    .window(player)?
                    .iter()
                    .map(|p| match view.color(p)? {
                        Color::Real(x) => Ok(x),
                        Color::Index(i) => Ok(i as f64),
                    })
                    .collect::<Result<_>>()?;
                Color::Real(continuum_guess(rule, &visible))
            }
            Strategy::Cheat => view.color(player)?,
        })
    }

    /// Guesses of players `1..=n` in a binary game, from hats covering the
    /// horizon. Equivalent to calling [`Strategy::guess`] for each player.
    pub fn bulk_bits(&self, bits: &[u8], n: u64, private: Private<'_>) -> Result<Vec<u8>> {
        if !self.is_binary() {
            return Err(Error::ColorSpace(format!("{} is not a binary strategy", self.name())));
        }
        let h = self.horizon(n)?;
        if (bits.len() as u64) < h {
            return Err(Error::Horizon { player: h, limit: bits.len() as u64 });
        }
        let len = n as usize;
        Ok(match self {
            Strategy::Constant { color, .. } => vec![*color as u8; len],
            Strategy::EvenOdd { group } => parity_groups(bits, len, |p| (group_start(p, *group), group_end(p, *group))),
            Strategy::ModKSum { group, residue, .. } => {
                let r = (*residue % 2) as u8;
                parity_groups(bits, len, |p| (group_start(p, *group), group_end(p, *group)))
                    .into_iter()
                    .map(|g| g ^ r)
                    .collect()
            }
            Strategy::ModKGroups { .. } | Strategy::Pairs => {
                (0..len).map(|i| pairs_guess(pair_seat(i as u64 + 1), bits[pairs_partner(i as u64 + 1) as usize - 1])).collect()
            }
            Strategy::Blocks(b) => {
                let mut out = Vec::with_capacity(len);
                let mut p = 1u64;
                while p <= n {
                    let (_, first, last) = b.block_of(p)?;
                    let parity = bits[(first - 1) as usize..last as usize].iter().fold(0, |a, &x| a ^ x);
                    for q in first..=last.min(n) {
                        out.push(parity ^ bits[(q - 1) as usize]);
                    }
                    p = last + 1;
                }
                out
            }
            Strategy::Team(t) => t.bulk(bits, n)?,
            Strategy::Mixed(m) => m.bulk(bits, n, private)?,
            Strategy::Cheat => bits[..len].to_vec(),
            _ => {
                let hats = HatAssignment::binary(bits.to_vec(), crate::model::Tail::Unsampled)?;
                let view = View::new(&hats, private);
                (1..=n).map(|p| Ok(index_of(self.guess(p, &view)?)? as u8)).collect::<Result<_>>()?
            }
        })
    }

    /// Guesses of players `1..=n`, by the fast path when there is one.
    pub fn guesses(&self, hats: &HatAssignment, n: u64, private: Private<'_>) -> Result<Vec<Color>> {
        if let Some(bits) = hats.bits() {
            if self.is_binary() && hats.len() >= self.horizon(n)? {
                return Ok(self.bulk_bits(bits, n, private)?.into_iter().map(|b| Color::Index(u64::from(b))).collect());
            }
        }
        let view = View::new(hats, private);
        (1..=n).map(|p| self.guess(p, &view)).collect()
    }

    /// Segment decomposition of players `1..=upto` for strategies made of
    /// even-odd blocks and pairs; `None` for other strategies.
    pub fn segments(&self, upto: u64, parities: &mut dyn ParitySource) -> Option<Result<SegmentRun>> {
        match self {
            Strategy::Pairs | Strategy::ModKGroups { k: 2 } => Some(Ok(SegmentRun {
                segments: vec![Segment { start: 1, len: group_end(upto, 2), kind: SegmentKind::Half }],
                events: vec![],
            })),
            Strategy::EvenOdd { group } => Some(fixed_blocks(upto, parities, |j| Some(((j - 1) * group + 1, j * group)))),
            Strategy::Blocks(b) => Some(fixed_blocks(upto, parities, |j| {
                b.bounds().get(j as usize - 1).map(|&last| (b.ratio(j as usize).0 + 1, last))
            })),
            Strategy::Team(t) => Some(t.segments(upto, parities)),
            _ => None,
        }
    }
}

fn parity_groups(bits: &[u8], len: usize, group_of: impl Fn(u64) -> (u64, u64)) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    let mut p = 1u64;
    while (p as usize) <= len {
        let (first, last) = group_of(p);
        let parity = bits[(first - 1) as usize..last as usize].iter().fold(0, |a, &x| a ^ x);
        for q in first..=last.min(len as u64) {
            out.push(parity ^ bits[(q - 1) as usize]);
        }
        p = last + 1;
    }
    out
}

fn fixed_blocks(
    upto: u64,
    parities: &mut dyn ParitySource,
    block: impl Fn(u64) -> Option<(u64, u64)>,
) -> Result<SegmentRun> {
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut j = 1u64;
    loop {
        let Some((first, last)) = block(j) else {
            if segments.last().is_none_or(|s: &Segment| s.end() < upto) {
                return Err(Error::Horizon { player: upto, limit: segments.last().map_or(0, |s| s.end()) });
            }
            break;
        };
        if first > upto {
            break;
        }
        let parity = parities.parity(first, last)?;
        let kind = if parity == 0 { SegmentKind::AllCorrect } else { SegmentKind::AllWrong };
        segments.push(Segment { start: first, len: last - first + 1, kind });
        events.push(Some(parity == 0));
        j += 1;
    }
    Ok(SegmentRun { segments, events })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_ranges() {
        let w = Window::from_ranges(vec![(5, 9), (1, 3), (4, 4), (20, 20)], 7);
        assert_eq!(w.ranges(), &[(1, 6), (8, 9), (20, 20)]);
        assert!(w.contains(6) && !w.contains(7) && w.contains(20) && !w.contains(10));
        assert_eq!(w.size(), 9);
        assert_eq!(w.max(), Some(20));
        assert_eq!(Window::from_range_excluding(3, 3, 3).size(), 0);
    }

    #[test]
    fn horizons() {
        assert_eq!(Strategy::Pairs.horizon(7).unwrap(), 8);
        assert_eq!(Strategy::EvenOdd { group: 5 }.horizon(7).unwrap(), 10);
        assert_eq!(Strategy::ModKGroups { k: 3 }.horizon(3).unwrap(), 3);
    }

    #[test]
    fn pairs_bulk_matches_reference() {
        let bits = vec![0, 0, 0, 1, 1, 0, 1, 1];
        let hats = HatAssignment::binary(bits.clone(), crate::model::Tail::Unsampled).unwrap();
        let view = View::new(&hats, Private::Seed(0));
        let bulk = Strategy::Pairs.bulk_bits(&bits, 8, Private::Seed(0)).unwrap();
        for p in 1..=8u64 {
            assert_eq!(Color::Index(u64::from(bulk[p as usize - 1])), Strategy::Pairs.guess(p, &view).unwrap());
        }
        assert_eq!(bulk, vec![0, 1, 1, 1, 0, 0, 1, 0]);
    }
}
