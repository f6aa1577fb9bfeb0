//! Gambler/recovery team strategy driven by a [`TeamPlan`].
//!
//! Gambler block `B_{k,j}` looks at the earlier blocks of its own team. If
//! all of them had an even number of white hats (play to win), or all had an
//! odd number (play to lose), the block plays even-odd; otherwise it plays
//! pairs. The recovery squad always plays pairs. Teams never look outside
//! themselves.

use crate::error::{Error, Result};
use crate::plan::{validate_plan, Play, TeamParams, TeamPlan};
use crate::segments::{ParitySource, Segment, SegmentKind, SegmentRun};

use super::rules::{even_odd_guess, pair_seat, pairs_guess, PairSeat};
use super::{HatView, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct TeamStrategy {
    plan: TeamPlan,
}

/// Where a player sits inside the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeamSeat {
    Gambler { team: usize, block: u64, first: u64, last: u64 },
    Recovery { team: usize, squad_first: u64 },
}

fn triggers(play: Play, parity: u8) -> bool {
    match play {
        Play::Win => parity == 0,
        Play::Lose => parity == 1,
    }
}

impl TeamStrategy {
    pub fn new(plan: TeamPlan) -> Result<Self> {
        let report = validate_plan(&plan);
        if let Some(v) = report.first_violation() {
            return Err(Error::InvalidPlan(format!("team {}: {} ({})", v.team, v.check, v.detail)));
        }
        Ok(TeamStrategy { plan })
    }

    pub fn plan(&self) -> &TeamPlan {
        &self.plan
    }

    pub fn seat(&self, player: u64) -> Result<TeamSeat> {
        let team = self
            .plan
            .team_of(player)
            .ok_or(Error::Horizon { player, limit: self.plan.end() })?;
        let t = &self.plan.teams[team];
        let offset = player - t.n;
        if offset <= t.g {
            let block = (offset - 1) / t.s + 1;
            let (first, last) = t.block(block);
            Ok(TeamSeat::Gambler { team, block, first, last })
        } else {
            Ok(TeamSeat::Recovery { team, squad_first: t.n + t.g + 1 })
        }
    }

    pub fn window(&self, player: u64) -> Result<Window> {
        Ok(match self.seat(player)? {
            TeamSeat::Gambler { team, last, .. } => {
                let t = &self.plan.teams[team];
                Window::from_range_excluding(t.n + 1, last, player)
            }
            TeamSeat::Recovery { squad_first, .. } => {
                Window::single(partner(player, squad_first))
            }
        })
    }

    /// End of the unit containing `player`: its gambler block or its pair.
    pub fn unit_end(&self, player: u64) -> Result<u64> {
        Ok(match self.seat(player)? {
            TeamSeat::Gambler { last, .. } => last,
            TeamSeat::Recovery { squad_first, .. } => partner(player, squad_first).max(player),
        })
    }

    pub fn segments(&self, upto: u64, parities: &mut dyn ParitySource) -> Result<SegmentRun> {
        let mut segments = Vec::new();
        let mut events = Vec::new();
        for t in &self.plan.teams {
            if t.n >= upto {
                break;
            }
            let (segs, event) = team_segments(t, upto, parities)?;
            segments.extend(segs);
            events.push(event);
        }
        Ok(SegmentRun { segments, events })
    }

    /// Guesses of players `1..=n` from binary hats covering the horizon.
    pub fn bulk(&self, bits: &[u8], n: u64) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(n as usize);
        for t in &self.plan.teams {
            if t.n >= n {
                break;
            }
            let bit = |p: u64| -> Result<u8> {
                bits.get((p - 1) as usize).copied().ok_or(Error::Horizon { player: p, limit: bits.len() as u64 })
            };
            let mut trigger = true;
            for j in 1..=if t.s == 0 { 0 } else { t.b } {
                let (first, last) = t.block(j);
                if first > n {
                    break;
                }
                let mut parity = 0u8;
                for p in first..=last {
                    parity ^= bit(p)?;
                }
                for p in first..=last.min(n) {
                    let g = if trigger {
                        parity ^ bit(p)?
                    } else {
                        let pos = p - first + 1;
                        pairs_guess(pair_seat(pos), bit(partner(p, first))?)
                    };
                    out.push(g);
                }
                trigger = trigger && triggers(t.play, parity);
            }
            let squad_first = t.n + t.g + 1;
            for p in squad_first..=t.last().min(n) {
                let pos = p - squad_first + 1;
                out.push(pairs_guess(pair_seat(pos), bit(partner(p, squad_first))?));
            }
        }
        if (out.len() as u64) < n {
            return Err(Error::Horizon { player: n, limit: self.plan.end() });
        }
        Ok(out)
    }
}

fn partner(player: u64, run_first: u64) -> u64 {
    match pair_seat(player - run_first + 1) {
        PairSeat::First => player + 1,
        PairSeat::Second => player - 1,
    }
}

/// Segments of team `t` that start at or before `upto`. The event is `None`
/// when the team has no gamblers or is cut before its last gambler block.
fn team_segments(t: &TeamParams, upto: u64, parities: &mut dyn ParitySource) -> Result<(Vec<Segment>, Option<bool>)> {
    let mut segs = Vec::new();
    let mut trigger = true;
    let gamblers = if t.s == 0 { 0 } else { t.b };
    for j in 1..=gamblers {
        let (first, last) = t.block(j);
        if first > upto {
            return Ok((segs, None));
        }
        let parity = parities.parity(first, last)?;
        let kind = if trigger {
            if parity == 0 {
                SegmentKind::AllCorrect
            } else {
                SegmentKind::AllWrong
            }
        } else {
            SegmentKind::Half
        };
        segs.push(Segment { start: first, len: t.s, kind });
        trigger = trigger && triggers(t.play, parity);
    }
    if t.r > 0 && t.n + t.g < upto {
        segs.push(Segment { start: t.n + t.g + 1, len: t.r, kind: SegmentKind::Half });
    }
    Ok((segs, (gamblers > 0).then_some(trigger)))
}

/// Guess of `player` under the team plan, reading hats through `view`.
pub fn team_strategy_guess(strategy: &TeamStrategy, player: u64, view: &dyn HatView) -> Result<u8> {
    match strategy.seat(player)? {
        TeamSeat::Gambler { team, block, first, last } => {
            let t = &strategy.plan.teams[team];
            let mut trigger = true;
            for j in 1..block {
                let (a, b) = t.block(j);
                let mut parity = 0u8;
                for p in a..=b {
                    parity ^= view.bit(p)?;
                }
                trigger = trigger && triggers(t.play, parity);
            }
            if trigger {
                let visible: Vec<u8> =
                    (first..=last).filter(|&p| p != player).map(|p| view.bit(p)).collect::<Result<_>>()?;
                Ok(even_odd_guess(&visible))
            } else {
                Ok(pairs_guess(pair_seat(player - first + 1), view.bit(partner(player, first))?))
            }
        }
        TeamSeat::Recovery { squad_first, .. } => Ok(pairs_guess(
            pair_seat(player - squad_first + 1),
            view.bit(partner(player, squad_first))?,
        )),
    }
}
