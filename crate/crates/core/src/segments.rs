//! Block-parity simulation of strategies built from even-odd blocks and pairs.
//!
//! Under such a strategy a run is a sequence of segments: an even-odd block
//! that is entirely correct or entirely wrong, or a stretch of consecutive
//! pairs in which exactly one member of every pair is correct. Which segments
//! occur depends on hats only through the parity of each even-odd block, and
//! those parities are iid fair bits. Sampling the parities directly therefore
//! reproduces the law of `(Z̄_k)` at every even `k` exactly, at a cost
//! proportional to the number of blocks instead of the number of players.
//!
//! Pairs segments always start at an even offset, so the prefix count at an
//! even `k` is exact. At an odd `k` inside a pairs segment the count depends
//! on a single hat and is reported as undetermined.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Extreme, HatAssignment, PrefixCounts, RandomSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    AllCorrect,
    AllWrong,
    /// Consecutive pairs, one correct guess per pair.
    Half,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    /// First player of the segment.
    pub start: u64,
    pub len: u64,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn end(&self) -> u64 {
        self.start + self.len - 1
    }
}

/// Parity of the white hats of players `start..=end`.
pub trait ParitySource {
    fn parity(&mut self, start: u64, end: u64) -> Result<u8>;
}

/// Parities read off an actual hat assignment.
pub struct HatParities<'a>(pub &'a HatAssignment);

impl ParitySource for HatParities<'_> {
    fn parity(&mut self, start: u64, end: u64) -> Result<u8> {
        let mut acc = 0u8;
        for p in start..=end {
            acc ^= self.0.bit(p)?;
        }
        Ok(acc)
    }
}

/// Parities drawn as fresh fair bits.
pub struct SampledParities<'a>(pub &'a mut RandomSource);

impl ParitySource for SampledParities<'_> {
    fn parity(&mut self, _start: u64, _end: u64) -> Result<u8> {
        Ok(self.0.bit())
    }
}

/// Segments of one run plus the indicator of each unit's event (a block
/// winning, or a team's gamblers all triggering), `None` when the unit has no
/// even-odd block.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentRun {
    pub segments: Vec<Segment>,
    pub events: Vec<Option<bool>>,
}

/// Prefix counts of a segment run, truncated to `horizon` players.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTrajectory {
    segments: Vec<Segment>,
    /// Correct guesses before each segment.
    before: Vec<u64>,
    horizon: u64,
    pub events: Vec<Option<bool>>,
}

impl SegmentTrajectory {
    pub fn new(run: SegmentRun, horizon: u64) -> Self {
        let mut segments = Vec::new();
        let mut before = Vec::new();
        let mut acc = 0u64;
        let mut next = 1u64;
        for s in run.segments {
            debug_assert_eq!(s.start, next, "segments must be contiguous");
            if s.start > horizon || s.len == 0 {
                next = s.start + s.len;
                continue;
            }
            let len = s.len.min(horizon - s.start + 1);
            let seg = Segment { start: s.start, len, kind: s.kind };
            before.push(acc);
            let g = gained(&seg, len);
            debug_assert!(g.is_some() || len < s.len, "pairs segments have even length");
            // Only a segment cut by the horizon can end mid-pair, and nothing follows it.
            acc += g.unwrap_or(len / 2);
            segments.push(seg);
            next = s.start + s.len;
        }
        SegmentTrajectory { segments, before, horizon, events: run.events }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn locate(&self, k: u64) -> Option<usize> {
        if k == 0 || k > self.horizon {
            return None;
        }
        let idx = self.segments.partition_point(|s| s.end() < k);
        (idx < self.segments.len()).then_some(idx)
    }
}

/// Correct guesses among the first `taken` players of a segment.
fn gained(seg: &Segment, taken: u64) -> Option<u64> {
    match seg.kind {
        SegmentKind::AllCorrect => Some(taken),
        SegmentKind::AllWrong => Some(0),
        SegmentKind::Half => taken.is_multiple_of(2).then_some(taken / 2),
    }
}

impl PrefixCounts for SegmentTrajectory {
    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn count_at(&self, k: u64) -> Option<u64> {
        if k == 0 {
            return Some(0);
        }
        let idx = self.locate(k)?;
        let seg = &self.segments[idx];
        gained(seg, k - seg.start + 1).map(|g| self.before[idx] + g)
    }

    /// `Z̄` is monotone at even `k` within a segment, so the extremes over a
    /// window are attained at clipped segment endpoints.
    fn extremes(&self, k_min: u64, k_max: u64, even_only: bool) -> Option<(Extreme, Extreme)> {
        let lo = k_min.max(1);
        let hi = k_max.min(self.horizon);
        if lo > hi {
            return None;
        }
        let mut best: Option<(Extreme, Extreme)> = None;
        let mut consider = |k: u64| {
            if k < lo || k > hi || (even_only && k % 2 == 1) {
                return;
            }
            if let Some(count) = self.count_at(k) {
                let e = Extreme { k, count };
                best = Some(match best {
                    None => (e, e),
                    Some((mn, mx)) => (
                        if e.cmp_mean(&mn) == Ordering::Less { e } else { mn },
                        if e.cmp_mean(&mx) == Ordering::Greater { e } else { mx },
                    ),
                });
            }
        };
        let round_even_up = |k: u64| if k % 2 == 1 { k + 1 } else { k };
        let round_even_down = |k: u64| if k % 2 == 1 { k - 1 } else { k };
        for seg in &self.segments {
            if seg.end() < lo || seg.start > hi {
                continue;
            }
            let a = seg.start.max(lo);
            let b = seg.end().min(hi);
            if seg.kind == SegmentKind::Half || even_only {
                // Odd k inside pairs is undetermined; skip it.
                let a2 = round_even_up(a);
                let b2 = round_even_down(b);
                if a2 <= b2 {
                    consider(a2);
                    consider(b2);
                }
            } else {
                consider(a);
                consider(b);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(segs: &[(u64, SegmentKind)]) -> SegmentRun {
        let mut start = 1;
        let segments = segs
            .iter()
            .map(|&(len, kind)| {
                let s = Segment { start, len, kind };
                start += len;
                s
            })
            .collect();
        SegmentRun { segments, events: vec![] }
    }

    #[test]
    fn counts_and_truncation() {
        let t = SegmentTrajectory::new(
            run(&[(4, SegmentKind::Half), (3, SegmentKind::AllCorrect), (6, SegmentKind::Half)]),
            10,
        );
        assert_eq!(t.count_at(2), Some(1));
        assert_eq!(t.count_at(3), None);
        assert_eq!(t.count_at(4), Some(2));
        assert_eq!(t.count_at(7), Some(5));
        // Half segment starting at 8 is odd-aligned here, so only even
        // offsets within it are determined.
        assert_eq!(t.count_at(9), Some(6));
        assert_eq!(t.count_at(11), None);
    }

    #[test]
    fn extremes_on_endpoints_match_scan() {
        let t = SegmentTrajectory::new(
            run(&[
                (2, SegmentKind::Half),
                (6, SegmentKind::AllWrong),
                (8, SegmentKind::AllCorrect),
                (20, SegmentKind::Half),
            ]),
            36,
        );
        let (mn, mx) = t.extremes(4, 36, true).unwrap();
        let mut scan_min = (u64::MAX, 1u64);
        let mut scan_max = (0u64, 1u64);
        for k in (4..=36).step_by(2) {
            let c = t.count_at(k).unwrap();
            if (c as u128) * (scan_min.1 as u128) < (scan_min.0 as u128) * (k as u128) {
                scan_min = (c, k);
            }
            if (c as u128) * (scan_max.1 as u128) > (scan_max.0 as u128) * (k as u128) {
                scan_max = (c, k);
            }
        }
        assert_eq!(mn.mean(), Extreme { k: scan_min.1, count: scan_min.0 }.mean());
        assert_eq!(mx.mean(), Extreme { k: scan_max.1, count: scan_max.0 }.mean());
    }
}
