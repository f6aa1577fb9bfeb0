//! Consecutive even-odd blocks `B_j = {n_{j-1} + 1, ..., n_j}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum BlockSchedule {
    /// `n_1 = ratio`, `n_j = n_{j-1} * max(ratio, j + 1)`.
    Geometric { ratio: u64 },
    /// `n_j = (j + 1)!`.
    Factorial,
    /// Explicit strictly increasing boundaries `n_1 < n_2 < ...`.
    Explicit { bounds: Vec<u64> },
}

impl Default for BlockSchedule {
    fn default() -> Self {
        BlockSchedule::Geometric { ratio: 10 }
    }
}

impl BlockSchedule {
    /// Boundaries `n_1, n_2, ...` up to the last one representable in `u64`.
    pub fn bounds(&self) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        match self {
            BlockSchedule::Geometric { ratio } => {
                if *ratio < 2 {
                    return Err(invalid("geometric block ratio must be at least 2"));
                }
                let mut n = *ratio;
                out.push(n);
                for j in 2u64.. {
                    match n.checked_mul((*ratio).max(j + 1)) {
                        Some(next) => {
                            n = next;
                            out.push(n);
                        }
                        None => break,
                    }
                }
            }
            BlockSchedule::Factorial => {
                let mut n: u64 = 2;
                out.push(n);
                for j in 2u64.. {
                    match n.checked_mul(j + 1) {
                        Some(next) => {
                            n = next;
                            out.push(n);
                        }
                        None => break,
                    }
                }
            }
            BlockSchedule::Explicit { bounds } => {
                if bounds.is_empty() {
                    return Err(invalid("explicit block schedule is empty"));
                }
                let mut prev = 0;
                for &b in bounds {
                    if b <= prev {
                        return Err(invalid(format!("block bounds must strictly increase: {bounds:?}")));
                    }
                    prev = b;
                }
                out.clone_from(bounds);
            }
        }
        Ok(out)
    }
}

/// Compiled block boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub(crate) bounds: Vec<u64>,
}

impl Blocks {
    pub fn new(schedule: &BlockSchedule) -> Result<Self> {
        Ok(Blocks { bounds: schedule.bounds()? })
    }

    pub fn bounds(&self) -> &[u64] {
        &self.bounds
    }

    /// `(j, first, last)` of the block containing `player` (`j` is 1-based).
    pub fn block_of(&self, player: u64) -> Result<(usize, u64, u64)> {
        let last = *self.bounds.last().expect("non-empty");
        if player == 0 || player > last {
            return Err(Error::Horizon { player, limit: last });
        }
        let idx = self.bounds.partition_point(|&b| b < player);
        let first = if idx == 0 { 1 } else { self.bounds[idx - 1] + 1 };
        Ok((idx + 1, first, self.bounds[idx]))
    }

    /// `n_{j-1} / n_j` for block `j` (1-based), with `n_0 = 0`.
    pub fn ratio(&self, j: usize) -> (u64, u64) {
        let prev = if j <= 1 { 0 } else { self.bounds[j - 2] };
        (prev, self.bounds[j - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule() {
        let b = BlockSchedule::default().bounds().unwrap();
        assert_eq!(&b[..4], &[10, 100, 1000, 10_000]);
        for (j, w) in b.windows(2).enumerate() {
            let jj = j as u64 + 2;
            // n_{j-1}/n_j <= 1/10 and <= 1/(j+1).
            assert!(w[0] * 10 <= w[1]);
            assert!(w[0] * (jj + 1) <= w[1]);
        }
    }

    #[test]
    fn factorial_schedule() {
        let b = BlockSchedule::Factorial.bounds().unwrap();
        assert_eq!(&b[..4], &[2, 6, 24, 120]);
    }

    #[test]
    fn explicit_schedule_validation() {
        assert!(BlockSchedule::Explicit { bounds: vec![2, 2, 5] }.bounds().is_err());
        assert!(BlockSchedule::Explicit { bounds: vec![] }.bounds().is_err());
        let blocks = Blocks::new(&BlockSchedule::Explicit { bounds: vec![2, 6, 24] }).unwrap();
        assert_eq!(blocks.block_of(1).unwrap(), (1, 1, 2));
        assert_eq!(blocks.block_of(3).unwrap(), (2, 3, 6));
        assert_eq!(blocks.block_of(24).unwrap(), (3, 7, 24));
        assert!(blocks.block_of(25).is_err());
    }
}
