use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Validation,
    Test,
}

/// Half-open row range `start..end` with its role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub role: Role,
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, row: usize) -> bool {
        self.start <= row && row < self.end
    }
}

/// Contiguous, time-ordered train/validation/test blocks covering
/// `0..n_samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub blocks: Vec<Block>,
    pub ratios: (f64, f64, f64),
    pub n_samples: usize,
}

/// The test block is the final `round(n * test)` rows. The span before it is
/// cut into `n_folds` equal segments, each split into a train block followed
/// by a validation block in the ratio `train : val`, so both sets draw from
/// several seasons when `n_folds > 1`.
pub fn blocked_splits(n_samples: usize, ratios: (f64, f64, f64), n_folds: usize) -> Result<SplitPlan> {
    let (train, val, test) = ratios;
    if [train, val, test].iter().any(|r| !(*r >= 0.0)) || ((train + val + test) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split ratios must be non-negative and sum to 1, got ({train}, {val}, {test})"
        )));
    }
    if n_folds == 0 {
        return Err(Error::InvalidConfig("at least one fold is required".into()));
    }
    let n_test = (n_samples as f64 * test).round() as usize;
    let pre = n_samples.saturating_sub(n_test);
    let train_share = if train + val > 0.0 { train / (train + val) } else { 0.0 };
    let mut blocks = Vec::new();
    for fold in 0..n_folds {
        let start = pre * fold / n_folds;
        let end = pre * (fold + 1) / n_folds;
        let cut = start + ((end - start) as f64 * train_share).round() as usize;
        blocks.push(Block {
            role: Role::Train,
            start,
            end: cut,
        });
        blocks.push(Block {
            role: Role::Validation,
            start: cut,
            end,
        });
    }
    blocks.push(Block {
        role: Role::Test,
        start: pre,
        end: n_samples,
    });
    let needs = |role: Role, share: f64| share > 0.0 && blocks.iter().any(|b| b.role == role && b.is_empty());
    if needs(Role::Train, train) || needs(Role::Validation, val) || needs(Role::Test, test) {
        return Err(Error::TooFewSamples(format!(
            "{n_samples} rows cannot fill {n_folds} fold(s) at ratios ({train}, {val}, {test})"
        )));
    }
    blocks.retain(|b| !b.is_empty());
    Ok(SplitPlan {
        blocks,
        ratios,
        n_samples,
    })
}

impl SplitPlan {
    pub fn blocks_with(&self, role: Role) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(move |b| b.role == role)
    }

    pub fn ranges(&self, role: Role) -> Vec<Range<usize>> {
        self.blocks_with(role).map(Block::range).collect()
    }

    pub fn block_of(&self, row: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.contains(row))
    }

    /// Errors unless every block holds at least `min_len` rows.
    pub fn require_block_len(&self, min_len: usize) -> Result<()> {
        match self.blocks.iter().find(|b| b.len() < min_len) {
            Some(b) => Err(Error::TooFewSamples(format!(
                "{:?} block {}..{} is shorter than {min_len} rows",
                b.role, b.start, b.end
            ))),
            None => Ok(()),
        }
    }

    /// First rows of every `span`-row window that fits inside a block of
    /// `role`, taking every `stride`-th.
    pub fn window_origins(&self, role: Role, span: usize, stride: usize) -> Vec<usize> {
        let stride = stride.max(1);
        self.blocks_with(role)
            .flat_map(|b| {
                let last = b.end.checked_sub(span).filter(|l| *l >= b.start);
                last.map(|l| (b.start..=l).step_by(stride)).into_iter().flatten()
            })
            .collect()
    }

    /// Whether rows `origin..origin + span` touch more than one block.
    pub fn crosses_boundary(&self, origin: usize, span: usize) -> bool {
        match (self.block_of(origin), self.block_of(origin + span - 1)) {
            (Some(a), Some(b)) => a != b,
            _ => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hundred_rows_one_fold() {
        let p = blocked_splits(100, (0.67, 0.20, 0.13), 1).unwrap();
        assert_eq!(p.ranges(Role::Test), vec![87..100]);
        assert_eq!(p.ranges(Role::Train), vec![0..67]);
        assert_eq!(p.ranges(Role::Validation), vec![67..87]);
    }

    #[test]
    fn folds_interleave() {
        let p = blocked_splits(1000, (0.67, 0.20, 0.13), 3).unwrap();
        let roles: Vec<Role> = p.blocks.iter().map(|b| b.role).collect();
        use Role::*;
        assert_eq!(roles, vec![Train, Validation, Train, Validation, Train, Validation, Test]);
        for pair in p.blocks.windows(2) {
            assert_eq!(pair[0].end, pair[1].start);
        }
        assert_eq!(p.blocks[0].start, 0);
        assert_eq!(p.blocks.last().unwrap().end, 1000);
    }

    #[test]
    fn origins_stay_inside_blocks() {
        let p = blocked_splits(500, (0.67, 0.20, 0.13), 2).unwrap();
        for role in [Role::Train, Role::Validation, Role::Test] {
            for o in p.window_origins(role, 30, 1) {
                assert!(!p.crosses_boundary(o, 30));
                assert_eq!(p.block_of(o).unwrap().role, role);
            }
        }
    }

    #[test]
    fn bad_ratios() {
        assert!(matches!(blocked_splits(100, (0.5, 0.2, 0.2), 1), Err(Error::InvalidConfig(_))));
        assert!(matches!(blocked_splits(3, (0.67, 0.2, 0.13), 2), Err(Error::TooFewSamples(_))));
    }
}
