//! Exhaustive ±1 assignment search over a binary-reflected Gray code.
//!
//! Each point contributes a bitmask of the lines through it. Flipping the
//! point toggles those lines' violation status, so one Gray-code step costs a
//! single XOR and the violated count is a popcount.
//!
//! The `2^bits` space is cut into `2^k` shards on the top `k` bits. Every
//! shard walks its own Gray code from its prefix; shard results are merged
//! by minimum count, then smallest assignment encoding, so the outcome does
//! not depend on the shard or worker count.

use rayon::prelude::*;
use thiserror::Error;

/// Largest number of points an exhaustive search accepts.
pub const MAX_SEARCH_BITS: usize = 30;
/// Largest number of lines a mask can hold.
pub const MAX_SEARCH_LINES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("exhaustive search over {0} points is infeasible (limit {MAX_SEARCH_BITS})")]
    TooManyPoints(usize),
    #[error("geometry has {0} lines, search masks hold at most {MAX_SEARCH_LINES}")]
    TooManyLines(usize),
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Min-scan result: lowest violated count, smallest assignment achieving it,
/// and how many assignments achieve it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinimumScan {
    pub min: u32,
    pub witness: u64,
    pub count: u64,
}

impl MinimumScan {
    fn merge(self, other: MinimumScan) -> MinimumScan {
        use std::cmp::Ordering::*;
        match self.min.cmp(&other.min) {
            Less => self,
            Greater => other,
            Equal => MinimumScan {
                min: self.min,
                witness: self.witness.min(other.witness),
                count: self.count + other.count,
            },
        }
    }
}

/// Level-scan result: assignments at a given violated count and those among
/// them failing a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LevelScan {
    pub count: u64,
    pub failures: u64,
    pub first_failure: Option<u64>,
}

impl LevelScan {
    fn merge(self, other: LevelScan) -> LevelScan {
        let first_failure = match (self.first_failure, other.first_failure) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        LevelScan {
            count: self.count + other.count,
            failures: self.failures + other.failures,
            first_failure,
        }
    }
}

/// Search problem: per-point flip masks and the violation mask of the
/// all-zero assignment.
#[derive(Debug, Clone)]
pub struct GrayScan {
    flips: Vec<u128>,
    base: u128,
}

impl GrayScan {
    pub fn new(flips: Vec<u128>, base: u128, lines: usize) -> Result<Self, SearchError> {
        if flips.len() > MAX_SEARCH_BITS {
            return Err(SearchError::TooManyPoints(flips.len()));
        }
        if lines > MAX_SEARCH_LINES {
            return Err(SearchError::TooManyLines(lines));
        }
        Ok(GrayScan { flips, base })
    }

    pub fn bits(&self) -> usize {
        self.flips.len()
    }

    /// Violation mask of an assignment, computed from scratch.
    pub fn mask_of(&self, assignment: u64) -> u128 {
        self.flips
            .iter()
            .enumerate()
            .filter(|(i, _)| assignment >> i & 1 == 1)
            .fold(self.base, |m, (_, f)| m ^ f)
    }

    /// Shard count exponent used for a given worker count.
    pub fn shard_bits(&self, workers: usize) -> usize {
        if workers <= 1 {
            return 0;
        }
        let log = usize::BITS as usize - (workers - 1).leading_zeros() as usize;
        (log + 3).min(self.bits())
    }

    /// Walks shard `shard` of `2^k`, calling `visit(assignment, mask)` once
    /// per assignment in Gray-code order.
    pub fn walk_shard<F: FnMut(u64, u128)>(&self, k: usize, shard: u64, mut visit: F) {
        let low = self.bits() - k;
        let mut a = shard << low;
        let mut mask = self.mask_of(a);
        visit(a, mask);
        for i in 1u64..(1u64 << low) {
            let j = i.trailing_zeros() as usize;
            a ^= 1 << j;
            mask ^= self.flips[j];
            visit(a, mask);
        }
    }

    fn run<T, W, M>(&self, workers: usize, per_shard: W, merge: M) -> Result<T, SearchError>
    where
        T: Send,
        W: Fn(usize, u64) -> T + Sync,
        M: Fn(T, T) -> T + Sync,
    {
        if workers == 0 {
            return Err(SearchError::NoWorkers);
        }
        let k = self.shard_bits(workers);
        if workers == 1 {
            return Ok((0..1u64 << k)
                .map(|s| per_shard(k, s))
                .reduce(&merge)
                .expect("one shard"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SearchError::Pool(e.to_string()))?;
        // Shard results are collected in shard order and folded sequentially.
        let parts: Vec<T> = pool.install(|| {
            (0..1u64 << k)
                .into_par_iter()
                .map(|s| per_shard(k, s))
                .collect()
        });
        Ok(parts.into_iter().reduce(merge).expect("at least one shard"))
    }

    /// Minimum violated count over all assignments.
    pub fn minimum(&self, workers: usize) -> Result<MinimumScan, SearchError> {
        self.run(
            workers,
            |k, shard| {
                let mut best = MinimumScan {
                    min: u32::MAX,
                    witness: u64::MAX,
                    count: 0,
                };
                self.walk_shard(k, shard, |a, mask| {
                    let c = mask.count_ones();
                    if c < best.min {
                        best = MinimumScan {
                            min: c,
                            witness: a,
                            count: 1,
                        };
                    } else if c == best.min {
                        best.count += 1;
                        best.witness = best.witness.min(a);
                    }
                });
                best
            },
            MinimumScan::merge,
        )
    }

    /// Maximum violated count (used for the most negative χ).
    pub fn maximum(&self, workers: usize) -> Result<MinimumScan, SearchError> {
        self.run(
            workers,
            |k, shard| {
                let mut best = MinimumScan {
                    min: 0,
                    witness: u64::MAX,
                    count: 0,
                };
                self.walk_shard(k, shard, |a, mask| {
                    let c = mask.count_ones();
                    if c > best.min || best.count == 0 {
                        best = MinimumScan {
                            min: c,
                            witness: a,
                            count: 1,
                        };
                    } else if c == best.min {
                        best.count += 1;
                        best.witness = best.witness.min(a);
                    }
                });
                best
            },
            |x, y| {
                use std::cmp::Ordering::*;
                match x.min.cmp(&y.min) {
                    Greater => x,
                    Less => y,
                    Equal => MinimumScan {
                        min: x.min,
                        witness: x.witness.min(y.witness),
                        count: x.count + y.count,
                    },
                }
            },
        )
    }

    /// Counts assignments with exactly `level` violations and checks `pred`
    /// on each of them.
    pub fn level<P>(&self, level: u32, workers: usize, pred: P) -> Result<LevelScan, SearchError>
    where
        P: Fn(u64, u128) -> bool + Sync,
    {
        self.run(
            workers,
            |k, shard| {
                let mut out = LevelScan::default();
                self.walk_shard(k, shard, |a, mask| {
                    if mask.count_ones() == level {
                        out.count += 1;
                        if !pred(a, mask) {
                            out.failures += 1;
                            out.first_failure = Some(out.first_failure.map_or(a, |f| f.min(a)));
                        }
                    }
                });
                out
            },
            LevelScan::merge,
        )
    }

    /// Histogram of violated counts over all assignments.
    pub fn histogram(&self, workers: usize) -> Result<Vec<u64>, SearchError> {
        self.run(
            workers,
            |k, shard| {
                let mut h = vec![0u64; MAX_SEARCH_LINES + 1];
                self.walk_shard(k, shard, |_, mask| h[mask.count_ones() as usize] += 1);
                h
            },
            |mut x, y| {
                for (a, b) in x.iter_mut().zip(y) {
                    *a += b;
                }
                x
            },
        )
    }
}
