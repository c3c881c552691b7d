//! Non-contextual hidden-variable assignments and their violated contexts.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{check_spread, Geometry};
use crate::search::{GrayScan, SearchError};

#[derive(Debug, Error)]
pub enum ContextualityError {
    #[error("assignment has {found} values, geometry has {expected} points")]
    SizeMismatch { expected: usize, found: usize },
    #[error("geometry has {0} points, assignments hold at most 64")]
    TooManyPoints(usize),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("{0}")]
    Precondition(String),
}

/// A ±1 value per point; bit `i` set means point `i` takes the value −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Assignment {
    bits: u64,
    len: usize,
}

impl Assignment {
    pub fn new(len: usize, bits: u64) -> Result<Self, ContextualityError> {
        if len > 64 {
            return Err(ContextualityError::TooManyPoints(len));
        }
        let mask = if len == 64 {
            u64::MAX
        } else {
            (1u64 << len) - 1
        };
        Ok(Assignment {
            bits: bits & mask,
            len,
        })
    }

    /// Every point at +1.
    pub fn all_plus(g: &Geometry) -> Result<Self, ContextualityError> {
        Self::new(g.num_points(), 0)
    }

    pub fn from_values(values: &[i8]) -> Result<Self, ContextualityError> {
        let bits = values
            .iter()
            .enumerate()
            .map(|(i, &v)| match v {
                1 => Ok(0),
                -1 => Ok(1u64 << i),
                other => Err(ContextualityError::Precondition(format!(
                    "value {other} is not ±1"
                ))),
            })
            .sum::<Result<u64, _>>()?;
        Self::new(values.len(), bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn bit(&self, point: usize) -> u8 {
        (self.bits >> point & 1) as u8
    }

    pub fn value(&self, point: usize) -> i8 {
        1 - 2 * self.bit(point) as i8
    }

    pub fn values(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    pub fn flipped(&self, point: usize) -> Self {
        Assignment {
            bits: self.bits ^ (1 << point),
            len: self.len,
        }
    }

    fn check(&self, g: &Geometry) -> Result<(), ContextualityError> {
        if self.len != g.num_points() {
            return Err(ContextualityError::SizeMismatch {
                expected: g.num_points(),
                found: self.len,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) == 1 { "-" } else { "+" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub violated: Vec<usize>,
    pub count: usize,
    pub chi: i64,
}

fn line_violated(g: &Geometry, a: &Assignment, line: usize) -> bool {
    let parity = g.members(line).iter().fold(0, |acc, &p| acc ^ a.bit(p));
    parity != g.line(line).sign().bit()
}

pub fn violated_lines(g: &Geometry, a: &Assignment) -> Result<ViolationReport, ContextualityError> {
    a.check(g)?;
    let violated: Vec<usize> = (0..g.num_lines())
        .filter(|&l| line_violated(g, a, l))
        .collect();
    let count = violated.len();
    Ok(ViolationReport {
        violated,
        count,
        chi: g.num_lines() as i64 - 2 * count as i64,
    })
}

/// Cabello's χ: the sum over lines of sign times the product of values.
pub fn cabello_chi(g: &Geometry, a: &Assignment) -> Result<i64, ContextualityError> {
    a.check(g)?;
    Ok((0..g.num_lines())
        .map(|l| if line_violated(g, a, l) { -1 } else { 1 })
        .sum())
}

/// Flip masks and base mask of `g` for the Gray-code engine.
pub fn gray_scan(g: &Geometry) -> Result<GrayScan, ContextualityError> {
    gray_scan_ordered(g, &(0..g.num_points()).collect::<Vec<_>>())
}

/// As [`gray_scan`], with search bit `i` standing for point `order[i]`.
pub fn gray_scan_ordered(g: &Geometry, order: &[usize]) -> Result<GrayScan, ContextualityError> {
    let flips = order
        .iter()
        .map(|&p| {
            g.incident_lines(p)
                .iter()
                .fold(0u128, |m, &l| m | 1u128 << l)
        })
        .collect();
    let base = g
        .negative_lines()
        .iter()
        .fold(0u128, |m, &l| m | 1u128 << l);
    Ok(GrayScan::new(flips, base, g.num_lines())?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Degree {
    pub degree: usize,
    pub witness: Assignment,
    /// Number of assignments violating exactly `degree` lines.
    pub minimal_assignments: u64,
}

/// Minimum number of violated lines over all assignments, with the
/// smallest-encoded witness.
pub fn degree_of_contextuality(g: &Geometry, workers: usize) -> Result<Degree, ContextualityError> {
    let scan = gray_scan(g)?;
    let m = scan.minimum(workers)?;
    Ok(Degree {
        degree: m.min as usize,
        witness: Assignment::new(g.num_points(), m.witness)?,
        minimal_assignments: m.count,
    })
}

/// `N − 2d`, the largest χ any assignment reaches.
pub fn hv_bound(g: &Geometry, workers: usize) -> Result<i64, ContextualityError> {
    let d = degree_of_contextuality(g, workers)?;
    Ok(g.num_lines() as i64 - 2 * d.degree as i64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpreadVerdict {
    pub holds: bool,
    pub degree: usize,
    pub minimal_assignments: u64,
    pub counterexample: Option<Assignment>,
}

/// Checks that every minimal assignment of a GQ(2,4) violates a spread.
pub fn verify_minimal_spread_property(
    g: &Geometry,
    workers: usize,
) -> Result<SpreadVerdict, ContextualityError> {
    g.check_gq(4).map_err(|e| {
        ContextualityError::Precondition(format!("minimal spread check needs a GQ(2,4): {e}"))
    })?;
    let scan = gray_scan(g)?;
    let degree = scan.minimum(workers)?.min;
    let point_masks: Vec<u32> = (0..g.num_lines())
        .map(|l| g.members(l).iter().fold(0u32, |m, &p| m | 1 << p))
        .collect();
    let full = (1u32 << g.num_points()) - 1;
    let is_spread = |_: u64, mut mask: u128| {
        let mut covered = 0u32;
        while mask != 0 {
            let l = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            if covered & point_masks[l] != 0 {
                return false;
            }
            covered |= point_masks[l];
        }
        covered == full
    };
    let level = scan.level(degree, workers, is_spread)?;
    let counterexample = level
        .first_failure
        .map(|bits| Assignment::new(g.num_points(), bits))
        .transpose()?;
    Ok(SpreadVerdict {
        holds: level.failures == 0,
        degree: degree as usize,
        minimal_assignments: level.count,
        counterexample,
    })
}

/// The violated set of `a` as a spread, if it is one.
pub fn violated_set_is_spread(g: &Geometry, a: &Assignment) -> Result<bool, ContextualityError> {
    let report = violated_lines(g, a)?;
    Ok(check_spread(g, &report.violated).is_ok())
}
