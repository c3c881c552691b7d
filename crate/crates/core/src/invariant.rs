//! The cubic invariant I₃ of three real 3×3 matrices, its dressing into
//! Cabello's χ on the eloily, and the Pfaffian form on the doily.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::contextuality::{cabello_chi, gray_scan, Assignment, ContextualityError};
use crate::dense::DenseMatrix;
use crate::geometry::{build_doily, build_eloily, canonical_q, Geometry, GeometryError, PointId};
use crate::pauli::{Pauli, PauliOperator, Sign};
use crate::search::SearchError;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Contextuality(#[from] ContextualityError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("monomial {monomial} is not a line of the eloily")]
    NotALine { monomial: String },
    #[error("sign system is inconsistent (rank {rank}, augmented rank {augmented_rank})")]
    Unsolvable { rank: usize, augmented_rank: usize },
    #[error("invalid duad labelling: {0}")]
    Labelling(String),
    #[error("{0}")]
    Precondition(String),
}

pub type Matrix3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HVMatrices {
    pub a: Matrix3,
    pub b: Matrix3,
    pub c: Matrix3,
}

impl HVMatrices {
    fn slot(&self, s: Slot) -> f64 {
        let m = match s.matrix {
            0 => &self.a,
            1 => &self.b,
            _ => &self.c,
        };
        m[s.row][s.col]
    }
}

pub fn det3(m: &Matrix3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `Det(A) + Det(B) + Det(C) − Tr(C Bᵀ A)`.
pub fn i3_det(m: &HVMatrices) -> f64 {
    let mut tr = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                tr += m.c[i][j] * m.b[k][j] * m.a[k][i];
            }
        }
    }
    det3(&m.a) + det3(&m.b) + det3(&m.c) - tr
}

const SIGMA: [Pauli; 3] = Pauli::NONTRIVIAL;

/// Pauli label carried by a slot: `A_ij ↔ σi σj I`, `B_ij ↔ σi I σj`,
/// `C_ij ↔ I σi σj` with σ = (X, Y, Z).
pub fn slot_label(s: Slot) -> PauliOperator {
    let (i, j) = (SIGMA[s.row], SIGMA[s.col]);
    let symbols = match s.matrix {
        0 => [i, j, Pauli::I],
        1 => [i, Pauli::I, j],
        _ => [Pauli::I, i, j],
    };
    PauliOperator::new(Sign::Plus, &symbols).expect("three symbols")
}

/// The Hermitian 8×8 matrix `Σ A_ij σiσjI + B_ij σiIσj + C_ij Iσiσj`.
pub fn hermitian_h(m: &HVMatrices) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(8);
    for s in Slot::all() {
        let term = DenseMatrix::from_operator(&slot_label(s)).scale(Complex64::new(m.slot(s), 0.0));
        h = h.add(&term);
    }
    h
}

/// `−Tr(ℋ³)/48`, evaluated on dense matrices.
pub fn i3_trace(m: &HVMatrices) -> f64 {
    let h = hermitian_h(m);
    -h.matmul(&h).matmul(&h).trace().re / 48.0
}

/// An entry `(row, col)` of A (`matrix` 0), B (1) or C (2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Slot {
    pub matrix: usize,
    pub row: usize,
    pub col: usize,
}

impl Slot {
    pub fn all() -> impl Iterator<Item = Slot> {
        (0..27).map(|k| Slot {
            matrix: k / 9,
            row: k / 3 % 3,
            col: k % 3,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub coefficient: i8,
    pub slots: [Slot; 3],
}

const PERMUTATIONS: [([usize; 3], i8); 6] = [
    ([0, 1, 2], 1),
    ([1, 2, 0], 1),
    ([2, 0, 1], 1),
    ([0, 2, 1], -1),
    ([2, 1, 0], -1),
    ([1, 0, 2], -1),
];

/// The 45 monomials of `i3_det`: 6 from each determinant, 27 from the trace.
pub fn monomials() -> Vec<Monomial> {
    let mut out = Vec::with_capacity(45);
    for matrix in 0..3 {
        for (perm, sgn) in PERMUTATIONS {
            out.push(Monomial {
                coefficient: sgn,
                slots: [0, 1, 2].map(|r| Slot {
                    matrix,
                    row: r,
                    col: perm[r],
                }),
            });
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out.push(Monomial {
                    coefficient: -1,
                    slots: [
                        Slot {
                            matrix: 2,
                            row: i,
                            col: j,
                        },
                        Slot {
                            matrix: 1,
                            row: k,
                            col: j,
                        },
                        Slot {
                            matrix: 0,
                            row: k,
                            col: i,
                        },
                    ],
                });
            }
        }
    }
    out
}

/// Solves `Σ_{v ∈ row} x_v = rhs` over F2 by Gauss-Jordan elimination.
/// Returns the solution with every free variable at 0, and the rank.
pub fn solve_f2(rows: &[(u64, u8)], vars: usize) -> Result<(u64, usize), InvariantError> {
    let mut rows: Vec<(u64, u8)> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..vars {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0 >> col & 1 == 1) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0 >> col & 1 == 1 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|row| row.1 == 1) {
        return Err(InvariantError::Unsolvable {
            rank: r,
            augmented_rank: r + 1,
        });
    }
    let mut x = 0u64;
    for (i, &col) in pivots.iter().enumerate() {
        x |= (rows[i].1 as u64) << col;
    }
    Ok((x, r))
}

/// Point signs σ(p) turning `i3_det` of the dressed values into χ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignDressing {
    /// `(point, σ)` for every eloily point, ascending by point id.
    pub signs: Vec<(PointId, Sign)>,
    /// Dimension of the solution space of the sign system.
    pub nullity: usize,
}

impl SignDressing {
    pub fn sign_of(&self, id: PointId) -> Option<Sign> {
        self.signs
            .binary_search_by_key(&id, |&(p, _)| p)
            .ok()
            .map(|i| self.signs[i].1)
    }
}

/// Points whose dressing sign is −1.
pub const DRESSING_NEGATIVE: [&str; 15] = [
    "IZZ", "ZIZ", "ZZI", "IZX", "IZY", "ZIX", "ZIY", "IXZ", "IYZ", "ZXI", "ZYI", "IXX", "IXY",
    "IYX", "IYY",
];
/// Dimension of the dressing solution space.
pub const DRESSING_NULLITY: usize = 6;

/// The shipped dressing.
pub fn canonical_dressing() -> SignDressing {
    let g = build_eloily(&canonical_q()).expect("canonical eloily");
    let negative: Vec<PointId> = DRESSING_NEGATIVE
        .iter()
        .map(|s| {
            s.parse::<PauliOperator>()
                .and_then(|o| o.point())
                .expect("static label")
                .id()
        })
        .collect();
    SignDressing {
        signs: g
            .point_ids()
            .map(|id| {
                (
                    id,
                    if negative.contains(&id) {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    },
                )
            })
            .collect(),
        nullity: DRESSING_NULLITY,
    }
}

/// Derives a dressing from scratch: each monomial must be a line, and its
/// coefficient times the product of its σ must equal the line sign.
pub fn solve_sign_dressing() -> Result<SignDressing, InvariantError> {
    let g = build_eloily(&canonical_q())?;
    let index = |s: Slot| -> Result<usize, InvariantError> {
        let id = slot_label(s).point().map_err(GeometryError::from)?.id();
        g.point_index(id)
            .ok_or(InvariantError::Geometry(GeometryError::UnknownPoint(id)))
    };
    let mut rows = Vec::with_capacity(45);
    let mut seen = Vec::with_capacity(45);
    for m in monomials() {
        let idx = [index(m.slots[0])?, index(m.slots[1])?, index(m.slots[2])?];
        let ids = idx.map(|i| g.points()[i].id);
        let line = g.line_index(ids).ok_or_else(|| InvariantError::NotALine {
            monomial: m.slots.map(|s| slot_label(s).to_string()).join(" "),
        })?;
        if seen.contains(&line) {
            return Err(InvariantError::NotALine {
                monomial: format!("{} (repeated line)", g.describe_line(line)),
            });
        }
        seen.push(line);
        let mask = idx.iter().fold(0u64, |acc, &i| acc | 1 << i);
        let coeff = if m.coefficient < 0 { 1 } else { 0 };
        rows.push((mask, coeff ^ g.line(line).sign().bit()));
    }
    let (x, rank) = solve_f2(&rows, g.num_points())?;
    Ok(SignDressing {
        signs: g
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id, Sign::from_bit((x >> i & 1) as u8)))
            .collect(),
        nullity: g.num_points() - rank,
    })
}

fn require_canonical(g: &Geometry, name: &str, expected: &Geometry) -> Result<(), InvariantError> {
    if g.points() != expected.points() {
        return Err(InvariantError::Precondition(format!(
            "{name} must be given on the canonical {} point set",
            expected.name()
        )));
    }
    Ok(())
}

/// Fills A, B, C with `σ(p)·v(p)` for the point of each slot.
pub fn assignment_to_matrices(
    g: &Geometry,
    a: &Assignment,
    dressing: &SignDressing,
) -> Result<HVMatrices, InvariantError> {
    require_canonical(g, "assignment", &build_eloily(&canonical_q())?)?;
    if a.len() != g.num_points() {
        return Err(ContextualityError::SizeMismatch {
            expected: g.num_points(),
            found: a.len(),
        }
        .into());
    }
    Ok(fill_matrices(&slot_points(g)?, a, dressing))
}

fn slot_points(g: &Geometry) -> Result<[(usize, PointId); 27], InvariantError> {
    let mut out = [(0, 0); 27];
    for (k, s) in Slot::all().enumerate() {
        let id = slot_label(s).point().map_err(GeometryError::from)?.id();
        out[k] = (
            g.point_index(id).ok_or(GeometryError::UnknownPoint(id))?,
            id,
        );
    }
    Ok(out)
}

fn fill_matrices(
    slots: &[(usize, PointId); 27],
    a: &Assignment,
    dressing: &SignDressing,
) -> HVMatrices {
    let mut m = HVMatrices::default();
    for (k, s) in Slot::all().enumerate() {
        let (idx, id) = slots[k];
        let sigma = dressing.sign_of(id).map_or(1, |s| s.value());
        let v = (sigma * a.value(idx)) as f64;
        match s.matrix {
            0 => m.a[s.row][s.col] = v,
            1 => m.b[s.row][s.col] = v,
            _ => m.c[s.row][s.col] = v,
        }
    }
    m
}

/// Reusable evaluator of the dressed invariant on the canonical eloily.
pub struct DressedInvariant {
    slots: [(usize, PointId); 27],
    dressing: SignDressing,
}

impl DressedInvariant {
    pub fn new(dressing: SignDressing) -> Result<Self, InvariantError> {
        let g = build_eloily(&canonical_q())?;
        Ok(DressedInvariant {
            slots: slot_points(&g)?,
            dressing,
        })
    }

    pub fn matrices(&self, a: &Assignment) -> HVMatrices {
        fill_matrices(&self.slots, a, &self.dressing)
    }

    pub fn i3(&self, a: &Assignment) -> i64 {
        i3_det(&self.matrices(a)).round() as i64
    }

    /// `Det(A)` alone, the part living on grid 𝔸's points.
    pub fn det_a(&self, a: &Assignment) -> i64 {
        det3(&self.matrices(a).a).round() as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrangle {
    Grid,
    Doily,
    Eloily,
}

impl std::str::FromStr for Quadrangle {
    type Err = InvariantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(Quadrangle::Grid),
            "doily" => Ok(Quadrangle::Doily),
            "eloily" => Ok(Quadrangle::Eloily),
            other => Err(InvariantError::Precondition(format!(
                "unknown quadrangle {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxI3 {
    pub kind: Quadrangle,
    /// Largest χ over all assignments, found by the Gray-code search.
    pub value: i64,
    /// Invariant formula evaluated on the maximizing assignment.
    pub formula_value: i64,
    pub argmax: Assignment,
    pub lines: usize,
    pub degree: usize,
}

/// The geometry on which each quadrangle's invariant is evaluated: grid 𝔸
/// (the points `σiσjI`), the canonical doily, the canonical eloily.
pub fn quadrangle_geometry(kind: Quadrangle) -> Result<Geometry, InvariantError> {
    let g = match kind {
        Quadrangle::Grid => {
            let e = build_eloily(&canonical_q())?;
            let ids: Vec<PointId> = Slot::all()
                .take(9)
                .map(|s| slot_label(s).point().map(|p| p.id()))
                .collect::<Result<_, _>>()
                .map_err(GeometryError::from)?;
            e.induced("grid-A", &ids)?
        }
        Quadrangle::Doily => build_doily(&canonical_q())?,
        Quadrangle::Eloily => build_eloily(&canonical_q())?,
    };
    Ok(g)
}

/// Exhaustive maximum of the invariant over ±1 inputs. The search runs on
/// violated-line counts (max I₃ = N − 2d); the invariant formula is then
/// evaluated on the argmax as a cross-check.
pub fn max_i3(kind: Quadrangle, workers: usize) -> Result<MaxI3, InvariantError> {
    let g = quadrangle_geometry(kind)?;
    let m = gray_scan(&g)?.minimum(workers)?;
    let argmax = Assignment::new(g.num_points(), m.witness)?;
    let value = g.num_lines() as i64 - 2 * m.min as i64;
    let formula_value = match kind {
        Quadrangle::Grid => {
            let dressed = DressedInvariant::new(canonical_dressing())?;
            let e = build_eloily(&canonical_q())?;
            det3(&dressed.matrices(&lift(&g, &e, &argmax)?).a).round() as i64
        }
        Quadrangle::Doily => doily_pfaffian(&g, &argmax, &canonical_duads()?)?,
        Quadrangle::Eloily => DressedInvariant::new(canonical_dressing())?.i3(&argmax),
    };
    Ok(MaxI3 {
        kind,
        value,
        formula_value,
        argmax,
        lines: g.num_lines(),
        degree: m.min as usize,
    })
}

/// Extends an assignment on a subgeometry to `outer`, other points at +1.
pub fn lift(
    sub: &Geometry,
    outer: &Geometry,
    a: &Assignment,
) -> Result<Assignment, InvariantError> {
    let mut bits = 0u64;
    for (i, p) in sub.points().iter().enumerate() {
        let j = outer
            .point_index(p.id)
            .ok_or(GeometryError::UnknownPoint(p.id))?;
        bits |= (a.bit(i) as u64) << j;
    }
    Ok(Assignment::new(outer.num_points(), bits)?)
}

/// Bijection between the 15 doily points and the duads `{i, j}` of
/// `{0..5}`, with a sign τ per point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuadLabelling {
    /// `(point, (i, j), τ)` with `i < j`.
    pub entries: Vec<(PointId, (usize, usize), Sign)>,
}

/// The shipped labelling: point, duad, τ.
pub const DUAD_LABELLING: [(&str, (usize, usize), i8); 15] = [
    ("IZZ", (0, 1), -1),
    ("ZIZ", (2, 3), 1),
    ("ZZI", (4, 5), -1),
    ("IZX", (0, 2), -1),
    ("ZIX", (1, 3), -1),
    ("IXZ", (1, 4), 1),
    ("ZXI", (0, 5), 1),
    ("IXX", (2, 4), 1),
    ("IYY", (3, 5), -1),
    ("XIZ", (2, 5), -1),
    ("XZI", (3, 4), 1),
    ("XIX", (1, 5), 1),
    ("YIY", (0, 4), 1),
    ("XXI", (0, 3), 1),
    ("YYI", (1, 2), 1),
];

pub fn canonical_duads() -> Result<DuadLabelling, InvariantError> {
    let entries = DUAD_LABELLING
        .iter()
        .map(|&(label, duad, tau)| {
            let id = label
                .parse::<PauliOperator>()
                .and_then(|o| o.point())
                .map_err(GeometryError::from)?
                .id();
            Ok((id, duad, if tau < 0 { Sign::Minus } else { Sign::Plus }))
        })
        .collect::<Result<Vec<_>, InvariantError>>()?;
    Ok(DuadLabelling { entries })
}

/// Sign of the permutation `(i1 j1 i2 j2 i3 j3)` for a perfect matching.
fn matching_sign(pairs: &[(usize, usize)]) -> i8 {
    let seq: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    let inversions = (0..seq.len())
        .flat_map(|a| (a + 1..seq.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| seq[a] > seq[b])
        .count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The 15 perfect matchings of `{0..5}`, each with its Pfaffian sign.
pub fn perfect_matchings() -> Vec<([(usize, usize); 3], i8)> {
    let mut out = Vec::with_capacity(15);
    for b in 1..6 {
        let rest: Vec<usize> = (1..6).filter(|&x| x != b).collect();
        for c in 1..4 {
            let (p, q) = (rest[0], rest[c]);
            let last: Vec<usize> = rest[1..].iter().copied().filter(|&x| x != q).collect();
            let pairs = [(0, b), (p, q), (last[0], last[1])];
            out.push((pairs, matching_sign(&pairs)));
        }
    }
    out
}

/// Pfaffian of an antisymmetric matrix by expansion along the first row.
pub fn pfaffian(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let mut total = 0.0;
    for j in 1..n {
        if m[0][j] == 0.0 {
            continue;
        }
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let minor: Vec<Vec<f64>> = keep
            .iter()
            .map(|&r| keep.iter().map(|&c| m[r][c]).collect())
            .collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * m[0][j] * pfaffian(&minor);
    }
    total
}

fn check_labelling(
    g: &Geometry,
    l: &DuadLabelling,
) -> Result<Vec<(usize, usize, i8)>, InvariantError> {
    if g.num_points() != 15 || l.entries.len() != 15 {
        return Err(InvariantError::Labelling(format!(
            "need 15 points and 15 duads, got {} and {}",
            g.num_points(),
            l.entries.len()
        )));
    }
    let mut by_point = vec![None; 15];
    let mut used = [[false; 6]; 6];
    for &(id, (i, j), tau) in &l.entries {
        if !(i < j && j < 6) {
            return Err(InvariantError::Labelling(format!(
                "{{{i}, {j}}} is not a duad of 0..5"
            )));
        }
        if used[i][j] {
            return Err(InvariantError::Labelling(format!(
                "duad {{{i}, {j}}} used twice"
            )));
        }
        used[i][j] = true;
        let p = g
            .point_index(id)
            .ok_or_else(|| InvariantError::Labelling(format!("point {id} is not in the doily")))?;
        if by_point[p].is_some() {
            return Err(InvariantError::Labelling(format!(
                "point {} labelled twice",
                g.label_of(p)
            )));
        }
        by_point[p] = Some((i, j, tau.value()));
    }
    Ok(by_point
        .into_iter()
        .map(|e| e.expect("15 distinct points"))
        .collect())
}

/// The 6×6 antisymmetric matrix of dressed values `τ(p)·v(p)`.
pub fn doily_matrix(
    g: &Geometry,
    a: &Assignment,
    l: &DuadLabelling,
) -> Result<Vec<Vec<f64>>, InvariantError> {
    let entries = check_labelling(g, l)?;
    if a.len() != 15 {
        return Err(ContextualityError::SizeMismatch {
            expected: 15,
            found: a.len(),
        }
        .into());
    }
    let mut m = vec![vec![0.0; 6]; 6];
    for (p, &(i, j, tau)) in entries.iter().enumerate() {
        let v = (tau * a.value(p)) as f64;
        m[i][j] = v;
        m[j][i] = -v;
    }
    Ok(m)
}

pub fn doily_pfaffian(
    g: &Geometry,
    a: &Assignment,
    l: &DuadLabelling,
) -> Result<i64, InvariantError> {
    Ok(pfaffian(&doily_matrix(g, a, l)?).round() as i64)
}

/// Finds a duad labelling under which Pf equals χ: a bijection with
/// collinear ⇔ disjoint duads, found by backtracking in point order, then τ
/// solved over F2 so each matching's sign times Πτ is the line sign.
pub fn find_duad_labelling(g: &Geometry) -> Result<DuadLabelling, InvariantError> {
    g.check_gq(2)?;
    let duads: Vec<(usize, usize)> = (0..6)
        .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
        .collect();
    let disjoint =
        |a: (usize, usize), b: (usize, usize)| a.0 != b.0 && a.0 != b.1 && a.1 != b.0 && a.1 != b.1;
    let collinear = |p: usize, q: usize| {
        g.incident_lines(p)
            .iter()
            .any(|&l| g.members(l).contains(&q))
    };

    fn extend(
        p: usize,
        chosen: &mut Vec<usize>,
        used: &mut [bool; 15],
        ok: &dyn Fn(usize, usize, usize, usize) -> bool,
    ) -> bool {
        if p == 15 {
            return true;
        }
        for d in 0..15 {
            if used[d] || !(0..p).all(|q| ok(p, d, q, chosen[q])) {
                continue;
            }
            used[d] = true;
            chosen.push(d);
            if extend(p + 1, chosen, used, ok) {
                return true;
            }
            chosen.pop();
            used[d] = false;
        }
        false
    }

    let ok = |p: usize, dp: usize, q: usize, dq: usize| {
        collinear(p, q) == disjoint(duads[dp], duads[dq])
    };
    let mut chosen = Vec::with_capacity(15);
    if !extend(0, &mut chosen, &mut [false; 15], &ok) {
        return Err(InvariantError::Labelling(
            "no collinearity-preserving duad bijection".into(),
        ));
    }

    let mut rows = Vec::with_capacity(15);
    for (pairs, sgn) in perfect_matchings() {
        let members: Vec<usize> = pairs
            .iter()
            .map(|pair| {
                chosen
                    .iter()
                    .position(|&d| duads[d] == *pair)
                    .expect("bijection")
            })
            .collect();
        let ids = [0, 1, 2].map(|k| g.points()[members[k]].id);
        let line = g
            .line_index(ids)
            .ok_or_else(|| InvariantError::Labelling("matching does not map to a line".into()))?;
        let mask = members.iter().fold(0u64, |acc, &p| acc | 1 << p);
        rows.push((mask, (sgn < 0) as u8 ^ g.line(line).sign().bit()));
    }
    let (tau, _) = solve_f2(&rows, 15)?;
    Ok(DuadLabelling {
        entries: (0..15)
            .map(|p| {
                (
                    g.points()[p].id,
                    duads[chosen[p]],
                    Sign::from_bit((tau >> p & 1) as u8),
                )
            })
            .collect(),
    })
}

/// Counts assignments of the doily where Pf ≠ χ, exhaustively.
pub fn pfaffian_mismatches(g: &Geometry, l: &DuadLabelling) -> Result<u64, InvariantError> {
    let mut bad = 0;
    for bits in 0..1u64 << 15 {
        let a = Assignment::new(15, bits)?;
        if doily_pfaffian(g, &a, l)? != cabello_chi(g, &a)? {
            bad += 1;
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real(rng: &mut ChaCha8Rng) -> HVMatrices {
        let mut m = HVMatrices::default();
        for s in Slot::all() {
            let v = rng.random_range(-2.0..2.0);
            match s.matrix {
                0 => m.a[s.row][s.col] = v,
                1 => m.b[s.row][s.col] = v,
                _ => m.c[s.row][s.col] = v,
            }
        }
        m
    }

    #[test]
    fn det_and_trace_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = random_real(&mut rng);
            assert!((i3_det(&m) - i3_trace(&m)).abs() < 1e-9);
        }
        let ones = HVMatrices {
            a: [[1.0; 3]; 3],
            b: [[1.0; 3]; 3],
            c: [[1.0; 3]; 3],
        };
        assert_eq!(i3_det(&ones), -27.0);
        assert_eq!(i3_trace(&HVMatrices::default()), 0.0);
    }

    #[test]
    fn h_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = hermitian_h(&random_real(&mut rng));
        assert!(h.max_abs_diff(&h.adjoint()) < 1e-12);
    }

    #[test]
    fn monomials_expand_the_determinant_form() {
        let ms = monomials();
        assert_eq!(ms.len(), 45);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = random_real(&mut rng);
            let sum: f64 = ms
                .iter()
                .map(|mono| {
                    mono.coefficient as f64 * mono.slots.iter().map(|&s| m.slot(s)).product::<f64>()
                })
                .sum();
            assert!((sum - i3_det(&m)).abs() < 1e-9);
        }
    }

    #[test]
    fn shipped_dressing_is_the_solver_output() {
        let solved = solve_sign_dressing().unwrap();
        assert_eq!(solved, canonical_dressing());
        assert_eq!(solved.nullity, 6);
    }

    #[test]
    fn dressed_i3_is_chi() {
        let g = build_eloily(&canonical_q()).unwrap();
        let inv = DressedInvariant::new(canonical_dressing()).unwrap();
        assert_eq!(inv.i3(&Assignment::all_plus(&g).unwrap()), 27);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20_000 {
            let a = Assignment::new(27, rng.random()).unwrap();
            assert_eq!(inv.i3(&a), cabello_chi(&g, &a).unwrap());
        }
    }

    #[test]
    fn grid_determinant_is_grid_chi() {
        let e = build_eloily(&canonical_q()).unwrap();
        let grid = quadrangle_geometry(Quadrangle::Grid).unwrap();
        assert_eq!((grid.num_points(), grid.num_lines()), (9, 6));
        let inv = DressedInvariant::new(canonical_dressing()).unwrap();
        for bits in 0..1u64 << 9 {
            let a = Assignment::new(9, bits).unwrap();
            assert_eq!(
                inv.det_a(&lift(&grid, &e, &a).unwrap()),
                cabello_chi(&grid, &a).unwrap()
            );
        }
    }

    #[test]
    fn pm_one_determinants() {
        for bits in 0..1u32 << 9 {
            let mut m = [[0.0; 3]; 3];
            for k in 0..9 {
                m[k / 3][k % 3] = if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
            }
            let d = det3(&m);
            assert!([0.0, 4.0, -4.0].contains(&d), "{d}");
        }
    }

    #[test]
    fn matchings_and_pfaffian() {
        let ms = perfect_matchings();
        assert_eq!(ms.len(), 15);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut m = vec![vec![0.0; 6]; 6];
        for i in 0..6 {
            for j in i + 1..6 {
                let v: f64 = rng.random_range(-1.0..1.0);
                m[i][j] = v;
                m[j][i] = -v;
            }
        }
        let by_matchings: f64 = ms
            .iter()
            .map(|(pairs, s)| *s as f64 * pairs.iter().map(|&(i, j)| m[i][j]).product::<f64>())
            .sum();
        assert!((by_matchings - pfaffian(&m)).abs() < 1e-12);
    }

    #[test]
    fn shipped_duads_are_the_search_output() {
        let d = build_doily(&canonical_q()).unwrap();
        assert_eq!(find_duad_labelling(&d).unwrap(), canonical_duads().unwrap());
    }

    #[test]
    fn labelling_is_validated() {
        let d = build_doily(&canonical_q()).unwrap();
        let mut l = canonical_duads().unwrap();
        l.entries[1].1 = l.entries[0].1;
        let a = Assignment::all_plus(&d).unwrap();
        assert!(matches!(
            doily_pfaffian(&d, &a, &l),
            Err(InvariantError::Labelling(_))
        ));
        l.entries.pop();
        assert!(matches!(
            doily_pfaffian(&d, &a, &l),
            Err(InvariantError::Labelling(_))
        ));
    }
}
