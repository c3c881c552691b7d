//! Point-line incidence structures labelled by Pauli observables.
//!
//! Everything here is a subgeometry of a symplectic polar space W(2N-1, 2):
//! points are nonzero vectors of F2^{2N} (identified with unsigned Pauli
//! operators) and lines are triples `{p, q, p+q}` of pairwise commuting
//! points, each carrying the sign `ε` of `O_p O_q O_{p+q} = ε I`.

mod io;
mod subgeometry;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::pauli::{
    line_sign, q0, symplectic_bits, PauliError, PauliOperator, ProjectivePoint, Sign,
};

pub use io::{from_text, load, save, to_text};
pub use subgeometry::{disjoint_triples, enumerate_subgeometries, SubgeometryKind};

/// Point identifier: the packed coordinate word `[μ1..μN ν1..νN]`.
pub type PointId = u64;

/// The three subgrids of the canonical eloily, indexed `[row][column]`.
pub const CANONICAL_GRIDS: [[[&str; 3]; 3]; 3] = [
    [
        ["XYI", "ZXI", "YZI"],
        ["ZZI", "YYI", "XXI"],
        ["YXI", "XZI", "ZYI"],
    ],
    [
        ["YIX", "XIZ", "ZIY"],
        ["ZIZ", "YIY", "XIX"],
        ["XIY", "ZIX", "YIZ"],
    ],
    [
        ["IXY", "IZX", "IYZ"],
        ["IZZ", "IYY", "IXX"],
        ["IYX", "IXZ", "IZY"],
    ],
];

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("invalid line {line}: {reason}")]
    InvalidLine { line: String, reason: String },
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("duplicate line {0}")]
    DuplicateLine(String),
    #[error("point {0} is not part of the geometry")]
    UnknownPoint(PointId),
    #[error("geometry has no lines")]
    Empty,
    #[error("{0}")]
    Precondition(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("unsupported subgeometry kind {0:?}, expected grid or doily")]
    UnsupportedKind(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A context: three collinear points (stored ascending) and the line sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    points: [PointId; 3],
    sign: Sign,
}

impl Line {
    pub fn new(mut points: [PointId; 3], sign: Sign) -> Self {
        points.sort_unstable();
        Line { points, sign }
    }

    pub fn points(&self) -> [PointId; 3] {
        self.points
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_negative(&self) -> bool {
        self.sign.is_negative()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.points.contains(&id)
    }

    pub fn position(&self, id: PointId) -> Option<usize> {
        self.points.iter().position(|&p| p == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    pub id: PointId,
    pub label: PauliOperator,
}

/// A finite point-line geometry with signed lines.
///
/// Points are kept sorted by id and lines sorted by their point triples, so
/// two geometries with the same contents compare equal regardless of how
/// they were built.
#[derive(Debug, Clone)]
pub struct Geometry {
    name: String,
    width: usize,
    points: Vec<Point>,
    lines: Vec<Line>,
    members: Vec<[usize; 3]>,
    incidence: Vec<Vec<usize>>,
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.points == other.points && self.lines == other.lines
    }
}

fn label(width: usize, id: PointId) -> String {
    ProjectivePoint::from_id(width, id)
        .map(|p| p.to_string())
        .unwrap_or_else(|_| format!("#{id}"))
}

impl Geometry {
    /// Builds and validates a geometry from point ids and signed lines.
    ///
    /// Every line must consist of three distinct known points that pairwise
    /// commute and sum to zero. Line signs are taken as given, so a geometry
    /// may carry a sign distribution other than the one its labels induce.
    pub fn from_parts(
        name: impl Into<String>,
        width: usize,
        point_ids: impl IntoIterator<Item = PointId>,
        lines: impl IntoIterator<Item = Line>,
    ) -> Result<Self, GeometryError> {
        let mut ids: Vec<PointId> = point_ids.into_iter().collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(GeometryError::DuplicatePoint(label(width, w[0])));
        }
        let points = ids
            .iter()
            .map(|&id| {
                Ok(Point {
                    id,
                    label: ProjectivePoint::from_id(width, id)?.operator(),
                })
            })
            .collect::<Result<Vec<_>, PauliError>>()?;

        let mut lines: Vec<Line> = lines.into_iter().collect();
        lines.sort_unstable();
        if let Some(w) = lines.windows(2).find(|w| w[0].points == w[1].points) {
            return Err(GeometryError::DuplicateLine(describe(width, &w[0])));
        }
        let index = |id: PointId| {
            ids.binary_search(&id)
                .map_err(|_| GeometryError::UnknownPoint(id))
        };
        let mut members = Vec::with_capacity(lines.len());
        let mut incidence = vec![Vec::new(); ids.len()];
        for (li, line) in lines.iter().enumerate() {
            validate_line(width, line)?;
            let m = [
                index(line.points[0])?,
                index(line.points[1])?,
                index(line.points[2])?,
            ];
            for &p in &m {
                incidence[p].push(li);
            }
            members.push(m);
        }
        Ok(Geometry {
            name: name.into(),
            width,
            points,
            lines,
            members,
            incidence,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Qubits per label.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point_ids(&self) -> impl Iterator<Item = PointId> + '_ {
        self.points.iter().map(|p| p.id)
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, index: usize) -> &Line {
        &self.lines[index]
    }

    /// Point indices of a line, in the line's stored order.
    pub fn members(&self, line: usize) -> [usize; 3] {
        self.members[line]
    }

    /// Indices of the lines through a point.
    pub fn incident_lines(&self, point: usize) -> &[usize] {
        &self.incidence[point]
    }

    pub fn point_index(&self, id: PointId) -> Option<usize> {
        self.points.binary_search_by_key(&id, |p| p.id).ok()
    }

    pub fn label_of(&self, point: usize) -> &PauliOperator {
        &self.points[point].label
    }

    pub fn line_index(&self, points: [PointId; 3]) -> Option<usize> {
        let mut key = points;
        key.sort_unstable();
        self.lines.binary_search_by(|l| l.points.cmp(&key)).ok()
    }

    pub fn negative_lines(&self) -> Vec<usize> {
        (0..self.lines.len())
            .filter(|&i| self.lines[i].is_negative())
            .collect()
    }

    pub fn describe_line(&self, line: usize) -> String {
        describe(self.width, &self.lines[line])
    }

    /// True when every line sign equals the sign its labels multiply to.
    pub fn signs_match_labels(&self) -> bool {
        self.lines
            .iter()
            .all(|l| computed_sign(self.width, l.points).ok() == Some(l.sign))
    }

    /// Same points and lines with every sign recomputed from the labels.
    pub fn with_label_signs(&self) -> Result<Geometry, GeometryError> {
        let lines = self
            .lines
            .iter()
            .map(|l| Ok(Line::new(l.points, computed_sign(self.width, l.points)?)))
            .collect::<Result<Vec<_>, GeometryError>>()?;
        Geometry::from_parts(self.name.clone(), self.width, self.point_ids(), lines)
    }

    /// Subgeometry on `ids` containing every line that lies entirely inside.
    pub fn induced(
        &self,
        name: impl Into<String>,
        ids: &[PointId],
    ) -> Result<Geometry, GeometryError> {
        let keep: BTreeSet<PointId> = ids.iter().copied().collect();
        for &id in &keep {
            self.point_index(id)
                .ok_or(GeometryError::UnknownPoint(id))?;
        }
        let lines = self
            .lines
            .iter()
            .filter(|l| l.points.iter().all(|p| keep.contains(p)))
            .copied();
        Geometry::from_parts(name, self.width, keep.iter().copied(), lines)
    }

    /// Subgeometry made of the given lines and the points they cover.
    pub fn with_lines(
        &self,
        name: impl Into<String>,
        line_indices: &[usize],
    ) -> Result<Geometry, GeometryError> {
        let lines: Vec<Line> = line_indices.iter().map(|&i| self.lines[i]).collect();
        let ids: BTreeSet<PointId> = lines.iter().flat_map(|l| l.points).collect();
        Geometry::from_parts(name, self.width, ids, lines)
    }

    /// `(s, t)` if every line has `s + 1` points, every point lies on `t + 1`
    /// lines and no three pairwise collinear points avoid a common line.
    pub fn gq_order(&self) -> Option<(usize, usize)> {
        let degree = self.incidence.first()?.len();
        if degree == 0 || self.incidence.iter().any(|ls| ls.len() != degree) {
            return None;
        }
        self.is_triangle_free().then_some((2, degree - 1))
    }

    pub fn is_triangle_free(&self) -> bool {
        let n = self.points.len();
        let mut pair_line: HashMap<(usize, usize), usize> = HashMap::new();
        let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (li, m) in self.members.iter().enumerate() {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        nbrs[m[a]].insert(m[b]);
                        pair_line.insert((m[a], m[b]), li);
                    }
                }
            }
        }
        for (&(a, b), &li) in &pair_line {
            if a > b {
                continue;
            }
            let third = self.members[li].iter().copied().find(|&c| c != a && c != b);
            if nbrs[a].intersection(&nbrs[b]).any(|c| Some(*c) != third) {
                return false;
            }
        }
        true
    }

    /// Checks the counts of a generalized quadrangle GQ(2, t).
    pub fn check_gq(&self, t: usize) -> Result<(), GeometryError> {
        let expected_points = 3 * (2 * t + 1);
        let expected_lines = (t + 1) * (2 * t + 1);
        if self.num_points() != expected_points || self.num_lines() != expected_lines {
            return Err(GeometryError::Precondition(format!(
                "{} has {} points and {} lines; GQ(2,{t}) needs {expected_points} and {expected_lines}",
                self.name,
                self.num_points(),
                self.num_lines()
            )));
        }
        match self.gq_order() {
            Some((2, tt)) if tt == t => Ok(()),
            _ => Err(GeometryError::Precondition(format!(
                "{} is not a generalized quadrangle GQ(2,{t})",
                self.name
            ))),
        }
    }
}

fn describe(width: usize, line: &Line) -> String {
    let [a, b, c] = line.points;
    format!(
        "{}-{}-{}",
        label(width, a),
        label(width, b),
        label(width, c)
    )
}

fn validate_line(width: usize, line: &Line) -> Result<(), GeometryError> {
    let [a, b, c] = line.points;
    let err = |reason: &str| GeometryError::InvalidLine {
        line: describe(width, line),
        reason: reason.to_string(),
    };
    if a == b || b == c {
        return Err(err("points are not distinct"));
    }
    if a ^ b ^ c != 0 {
        return Err(err("third point is not the sum of the other two"));
    }
    let pa = ProjectivePoint::from_id(width, a)?;
    let pb = ProjectivePoint::from_id(width, b)?;
    if symplectic_bits(pa.mu(), pa.nu(), pb.mu(), pb.nu()) != 0 {
        return Err(err("points do not commute"));
    }
    Ok(())
}

fn computed_sign(width: usize, ids: [PointId; 3]) -> Result<Sign, PauliError> {
    let ops = ids
        .iter()
        .map(|&id| ProjectivePoint::from_id(width, id).map(|p| p.operator()))
        .collect::<Result<Vec<_>, _>>()?;
    line_sign(&ops[0], &ops[1], &ops[2])
}

/// The symplectic polar space W(2N-1, 2): all `4^N - 1` points and all
/// totally isotropic lines, signed by their labels.
pub fn build_symplectic(width: usize) -> Result<Geometry, GeometryError> {
    if !(1..=4).contains(&width) {
        return Err(GeometryError::Precondition(format!(
            "symplectic space supported for 1..=4 qubits, got {width}"
        )));
    }
    let pts: Vec<ProjectivePoint> = ProjectivePoint::all(width).collect();
    let mut triples = BTreeSet::new();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            if symplectic_bits(p.mu(), p.nu(), q.mu(), q.nu()) == 0 {
                let mut t = [p.id(), q.id(), p.id() ^ q.id()];
                t.sort_unstable();
                triples.insert(t);
            }
        }
    }
    let lines = triples
        .into_iter()
        .map(|t| Ok(Line::new(t, computed_sign(width, t)?)))
        .collect::<Result<Vec<_>, GeometryError>>()?;
    Geometry::from_parts(
        format!("W({},2)", 2 * width - 1),
        width,
        pts.iter().map(|p| p.id()),
        lines,
    )
}

/// W(5,2): 63 three-qubit observables and their 315 contexts.
pub fn build_w52() -> Result<Geometry, GeometryError> {
    build_symplectic(3)
}

/// W(3,2), the two-qubit doily.
pub fn build_w32() -> Result<Geometry, GeometryError> {
    Ok(build_symplectic(2)?.with_name("doily-2q"))
}

fn quadric(q: &PauliOperator, want_skew: bool, kind: &str) -> Result<Vec<PointId>, GeometryError> {
    if q.is_skew() != want_skew {
        return Err(GeometryError::Precondition(format!(
            "{kind} quadric needs a {} point, got {q}",
            if want_skew { "skew" } else { "even" }
        )));
    }
    let (qx, qz) = (q.xbits(), q.zbits());
    Ok(ProjectivePoint::all(q.width())
        .filter(|p| q0(p) ^ symplectic_bits(p.mu(), p.nu(), qx, qz) == 0)
        .map(|p| p.id())
        .collect())
}

/// `E_q = {p : Q_q(p) = 0}` for a skew `q`.
pub fn elliptic_quadric(q: &PauliOperator) -> Result<Vec<PointId>, GeometryError> {
    quadric(q, true, "elliptic")
}

/// `H_q = {p : Q_q(p) = 0}` for an even `q`; the identity gives `H_III`.
pub fn hyperbolic_quadric(q: &PauliOperator) -> Result<Vec<PointId>, GeometryError> {
    quadric(q, false, "hyperbolic")
}

/// The eloily GQ(2,4): W(5,2) restricted to `E_q`.
pub fn build_eloily(q: &PauliOperator) -> Result<Geometry, GeometryError> {
    if q.width() != 3 {
        return Err(GeometryError::Precondition(format!(
            "eloily needs a three-qubit point, got {q}"
        )));
    }
    let ids = elliptic_quadric(q)?;
    build_w52()?.induced("eloily", &ids)
}

/// The doily `D_q = E_q ∩ H_III`: even points of `E_q`, i.e. the even
/// operators commuting with `q`.
pub fn build_doily(q: &PauliOperator) -> Result<Geometry, GeometryError> {
    if q.width() != 3 {
        return Err(GeometryError::Precondition(format!(
            "doily needs a three-qubit point, got {q}"
        )));
    }
    let ids: Vec<PointId> = elliptic_quadric(q)?
        .into_iter()
        .filter(|&id| {
            ProjectivePoint::from_id(3, id)
                .map(|p| q0(&p) == 0)
                .unwrap_or(false)
        })
        .collect();
    build_w52()?.induced("doily", &ids)
}

/// `YYY`, the point of the canonical labelling.
pub fn canonical_q() -> PauliOperator {
    "YYY".parse().expect("static label")
}

/// A 3×3 grid whose rows and columns are the contexts.
pub fn grid_from_labels(name: &str, cells: &[[&str; 3]; 3]) -> Result<Geometry, GeometryError> {
    let ops = cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| s.parse::<PauliOperator>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let width = ops[0][0].width();
    let id = |r: usize, c: usize| -> Result<PointId, PauliError> { Ok(ops[r][c].point()?.id()) };
    let mut lines = Vec::with_capacity(6);
    for i in 0..3 {
        let row = [id(i, 0)?, id(i, 1)?, id(i, 2)?];
        let col = [id(0, i)?, id(1, i)?, id(2, i)?];
        lines.push(Line::new(
            row,
            line_sign(&ops[i][0], &ops[i][1], &ops[i][2])?,
        ));
        lines.push(Line::new(
            col,
            line_sign(&ops[0][i], &ops[1][i], &ops[2][i])?,
        ));
    }
    let ids: Vec<PointId> = ops
        .iter()
        .flatten()
        .map(|o| o.point().map(|p| p.id()))
        .collect::<Result<_, _>>()?;
    Geometry::from_parts(name, width, ids, lines)
}

/// The grids 𝔸, 𝔹, ℂ partitioning the canonical eloily.
pub fn build_canonical_grids() -> Result<[Geometry; 3], GeometryError> {
    Ok([
        grid_from_labels("grid-A", &CANONICAL_GRIDS[0])?,
        grid_from_labels("grid-B", &CANONICAL_GRIDS[1])?,
        grid_from_labels("grid-C", &CANONICAL_GRIDS[2])?,
    ])
}

/// Grid 𝔸 with its idle third qubit dropped: a two-qubit Mermin square.
pub fn mermin_square_2q() -> Result<Geometry, GeometryError> {
    let cells = CANONICAL_GRIDS[0].map(|row| row.map(|s| &s[..2]));
    grid_from_labels("grid-2q", &cells)
}

/// A set of pairwise disjoint lines covering every point exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Spread {
    pub lines: Vec<usize>,
}

/// Which spread axiom a candidate line set breaks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SpreadFailure {
    NoLines,
    Overlap {
        first: usize,
        second: usize,
        point: PointId,
    },
    Uncovered {
        points: Vec<PointId>,
    },
}

impl fmt::Display for SpreadFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpreadFailure::NoLines => write!(f, "no candidate lines"),
            SpreadFailure::Overlap {
                first,
                second,
                point,
            } => {
                write!(f, "lines {first} and {second} share point {point}")
            }
            SpreadFailure::Uncovered { points } => {
                write!(f, "{} points are not covered", points.len())
            }
        }
    }
}

/// Direct cover count of a candidate line set.
pub fn check_spread(g: &Geometry, lines: &[usize]) -> Result<Spread, SpreadFailure> {
    if lines.is_empty() {
        return Err(SpreadFailure::NoLines);
    }
    let mut owner: Vec<Option<usize>> = vec![None; g.num_points()];
    for &li in lines {
        for p in g.members(li) {
            if let Some(first) = owner[p] {
                return Err(SpreadFailure::Overlap {
                    first,
                    second: li,
                    point: g.points()[p].id,
                });
            }
            owner[p] = Some(li);
        }
    }
    let uncovered: Vec<PointId> = owner
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_none())
        .map(|(i, _)| g.points()[i].id)
        .collect();
    if uncovered.is_empty() {
        let mut lines = lines.to_vec();
        lines.sort_unstable();
        Ok(Spread { lines })
    } else {
        Err(SpreadFailure::Uncovered { points: uncovered })
    }
}

/// The negative lines, if they form a spread.
pub fn find_negative_spread(g: &Geometry) -> Result<Spread, SpreadFailure> {
    check_spread(g, &g.negative_lines())
}
