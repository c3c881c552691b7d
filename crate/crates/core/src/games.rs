//! Referee protocols and exact classical values of the grid, doily and
//! eloily games.
//!
//! The referee picks a point uniformly, then an unordered tuple of distinct
//! lines through it uniformly; player `i` receives the `i`-th line of the
//! tuple and answers a ±1 triple for it. The players win when the product of
//! their answers at the chosen point is +1 (for two players: they agree).

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::contextuality::{
    degree_of_contextuality, violated_lines, Assignment, ContextualityError,
};
use crate::geometry::Geometry;
use crate::invariant::{solve_f2, InvariantError};

pub type Probability = Ratio<u64>;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("{0}")]
    Precondition(String),
    #[error("strategy has {found} lines, geometry has {expected}")]
    MissingLine { expected: usize, found: usize },
    #[error("answer triple for line {line} has product {product}, line sign is {sign}")]
    Parity { line: usize, product: i8, sign: i8 },
    #[error("invalid deviation: {0}")]
    Deviation(String),
    #[error(transparent)]
    Contextuality(#[from] ContextualityError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error("responder failed: {0}")]
    Responder(String),
}

/// One referee question: a point and the lines handed to the players.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefereeChoice {
    pub point: usize,
    pub lines: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GameSpec {
    geometry: Geometry,
    players: usize,
    tuples: Vec<Vec<Vec<usize>>>,
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl GameSpec {
    pub fn new(geometry: Geometry, players: usize) -> Result<Self, GameError> {
        if players != 2 && players != 4 {
            return Err(GameError::Precondition(format!(
                "games need 2 or 4 players, got {players}"
            )));
        }
        let mut tuples = Vec::with_capacity(geometry.num_points());
        for p in 0..geometry.num_points() {
            let lines = geometry.incident_lines(p);
            if lines.len() < players {
                return Err(GameError::Precondition(format!(
                    "point {} lies on {} lines, {players} players need at least {players}",
                    geometry.label_of(p),
                    lines.len()
                )));
            }
            tuples.push(combinations(lines, players));
        }
        Ok(GameSpec {
            geometry,
            players,
            tuples,
        })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Line tuples the referee may hand out at `point`.
    pub fn tuples(&self, point: usize) -> &[Vec<usize>] {
        &self.tuples[point]
    }

    /// Every referee choice with its probability.
    pub fn choices(&self) -> impl Iterator<Item = (RefereeChoice, Probability)> + '_ {
        let n = self.geometry.num_points() as u64;
        self.tuples.iter().enumerate().flat_map(move |(p, ts)| {
            let w = Ratio::new(1, n * ts.len() as u64);
            ts.iter().map(move |t| {
                (
                    RefereeChoice {
                        point: p,
                        lines: t.clone(),
                    },
                    w,
                )
            })
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RefereeChoice {
        let point = rng.random_range(0..self.geometry.num_points());
        let ts = &self.tuples[point];
        RefereeChoice {
            point,
            lines: ts[rng.random_range(0..ts.len())].clone(),
        }
    }

    /// Win condition on the players' answer triples.
    pub fn wins(&self, choice: &RefereeChoice, answers: &[[i8; 3]]) -> bool {
        self.values_at_point(choice, answers).iter().product::<i8>() == 1
    }

    /// Each player's answer for the chosen point.
    pub fn values_at_point(&self, choice: &RefereeChoice, answers: &[[i8; 3]]) -> Vec<i8> {
        choice
            .lines
            .iter()
            .zip(answers)
            .map(|(&l, ans)| {
                let pos = self
                    .geometry
                    .members(l)
                    .iter()
                    .position(|&q| q == choice.point)
                    .expect("incident line");
                ans[pos]
            })
            .collect()
    }
}

/// A deterministic table: one ±1 triple per line, ordered like the line's
/// points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassicalStrategy {
    answers: Vec<[i8; 3]>,
}

impl ClassicalStrategy {
    pub fn new(g: &Geometry, answers: Vec<[i8; 3]>) -> Result<Self, GameError> {
        if answers.len() != g.num_lines() {
            return Err(GameError::MissingLine {
                expected: g.num_lines(),
                found: answers.len(),
            });
        }
        for (l, t) in answers.iter().enumerate() {
            if t.iter().any(|&v| v != 1 && v != -1) {
                return Err(GameError::Precondition(format!(
                    "answer {t:?} for line {l} is not ±1"
                )));
            }
            let product = t.iter().product::<i8>();
            let sign = g.line(l).sign().value();
            if product != sign {
                return Err(GameError::Parity {
                    line: l,
                    product,
                    sign,
                });
            }
        }
        Ok(ClassicalStrategy { answers })
    }

    pub fn answer(&self, line: usize) -> [i8; 3] {
        self.answers[line]
    }

    pub fn answers(&self) -> &[[i8; 3]] {
        &self.answers
    }
}

/// For each violated line of `a`, the point (geometry index) whose answer is
/// flipped.
pub type Deviations = Vec<(usize, usize)>;

/// Answers every line with `a`'s values, flipping the chosen deviation point
/// on each violated line.
pub fn strategy_from_assignment(
    g: &Geometry,
    a: &Assignment,
    deviations: &[(usize, usize)],
) -> Result<ClassicalStrategy, GameError> {
    let violated = violated_lines(g, a)?.violated;
    let mut answers: Vec<[i8; 3]> = (0..g.num_lines())
        .map(|l| g.members(l).map(|p| a.value(p)))
        .collect();
    let mut done = vec![false; g.num_lines()];
    for &(line, point) in deviations {
        if line >= g.num_lines() {
            return Err(GameError::Deviation(format!("line {line} does not exist")));
        }
        if !violated.contains(&line) {
            return Err(GameError::Deviation(format!(
                "line {} is satisfied",
                g.describe_line(line)
            )));
        }
        if done[line] {
            return Err(GameError::Deviation(format!(
                "line {} deviates twice",
                g.describe_line(line)
            )));
        }
        let pos = g
            .members(line)
            .iter()
            .position(|&q| q == point)
            .ok_or_else(|| {
                GameError::Deviation(format!(
                    "point {point} is not on line {}",
                    g.describe_line(line)
                ))
            })?;
        answers[line][pos] = -answers[line][pos];
        done[line] = true;
    }
    if let Some(&l) = violated.iter().find(|&&l| !done[l]) {
        return Err(GameError::Deviation(format!(
            "violated line {} has no deviation",
            g.describe_line(l)
        )));
    }
    ClassicalStrategy::new(g, answers)
}

/// Deviations at the first point of every violated line.
pub fn first_point_deviations(g: &Geometry, a: &Assignment) -> Result<Deviations, GameError> {
    Ok(violated_lines(g, a)?
        .violated
        .into_iter()
        .map(|l| (l, g.members(l)[0]))
        .collect())
}

/// All `3^k` deviation choices for `a`'s `k` violated lines.
pub fn all_deviations(g: &Geometry, a: &Assignment) -> Result<Vec<Deviations>, GameError> {
    let violated = violated_lines(g, a)?.violated;
    let mut out: Vec<Deviations> = vec![Vec::new()];
    for l in violated {
        out = out
            .into_iter()
            .flat_map(|d| {
                g.members(l).map(|p| {
                    let mut d = d.clone();
                    d.push((l, p));
                    d
                })
            })
            .collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationResult {
    pub value: Probability,
    /// Win probability conditioned on each point.
    pub per_point: Vec<Probability>,
    pub choices: u64,
}

pub fn evaluate_pointline_game(
    spec: &GameSpec,
    s: &ClassicalStrategy,
) -> Result<EvaluationResult, GameError> {
    let g = spec.geometry();
    if s.answers.len() != g.num_lines() {
        return Err(GameError::MissingLine {
            expected: g.num_lines(),
            found: s.answers.len(),
        });
    }
    let mut per_point = Vec::with_capacity(g.num_points());
    let mut choices = 0;
    for p in 0..g.num_points() {
        let ts = spec.tuples(p);
        let mut wins = 0u64;
        for t in ts {
            let choice = RefereeChoice {
                point: p,
                lines: t.clone(),
            };
            let answers: Vec<[i8; 3]> = t.iter().map(|&l| s.answer(l)).collect();
            wins += spec.wins(&choice, &answers) as u64;
        }
        choices += ts.len() as u64;
        per_point.push(Ratio::new(wins, ts.len() as u64));
    }
    let value = per_point.iter().sum::<Probability>() / g.num_points() as u64;
    Ok(EvaluationResult {
        value,
        per_point,
        choices,
    })
}

/// The Mermin–Peres grid game: Alice fills a row with product +1, Bob a
/// column with product −1; they win when they agree on the shared cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridStrategy {
    /// `alice[x]` is row `x`.
    pub alice: [[i8; 3]; 3],
    /// `bob[y]` is column `y`, indexed by row.
    pub bob: [[i8; 3]; 3],
}

/// The four ±1 triples with the given product.
pub fn triples_with_product(product: i8) -> [[i8; 3]; 4] {
    let mut out = [[0; 3]; 4];
    let mut k = 0;
    for bits in 0..8u8 {
        let t = [0, 1, 2].map(|i| if bits >> i & 1 == 1 { -1 } else { 1 });
        if t.iter().product::<i8>() == product {
            out[k] = t;
            k += 1;
        }
    }
    out
}

impl GridStrategy {
    pub fn new(alice: [[i8; 3]; 3], bob: [[i8; 3]; 3]) -> Result<Self, GameError> {
        for (x, row) in alice.iter().enumerate() {
            if row.iter().product::<i8>() != 1 || row.iter().any(|v| v.abs() != 1) {
                return Err(GameError::Precondition(format!(
                    "Alice's row {x} {row:?} must have product +1"
                )));
            }
        }
        for (y, col) in bob.iter().enumerate() {
            if col.iter().product::<i8>() != -1 || col.iter().any(|v| v.abs() != 1) {
                return Err(GameError::Precondition(format!(
                    "Bob's column {y} {col:?} must have product -1"
                )));
            }
        }
        Ok(GridStrategy { alice, bob })
    }

    pub fn wins(&self, x: usize, y: usize) -> bool {
        self.alice[x][y] == self.bob[y][x]
    }
}

pub fn evaluate_grid_game(s: &GridStrategy) -> EvaluationResult {
    let per_point: Vec<Probability> = (0..9)
        .map(|k| Ratio::from_integer(s.wins(k / 3, k % 3) as u64))
        .collect();
    EvaluationResult {
        value: per_point.iter().sum::<Probability>() / 9,
        per_point,
        choices: 9,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridOptimum {
    pub max: Probability,
    pub min: Probability,
    pub argmax: GridStrategy,
    pub searched: u64,
}

/// Exhaustive search over all 4³ × 4³ table pairs.
pub fn optimal_grid_value() -> GridOptimum {
    let rows = triples_with_product(1);
    let cols = triples_with_product(-1);
    let mut best: Option<(Probability, GridStrategy)> = None;
    let mut min = Ratio::from_integer(1);
    let mut searched = 0;
    for a in 0..64 {
        let alice = [rows[a & 3], rows[a >> 2 & 3], rows[a >> 4 & 3]];
        for b in 0..64 {
            let bob = [cols[b & 3], cols[b >> 2 & 3], cols[b >> 4 & 3]];
            let s = GridStrategy { alice, bob };
            let v = evaluate_grid_game(&s).value;
            searched += 1;
            min = min.min(v);
            if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                best = Some((v, s));
            }
        }
    }
    let (max, argmax) = best.expect("non-empty search");
    GridOptimum {
        max,
        min,
        argmax,
        searched,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoilyOptimum {
    /// Best value over assignment-derived strategies.
    pub value: Probability,
    /// Fewest points at which the incident answers can disagree.
    pub inconsistent_points: usize,
    pub assignment: Assignment,
    pub strategy: ClassicalStrategy,
    /// Distinct assignments achieving the degree.
    pub minimal_assignments: u64,
    /// Whether every minimal assignment reaches `value` for some deviations.
    pub every_minimal_attains: bool,
}

/// Exact optimum of the two-player game on a geometry with three lines per
/// point.
///
/// For a pair of lines through `p` the players lose exactly when the two
/// answers at `p` differ, so a strategy loses 2/3 at every point where its
/// three answers are not all equal and nothing elsewhere. The optimum
/// therefore keeps the largest point set `C` whose values can satisfy every
/// line inside `C`. The search tries complements `S` of growing size and
/// checks the lines avoiding `S` as an F2 system. An assignment solving it,
/// with deviations placed in `S`, is an assignment-derived strategy reaching
/// the same value, which is then evaluated directly.
pub fn optimal_doily_value(g: &Geometry, workers: usize) -> Result<DoilyOptimum, GameError> {
    if g.num_points() > 30 || (0..g.num_points()).any(|p| g.incident_lines(p).len() != 3) {
        return Err(GameError::Precondition(
            "doily optimum needs at most 30 points with three lines through each".into(),
        ));
    }
    let n = g.num_points();
    let spec = GameSpec::new(g.clone(), 2)?;
    let line_masks: Vec<u64> = (0..g.num_lines())
        .map(|l| g.members(l).iter().fold(0u64, |m, &p| m | 1 << p))
        .collect();
    for size in 0..=n {
        for removed in combinations(&(0..n).collect::<Vec<_>>(), size) {
            let s_mask = removed.iter().fold(0u64, |m, &p| m | 1 << p);
            let rows: Vec<(u64, u8)> = (0..g.num_lines())
                .filter(|&l| line_masks[l] & s_mask == 0)
                .map(|l| (line_masks[l], g.line(l).sign().bit()))
                .collect();
            let Ok((bits, _)) = solve_f2(&rows, n) else {
                continue;
            };
            let a = Assignment::new(n, bits)?;
            let deviations: Deviations = violated_lines(g, &a)?
                .violated
                .into_iter()
                .map(|l| {
                    let p = *g
                        .members(l)
                        .iter()
                        .find(|&&p| s_mask >> p & 1 == 1)
                        .expect("line meets S");
                    (l, p)
                })
                .collect();
            let strategy = strategy_from_assignment(g, &a, &deviations)?;
            let value = evaluate_pointline_game(&spec, &strategy)?.value;
            let bound = Ratio::new(1, 1) - Ratio::new(2 * size as u64, 3 * n as u64);
            if value < bound {
                return Err(GameError::Precondition(format!(
                    "constructed strategy reaches {value}, below the bound {bound}"
                )));
            }
            let (minimal_assignments, every_minimal_attains) =
                minimal_sweep(&spec, bound, workers)?;
            return Ok(DoilyOptimum {
                value,
                inconsistent_points: size,
                assignment: a,
                strategy,
                minimal_assignments,
                every_minimal_attains,
            });
        }
    }
    Err(GameError::Precondition("no consistent point set".into()))
}

fn minimal_sweep(
    spec: &GameSpec,
    target: Probability,
    workers: usize,
) -> Result<(u64, bool), GameError> {
    let g = spec.geometry();
    let d = degree_of_contextuality(g, workers)?;
    let mut count = 0;
    let mut all = true;
    for bits in 0..1u64 << g.num_points() {
        let a = Assignment::new(g.num_points(), bits)?;
        if violated_lines(g, &a)?.count != d.degree {
            continue;
        }
        count += 1;
        let mut best = Ratio::from_integer(0);
        for dev in all_deviations(g, &a)? {
            best = best
                .max(evaluate_pointline_game(spec, &strategy_from_assignment(g, &a, &dev)?)?.value);
        }
        all &= best == target;
    }
    Ok((count, all))
}

/// Answers a referee choice with one triple per player.
pub trait Responder {
    fn respond(
        &mut self,
        spec: &GameSpec,
        choice: &RefereeChoice,
        rng: &mut dyn rand::RngCore,
    ) -> Result<Vec<[i8; 3]>, GameError>;
}

impl Responder for ClassicalStrategy {
    fn respond(
        &mut self,
        _spec: &GameSpec,
        choice: &RefereeChoice,
        _rng: &mut dyn rand::RngCore,
    ) -> Result<Vec<[i8; 3]>, GameError> {
        Ok(choice.lines.iter().map(|&l| self.answer(l)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub round: u64,
    pub point: String,
    pub lines: Vec<String>,
    pub responses: Vec<[i8; 3]>,
    pub values: Vec<i8>,
    pub win: bool,
}

impl Transcript {
    /// One whitespace-separated record.
    pub fn to_record(&self) -> String {
        let responses: Vec<String> = self
            .responses
            .iter()
            .map(|t| t.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect())
            .collect();
        format!(
            "{} {} {} {} {}",
            self.round,
            self.point,
            self.lines.join("|"),
            responses.join("|"),
            if self.win { "win" } else { "loss" }
        )
    }
}

pub fn play_round<R: Responder + ?Sized>(
    spec: &GameSpec,
    responder: &mut R,
    round: u64,
    rng: &mut dyn rand::RngCore,
) -> Result<Transcript, GameError> {
    let choice = spec.sample(rng);
    let responses = responder.respond(spec, &choice, rng)?;
    if responses.len() != spec.players() {
        return Err(GameError::Responder(format!(
            "{} answers for {} players",
            responses.len(),
            spec.players()
        )));
    }
    let g = spec.geometry();
    Ok(Transcript {
        round,
        point: g.label_of(choice.point).to_string(),
        lines: choice.lines.iter().map(|&l| g.describe_line(l)).collect(),
        values: spec.values_at_point(&choice, &responses),
        win: spec.wins(&choice, &responses),
        responses,
    })
}

/// Plays `rounds` rounds and counts wins.
pub fn simulate<R: Responder + ?Sized>(
    spec: &GameSpec,
    responder: &mut R,
    rounds: u64,
    rng: &mut dyn rand::RngCore,
) -> Result<u64, GameError> {
    let mut wins = 0;
    for r in 0..rounds {
        wins += play_round(spec, responder, r, rng)?.win as u64;
    }
    Ok(wins)
}

/// Whether `wins` out of `rounds` lies within three standard deviations of
/// the exact probability `p`.
pub fn within_three_sigma(wins: u64, rounds: u64, p: Probability) -> bool {
    let p = *p.numer() as f64 / *p.denom() as f64;
    let n = rounds as f64;
    let sigma = (n * p * (1.0 - p)).sqrt();
    (wins as f64 - n * p).abs() <= 3.0 * sigma.max(f64::EPSILON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_canonical_grids, build_doily, build_eloily, canonical_q, Line};
    use crate::Sign;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: u64, d: u64) -> Probability {
        Ratio::new(n, d)
    }

    #[test]
    fn grid_optimum() {
        let o = optimal_grid_value();
        assert_eq!(o.max, r(8, 9));
        assert_eq!(o.searched, 4096);
        assert_eq!(evaluate_grid_game(&o.argmax).value, r(8, 9));
        assert!(o.min < o.max);
    }

    #[test]
    fn forced_cell_strategy() {
        // one table satisfying every row and two columns; Bob must break
        // the bottom-right cell of the third column
        let alice = [[1, 1, 1], [1, 1, 1], [-1, -1, 1]];
        let bob = [[1, 1, -1], [1, 1, -1], [1, 1, -1]];
        let s = GridStrategy::new(alice, bob).unwrap();
        assert_eq!(evaluate_grid_game(&s).value, r(8, 9));
        assert!(!s.wins(2, 2));
        assert!(GridStrategy::new([[1, 1, 1]; 3], [[1, 1, 1]; 3]).is_err());
    }

    #[test]
    fn eloily_minimal_values() {
        let g = build_eloily(&canonical_q()).unwrap();
        let a = Assignment::all_plus(&g).unwrap();
        let s = strategy_from_assignment(&g, &a, &first_point_deviations(&g, &a).unwrap()).unwrap();
        let two = GameSpec::new(g.clone(), 2).unwrap();
        let four = GameSpec::new(g.clone(), 4).unwrap();
        assert_eq!(evaluate_pointline_game(&two, &s).unwrap().value, r(13, 15));
        assert_eq!(evaluate_pointline_game(&four, &s).unwrap().value, r(11, 15));
        assert_eq!(two.choices().count(), 27 * 10);
        assert_eq!(four.choices().count(), 27 * 5);
    }

    #[test]
    fn doily_game_and_players_guard() {
        let d = build_doily(&canonical_q()).unwrap();
        let a = Assignment::all_plus(&d).unwrap();
        let s = strategy_from_assignment(&d, &a, &first_point_deviations(&d, &a).unwrap()).unwrap();
        let spec = GameSpec::new(d.clone(), 2).unwrap();
        assert_eq!(evaluate_pointline_game(&spec, &s).unwrap().value, r(13, 15));
        assert!(GameSpec::new(d.clone(), 4).is_err());
        assert!(GameSpec::new(d, 3).is_err());
    }

    #[test]
    fn doily_optimum() {
        let d = build_doily(&canonical_q()).unwrap();
        let o = optimal_doily_value(&d, 2).unwrap();
        assert_eq!(o.value, r(13, 15));
        assert_eq!(o.inconsistent_points, 3);
        assert!(o.every_minimal_attains);
    }

    #[test]
    fn positive_geometry_wins_always() {
        let g = build_eloily(&canonical_q()).unwrap();
        let lines: Vec<Line> = g
            .lines()
            .iter()
            .map(|l| Line::new(l.points(), Sign::Plus))
            .collect();
        let h = Geometry::from_parts("positive", 3, g.point_ids(), lines).unwrap();
        let a = Assignment::all_plus(&h).unwrap();
        let s = strategy_from_assignment(&h, &a, &[]).unwrap();
        assert!(s
            .answers()
            .iter()
            .enumerate()
            .all(|(l, t)| *t == h.members(l).map(|p| a.value(p))));
        assert_eq!(
            evaluate_pointline_game(&GameSpec::new(h, 4).unwrap(), &s)
                .unwrap()
                .value,
            r(1, 1)
        );
    }

    #[test]
    fn deviation_errors() {
        let g = build_eloily(&canonical_q()).unwrap();
        let a = Assignment::all_plus(&g).unwrap();
        let neg = g.negative_lines();
        let off = (0..27).find(|p| !g.members(neg[0]).contains(p)).unwrap();
        let mut dev = first_point_deviations(&g, &a).unwrap();
        dev[0].1 = off;
        assert!(matches!(
            strategy_from_assignment(&g, &a, &dev),
            Err(GameError::Deviation(_))
        ));
        assert!(matches!(
            strategy_from_assignment(&g, &a, &[]),
            Err(GameError::Deviation(_))
        ));
        let positive = (0..45).find(|l| !neg.contains(l)).unwrap();
        let mut dev = first_point_deviations(&g, &a).unwrap();
        dev.push((positive, g.members(positive)[0]));
        assert!(matches!(
            strategy_from_assignment(&g, &a, &dev),
            Err(GameError::Deviation(_))
        ));
        assert!(matches!(
            ClassicalStrategy::new(&g, vec![[1, 1, 1]; 45]),
            Err(GameError::Parity { .. })
        ));
    }

    #[test]
    fn play_is_reproducible() {
        let g = build_canonical_grids().unwrap()[0].clone();
        let a = Assignment::all_plus(&g).unwrap();
        let mut s =
            strategy_from_assignment(&g, &a, &first_point_deviations(&g, &a).unwrap()).unwrap();
        let spec = GameSpec::new(g, 2).unwrap();
        let run = |s: &mut ClassicalStrategy| {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            (0..20)
                .map(|i| play_round(&spec, s, i, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(&mut s), run(&mut s));
        assert_eq!(run(&mut s)[0].to_record().split(' ').count(), 5);
    }

    #[test]
    fn three_sigma_helper() {
        assert!(within_three_sigma(733, 1000, r(11, 15)));
        assert!(!within_three_sigma(900, 1000, r(11, 15)));
        assert!(within_three_sigma(1000, 1000, r(1, 1)));
        assert!(!within_three_sigma(999, 1000, r(1, 1)));
    }
}
