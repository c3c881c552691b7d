//! Plain-text geometry files.
//!
//! One context per line, `LABEL1 LABEL2 LABEL3 SIGN`, with `SIGN` one of
//! `+1`/`-1`. Blank lines and lines starting with `#` are ignored, except a
//! `# name: <name>` comment which names the geometry. Signs are stored, not
//! recomputed, so hypothetical sign distributions survive a round trip.

use std::fs;
use std::path::Path;

use super::{validate_line, Geometry, GeometryError, Line, PointId};
use crate::pauli::{PauliOperator, Sign};

/// Canonical text: a name header, then the lines sorted by point ids.
pub fn to_text(g: &Geometry) -> String {
    let mut out = format!("# name: {}\n", g.name());
    for line in g.lines() {
        let [a, b, c] = line.points().map(|id| {
            g.label_of(g.point_index(id).expect("own point"))
                .to_string()
        });
        out.push_str(&format!("{a} {b} {c} {}\n", line.sign()));
    }
    out
}

fn parse_sign(token: &str) -> Option<Sign> {
    match token {
        "+1" | "+" | "1" => Some(Sign::Plus),
        "-1" | "-" => Some(Sign::Minus),
        _ => None,
    }
}

pub fn from_text(text: &str) -> Result<Geometry, GeometryError> {
    let mut name = String::from("loaded");
    let mut width: Option<usize> = None;
    let mut lines = Vec::new();
    let mut ids: Vec<PointId> = Vec::new();
    let mut first_seen: Vec<([PointId; 3], usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let err = |message: String| GeometryError::Format {
            line: lineno,
            message,
        };
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("name:") {
                name = n.trim().to_string();
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 4 {
            return Err(err(format!(
                "expected 3 labels and a sign, found {} fields",
                tokens.len()
            )));
        }
        let mut triple = [0; 3];
        for (k, tok) in tokens[..3].iter().enumerate() {
            let op: PauliOperator = tok.parse().map_err(|e| err(format!("{e}")))?;
            if op.sign() != Sign::Plus || tok.starts_with(['+', '-']) {
                return Err(err(format!("point label {tok} must not carry a sign")));
            }
            match width {
                None => width = Some(op.width()),
                Some(w) if w != op.width() => {
                    return Err(err(format!(
                        "label {tok} has {} qubits, expected {w}",
                        op.width()
                    )))
                }
                _ => {}
            }
            triple[k] = op.point().map_err(|e| err(format!("{e}")))?.id();
        }
        let sign =
            parse_sign(tokens[3]).ok_or_else(|| err(format!("invalid sign {:?}", tokens[3])))?;
        let line = Line::new(triple, sign);
        validate_line(width.expect("set above"), &line).map_err(|e| err(e.to_string()))?;
        if let Some((_, prev)) = first_seen.iter().find(|(t, _)| *t == line.points()) {
            return Err(err(format!(
                "duplicate context, first given on line {prev}"
            )));
        }
        first_seen.push((line.points(), lineno));
        ids.extend(line.points());
        lines.push(line);
    }
    let width = width.ok_or(GeometryError::Empty)?;
    ids.sort_unstable();
    ids.dedup();
    Geometry::from_parts(name, width, ids, lines)
}

pub fn save(g: &Geometry, path: impl AsRef<Path>) -> Result<(), GeometryError> {
    fs::write(path, to_text(g))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Geometry, GeometryError> {
    from_text(&fs::read_to_string(path)?)
}
