use std::time::Duration;

use eloily_core::games::Probability;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{Format, RunConfig};
use crate::error::CliError;

/// Bumped on any change to field names, types or meaning.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityJson {
    /// Exact value as "p/q", or null when the value is not known exactly.
    pub rational: Option<String>,
    pub decimal: f64,
}

impl From<Probability> for ProbabilityJson {
    fn from(p: Probability) -> Self {
        let rational = if *p.denom() == 1 {
            p.numer().to_string()
        } else {
            format!("{}/{}", p.numer(), p.denom())
        };
        ProbabilityJson {
            rational: Some(rational),
            decimal: *p.numer() as f64 / *p.denom() as f64,
        }
    }
}

impl ProbabilityJson {
    /// A floating-point probability; the rational form is recovered when a
    /// fraction with denominator at most 10⁴ lies within 10⁻¹⁰, and then
    /// also fixes the decimal so rounding noise never leaves [0, 1].
    pub fn from_float(p: f64) -> Self {
        match recover_rational(p, 10_000, 1e-10) {
            Some(r) => ProbabilityJson::from(r),
            None => ProbabilityJson {
                rational: None,
                decimal: p.clamp(0.0, 1.0),
            },
        }
    }
}

fn recover_rational(x: f64, max_den: u64, tol: f64) -> Option<Probability> {
    if !(0.0..=1.0 + tol).contains(&x) {
        return None;
    }
    // continued-fraction convergents
    let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor() as u64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some(Probability::new(h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub tool: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub passed: bool,
    pub result: Value,
    pub checks: Vec<Check>,
    /// Wall-clock timings; text output only, so JSON and CSV stay
    /// reproducible.
    #[serde(skip)]
    pub timings: Vec<(String, Duration)>,
}

impl Report {
    pub fn new(config: &RunConfig) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: "eloily",
            command: config.command.clone(),
            config: config.clone(),
            passed: true,
            result: Value::Object(Map::new()),
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.result
            .as_object_mut()
            .expect("result is an object")
            .insert(key.to_string(), v);
    }

    pub fn time(&mut self, what: impl Into<String>, d: Duration) {
        self.timings.push((what.into(), d));
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => self.render_csv(),
            Format::Text => Ok(self.render_text()),
        }
    }

    fn rows(&self) -> Vec<(String, String)> {
        let mut rows = Vec::new();
        let header = json!({
            "schema_version": self.schema_version,
            "command": self.command,
            "config": self.config,
            "passed": self.passed,
        });
        flatten("", &header, &mut rows);
        flatten("result", &self.result, &mut rows);
        for c in &self.checks {
            rows.push((
                format!("check.{}", c.name),
                format!("{} {}", pass_word(c.passed), c.detail),
            ));
        }
        rows
    }

    fn render_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["key", "value"])?;
        for (k, v) in self.rows() {
            w.write_record([k, v])?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 input"))
    }

    fn render_text(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "eloily {} (schema {})\ngeometry={} players={} seed={} shots={} workers={} defaults: {}\n\n",
            self.command,
            self.schema_version,
            c.geometry,
            c.players,
            c.seed,
            c.shots,
            c.workers,
            if c.defaulted.is_empty() { "none".to_string() } else { c.defaulted.join(", ") }
        );
        let mut rows = Vec::new();
        flatten("", &self.result, &mut rows);
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in rows {
            out.push_str(&format!("{k:width$}  {v}\n"));
        }
        if !self.checks.is_empty() {
            out.push('\n');
            for ch in &self.checks {
                out.push_str(&format!(
                    "{} {}: {}\n",
                    pass_word(ch.passed),
                    ch.name,
                    ch.detail
                ));
            }
        }
        if !self.timings.is_empty() {
            out.push('\n');
            for (what, d) in &self.timings {
                out.push_str(&format!("time {what}: {:.3} s\n", d.as_secs_f64()));
            }
        }
        out.push_str(&format!(
            "\n{}\n",
            if self.passed { "ok" } else { "FAILED" }
        ));
        out
    }
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Dotted-path rows; a probability object collapses to "rational (decimal)".
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m)
            if m.len() == 2 && m.contains_key("rational") && m.contains_key("decimal") =>
        {
            let dec = m["decimal"].as_f64().unwrap_or(f64::NAN);
            let text = match m["rational"].as_str() {
                Some(r) => format!("{r} ({dec:.6})"),
                None => format!("{dec:.12}"),
            };
            out.push((prefix.to_string(), text));
        }
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            let sep = if items.iter().any(|i| i.contains(' ')) {
                " | "
            } else {
                " "
            };
            out.push((prefix.to_string(), items.join(sep)));
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "null".into(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_recovery() {
        assert_eq!(
            recover_rational(1.0 - 1e-13, 10_000, 1e-10),
            Some(Probability::new(1, 1))
        );
        assert_eq!(
            recover_rational(11.0 / 15.0, 10_000, 1e-10),
            Some(Probability::new(11, 15))
        );
        assert_eq!(
            recover_rational(std::f64::consts::FRAC_1_SQRT_2, 10_000, 1e-10),
            None
        );
        assert_eq!(ProbabilityJson::from_float(1.0 + 1e-15).decimal, 1.0);
        let p = ProbabilityJson::from(Probability::new(13, 15));
        assert_eq!(p.rational.as_deref(), Some("13/15"));
    }
}
