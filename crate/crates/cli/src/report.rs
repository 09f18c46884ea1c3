//! Report emission: JSON documents with keys in canonical (alphabetical)
//! order, RFC-4180 CSV with 9 significant digits, and the SVG level-set
//! polyline for bivariate models.

use gauge_graph::Margin;
use serde::Serialize;

/// One coefficient estimate inside an alpha report.
#[derive(Serialize)]
pub struct AlphaEntry {
    pub contact_value: f64,
    pub method: &'static str,
    pub value: f64,
}

/// The `alpha` subcommand report.
#[derive(Serialize)]
pub struct AlphaReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    pub from: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<AlphaEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<AlphaEntry>,
    pub sign: String,
    pub to: String,
}

/// One coefficient estimate inside a beta report.
#[derive(Serialize)]
pub struct BetaEntry {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_r2: Option<f64>,
    pub low_quality: bool,
    pub method: &'static str,
    pub sigma: f64,
    pub value: f64,
}

/// The `beta` subcommand report.
#[derive(Serialize)]
pub struct BetaReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    pub from: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<BetaEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recurrence: Option<BetaEntry>,
    pub to: String,
}

/// One confirmed direction: the subset (sorted labels), the minimizing
/// witness over the full vertex set (label order), and the level gap.
#[derive(Serialize)]
pub struct DirectionEntry {
    #[serde(rename = "A")]
    pub a: Vec<String>,
    pub gap: f64,
    pub witness: Vec<f64>,
}

/// Candidate directions read off the numeric alpha vectors.
#[derive(Serialize)]
pub struct AlphasReport {
    pub directions: Vec<Vec<String>>,
    pub possibly_incomplete: bool,
}

/// The `directions --method both` report.
#[derive(Serialize)]
pub struct BothDirectionsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    pub enumerated: Vec<DirectionEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from_alphas: Option<AlphasReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One shortest path in the validate summary.
#[derive(Serialize)]
pub struct PathEntry {
    pub from: String,
    pub to: String,
    pub via: Vec<String>,
}

/// The `validate` graph summary.
#[derive(Serialize)]
pub struct ValidateReport {
    pub cliques: Vec<Vec<String>>,
    pub margin: String,
    pub paths: Vec<PathEntry>,
    pub separators: Vec<String>,
    pub vertices: Vec<String>,
}

/// One invariant check in the verify report.
#[derive(Serialize)]
pub struct CheckEntry {
    pub detail: String,
    pub name: &'static str,
    pub pass: bool,
}

/// The `verify` suite report.
#[derive(Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

/// Pretty-prints a report with a trailing newline; struct fields are
/// declared alphabetically, so key order is canonical.
pub fn print_json<T: Serialize>(report: &T) {
    let out = serde_json::to_string_pretty(report).expect("report serializes");
    println!("{out}");
}

/// A number with 9 significant digits, for CSV cells.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// RFC-4180 field quoting: fields containing commas, quotes, or line
/// breaks are wrapped in double quotes with inner quotes doubled.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Joins fields into one CSV record (no trailing newline).
pub fn csv_record<I: IntoIterator<Item = String>>(fields: I) -> String {
    fields.into_iter().map(|f| csv_field(&f)).collect::<Vec<_>>().join(",")
}

/// Renders sampled level-set points as an SVG polyline. Points are in the
/// model's coordinate scale (the level set lies inside the unit sup-norm
/// ball); a red dot marks the conditional contact point `(1, alpha)`.
pub fn level_set_svg(points: &[Vec<f64>], contact: (f64, f64), margin: Margin) -> String {
    const SIZE: f64 = 440.0;
    const PAD: f64 = 20.0;
    let lo = match margin {
        Margin::Exponential => 0.0,
        Margin::Laplace => -1.0,
    };
    let hi = 1.0;
    let px = |v: f64| PAD + (v - lo) / (hi - lo) * (SIZE - 2.0 * PAD);
    let py = |v: f64| SIZE - PAD - (v - lo) / (hi - lo) * (SIZE - 2.0 * PAD);

    let mut path = String::new();
    for p in points {
        if !path.is_empty() {
            path.push(' ');
        }
        path.push_str(&format!("{:.2},{:.2}", px(p[0]), py(p[1])));
    }
    // Laplace level sets are closed loops; repeat the first point
    if margin == Margin::Laplace {
        if let Some(p) = points.first() {
            path.push_str(&format!(" {:.2},{:.2}", px(p[0]), py(p[1])));
        }
    }

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\"/>\n"
    ));
    // axes through the origin
    svg.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>\n",
        px(lo),
        py(0.0),
        px(hi),
        py(0.0)
    ));
    svg.push_str(&format!(
        "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>\n",
        px(0.0),
        py(lo),
        px(0.0),
        py(hi)
    ));
    svg.push_str(&format!(
        "  <polyline points=\"{path}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n"
    ));
    svg.push_str(&format!(
        "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"red\"/>\n",
        px(contact.0),
        py(contact.1)
    ));
    svg.push_str("</svg>\n");
    svg
}
