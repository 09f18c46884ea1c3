//! The model file format: a JSON document naming the margin, the vertex
//! labels, and one gauge per clique. Labels are arbitrary strings; they are
//! mapped to contiguous integer indices in lexicographic order, so reports
//! and point arguments always align with the sorted label list.

use std::collections::BTreeMap;

use gauge_graph::{assemble_model, build_block_graph, Gauge, Margin, Model};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// The on-disk document. Field order here is the canonical serialization
/// order (alphabetical).
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub cliques: Vec<CliqueDoc>,
    pub margin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CliqueDoc {
    pub gauge: GaugeDoc,
    pub vertices: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeDoc {
    pub family: String,
    /// Family-specific parameters; a sorted map so serialization is
    /// canonical.
    pub params: BTreeMap<String, serde_json::Value>,
}

/// A parsed model plus its label table: `labels[i]` is the label of model
/// vertex `i + 1`, and labels are sorted lexicographically.
pub struct LabeledModel {
    pub model: Model,
    pub labels: Vec<String>,
    pub doc: ModelDoc,
}

impl LabeledModel {
    /// Model vertex (1-based) for a label.
    pub fn index_of(&self, label: &str) -> Result<usize, CliError> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .map(|k| k + 1)
            .map_err(|_| CliError::model(format!("unknown vertex label {label:?}")))
    }

    /// Label for a model vertex (1-based).
    pub fn label_of(&self, vertex: usize) -> &str {
        &self.labels[vertex - 1]
    }

    pub fn margin(&self) -> Margin {
        self.model.margin()
    }
}

fn number(
    params: &BTreeMap<String, serde_json::Value>,
    path: &str,
    key: &str,
) -> Result<f64, CliError> {
    params
        .get(key)
        .ok_or_else(|| CliError::model(format!("{path}.params.{key}: missing")))?
        .as_f64()
        .ok_or_else(|| CliError::model(format!("{path}.params.{key}: expected a number")))
}

fn matrix(
    params: &BTreeMap<String, serde_json::Value>,
    path: &str,
    key: &str,
) -> Result<Vec<Vec<f64>>, CliError> {
    let raw = params
        .get(key)
        .ok_or_else(|| CliError::model(format!("{path}.params.{key}: missing")))?;
    serde_json::from_value(raw.clone())
        .map_err(|_| CliError::model(format!("{path}.params.{key}: expected a numeric matrix")))
}

fn expect_keys(
    params: &BTreeMap<String, serde_json::Value>,
    path: &str,
    allowed: &[&str],
) -> Result<(), CliError> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(CliError::model(format!(
                "{path}.params.{key}: unknown parameter (expected {allowed:?})"
            )));
        }
    }
    Ok(())
}

fn build_gauge(doc: &GaugeDoc, dim: usize, path: &str) -> Result<Gauge, CliError> {
    let ctx = |e: gauge_graph::GaugeError| CliError::model(format!("{path}.gauge: {e}"));
    match doc.family.as_str() {
        "logistic" => {
            expect_keys(&doc.params, path, &["theta"])?;
            Gauge::logistic(dim, number(&doc.params, path, "theta")?).map_err(ctx)
        }
        "gaussian_exp" => {
            expect_keys(&doc.params, path, &["rho"])?;
            Gauge::gaussian_exp(number(&doc.params, path, "rho")?).map_err(ctx)
        }
        "inverted_logistic" => {
            expect_keys(&doc.params, path, &["theta"])?;
            Gauge::inverted_logistic(dim, number(&doc.params, path, "theta")?).map_err(ctx)
        }
        "square" => {
            expect_keys(&doc.params, path, &["theta"])?;
            Gauge::square(number(&doc.params, path, "theta")?).map_err(ctx)
        }
        "asymmetric_ad" => {
            expect_keys(&doc.params, path, &["gamma", "theta"])?;
            Gauge::asymmetric_ad(
                number(&doc.params, path, "theta")?,
                number(&doc.params, path, "gamma")?,
            )
            .map_err(ctx)
        }
        "gaussian_laplace" => {
            expect_keys(&doc.params, path, &["sigma"])?;
            Gauge::gaussian_laplace(matrix(&doc.params, path, "sigma")?).map_err(ctx)
        }
        other => Err(CliError::model(format!(
            "{path}.gauge.family: unknown family {other:?} (expected logistic, gaussian_exp, \
             inverted_logistic, square, asymmetric_ad, or gaussian_laplace)"
        ))),
    }
}

/// Parses a document into a model, mapping string labels to 1-based indices
/// in lexicographic order.
pub fn parse_model(text: &str) -> Result<LabeledModel, CliError> {
    let doc: ModelDoc = serde_json::from_str(text)
        .map_err(|e| CliError::model(format!("model file: {e}")))?;

    let margin = match doc.margin.as_str() {
        "exponential" => Margin::Exponential,
        "laplace" => Margin::Laplace,
        other => {
            return Err(CliError::model(format!(
                "margin: unknown margin {other:?} (expected \"exponential\" or \"laplace\")"
            )))
        }
    };

    if doc.cliques.is_empty() {
        return Err(CliError::model("cliques: empty list"));
    }

    // label table: declared vertices, or the union of the clique lists
    let mut labels: Vec<String> = match &doc.vertices {
        Some(vs) => {
            let mut sorted = vs.clone();
            sorted.sort();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(CliError::model(format!("vertices: duplicate label {:?}", w[0])));
            }
            sorted
        }
        None => {
            let mut all: Vec<String> =
                doc.cliques.iter().flat_map(|c| c.vertices.iter().cloned()).collect();
            all.sort();
            all.dedup();
            all
        }
    };
    labels.shrink_to_fit();

    let index_of = |label: &str| labels.binary_search_by(|l| l.as_str().cmp(label)).map(|k| k + 1);

    let mut seen = vec![false; labels.len()];
    let mut cliques: Vec<Vec<usize>> = Vec::with_capacity(doc.cliques.len());
    for (k, clique) in doc.cliques.iter().enumerate() {
        let mut ix = Vec::with_capacity(clique.vertices.len());
        for (m, label) in clique.vertices.iter().enumerate() {
            let v = index_of(label).map_err(|_| {
                CliError::model(format!(
                    "cliques[{k}].vertices[{m}]: label {label:?} is not a declared vertex"
                ))
            })?;
            seen[v - 1] = true;
            ix.push(v);
        }
        cliques.push(ix);
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(CliError::model(format!(
            "vertices: label {:?} appears in no clique",
            labels[v]
        )));
    }

    let graph = build_block_graph(&cliques)
        .map_err(|e| CliError::model(format!("cliques: {e}")))?;

    let mut gauges = Vec::with_capacity(doc.cliques.len());
    for (k, (clique, ix)) in doc.cliques.iter().zip(&cliques).enumerate() {
        let g = build_gauge(&clique.gauge, clique.vertices.len(), &format!("cliques[{k}]"))?;
        gauges.push((ix.clone(), g));
    }

    let model = assemble_model(graph, gauges, margin)
        .map_err(|e| CliError::model(format!("cliques: {e}")))?;
    Ok(LabeledModel { model, labels, doc })
}

/// Canonical serialization: vertices sorted, cliques sorted by their sorted
/// label lists (with each clique's labels sorted), parameters in key order.
/// Parsing the output reproduces the same model and the same bytes.
pub fn canonical_json(m: &LabeledModel) -> String {
    let mut cliques: Vec<CliqueDoc> = m
        .doc
        .cliques
        .iter()
        .map(|c| {
            let mut vs = c.vertices.clone();
            vs.sort();
            CliqueDoc { gauge: reorder_gauge(c, &vs), vertices: vs }
        })
        .collect();
    cliques.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    let doc = ModelDoc {
        cliques,
        margin: m.doc.margin.clone(),
        vertices: Some(m.labels.clone()),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("document serializes");
    out.push('\n');
    out
}

/// Rewrites order-sensitive parameters when canonicalization reorders a
/// clique's vertex list. The logistic, inverted-logistic, Gaussian, and
/// square families are exchangeable in their arguments; the asymmetric AD
/// gauge swaps its two shape parameters, and a Gaussian-Laplace correlation
/// matrix is permuted congruently with its coordinates.
fn reorder_gauge(c: &CliqueDoc, sorted: &[String]) -> GaugeDoc {
    let mut gauge = c.gauge.clone();
    if c.vertices == sorted {
        return gauge;
    }
    // perm[i] = declared position of the i-th label in sorted order
    let perm: Vec<usize> = sorted
        .iter()
        .map(|l| c.vertices.iter().position(|v| v == l).expect("label present"))
        .collect();
    match gauge.family.as_str() {
        "asymmetric_ad" => {
            let theta = gauge.params.get("theta").cloned();
            let gamma = gauge.params.get("gamma").cloned();
            if let (Some(t), Some(g)) = (theta, gamma) {
                gauge.params.insert("theta".into(), g);
                gauge.params.insert("gamma".into(), t);
            }
        }
        "gaussian_laplace" => {
            let sigma = gauge.params.get("sigma").cloned();
            if let Some(serde_json::Value::Array(rows)) = sigma {
                let entry = |i: usize, j: usize| -> serde_json::Value {
                    rows[perm[i]].as_array().expect("sigma row")[perm[j]].clone()
                };
                let n = sorted.len();
                let permuted: Vec<serde_json::Value> = (0..n)
                    .map(|i| serde_json::Value::Array((0..n).map(|j| entry(i, j)).collect()))
                    .collect();
                gauge.params.insert("sigma".into(), serde_json::Value::Array(permuted));
            }
        }
        _ => {}
    }
    gauge
}
